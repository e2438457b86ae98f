//! Global and per-cut circuit errors over a grid of times and block sizes.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Spectrum;
use crate::model::{build_dense_hamiltonian, SpinChainHamiltonian};
use crate::qca::{build_qca, contract_circuit, QcaOptions};
use crate::table::{fmt_bool, fmt_num, CsvWriter};

/// Slack for the global-versus-triangle check.
pub const TRIANGLE_SLACK: f64 = 1e-7;
/// Slack for measured patch errors against their bounds.
pub const BOUND_SLACK: f64 = 1e-8;

pub const SCAN_CSV_HEADER: [&str; 9] = [
    "t",
    "block",
    "cuts",
    "per_cut_error",
    "global_error",
    "triangle_sum",
    "lr_bound",
    "triangle_ok",
    "lr_ok",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub t: f64,
    pub block: usize,
    pub cuts: usize,
    /// Largest measured patch error over the cuts.
    pub per_cut_error: f64,
    /// `‖e^{itH} − (⊗U)(⊗V)‖`.
    pub global_error: f64,
    /// Sum of measured patch errors.
    pub triangle_sum: f64,
    /// Sum over cuts of the integrated Lieb-Robinson bound.
    pub lr_bound: f64,
    /// Every measured patch error lies below its own bound.
    pub lr_ok: bool,
}

impl ScanRow {
    pub fn triangle_ok(&self) -> bool {
        self.global_error <= self.triangle_sum + TRIANGLE_SLACK
    }

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            fmt_num(self.t),
            self.block.to_string(),
            self.cuts.to_string(),
            fmt_num(self.per_cut_error),
            fmt_num(self.global_error),
            fmt_num(self.triangle_sum),
            fmt_num(self.lr_bound),
            fmt_bool(self.triangle_ok()).to_string(),
            fmt_bool(self.lr_ok).to_string(),
        ]
    }
}

/// One row per `(t, block)` pair, in input order.
pub fn error_scan(
    h: &SpinChainHamiltonian,
    t_list: &[f64],
    block_list: &[usize],
    opts: &QcaOptions,
) -> Result<Vec<ScanRow>> {
    let limits = &opts.limits;
    let full = build_dense_hamiltonian(h, h.full_interval(), limits)?;
    let spectrum = Spectrum::new(full.matrix().as_ref())?;
    let pairs: Vec<(f64, usize)> = t_list
        .iter()
        .flat_map(|&t| block_list.iter().map(move |&b| (t, b)))
        .collect();
    pairs
        .par_iter()
        .map(|&(t, block)| {
            scan_point(h, &spectrum, t, block, opts).map_err(|e| e.context(format!("t = {t}, block = {block}")))
        })
        .collect()
}

fn scan_point(h: &SpinChainHamiltonian, spectrum: &Spectrum, t: f64, block: usize, opts: &QcaOptions) -> Result<ScanRow> {
    let circuit = build_qca(h, t, block, opts)?;
    let contracted = contract_circuit(&circuit, &opts.limits)?;
    let exact = spectrum.exp_i(t);
    let global_error = crate::linalg::operator_norm((&exact - contracted.matrix()).as_ref())?;
    let mut per_cut_error: f64 = 0.0;
    let mut lr_ok = true;
    for c in &circuit.per_cut_errors {
        let measured = c
            .error_exact
            .ok_or_else(|| Error::computation(format!("no measured error at cut {}", c.cut)))?;
        per_cut_error = per_cut_error.max(measured);
        lr_ok &= measured <= c.error_bound + BOUND_SLACK;
    }
    Ok(ScanRow {
        t,
        block,
        cuts: circuit.per_cut_errors.len(),
        per_cut_error,
        global_error,
        triangle_sum: circuit.triangle_sum(),
        lr_bound: circuit.per_cut_errors.iter().map(|c| c.error_bound).sum(),
        lr_ok,
    })
}

pub fn write_scan_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<W> {
    let mut w = CsvWriter::new(out, &SCAN_CSV_HEADER)?;
    for r in rows {
        w.row(&r.csv_fields())?;
    }
    w.finish()
}
