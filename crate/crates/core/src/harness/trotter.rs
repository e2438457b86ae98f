//! First-order Trotter baseline `(e^{iτA} e^{iτB})^m` with even bonds in `A`
//! and odd bonds in `B`.

use serde::Serialize;

use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::linalg::{expm_i_hermitian, mat_pow, Spectrum};
use crate::model::{build_dense_hamiltonian, Limits, SpinChainHamiltonian};
use crate::mpo::qca_to_mpo;
use crate::qca::{build_qca, contract_circuit, layer_to_dense, Gate, QcaOptions};
use crate::table::{fmt_num, fmt_opt};

pub fn trotter_propagator(h: &SpinChainHamiltonian, t: f64, steps: u64, limits: &Limits) -> Result<DenseOperator> {
    if steps == 0 {
        return Err(Error::input("trotter step count must be at least 1"));
    }
    limits.check("trotter propagator", h.n())?;
    let tau = t / steps as f64;
    let layer = |parity: usize| -> Result<DenseOperator> {
        let gates = h
            .terms()
            .iter()
            .filter(|term| term.site % 2 == parity)
            .map(|term| {
                Ok(Gate {
                    block: term.support(),
                    matrix: expm_i_hermitian(term.matrix.as_ref(), tau)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        layer_to_dense(&gates, h.n(), limits)
    };
    let step = layer(0)?.multiply(&layer(1)?)?;
    DenseOperator::new(h.full_interval(), mat_pow(step.matrix(), steps))
}

pub const TROTTER_CSV_HEADER: [&str; 7] = [
    "m",
    "trotter_error",
    "block",
    "qca_error",
    "mpo_max_bond",
    "pre_compression_bond",
    "bond_cap",
];

/// Trotter error at `m` steps and the smallest scanned block whose circuit is
/// at least as accurate.
#[derive(Clone, Debug, Serialize)]
pub struct TrotterRow {
    pub m: u64,
    pub trotter_error: f64,
    pub block: Option<usize>,
    pub qca_error: Option<f64>,
    pub mpo_max_bond: Option<usize>,
    pub pre_compression_bond: Option<usize>,
    /// `2^{2·block}`.
    pub bond_cap: Option<u128>,
}

impl TrotterRow {
    pub fn csv_fields(&self) -> Vec<String> {
        let opt = |x: Option<String>| x.unwrap_or_default();
        vec![
            self.m.to_string(),
            fmt_num(self.trotter_error),
            opt(self.block.map(|b| b.to_string())),
            fmt_opt(self.qca_error),
            opt(self.mpo_max_bond.map(|b| b.to_string())),
            opt(self.pre_compression_bond.map(|b| b.to_string())),
            opt(self.bond_cap.map(|b| b.to_string())),
        ]
    }
}

pub fn trotter_compare(
    h: &SpinChainHamiltonian,
    t: f64,
    step_list: &[u64],
    block_list: &[usize],
    opts: &QcaOptions,
    mpo_tol: f64,
) -> Result<Vec<TrotterRow>> {
    let limits = &opts.limits;
    let full = build_dense_hamiltonian(h, h.full_interval(), limits)?;
    let exact = Spectrum::new(full.matrix().as_ref())?.exp_i(t);
    let exact = DenseOperator::new(h.full_interval(), exact)?;

    let mut blocks = block_list.to_vec();
    blocks.sort_unstable();
    blocks.dedup();
    let mut circuits = Vec::with_capacity(blocks.len());
    for &b in &blocks {
        let c = build_qca(h, t, b, opts)?;
        let err = exact.distance(&contract_circuit(&c, limits)?)?;
        circuits.push((b, c, err));
    }

    step_list
        .iter()
        .map(|&m| {
            let trotter_error = exact.distance(&trotter_propagator(h, t, m, limits)?)?;
            let mut row = TrotterRow {
                m,
                trotter_error,
                block: None,
                qca_error: None,
                mpo_max_bond: None,
                pre_compression_bond: None,
                bond_cap: None,
            };
            if let Some((b, c, err)) = circuits.iter().find(|(_, _, e)| *e <= trotter_error) {
                let q = qca_to_mpo(c, mpo_tol)?;
                row.block = Some(*b);
                row.qca_error = Some(*err);
                row.mpo_max_bond = Some(q.mpo.max_bond());
                row.pre_compression_bond = Some(q.pre_compression_max_bond);
                row.bond_cap = Some(1u128 << (2 * (*b).min(60)));
            }
            Ok(row)
        })
        .collect()
}
