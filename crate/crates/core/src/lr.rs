//! Heisenberg-picture evolution `τ_t^B(A) = e^{-itB} A e^{itB}`, the measured
//! Lieb-Robinson discrepancy between full and windowed evolution of a
//! bridging term, and the series bound `Σ_l ‖h_I‖ (2‖h‖|t|)^l / l!`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::linalg::Spectrum;
use crate::model::{build_dense_hamiltonian, Interval, Limits, SpinChainHamiltonian};
use crate::table::{fmt_num, CsvWriter};

/// Extra series terms summed past the first one before the tail majorant.
pub const DEFAULT_EXTRA_TERMS: usize = 60;

/// `τ_t^{hmat}(a)`, evaluated on the hull of both supports.
pub fn heisenberg_evolve(a: &DenseOperator, hmat: &DenseOperator, t: f64) -> Result<DenseOperator> {
    let hull = a.support().hull(&hmat.support());
    let a = a.embed(hull)?;
    if t == 0.0 {
        return Ok(a);
    }
    let b = hmat.embed(hull)?;
    let spec = Spectrum::new(b.matrix().as_ref())?;
    DenseOperator::new(hull, spec.conjugate(a.matrix().as_ref(), t))
}

/// Heisenberg evolution under a fixed Hamiltonian with its spectrum cached.
#[derive(Clone, Debug)]
pub struct HeisenbergFrame {
    support: Interval,
    spectrum: Spectrum,
}

impl HeisenbergFrame {
    pub fn new(hmat: &DenseOperator) -> Result<Self> {
        Ok(HeisenbergFrame {
            support: hmat.support(),
            spectrum: Spectrum::new(hmat.matrix().as_ref())?,
        })
    }

    /// Frame for `H` restricted to `region`.
    pub fn for_region(h: &SpinChainHamiltonian, region: Interval, limits: &Limits) -> Result<Self> {
        Self::new(&build_dense_hamiltonian(h, region, limits)?)
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn evolve(&self, a: &DenseOperator, t: f64) -> Result<DenseOperator> {
        let a = a.embed(self.support)?;
        if t == 0.0 {
            return Ok(a);
        }
        DenseOperator::new(self.support, self.spectrum.conjugate(a.matrix().as_ref(), t))
    }

    pub fn propagator(&self, t: f64) -> DenseOperator {
        DenseOperator::new(self.support, self.spectrum.exp_i(t)).expect("dimension matches support")
    }
}

/// The bond term straddling `cut` (between sites `cut - 1` and `cut`).
pub fn bridge_interval(cut: usize) -> Interval {
    Interval {
        start: cut - 1,
        end: cut + 1,
    }
}

fn check_cut(h: &SpinChainHamiltonian, cut: usize) -> Result<()> {
    if cut == 0 || cut >= h.n() {
        return Err(Error::input(format!(
            "cut {cut} must lie in [1, {}] for a chain of {} sites",
            h.n() - 1,
            h.n()
        )));
    }
    Ok(())
}

/// Window of `size` sites around `cut`: `⌈(size−2)/2⌉` sites left of the
/// bridging term, the rest to the right, clipped to `[0, n)`.
pub fn centered_window(n: usize, cut: usize, size: usize) -> Result<Interval> {
    if cut == 0 || cut >= n {
        return Err(Error::input(format!("cut {cut} outside chain of {n} sites")));
    }
    if size < 2 {
        return Err(Error::input(format!(
            "window of {size} sites cannot hold the bridging term"
        )));
    }
    let left = (size - 2).div_ceil(2) as isize;
    let nominal_start = (cut as isize - 1) - left;
    let nominal_end = nominal_start + size as isize;
    Interval::new(nominal_start.max(0) as usize, (nominal_end as usize).min(n))
}

/// `Σ_{l=window_size}^{l_max} δ_l |t|^l / l!` with `δ_l = ‖h_I‖ 2^l ‖h‖^l`,
/// plus the geometric majorant of the remaining tail.
///
/// `l_max` grows until the tail ratio `2‖h‖|t| / (l_max + 1)` drops below ½.
pub fn analytic_lr_bound(norm_hi: f64, norm_h: f64, window_size: usize, t: f64, l_max: usize) -> f64 {
    let x = 2.0 * norm_h * t.abs();
    if norm_hi == 0.0 || (x == 0.0 && window_size > 0) {
        return 0.0;
    }
    if x == 0.0 {
        return norm_hi;
    }
    let mut l_max = l_max.max(window_size);
    while x / (l_max as f64 + 1.0) >= 0.5 {
        l_max += 16;
    }
    let ln_x = x.ln();
    let ln_hi = norm_hi.ln();
    let mut ln_fact = 0.0;
    for k in 1..=window_size {
        ln_fact += (k as f64).ln();
    }
    let mut sum = 0.0;
    for l in window_size..=l_max {
        if l > window_size {
            ln_fact += (l as f64).ln();
        }
        sum += (ln_hi + l as f64 * ln_x - ln_fact).exp();
    }
    let next_ln = ln_hi + (l_max + 1) as f64 * ln_x - (ln_fact + ((l_max + 1) as f64).ln());
    let ratio = x / (l_max as f64 + 1.0);
    sum + next_ln.exp() / (1.0 - ratio)
}

/// Sites of the window beyond the bridging term, on each side that is
/// interior to `region` (a side flush with the region edge contributes none).
fn open_extensions(cut: usize, window: &Interval, region: &Interval) -> Vec<usize> {
    let bridge = bridge_interval(cut);
    let mut ext = Vec::with_capacity(2);
    if window.start > region.start {
        ext.push(bridge.start - window.start);
    }
    if window.end < region.end {
        ext.push(window.end - bridge.end);
    }
    ext
}

/// Rigorous bound on `‖τ_t^{H_R}(h_I) − τ_t^{H_Ω}(h_I)‖` for a window `Ω`
/// inside a region `R`.
///
/// Peeling boundary bonds one at a time on each side gives, per open side
/// with `e` window sites beyond `h_I`, the series started at `l = e + 1`.
pub fn window_lr_bound(norm_hi: f64, norm_h: f64, cut: usize, window: &Interval, region: &Interval, t: f64) -> f64 {
    open_extensions(cut, window, region)
        .into_iter()
        .map(|e| analytic_lr_bound(norm_hi, norm_h, e + 1, t, e + 1 + DEFAULT_EXTRA_TERMS))
        .sum()
}

/// `∫_0^{|t|}` of [`window_lr_bound`], in closed form: each side becomes
/// `‖h_I‖/(2‖h‖) Σ_{l ≥ e+2} (2‖h‖|t|)^l / l!`.
pub fn integrated_window_lr_bound(
    norm_hi: f64,
    norm_h: f64,
    cut: usize,
    window: &Interval,
    region: &Interval,
    t: f64,
) -> f64 {
    if norm_h == 0.0 {
        return 0.0;
    }
    open_extensions(cut, window, region)
        .into_iter()
        .map(|e| analytic_lr_bound(norm_hi / (2.0 * norm_h), norm_h, e + 2, t, e + 2 + DEFAULT_EXTRA_TERMS))
        .sum()
}

fn check_window(h: &SpinChainHamiltonian, cut: usize, window: &Interval) -> Result<()> {
    check_cut(h, cut)?;
    h.check_interval(window)?;
    if !window.contains(&bridge_interval(cut)) {
        return Err(Error::input(format!(
            "window {window} excludes the bridging term on {}",
            bridge_interval(cut)
        )));
    }
    Ok(())
}

/// `‖τ_t^H(h_I) − τ_t^{H_Ω}(h_I)‖` on the full chain.
pub fn lr_discrepancy(h: &SpinChainHamiltonian, cut: usize, window: Interval, t: f64, limits: &Limits) -> Result<f64> {
    check_window(h, cut, &window)?;
    limits.check("lr discrepancy", h.n())?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let full = HeisenbergFrame::for_region(h, h.full_interval(), limits)?;
    let hi = h.term(cut - 1).to_dense();
    discrepancy_from(h, &hi, &full.evolve(&hi, t)?, window, t, limits)
}

fn discrepancy_from(
    h: &SpinChainHamiltonian,
    hi: &DenseOperator,
    evolved_full: &DenseOperator,
    window: Interval,
    t: f64,
    limits: &Limits,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let win = HeisenbergFrame::for_region(h, window, limits)?;
    evolved_full.sub(&win.evolve(hi, t)?)?.hermitian_norm()
}

/// One point of a Lieb-Robinson scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrScanRecord {
    pub model: String,
    pub n: usize,
    pub cut: usize,
    pub t: f64,
    pub window_size: usize,
    #[serde(with = "crate::serial::interval")]
    pub window: Interval,
    pub measured: f64,
    pub bound: f64,
}

impl LrScanRecord {
    pub fn within_bound(&self) -> bool {
        self.measured <= self.bound + 1e-9
    }
}

/// Measured discrepancy and bound for every `(t, window size)` pair, in
/// `t`-major input order.
pub fn lr_scan(
    h: &SpinChainHamiltonian,
    model: &str,
    cut: usize,
    t_list: &[f64],
    window_sizes: &[usize],
    limits: &Limits,
) -> Result<Vec<LrScanRecord>> {
    if t_list.is_empty() || window_sizes.is_empty() {
        return Ok(Vec::new());
    }
    check_cut(h, cut)?;
    limits.check("lr scan", h.n())?;
    let full = HeisenbergFrame::for_region(h, h.full_interval(), limits)?;
    let hi = h.term(cut - 1).to_dense();
    let norm_hi = h.term(cut - 1).norm();
    let norm_h = h.max_term_norm();
    let region = h.full_interval();
    let evolved: Vec<DenseOperator> = t_list
        .par_iter()
        .map(|&t| full.evolve(&hi, t))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..t_list.len())
        .flat_map(|k| window_sizes.iter().map(move |&w| (k, w)))
        .collect();
    pairs
        .par_iter()
        .map(|&(k, size)| {
            let t = t_list[k];
            let annotate = |e: Error| e.context(format!("t = {t}, window size {size}"));
            let window = centered_window(h.n(), cut, size).map_err(annotate)?;
            check_window(h, cut, &window).map_err(annotate)?;
            let measured = discrepancy_from(h, &hi, &evolved[k], window, t, limits).map_err(annotate)?;
            let bound = window_lr_bound(norm_hi, norm_h, cut, &window, &region, t);
            Ok(LrScanRecord {
                model: model.to_string(),
                n: h.n(),
                cut,
                t,
                window_size: size,
                window,
                measured,
                bound,
            })
        })
        .collect()
}

pub const LR_CSV_HEADER: [&str; 7] = ["model", "n", "cut", "t", "window_size", "measured", "bound"];

pub fn write_lr_csv<W: Write>(records: &[LrScanRecord], out: W) -> Result<W> {
    let mut w = CsvWriter::new(out, &LR_CSV_HEADER)?;
    for r in records {
        w.row(&[
            r.model.clone(),
            r.n.to_string(),
            r.cut.to_string(),
            fmt_num(r.t),
            r.window_size.to_string(),
            fmt_num(r.measured),
            fmt_num(r.bound),
        ])?;
    }
    w.finish()
}
