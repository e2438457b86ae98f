//! Patch unitaries across a cut.
//!
//! For a cut `c` in a region `R` (the bond `h_I` joins sites `c−1` and `c`),
//! the exact patch is `V(t) = (e^{−itH_{left}} ⊗ e^{−itH_{right}}) e^{itH_R}`.
//! It solves `dV/dt = i V L(t)` with `L(t) = τ_t^{H_R}(h_I)`. The windowed
//! patch `V′` solves the same equation with `L′(t) = τ_t^{H_Ω}(h_I)` for a
//! window `Ω ⊆ R`, and `‖V − V′‖ ≤ ∫_0^{|t|} ‖L(s) − L′(s)‖ ds`.

use serde::{Deserialize, Serialize};

use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, c64, expm_i_hermitian, identity, mat_pow, CMat, Spectrum};
use crate::lr::{bridge_interval, integrated_window_lr_bound};
use crate::model::{build_dense_hamiltonian, Interval, Limits, SpinChainHamiltonian};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const INITIAL_STEPS: u64 = 8;
pub const MAX_HALVINGS: u32 = 20;
pub const QUADRATURE_INITIAL_NODES: usize = 32;
pub const QUADRATURE_REL_TOL: f64 = 1e-3;
const QUADRATURE_MAX_NODES: usize = 4096;

/// A cut between sites `cut − 1` and `cut`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutSpec {
    cut: usize,
}

impl CutSpec {
    pub fn new(h: &SpinChainHamiltonian, cut: usize) -> Result<Self> {
        if cut == 0 || cut >= h.n() {
            return Err(Error::input(format!(
                "cut {cut} must lie in [1, {}] for a chain of {} sites",
                h.n() - 1,
                h.n()
            )));
        }
        Ok(CutSpec { cut })
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    /// Support of the bridging term `h_I`.
    pub fn bridge(&self) -> Interval {
        bridge_interval(self.cut)
    }

    pub fn bridging_term(&self, h: &SpinChainHamiltonian) -> DenseOperator {
        h.term(self.cut - 1).to_dense()
    }

    fn check_region(&self, region: &Interval, n: usize) -> Result<()> {
        if region.end > n || !region.contains(&self.bridge()) {
            return Err(Error::input(format!(
                "region {region} must lie in the chain and contain the bridging term on {}",
                self.bridge()
            )));
        }
        Ok(())
    }
}

/// A time-dependent Hermitian generator on a fixed support.
pub trait Generator: Sync {
    fn support(&self) -> Interval;

    fn evaluate(&self, s: f64) -> Result<DenseOperator>;

    /// `Π_{j=0}^{m−1} exp(i δ G((j+½)δ))`, `δ = t/m`, with the `j = 0` factor
    /// leftmost (each later factor multiplies on the right).
    fn midpoint_product(&self, t: f64, steps: u64) -> Result<CMat> {
        let delta = t / steps as f64;
        let mut acc = identity(self.support().dim());
        for j in 0..steps {
            let g = self.evaluate((j as f64 + 0.5) * delta)?;
            acc = &acc * expm_i_hermitian(g.matrix().as_ref(), delta)?;
        }
        Ok(acc)
    }
}

/// Generator given by a closure.
pub struct FnGenerator<F> {
    support: Interval,
    f: F,
}

impl<F> FnGenerator<F>
where
    F: Fn(f64) -> Result<DenseOperator> + Sync,
{
    pub fn new(support: Interval, f: F) -> Self {
        FnGenerator { support, f }
    }
}

impl<F> Generator for FnGenerator<F>
where
    F: Fn(f64) -> Result<DenseOperator> + Sync,
{
    fn support(&self) -> Interval {
        self.support
    }

    fn evaluate(&self, s: f64) -> Result<DenseOperator> {
        let g = (self.f)(s)?;
        g.embed(self.support)
    }
}

/// `s ↦ τ_s^B(A)` for a static Hamiltonian `B`.
///
/// Since `exp(iδ τ_s^B(A)) = e^{−isB} e^{iδA} e^{isB}`, the midpoint product
/// telescopes to `e^{−is_0 B} E (e^{−iδB} E)^{m−1} e^{is_{m−1}B}` with
/// `E = e^{iδA}`, which costs `O(log m)` matrix products.
#[derive(Clone, Debug)]
pub struct HeisenbergGenerator {
    support: Interval,
    spectrum: Spectrum,
    term: DenseOperator,
    term_eigen: CMat,
}

impl HeisenbergGenerator {
    pub fn new(hamiltonian: &DenseOperator, term: &DenseOperator) -> Result<Self> {
        let support = hamiltonian.support();
        if !support.contains(&term.support()) {
            return Err(Error::input(format!(
                "term on {} lies outside generator support {support}",
                term.support()
            )));
        }
        let spectrum = Spectrum::new(hamiltonian.matrix().as_ref())?;
        let term_eigen = spectrum.to_eigenbasis(term.embed(support)?.matrix().as_ref());
        Ok(HeisenbergGenerator {
            support,
            spectrum,
            term: term.clone(),
            term_eigen,
        })
    }

    /// `L(s) = τ_s^{H_region}(h_I)` for the bond across `cut`.
    pub fn for_cut(h: &SpinChainHamiltonian, cut: &CutSpec, region: Interval, limits: &Limits) -> Result<Self> {
        cut.check_region(&region, h.n())?;
        let hmat = build_dense_hamiltonian(h, region, limits)?;
        Self::new(&hmat, &cut.bridging_term(h))
    }

    pub fn propagator(&self, t: f64) -> CMat {
        self.spectrum.exp_i(t)
    }

    /// `e^{−itB}`-style pieces reuse the cached spectrum.
    pub(crate) fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
}

impl Generator for HeisenbergGenerator {
    fn support(&self) -> Interval {
        self.support
    }

    fn evaluate(&self, s: f64) -> Result<DenseOperator> {
        if s == 0.0 {
            return self.term.embed(self.support);
        }
        DenseOperator::new(self.support, self.spectrum.conjugate_eigenbasis(&self.term_eigen, s))
    }

    fn midpoint_product(&self, t: f64, steps: u64) -> Result<CMat> {
        let delta = t / steps as f64;
        let local = expm_i_hermitian(self.term.matrix().as_ref(), delta)?;
        let e = DenseOperator::new(self.term.support(), local)?.embed(self.support)?.into_matrix();
        let s0 = 0.5 * delta;
        let s_last = (steps as f64 - 0.5) * delta;
        let k = self.spectrum.exp_i(-delta);
        let ke = &k * &e;
        let body = mat_pow(&ke, steps - 1);
        let left = &self.spectrum.exp_i(-s0) * &e;
        Ok(&(&left * &body) * self.spectrum.exp_i(s_last))
    }
}

/// Result of [`integrate_time_ordered`].
#[derive(Clone, Debug)]
pub struct Integrated {
    pub operator: DenseOperator,
    pub steps: u64,
    /// Operator-norm distance between the last two step-halving iterates.
    pub last_change: f64,
}

/// `T exp(i ∫_0^t G(s) ds)` by the midpoint (second-order Magnus) product,
/// halving the step until successive results differ by less than `tol`.
pub fn integrate_time_ordered(gen: &dyn Generator, t: f64, tol: f64) -> Result<Integrated> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("integration tolerance must be positive, got {tol}")));
    }
    let support = gen.support();
    if t == 0.0 {
        return Ok(Integrated {
            operator: DenseOperator::identity(support)?,
            steps: 0,
            last_change: 0.0,
        });
    }
    let mut steps = INITIAL_STEPS;
    let mut prev = gen.midpoint_product(t, steps)?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        steps *= 2;
        let cur = gen.midpoint_product(t, steps)?;
        change = linalg::operator_norm((&cur - &prev).as_ref())?;
        if change < tol {
            let defect = linalg::unitarity_defect(cur.as_ref())?;
            if defect > 10.0 * tol {
                return Err(Error::computation(format!(
                    "time-ordered product lost unitarity (defect {defect:.3e}) at {steps} steps"
                )));
            }
            return Ok(Integrated {
                operator: DenseOperator::new(support, cur)?,
                steps,
                last_change: change,
            });
        }
        prev = cur;
    }
    Err(Error::computation(format!(
        "time-ordered integration did not converge after {MAX_HALVINGS} halvings \
         ({steps} steps); last two iterates differ by {change:.3e}"
    )))
}

/// Exact patch on the whole chain.
pub fn patch_exact(h: &SpinChainHamiltonian, cut: &CutSpec, t: f64, limits: &Limits) -> Result<DenseOperator> {
    patch_exact_in(h, cut, h.full_interval(), t, limits)
}

/// Exact patch against `H` restricted to `region`.
pub fn patch_exact_in(
    h: &SpinChainHamiltonian,
    cut: &CutSpec,
    region: Interval,
    t: f64,
    limits: &Limits,
) -> Result<DenseOperator> {
    cut.check_region(&region, h.n())?;
    limits.check("exact patch", region.len())?;
    if t == 0.0 {
        return DenseOperator::identity(region);
    }
    let full = build_dense_hamiltonian(h, region, limits)?;
    let forward = Spectrum::new(full.matrix().as_ref())?.exp_i(t);
    exact_patch_from_forward(h, cut, region, t, &forward, limits)
}

fn exact_patch_from_forward(
    h: &SpinChainHamiltonian,
    cut: &CutSpec,
    region: Interval,
    t: f64,
    forward: &CMat,
    limits: &Limits,
) -> Result<DenseOperator> {
    let left = Interval::new(region.start, cut.cut())?;
    let right = Interval::new(cut.cut(), region.end)?;
    let back_left = expm_i_hermitian(build_dense_hamiltonian(h, left, limits)?.matrix().as_ref(), -t)?;
    let back_right = expm_i_hermitian(build_dense_hamiltonian(h, right, limits)?.matrix().as_ref(), -t)?;
    let decoupled = linalg::kron(back_left.as_ref(), back_right.as_ref());
    DenseOperator::new(region, &decoupled * forward)
}

/// `L(s)` on the whole chain (`window = None`) or `L′(s)` on a window.
pub fn generator_l(
    h: &SpinChainHamiltonian,
    cut: &CutSpec,
    s: f64,
    window: Option<Interval>,
    limits: &Limits,
) -> Result<DenseOperator> {
    let region = window.unwrap_or_else(|| h.full_interval());
    HeisenbergGenerator::for_cut(h, cut, region, limits)?.evaluate(s)
}

/// How [`PatchResult::error_bound`] is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    /// Quadrature when the region fits the dense oracle, analytic otherwise.
    Auto,
    /// Composite midpoint quadrature of `‖L(s) − L′(s)‖` with Richardson checks.
    Quadrature,
    /// Closed-form time integral of the Lieb-Robinson series bound.
    Analytic,
}

#[derive(Clone, Copy, Debug)]
pub struct PatchOptions {
    pub tol: f64,
    /// Region whose Hamiltonian defines the exact patch; the whole chain if unset.
    pub region: Option<Interval>,
    pub bound: BoundMethod,
    /// Compute `error_exact` when the region fits the dense oracle.
    pub exact_error: bool,
    pub limits: Limits,
}

impl Default for PatchOptions {
    fn default() -> Self {
        PatchOptions {
            tol: DEFAULT_TOL,
            region: None,
            bound: BoundMethod::Auto,
            exact_error: true,
            limits: Limits::default(),
        }
    }
}

/// A windowed patch `V′(t)` with its measured and bounded error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatchResult {
    #[serde(with = "crate::serial::interval")]
    pub window: Interval,
    pub t: f64,
    pub integrator_steps: u64,
    pub error_exact: Option<f64>,
    pub error_bound: f64,
    #[serde(rename = "v_matrix", with = "crate::serial::matrix")]
    pub v_matrix: CMat,
}

impl PatchResult {
    pub fn v_windowed(&self) -> DenseOperator {
        DenseOperator::new(self.window, self.v_matrix.clone()).expect("window matches matrix")
    }
}

/// Windowed patch `V′(t)` on `window`, with `error_exact = ‖V − I ⊗ V′‖` when
/// the region fits the dense oracle.
pub fn patch_windowed(
    h: &SpinChainHamiltonian,
    cut: &CutSpec,
    window: Interval,
    t: f64,
    opts: &PatchOptions,
) -> Result<PatchResult> {
    let limits = &opts.limits;
    let region = opts.region.unwrap_or_else(|| h.full_interval());
    cut.check_region(&region, h.n())?;
    if !region.contains(&window) || !window.contains(&cut.bridge()) {
        return Err(Error::input(format!(
            "window {window} must contain the bridging term {} and lie inside {region}",
            cut.bridge()
        )));
    }
    limits.check("windowed patch", window.len())?;

    let windowed = HeisenbergGenerator::for_cut(h, cut, window, limits)?;
    let integrated = integrate_time_ordered(&windowed, t, opts.tol)?;
    let v_prime = integrated.operator;

    let dense_ok = region.len() <= limits.max_dense_sites;
    let method = match opts.bound {
        BoundMethod::Auto if dense_ok => BoundMethod::Quadrature,
        BoundMethod::Auto => BoundMethod::Analytic,
        m => m,
    };
    if method == BoundMethod::Quadrature && !dense_ok {
        limits.check("quadrature error bound", region.len())?;
    }

    let full_gen = if dense_ok && (opts.exact_error || method == BoundMethod::Quadrature) && t != 0.0 {
        Some(HeisenbergGenerator::for_cut(h, cut, region, limits)?)
    } else {
        None
    };

    let error_exact = if !(opts.exact_error && dense_ok) {
        None
    } else if t == 0.0 {
        Some(0.0)
    } else {
        let full = full_gen.as_ref().expect("dense generator built");
        let forward = full.spectrum().exp_i(t);
        let v = exact_patch_from_forward(h, cut, region, t, &forward, limits)?;
        Some(v.distance(&v_prime)?)
    };

    let error_bound = if t == 0.0 {
        0.0
    } else {
        match method {
            BoundMethod::Quadrature => {
                let full = full_gen.as_ref().expect("dense generator built");
                quadrature_bound(full, &windowed, t)?
            }
            _ => integrated_window_lr_bound(
                h.term(cut.cut() - 1).norm(),
                h.max_term_norm_in(&region),
                cut.cut(),
                &window,
                &region,
                t,
            ),
        }
    };

    Ok(PatchResult {
        window,
        t,
        integrator_steps: integrated.steps,
        error_exact,
        error_bound,
        v_matrix: v_prime.into_matrix(),
    })
}

/// `∫_0^{|t|} ‖L(σs) − L′(σs)‖ ds` with `σ = sign(t)`.
fn quadrature_bound(full: &HeisenbergGenerator, windowed: &HeisenbergGenerator, t: f64) -> Result<f64> {
    let sign = t.signum();
    let integrand = |s: f64| -> Result<f64> {
        let l = full.evaluate(sign * s)?;
        let lp = windowed.evaluate(sign * s)?;
        l.sub(&lp)?.hermitian_norm()
    };
    richardson_midpoint(integrand, t.abs())
}

/// Composite midpoint rule with doubling; returns the Richardson value once
/// successive midpoint sums agree to `QUADRATURE_REL_TOL`.
pub fn richardson_midpoint(f: impl Fn(f64) -> Result<f64> + Sync, upper: f64) -> Result<f64> {
    use rayon::prelude::*;
    let midpoint = |nodes: usize| -> Result<f64> {
        let h = upper / nodes as f64;
        let vals: Vec<f64> = (0..nodes)
            .into_par_iter()
            .map(|k| f((k as f64 + 0.5) * h))
            .collect::<Result<_>>()?;
        Ok(h * vals.iter().sum::<f64>())
    };
    if upper == 0.0 {
        return Ok(0.0);
    }
    let mut nodes = QUADRATURE_INITIAL_NODES;
    let mut coarse = midpoint(nodes)?;
    loop {
        nodes *= 2;
        let fine = midpoint(nodes)?;
        let extrapolated = fine + (fine - coarse) / 3.0;
        let change = (fine - coarse).abs();
        if change <= QUADRATURE_REL_TOL * extrapolated.abs() || change < 1e-15 || nodes >= QUADRATURE_MAX_NODES {
            return Ok(extrapolated.max(0.0));
        }
        coarse = fine;
    }
}

/// `c64` helper for callers building generators by hand.
pub fn real(x: f64) -> c64 {
    c64::new(x, 0.0)
}
