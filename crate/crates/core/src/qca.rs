//! Two-layer circuit approximation of `e^{itH}`.
//!
//! The U-layer holds block propagators `e^{itH_Ω}` on a partition `P1`; the
//! V-layer holds one windowed patch per `P1` boundary, each supported on the
//! block of the half-shifted partition `P2` that straddles it. The circuit is
//! `(⊗U)(⊗V)`, so the V-layer acts first.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{propagator, DenseOperator};
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, CMat};
use crate::model::{build_dense_hamiltonian, Interval, Limits, SpinChainHamiltonian};
use crate::patch::{patch_windowed, BoundMethod, CutSpec, PatchOptions, DEFAULT_TOL};

/// Gates must be unitary to this operator-norm defect.
pub const GATE_UNITARITY_TOL: f64 = 1e-8;

/// Block layout for a given block size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutPlan {
    pub n: usize,
    pub block_size: usize,
    pub partition_p1: Vec<Interval>,
    pub partition_p2: Vec<Interval>,
    pub cuts: Vec<usize>,
}

impl CutPlan {
    fn shift(&self) -> usize {
        self.block_size / 2
    }

    /// The `P2` block straddling `cut`.
    pub fn patch_window(&self, cut: usize) -> Interval {
        let start = (cut + self.shift()).saturating_sub(self.block_size);
        Interval {
            start,
            end: (cut + self.shift()).min(self.n),
        }
    }

    /// Union of the two `P1` blocks adjacent to `cut`.
    pub fn patch_region(&self, cut: usize) -> Interval {
        let k = self
            .partition_p1
            .iter()
            .position(|b| b.end == cut)
            .expect("cut is a block boundary");
        self.partition_p1[k].hull(&self.partition_p1[k + 1])
    }
}

/// `P1 = [0, B), [B, 2B), …` with a short last block; `P2` is `P1` shifted by
/// `⌊B/2⌋` and clipped to the chain. A block size beyond `n` gives one block.
pub fn plan_cuts(n: usize, block_size: usize) -> Result<CutPlan> {
    if block_size < 2 {
        return Err(Error::input(format!(
            "block size must be at least 2 so a bond fits, got {block_size}"
        )));
    }
    if n < 2 {
        return Err(Error::input(format!("chain needs at least 2 sites, got {n}")));
    }
    let partition_p1: Vec<Interval> = (0..n)
        .step_by(block_size)
        .map(|a| Interval {
            start: a,
            end: (a + block_size).min(n),
        })
        .collect();
    let cuts: Vec<usize> = partition_p1.iter().skip(1).map(|b| b.start).collect();
    let shift = block_size / 2;
    let mut partition_p2 = vec![Interval { start: 0, end: shift.min(n) }];
    partition_p2.extend((shift..n).step_by(block_size).map(|a| Interval {
        start: a,
        end: (a + block_size).min(n),
    }));
    partition_p2.retain(|b| !b.is_empty());
    Ok(CutPlan {
        n,
        block_size,
        partition_p1,
        partition_p2,
        cuts,
    })
}

/// A gate acting on `block`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Gate {
    #[serde(with = "crate::serial::interval")]
    pub block: Interval,
    #[serde(with = "crate::serial::matrix")]
    pub matrix: CMat,
}

impl Gate {
    pub fn to_dense(&self) -> Result<DenseOperator> {
        DenseOperator::new(self.block, self.matrix.clone())
    }
}

/// Error data for one patch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutError {
    pub cut: usize,
    #[serde(with = "crate::serial::interval")]
    pub window: Interval,
    /// Sites whose Hamiltonian defines the exact patch.
    #[serde(with = "crate::serial::interval")]
    pub region: Interval,
    pub error_exact: Option<f64>,
    pub error_bound: f64,
}

impl CutError {
    /// The measured error when available, else the bound.
    pub fn value(&self) -> f64 {
        self.error_exact.unwrap_or(self.error_bound)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LayeredCircuit {
    pub n: usize,
    pub t: f64,
    pub block_size: usize,
    pub u_layer: Vec<Gate>,
    pub v_layer: Vec<Gate>,
    pub per_cut_errors: Vec<CutError>,
}

#[derive(Deserialize)]
struct RawCircuit {
    n: usize,
    t: f64,
    block_size: usize,
    u_layer: Vec<Gate>,
    v_layer: Vec<Gate>,
    per_cut_errors: Vec<CutError>,
}

impl<'de> Deserialize<'de> for LayeredCircuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RawCircuit::deserialize(d)?;
        let c = LayeredCircuit {
            n: r.n,
            t: r.t,
            block_size: r.block_size,
            u_layer: r.u_layer,
            v_layer: r.v_layer,
            per_cut_errors: r.per_cut_errors,
        };
        c.validate().map_err(serde::de::Error::custom)?;
        Ok(c)
    }
}

impl LayeredCircuit {
    /// Sum of per-cut errors, which bounds the global error.
    pub fn triangle_sum(&self) -> f64 {
        self.per_cut_errors.iter().map(CutError::value).sum()
    }

    /// Largest per-cut error.
    pub fn max_cut_error(&self) -> f64 {
        self.per_cut_errors.iter().map(CutError::value).fold(0.0, f64::max)
    }

    /// Checks shapes and that each layer's blocks are disjoint and inside the chain.
    pub fn validate(&self) -> Result<()> {
        for (name, layer) in [("u_layer", &self.u_layer), ("v_layer", &self.v_layer)] {
            check_layer(name, layer, self.n)?;
        }
        Ok(())
    }
}

pub(crate) fn check_layer(name: &str, layer: &[Gate], n: usize) -> Result<()> {
    let mut blocks: Vec<Interval> = layer.iter().map(|g| g.block).collect();
    blocks.sort();
    for g in layer {
        if g.block.is_empty() || g.block.end > n {
            return Err(Error::input(format!("{name}: block {} outside [0, {n})", g.block)));
        }
        let d = g.block.dim();
        if g.matrix.nrows() != d || g.matrix.ncols() != d {
            return Err(Error::input(format!(
                "{name}: gate on {} has a {}x{} matrix",
                g.block,
                g.matrix.nrows(),
                g.matrix.ncols()
            )));
        }
    }
    for w in blocks.windows(2) {
        if w[0].overlaps(&w[1]) {
            return Err(Error::input(format!("{name}: blocks {} and {} overlap", w[0], w[1])));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct QcaOptions {
    pub tol: f64,
    /// Bound attached to each cut; the measured error is used whenever available.
    pub bound: BoundMethod,
    pub limits: Limits,
}

impl Default for QcaOptions {
    fn default() -> Self {
        QcaOptions {
            tol: DEFAULT_TOL,
            bound: BoundMethod::Analytic,
            limits: Limits::default(),
        }
    }
}

/// Builds the circuit for block size `block_size` at time `t`.
///
/// Each patch is the exact patch against the Hamiltonian of the two `P1`
/// blocks around its cut, approximated by integrating the generator restricted
/// to the straddling `P2` block.
pub fn build_qca(h: &SpinChainHamiltonian, t: f64, block_size: usize, opts: &QcaOptions) -> Result<LayeredCircuit> {
    let plan = plan_cuts(h.n(), block_size)?;
    let limits = &opts.limits;
    let widest = plan.partition_p1.iter().map(Interval::len).max().unwrap_or(0);
    limits.check("circuit block", widest)?;

    let u_layer = plan
        .partition_p1
        .par_iter()
        .map(|&block| {
            let hb = build_dense_hamiltonian(h, block, limits)?;
            let u = propagator(&hb, t)?;
            checked_gate("U", block, u.into_matrix())
        })
        .collect::<Result<Vec<_>>>()?;

    let patches = plan
        .cuts
        .par_iter()
        .map(|&c| {
            let cut = CutSpec::new(h, c)?;
            let window = plan.patch_window(c);
            let region = plan.patch_region(c);
            let popts = PatchOptions {
                tol: opts.tol,
                region: Some(region),
                bound: opts.bound,
                exact_error: true,
                limits: *limits,
            };
            let r = patch_windowed(h, &cut, window, t, &popts).map_err(|e| e.context(format!("patch at cut {c}")))?;
            let gate = checked_gate("V", window, r.v_matrix)?;
            let err = CutError {
                cut: c,
                window,
                region,
                error_exact: r.error_exact,
                error_bound: r.error_bound,
            };
            Ok((gate, err))
        })
        .collect::<Result<Vec<_>>>()?;
    let (v_layer, per_cut_errors) = patches.into_iter().unzip();

    let circuit = LayeredCircuit {
        n: h.n(),
        t,
        block_size,
        u_layer,
        v_layer,
        per_cut_errors,
    };
    circuit.validate()?;
    Ok(circuit)
}

fn checked_gate(layer: &str, block: Interval, matrix: CMat) -> Result<Gate> {
    let defect = crate::linalg::unitarity_defect(matrix.as_ref())?;
    if defect > GATE_UNITARITY_TOL {
        return Err(Error::computation(format!(
            "{layer} gate on {block} is not unitary (defect {defect:.3e})"
        )));
    }
    Ok(Gate { block, matrix })
}

/// `⊗` of a layer's gates over `[0, n)`, with identity on uncovered sites.
pub fn layer_to_dense(layer: &[Gate], n: usize, limits: &Limits) -> Result<DenseOperator> {
    limits.check("layer contraction", n)?;
    check_layer("layer", layer, n)?;
    let mut gates: Vec<&Gate> = layer.iter().collect();
    gates.sort_by_key(|g| g.block.start);
    let mut acc = identity(1);
    let mut site = 0;
    for g in gates {
        if g.block.start > site {
            acc = kron(acc.as_ref(), identity(1 << (g.block.start - site)).as_ref());
        }
        acc = kron(acc.as_ref(), g.matrix.as_ref());
        site = g.block.end;
    }
    if site < n {
        acc = kron(acc.as_ref(), identity(1 << (n - site)).as_ref());
    }
    DenseOperator::new(Interval { start: 0, end: n }, acc)
}

/// `(⊗U)(⊗V)` as one dense operator on the whole chain.
pub fn contract_circuit(circuit: &LayeredCircuit, limits: &Limits) -> Result<DenseOperator> {
    let u = layer_to_dense(&circuit.u_layer, circuit.n, limits)?;
    if circuit.v_layer.is_empty() {
        return Ok(u);
    }
    let v = layer_to_dense(&circuit.v_layer, circuit.n, limits)?;
    u.multiply(&v)
}

/// Constants of the decay model `error ≈ ω e^{κ|t|} e^{−μ|Ω|}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    pub omega: f64,
    pub kappa: f64,
    pub mu: f64,
}

impl Default for DecayConstants {
    /// Conservative values with `c0 = 4`, `c1 = 2`.
    fn default() -> Self {
        DecayConstants {
            omega: 1.0,
            kappa: 2.0,
            mu: 0.5,
        }
    }
}

impl DecayConstants {
    pub fn c0(&self) -> f64 {
        self.kappa / self.mu
    }

    pub fn c1(&self) -> f64 {
        1.0 / self.mu
    }
}

/// `⌈c0|t| + c1 ln(n/ε)⌉` clamped to `[2, n]`.
pub fn window_size_for(n: usize, t: f64, epsilon: f64, constants: &DecayConstants) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::input(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(constants.mu > 0.0) || !constants.kappa.is_finite() {
        return Err(Error::input(format!(
            "decay constants need mu > 0 and finite kappa, got mu = {}, kappa = {}",
            constants.mu, constants.kappa
        )));
    }
    let raw = constants.c0() * t.abs() + constants.c1() * (n as f64 / epsilon).ln();
    // absorb rounding in the logarithm so exact integers are not bumped up
    let size = (raw * (1.0 - 1e-12)).ceil().max(2.0).min(n.max(2) as f64);
    Ok(size as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets::{ising_zz, random_chain, tfim};

    fn iv(a: usize, b: usize) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn global_error(h: &SpinChainHamiltonian, c: &LayeredCircuit) -> f64 {
        let limits = Limits::default();
        let full = build_dense_hamiltonian(h, h.full_interval(), &limits).unwrap();
        let exact = propagator(&full, c.t).unwrap();
        exact.distance(&contract_circuit(c, &limits).unwrap()).unwrap()
    }

    #[test]
    fn plan_single_block() {
        let p = plan_cuts(8, 8).unwrap();
        assert_eq!(p.partition_p1, vec![iv(0, 8)]);
        assert!(p.cuts.is_empty());
        assert_eq!(plan_cuts(8, 20).unwrap().partition_p1, vec![iv(0, 8)]);
    }

    #[test]
    fn plan_two_blocks() {
        let p = plan_cuts(8, 4).unwrap();
        assert_eq!(p.partition_p1, vec![iv(0, 4), iv(4, 8)]);
        assert_eq!(p.cuts, vec![4]);
        assert_eq!(p.patch_window(4), iv(2, 6));
        assert_eq!(p.patch_region(4), iv(0, 8));
        assert_eq!(p.partition_p2, vec![iv(0, 2), iv(2, 6), iv(6, 8)]);
    }

    #[test]
    fn plan_with_short_last_block() {
        let p = plan_cuts(10, 4).unwrap();
        assert_eq!(p.partition_p1, vec![iv(0, 4), iv(4, 8), iv(8, 10)]);
        assert_eq!(p.cuts, vec![4, 8]);
        assert_eq!(p.partition_p2, vec![iv(0, 2), iv(2, 6), iv(6, 10)]);
        assert_eq!(p.patch_window(8), iv(6, 10));
        assert_eq!(p.patch_region(8), iv(4, 10));
        assert!(plan_cuts(10, 1).is_err());
    }

    #[test]
    fn every_cut_is_straddled_by_a_p2_block() {
        for n in 2..=14 {
            for b in 2..=n {
                let p = plan_cuts(n, b).unwrap();
                let covered: usize = p.partition_p2.iter().map(Interval::len).sum();
                assert_eq!(covered, n);
                for &c in &p.cuts {
                    let w = p.patch_window(c);
                    assert!(w.start < c && w.end > c, "n={n} b={b} c={c}");
                    assert!(p.partition_p2.contains(&w));
                    assert!(p.patch_region(c).contains(&w));
                }
            }
        }
    }

    #[test]
    fn zero_time_circuit_is_identity() {
        let h = tfim(8, 1.0);
        let c = build_qca(&h, 0.0, 4, &QcaOptions::default()).unwrap();
        let d = contract_circuit(&c, &Limits::default()).unwrap();
        let id = DenseOperator::identity(h.full_interval()).unwrap();
        assert_eq!(d.max_entry_distance(&id).unwrap(), 0.0);
        assert_eq!(c.triangle_sum(), 0.0);
    }

    #[test]
    fn single_block_is_exact() {
        let h = tfim(6, 1.0);
        let c = build_qca(&h, 0.7, 6, &QcaOptions::default()).unwrap();
        assert!(c.v_layer.is_empty());
        assert!(global_error(&h, &c) <= 1e-12);
    }

    #[test]
    fn commuting_chains_are_exact() {
        let h = ising_zz(8);
        for b in [2, 3, 4, 5] {
            let c = build_qca(&h, 0.9, b, &QcaOptions::default()).unwrap();
            assert!(global_error(&h, &c) <= 1e-9, "block {b}");
        }
    }

    #[test]
    fn triangle_accounting_on_small_chains() {
        for (h, b) in [(tfim(8, 1.0), 3), (tfim(8, 1.0), 4), (random_chain(7, 2), 3)] {
            let c = build_qca(&h, 0.5, b, &QcaOptions::default()).unwrap();
            let err = global_error(&h, &c);
            assert!(err <= c.triangle_sum() + 1e-7, "{err} vs {}", c.triangle_sum());
            assert!(err > 0.0);
        }
    }

    #[test]
    fn layers_are_disjoint_and_unitary() {
        let h = tfim(9, 1.0);
        let c = build_qca(&h, 0.4, 3, &QcaOptions::default()).unwrap();
        c.validate().unwrap();
        assert_eq!(c.u_layer.len(), 3);
        assert_eq!(c.v_layer.len(), 2);
        let d = contract_circuit(&c, &Limits::default()).unwrap();
        assert!(d.unitarity_defect().unwrap() <= 1e-8);
    }

    #[test]
    fn circuit_json_roundtrip_validates() {
        let h = tfim(6, 1.0);
        let c = build_qca(&h, 0.3, 3, &QcaOptions::default()).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        for key in ["n", "t", "block_size", "u_layer", "v_layer", "per_cut_errors"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["u_layer"][0].get("block").is_some() && v["u_layer"][0].get("matrix").is_some());
        let back: LayeredCircuit = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(back.per_cut_errors, c.per_cut_errors);
        let mut bad = v;
        bad["v_layer"][0]["block"] = serde_json::json!([0, 3]);
        bad["u_layer"][1]["block"] = serde_json::json!([2, 5]);
        assert!(serde_json::from_value::<LayeredCircuit>(bad).is_err());
    }

    #[test]
    fn window_size_arithmetic() {
        let unit = DecayConstants {
            omega: 1.0,
            kappa: 1.0,
            mu: 1.0,
        };
        let eps = 7.0 / std::f64::consts::E.powi(2);
        assert_eq!(window_size_for(7, 0.0, eps, &unit).unwrap(), 2);
        assert!(window_size_for(10, 0.5, 0.0, &unit).is_err());
        assert!(window_size_for(10, 0.5, 1.5, &unit).is_err());
        let d = DecayConstants::default();
        assert_eq!((d.c0(), d.c1()), (4.0, 2.0));
        assert_eq!(window_size_for(4, 0.0, 1.0, &unit).unwrap(), 2);
        assert_eq!(window_size_for(1000, 5.0, 1e-6, &unit).unwrap(), 26);
        assert_eq!(window_size_for(20, 5.0, 1e-6, &d).unwrap(), 20);
    }

    #[test]
    fn window_size_is_monotone() {
        let d = DecayConstants::default();
        let mut prev = 0;
        for k in 0..20 {
            let eps = 0.5f64.powi(k);
            let w = window_size_for(400, 0.3, eps, &d).unwrap();
            assert!(w >= prev);
            prev = w;
        }
        let mut prev = 0;
        for k in 0..20 {
            let w = window_size_for(400, 0.25 * k as f64, 1e-3, &d).unwrap();
            assert!(w >= prev);
            prev = w;
        }
    }
}
