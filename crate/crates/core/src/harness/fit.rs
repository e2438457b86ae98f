//! Least-squares fit of `error ≈ ω e^{κ|t|} e^{−μ|Ω|}`.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qca::DecayConstants;

/// Errors at or below this value are excluded from fits.
pub const NUMERICAL_FLOOR: f64 = 1e-11;
pub const MIN_POINTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPoint {
    pub t: f64,
    pub window: usize,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    #[serde(flatten)]
    pub constants: DecayConstants,
    pub c0: f64,
    pub c1: f64,
    /// Root-mean-square residual of `ln error`.
    pub residual: f64,
    /// Coefficient of determination on the log scale.
    pub r_squared: f64,
    pub samples: usize,
    pub provenance: String,
}

/// Fits `ln error = ln ω + κ|t| − μ|Ω|` over points above [`NUMERICAL_FLOOR`].
pub fn fit_decay_constants(points: &[DecayPoint], provenance: &str) -> Result<DecayFit> {
    let kept: Vec<&DecayPoint> = points
        .iter()
        .filter(|p| p.error.is_finite() && p.error > NUMERICAL_FLOOR)
        .collect();
    let distinct = |key: &dyn Fn(&DecayPoint) -> f64| {
        let mut v: Vec<f64> = kept.iter().map(|p| key(p)).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    };
    let (nt, nw) = (distinct(&|p| p.t.abs()), distinct(&|p| p.window as f64));
    if kept.len() < MIN_POINTS || nt < 2 || nw < 3 {
        return Err(Error::input(format!(
            "fit needs at least {MIN_POINTS} points above {NUMERICAL_FLOOR:e} spanning 2 times and 3 \
             window sizes; have {} points, {nt} times, {nw} sizes",
            kept.len()
        )));
    }
    let m = kept.len();
    let x = Mat::<f64>::from_fn(m, 3, |i, j| match j {
        0 => 1.0,
        1 => kept[i].t.abs(),
        _ => -(kept[i].window as f64),
    });
    let y = Mat::<f64>::from_fn(m, 1, |i, _| kept[i].error.ln());
    let beta = x.qr().solve_lstsq(&y);
    let (ln_omega, kappa, mu) = (beta[(0, 0)], beta[(1, 0)], beta[(2, 0)]);
    let pred = &x * &beta;
    let mean = (0..m).map(|i| y[(i, 0)]).sum::<f64>() / m as f64;
    let ss_res: f64 = (0..m).map(|i| (y[(i, 0)] - pred[(i, 0)]).powi(2)).sum();
    let ss_tot: f64 = (0..m).map(|i| (y[(i, 0)] - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    if !(mu > 0.0) {
        return Err(Error::FitRejected {
            reason: "errors do not decay with window size".to_string(),
            mu,
            r_squared,
        });
    }
    let constants = DecayConstants {
        omega: ln_omega.exp(),
        kappa,
        mu,
    };
    Ok(DecayFit {
        c0: constants.c0(),
        c1: constants.c1(),
        constants,
        residual: (ss_res / m as f64).sqrt(),
        r_squared,
        samples: m,
        provenance: provenance.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic(omega: f64, kappa: f64, mu: f64, noise: f64, seed: u64) -> Vec<DecayPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = Vec::new();
        for t in [0.25, 0.5, 1.0] {
            for w in [2, 4, 6, 8] {
                let e = omega * (kappa * t).exp() * (-mu * w as f64).exp();
                pts.push(DecayPoint {
                    t,
                    window: w,
                    error: e * (1.0 + noise * rng.gen_range(-1.0..1.0)),
                });
            }
        }
        pts
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn recovers_exact_model() {
        let f = fit_decay_constants(&synthetic(2.0, 1.0, 1.0, 0.0, 0), "synthetic").unwrap();
        let c = &f.constants;
        assert!(rel(c.omega, 2.0) < 1e-6 && rel(c.kappa, 1.0) < 1e-6 && rel(c.mu, 1.0) < 1e-6);
        assert!(f.r_squared > 1.0 - 1e-12);
        assert_eq!(f.samples, 12);
    }

    #[test]
    fn tolerates_small_noise() {
        let f = fit_decay_constants(&synthetic(2.0, 1.0, 1.0, 0.01, 42), "noisy").unwrap();
        let c = &f.constants;
        assert!(rel(c.omega, 2.0) < 0.05 && rel(c.kappa, 1.0) < 0.05 && rel(c.mu, 1.0) < 0.05);
    }

    #[test]
    fn rejects_growth_and_thin_data() {
        let growth = synthetic(1.0, 1.0, -0.5, 0.0, 0);
        assert!(matches!(
            fit_decay_constants(&growth, "x"),
            Err(Error::FitRejected { mu, .. }) if mu < 0.0
        ));
        let thin: Vec<DecayPoint> = synthetic(2.0, 1.0, 1.0, 0.0, 0).into_iter().filter(|p| p.window <= 4).collect();
        assert!(matches!(fit_decay_constants(&thin, "x"), Err(Error::Input(_))));
        let mut floored = synthetic(2.0, 1.0, 1.0, 0.0, 0);
        for p in floored.iter_mut().skip(4) {
            p.error = 1e-12;
        }
        assert!(matches!(fit_decay_constants(&floored, "x"), Err(Error::Input(_))));
    }
}
