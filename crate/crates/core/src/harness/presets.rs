//! Named model families, normalized so that `max_j ‖h_j‖ = 1`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{c64, identity, kron, scale, CMat};
use crate::model::{LocalTerm, SpinChainHamiltonian};
use crate::pauli::pauli_matrix;

pub const PRESET_NAMES: [&str; 4] = ["tfim", "heisenberg-xxz", "ising-zz", "random-seeded"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    /// `−Z⊗Z − (g/2)(X⊗I + I⊗X)`.
    Tfim { g: f64 },
    /// `X⊗X + Y⊗Y + Δ Z⊗Z`.
    HeisenbergXxz { delta: f64 },
    /// `−Z⊗Z`; all terms commute.
    IsingZz,
    /// Independent random Hermitian terms, each of unit norm.
    RandomSeeded { seed: u64 },
}

impl Preset {
    /// `params` holds `g` for tfim, `delta` for heisenberg-xxz and `seed` for
    /// random-seeded; other keys are rejected.
    pub fn parse(name: &str, params: &BTreeMap<String, String>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "tfim" => &["g"],
            "heisenberg-xxz" => &["delta"],
            "ising-zz" => &[],
            "random-seeded" => &["seed"],
            _ => {
                return Err(Error::input(format!(
                    "unknown model '{name}'; valid presets are {}",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::input(format!("model '{name}' takes no parameter '{k}'")));
        }
        let real = |key: &str, default: f64| -> Result<f64> {
            match params.get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::input(format!("parameter {key}={v} is not a finite number"))),
            }
        };
        Ok(match name {
            "tfim" => Preset::Tfim { g: real("g", 1.0)? },
            "heisenberg-xxz" => Preset::HeisenbergXxz {
                delta: real("delta", 0.5)?,
            },
            "ising-zz" => Preset::IsingZz,
            _ => Preset::RandomSeeded {
                seed: match params.get("seed") {
                    None => 0,
                    Some(v) => v
                        .parse()
                        .map_err(|_| Error::input(format!("seed={v} is not an unsigned integer")))?,
                },
            },
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Tfim { .. } => "tfim",
            Preset::HeisenbergXxz { .. } => "heisenberg-xxz",
            Preset::IsingZz => "ising-zz",
            Preset::RandomSeeded { .. } => "random-seeded",
        }
    }

    pub fn build(&self, n: usize) -> Result<SpinChainHamiltonian> {
        if n < 2 {
            return Err(Error::input(format!("chain needs at least 2 sites, got {n}")));
        }
        let terms: Vec<CMat> = match *self {
            Preset::Tfim { g } => {
                let x = pauli_matrix(1);
                let i2 = identity(2);
                let field = &kron(x.as_ref(), i2.as_ref()) + &kron(i2.as_ref(), x.as_ref());
                let m = &scale(&zz(), c64::new(-1.0, 0.0)) - &scale(&field, c64::new(g / 2.0, 0.0));
                vec![m; n - 1]
            }
            Preset::HeisenbergXxz { delta } => {
                let two = |a: usize| kron(pauli_matrix(a).as_ref(), pauli_matrix(a).as_ref());
                let m = &(&two(1) + &two(2)) + &scale(&zz(), c64::new(delta, 0.0));
                vec![m; n - 1]
            }
            Preset::IsingZz => vec![scale(&zz(), c64::new(-1.0, 0.0)); n - 1],
            Preset::RandomSeeded { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n - 1).map(|_| random_hermitian4(&mut rng)).collect()
            }
        };
        let terms = terms
            .into_iter()
            .enumerate()
            .map(|(j, m)| LocalTerm::new(j, m))
            .collect::<Result<Vec<_>>>()?;
        let h = SpinChainHamiltonian::new(n, terms)?;
        let norm = h.max_term_norm();
        Ok(if norm > 0.0 { h.scaled(1.0 / norm) } else { h })
    }
}

impl fmt::Display for Preset {
    /// Comma-free descriptor such as `tfim[g=1]`, safe inside CSV fields.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Tfim { g } => write!(f, "tfim[g={g}]"),
            Preset::HeisenbergXxz { delta } => write!(f, "heisenberg-xxz[delta={delta}]"),
            Preset::IsingZz => write!(f, "ising-zz"),
            Preset::RandomSeeded { seed } => write!(f, "random-seeded[seed={seed}]"),
        }
    }
}

/// Builds the named preset on `n` sites.
pub fn preset_model(name: &str, n: usize, params: &BTreeMap<String, String>) -> Result<SpinChainHamiltonian> {
    Preset::parse(name, params)?.build(n)
}

pub fn tfim(n: usize, g: f64) -> SpinChainHamiltonian {
    Preset::Tfim { g }.build(n).expect("valid tfim chain")
}

pub fn ising_zz(n: usize) -> SpinChainHamiltonian {
    Preset::IsingZz.build(n).expect("valid ising chain")
}

pub fn random_chain(n: usize, seed: u64) -> SpinChainHamiltonian {
    Preset::RandomSeeded { seed }.build(n).expect("valid random chain")
}

fn zz() -> CMat {
    kron(pauli_matrix(3).as_ref(), pauli_matrix(3).as_ref())
}

/// `(A + A†)/2` with uniform entries in `[−1, 1] + i[−1, 1]`, scaled to unit norm.
fn random_hermitian4(rng: &mut ChaCha8Rng) -> CMat {
    let a = CMat::from_fn(4, 4, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = CMat::from_fn(4, 4, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let norm = crate::linalg::hermitian_norm(h.as_ref()).expect("4x4 eigenvalues");
    scale(&h, c64::new(1.0 / norm, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_entry_diff, operator_norm};

    fn params(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn ising_terms_commute() {
        let h = preset_model("ising-zz", 4, &params(&[])).unwrap();
        let full = h.full_interval();
        for a in h.terms() {
            for b in h.terms() {
                let x = a.to_dense().embed(full).unwrap();
                let y = b.to_dense().embed(full).unwrap();
                let c = &(x.matrix() * y.matrix()) - &(y.matrix() * x.matrix());
                assert!(operator_norm(c.as_ref()).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn tfim_without_field_is_minus_zz() {
        let h = preset_model("tfim", 2, &params(&[("g", "0")])).unwrap();
        let expect = scale(&zz(), c64::new(-1.0, 0.0));
        assert_eq!(max_entry_diff(h.term(0).matrix.as_ref(), expect.as_ref()), 0.0);
    }

    #[test]
    fn presets_are_normalized() {
        for name in PRESET_NAMES {
            let h = preset_model(name, 5, &params(&[])).unwrap();
            assert!((h.max_term_norm() - 1.0).abs() < 1e-12, "{name}");
        }
        let r = random_chain(6, 3);
        assert!(r.terms().iter().all(|t| (t.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn random_preset_is_deterministic() {
        let p = params(&[("seed", "7")]);
        let a = preset_model("random-seeded", 6, &p).unwrap();
        let b = preset_model("random-seeded", 6, &p).unwrap();
        for (x, y) in a.terms().iter().zip(b.terms()) {
            assert_eq!(max_entry_diff(x.matrix.as_ref(), y.matrix.as_ref()), 0.0);
        }
        let c = random_chain(6, 8);
        assert!(max_entry_diff(a.term(0).matrix.as_ref(), c.term(0).matrix.as_ref()) > 1e-3);
    }

    #[test]
    fn rejects_unknown_names_and_parameters() {
        let err = preset_model("xyz", 4, &params(&[])).unwrap_err().to_string();
        assert!(err.contains("tfim") && err.contains("random-seeded"));
        assert!(preset_model("tfim", 4, &params(&[("delta", "1")])).is_err());
        assert!(preset_model("tfim", 4, &params(&[("g", "abc")])).is_err());
        assert!(preset_model("random-seeded", 4, &params(&[("seed", "-1")])).is_err());
    }

    #[test]
    fn descriptors_have_no_commas() {
        for name in PRESET_NAMES {
            let p = Preset::parse(name, &params(&[])).unwrap();
            assert!(!p.to_string().contains(','));
            assert!(p.to_string().starts_with(p.name()));
        }
    }
}
