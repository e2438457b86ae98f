//! Nearest-neighbour spin-½ chains `H = Σ_j h_j` with two-site terms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, hermiticity_defect, pad_identity, zeros, CMat};

/// Largest chain segment the dense oracle will ever materialize.
pub const HARD_MAX_DENSE_SITES: usize = 12;
pub const DEFAULT_MAX_DENSE_SITES: usize = 10;

/// Entrywise Hermiticity tolerance for stored terms.
pub const TERM_HERMITIAN_TOL: f64 = 1e-12;

/// Half-open site interval `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(Error::input(format!("malformed interval [{start}, {end})")));
        }
        Ok(Interval { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn dim(&self) -> usize {
        1usize << self.len()
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn contains_site(&self, site: usize) -> bool {
        self.start <= site && site < self.end
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Dense-oracle size limit, configurable up to [`HARD_MAX_DENSE_SITES`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_dense_sites: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_dense_sites: DEFAULT_MAX_DENSE_SITES,
        }
    }
}

impl Limits {
    pub fn new(max_dense_sites: usize) -> Result<Self> {
        if !(2..=HARD_MAX_DENSE_SITES).contains(&max_dense_sites) {
            return Err(Error::input(format!(
                "max_dense_sites must lie in [2, {HARD_MAX_DENSE_SITES}], got {max_dense_sites}"
            )));
        }
        Ok(Limits { max_dense_sites })
    }

    pub fn check(&self, what: &str, sites: usize) -> Result<()> {
        if sites > self.max_dense_sites {
            return Err(Error::Resource {
                what: what.to_string(),
                sites,
                limit: self.max_dense_sites,
            });
        }
        Ok(())
    }
}

/// A two-site term acting on sites `site` and `site + 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalTerm {
    pub site: usize,
    #[serde(with = "crate::serial::matrix")]
    pub matrix: CMat,
}

impl LocalTerm {
    pub fn new(site: usize, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != 4 || matrix.ncols() != 4 {
            return Err(Error::input(format!(
                "term at site {site} must be 4x4, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = hermiticity_defect(matrix.as_ref());
        if defect > TERM_HERMITIAN_TOL {
            return Err(Error::input(format!(
                "term at site {site} is not Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(LocalTerm { site, matrix })
    }

    pub fn support(&self) -> Interval {
        Interval {
            start: self.site,
            end: self.site + 2,
        }
    }

    pub fn norm(&self) -> f64 {
        linalg::hermitian_norm(self.matrix.as_ref()).expect("4x4 eigenvalues")
    }

    /// The term as a dense operator on its own two sites.
    pub fn to_dense(&self) -> DenseOperator {
        DenseOperator::from_parts(self.support(), self.matrix.clone())
    }
}

/// `H = Σ_{j=0}^{n-2} h_j` on an open chain of `n` spins.
#[derive(Clone, Debug, Serialize)]
pub struct SpinChainHamiltonian {
    n: usize,
    terms: Vec<LocalTerm>,
}

#[derive(Deserialize)]
struct RawChain {
    n: usize,
    terms: Vec<LocalTerm>,
}

impl<'de> Deserialize<'de> for SpinChainHamiltonian {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawChain::deserialize(d)?;
        let terms = raw
            .terms
            .into_iter()
            .map(|t| LocalTerm::new(t.site, t.matrix))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        SpinChainHamiltonian::new(raw.n, terms).map_err(serde::de::Error::custom)
    }
}

impl SpinChainHamiltonian {
    /// Terms must be supplied for every bond `0..n-1`, in order.
    pub fn new(n: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        if n < 2 {
            return Err(Error::input(format!("chain needs at least 2 sites, got {n}")));
        }
        if terms.len() != n - 1 {
            return Err(Error::input(format!(
                "chain of {n} sites needs {} terms, got {}",
                n - 1,
                terms.len()
            )));
        }
        for (j, t) in terms.iter().enumerate() {
            if t.site != j {
                return Err(Error::input(format!("term {j} is labelled with site {}", t.site)));
            }
        }
        Ok(SpinChainHamiltonian { n, terms })
    }

    /// Same two-site matrix on every bond.
    pub fn uniform(n: usize, matrix: CMat) -> Result<Self> {
        let terms = (0..n.saturating_sub(1))
            .map(|j| LocalTerm::new(j, matrix.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn term(&self, j: usize) -> &LocalTerm {
        &self.terms[j]
    }

    pub fn full_interval(&self) -> Interval {
        Interval { start: 0, end: self.n }
    }

    /// `‖h‖ = max_j ‖h_j‖`.
    pub fn max_term_norm(&self) -> f64 {
        self.terms.iter().map(LocalTerm::norm).fold(0.0, f64::max)
    }

    /// Largest term norm among bonds lying inside `region`.
    pub fn max_term_norm_in(&self, region: &Interval) -> f64 {
        self.terms
            .iter()
            .filter(|t| region.contains(&t.support()))
            .map(LocalTerm::norm)
            .fold(0.0, f64::max)
    }

    pub fn check_interval(&self, iv: &Interval) -> Result<()> {
        if iv.is_empty() || iv.end > self.n {
            return Err(Error::input(format!(
                "interval {iv} is not a nonempty sub-interval of [0, {})",
                self.n
            )));
        }
        Ok(())
    }

    /// Multiplies every term by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| LocalTerm {
                site: t.site,
                matrix: linalg::scale(&t.matrix, linalg::c64::new(factor, 0.0)),
            })
            .collect();
        SpinChainHamiltonian { n: self.n, terms }
    }
}

/// `H_support = Σ_{j: supp h_j ⊆ support} h_j`, dense on `support`.
///
/// Supports of a single site hold no bond and give the zero operator.
pub fn build_dense_hamiltonian(
    h: &SpinChainHamiltonian,
    support: Interval,
    limits: &Limits,
) -> Result<DenseOperator> {
    h.check_interval(&support)?;
    limits.check("dense hamiltonian", support.len())?;
    let dim = support.dim();
    let mut m = zeros(dim, dim);
    for t in h.terms.iter().filter(|t| support.contains(&t.support())) {
        let left = 1usize << (t.site - support.start);
        let right = 1usize << (support.end - t.site - 2);
        m += pad_identity(t.matrix.as_ref(), left, right);
    }
    Ok(DenseOperator::from_parts(support, m))
}
