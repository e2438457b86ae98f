//! Explicit operators on contiguous site intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, hermiticity_defect, pad_identity, CMat};
use crate::model::{Interval, HARD_MAX_DENSE_SITES};

/// Hermiticity tolerance accepted by [`propagator`].
pub const PROPAGATOR_HERMITIAN_TOL: f64 = 1e-10;

/// A `2^{|support|}`-dimensional matrix acting on `support`.
///
/// Algebra between operators with different supports embeds both into the
/// hull of the two intervals, padding with identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenseOperator {
    #[serde(with = "crate::serial::interval")]
    support: Interval,
    #[serde(with = "crate::serial::matrix")]
    matrix: CMat,
}

impl DenseOperator {
    pub fn new(support: Interval, matrix: CMat) -> Result<Self> {
        check_sites("dense operator", support.len())?;
        let dim = support.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::input(format!(
                "matrix of size {}x{} does not match support {support} (dimension {dim})",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(DenseOperator { support, matrix })
    }

    pub(crate) fn from_parts(support: Interval, matrix: CMat) -> Self {
        debug_assert_eq!(matrix.nrows(), support.dim());
        DenseOperator { support, matrix }
    }

    pub fn identity(support: Interval) -> Result<Self> {
        check_sites("identity", support.len())?;
        Ok(Self::from_parts(support, linalg::identity(support.dim())))
    }

    /// A single-site operator placed at `site`.
    pub fn single_site(site: usize, m: CMat) -> Result<Self> {
        Self::new(Interval { start: site, end: site + 1 }, m)
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Pads with identity so the operator acts on `target ⊇ support`.
    pub fn embed(&self, target: Interval) -> Result<Self> {
        if !target.contains(&self.support) {
            return Err(Error::input(format!(
                "cannot embed operator on {} into {target}",
                self.support
            )));
        }
        if target == self.support {
            return Ok(self.clone());
        }
        check_sites("embedding", target.len())?;
        let left = 1usize << (self.support.start - target.start);
        let right = 1usize << (target.end - self.support.end);
        Ok(Self::from_parts(target, pad_identity(self.matrix.as_ref(), left, right)))
    }

    /// `self · other` on the hull of the two supports.
    pub fn multiply(&self, other: &DenseOperator) -> Result<Self> {
        let hull = self.support.hull(&other.support);
        let a = self.embed(hull)?;
        let b = other.embed(hull)?;
        Ok(Self::from_parts(hull, &a.matrix * &b.matrix))
    }

    pub fn add(&self, other: &DenseOperator) -> Result<Self> {
        let hull = self.support.hull(&other.support);
        let a = self.embed(hull)?;
        let b = other.embed(hull)?;
        Ok(Self::from_parts(hull, &a.matrix + &b.matrix))
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<Self> {
        let hull = self.support.hull(&other.support);
        let a = self.embed(hull)?;
        let b = other.embed(hull)?;
        Ok(Self::from_parts(hull, &a.matrix - &b.matrix))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.support, self.matrix.adjoint().to_owned())
    }

    /// Tensor product of operators on adjacent intervals (`self` on the left).
    pub fn tensor(&self, right: &DenseOperator) -> Result<Self> {
        if self.support.end != right.support.start {
            return Err(Error::input(format!(
                "tensor product needs adjacent supports, got {} and {}",
                self.support, right.support
            )));
        }
        let support = self.support.hull(&right.support);
        check_sites("tensor product", support.len())?;
        Ok(Self::from_parts(
            support,
            linalg::kron(self.matrix.as_ref(), right.matrix.as_ref()),
        ))
    }

    pub fn operator_norm(&self) -> Result<f64> {
        linalg::operator_norm(self.matrix.as_ref())
    }

    pub fn hermitian_norm(&self) -> Result<f64> {
        linalg::hermitian_norm(self.matrix.as_ref())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(self.matrix.as_ref())
    }

    pub fn unitarity_defect(&self) -> Result<f64> {
        linalg::unitarity_defect(self.matrix.as_ref())
    }

    /// `‖self − other‖` after embedding both into their hull.
    pub fn distance(&self, other: &DenseOperator) -> Result<f64> {
        self.sub(other)?.operator_norm()
    }

    /// Largest entrywise difference after embedding into the hull.
    pub fn max_entry_distance(&self, other: &DenseOperator) -> Result<f64> {
        let hull = self.support.hull(&other.support);
        let a = self.embed(hull)?;
        let b = other.embed(hull)?;
        Ok(linalg::max_entry_diff(a.matrix.as_ref(), b.matrix.as_ref()))
    }
}

fn check_sites(what: &str, sites: usize) -> Result<()> {
    if sites > HARD_MAX_DENSE_SITES {
        return Err(Error::Resource {
            what: what.to_string(),
            sites,
            limit: HARD_MAX_DENSE_SITES,
        });
    }
    Ok(())
}

/// The propagator `exp(+i t H)` of a Hermitian operator.
pub fn propagator(hmat: &DenseOperator, t: f64) -> Result<DenseOperator> {
    let defect = hmat.hermiticity_defect();
    if defect > PROPAGATOR_HERMITIAN_TOL {
        return Err(Error::input(format!(
            "propagator needs a Hermitian generator (defect {defect:.3e})"
        )));
    }
    let u = linalg::expm_i_hermitian(hmat.matrix.as_ref(), t)?;
    Ok(DenseOperator::from_parts(hmat.support, u))
}
