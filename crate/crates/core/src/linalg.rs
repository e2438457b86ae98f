//! Dense complex kernels: Hermitian spectral decomposition, spectral
//! exponentials, singular values, Kronecker products and identity padding.
//!
//! Everything here works on `faer::Mat<c64>`. Site ordering inside a dense
//! matrix is big-endian: the leftmost site of an interval is the most
//! significant tensor factor.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

pub use faer::c64;

/// Owned complex matrix used for every dense operator in the crate.
pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };

/// Eigendecomposition `a = Q diag(values) Q†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Spectrum {
    pub fn new(a: MatRef<'_, c64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::input(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::computation(format!("hermitian eigendecomposition: {e:?}")))?;
        let s = evd.S();
        let values = (0..a.nrows()).map(|i| s[i].re).collect();
        Ok(Spectrum {
            values,
            vectors: evd.U().to_owned(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Q diag(f(λ)) Q†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> c64) -> CMat {
        let q = &self.vectors;
        let phases: Vec<c64> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = Mat::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)] * phases[j]);
        &scaled * q.adjoint()
    }

    /// `exp(i t A)`.
    pub fn exp_i(&self, t: f64) -> CMat {
        if t == 0.0 {
            return identity(self.dim());
        }
        self.apply_fn(|l| c64::from_polar(1.0, t * l))
    }

    /// Heisenberg conjugation `exp(-i t A) x exp(i t A)`.
    pub fn conjugate(&self, x: MatRef<'_, c64>, t: f64) -> CMat {
        if t == 0.0 {
            return x.to_owned();
        }
        let tilde = self.to_eigenbasis(x);
        self.conjugate_eigenbasis(&tilde, t)
    }

    /// `Q† x Q`.
    pub fn to_eigenbasis(&self, x: MatRef<'_, c64>) -> CMat {
        let q = &self.vectors;
        q.adjoint() * (x * q)
    }

    /// Conjugation of an operator already expressed in the eigenbasis,
    /// returned in the original basis.
    pub fn conjugate_eigenbasis(&self, x_tilde: &CMat, t: f64) -> CMat {
        let v = &self.values;
        let rotated = Mat::from_fn(x_tilde.nrows(), x_tilde.ncols(), |a, b| {
            x_tilde[(a, b)] * c64::from_polar(1.0, -t * (v[a] - v[b]))
        });
        let q = &self.vectors;
        q * (&rotated * q.adjoint())
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

pub fn identity(dim: usize) -> CMat {
    Mat::identity(dim, dim)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Mat::zeros(rows, cols)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(a: MatRef<'_, c64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `exp(i t a)` for Hermitian `a` via its eigendecomposition.
pub fn expm_i_hermitian(a: MatRef<'_, c64>, t: f64) -> Result<CMat> {
    if t == 0.0 {
        return Ok(identity(a.nrows()));
    }
    Ok(Spectrum::new(a)?.exp_i(t))
}

pub fn singular_values(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values()
        .map_err(|e| Error::computation(format!("singular value decomposition: {e:?}")))
}

/// Largest singular value.
pub fn operator_norm(a: MatRef<'_, c64>) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Operator norm of a Hermitian matrix, via its largest |eigenvalue|.
pub fn hermitian_norm(a: MatRef<'_, c64>) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    let vals = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::computation(format!("hermitian eigenvalues: {e:?}")))?;
    Ok(vals.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Thin SVD `a = U diag(s) V†` with singular values in nonincreasing order.
pub fn thin_svd(a: MatRef<'_, c64>) -> Result<(CMat, Vec<f64>, CMat)> {
    let svd = a
        .thin_svd()
        .map_err(|e| Error::computation(format!("singular value decomposition: {e:?}")))?;
    let s = svd.S();
    let k = a.nrows().min(a.ncols());
    let values = (0..k).map(|i| s[i].re).collect();
    Ok((svd.U().to_owned(), values, svd.V().to_owned()))
}

pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    let mut out = zeros(a.nrows() * b.nrows(), a.ncols() * b.ncols());
    faer::linalg::kron::kron(out.as_mut(), a, b);
    out
}

/// `I_left ⊗ a ⊗ I_right` where the identities have the given dimensions.
pub fn pad_identity(a: MatRef<'_, c64>, left_dim: usize, right_dim: usize) -> CMat {
    let inner = a.nrows();
    let dim = left_dim * inner * right_dim;
    let mut out = zeros(dim, dim);
    for l in 0..left_dim {
        let base = l * inner * right_dim;
        for i in 0..inner {
            for j in 0..inner {
                let v = a[(i, j)];
                if v == ZERO {
                    continue;
                }
                for r in 0..right_dim {
                    out[(base + i * right_dim + r, base + j * right_dim + r)] = v;
                }
            }
        }
    }
    out
}

pub fn max_entry_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_entry_diff");
    let mut worst = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// `‖U†U − I‖` in operator norm.
pub fn unitarity_defect(u: MatRef<'_, c64>) -> Result<f64> {
    let g = u.adjoint() * u;
    let d = &g - identity(u.nrows());
    hermitian_norm(d.as_ref())
}

/// `a^k` by binary exponentiation.
pub fn mat_pow(a: &CMat, mut k: u64) -> CMat {
    let mut result = identity(a.nrows());
    let mut base = a.clone();
    let mut first = true;
    while k > 0 {
        if k & 1 == 1 {
            result = if first { base.clone() } else { &result * &base };
            first = false;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn scale(a: &CMat, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

/// Normalized Hilbert-Schmidt norm `sqrt(tr(a†a) / dim)`.
pub fn normalized_frobenius(a: MatRef<'_, c64>) -> f64 {
    let dim = a.nrows().max(1) as f64;
    a.norm_l2() / dim.sqrt()
}
