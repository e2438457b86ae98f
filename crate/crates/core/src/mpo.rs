//! Matrix product operators in the Pauli basis.
//!
//! An [`MpoOperator`] on `n` sites stores, per site `j`, four `C_j × D_j`
//! matrices `A_j^α` and represents
//! `W = Σ_α A_0^{α_0} ⋯ A_{n−1}^{α_{n−1}} σ^{α_0} ⊗ ⋯ ⊗ σ^{α_{n−1}}`.
//! The coefficients are taken in the normalized Hilbert-Schmidt inner product
//! `⟨A, B⟩ = tr(A†B) / 2^n`, in which Pauli strings are orthonormal, so
//! coefficient-space SVDs truncate in operator Frobenius norm.

use serde::{Deserialize, Serialize};

use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::linalg::{c64, kron, thin_svd, zeros, CMat, ONE, ZERO};
use crate::model::{Interval, Limits};
use crate::pauli::{dense_from_pauli_coefficients, pauli_coefficients, pauli_product};
use crate::qca::{check_layer, Gate, LayeredCircuit};

/// Largest bond dimension any operation will create.
pub const MAX_BOND: usize = 4096;

/// Relative truncation floor used when the requested tolerance is zero.
pub const RANK_FLOOR: f64 = 1e-13;

type Site = [CMat; 4];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "RawMpo", try_from = "RawMpo")]
pub struct MpoOperator {
    n: usize,
    tensors: Vec<Site>,
}

#[derive(Serialize, Deserialize)]
struct RawSite {
    #[serde(with = "crate::serial::matrix")]
    alpha_0: CMat,
    #[serde(with = "crate::serial::matrix")]
    alpha_1: CMat,
    #[serde(with = "crate::serial::matrix")]
    alpha_2: CMat,
    #[serde(with = "crate::serial::matrix")]
    alpha_3: CMat,
}

#[derive(Serialize, Deserialize)]
struct RawMpo {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_bond: Option<usize>,
    tensors: Vec<RawSite>,
}

impl From<MpoOperator> for RawMpo {
    fn from(m: MpoOperator) -> Self {
        RawMpo {
            n: m.n,
            max_bond: Some(m.max_bond()),
            tensors: m
                .tensors
                .into_iter()
                .map(|[alpha_0, alpha_1, alpha_2, alpha_3]| RawSite {
                    alpha_0,
                    alpha_1,
                    alpha_2,
                    alpha_3,
                })
                .collect(),
        }
    }
}

impl TryFrom<RawMpo> for MpoOperator {
    type Error = Error;

    fn try_from(raw: RawMpo) -> Result<Self> {
        if raw.tensors.len() != raw.n {
            return Err(Error::input(format!(
                "mpo declares {} sites but has {} tensors",
                raw.n,
                raw.tensors.len()
            )));
        }
        let tensors = raw
            .tensors
            .into_iter()
            .map(|s| [s.alpha_0, s.alpha_1, s.alpha_2, s.alpha_3])
            .collect();
        let m = MpoOperator::new(tensors)?;
        if let Some(b) = raw.max_bond {
            if b != m.max_bond() {
                return Err(Error::input(format!(
                    "mpo declares max_bond {b} but its tensors give {}",
                    m.max_bond()
                )));
            }
        }
        Ok(m)
    }
}

impl MpoOperator {
    /// Validates shapes: `C_0 = D_{n−1} = 1` and `C_{j+1} = D_j`.
    pub fn new(tensors: Vec<[CMat; 4]>) -> Result<Self> {
        let n = tensors.len();
        if n == 0 {
            return Err(Error::input("mpo needs at least one site"));
        }
        for (j, site) in tensors.iter().enumerate() {
            let (c, d) = (site[0].nrows(), site[0].ncols());
            if c == 0 || d == 0 || site.iter().any(|a| a.nrows() != c || a.ncols() != d) {
                return Err(Error::input(format!("site {j}: the four tensors must share a nonempty shape")));
            }
            if j == 0 && c != 1 {
                return Err(Error::input(format!("site 0 has left bond {c}, expected 1")));
            }
            if j == n - 1 && d != 1 {
                return Err(Error::input(format!("last site has right bond {d}, expected 1")));
            }
            if j > 0 && tensors[j - 1][0].ncols() != c {
                return Err(Error::input(format!(
                    "bond mismatch between sites {} and {j}: {} vs {c}",
                    j - 1,
                    tensors[j - 1][0].ncols()
                )));
            }
            if d > MAX_BOND {
                return Err(bond_limit("mpo", d));
            }
        }
        Ok(MpoOperator { n, tensors })
    }

    /// The identity on `n` sites, all bonds 1.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).map(|_| identity_site()).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tensors(&self) -> &[[CMat; 4]] {
        &self.tensors
    }

    /// Internal bonds `D_0, …, D_{n−2}`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.n - 1].iter().map(|s| s[0].ncols()).collect()
    }

    /// Largest auxiliary dimension (1 for a product operator).
    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }
}

fn bond_limit(what: &str, bond: usize) -> Error {
    Error::BondLimit {
        what: what.to_string(),
        bond,
        limit: MAX_BOND,
    }
}

fn identity_site() -> Site {
    let one = CMat::from_fn(1, 1, |_, _| ONE);
    [one, zeros(1, 1), zeros(1, 1), zeros(1, 1)]
}

/// `(C·4) × D` matrix with rows `a·4 + α`.
fn left_matrix(site: &Site) -> CMat {
    let (c, d) = (site[0].nrows(), site[0].ncols());
    CMat::from_fn(c * 4, d, |r, b| site[r % 4][(r / 4, b)])
}

fn site_from_left(m: &CMat, c: usize, d: usize) -> Site {
    std::array::from_fn(|alpha| CMat::from_fn(c, d, |a, b| m[(a * 4 + alpha, b)]))
}

/// `C × (4·D)` matrix with columns `α·D + b`.
fn right_matrix(site: &Site) -> CMat {
    let (c, d) = (site[0].nrows(), site[0].ncols());
    CMat::from_fn(c, 4 * d, |a, col| site[col / d][(a, col % d)])
}

fn site_from_right(m: &CMat, c: usize, d: usize) -> Site {
    std::array::from_fn(|alpha| CMat::from_fn(c, d, |a, b| m[(a, alpha * d + b)]))
}

/// Smallest rank whose discarded squared singular values stay within `budget`.
fn keep_rank(s: &[f64], budget: f64) -> usize {
    let mut tail = 0.0;
    let mut k = s.len();
    while k > 1 {
        let next = tail + s[k - 1] * s[k - 1];
        if next > budget {
            break;
        }
        tail = next;
        k -= 1;
    }
    k.max(1)
}

fn discarded(s: &[f64], k: usize) -> f64 {
    s[k..].iter().map(|x| x * x).sum()
}

/// `diag(s[..k]) V[:, ..k]†`.
fn sv_dagger(s: &[f64], v: &CMat, k: usize) -> CMat {
    CMat::from_fn(k, v.nrows(), |i, j| v[(j, i)].conj() * s[i])
}

fn per_bond_budget(tol: f64, total: f64, n: usize) -> f64 {
    let eff = tol.max(RANK_FLOOR);
    eff * eff * total / (n.saturating_sub(1).max(1)) as f64
}

/// Tensor-train factorization of the Pauli coefficients of `w`, left to right.
///
/// Each bond discards a singular-value tail of squared weight at most
/// `tol² ‖w‖² / (n − 1)`, so the Frobenius error is at most `tol ‖w‖`.
pub fn mpo_from_dense(w: &DenseOperator, tol: f64, limits: &Limits) -> Result<MpoOperator> {
    if !(tol >= 0.0) {
        return Err(Error::input(format!("truncation tolerance must be nonnegative, got {tol}")));
    }
    let n = w.support().len();
    limits.check("mpo from dense", n)?;
    let coeffs = pauli_coefficients(w.matrix().as_ref(), n)?;
    let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let budget = per_bond_budget(tol, total, n);

    let mut tensors = Vec::with_capacity(n);
    let mut rank = 1;
    let mut cols = coeffs.len() / 4;
    let mut rest = CMat::from_fn(4, cols, |r, c| coeffs[r * cols + c]);
    for _ in 0..n - 1 {
        let (u, s, v) = thin_svd(rest.as_ref())?;
        let k = keep_rank(&s, budget);
        if k > MAX_BOND {
            return Err(bond_limit("mpo from dense", k));
        }
        tensors.push(site_from_left(&u, rank, k));
        let sv = sv_dagger(&s, &v, k);
        let next_cols = cols / 4;
        rest = CMat::from_fn(k * 4, next_cols, |r, c| sv[(r / 4, (r % 4) * next_cols + c)]);
        rank = k;
        cols = next_cols;
    }
    tensors.push(site_from_left(&rest, rank, 1));
    MpoOperator::new(tensors)
}

/// Pauli coefficients of the represented operator, big-endian.
fn coefficients(m: &MpoOperator) -> Vec<c64> {
    let mut acc = CMat::from_fn(1, 1, |_, _| ONE);
    for site in &m.tensors {
        let d = site[0].ncols();
        let parts: Vec<CMat> = site.iter().map(|a| &acc * a).collect();
        acc = CMat::from_fn(acc.nrows() * 4, d, |r, b| parts[r % 4][(r / 4, b)]);
    }
    (0..acc.nrows()).map(|r| acc[(r, 0)]).collect()
}

/// Contracts the MPO to a dense operator on `[0, n)`.
pub fn mpo_to_dense(m: &MpoOperator, limits: &Limits) -> Result<DenseOperator> {
    limits.check("mpo to dense", m.n)?;
    let matrix = dense_from_pauli_coefficients(&coefficients(m), m.n)?;
    DenseOperator::new(Interval { start: 0, end: m.n }, matrix)
}

/// MPO of `⊗` gates on `[0, n)` with identity on uncovered sites.
///
/// Bonds across block boundaries and through gaps are 1.
pub fn mpo_from_layer(gates: &[Gate], n: usize) -> Result<MpoOperator> {
    if n == 0 {
        return Err(Error::input("layer needs at least one site"));
    }
    check_layer("layer", gates, n)?;
    let mut sorted: Vec<&Gate> = gates.iter().collect();
    sorted.sort_by_key(|g| g.block.start);
    let exact = Limits::new(crate::model::HARD_MAX_DENSE_SITES)?;
    let mut tensors = Vec::with_capacity(n);
    for g in sorted {
        while tensors.len() < g.block.start {
            tensors.push(identity_site());
        }
        let block = mpo_from_dense(&g.to_dense()?, 0.0, &exact)?;
        tensors.extend(block.tensors);
    }
    while tensors.len() < n {
        tensors.push(identity_site());
    }
    MpoOperator::new(tensors)
}

/// MPO of the product `a · b`; bond dimensions multiply, nothing is truncated.
pub fn mpo_multiply(a: &MpoOperator, b: &MpoOperator) -> Result<MpoOperator> {
    if a.n != b.n {
        return Err(Error::input(format!("cannot multiply mpos on {} and {} sites", a.n, b.n)));
    }
    let mut tensors = Vec::with_capacity(a.n);
    for (sa, sb) in a.tensors.iter().zip(&b.tensors) {
        let (c, d) = (sa[0].nrows() * sb[0].nrows(), sa[0].ncols() * sb[0].ncols());
        if d > MAX_BOND {
            return Err(bond_limit("mpo product", d));
        }
        let mut out: Site = std::array::from_fn(|_| zeros(c, d));
        for (alpha, x) in sa.iter().enumerate() {
            for (beta, y) in sb.iter().enumerate() {
                let (gamma, phase) = pauli_product(alpha, beta);
                let k = kron(x.as_ref(), y.as_ref());
                out[gamma] += crate::linalg::scale(&k, phase);
            }
        }
        tensors.push(out);
    }
    MpoOperator::new(tensors)
}

/// Output of [`mpo_compress`].
#[derive(Clone, Debug)]
pub struct Compressed {
    pub mpo: MpoOperator,
    /// `sqrt` of the total discarded squared singular weight; bounds the
    /// normalized Frobenius distance to the input.
    pub truncation_error: f64,
}

/// SVD recompression: a right-to-left sweep brings the tail into
/// right-orthonormal form, then a left-to-right sweep truncates each bond.
/// The result is left-canonical on every site but the last.
pub fn mpo_compress(m: &MpoOperator, tol: f64) -> Result<Compressed> {
    if !(tol >= 0.0) {
        return Err(Error::input(format!("truncation tolerance must be nonnegative, got {tol}")));
    }
    let n = m.n;
    let mut t = m.tensors.clone();
    if n == 1 {
        return Ok(Compressed {
            mpo: m.clone(),
            truncation_error: 0.0,
        });
    }
    for j in (1..n).rev() {
        let (c, d) = (t[j][0].nrows(), t[j][0].ncols());
        let (u, s, v) = thin_svd(right_matrix(&t[j]).as_ref())?;
        let k = s.len();
        t[j] = site_from_right(&v.adjoint().to_owned(), k, d);
        let us = CMat::from_fn(c, k, |a, b| u[(a, b)] * s[b]);
        for a in t[j - 1].iter_mut() {
            *a = &*a * &us;
        }
    }
    let total: f64 = t[0].iter().map(|a| a.norm_l2().powi(2)).sum();
    let budget = per_bond_budget(tol, total, n);
    let mut dropped = 0.0;
    for j in 0..n - 1 {
        let c = t[j][0].nrows();
        let (u, s, v) = thin_svd(left_matrix(&t[j]).as_ref())?;
        let k = keep_rank(&s, budget);
        dropped += discarded(&s, k);
        t[j] = site_from_left(&u, c, k);
        let sv = sv_dagger(&s, &v, k);
        for a in t[j + 1].iter_mut() {
            *a = &sv * &*a;
        }
    }
    Ok(Compressed {
        mpo: MpoOperator::new(t)?,
        truncation_error: dropped.sqrt(),
    })
}

/// `tr(a† b) / 2^n` by left-to-right transfer matrices.
pub fn mpo_frobenius_inner(a: &MpoOperator, b: &MpoOperator) -> Result<c64> {
    if a.n != b.n {
        return Err(Error::input(format!("mpos on {} and {} sites", a.n, b.n)));
    }
    let mut e = CMat::from_fn(1, 1, |_, _| ONE);
    for (sa, sb) in a.tensors.iter().zip(&b.tensors) {
        let mut next = zeros(sa[0].ncols(), sb[0].ncols());
        for (x, y) in sa.iter().zip(sb) {
            next += &(x.adjoint() * &e) * y;
        }
        e = next;
    }
    Ok(e[(0, 0)])
}

/// `sqrt(tr(W†W) / 2^n)`.
pub fn mpo_frobenius_norm(m: &MpoOperator) -> f64 {
    let v = mpo_frobenius_inner(m, m).expect("same length").re;
    v.max(0.0).sqrt()
}

/// Normalized Frobenius distance `‖a − b‖`, computed by orthogonalizing the
/// difference MPO rather than expanding the square.
pub fn mpo_frobenius_distance(a: &MpoOperator, b: &MpoOperator) -> Result<f64> {
    let diff = difference(a, b)?;
    canonical_norm(&diff)
}

fn difference(a: &MpoOperator, b: &MpoOperator) -> Result<Vec<Site>> {
    if a.n != b.n {
        return Err(Error::input(format!("mpos on {} and {} sites", a.n, b.n)));
    }
    let n = a.n;
    let tensors = (0..n)
        .map(|j| {
            let (sa, sb) = (&a.tensors[j], &b.tensors[j]);
            let (ca, da) = (sa[0].nrows(), sa[0].ncols());
            let (cb, db) = (sb[0].nrows(), sb[0].ncols());
            std::array::from_fn(|alpha| {
                let (x, y) = (&sa[alpha], &sb[alpha]);
                if n == 1 {
                    x - y
                } else if j == 0 {
                    CMat::from_fn(1, da + db, |_, col| if col < da { x[(0, col)] } else { -y[(0, col - da)] })
                } else if j == n - 1 {
                    CMat::from_fn(ca + cb, 1, |row, _| if row < ca { x[(row, 0)] } else { y[(row - ca, 0)] })
                } else {
                    CMat::from_fn(ca + cb, da + db, |r, c| match (r < ca, c < da) {
                        (true, true) => x[(r, c)],
                        (false, false) => y[(r - ca, c - da)],
                        _ => ZERO,
                    })
                }
            })
        })
        .collect();
    Ok(tensors)
}

fn canonical_norm(tensors: &[Site]) -> Result<f64> {
    let n = tensors.len();
    let mut carry = CMat::from_fn(1, 1, |_, _| ONE);
    for (j, site) in tensors.iter().enumerate() {
        let absorbed: Site = std::array::from_fn(|alpha| &carry * &site[alpha]);
        if j == n - 1 {
            return Ok(absorbed.iter().map(|a| a.norm_l2().powi(2)).sum::<f64>().sqrt());
        }
        let (_, s, v) = thin_svd(left_matrix(&absorbed).as_ref())?;
        let k = s.iter().take_while(|&&x| x > 0.0).count().max(1);
        carry = sv_dagger(&s, &v, k);
    }
    unreachable!("loop returns at the last site")
}

/// Output of [`qca_to_mpo`].
#[derive(Clone, Debug)]
pub struct QcaMpo {
    pub mpo: MpoOperator,
    pub pre_compression_max_bond: usize,
    pub truncation_error: f64,
}

/// Compressed MPO of `(⊗U)(⊗V)`.
pub fn qca_to_mpo(circuit: &LayeredCircuit, tol: f64) -> Result<QcaMpo> {
    let u = mpo_from_layer(&circuit.u_layer, circuit.n)?;
    let v = mpo_from_layer(&circuit.v_layer, circuit.n)?;
    let product = mpo_multiply(&u, &v)?;
    let pre = product.max_bond();
    let cap = 1u128 << (2 * circuit.block_size.min(60));
    if pre as u128 > cap {
        return Err(Error::computation(format!(
            "circuit mpo has bond {pre}, above the 2^(2*{}) ceiling",
            circuit.block_size
        )));
    }
    let c = mpo_compress(&product, tol)?;
    Ok(QcaMpo {
        mpo: c.mpo,
        pre_compression_max_bond: pre,
        truncation_error: c.truncation_error,
    })
}
