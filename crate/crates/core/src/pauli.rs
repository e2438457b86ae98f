//! Single-site Pauli basis, its product structure constants, and the fast
//! transform between dense operators and Pauli-string coefficients.
//!
//! Pauli strings are indexed big-endian: the coefficient of
//! `σ^{α_0} ⊗ … ⊗ σ^{α_{n-1}}` lives at `Σ_k α_k 4^{n-1-k}`.

use faer::MatRef;

use crate::error::{Error, Result};
use crate::linalg::{c64, zeros, CMat, ONE, ZERO};

const I: c64 = c64 { re: 0.0, im: 1.0 };

/// The four single-site operators `σ^0 = I, σ^1 = X, σ^2 = Y, σ^3 = Z` as
/// row-major 2×2 arrays.
pub const PAULI: [[[c64; 2]; 2]; 4] = [
    [[ONE, ZERO], [ZERO, ONE]],
    [[ZERO, ONE], [ONE, ZERO]],
    [[ZERO, c64 { re: 0.0, im: -1.0 }], [I, ZERO]],
    [[ONE, ZERO], [ZERO, c64 { re: -1.0, im: 0.0 }]],
];

pub fn pauli_matrix(alpha: usize) -> CMat {
    let p = PAULI[alpha];
    CMat::from_fn(2, 2, |i, j| p[i][j])
}

/// `σ^a σ^b = phase · σ^c`; returns `(c, phase)`.
pub fn pauli_product(a: usize, b: usize) -> (usize, c64) {
    match (a, b) {
        (0, b) => (b, ONE),
        (a, 0) => (a, ONE),
        (a, b) if a == b => (0, ONE),
        _ => {
            let c = 6 - a - b;
            // cyclic (1,2,3) order gives +i
            let cyclic = (a % 3) + 1 == b;
            (c, if cyclic { I } else { -I })
        }
    }
}

/// Coefficients `c_α = tr(σ^α W) / 2^n` of a dense operator on `n` sites.
pub fn pauli_coefficients(w: MatRef<'_, c64>, n: usize) -> Result<Vec<c64>> {
    let dim = 1usize << n;
    if w.nrows() != dim || w.ncols() != dim {
        return Err(Error::input(format!(
            "operator of size {}x{} does not act on {n} sites",
            w.nrows(),
            w.ncols()
        )));
    }
    // Interleave row and column bits per site: p_k = 2 i_k + j_k.
    let mut data = vec![ZERO; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            data[interleave(i, j, n)] = w[(i, j)];
        }
    }
    // c_α gets σ^α_{j i} / 2 for local pair (i, j).
    let mut map = [[ZERO; 4]; 4];
    for (alpha, row) in map.iter_mut().enumerate() {
        for (p, entry) in row.iter_mut().enumerate() {
            let (i, j) = (p >> 1, p & 1);
            *entry = PAULI[alpha][j][i] * 0.5;
        }
    }
    apply_sitewise(&mut data, n, &map);
    Ok(data)
}

/// Inverse of [`pauli_coefficients`]: `W = Σ_α c_α σ^α`.
pub fn dense_from_pauli_coefficients(coeffs: &[c64], n: usize) -> Result<CMat> {
    let dim = 1usize << n;
    if coeffs.len() != dim * dim {
        return Err(Error::input(format!(
            "expected {} Pauli coefficients for {n} sites, got {}",
            dim * dim,
            coeffs.len()
        )));
    }
    let mut data = coeffs.to_vec();
    let mut map = [[ZERO; 4]; 4];
    for (p, row) in map.iter_mut().enumerate() {
        for (alpha, entry) in row.iter_mut().enumerate() {
            let (i, j) = (p >> 1, p & 1);
            *entry = PAULI[alpha][i][j];
        }
    }
    apply_sitewise(&mut data, n, &map);
    let mut w = zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            w[(i, j)] = data[interleave(i, j, n)];
        }
    }
    Ok(w)
}

fn interleave(i: usize, j: usize, n: usize) -> usize {
    let mut idx = 0;
    for k in 0..n {
        let shift = n - 1 - k;
        let p = (((i >> shift) & 1) << 1) | ((j >> shift) & 1);
        idx = (idx << 2) | p;
    }
    idx
}

/// Applies the 4×4 map `out[a] = Σ_p map[a][p] in[p]` along every site axis.
fn apply_sitewise(data: &mut [c64], n: usize, map: &[[c64; 4]; 4]) {
    let total = data.len();
    for k in 0..n {
        let stride = 1usize << (2 * (n - 1 - k));
        let block = stride * 4;
        for base in (0..total).step_by(block) {
            for off in 0..stride {
                let idx = |p: usize| base + p * stride + off;
                let v = [data[idx(0)], data[idx(1)], data[idx(2)], data[idx(3)]];
                for (a, row) in map.iter().enumerate() {
                    data[idx(a)] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
                }
            }
        }
    }
}
