//! Dense complex matrix helpers shared by every module.
//!
//! Multi-register matrices use the Kronecker convention: the first register
//! is the most significant digit of a flat index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all(parts: &[&CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for p in parts {
        out = out.kronecker(p);
    }
    out
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

/// Entrywise transpose (no conjugation).
pub fn transpose(m: &CMatrix) -> CMatrix {
    m.transpose()
}

pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn asymmetry(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Hilbert-Schmidt inner product Tr[A† B].
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn basis_vector(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = ONE;
    v
}

pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().singular_values().iter().copied().collect()
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let s = f(v);
        scaled.column_mut(k).scale_mut(s);
    }
    scaled * vecs.adjoint()
}

pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_fn(m, |x| x.max(0.0).sqrt())
}

/// Sign matrix of a Hermitian operator (zero eigenvalues map to +1).
pub fn hermitian_sign(m: &CMatrix) -> CMatrix {
    hermitian_fn(m, |x| if x < 0.0 { -1.0 } else { 1.0 })
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &identity(u.nrows())) <= tol
}

pub fn isometry_defect(v: &CMatrix) -> f64 {
    max_abs_diff(&(v.adjoint() * v), &identity(v.ncols()))
}

/// Split a flat index into per-register digits.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

pub fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}

/// Reorder tensor factors. Position `k` of the result holds old factor `perm[k]`.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let map = permutation_map(dims, perm);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for j in 0..n {
        let nj = map[j];
        for i in 0..n {
            out[(map[i], nj)] = m[(i, j)];
        }
    }
    out
}

/// Reorder the factors of a state vector.
pub fn permute_vector(v: &CVector, dims: &[usize], perm: &[usize]) -> CVector {
    let map = permutation_map(dims, perm);
    let mut out = CVector::zeros(v.len());
    for i in 0..v.len() {
        out[map[i]] = v[i];
    }
    out
}

fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut map = vec![0; total];
    let mut dig = vec![0usize; dims.len()];
    for (old, slot) in map.iter_mut().enumerate() {
        let mut rem = old;
        for k in (0..dims.len()).rev() {
            dig[k] = rem % dims[k];
            rem /= dims[k];
        }
        let mut idx = 0;
        for (k, &p) in perm.iter().enumerate() {
            idx = idx * new_dims[k] + dig[p];
        }
        *slot = idx;
    }
    map
}

/// Partial trace keeping the factors whose flag is `true`, in original order.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[bool]) -> CMatrix {
    let kept: Vec<usize> = (0..dims.len()).filter(|&k| keep[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|&k| !keep[k]).collect();
    let kd: usize = kept.iter().map(|&k| dims[k]).product();
    let td: usize = traced.iter().map(|&k| dims[k]).product();
    let mut perm = kept.clone();
    perm.extend(&traced);
    let mut dig = vec![0usize; dims.len()];
    // table[ki * td + ti] = flat index in the original ordering
    let mut table = vec![0usize; kd * td];
    let sub_k: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let sub_t: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    for ki in 0..kd {
        let kdig = digits(ki, &sub_k);
        for ti in 0..td {
            let tdig = digits(ti, &sub_t);
            for (pos, &k) in kept.iter().enumerate() {
                dig[k] = kdig[pos];
            }
            for (pos, &k) in traced.iter().enumerate() {
                dig[k] = tdig[pos];
            }
            table[ki * td + ti] = flat_index(&dig, dims);
        }
    }
    let mut out = CMatrix::zeros(kd, kd);
    for kj in 0..kd {
        for ki in 0..kd {
            let mut acc = ZERO;
            for t in 0..td {
                acc += m[(table[ki * td + t], table[kj * td + t])];
            }
            out[(ki, kj)] = acc;
        }
    }
    out
}

/// Apply `Σ_t s_t (K_t ⊗ 1_r) X (K_t ⊗ 1_r)†` where the acted-on factor is the
/// most significant one and `r` is the dimension of everything else.
pub fn apply_terms_front(x: &CMatrix, terms: &[(f64, CMatrix)], rest: usize) -> CMatrix {
    // Move the acted-on factor to the least significant position so that
    // 1_r ⊗ K is block diagonal, then move it back.
    let n = terms.first().map(|t| t.1.ncols()).unwrap_or(1);
    let m_out = terms.first().map(|t| t.1.nrows()).unwrap_or(1);
    let xb = permute_subsystems(x, &[n, rest], &[1, 0]);
    let y = apply_terms_back(&xb, terms, rest);
    permute_subsystems(&y, &[rest, m_out], &[1, 0])
}

/// Same as [`apply_terms_front`] with the acted-on factor least significant.
pub fn apply_terms_back(x: &CMatrix, terms: &[(f64, CMatrix)], rest: usize) -> CMatrix {
    let n = terms.first().map(|t| t.1.ncols()).unwrap_or(1);
    let m = terms.first().map(|t| t.1.nrows()).unwrap_or(1);
    let total_in = rest * n;
    debug_assert_eq!(x.nrows(), total_in);
    let mut out = CMatrix::zeros(rest * m, rest * m);
    let mut left = CMatrix::zeros(rest * m, total_in);
    for (sign, k) in terms {
        for a in 0..rest {
            let block = k * x.rows(a * n, n);
            left.rows_mut(a * m, m).copy_from(&block);
        }
        let kd = k.adjoint();
        for b in 0..rest {
            let block = left.columns(b * n, n) * &kd;
            let mut dst = out.columns_mut(b * m, m);
            for (d, v) in dst.iter_mut().zip(block.iter()) {
                *d += v * *sign;
            }
        }
    }
    out
}

/// Stack the columns of a matrix (row index fastest) into a vector.
pub fn vec_col(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().copied())
}

/// Row-major flattening: entry (r, c) goes to index r * ncols + c.
pub fn vec_row(m: &CMatrix) -> CVector {
    let (r, c) = m.shape();
    CVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

pub fn unvec_row(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |r, c| v[r * cols + c])
}

pub fn check_square(m: &CMatrix, what: &str) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Integer power helper for register dimensions.
pub fn ipow(base: usize, exp: usize) -> usize {
    (0..exp).fold(1, |acc, _| acc * base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_roundtrip() {
        let dims = [2, 3, 2];
        let m = CMatrix::from_fn(12, 12, |i, j| c(i as f64, j as f64 * 0.5));
        let p = permute_subsystems(&m, &dims, &[2, 0, 1]);
        let back = permute_subsystems(&p, &[2, 2, 3], &[1, 2, 0]);
        assert!(max_abs_diff(&m, &back) < 1e-15);
    }

    #[test]
    fn permutation_matches_kron_order() {
        let a = CMatrix::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| c(i as f64 - j as f64, 0.25));
        let ab = kron(&a, &b);
        let ba = kron(&b, &a);
        assert!(max_abs_diff(&permute_subsystems(&ab, &[2, 3], &[1, 0]), &ba) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = CMatrix::from_fn(2, 2, |i, j| c((i + j) as f64, (i as f64) - (j as f64)));
        let b = identity(3).scale(1.0 / 3.0);
        let ab = kron(&a, &b);
        assert!(max_abs_diff(&partial_trace(&ab, &[2, 3], &[true, false]), &a) < 1e-14);
        let ba = kron(&b, &a);
        assert!(max_abs_diff(&partial_trace(&ba, &[3, 2], &[false, true]), &a) < 1e-14);
    }

    #[test]
    fn front_and_back_application_agree_with_kron() {
        let k = CMatrix::from_fn(3, 2, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
        let x = CMatrix::from_fn(4, 4, |i, j| c((i * j) as f64, i as f64));
        let terms = vec![(1.0, k.clone())];
        let big = kron(&k, &identity(2));
        let expect = &big * &x * big.adjoint();
        assert!(max_abs_diff(&apply_terms_front(&x, &terms, 2), &expect) < 1e-12);
        let big = kron(&identity(2), &k);
        let expect = &big * &x * big.adjoint();
        assert!(max_abs_diff(&apply_terms_back(&x, &terms, 2), &expect) < 1e-12);
    }
}
