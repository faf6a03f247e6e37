//! Seeded generators for random states, unitaries and channels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, c, CMatrix, CVector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream from a base seed and a label.
pub fn substream(seed: u64, label: &str) -> SeededRng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    rng(seed ^ h.rotate_left(17))
}

fn gaussian(r: &mut SeededRng) -> f64 {
    r.sample(StandardNormal)
}

pub fn ginibre(rows: usize, cols: usize, r: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(r), gaussian(r)))
}

/// Haar-random unit vector.
pub fn pure_state(d: usize, r: &mut SeededRng) -> CVector {
    let v = CVector::from_fn(d, |_, _| c(gaussian(r), gaussian(r)));
    let n = v.norm();
    v.unscale(n)
}

/// Random density matrix of the given rank (Hilbert-Schmidt measure for full rank).
pub fn density_matrix(d: usize, rank: usize, r: &mut SeededRng) -> CMatrix {
    let g = ginibre(d, rank.max(1), r);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    m.unscale(t)
}

/// Columns of a Haar-random isometry C^cols → C^rows.
pub fn isometry(rows: usize, cols: usize, r: &mut SeededRng) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rows, cols, r);
    let qr = g.qr();
    let q = qr.q();
    let rr = qr.r();
    // Fix column phases so the distribution is Haar.
    let mut out = q.clone();
    for k in 0..cols {
        let d = rr[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for z in out.column_mut(k).iter_mut() {
            *z *= ph;
        }
    }
    out
}

pub fn unitary(d: usize, r: &mut SeededRng) -> CMatrix {
    isometry(d, d, r)
}

/// Kraus operators of a random channel C^d_in → C^d_out with the given Kraus rank.
pub fn channel_kraus(d_in: usize, d_out: usize, rank: usize, r: &mut SeededRng) -> Vec<CMatrix> {
    let v = isometry(d_out * rank, d_in, r);
    (0..rank)
        .map(|k| CMatrix::from_fn(d_out, d_in, |o, i| v[(o * rank + k, i)]))
        .collect()
}

/// Random Hermitian matrix with Gaussian entries, normalized to operator norm 1.
pub fn hermitian(d: usize, r: &mut SeededRng) -> CMatrix {
    let g = ginibre(d, d, r);
    let h = linalg::hermitian_part(&g);
    let n = crate::quantum::operator_norm(&h);
    h.unscale(n)
}

pub fn uniform(r: &mut SeededRng) -> f64 {
    r.random::<f64>()
}

pub fn index(r: &mut SeededRng, n: usize) -> usize {
    r.random_range(0..n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_valid_and_reproducible() {
        let mut a = rng(7);
        let mut b = rng(7);
        let u = unitary(4, &mut a);
        assert!(linalg::is_unitary(&u, 1e-12));
        assert_eq!(u, unitary(4, &mut b));
        let v = isometry(6, 2, &mut a);
        assert!(linalg::isometry_defect(&v) < 1e-12);
        let rho = density_matrix(3, 2, &mut a);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let ks = channel_kraus(2, 3, 2, &mut a);
        let s = ks.iter().fold(CMatrix::zeros(2, 2), |acc, k| acc + k.adjoint() * k);
        assert!(linalg::max_abs_diff(&s, &linalg::identity(2)) < 1e-12);
        let psi = pure_state(5, &mut a);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }
}
