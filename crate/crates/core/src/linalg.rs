//! Small dense complex linear algebra: a cyclic Jacobi eigensolver for
//! Hermitian matrices, SVD-based numerical rank, and the canonical phase
//! convention used for beamformers.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Singular values above `RANK_TOL * sigma_max` count toward the rank.
pub const RANK_TOL: f64 = 1e-8;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are sorted in
/// ascending order; column `i` of the returned matrix is the unit
/// eigenvector for eigenvalue `i`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Cyclic Jacobi iteration. Only the Hermitian part of `a` is used.
pub fn hermitian_eigen(a: &CMat) -> Result<HermitianEigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigen-decomposition of a {}x{} matrix",
            n,
            a.ncols()
        )));
    }
    let mut m = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let mut v = CMat::identity(n, n);

    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut converged = scale == 0.0 || n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenFailure { sweeps });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        converged = off <= 1e-15 * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// One complex Jacobi rotation annihilating `m[(p, q)]`.
fn rotate(m: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let apq = m[(p, q)];
    let b = apq.norm();
    if b <= 1e-300 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Remove the phase of the off-diagonal entry, then apply a real rotation.
    let phase = apq / b;
    let theta = 0.5 * (2.0 * b).atan2(aqq - app);
    let (s, c) = theta.sin_cos();
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = m.nrows();
    for i in 0..n {
        let mip = m[(i, p)];
        let miq = m[(i, q)];
        m[(i, p)] = mip * g_pp + miq * g_qp;
        m[(i, q)] = mip * g_pq + miq * g_qq;
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * g_pp + viq * g_qp;
        v[(i, q)] = vip * g_pq + viq * g_qq;
    }
    for j in 0..n {
        let mpj = m[(p, j)];
        let mqj = m[(q, j)];
        m[(p, j)] = g_pp.conj() * mpj + g_qp.conj() * mqj;
        m[(q, j)] = g_pq.conj() * mpj + g_qq.conj() * mqj;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;
}

/// Unit eigenvector for the smallest eigenvalue of a Hermitian PSD matrix.
///
/// When the smallest eigenvalue is degenerate, every eigenvector of the
/// degenerate cluster is canonicalized and the lexicographically largest
/// one wins.
pub fn min_eigenvector(a: &CMat) -> Result<CVec> {
    let eig = hermitian_eigen(a)?;
    let lo = eig.values[0];
    let hi = eig.values[eig.values.len() - 1].abs().max(lo.abs());
    let cluster = 1e-12 * hi.max(f64::MIN_POSITIVE);
    let mut best: Option<CVec> = None;
    for (i, &val) in eig.values.iter().enumerate() {
        if val - lo > cluster {
            break;
        }
        let mut cand = eig.vectors.column(i).into_owned();
        canonicalize(&mut cand);
        best = match best {
            Some(b) if lex_cmp(&b, &cand) != Ordering::Less => Some(b),
            _ => Some(cand),
        };
    }
    Ok(best.expect("matrix has at least one eigenvalue"))
}

fn lex_cmp(a: &CVec, b: &CVec) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Normalizes `v` to unit norm and rotates its phase so that the first entry
/// of largest modulus is real and nonnegative. Zero vectors are left as is.
pub fn canonicalize(v: &mut CVec) {
    let norm = v.norm();
    if norm == 0.0 {
        return;
    }
    v.unscale_mut(norm);
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(lead) = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-12)).copied() {
        let rot = lead.conj() / lead.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
    // The leading entry is real by construction; strip the roundoff.
    if let Some(lead) = v.iter_mut().find(|z| z.norm() >= max * (1.0 - 1e-12)) {
        *lead = C64::new(lead.norm(), 0.0);
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values strictly above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &CMat, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Stacks vectors of equal length as the columns of a matrix.
pub fn columns(vectors: &[CVec], nrows: usize) -> CMat {
    let mut m = CMat::zeros(nrows, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// `u^H v`.
pub fn inner(u: &CVec, v: &CVec) -> C64 {
    u.dotc(v)
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CMat::from_fn(n, n, |_, _| {
            C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        &g + g.adjoint()
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian() {
        for seed in 0..20 {
            let n = 1 + (seed as usize % 7);
            let a = random_hermitian(n, seed);
            let eig = hermitian_eigen(&a).unwrap();
            let d = CMat::from_diagonal(&CVec::from_iterator(
                n,
                eig.values.iter().map(|&x| C64::new(x, 0.0)),
            ));
            let rec = &eig.vectors * d * eig.vectors.adjoint();
            assert!((rec - &a).norm() < 1e-11 * a.norm().max(1.0));
            let gram = eig.vectors.adjoint() * &eig.vectors;
            assert!((gram - CMat::identity(n, n)).norm() < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn jacobi_matches_nalgebra_spectrum() {
        let a = random_hermitian(6, 99);
        let ours = hermitian_eigen(&a).unwrap().values;
        let mut theirs: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(|x, y| x.total_cmp(y));
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_min_eigenvector_is_deterministic() {
        let z = CMat::zeros(3, 3);
        let v = min_eigenvector(&z).unwrap();
        assert_eq!(v[0], C64::new(1.0, 0.0));
        assert_eq!(v[1], C64::new(0.0, 0.0));
    }

    #[test]
    fn canonical_phase_makes_leading_entry_real() {
        let mut v = CVec::from_vec(vec![C64::new(0.0, 1.0), C64::new(0.0, -2.0)]);
        canonicalize(&mut v);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert_eq!(v[1].im, 0.0);
        assert!(v[1].re > 0.0);
        assert!((v[0] - C64::new(-1.0 / 5f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rank_of_rank_deficient_product() {
        let a = CMat::from_fn(4, 2, |i, j| C64::new((i + j) as f64, 1.0));
        let b = CMat::from_fn(2, 5, |i, j| C64::new(1.0, (i * j) as f64));
        assert_eq!(numerical_rank(&(a * b), RANK_TOL), 2);
        assert_eq!(numerical_rank(&CMat::zeros(3, 3), RANK_TOL), 0);
        assert_eq!(numerical_rank(&CMat::zeros(3, 0), RANK_TOL), 0);
    }
}
