//! Internal dense linear-algebra helpers over `Complex<f64>`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub(crate) type CMat = DMatrix<Complex64>;
pub(crate) type CVec = DVector<Complex64>;

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest singular value.
pub(crate) fn operator_norm(m: &CMat) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian
/// matrix. The input is symmetrized first so near-Hermitian inputs are safe.
pub(crate) fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub(crate) fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Singular values of a general matrix, descending.
pub(crate) fn singular_values(m: &CMat) -> Vec<f64> {
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Orthonormal basis of the (numerical) null space of `m`, as columns.
/// Vectors with singular value at most `cutoff` are kept. Callers pass
/// square or tall matrices, where the thin `V^T` spans the full row space.
pub(crate) fn null_space(m: &CMat, cutoff: f64) -> Vec<CVec> {
    debug_assert!(m.nrows() >= m.ncols());
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("SVD requested V^T");
    let mut kernel = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            kernel.push(v_t.row(i).adjoint().column(0).into_owned());
        }
    }
    kernel
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the phase
/// convention that the R diagonal is positive.
pub(crate) fn haar_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(rand_distr_standard()), rng.sample(rand_distr_standard()))
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase.conj();
        }
    }
    q
}

/// Standard normal sampler without pulling in rand_distr.
pub(crate) fn rand_distr_standard() -> StandardNormal {
    StandardNormal
}

pub(crate) struct StandardNormal;

impl rand::distributions::Distribution<f64> for StandardNormal {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Box-Muller; uniform in (0,1].
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

pub(crate) fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}
