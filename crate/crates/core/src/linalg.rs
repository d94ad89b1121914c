//! Small complex linear-algebra helpers shared by the solvers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(m: &CMatrix) -> Option<Cholesky<C64, Dyn>> {
    Cholesky::new(m.clone())
}

/// `x^H y`.
#[inline]
pub fn inner(x: &CVector, y: &CVector) -> C64 {
    x.dotc(y)
}

/// Rank-one Hermitian update `m += scale * v v^H`.
pub fn add_outer(m: &mut CMatrix, v: &CVector, scale: f64) {
    let n = v.len();
    for c in 0..n {
        let vc = v[c].conj() * scale;
        for r in 0..n {
            m[(r, c)] += v[r] * vc;
        }
    }
}

/// Entry of a circularly-symmetric complex Gaussian with total variance `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVector {
    CVector::from_fn(len, |_, _| complex_gaussian(rng, variance))
}

/// Unit-modulus vector with i.i.d. uniform phases on `(-pi, pi]`.
pub fn random_phases<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVector {
    CVector::from_fn(len, |_, _| {
        let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        C64::from_polar(1.0, theta)
    })
}

/// Per-element phase extraction `exp(j angle(x))`; zero entries map to phase 0.
pub fn phase_only(x: &CVector) -> CVector {
    x.map(|v| {
        if v.norm() == 0.0 {
            ONE
        } else {
            C64::from_polar(1.0, v.arg())
        }
    })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue_hermitian(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Max-abs deviation of `m` from its adjoint.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Real-valued dense vector helper for small systems.
pub fn real_vector(values: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(values)
}
