//! Random points and matrices used by the active sampling schemes.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Uniform point on the unit sphere S^{d-1} (normalized Gaussian).
pub fn uniform_sphere<R: Rng>(dim: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Uniform point in the closed unit ball B_1^d.
pub fn uniform_ball<R: Rng>(dim: usize, rng: &mut R) -> DVector<f64> {
    let dir = uniform_sphere(dim, rng);
    let u: f64 = rng.random();
    dir * u.powf(1.0 / dim as f64)
}

/// Haar-distributed d x m matrix with orthonormal columns: thin QR of a
/// Gaussian matrix with the R diagonal signs folded into Q.
pub fn haar_semi_orthogonal<R: Rng>(d: usize, m: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(m <= d);
    let g = DMatrix::from_fn(d, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Symmetric matrix with Gaussian entries, (Z + Z^T)/2.
pub fn random_symmetric<R: Rng>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let z = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&z + z.transpose()) * 0.5
}

/// Lebesgue volume of the unit ball in R^d.
pub fn unit_ball_volume(dim: usize) -> f64 {
    // omega_d = pi^{d/2} / Gamma(d/2 + 1), built up by the two-step recursion
    // omega_d = omega_{d-2} * 2 pi / d to avoid a Gamma implementation.
    match dim {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(dim - 2) * 2.0 * std::f64::consts::PI / dim as f64,
    }
}
