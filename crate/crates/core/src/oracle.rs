//! Black-box access to the target function.
//!
//! Everything the identification pipeline learns about `f` flows through
//! [`QueryOracle::query`]: it adds bounded centered noise, enforces the query
//! domain, and counts every evaluation. The estimators here are the only
//! derivative access the pipeline is allowed — forward differences for
//! gradients, second differences for Hessians, and the passive weak-derivative
//! forms integrating against a test-function family with known density.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::RidgeNetwork;
use crate::rng::{derive_rng, TAG_NOISE};
use crate::sampling::{uniform_ball, unit_ball_volume};

/// The target is defined on a neighborhood of the unit ball: finite
/// differences step slightly past sphere points, and profile sampling walks
/// along dual vectors of norm up to 1/(1 - eps). The finite-difference
/// estimators enforce their own tighter base-point bounds.
pub const DOMAIN_RADIUS: f64 = 2.0;

type Target = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// Stateful query channel: counts evaluations and injects per-query noise
/// uniform on [-noise_bound, noise_bound].
pub struct QueryOracle {
    target: Target,
    dim: usize,
    noise_bound: f64,
    rng: ChaCha8Rng,
    count: u64,
}

impl QueryOracle {
    pub fn new(
        dim: usize,
        noise_bound: f64,
        seed: u64,
        target: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            target: Arc::new(target),
            dim,
            noise_bound,
            rng: derive_rng(seed, &[TAG_NOISE]),
            count: 0,
        }
    }

    pub fn from_network(net: RidgeNetwork, noise_bound: f64, seed: u64) -> Self {
        let dim = net.dim();
        Self::new(dim, noise_bound, seed, move |x| net.eval(x))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_bound(&self) -> f64 {
        self.noise_bound
    }

    pub fn query_count(&self) -> u64 {
        self.count
    }

    /// One evaluation of f plus noise. Exactly one counter increment.
    pub fn query(&mut self, x: &DVector<f64>) -> f64 {
        let norm = x.norm();
        assert!(
            norm <= DOMAIN_RADIUS + 1e-9,
            "query at norm {norm} exceeds oracle domain {DOMAIN_RADIUS}"
        );
        self.count += 1;
        let mut value = (self.target)(x);
        if self.noise_bound > 0.0 {
            let u: f64 = self.rng.random();
            value += self.noise_bound * (2.0 * u - 1.0);
        }
        value
    }

    /// New oracle evaluating `y -> f(map · y)`; queries pass through to the
    /// same target and keep accumulating on the same counter.
    pub fn compose_linear(self, map: DMatrix<f64>) -> QueryOracle {
        assert_eq!(map.nrows(), self.dim, "map must produce points in the current domain");
        let inner = self.target;
        let new_dim = map.ncols();
        QueryOracle {
            target: Arc::new(move |y: &DVector<f64>| inner(&(&map * y))),
            dim: new_dim,
            noise_bound: self.noise_bound,
            rng: self.rng,
            count: self.count,
        }
    }
}

/// Forward-difference gradient: entry j is (f(x + h e_j) - f(x))/h.
/// Costs exactly d + 1 queries (the base point is shared).
pub fn gradient_fd(oracle: &mut QueryOracle, x: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    let d = oracle.dim();
    check_fd_domain(x, 1.0 * h)?;
    let base = oracle.query(x);
    let mut g = DVector::zeros(d);
    let mut xp = x.clone();
    for j in 0..d {
        xp[j] += h;
        g[j] = (oracle.query(&xp) - base) / h;
        xp[j] = x[j];
    }
    Ok(g)
}

/// Second-difference Hessian estimate:
/// (j,k) entry [f(x + h(e_j + e_k)) - f(x + h e_j) - f(x + h e_k) + f(x)] / h².
///
/// The 1 + d + d(d+1)/2 distinct points are each queried once and reused
/// across entries, for (d+1)(d+2)/2 queries total; the output is symmetric by
/// construction.
pub fn hessian_fd(oracle: &mut QueryOracle, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>> {
    let d = oracle.dim();
    check_fd_domain(x, 2.0 * h)?;
    let base = oracle.query(x);
    let mut singles = Vec::with_capacity(d);
    let mut xp = x.clone();
    for j in 0..d {
        xp[j] += h;
        singles.push(oracle.query(&xp));
        xp[j] = x[j];
    }
    let mut hess = DMatrix::zeros(d, d);
    for j in 0..d {
        for k in j..d {
            let mut xjk = x.clone();
            xjk[j] += h;
            xjk[k] += h;
            let pair = oracle.query(&xjk);
            let value = (pair - singles[j] - singles[k] + base) / (h * h);
            hess[(j, k)] = value;
            hess[(k, j)] = value;
        }
    }
    Ok(hess)
}

fn check_fd_domain(x: &DVector<f64>, step: f64) -> Result<()> {
    let norm = x.norm();
    if norm > 1.0 + 1e-12 {
        return Err(Error::DomainViolation { norm, limit: 1.0 });
    }
    if norm + step > DOMAIN_RADIUS {
        return Err(Error::DomainViolation {
            norm: norm + step,
            limit: DOMAIN_RADIUS,
        });
    }
    Ok(())
}

/// Compactly supported bump family for passive sampling: density uniform on
/// the unit ball, test functions
/// `phi_c(x) = exp(-1 / (1 - ||x - c||² / r²))` supported on the ball of
/// radius `r` around a center `c` drawn uniformly from the ball of radius
/// `1 - r`.
#[derive(Debug, Clone)]
pub struct TestFunctionFamily {
    dim: usize,
    radius: f64,
    ball_volume: f64,
    /// sup_x ||∇phi(x)/p(x)||, from a radial grid.
    pub c_v: f64,
    /// sup_x ||∇²phi(x)/p(x)|| (spectral norm), from a radial grid.
    pub c_v2: f64,
}

impl TestFunctionFamily {
    pub fn new(dim: usize, radius: f64) -> Self {
        assert!(radius > 0.0 && radius < 1.0);
        let ball_volume = unit_ball_volume(dim);
        // ||∇phi|| and the eigenvalues of ∇²phi depend only on rho = ||x - c||;
        // scan a fine radial grid for the suprema.
        let mut max_grad = 0.0f64;
        let mut max_hess = 0.0f64;
        const GRID: usize = 20_000;
        for k in 0..GRID {
            let rho = radius * k as f64 / GRID as f64;
            let (phi, q, radial_coeff) = Self::radial_parts(rho, radius);
            if phi == 0.0 {
                continue;
            }
            max_grad = max_grad.max(phi * q * rho);
            // Eigenvalues of the Hessian: radial (along x - c) and tangential.
            let radial = (radial_coeff * rho * rho - phi * q).abs();
            let tangential = (phi * q).abs();
            max_hess = max_hess.max(radial.max(tangential));
        }
        Self {
            dim,
            radius,
            ball_volume,
            c_v: ball_volume * max_grad,
            c_v2: ball_volume * max_hess,
        }
    }

    /// Default family used by the experiments.
    pub fn default_for_dim(dim: usize) -> Self {
        Self::new(dim, 0.3)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Sampling density of the query points (uniform on the unit ball).
    pub fn density(&self, x: &DVector<f64>) -> f64 {
        if x.norm() <= 1.0 + 1e-12 {
            1.0 / self.ball_volume
        } else {
            0.0
        }
    }

    /// Draws a query point from the density.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        uniform_ball(self.dim, rng)
    }

    /// Draws a test-function index (a center) from pi.
    pub fn sample_index<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        uniform_ball(self.dim, rng) * (1.0 - self.radius)
    }

    // phi, q = 2/(r² s²) and the coefficient of w wᵀ in the Hessian, at
    // rho = ||x - c||, where s = 1 - rho²/r².
    fn radial_parts(rho: f64, radius: f64) -> (f64, f64, f64) {
        let u = (rho / radius).powi(2);
        if u >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let s = 1.0 - u;
        let phi = (-1.0 / s).exp();
        let q = 2.0 / (radius * radius * s * s);
        let r4 = radius.powi(4);
        let coeff = 4.0 * phi * (2.0 * s - 1.0) / (r4 * s.powi(4));
        (phi, q, coeff)
    }

    pub fn phi(&self, center: &DVector<f64>, x: &DVector<f64>) -> f64 {
        let rho = (x - center).norm();
        Self::radial_parts(rho, self.radius).0
    }

    /// ∇phi(x) = -phi · 2 (x - c) / (r² s²).
    pub fn phi_grad(&self, center: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        let w = x - center;
        let (phi, q, _) = Self::radial_parts(w.norm(), self.radius);
        if phi == 0.0 {
            return DVector::zeros(self.dim);
        }
        -w * (phi * q)
    }

    /// ∇²phi(x) = -coeff · w wᵀ - phi q I on the support, w = x - c.
    pub fn phi_hess(&self, center: &DVector<f64>, x: &DVector<f64>) -> DMatrix<f64> {
        let w = x - center;
        let (phi, q, coeff) = Self::radial_parts(w.norm(), self.radius);
        if phi == 0.0 {
            return DMatrix::zeros(self.dim, self.dim);
        }
        let mut h = &w * w.transpose() * (-coeff);
        for i in 0..self.dim {
            h[(i, i)] -= phi * q;
        }
        h
    }
}

/// Passive first-order estimate: -(1/N) Σ f(x_k) ∇phi(x_k)/p(x_k).
/// Converges to ∫ ∇f(x) phi(x) dx by integration by parts. N queries.
pub fn weak_gradient(
    oracle: &mut QueryOracle,
    family: &TestFunctionFamily,
    center: &DVector<f64>,
    points: &[DVector<f64>],
) -> Result<DVector<f64>> {
    if points.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut acc = DVector::zeros(oracle.dim());
    for x in points {
        let p = family.density(x);
        if p < 1e-12 {
            return Err(Error::DensityMismatch { density: p });
        }
        let value = oracle.query(x);
        acc += family.phi_grad(center, x) * (value / p);
    }
    Ok(-acc / points.len() as f64)
}

/// Passive second-order estimate: (1/N) Σ f(x_k) ∇²phi(x_k)/p(x_k),
/// converging to ∫ ∇²f(x) phi(x) dx. Output symmetrized.
pub fn weak_hessian(
    oracle: &mut QueryOracle,
    family: &TestFunctionFamily,
    center: &DVector<f64>,
    points: &[DVector<f64>],
) -> Result<DMatrix<f64>> {
    if points.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let d = oracle.dim();
    let mut acc = DMatrix::zeros(d, d);
    for x in points {
        let p = family.density(x);
        if p < 1e-12 {
            return Err(Error::DensityMismatch { density: p });
        }
        let value = oracle.query(x);
        acc += family.phi_hess(center, x) * (value / p);
    }
    acc /= points.len() as f64;
    Ok(crate::linalg::symmetrize(&acc))
}
