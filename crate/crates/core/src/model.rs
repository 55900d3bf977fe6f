//! Ground-truth ridge-sum networks.
//!
//! A network is `f(x) = Σᵢ bᵢ g(aᵢ·x + θᵢ) - Σᵢ bᵢ g(θᵢ)` with unit-norm,
//! linearly independent weight columns `aᵢ`. The constant subtraction pins
//! `f(0) = 0` (and each per-unit profile to vanish at the origin), which the
//! reconstruction stage assumes. The generator targets a prescribed distance
//! to the closest orthonormal system so experiments can sweep the degree of
//! non-orthogonality.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::normalize_columns;
use crate::rng::{derive_rng, TAG_NETWORK};
use crate::sampling::haar_semi_orthogonal;

/// Scalar activation with derivatives up to third order.
#[derive(Clone)]
pub struct Activation {
    pub name: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    d1: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    d2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    d3: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Activation").field("name", &self.name).finish()
    }
}

impl Activation {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d3: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            d3: Arc::new(d3),
        }
    }

    /// tanh with closed-form derivatives:
    /// g' = 1 - g^2, g'' = -2g(1 - g^2), g''' = (1 - g^2)(6g^2 - 2).
    pub fn tanh() -> Self {
        Self::new(
            "tanh",
            f64::tanh,
            |t| 1.0 - t.tanh().powi(2),
            |t| {
                let g = t.tanh();
                -2.0 * g * (1.0 - g * g)
            },
            |t| {
                let g2 = t.tanh().powi(2);
                (1.0 - g2) * (6.0 * g2 - 2.0)
            },
        )
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(Self::tanh()),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
    pub fn d1(&self, t: f64) -> f64 {
        (self.d1)(t)
    }
    pub fn d2(&self, t: f64) -> f64 {
        (self.d2)(t)
    }
    pub fn d3(&self, t: f64) -> f64 {
        (self.d3)(t)
    }
}

/// Distance of a set of vectors to the closest orthonormal system, together
/// with a system attaining it.
#[derive(Debug, Clone)]
pub struct NearOrthMeasure {
    /// sqrt(Σᵢ (σᵢ - 1)²) over the singular values of the column matrix.
    pub s_value: f64,
    /// Columns of U Vᵀ from the SVD; orthonormal and attaining `s_value`.
    pub closest_basis: DMatrix<f64>,
}

/// Closed form of the distance to the closest orthonormal system: if
/// `A = U Σ Vᵀ` then the minimizer is `W = U Vᵀ` and the distance is
/// `sqrt(Σ (σᵢ - 1)²)`. Valid for d x m matrices with d >= m.
pub fn near_orthonormality(vectors: &DMatrix<f64>) -> NearOrthMeasure {
    let svd = vectors.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let s_value = svd
        .singular_values
        .iter()
        .map(|s| (s - 1.0).powi(2))
        .sum::<f64>()
        .sqrt();
    NearOrthMeasure {
        s_value,
        closest_basis: u * v_t,
    }
}

/// Ground-truth model: sum of `m` ridge profiles in R^d.
#[derive(Clone, Debug)]
pub struct RidgeNetwork {
    dim_d: usize,
    num_units_m: usize,
    weights: DMatrix<f64>,
    scales: DVector<f64>,
    offsets: DVector<f64>,
    activation: Activation,
    /// Σᵢ bᵢ g(θᵢ), subtracted once so that f(0) = 0.
    zero_level: f64,
    seed: u64,
}

impl RidgeNetwork {
    pub fn new(
        weights: DMatrix<f64>,
        scales: DVector<f64>,
        offsets: DVector<f64>,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        let (d, m) = (weights.nrows(), weights.ncols());
        if m == 0 || m > d {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= m <= d, got m = {m}, d = {d}"
            )));
        }
        if scales.len() != m || offsets.len() != m {
            return Err(Error::InvalidArgument(
                "scales/offsets length must equal the number of units".into(),
            ));
        }
        for j in 0..m {
            let n = weights.column(j).norm();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "column {j} has norm {n}, expected unit norm"
                )));
            }
        }
        let sigma_min = weights
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if sigma_min <= 1e-10 {
            return Err(Error::SingularDirections { sigma_min });
        }
        let zero_level = (0..m).map(|i| scales[i] * activation.eval(offsets[i])).sum();
        Ok(Self {
            dim_d: d,
            num_units_m: m,
            weights,
            scales,
            offsets,
            activation,
            zero_level,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim_d
    }
    pub fn num_units(&self) -> usize {
        self.num_units_m
    }
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }
    pub fn scales(&self) -> &DVector<f64> {
        &self.scales
    }
    pub fn offsets(&self) -> &DVector<f64> {
        &self.offsets
    }
    pub fn activation(&self) -> &Activation {
        &self.activation
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Profile of one unit, normalized to vanish at zero:
    /// gᵢ(t) = bᵢ (g(t + θᵢ) - g(θᵢ)).
    pub fn profile(&self, i: usize, t: f64) -> f64 {
        self.scales[i] * (self.activation.eval(t + self.offsets[i]) - self.activation.eval(self.offsets[i]))
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        let z = self.weights.transpose() * x;
        let mut acc = -self.zero_level;
        for i in 0..self.num_units_m {
            acc += self.scales[i] * self.activation.eval(z[i] + self.offsets[i]);
        }
        acc
    }

    /// ∇f(x) = Σᵢ bᵢ g'(aᵢ·x + θᵢ) aᵢ — lies in span{aᵢ} for every x.
    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        let z = self.weights.transpose() * x;
        let coeff = DVector::from_fn(self.num_units_m, |i, _| {
            self.scales[i] * self.activation.d1(z[i] + self.offsets[i])
        });
        &self.weights * coeff
    }

    /// ∇²f(x) = Σᵢ bᵢ g''(aᵢ·x + θᵢ) aᵢaᵢᵀ, exactly symmetric.
    pub fn hess(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let z = self.weights.transpose() * x;
        let mut h = DMatrix::zeros(self.dim_d, self.dim_d);
        for i in 0..self.num_units_m {
            let c = self.scales[i] * self.activation.d2(z[i] + self.offsets[i]);
            let a = self.weights.column(i);
            // h += c * a a^T, filling both triangles so symmetry is exact.
            for r in 0..self.dim_d {
                for s in r..self.dim_d {
                    let v = c * a[r] * a[s];
                    h[(r, s)] += v;
                    if s != r {
                        h[(s, r)] += v;
                    }
                }
            }
        }
        h
    }

    /// Per-order bounds C₀..C₃ = maxᵢ max_{t in [-1,1]} |gᵢ^{(j)}(t)|, taken as
    /// maxima over a 10 001-point grid.
    pub fn derivative_bounds(&self) -> [f64; 4] {
        const GRID: usize = 10_001;
        let mut bounds = [0.0f64; 4];
        for i in 0..self.num_units_m {
            let (b, theta) = (self.scales[i], self.offsets[i]);
            let g0 = self.activation.eval(theta);
            for k in 0..GRID {
                let t = -1.0 + 2.0 * k as f64 / (GRID - 1) as f64;
                let u = t + theta;
                bounds[0] = bounds[0].max((b * (self.activation.eval(u) - g0)).abs());
                bounds[1] = bounds[1].max((b * self.activation.d1(u)).abs());
                bounds[2] = bounds[2].max((b * self.activation.d2(u)).abs());
                bounds[3] = bounds[3].max((b * self.activation.d3(u)).abs());
            }
        }
        bounds
    }

    pub fn near_orthonormality(&self) -> NearOrthMeasure {
        near_orthonormality(&self.weights)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&NetworkJson::from(self))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: NetworkJson =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("network json: {e}")))?;
        raw.try_into()
    }
}

/// Wire format: column-major weights, 64-bit floats round-tripping bit-exactly
/// through the decimal encoding.
#[derive(Serialize, Deserialize)]
struct NetworkJson {
    m: usize,
    d: usize,
    #[serde(rename = "A")]
    a: Vec<f64>,
    b: Vec<f64>,
    theta: Vec<f64>,
    activation: String,
    seed: u64,
}

impl From<&RidgeNetwork> for NetworkJson {
    fn from(net: &RidgeNetwork) -> Self {
        Self {
            m: net.num_units_m,
            d: net.dim_d,
            a: net.weights.as_slice().to_vec(),
            b: net.scales.as_slice().to_vec(),
            theta: net.offsets.as_slice().to_vec(),
            activation: net.activation.name.clone(),
            seed: net.seed,
        }
    }
}

impl TryFrom<NetworkJson> for RidgeNetwork {
    type Error = Error;

    fn try_from(raw: NetworkJson) -> Result<Self> {
        if raw.a.len() != raw.d * raw.m {
            return Err(Error::Config(format!(
                "weight array has {} entries, expected {}",
                raw.a.len(),
                raw.d * raw.m
            )));
        }
        RidgeNetwork::new(
            DMatrix::from_column_slice(raw.d, raw.m, &raw.a),
            DVector::from_vec(raw.b),
            DVector::from_vec(raw.theta),
            Activation::by_name(&raw.activation)?,
            raw.seed,
        )
    }
}

/// Random network whose weight columns sit at a prescribed distance
/// `eps_target` from the closest orthonormal system (tolerance ±0.001).
///
/// Starting from a Haar pair (U, V), the singular values 1 are perturbed as
/// 1 + s·zᵢ for a fixed Gaussian draw z, columns are renormalized, the
/// distance is measured, and the scale s is bisected until the target is met.
/// Each outer step therefore follows perturb -> renormalize -> measure.
pub fn generate_network(m: usize, d: usize, eps_target: f64, seed: u64) -> Result<RidgeNetwork> {
    if m == 0 || m > d {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= m <= d, got m = {m}, d = {d}"
        )));
    }
    if eps_target < 0.0 || eps_target >= (m as f64).sqrt() {
        return Err(Error::InvalidArgument(format!(
            "eps_target must lie in [0, sqrt(m)), got {eps_target}"
        )));
    }
    const TOL: f64 = 1e-3;
    const MAX_BISECT: usize = 200;

    let mut rng = derive_rng(seed, &[TAG_NETWORK]);
    let scale_dist = Normal::new(1.0, (0.2f64).sqrt()).expect("valid normal");
    let offset_dist = Normal::new(0.0, (0.2f64).sqrt()).expect("valid normal");

    let mut weights: Option<DMatrix<f64>> = None;
    'attempts: for _ in 0..10 {
        let u = haar_semi_orthogonal(d, m, &mut rng);
        let v = haar_semi_orthogonal(m, m, &mut rng);
        let z = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));

        let build = |s: f64| -> DMatrix<f64> {
            let sigma = DVector::from_fn(m, |i, _| 1.0 + s * z[i]);
            normalize_columns(&(&u * DMatrix::from_diagonal(&sigma) * v.transpose()))
        };
        let measure = |s: f64| near_orthonormality(&build(s)).s_value;

        if eps_target <= TOL {
            weights = Some(build(0.0));
            break 'attempts;
        }

        // Grow the bracket until the target is enclosed; a draw whose
        // renormalized limit stays below the target is discarded.
        let mut hi = 0.1;
        let mut grow = 0;
        while measure(hi) < eps_target {
            hi *= 2.0;
            grow += 1;
            if grow > 40 {
                continue 'attempts;
            }
        }
        let mut lo = 0.0;
        for _ in 0..MAX_BISECT {
            let mid = 0.5 * (lo + hi);
            let s_mid = measure(mid);
            if (s_mid - eps_target).abs() <= TOL {
                let candidate = build(mid);
                let sigma_min = candidate
                    .clone()
                    .svd(false, false)
                    .singular_values
                    .iter()
                    .fold(f64::INFINITY, |a, &b| a.min(b));
                if sigma_min > 1e-10 {
                    weights = Some(candidate);
                    break 'attempts;
                }
                continue 'attempts;
            }
            if s_mid < eps_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Err(Error::BisectionFailed {
            tol: TOL,
            iters: MAX_BISECT,
        });
    }
    let weights = weights.ok_or(Error::BisectionFailed {
        tol: TOL,
        iters: MAX_BISECT,
    })?;

    let scales = DVector::from_fn(m, |_, _| scale_dist.sample(&mut rng));
    let offsets = DVector::from_fn(m, |_, _| offset_dist.sample(&mut rng));
    RidgeNetwork::new(weights, scales, offsets, Activation::tanh(), seed)
}
