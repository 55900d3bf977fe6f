//! Profile reconstruction and assembly of the uniform approximant.
//!
//! Once unit directions â₁…â_m are available, sampling f along the dual basis
//! isolates one profile per direction: f(t b̂ⱼ) = ĝⱼ(t) because
//! ⟨b̂ᵢ, âⱼ⟩ = δᵢⱼ and every profile vanishes at zero. The profiles are
//! tabulated on a uniform grid, interpolated by natural cubic splines, and
//! summed into f̂(x) = Σ ĝⱼ(âⱼ·x), which evaluates without further queries.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::QueryOracle;
use crate::rng::{derive_rng, TAG_TEST_POINTS};
use crate::sampling::uniform_ball;

/// Dual basis of a set of m linearly independent unit directions in R^m:
/// the columns of (Âᵀ)^{-1}, satisfying ⟨b̂ᵢ, âⱼ⟩ = δᵢⱼ.
pub fn dual_basis(directions: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = directions.ncols();
    if directions.nrows() != m {
        return Err(Error::InvalidArgument("directions must form a square matrix".into()));
    }
    let svd = directions.clone().svd(false, false);
    let sigma_min = svd.singular_values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if sigma_min <= 1e-8 {
        return Err(Error::SingularDirections { sigma_min });
    }
    directions
        .transpose()
        .try_inverse()
        .ok_or(Error::SingularDirections { sigma_min })
}

/// Natural cubic spline on a uniform grid; reproduces the knots exactly.
#[derive(Debug, Clone, Serialize)]
pub struct CubicSpline {
    t0: f64,
    step: f64,
    values: Vec<f64>,
    /// Second derivatives at the knots (zero at both ends).
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(t0: f64, step: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        assert!(n >= 2);
        // Tridiagonal system for the interior second derivatives.
        let mut second = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![4.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                rhs[i] = 6.0 * (values[i] - 2.0 * values[i + 1] + values[i + 2]) / (step * step);
            }
            // Thomas algorithm; off-diagonals are all ones.
            for i in 1..k {
                let w = 1.0 / diag[i - 1];
                diag[i] -= w;
                rhs[i] -= w * rhs[i - 1];
            }
            second[k] = rhs[k - 1] / diag[k - 1];
            for i in (1..k).rev() {
                second[i] = (rhs[i - 1] - second[i + 1]) / diag[i - 1];
            }
        }
        Self {
            t0,
            step,
            values,
            second,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t0, self.t0 + self.step * (self.values.len() - 1) as f64)
    }

    pub fn eval(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if t < lo - 1e-12 || t > hi + 1e-12 {
            return None;
        }
        let n = self.values.len();
        let idx = (((t - lo) / self.step).floor() as usize).min(n - 2);
        let a = lo + self.step * idx as f64;
        let x = (t - a) / self.step;
        let (y0, y1) = (self.values[idx], self.values[idx + 1]);
        let (m0, m1) = (self.second[idx], self.second[idx + 1]);
        let h2 = self.step * self.step;
        let value = y0 * (1.0 - x)
            + y1 * x
            + h2 / 6.0 * ((1.0 - x) * ((1.0 - x) * (1.0 - x) - 1.0) * m0 + x * (x * x - 1.0) * m1);
        Some(value)
    }
}

/// Tabulated profile of one recovered direction.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileTable {
    pub index: usize,
    pub dual_norm: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    spline: CubicSpline,
}

impl ProfileTable {
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.spline.eval(t).ok_or(Error::ProfileDomain {
            index: self.index,
            value: t,
            lo: self.t_lo,
            hi: self.t_hi,
        })
    }
}

/// Samples f along each dual vector on `n_grid` uniformly spaced abscissae,
/// endpoints pulled in by 1e-9. The single f(0) query normalizes all tables,
/// for m·n_grid + 1 queries in total.
///
/// The tabulated interval always covers (-1/||b̂ⱼ||, 1/||b̂ⱼ||) and extends to
/// (-1, 1) whenever the query domain allows, because the assembled
/// approximant evaluates ĝⱼ at âⱼ·x, which ranges over all of [-1, 1] on the
/// unit ball while sampling f at radius |t|·||b̂ⱼ|| — points on a
/// neighborhood of the ball for non-orthonormal directions.
pub fn tabulate_profiles(
    oracle: &mut QueryOracle,
    duals: &DMatrix<f64>,
    n_grid: usize,
) -> Result<Vec<ProfileTable>> {
    if n_grid < 16 {
        return Err(Error::InvalidArgument("n_grid must be at least 16".into()));
    }
    let m = duals.ncols();
    let zero_level = oracle.query(&DVector::zeros(duals.nrows()));
    let mut tables = Vec::with_capacity(m);
    for j in 0..m {
        let dual = duals.column(j).clone_owned();
        let dual_norm = dual.norm();
        let reach = (crate::oracle::DOMAIN_RADIUS - 1e-6) / dual_norm;
        let t_hi = reach.min(1.0) - 1e-9;
        let t_lo = -t_hi;
        let step = (t_hi - t_lo) / (n_grid - 1) as f64;
        let mut grid = Vec::with_capacity(n_grid);
        let mut values = Vec::with_capacity(n_grid);
        for k in 0..n_grid {
            let t = t_lo + step * k as f64;
            grid.push(t);
            values.push(oracle.query(&(&dual * t)) - zero_level);
        }
        let spline = CubicSpline::natural(t_lo, step, values.clone());
        tables.push(ProfileTable {
            index: j,
            dual_norm,
            t_lo,
            t_hi,
            grid,
            values,
            spline,
        });
    }
    Ok(tables)
}

/// The assembled approximant f̂(x) = Σⱼ ĝⱼ(âⱼ·x); immutable and query-free.
#[derive(Debug, Clone)]
pub struct RidgeApproximant {
    directions: DMatrix<f64>,
    profiles: Vec<ProfileTable>,
}

pub fn assemble(directions: DMatrix<f64>, profiles: Vec<ProfileTable>) -> Result<RidgeApproximant> {
    if directions.ncols() != profiles.len() {
        return Err(Error::InvalidArgument(
            "one profile per direction required".into(),
        ));
    }
    Ok(RidgeApproximant {
        directions,
        profiles,
    })
}

impl RidgeApproximant {
    pub fn directions(&self) -> &DMatrix<f64> {
        &self.directions
    }

    pub fn profiles(&self) -> &[ProfileTable] {
        &self.profiles
    }

    /// Arguments âⱼ·x outside a tabulated domain are a hard error; they
    /// cannot occur for unit directions and test points inside the ball.
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (j, table) in self.profiles.iter().enumerate() {
            let t = self.directions.column(j).dot(x);
            acc += table.eval(t)?;
        }
        Ok(acc)
    }
}

/// Sup-norm estimate and mean-square discrepancy between a reference function
/// and the approximant over `n_test` points uniform in the unit ball.
pub fn uniform_error(
    reference: &dyn Fn(&DVector<f64>) -> f64,
    approximant: &RidgeApproximant,
    n_test: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_test < 1_000 {
        return Err(Error::InvalidArgument("n_test must be at least 1000".into()));
    }
    let dim = approximant.directions.nrows();
    let mut rng = derive_rng(seed, &[TAG_TEST_POINTS]);
    let mut sup = 0.0f64;
    let mut sq_sum = 0.0f64;
    for _ in 0..n_test {
        let x = uniform_ball(dim, &mut rng);
        let diff = reference(&x) - approximant.eval(&x)?;
        sup = sup.max(diff.abs());
        sq_sum += diff * diff;
    }
    Ok((sup, sq_sum / n_test as f64))
}
