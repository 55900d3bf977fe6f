//! Rank-one search inside the recovered matrix space.
//!
//! Local maximizers of the spectral norm over the unit Frobenius ball of the
//! space sit close to the weight outer products. The iteration alternates a
//! singular-value amplification step with the projection back onto the space.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{sign_fix, sym_eigen_sorted};
use crate::rng::{derive_rng, TAG_RANK1};
use crate::sampling::random_symmetric;
use crate::subspace::MatrixSubspace;

/// Amplifies the leading singular value by `gamma` and renormalizes to unit
/// Frobenius norm: U diag(γσ₁, σ₂, …) Vᵀ / sqrt(γ²σ₁² + σ₂² + …).
/// Ties at the top are resolved by the SVD backend's ordering.
pub fn pi_gamma(x: &DMatrix<f64>, gamma: f64) -> Result<DMatrix<f64>> {
    if x.norm() < 1e-300 {
        return Err(Error::ZeroMatrix);
    }
    let svd = x.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let mut sigma = svd.singular_values.clone();
    sigma[0] *= gamma;
    let scale = sigma.norm();
    let mut boosted = DMatrix::zeros(x.nrows(), x.ncols());
    for k in 0..sigma.len() {
        let uk = u.column(k);
        let vk = v_t.row(k);
        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                boosted[(i, j)] += sigma[k] / scale * uk[i] * vk[j];
            }
        }
    }
    Ok(boosted)
}

/// State of one rank-one search run.
#[derive(Debug, Clone)]
pub struct MaximizerState {
    /// Final iterate, inside the space with Frobenius norm at most one.
    pub iterate: DMatrix<f64>,
    /// Spectral norm per step, starting with the initial iterate.
    pub spectral_norm_history: Vec<f64>,
    pub converged: bool,
    pub steps_taken: usize,
}

/// Projected amplification iteration X ← P(Π_γ(X)) from a random start
/// (projected normalized symmetric Gaussian). Runs exactly `steps` steps with
/// an optional early exit once the spectral norm is within 1e-10 of one,
/// which only truncates an already-converged trajectory.
pub fn find_local_maximizer(
    space: &MatrixSubspace,
    gamma: f64,
    steps: usize,
    seed: u64,
) -> MaximizerState {
    assert!(gamma > 2.0f64.sqrt(), "contraction requires gamma > sqrt(2)");
    assert!(steps >= 1);
    let mut rng = derive_rng(seed, &[TAG_RANK1]);
    let mut x = random_start(space, &mut rng);

    let mut history = Vec::with_capacity(steps + 1);
    let mut converged = false;
    let mut steps_taken = 0;
    let mut recorded_final = false;
    for _ in 0..steps {
        let svd = x.clone().svd(true, true);
        let spectral = svd.singular_values[0];
        history.push(spectral);
        if (1.0 - spectral).abs() < 1e-10 {
            converged = true;
            recorded_final = true;
            break;
        }
        // Reuse the factorization for the amplification step.
        let u = svd.u.as_ref().expect("svd with u");
        let v_t = svd.v_t.as_ref().expect("svd with v_t");
        let mut sigma = svd.singular_values.clone();
        sigma[0] *= gamma;
        let scale = sigma.norm();
        let mut boosted = DMatrix::zeros(x.nrows(), x.ncols());
        for k in 0..sigma.len() {
            if sigma[k] == 0.0 {
                continue;
            }
            let uk = u.column(k).clone_owned();
            let vk = v_t.row(k).transpose();
            boosted += (&uk * vk.transpose()) * (sigma[k] / scale);
        }
        x = space.project(&boosted);
        steps_taken += 1;
    }
    if !recorded_final {
        history.push(x.clone().svd(false, false).singular_values[0]);
    }
    MaximizerState {
        iterate: x,
        spectral_norm_history: history,
        converged,
        steps_taken,
    }
}

fn random_start<R: Rng>(space: &MatrixSubspace, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = random_symmetric(space.side(), rng);
        let projected = space.project(&g);
        let n = projected.norm();
        if n > 1e-12 {
            return projected / n;
        }
    }
}

/// Direction read off a local maximizer.
#[derive(Debug, Clone)]
pub struct ExtractedDirection {
    /// Unit top eigenvector, sign-fixed.
    pub vector: DVector<f64>,
    /// Gap λ₁ - λ₂ after the optional sign flip.
    pub gap: f64,
    /// Set when the top eigenpair is nearly degenerate (gap < 1e-10).
    pub low_confidence: bool,
}

/// Top eigenvector of a local maximizer. When the spectral norm is attained
/// only by the most negative eigenvalue the matrix is flipped first.
pub fn extract_direction(m: &DMatrix<f64>) -> Result<ExtractedDirection> {
    let norm = m.norm();
    if norm > 1.0 + 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "maximizer has Frobenius norm {norm} > 1"
        )));
    }
    if norm < 1e-300 {
        return Err(Error::ZeroMatrix);
    }
    let (vals, vecs) = sym_eigen_sorted(m);
    let n = m.nrows();
    let flip = vals[n - 1].abs() > vals[0].abs();
    let (vals, vecs) = if flip {
        let flipped = -m;
        sym_eigen_sorted(&flipped)
    } else {
        (vals, vecs)
    };
    let gap = if n > 1 { vals[0] - vals[1] } else { f64::INFINITY };
    let mut vector = vecs.column(0).clone_owned();
    sign_fix(&mut vector);
    Ok(ExtractedDirection {
        vector,
        gap,
        low_confidence: gap < 1e-10,
    })
}

/// A deduplicated direction with the number of runs that landed on it.
#[derive(Debug, Clone)]
pub struct DirectionCluster {
    pub direction: DVector<f64>,
    pub multiplicity: usize,
}

/// Repeated rank-one search with greedy sign-aware deduplication: a new
/// vector joins the first cluster within `dedup_delta` of ±representative and
/// updates the sign-aligned running mean. Representatives come back
/// renormalized, sorted by multiplicity. Fewer than `m` clusters is a valid
/// outcome left to the caller.
pub fn collect_directions(
    space: &MatrixSubspace,
    m: usize,
    n_rep: usize,
    gamma: f64,
    steps: usize,
    dedup_delta: f64,
    seed: u64,
) -> Result<Vec<DirectionCluster>> {
    if n_rep < m {
        return Err(Error::InsufficientSamples { needed: m, got: n_rep });
    }
    let vectors = run_repetitions(space, n_rep, gamma, steps, seed)?;
    Ok(cluster_greedy(&vectors, dedup_delta))
}

/// The raw directions from `n_rep` independent searches, before clustering.
pub fn run_repetitions(
    space: &MatrixSubspace,
    n_rep: usize,
    gamma: f64,
    steps: usize,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    (0..n_rep)
        .map(|rep| {
            let state = find_local_maximizer(space, gamma, steps, derived_rep_seed(seed, rep));
            extract_direction(&state.iterate).map(|e| e.vector)
        })
        .collect()
}

fn derived_rep_seed(seed: u64, rep: usize) -> u64 {
    crate::rng::derive_seed(seed, &[TAG_RANK1, rep as u64])
}

struct RunningCluster {
    sum: DVector<f64>,
    count: usize,
    order: usize,
}

/// Greedy sign-aware clustering of unit vectors.
pub fn cluster_greedy(vectors: &[DVector<f64>], dedup_delta: f64) -> Vec<DirectionCluster> {
    let mut clusters: Vec<RunningCluster> = Vec::new();
    for v in vectors {
        let mut best: Option<(usize, f64, bool)> = None;
        for (idx, c) in clusters.iter().enumerate() {
            let rep = &c.sum / c.sum.norm();
            let d_plus = (v - &rep).norm();
            let d_minus = (v + &rep).norm();
            let (dist, flip) = if d_plus <= d_minus {
                (d_plus, false)
            } else {
                (d_minus, true)
            };
            if dist <= dedup_delta && best.map(|(_, b, _)| dist < b).unwrap_or(true) {
                best = Some((idx, dist, flip));
            }
        }
        match best {
            Some((idx, _, flip)) => {
                let aligned = if flip { -v } else { v.clone() };
                clusters[idx].sum += aligned;
                clusters[idx].count += 1;
            }
            None => clusters.push(RunningCluster {
                sum: v.clone(),
                count: 1,
                order: clusters.len(),
            }),
        }
    }
    clusters.sort_by(|a, b| b.count.cmp(&a.count).then(a.order.cmp(&b.order)));
    clusters
        .into_iter()
        .map(|c| {
            let mut direction = &c.sum / c.sum.norm();
            sign_fix(&mut direction);
            DirectionCluster {
                direction,
                multiplicity: c.count,
            }
        })
        .collect()
}

/// Sign-aligned Lloyd iteration with exactly `k` clusters, used by the
/// gradient-descent comparison experiment.
pub fn cluster_kmeans(vectors: &[DVector<f64>], k: usize, iters: usize) -> Vec<DirectionCluster> {
    assert!(!vectors.is_empty() && k >= 1);
    let dim = vectors[0].len();
    // Farthest-point seeding on the sign-aware metric, deterministic from the
    // input order.
    let mut centers: Vec<DVector<f64>> = vec![vectors[0].clone()];
    while centers.len() < k.min(vectors.len()) {
        let far = vectors
            .iter()
            .max_by(|a, b| {
                let da = centers.iter().map(|c| sign_dist(a, c)).fold(f64::INFINITY, f64::min);
                let db = centers.iter().map(|c| sign_dist(b, c)).fold(f64::INFINITY, f64::min);
                da.total_cmp(&db)
            })
            .expect("nonempty");
        centers.push(far.clone());
    }
    let mut assignment = vec![0usize; vectors.len()];
    for _ in 0..iters {
        for (i, v) in vectors.iter().enumerate() {
            assignment[i] = centers
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| sign_dist(v, a).total_cmp(&sign_dist(v, b)))
                .map(|(j, _)| j)
                .unwrap_or(0);
        }
        let mut changed = false;
        for (j, center) in centers.iter_mut().enumerate() {
            let mut sum = DVector::zeros(dim);
            let mut count = 0usize;
            for (i, v) in vectors.iter().enumerate() {
                if assignment[i] == j {
                    let aligned = if (v - &*center).norm() <= (v + &*center).norm() {
                        v.clone()
                    } else {
                        -v
                    };
                    sum += aligned;
                    count += 1;
                }
            }
            if count > 0 {
                let next = &sum / sum.norm();
                if (&next - &*center).norm() > 1e-12 {
                    changed = true;
                }
                *center = next;
            }
        }
        if !changed {
            break;
        }
    }
    let mut out: Vec<DirectionCluster> = centers
        .into_iter()
        .enumerate()
        .map(|(j, mut direction)| {
            sign_fix(&mut direction);
            DirectionCluster {
                direction,
                multiplicity: assignment.iter().filter(|&&a| a == j).count(),
            }
        })
        .collect();
    out.sort_by_key(|c| std::cmp::Reverse(c.multiplicity));
    out
}

fn sign_dist(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    ((a - b).norm()).min((a + b).norm())
}
