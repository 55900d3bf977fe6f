//! Seeded experiment runner behind the CLI: end-to-end identification,
//! phase-transition sweeps, bootstrap-whitening curves, and the
//! gradient-descent comparison. Every trial derives its randomness from the
//! master seed and its own indices, so reports are reproducible regardless of
//! the thread count.

pub mod assign;
pub mod config;
pub mod gd;
pub mod report;

pub use config::{ClusterMethod, ExperimentConfig, ExperimentKind};
pub use report::{Report, TrialRecord};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::generate_network;
use crate::oracle::{gradient_fd, hessian_fd, QueryOracle};
use crate::rank1::{cluster_greedy, cluster_kmeans, run_repetitions};
use crate::reconstruct::{assemble, dual_basis, tabulate_profiles, uniform_error};
use crate::rng::{derive_rng, derive_seed, TAG_NETWORK, TAG_NOISE, TAG_RANK1, TAG_SAMPLING, TAG_TEST_POINTS, TAG_WHITEN};
use crate::sampling::uniform_sphere;
use crate::subspace::{recover_matrix_space, recover_vector_space, reduce_dimension};
use crate::whitening::{bootstrap_whitening, BootstrapConfig};
use assign::hungarian;
use report::{
    Aggregate, ExperimentData, GdComparisonRow, PhaseCell, ProfileDump, QueryBreakdown,
    StageTimings, TotalTimings, WhiteningCurveRow,
};

fn with_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Full identification runs at the first grid point of (eps, m_x).
pub fn run_identify(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let started = Instant::now();
    let eps = config.eps_grid[0];
    let m_x = config.m_x_grid[0];
    let records: Vec<TrialRecord> = with_pool(config.threads, || {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| run_trial(config, eps, m_x, 0, 0, trial, config.reconstruct))
            .collect()
    })?;
    let aggregate = aggregate_records(&records, config.m);
    Ok(Report {
        config: config.clone(),
        git_describe: report::git_describe(),
        data: ExperimentData::Identify {
            per_trial: records,
            aggregate,
        },
        timings_ms: TotalTimings {
            total: started.elapsed().as_secs_f64() * 1e3,
        },
    })
}

/// Success-fraction grid over (eps, m_x).
pub fn run_phase_transition(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let started = Instant::now();
    let mut jobs = Vec::new();
    for (ei, &eps) in config.eps_grid.iter().enumerate() {
        for (xi, &m_x) in config.m_x_grid.iter().enumerate() {
            for trial in 0..config.trials {
                jobs.push((ei, xi, eps, m_x, trial));
            }
        }
    }
    let records: Vec<TrialRecord> = with_pool(config.threads, || {
        jobs.par_iter()
            .map(|&(ei, xi, eps, m_x, trial)| run_trial(config, eps, m_x, ei, xi, trial, false))
            .collect()
    })?;
    let mut cells = Vec::new();
    for &eps in &config.eps_grid {
        for &m_x in &config.m_x_grid {
            let slice: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.eps == eps && r.m_x == m_x)
                .collect();
            let successes = slice.iter().filter(|r| r.n_found == config.m).count();
            let mean_n_found =
                slice.iter().map(|r| r.n_found as f64).sum::<f64>() / slice.len().max(1) as f64;
            cells.push(PhaseCell {
                eps,
                m_x,
                success_fraction: successes as f64 / slice.len().max(1) as f64,
                mean_n_found,
            });
        }
    }
    Ok(Report {
        config: config.clone(),
        git_describe: report::git_describe(),
        data: ExperimentData::PhaseTransition {
            per_trial: records,
            cells,
        },
        timings_ms: TotalTimings {
            total: started.elapsed().as_secs_f64() * 1e3,
        },
    })
}

struct TrialOutcome {
    n_found: usize,
    clusters: usize,
    direction_errors: Vec<Option<f64>>,
    frob_error: Option<f64>,
    sup_error: Option<f64>,
    mse: Option<f64>,
    reconstruction_error: Option<String>,
    profiles: Option<Vec<ProfileDump>>,
    queries: QueryBreakdown,
    timings: StageTimings,
}

fn run_trial(
    config: &ExperimentConfig,
    eps: f64,
    m_x: usize,
    eps_idx: usize,
    m_x_idx: usize,
    trial: usize,
    reconstruct: bool,
) -> TrialRecord {
    let tags = [eps_idx as u64, m_x_idx as u64, trial as u64];
    match identify_once(config, eps, m_x, &tags, reconstruct) {
        Ok(outcome) => TrialRecord {
            trial,
            eps,
            m_x,
            n_found: outcome.n_found,
            direction_errors: outcome.direction_errors,
            frob_error: outcome.frob_error,
            sup_error: outcome.sup_error,
            mse: outcome.mse,
            clusters: outcome.clusters,
            reconstruction_error: outcome.reconstruction_error,
            profiles: outcome.profiles,
            queries: outcome.queries,
            timings_ms: outcome.timings,
            status: "ok".into(),
        },
        Err(err) => TrialRecord {
            trial,
            eps,
            m_x,
            n_found: 0,
            direction_errors: vec![None; config.m],
            frob_error: None,
            sup_error: None,
            mse: None,
            clusters: 0,
            reconstruction_error: None,
            profiles: None,
            queries: QueryBreakdown::default(),
            timings_ms: StageTimings::default(),
            status: err.to_string(),
        },
    }
}

fn identify_once(
    config: &ExperimentConfig,
    eps: f64,
    m_x: usize,
    tags: &[u64; 3],
    reconstruct: bool,
) -> Result<TrialOutcome> {
    let m = config.m;
    let d = config.d;
    let net_seed = derive_seed(config.seed, &[TAG_NETWORK, tags[0], tags[1], tags[2]]);
    let net = generate_network(m, d, eps, net_seed)?;
    let truth = net.weights().clone();

    let noise_seed = derive_seed(config.seed, &[TAG_NOISE, tags[0], tags[1], tags[2]]);
    let mut oracle = QueryOracle::from_network(net.clone(), config.noise_bound, noise_seed);
    let mut timings = StageTimings::default();
    let mut queries = QueryBreakdown::default();

    // Stage 1: derivative sampling (and dimension reduction when d > m).
    let t0 = Instant::now();
    let mut sample_rng = derive_rng(config.seed, &[TAG_SAMPLING, tags[0], tags[1], tags[2]]);
    let mut reduction: Option<DMatrix<f64>> = None;
    if d > m {
        let mut grads = Vec::with_capacity(m_x);
        for _ in 0..m_x {
            let x = uniform_sphere(d, &mut sample_rng);
            grads.push(gradient_fd(&mut oracle, &x, config.h)?);
        }
        let vs = recover_vector_space(&grads, m)?;
        reduction = Some(vs.basis().clone());
        oracle = reduce_dimension(oracle, &vs);
    }
    let mut hessians = Vec::with_capacity(m_x);
    for _ in 0..m_x {
        let x = uniform_sphere(m, &mut sample_rng);
        hessians.push(hessian_fd(&mut oracle, &x, config.h)?);
    }
    timings.sampling = t0.elapsed().as_secs_f64() * 1e3;

    // Stage 2: matrix-space recovery.
    let t1 = Instant::now();
    let mut space = recover_matrix_space(&hessians, m)?;
    timings.pca = t1.elapsed().as_secs_f64() * 1e3;

    // Optional bootstrap whitening; the rank-one search then runs in the
    // whitened coordinates and the results are mapped back through L.
    let mut whiten_map: Option<DMatrix<f64>> = None;
    if config.whiten {
        let t = Instant::now();
        let whiten_seed = derive_seed(config.seed, &[TAG_WHITEN, tags[0], tags[1], tags[2]]);
        let bootstrap_cfg = BootstrapConfig {
            k_max: config.k_max,
            m_x,
            h: config.h,
            ..Default::default()
        };
        let outcome = bootstrap_whitening(oracle, m, &bootstrap_cfg, None, whiten_seed)?;
        oracle = outcome.oracle;
        // Fresh Hessians of the whitened function for the final search space.
        let mut whitened_hessians = Vec::with_capacity(m_x);
        for _ in 0..m_x {
            let x = uniform_sphere(m, &mut sample_rng);
            whitened_hessians.push(hessian_fd(&mut oracle, &x, config.h)?);
        }
        space = recover_matrix_space(&whitened_hessians, m)?;
        whiten_map = Some(outcome.map);
        timings.sampling += t.elapsed().as_secs_f64() * 1e3;
    }
    queries.sampling = oracle.query_count();

    // Stage 3: rank-one search.
    let t2 = Instant::now();
    let rank1_seed = derive_seed(config.seed, &[TAG_RANK1, tags[0], tags[1], tags[2]]);
    let vectors = run_repetitions(&space, config.n_rep, config.gamma, config.steps, rank1_seed)?;
    let clusters = match config.cluster {
        ClusterMethod::Greedy => cluster_greedy(&vectors, config.dedup_delta),
        ClusterMethod::Kmeans => cluster_kmeans(&vectors, m, 100),
    };
    timings.rank1 = t2.elapsed().as_secs_f64() * 1e3;

    // Map recovered directions back to the reduced coordinates, then lift.
    let reduced_dirs: Vec<DVector<f64>> = clusters
        .iter()
        .map(|c| match &whiten_map {
            Some(l) => {
                let alpha = l.transpose().clone().lu().solve(&c.direction).ok_or(
                    Error::SingularDirections { sigma_min: 0.0 },
                )?;
                Ok(&alpha / alpha.norm())
            }
            None => Ok(c.direction.clone()),
        })
        .collect::<Result<_>>()?;
    let lifted_dirs: Vec<DVector<f64>> = reduced_dirs
        .iter()
        .map(|v| match &reduction {
            Some(b) => b * v,
            None => v.clone(),
        })
        .collect();

    let matching = match_directions(&lifted_dirs, &truth, config.dedup_delta);

    // Stage 4: profile reconstruction in the reduced coordinates. A failure
    // here (for example an evaluation outside a tabulated domain on a
    // strongly non-orthonormal trial) is recorded without invalidating the
    // direction results.
    let (mut sup_error, mut mse) = (None, None);
    let mut profiles = None;
    let mut reconstruction_error = None;
    if reconstruct && matching.matched_all {
        let t3 = Instant::now();
        // The whitening stage consumed the reduced oracle, so rebuild one on
        // a fresh noise stream for profile sampling.
        let mut recon_oracle = if whiten_map.is_some() {
            let fresh = QueryOracle::from_network(
                net.clone(),
                config.noise_bound,
                derive_seed(noise_seed, &[1]),
            );
            match &reduction {
                Some(b) => fresh.compose_linear(b.clone()),
                None => fresh,
            }
        } else {
            oracle
        };
        let before = recon_oracle.query_count();
        let dirs = DMatrix::from_fn(m, m, |i, j| reduced_dirs[matching.cluster_for_truth[j]][i]);
        let reference_net = net.clone();
        let reference_map = reduction.clone();
        let reference = move |y: &DVector<f64>| match &reference_map {
            Some(b) => reference_net.eval(&(b * y)),
            None => reference_net.eval(y),
        };
        let test_seed = derive_seed(config.seed, &[TAG_TEST_POINTS, tags[0], tags[1], tags[2]]);
        let attempt = (|| -> Result<(Vec<ProfileDump>, f64, f64)> {
            let duals = dual_basis(&dirs)?;
            let tables = tabulate_profiles(&mut recon_oracle, &duals, config.n_grid)?;
            let dumps = tables
                .iter()
                .map(|t| ProfileDump {
                    index: t.index,
                    grid: t.grid.clone(),
                    values: t.values.clone(),
                })
                .collect();
            let approximant = assemble(dirs.clone(), tables)?;
            let (sup, mean_sq) = uniform_error(&reference, &approximant, config.n_test, test_seed)?;
            Ok((dumps, sup, mean_sq))
        })();
        queries.reconstruction = recon_oracle.query_count().saturating_sub(before);
        match attempt {
            Ok((dumps, sup, mean_sq)) => {
                if config.emit_profiles {
                    profiles = Some(dumps);
                }
                sup_error = Some(sup);
                mse = Some(mean_sq);
            }
            Err(err) => reconstruction_error = Some(err.to_string()),
        }
        timings.reconstruction = t3.elapsed().as_secs_f64() * 1e3;
    }

    queries.total = queries.sampling + queries.rank1 + queries.reconstruction;
    timings.total = timings.sampling + timings.pca + timings.rank1 + timings.reconstruction;
    Ok(TrialOutcome {
        n_found: matching.n_found,
        clusters: clusters.len(),
        direction_errors: matching.errors,
        frob_error: matching.frob_error,
        sup_error,
        mse,
        reconstruction_error,
        profiles,
        queries,
        timings,
    })
}

struct Matching {
    n_found: usize,
    errors: Vec<Option<f64>>,
    frob_error: Option<f64>,
    matched_all: bool,
    /// For each true direction, the index of the assigned cluster.
    cluster_for_truth: Vec<usize>,
}

fn sign_distance(v: &DVector<f64>, a: &DVector<f64>) -> f64 {
    ((v - a).norm()).min((v + a).norm())
}

/// Matches recovered directions to ground truth: `n_found` counts true
/// directions approximated by any cluster (tolerance `delta`); per-direction
/// errors come from a minimum-cost assignment on squared sign-aware
/// distances.
fn match_directions(directions: &[DVector<f64>], truth: &DMatrix<f64>, delta: f64) -> Matching {
    let m = truth.ncols();
    let truth_cols: Vec<DVector<f64>> = (0..m).map(|j| truth.column(j).clone_owned()).collect();

    let n_found = truth_cols
        .iter()
        .filter(|a| directions.iter().any(|v| sign_distance(v, a) <= delta))
        .count();

    // Assignment over the top-m clusters by multiplicity (they arrive sorted).
    let rows = directions.len().min(m);
    let mut errors: Vec<Option<f64>> = vec![None; m];
    let mut cluster_for_truth = vec![usize::MAX; m];
    let mut frob_error = None;
    if rows > 0 {
        let cost: Vec<Vec<f64>> = (0..rows)
            .map(|i| {
                truth_cols
                    .iter()
                    .map(|a| sign_distance(&directions[i], a).powi(2))
                    .collect()
            })
            .collect();
        let (assignment, _) = hungarian(&cost);
        for (i, &j) in assignment.iter().enumerate() {
            errors[j] = Some(sign_distance(&directions[i], &truth_cols[j]));
            cluster_for_truth[j] = i;
        }
        if rows == m {
            let mut acc = 0.0;
            for (i, &j) in assignment.iter().enumerate() {
                let v = &directions[i];
                let a = &truth_cols[j];
                let aligned = if (v - a).norm() <= (v + a).norm() {
                    v.clone()
                } else {
                    -v
                };
                acc += (aligned - a).norm_squared();
            }
            frob_error = Some(acc.sqrt());
        }
    }
    let matched_all = rows == m;
    Matching {
        n_found,
        errors,
        frob_error,
        matched_all,
        cluster_for_truth,
    }
}

fn aggregate_records(records: &[TrialRecord], m: usize) -> Aggregate {
    let trials = records.len();
    let successes = records.iter().filter(|r| r.n_found == m).count();
    let failed = records.iter().filter(|r| r.status != "ok").count();
    let mean_n_found = records.iter().map(|r| r.n_found as f64).sum::<f64>() / trials.max(1) as f64;
    let mean_over = |f: &dyn Fn(&TrialRecord) -> Option<f64>| {
        let values: Vec<f64> = records.iter().filter_map(f).collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    };
    Aggregate {
        trials,
        success_fraction: successes as f64 / trials.max(1) as f64,
        mean_n_found,
        mean_frob_error: mean_over(&|r| r.frob_error),
        mean_sup_error: mean_over(&|r| r.sup_error),
        mean_mse: mean_over(&|r| r.mse),
        total_queries: records.iter().map(|r| r.queries.total).sum(),
        failed_trials: failed,
    }
}

/// Gradient-descent comparison at matched query budgets.
pub fn run_gd_baseline(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let started = Instant::now();
    let eps = config.eps_grid[0];
    let mut jobs = Vec::new();
    for (xi, &m_x) in config.m_x_grid.iter().enumerate() {
        for trial in 0..config.trials {
            jobs.push((xi, m_x, trial));
        }
    }
    let rows: Vec<GdComparisonRow> = with_pool(config.threads, || {
        jobs.par_iter()
            .map(|&(xi, m_x, trial)| gd_comparison_row(config, eps, m_x, xi, trial))
            .collect()
    })?;
    let mean = |f: &dyn Fn(&GdComparisonRow) -> Option<f64>| {
        let v: Vec<f64> = rows.iter().filter_map(f).collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    };
    let pipeline_mean_frob = mean(&|r| r.pipeline_frob_error);
    let gd_mean_frob = mean(&|r| Some(r.gd_frob_error));
    let pipeline_mean_mse = mean(&|r| r.pipeline_mse);
    let gd_mean_mse = mean(&|r| Some(r.gd_mse));
    Ok(Report {
        config: config.clone(),
        git_describe: report::git_describe(),
        data: ExperimentData::GdComparison {
            rows,
            pipeline_mean_frob,
            gd_mean_frob,
            pipeline_mean_mse,
            gd_mean_mse,
        },
        timings_ms: TotalTimings {
            total: started.elapsed().as_secs_f64() * 1e3,
        },
    })
}

fn gd_comparison_row(
    config: &ExperimentConfig,
    eps: f64,
    m_x: usize,
    m_x_idx: usize,
    trial: usize,
) -> GdComparisonRow {
    match gd_comparison_inner(config, eps, m_x, m_x_idx, trial) {
        Ok(row) => row,
        Err(err) => GdComparisonRow {
            trial,
            m_x,
            query_budget: 0,
            nominal_budget: 0,
            pipeline_frob_error: None,
            pipeline_mse: None,
            pipeline_sup: None,
            gd_frob_error: f64::NAN,
            gd_mse: f64::NAN,
            gd_sup: f64::NAN,
            gd_mse_monotone_fraction: 0.0,
            status: err.to_string(),
        },
    }
}

fn gd_comparison_inner(
    config: &ExperimentConfig,
    eps: f64,
    m_x: usize,
    m_x_idx: usize,
    trial: usize,
) -> Result<GdComparisonRow> {
    let m = config.m;
    let d = config.d;
    let tags = [0u64, m_x_idx as u64, trial as u64];
    let net_seed = derive_seed(config.seed, &[TAG_NETWORK, tags[0], tags[1], tags[2]]);
    let net = generate_network(m, d, eps, net_seed)?;

    // Pipeline: Hessian sampling, matrix-space recovery, repeated rank-one
    // search, clustering, matching.
    let noise_seed = derive_seed(config.seed, &[TAG_NOISE, tags[0], tags[1], tags[2]]);
    let mut oracle = QueryOracle::from_network(net.clone(), config.noise_bound, noise_seed);
    let mut sample_rng = derive_rng(config.seed, &[TAG_SAMPLING, tags[0], tags[1], tags[2]]);
    let mut hessians = Vec::with_capacity(m_x);
    for _ in 0..m_x {
        let x = uniform_sphere(m, &mut sample_rng);
        hessians.push(hessian_fd(&mut oracle, &x, config.h)?);
    }
    let budget = oracle.query_count();
    let nominal_budget = (m_x * (1 + (d * d + d) / 2)) as u64;

    let space = recover_matrix_space(&hessians, m)?;
    let rank1_seed = derive_seed(config.seed, &[TAG_RANK1, tags[0], tags[1], tags[2]]);
    let vectors = run_repetitions(&space, config.n_rep, config.gamma, config.steps, rank1_seed)?;
    let clusters = match config.cluster {
        ClusterMethod::Greedy => cluster_greedy(&vectors, config.dedup_delta),
        ClusterMethod::Kmeans => cluster_kmeans(&vectors, m, 100),
    };
    let dirs: Vec<DVector<f64>> = clusters.iter().map(|c| c.direction.clone()).collect();
    let matching = match_directions(&dirs, net.weights(), config.dedup_delta);

    let test_x = gd::ball_design(d, config.n_test, derive_seed(config.seed, &[TAG_TEST_POINTS, tags[2]]), 7);
    let (pipeline_frob_error, pipeline_mse, pipeline_sup) = if matching.matched_all {
        // Substitute the matched, sign-aligned weights into the known network.
        let mut a_hat = DMatrix::zeros(d, m);
        for j in 0..m {
            let v = &dirs[matching.cluster_for_truth[j]];
            let a = net.weights().column(j).clone_owned();
            let aligned = if (v - &a).norm() <= (v + &a).norm() {
                v.clone()
            } else {
                -v
            };
            a_hat.set_column(j, &aligned);
        }
        let (mse, sup) = gd::weights_error_on_test(&net, &a_hat, &test_x);
        (
            Some((&a_hat - net.weights()).norm()),
            Some(mse),
            Some(sup),
        )
    } else {
        (None, None, None)
    };

    // Gradient descent on the same number of fresh queries.
    let train_x = gd::ball_design(d, budget as usize, derive_seed(config.seed, &[TAG_NETWORK, tags[2]]), 3);
    let mut train_oracle = QueryOracle::from_network(
        net.clone(),
        config.noise_bound,
        derive_seed(config.seed, &[TAG_NOISE, 1, tags[2]]),
    );
    let train_y = DVector::from_fn(budget as usize, |k, _| {
        train_oracle.query(&train_x.column(k).clone_owned())
    });
    let gd_seed = derive_seed(config.seed, &[crate::rng::TAG_GD, tags[2]]);
    let outcome = gd::run_gd(&net, &train_x, &train_y, config.gd_steps, config.gd_step_size, gd_seed);
    let (gd_mse, gd_sup) = gd::weights_error_on_test(&net, &outcome.weights, &test_x);

    Ok(GdComparisonRow {
        trial,
        m_x,
        query_budget: budget,
        nominal_budget,
        pipeline_frob_error,
        pipeline_mse,
        pipeline_sup,
        gd_frob_error: outcome.frob_error,
        gd_mse,
        gd_sup,
        gd_mse_monotone_fraction: outcome.monotone_fraction,
        status: "ok".into(),
    })
}

/// Bootstrap-whitening decay curves with synthetically controlled recovery
/// accuracy.
pub fn run_whitening_curve(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let started = Instant::now();
    let eps = config.eps_grid[0];
    let rows: Vec<WhiteningCurveRow> = with_pool(config.threads, || {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let net_seed = derive_seed(config.seed, &[TAG_NETWORK, trial as u64]);
                let net = generate_network(config.m, config.m, eps, net_seed)?;
                let cfg = BootstrapConfig {
                    k_max: config.k_max,
                    ..Default::default()
                };
                let whiten_seed = derive_seed(config.seed, &[TAG_WHITEN, trial as u64]);
                let (history, s_initial) =
                    crate::whitening::bootstrap_whitening_synthetic(net.weights(), config.eta, &cfg, whiten_seed)?;
                Ok(WhiteningCurveRow {
                    seed_index: trial,
                    s_initial,
                    s_history: history.iter().map(|h| h.s_measure.unwrap_or(f64::NAN)).collect(),
                    min_eigs: history.iter().map(|h| h.min_eig).collect(),
                    conditions: history.iter().map(|h| h.condition).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let converged = rows
        .iter()
        .filter(|r| r.s_history.iter().any(|s| *s < 1.0))
        .count();
    Ok(Report {
        config: config.clone(),
        git_describe: report::git_describe(),
        data: ExperimentData::WhiteningCurve {
            rows,
            converged_within_budget: converged,
        },
        timings_ms: TotalTimings {
            total: started.elapsed().as_secs_f64() * 1e3,
        },
    })
}

/// Dispatches on the configured experiment kind.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    match config.experiment {
        ExperimentKind::Identify => run_identify(config),
        ExperimentKind::PhaseTransition => run_phase_transition(config),
        ExperimentKind::WhiteningCurve => run_whitening_curve(config),
        ExperimentKind::CompareGd => run_gd_baseline(config),
    }
}
