//! `ridgeid` — recover the weights and profiles of a sum of ridge functions
//! from point queries, and reproduce the desk-scale experiments.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ridgeid::harness::{self, report, ExperimentConfig, ExperimentKind};
use ridgeid::model::generate_network;

#[derive(Parser)]
#[command(name = "ridgeid", version, about = "Identification of sums of ridge functions from point queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    /// Experiment configuration (flat key = value or JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores); does not change results.
    #[arg(long)]
    threads: Option<usize>,
    /// Report format.
    #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a ground-truth network and write it as JSON.
    GenNetwork {
        #[arg(long)]
        m: usize,
        /// Ambient dimension (defaults to m).
        #[arg(long)]
        d: Option<usize>,
        /// Target distance to the closest orthonormal system.
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// End-to-end identification trials at fixed (eps, m_x).
    Identify(RunArgs),
    /// Success-fraction sweep over the (eps, m_x) grid.
    PhaseTransition(RunArgs),
    /// Bootstrap-whitening decay curves at controlled recovery accuracy.
    WhiteningCurve(RunArgs),
    /// Gradient-descent baseline at matched query budgets.
    CompareGd(RunArgs),
    /// Summarize a previously written JSON report.
    Report {
        /// Report file produced by one of the experiment subcommands.
        path: PathBuf,
    },
}

fn main() -> ExitCode {
    // clap uses exit code 2 for usage errors; remap to the documented 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

enum AppError {
    Config(String),
    Runtime(String),
}

impl From<ridgeid::Error> for AppError {
    fn from(err: ridgeid::Error) -> Self {
        match err {
            ridgeid::Error::Config(msg) => AppError::Config(msg),
            ridgeid::Error::InvalidArgument(msg) => AppError::Config(msg),
            other => AppError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(err: std::io::Error) -> Self {
        AppError::Runtime(err.to_string())
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::GenNetwork { m, d, eps, seed, out } => {
            let net = generate_network(m, d.unwrap_or(m), eps, seed)?;
            let text = net
                .to_json()
                .map_err(|e| AppError::Runtime(e.to_string()))?;
            std::fs::write(&out, text)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Identify(args) => run_experiment(args, ExperimentKind::Identify),
        Command::PhaseTransition(args) => run_experiment(args, ExperimentKind::PhaseTransition),
        Command::WhiteningCurve(args) => run_experiment(args, ExperimentKind::WhiteningCurve),
        Command::CompareGd(args) => run_experiment(args, ExperimentKind::CompareGd),
        Command::Report { path } => summarize(&path),
    }
}

fn run_experiment(args: RunArgs, kind: ExperimentKind) -> Result<(), AppError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    config.experiment = kind;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    if matches!(kind, ExperimentKind::CompareGd) && args.config.is_none() {
        config.trials = 10;
        config.m_x_grid = vec![40];
        config.n_test = 100_000;
    }
    if matches!(kind, ExperimentKind::WhiteningCurve) && args.config.is_none() {
        config.trials = 10;
        config.eps_grid = vec![1.5];
    }
    config.validate()?;

    let report = harness::run_experiment(&config)?;
    std::fs::create_dir_all(&args.out)?;
    let stem = match kind {
        ExperimentKind::Identify => "identify",
        ExperimentKind::PhaseTransition => "phase_transition",
        ExperimentKind::WhiteningCurve => "whitening_curve",
        ExperimentKind::CompareGd => "compare_gd",
    };
    let json_path = args.out.join(format!("{stem}.json"));
    std::fs::write(&json_path, report.to_json())?;
    println!("wrote {}", json_path.display());

    if let harness::report::ExperimentData::PhaseTransition { cells, .. } = &report.data {
        // Sweeps always emit the CSV grid next to the JSON report.
        let csv = report::phase_transition_csv(cells, &config.eps_grid, &config.m_x_grid);
        let csv_path = args.out.join(format!("{stem}.csv"));
        std::fs::write(&csv_path, csv)?;
        println!("wrote {}", csv_path.display());
    } else if args.format == "csv" {
        if let Some(csv) = tabular_csv(&report) {
            let csv_path = args.out.join(format!("{stem}.csv"));
            std::fs::write(&csv_path, csv)?;
            println!("wrote {}", csv_path.display());
        }
    }
    print_summary(&report);
    Ok(())
}

/// Flat per-trial table for spreadsheet consumers.
fn tabular_csv(report: &harness::Report) -> Option<String> {
    use harness::report::ExperimentData;
    let mut out = String::new();
    match &report.data {
        ExperimentData::Identify { per_trial, .. } => {
            out.push_str("trial,eps,m_x,n_found,clusters,frob_error,sup_error,mse,queries,status\n");
            for r in per_trial {
                let opt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.trial,
                    r.eps,
                    r.m_x,
                    r.n_found,
                    r.clusters,
                    opt(r.frob_error),
                    opt(r.sup_error),
                    opt(r.mse),
                    r.queries.total,
                    r.status
                ));
            }
            Some(out)
        }
        ExperimentData::GdComparison { rows, .. } => {
            out.push_str(
                "trial,m_x,query_budget,pipeline_frob,pipeline_mse,gd_frob,gd_mse,status\n",
            );
            for r in rows {
                let opt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{:.6e},{:.6e},{}\n",
                    r.trial,
                    r.m_x,
                    r.query_budget,
                    opt(r.pipeline_frob_error),
                    opt(r.pipeline_mse),
                    r.gd_frob_error,
                    r.gd_mse,
                    r.status
                ));
            }
            Some(out)
        }
        _ => None,
    }
}

fn summarize(path: &Path) -> Result<(), AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
    let report: harness::Report = serde_json::from_str(&text)
        .map_err(|e| AppError::Config(format!("not a report file: {e}")))?;
    print_summary(&report);
    Ok(())
}

fn print_summary(report: &harness::Report) {
    use harness::report::ExperimentData;
    println!("git: {}", report.git_describe);
    match &report.data {
        ExperimentData::Identify { aggregate, .. } => {
            println!(
                "identify: {} trials, success fraction {:.4}, mean n_found {:.2}",
                aggregate.trials, aggregate.success_fraction, aggregate.mean_n_found
            );
            if let Some(frob) = aggregate.mean_frob_error {
                println!("mean |A_hat - A|_F = {frob:.6}");
            }
            if let Some(sup) = aggregate.mean_sup_error {
                println!("mean sup error = {sup:.6e}");
            }
            println!("total queries: {}", aggregate.total_queries);
        }
        ExperimentData::PhaseTransition { cells, .. } => {
            println!("phase transition ({} cells):", cells.len());
            for cell in cells {
                println!(
                    "  eps = {:>5.2}  m_x = {:>4}  success = {:.4}  mean n_found = {:.2}",
                    cell.eps, cell.m_x, cell.success_fraction, cell.mean_n_found
                );
            }
        }
        ExperimentData::GdComparison {
            pipeline_mean_frob,
            gd_mean_frob,
            pipeline_mean_mse,
            gd_mean_mse,
            rows,
        } => {
            println!("gd comparison over {} rows:", rows.len());
            println!("  pipeline |A_hat - A|_F = {pipeline_mean_frob:.4}, mse = {pipeline_mean_mse:.3e}");
            println!("  gradient descent |A_hat - A|_F = {gd_mean_frob:.4}, mse = {gd_mean_mse:.3e}");
        }
        ExperimentData::WhiteningCurve {
            rows,
            converged_within_budget,
        } => {
            println!(
                "whitening curves: {}/{} seeds reach S < 1 within budget",
                converged_within_budget,
                rows.len()
            );
            for row in rows {
                let path: Vec<String> = row.s_history.iter().map(|s| format!("{s:.3}")).collect();
                println!("  seed {}: S0 = {:.3} -> [{}]", row.seed_index, row.s_initial, path.join(", "));
            }
        }
    }
}
