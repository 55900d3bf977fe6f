//! Machine-readable experiment reports.
//!
//! All timing data lives in fields literally named `timings_ms` so that a
//! determinism comparison can strip them and demand byte-identical output.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QueryBreakdown {
    pub sampling: u64,
    pub rank1: u64,
    pub reconstruction: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub sampling: f64,
    pub pca: f64,
    pub rank1: f64,
    pub reconstruction: f64,
    pub total: f64,
}

/// Tabulated profile of one direction, embedded on request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileDump {
    pub index: usize,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub eps: f64,
    pub m_x: usize,
    pub n_found: usize,
    /// Hungarian-matched error min(||v - a||, ||v + a||) per true direction;
    /// null where no cluster was assigned.
    pub direction_errors: Vec<Option<f64>>,
    /// ||A_hat - A||_F over sign-aligned matched columns, when all matched.
    pub frob_error: Option<f64>,
    pub sup_error: Option<f64>,
    pub mse: Option<f64>,
    pub clusters: usize,
    /// Set when profile tabulation or evaluation failed; the trial's
    /// direction results remain valid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<Vec<ProfileDump>>,
    pub queries: QueryBreakdown,
    pub timings_ms: StageTimings,
    /// "ok" or the error message of the failed stage.
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub success_fraction: f64,
    pub mean_n_found: f64,
    pub mean_frob_error: Option<f64>,
    pub mean_sup_error: Option<f64>,
    pub mean_mse: Option<f64>,
    pub total_queries: u64,
    pub failed_trials: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseCell {
    pub eps: f64,
    pub m_x: usize,
    pub success_fraction: f64,
    pub mean_n_found: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GdComparisonRow {
    pub trial: usize,
    pub m_x: usize,
    pub query_budget: u64,
    /// Budget from the (d² + d)/2 + 1 per-Hessian formula, reported alongside
    /// the actual count.
    pub nominal_budget: u64,
    pub pipeline_frob_error: Option<f64>,
    pub pipeline_mse: Option<f64>,
    pub pipeline_sup: Option<f64>,
    pub gd_frob_error: f64,
    pub gd_mse: f64,
    pub gd_sup: f64,
    pub gd_mse_monotone_fraction: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhiteningCurveRow {
    pub seed_index: usize,
    pub s_initial: f64,
    pub s_history: Vec<f64>,
    pub min_eigs: Vec<f64>,
    pub conditions: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExperimentData {
    Identify {
        per_trial: Vec<TrialRecord>,
        aggregate: Aggregate,
    },
    PhaseTransition {
        per_trial: Vec<TrialRecord>,
        cells: Vec<PhaseCell>,
    },
    GdComparison {
        rows: Vec<GdComparisonRow>,
        pipeline_mean_frob: f64,
        gd_mean_frob: f64,
        pipeline_mean_mse: f64,
        gd_mean_mse: f64,
    },
    WhiteningCurve {
        rows: Vec<WhiteningCurveRow>,
        converged_within_budget: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub git_describe: String,
    #[serde(flatten)]
    pub data: ExperimentData,
    pub timings_ms: TotalTimings,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TotalTimings {
    pub total: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// JSON with every `timings_ms` field and the thread count removed, for
    /// byte-level reproducibility comparisons across executions.
    pub fn canonical_json(&self) -> String {
        let mut value: Value = serde_json::to_value(self).expect("report serialization");
        strip_timings(&mut value);
        if let Some(config) = value.get_mut("config").and_then(Value::as_object_mut) {
            config.remove("threads");
        }
        serde_json::to_string_pretty(&value).expect("report serialization")
    }
}

fn strip_timings(value: &mut Value) {
    match value {
        Value::Object(map) => {
            map.remove("timings_ms");
            for v in map.values_mut() {
                strip_timings(v);
            }
        }
        Value::Array(items) => {
            for v in items.iter_mut() {
                strip_timings(v);
            }
        }
        _ => {}
    }
}

/// Phase-transition CSV: header `eps\m_X,<values>`, one row per eps, success
/// fractions with four digits.
pub fn phase_transition_csv(cells: &[PhaseCell], eps_grid: &[f64], m_x_grid: &[usize]) -> String {
    let mut out = String::from("eps\\m_X");
    for m_x in m_x_grid {
        out.push_str(&format!(",{m_x}"));
    }
    out.push('\n');
    for &eps in eps_grid {
        out.push_str(&format!("{eps}"));
        for &m_x in m_x_grid {
            let cell = cells
                .iter()
                .find(|c| c.eps == eps && c.m_x == m_x)
                .map(|c| c.success_fraction)
                .unwrap_or(f64::NAN);
            out.push_str(&format!(",{cell:.4}"));
        }
        out.push('\n');
    }
    out
}

pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".to_string())
}
