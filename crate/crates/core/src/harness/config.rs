//! Experiment configuration: defaults mirroring the desk-scale experiments,
//! a flat `key = value` file format, and JSON as an alternative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Identify,
    PhaseTransition,
    WhiteningCurve,
    CompareGd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMethod {
    Greedy,
    Kmeans,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub m: usize,
    /// Ambient dimension; equal to m unless the reduction path is exercised.
    pub d: usize,
    pub eps_grid: Vec<f64>,
    pub m_x_grid: Vec<usize>,
    pub trials: usize,
    pub n_rep: usize,
    pub gamma: f64,
    pub steps: usize,
    pub h: f64,
    pub dedup_delta: f64,
    pub noise_bound: f64,
    pub n_grid: usize,
    pub n_test: usize,
    pub seed: u64,
    pub threads: usize,
    /// Run the bootstrap whitening stage inside identify trials.
    pub whiten: bool,
    /// Iteration budget for bootstrap whitening / whitening curves.
    pub k_max: usize,
    /// Synthetic recovery accuracy for whitening curves.
    pub eta: f64,
    pub cluster: ClusterMethod,
    /// Tabulate profiles and measure reconstruction errors in identify runs
    /// (phase-transition sweeps never reconstruct).
    pub reconstruct: bool,
    /// Embed the tabulated profile grids and values in the report.
    pub emit_profiles: bool,
    /// Gradient-descent steps for the comparison baseline.
    pub gd_steps: usize,
    pub gd_step_size: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Identify,
            m: 20,
            d: 20,
            eps_grid: vec![1.0],
            m_x_grid: vec![20],
            trials: 60,
            n_rep: 180,
            gamma: 2.0,
            steps: 100,
            h: 1e-3,
            dedup_delta: 0.05,
            noise_bound: 0.0,
            n_grid: 256,
            n_test: 10_000,
            seed: 0,
            threads: 0,
            whiten: false,
            k_max: 6,
            eta: 0.1,
            cluster: ClusterMethod::Greedy,
            reconstruct: true,
            emit_profiles: false,
            gd_steps: 1000,
            gd_step_size: 0.1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > self.d {
            return Err(Error::Config(format!("need 1 <= m <= d, got m={}, d={}", self.m, self.d)));
        }
        if self.eps_grid.is_empty() || self.m_x_grid.is_empty() {
            return Err(Error::Config("eps and m_x grids must be non-empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.gamma <= 2.0f64.sqrt() {
            return Err(Error::Config("gamma must exceed sqrt(2)".into()));
        }
        if self.steps == 0 || self.n_rep == 0 {
            return Err(Error::Config("steps and n_rep must be positive".into()));
        }
        Ok(())
    }

    /// Parses JSON (first non-space byte `{`) or the flat `key = value`
    /// format with `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let cfg: Self =
                serde_json::from_str(text).map_err(|e| Error::Config(format!("json config: {e}")))?;
            cfg.validate()?;
            return Ok(cfg);
        }
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("invalid {what}: '{value}'"));
        match key {
            "experiment" => {
                self.experiment = match value {
                    "identify" => ExperimentKind::Identify,
                    "phase-transition" => ExperimentKind::PhaseTransition,
                    "whitening-curve" => ExperimentKind::WhiteningCurve,
                    "compare-gd" => ExperimentKind::CompareGd,
                    _ => return Err(bad("experiment kind")),
                }
            }
            "m" => self.m = value.parse().map_err(|_| bad("m"))?,
            "d" => self.d = value.parse().map_err(|_| bad("d"))?,
            "eps" | "eps_grid" => {
                self.eps_grid = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("eps grid"))?
            }
            "m_x" | "m_x_grid" => {
                self.m_x_grid = value
                    .split(',')
                    .map(|v| v.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("m_x grid"))?
            }
            "trials" => self.trials = value.parse().map_err(|_| bad("trials"))?,
            "n_rep" => self.n_rep = value.parse().map_err(|_| bad("n_rep"))?,
            "gamma" => self.gamma = value.parse().map_err(|_| bad("gamma"))?,
            "steps" => self.steps = value.parse().map_err(|_| bad("steps"))?,
            "h" => self.h = value.parse().map_err(|_| bad("h"))?,
            "dedup_delta" => self.dedup_delta = value.parse().map_err(|_| bad("dedup_delta"))?,
            "noise_bound" => self.noise_bound = value.parse().map_err(|_| bad("noise_bound"))?,
            "n_grid" => self.n_grid = value.parse().map_err(|_| bad("n_grid"))?,
            "n_test" => self.n_test = value.parse().map_err(|_| bad("n_test"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "threads" => self.threads = value.parse().map_err(|_| bad("threads"))?,
            "whiten" => self.whiten = value.parse().map_err(|_| bad("whiten"))?,
            "k_max" => self.k_max = value.parse().map_err(|_| bad("k_max"))?,
            "eta" => self.eta = value.parse().map_err(|_| bad("eta"))?,
            "reconstruct" => self.reconstruct = value.parse().map_err(|_| bad("reconstruct"))?,
            "emit_profiles" => {
                self.emit_profiles = value.parse().map_err(|_| bad("emit_profiles"))?
            }
            "gd_steps" => self.gd_steps = value.parse().map_err(|_| bad("gd_steps"))?,
            "gd_step_size" => self.gd_step_size = value.parse().map_err(|_| bad("gd_step_size"))?,
            "cluster" => {
                self.cluster = match value {
                    "greedy" => ClusterMethod::Greedy,
                    "kmeans" => ClusterMethod::Kmeans,
                    _ => return Err(bad("cluster method")),
                }
            }
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_experiment_setup() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.m, 20);
        assert_eq!(cfg.trials, 60);
        assert_eq!(cfg.n_rep, 180);
        assert_eq!(cfg.gamma, 2.0);
        assert_eq!(cfg.steps, 100);
        assert_eq!(cfg.h, 1e-3);
        assert_eq!(cfg.dedup_delta, 0.05);
        cfg.validate().unwrap();
    }

    #[test]
    fn flat_format_round_trip() {
        let text = "
            # sweep setup
            experiment = phase-transition
            m = 4
            d = 4
            eps = 0.5, 1.0
            m_x = 4, 8
            trials = 3
            n_rep = 12
            seed = 9
        ";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::PhaseTransition);
        assert_eq!(cfg.eps_grid, vec![0.5, 1.0]);
        assert_eq!(cfg.m_x_grid, vec![4, 8]);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn json_format_is_accepted() {
        let text = r#"{ "experiment": "identify", "m": 3, "d": 3, "trials": 2 }"#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.m, 3);
        assert_eq!(cfg.trials, 2);
    }

    #[test]
    fn bad_keys_and_values_are_rejected() {
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("m = x").is_err());
        assert!(ExperimentConfig::parse("m = 5\nd = 3").is_err());
    }
}
