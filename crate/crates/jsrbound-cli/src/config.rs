//! Experiment configuration, loadable from a JSON file and overridable by
//! command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Settings shared by the sweep and validation harnesses.
///
/// `n_grid` lists the sample sizes to sweep; the validation harness draws
/// its per-trial sample size uniformly from the range this grid spans.
/// `n_range` and `m_range` are inclusive bounds for the randomly drawn
/// state dimension and mode count.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub n_grid: Vec<usize>,
    pub l_list: Vec<usize>,
    pub n_range: [usize; 2],
    pub m_range: [usize; 2],
    pub beta: f64,
    /// Product length fed to the white-box oracle bracket.
    pub depth: usize,
    pub rows_out: Option<PathBuf>,
    pub summary_out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 5,
            n_grid: vec![20, 120, 220],
            l_list: vec![1],
            n_range: [2, 2],
            m_range: [2, 2],
            beta: 0.95,
            depth: 6,
            rows_out: None,
            summary_out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: &str| Err(CliError::Usage(msg.into()));
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.n_grid.is_empty() {
            return fail("the sample-size grid must not be empty");
        }
        if self.n_grid.iter().any(|&n| n == 0) {
            return fail("sample sizes must be positive");
        }
        if self.l_list.is_empty() {
            return fail("the trace-length list must not be empty");
        }
        if self.l_list.iter().any(|&l| l == 0) {
            return fail("trace lengths must be positive");
        }
        if !(0.0..1.0).contains(&self.beta) {
            return fail("beta must lie in [0, 1)");
        }
        if self.n_range[0] < 2 || self.n_range[0] > self.n_range[1] {
            return fail("the dimension range must satisfy 2 <= lo <= hi");
        }
        if self.m_range[0] < 1 || self.m_range[0] > self.m_range[1] {
            return fail("the mode-count range must satisfy 1 <= lo <= hi");
        }
        if self.depth == 0 {
            return fail("oracle depth must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_fields_are_rejected() {
        let mut c = ExperimentConfig::default();
        c.beta = 1.0;
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::default();
        c.n_grid.clear();
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::default();
        c.l_list = vec![0];
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::default();
        c.n_range = [3, 2];
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::default();
        c.n_range = [1, 2];
        assert!(c.validate().is_err(), "analysis needs dimension at least 2");

        let mut c = ExperimentConfig::default();
        c.trials = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ExperimentConfig {
            seed: 7,
            trials: 10,
            n_grid: vec![50, 400],
            l_list: vec![1, 2],
            n_range: [2, 3],
            m_range: [2, 3],
            beta: 0.9,
            depth: 4,
            rows_out: Some(PathBuf::from("rows.csv")),
            summary_out: None,
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.n_grid, cfg.n_grid);
        assert_eq!(back.beta, cfg.beta);
        assert_eq!(back.rows_out, cfg.rows_out);

        let err = serde_json::from_str::<ExperimentConfig>("{\"bogus\":1}");
        assert!(err.is_err(), "unknown fields must be rejected");
    }
}
