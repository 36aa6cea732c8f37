use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{AmpcError, Result};
use crate::learn::Task;
use crate::privacy::{compute_sensitivity, NeighborSpec};

fn default_record_bound() -> f64 {
    1.0
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_noise_multiplier() -> f64 {
    1.0
}

/// One training experiment, read from TOML. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_clients: usize,
    pub t_colluders: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub trunc_t: f64,
    /// Largest feature-row norm after clipping; Δ defaults to twice this.
    #[serde(default = "default_record_bound")]
    pub record_bound: f64,
    /// Explicit Δ; overrides the derived value.
    #[serde(default)]
    pub delta_sensitivity: Option<f64>,
    pub task: Task,
    pub gamma: f64,
    pub iterations: usize,
    pub batch: usize,
    pub seed: u64,
    /// Relative to the config file's directory.
    pub dataset_path: PathBuf,
    pub label_column: String,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Scales σ_s (and the triple noise) after calibration.
    #[serde(default = "default_noise_multiplier")]
    pub noise_multiplier: f64,
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| AmpcError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads and validates `path`, resolving `dataset_path` against its
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| AmpcError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            AmpcError::Config(m) => AmpcError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if cfg.dataset_path.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            cfg.dataset_path = base.join(&cfg.dataset_path);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AmpcError::Config(m));
        if self.n_clients < 2 {
            return bad(format!("n_clients must be at least 2, got {}", self.n_clients));
        }
        if self.t_colluders == 0 || self.t_colluders > self.n_clients - 1 {
            return bad(format!("t_colluders must be in 1..={}, got {}", self.n_clients - 1, self.t_colluders));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.batch == 0 {
            return bad("batch must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return bad(format!("test_fraction must be in [0, 1), got {}", self.test_fraction));
        }
        if !(self.noise_multiplier > 0.0 && self.noise_multiplier.is_finite()) {
            return bad(format!("noise_multiplier must be positive, got {}", self.noise_multiplier));
        }
        if !(self.record_bound > 0.0 && self.record_bound.is_finite()) {
            return bad(format!("record_bound must be positive, got {}", self.record_bound));
        }
        Ok(())
    }

    /// Δ: the explicit override, else 2·record_bound.
    pub fn sensitivity(&self) -> Result<f64> {
        compute_sensitivity(&NeighborSpec { record_bound: self.record_bound, delta_override: self.delta_sensitivity })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
n_clients = 2
t_colluders = 1
epsilon = 0.01
delta = 1e-5
trunc_t = 100.0
task = "logistic"
gamma = 1.0
iterations = 10
batch = 20
seed = 7
dataset_path = "data.csv"
label_column = "y"
"#;

    #[test]
    fn defaults_apply() {
        let c = ExperimentConfig::from_toml(BASE).unwrap();
        assert_eq!((c.record_bound, c.test_fraction, c.noise_multiplier), (1.0, 0.2, 1.0));
        assert_eq!(c.sensitivity().unwrap(), 2.0);
        assert_eq!(c.task, Task::Logistic);
    }

    #[test]
    fn unknown_keys_and_bad_threshold_fail() {
        let err = ExperimentConfig::from_toml(&format!("{BASE}colour = 1\n")).unwrap_err();
        assert!(matches!(err, AmpcError::Config(m) if m.contains("colour")));
        let err = ExperimentConfig::from_toml(&BASE.replace("t_colluders = 1", "t_colluders = 2")).unwrap_err();
        assert!(matches!(err, AmpcError::Config(m) if m.contains("t_colluders")));
    }

    #[test]
    fn dataset_path_is_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("exp.toml");
        std::fs::write(&p, BASE).unwrap();
        assert_eq!(ExperimentConfig::load(&p).unwrap().dataset_path, dir.path().join("data.csv"));
    }
}
