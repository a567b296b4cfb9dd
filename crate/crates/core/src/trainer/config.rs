use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Where the closed-loop correction rollout starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RolloutRestart {
    /// From the first frame of the sequence.
    SequenceStart,
    /// From the first frame of the current period.
    PeriodStart,
}

impl std::str::FromStr for RolloutRestart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequence" | "sequence_start" => Ok(RolloutRestart::SequenceStart),
            "period" | "period_start" => Ok(RolloutRestart::PeriodStart),
            other => Err(Error::Config(format!(
                "unknown rollout start {other:?} (sequence or period)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Correction period in frames. `None` disables corrections.
    pub period: Option<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Classical momentum; 0 gives plain gradient descent.
    pub momentum: f64,
    pub seed: u64,
    pub rollout_restart: RolloutRestart,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            period: Some(5),
            epochs: 3,
            learning_rate: 1e-3,
            momentum: 0.0,
            seed: 0,
            rollout_restart: RolloutRestart::SequenceStart,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.period {
            if a < 2 {
                return Err(Error::Config(format!("training.period must be >= 2, got {a}")));
            }
        }
        if self.epochs == 0 {
            return Err(Error::Config("training.epochs must be >= 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("training.learning_rate must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config("training.momentum must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Same settings with corrections disabled.
    pub fn baseline(&self) -> Self {
        Self {
            period: None,
            ..self.clone()
        }
    }
}
