//! Application configuration: one TOML file covering track, traffic,
//! encoding, reward, safety filter, training, and run control.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoder::EncoderConfig;
use crate::error::{Error, Result};
use crate::reward::RewardConfig;
use crate::safety::SafetyConfig;
use crate::sim::{SimConfig, TrackConfig};

/// From-scratch Q-learning hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Discount factor per decision.
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Gradient steps between target-network syncs.
    pub target_sync_every: u64,
    /// Exploration schedule: per-decision multiplicative decay with a floor.
    pub eps_start: f64,
    pub eps_decay: f64,
    pub eps_min: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.95,
            learning_rate: 1e-4,
            batch_size: 32,
            buffer_capacity: 10_000,
            target_sync_every: 100,
            eps_start: 1.0,
            eps_decay: 0.99985,
            eps_min: 0.03,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidConfig("gamma must be in (0, 1]".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        if self.batch_size == 0 || self.batch_size > self.buffer_capacity {
            return Err(Error::InvalidConfig(
                "batch_size must be positive and fit in the buffer".into(),
            ));
        }
        if self.target_sync_every == 0 {
            return Err(Error::InvalidConfig(
                "target_sync_every must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.eps_min)
            || !(0.0..=1.0).contains(&self.eps_start)
            || self.eps_min > self.eps_start
        {
            return Err(Error::InvalidConfig(
                "exploration bounds must satisfy 0 <= eps_min <= eps_start <= 1".into(),
            ));
        }
        if !(self.eps_decay > 0.0 && self.eps_decay <= 1.0) {
            return Err(Error::InvalidConfig("eps_decay must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Episode-loop control.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Training episodes per run.
    pub episodes: u32,
    /// Greedy evaluation episodes appended after training.
    pub eval_episodes: u32,
    /// Checkpoint cadence in episodes (a final checkpoint is always
    /// written).
    pub checkpoint_every: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            episodes: 100,
            eval_episodes: 10,
            checkpoint_every: 25,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::InvalidConfig("episodes must be positive".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::InvalidConfig(
                "checkpoint_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Everything a run needs, loadable from one TOML file. Unknown keys are
/// rejected; missing keys take defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub track: TrackConfig,
    pub sim: SimConfig,
    pub encoder: EncoderConfig,
    pub reward: RewardConfig,
    pub safety: SafetyConfig,
    pub train: TrainConfig,
    pub run: RunConfig,
}

impl AppConfig {
    pub fn validate(&self) -> Result<()> {
        self.track.validate()?;
        self.sim.validate(&self.track)?;
        self.encoder.validate()?;
        self.reward.validate()?;
        self.safety.validate()?;
        self.train.validate()?;
        self.run.validate()?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<AppConfig> {
        let cfg: AppConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<AppConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}
