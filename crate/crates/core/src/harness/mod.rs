//! Configuration, episode runner, training and evaluation drivers, and
//! result files.

mod episode;
mod eval;
mod lemma2;
mod output;
mod train;

pub use episode::{observation_cov, run_episode, Episode, EpisodeResult, Outcome, Policy, StepInfo, TrajectoryRow};
pub use eval::{aggregate, comparison_rows, evaluate, run_batch, AggregateMetrics, ComparisonRow};
pub use lemma2::{validate_lemma2, Lemma2Instance};
pub use output::{episodes_jsonl, metrics_csv, trajectory_csv, write_text, TRAJECTORY_HEADER};
pub use train::{train_gosc, EpisodeLog, TrainingReport};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::RadioConfig;
use crate::error::{Error, Result};
use crate::planner::PlannerParams;
use crate::scheduler::{BaselineConfig, PolicyKind, RewardConfig, TrainConfig};
use crate::world::TaskConfig;

/// Seeds, policy and output location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// First evaluation seed; evaluation uses `seed..seed + seeds`.
    pub seed: u64,
    pub seeds: usize,
    /// Training episode k uses seed `train_seed_offset + k`.
    pub train_seed_offset: u64,
    pub policy: PolicyKind,
    pub out_dir: String,
    /// Worker threads for evaluation batches (0 = all cores).
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            seeds: 20,
            train_seed_offset: 1_000_000,
            policy: PolicyKind::Trad,
            out_dir: "out".into(),
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|k| self.seed + k).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub radio: RadioConfig,
    pub task: TaskConfig,
    pub planner: PlannerParams,
    pub train: TrainConfig,
    pub reward: RewardConfig,
    pub baseline: BaselineConfig,
    pub run: RunConfig,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        self.task.validate()?;
        self.planner.validate()?;
        self.train.validate()?;
        self.reward.validate()?;
        self.baseline.validate()?;
        if self.run.seeds == 0 {
            return Err(Error::Validation { key: "run.seeds".into(), reason: "must be at least 1".into() });
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

/// Reads a TOML config; absent keys take their defaults.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    SimConfig::from_toml(&text)
}
