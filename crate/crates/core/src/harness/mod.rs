//! Experiment orchestration: self-play training with periodic evaluation,
//! head-to-head matches, configuration files and the command line.

pub mod cli;
mod config;
mod matches;
mod policy;
mod training;

use thiserror::Error;

use crate::agents::AgentError;
use crate::exact::ExactError;
use crate::game::{Game, GameError};

pub use config::{EvaluationConfig, ExperimentConfig, OutputConfig};
pub use matches::{init_global_threads, play_hand, run_match, thread_pool, MatchMode, MatchResult, THREADS_ENV};
pub use policy::{Baseline, NetworkMode, NetworkPolicy, Policy, PolicyRef, TabularPolicy};
pub use training::{run_training, MetricsRow, TrainOptions, Trainer};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error("no strategy entry for information state {0}")]
    MissingInfoState(String),
    #[error("{0} is too large for exact evaluation")]
    TooLarge(Game),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("metrics file: {0}")]
    Csv(#[from] csv::Error),
    #[error("config file: {0}")]
    TomlRead(#[from] toml::de::Error),
    #[error("config file: {0}")]
    TomlWrite(#[from] toml::ser::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
