//! Exact full-width computations over small game trees: expected payoff,
//! best response, exploitability, realization-equivalent strategy mixing and
//! extensive-form fictitious play.

mod analysis;
mod strategy;
mod tree;
mod xfp;

use thiserror::Error;

use crate::game::Game;

pub use strategy::{BehaviouralStrategy, RealizationWeights, StrategyProfile};
pub use tree::{GameTree, Infoset};
pub use xfp::{xfp_run, StepsizeSchedule, XfpConfig, XfpRun};

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("strategy has no entry for info state `{0}`")]
    MissingInfoState(String),
    #[error("info state `{0}` does not exist in this game")]
    UnknownInfoState(String),
    #[error("bad probabilities at `{key}`: {reason}")]
    MalformedRow { key: String, reason: String },
    #[error("{0} is too large for full-width traversal")]
    TooLarge(Game),
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("strategy file: {0}")]
    Json(#[from] serde_json::Error),
}
