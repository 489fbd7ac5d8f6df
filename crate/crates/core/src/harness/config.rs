use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::AgentConfig;
use crate::game::Game;

use super::policy::Baseline;
use super::HarnessError;

/// One self-play experiment, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: Game,
    pub episodes: u64,
    /// Episodes between metric rows. The last episode always gets a row.
    pub eval_every: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    /// Hold'em evaluation against a scripted bot. Ignored for games that
    /// are small enough for exact exploitability.
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    /// Either one table shared by both seats or one table per seat. When
    /// absent, the game's preset is used.
    #[serde(default)]
    pub agents: Vec<AgentConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Metrics CSV. Nothing is written when unset.
    pub metrics: Option<PathBuf>,
    /// Directory receiving `agent-0/`, `agent-1/` and `trainer.json`.
    pub checkpoints: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub baseline: Baseline,
    pub hands: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig { baseline: Baseline::UniformRandom, hands: 10_000 }
    }
}

impl ExperimentConfig {
    pub fn new(game: Game, episodes: u64, eval_every: u64, seed: u64) -> Self {
        ExperimentConfig {
            game,
            episodes,
            eval_every,
            seed,
            output: OutputConfig::default(),
            evaluation: EvaluationConfig::default(),
            agents: Vec::new(),
        }
    }

    pub fn with_agent(mut self, agent: AgentConfig) -> Self {
        self.agents = vec![agent];
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        Ok(toml::to_string(self)?)
    }

    /// Reads a config file. Relative output paths are resolved against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let mut config = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let Some(base) = path.parent() {
            for p in [&mut config.output.metrics, &mut config.output.checkpoints].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.eval_every == 0 {
            return Err(HarnessError::Config("eval_every must be positive".into()));
        }
        if self.agents.len() > 2 {
            return Err(HarnessError::Config(format!("{} agent tables given, expected 1 or 2", self.agents.len())));
        }
        if self.game == Game::Lhe && self.evaluation.hands < 2 {
            return Err(HarnessError::Config("evaluation.hands must be at least 2".into()));
        }
        for a in &self.agents {
            a.validate()?;
        }
        Ok(())
    }

    /// Agent settings for each seat.
    pub fn seat_configs(&self) -> [AgentConfig; 2] {
        match self.agents.as_slice() {
            [] => {
                let preset = if self.game == Game::Lhe { AgentConfig::lhe() } else { AgentConfig::leduc() };
                [preset.clone(), preset]
            }
            [one] => [one.clone(), one.clone()],
            [a, b, ..] => [a.clone(), b.clone()],
        }
    }
}
