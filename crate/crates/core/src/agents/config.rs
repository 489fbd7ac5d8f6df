use serde::{Deserialize, Serialize};

use crate::memory::MemoryKind;
use crate::neural::SgdConfig;

use super::AgentError;

/// What advances the exploration decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExplorationClock {
    #[default]
    Episodes,
    QUpdates,
}

/// Hyperparameters of one learning agent. Defaults are the Leduc settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// Hidden layer widths of both networks.
    pub hidden_layers: Vec<usize>,
    /// Probability of playing the epsilon-greedy best response for a whole
    /// episode (the anticipatory parameter).
    pub anticipatory: f64,
    pub epsilon_start: f64,
    /// Exploration is `epsilon_start / sqrt(1 + t / horizon)`.
    pub epsilon_decay_horizon: f64,
    pub exploration_clock: ExplorationClock,
    pub rl_capacity: usize,
    pub rl_memory: MemoryKind,
    pub sl_capacity: usize,
    pub sl_memory: MemoryKind,
    pub rl_learning_rate: f64,
    pub sl_learning_rate: f64,
    pub batch_size: usize,
    /// Own steps between learning phases.
    pub learn_every: u64,
    /// Gradient updates per network in each learning phase.
    pub updates_per_learn: usize,
    /// Q updates between target refits.
    pub target_refit_every: u64,
    /// Multiplier applied to chip payoffs before they enter the TD loss.
    pub reward_scale: f64,
    /// Whether the average-policy network is trained at all.
    pub train_policy: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig::leduc()
    }
}

impl AgentConfig {
    pub fn leduc() -> Self {
        AgentConfig {
            hidden_layers: vec![64],
            anticipatory: 0.1,
            epsilon_start: 0.06,
            epsilon_decay_horizon: 10_000.0,
            exploration_clock: ExplorationClock::Episodes,
            rl_capacity: 200_000,
            rl_memory: MemoryKind::SlidingWindow,
            sl_capacity: 2_000_000,
            sl_memory: MemoryKind::Reservoir,
            rl_learning_rate: 0.1,
            sl_learning_rate: 0.005,
            batch_size: 128,
            learn_every: 128,
            updates_per_learn: 2,
            target_refit_every: 300,
            reward_scale: 1.0,
            train_policy: true,
        }
    }

    /// DQN with a passively trained average-policy network.
    pub fn leduc_dqn() -> Self {
        AgentConfig { anticipatory: 1.0, epsilon_start: 0.12, rl_capacity: 2_000_000, ..AgentConfig::leduc() }
    }

    pub fn lhe() -> Self {
        AgentConfig {
            hidden_layers: vec![1024, 512, 1024, 512],
            anticipatory: 0.1,
            epsilon_start: 0.08,
            epsilon_decay_horizon: 100_000.0,
            exploration_clock: ExplorationClock::Episodes,
            rl_capacity: 600_000,
            rl_memory: MemoryKind::SlidingWindow,
            sl_capacity: 30_000_000,
            sl_memory: MemoryKind::Exponential { p_min: 0.25 },
            rl_learning_rate: 0.1,
            sl_learning_rate: 0.01,
            batch_size: 256,
            learn_every: 256,
            updates_per_learn: 2,
            target_refit_every: 1000,
            reward_scale: 1.0 / 20.0,
            train_policy: true,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |msg: String| Err(AgentError::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.anticipatory) {
            return bad(format!("anticipatory parameter {} outside [0, 1]", self.anticipatory));
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) {
            return bad(format!("epsilon_start {} outside [0, 1]", self.epsilon_start));
        }
        if self.epsilon_decay_horizon <= 0.0 {
            return bad("epsilon_decay_horizon must be positive".into());
        }
        if self.rl_capacity == 0 || self.sl_capacity == 0 || self.batch_size == 0 {
            return bad("memory capacities and batch size must be positive".into());
        }
        if self.learn_every == 0 || self.target_refit_every == 0 {
            return bad("learn_every and target_refit_every must be positive".into());
        }
        if !(self.rl_learning_rate > 0.0 && self.sl_learning_rate > 0.0) {
            return bad("learning rates must be positive".into());
        }
        if self.hidden_layers.contains(&0) {
            return bad("hidden layer widths must be positive".into());
        }
        if !self.reward_scale.is_finite() || self.reward_scale <= 0.0 {
            return bad("reward_scale must be positive".into());
        }
        for kind in [self.rl_memory, self.sl_memory] {
            if let MemoryKind::Exponential { p_min } = kind {
                if !(0.0..=1.0).contains(&p_min) {
                    return bad(format!("p_min {p_min} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn epsilon(&self, clock: u64) -> f64 {
        self.epsilon_start / (1.0 + clock as f64 / self.epsilon_decay_horizon).sqrt()
    }

    pub fn rl_sgd(&self) -> SgdConfig {
        SgdConfig { learning_rate: self.rl_learning_rate, batch_size: self.batch_size }
    }

    pub fn sl_sgd(&self) -> SgdConfig {
        SgdConfig { learning_rate: self.sl_learning_rate, batch_size: self.batch_size }
    }
}
