use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::NfspAgent;
use crate::exact::BehaviouralStrategy;
use crate::game::{Game, InfoState, PokerAction, NUM_ACTIONS};
use crate::neural::{masked_argmax, masked_softmax, Mlp};

use super::HarnessError;

/// Anything that can choose moves for both seats of a game. Rows are
/// indexed by action and are zero on illegal actions.
pub trait Policy: Sync {
    fn distribution(&self, info: &InfoState) -> Result<[f64; NUM_ACTIONS], HarnessError>;
}

/// Scripted opponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Folds whenever folding is legal and checks otherwise.
    AlwaysFold,
    AlwaysCall,
    /// Raises until the cap, then calls.
    AlwaysRaise,
    UniformRandom,
}

impl Policy for Baseline {
    fn distribution(&self, info: &InfoState) -> Result<[f64; NUM_ACTIONS], HarnessError> {
        let legal = info.legal();
        let mut row = [0.0; NUM_ACTIONS];
        let pick = |preferred: PokerAction| {
            if legal.contains(preferred) {
                preferred
            } else {
                PokerAction::Call
            }
        };
        match self {
            Baseline::AlwaysFold => row[pick(PokerAction::Fold).index()] = 1.0,
            Baseline::AlwaysCall => row[PokerAction::Call.index()] = 1.0,
            Baseline::AlwaysRaise => row[pick(PokerAction::Raise).index()] = 1.0,
            Baseline::UniformRandom => {
                for a in legal.iter() {
                    row[a.index()] = 1.0 / legal.count() as f64;
                }
            }
        }
        Ok(row)
    }
}

impl FromStr for Baseline {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fold" | "always-fold" => Ok(Baseline::AlwaysFold),
            "call" | "always-call" => Ok(Baseline::AlwaysCall),
            "raise" | "always-raise" => Ok(Baseline::AlwaysRaise),
            "random" | "uniform-random" => Ok(Baseline::UniformRandom),
            _ => Err(HarnessError::Config(format!("unknown baseline {s:?}"))),
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::AlwaysFold => "always-fold",
            Baseline::AlwaysCall => "always-call",
            Baseline::AlwaysRaise => "always-raise",
            Baseline::UniformRandom => "uniform-random",
        })
    }
}

/// Lookup table keyed by information-state key, covering both seats.
#[derive(Debug, Clone)]
pub struct TabularPolicy {
    table: BehaviouralStrategy,
}

impl TabularPolicy {
    pub fn new(table: BehaviouralStrategy) -> Self {
        TabularPolicy { table }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Ok(TabularPolicy::new(BehaviouralStrategy::load(path)?))
    }
}

impl Policy for TabularPolicy {
    fn distribution(&self, info: &InfoState) -> Result<[f64; NUM_ACTIONS], HarnessError> {
        let probs = self.table.get(info.key()).ok_or_else(|| HarnessError::MissingInfoState(info.key().to_string()))?;
        let legal = info.legal();
        if probs.len() != legal.count() {
            return Err(HarnessError::MissingInfoState(format!("{} (row has {} entries)", info.key(), probs.len())));
        }
        let mut row = [0.0; NUM_ACTIONS];
        for (a, &p) in legal.iter().zip(probs) {
            row[a.index()] = p;
        }
        Ok(row)
    }
}

/// Which network of a trained agent drives a [`NetworkPolicy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NetworkMode {
    /// Sample from the average-policy network.
    #[default]
    Average,
    /// Most probable action of the average-policy network.
    GreedyAverage,
    /// Greedy action of the Q network.
    BestResponse,
}

impl FromStr for NetworkMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "average" => Ok(NetworkMode::Average),
            "greedy" | "greedy-average" => Ok(NetworkMode::GreedyAverage),
            "best-response" | "q" => Ok(NetworkMode::BestResponse),
            _ => Err(HarnessError::Config(format!("unknown network mode {s:?}"))),
        }
    }
}

/// One network per seat, taken from the two agents of a self-play run.
#[derive(Debug, Clone)]
pub struct NetworkPolicy {
    nets: [Mlp; 2],
    mode: NetworkMode,
}

impl NetworkPolicy {
    pub fn from_agents(agents: &[NfspAgent; 2], mode: NetworkMode) -> Self {
        let pick = |a: &NfspAgent| match mode {
            NetworkMode::BestResponse => a.q_network().clone(),
            _ => a.policy_network().clone(),
        };
        NetworkPolicy { nets: [pick(&agents[0]), pick(&agents[1])], mode }
    }

    /// Loads `agent-0/` and `agent-1/` from an experiment checkpoint.
    pub fn load(dir: impl AsRef<Path>, mode: NetworkMode) -> Result<(Game, Self), HarnessError> {
        let dir = dir.as_ref();
        let agents = [NfspAgent::load(dir.join("agent-0"))?, NfspAgent::load(dir.join("agent-1"))?];
        if agents[0].game() != agents[1].game() {
            return Err(HarnessError::Config(format!("{} holds agents of different games", dir.display())));
        }
        Ok((agents[0].game(), NetworkPolicy::from_agents(&agents, mode)))
    }
}

impl Policy for NetworkPolicy {
    fn distribution(&self, info: &InfoState) -> Result<[f64; NUM_ACTIONS], HarnessError> {
        let legal = info.legal();
        let out = self.nets[info.player().index()].forward(info.features());
        let mut row = [0.0; NUM_ACTIONS];
        match self.mode {
            NetworkMode::Average => return Ok(masked_softmax(&out, legal)),
            NetworkMode::GreedyAverage => row[masked_argmax(&masked_softmax(&out, legal), legal).0] = 1.0,
            NetworkMode::BestResponse => row[masked_argmax(&out, legal).0] = 1.0,
        }
        Ok(row)
    }
}

/// Command-line reference to a policy: a baseline name, a strategy JSON
/// file, or `checkpoint:<dir>[:average|greedy|best-response]`.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyRef {
    Baseline(Baseline),
    Strategy(PathBuf),
    Checkpoint(PathBuf, NetworkMode),
}

impl FromStr for PolicyRef {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(rest) = s.strip_prefix("checkpoint:") {
            let (dir, mode) = match rest.rsplit_once(':') {
                Some((dir, mode)) if mode.parse::<NetworkMode>().is_ok() => (dir, mode.parse()?),
                _ => (rest, NetworkMode::Average),
            };
            return Ok(PolicyRef::Checkpoint(dir.into(), mode));
        }
        if let Some(path) = s.strip_prefix("strategy:") {
            return Ok(PolicyRef::Strategy(path.into()));
        }
        if let Ok(b) = s.parse() {
            return Ok(PolicyRef::Baseline(b));
        }
        if s.ends_with(".json") {
            return Ok(PolicyRef::Strategy(s.into()));
        }
        Err(HarnessError::Config(format!("cannot interpret policy {s:?}")))
    }
}

impl PolicyRef {
    /// Materialises the policy. Checkpoints must belong to `game`.
    pub fn open(&self, game: Game) -> Result<Box<dyn Policy>, HarnessError> {
        Ok(match self {
            PolicyRef::Baseline(b) => Box::new(*b),
            PolicyRef::Strategy(path) => Box::new(TabularPolicy::load(path)?),
            PolicyRef::Checkpoint(dir, mode) => {
                let (g, policy) = NetworkPolicy::load(dir, *mode)?;
                if g != game {
                    return Err(HarnessError::Config(format!("checkpoint {} is for {g}, not {game}", dir.display())));
                }
                Box::new(policy)
            }
        })
    }
}
