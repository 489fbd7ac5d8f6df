use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{Game, PlayerId};

use super::{ExactError, GameTree, StrategyProfile};

/// Weight given to the new best response when it is mixed into the average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepsizeSchedule {
    /// 1/T, where the initial uniform strategy counts as the first sample,
    /// so iteration t uses 1/(t+1) and the average stays the plain mean of
    /// everything seen.
    Harmonic,
    Constant(f64),
}

impl StepsizeSchedule {
    pub fn stepsize(self, iteration: usize) -> f64 {
        match self {
            StepsizeSchedule::Harmonic => 1.0 / (iteration as f64 + 1.0),
            StepsizeSchedule::Constant(c) => c,
        }
    }

    fn validate(self) -> Result<Self, ExactError> {
        match self {
            StepsizeSchedule::Constant(c) if !(c > 0.0 && c <= 1.0) => {
                Err(ExactError::InvalidParameter(format!("constant stepsize {c} outside (0, 1]")))
            }
            s => Ok(s),
        }
    }
}

impl FromStr for StepsizeSchedule {
    type Err = ExactError;

    /// Accepts `harmonic`, `1/t`, `constant:<c>` or a bare number.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let parsed = match s.as_str() {
            "harmonic" | "1/t" => StepsizeSchedule::Harmonic,
            other => {
                let num = other.strip_prefix("constant:").unwrap_or(other);
                let c = num
                    .parse::<f64>()
                    .map_err(|_| ExactError::InvalidParameter(format!("unknown stepsize schedule `{s}`")))?;
                StepsizeSchedule::Constant(c)
            }
        };
        parsed.validate()
    }
}

impl fmt::Display for StepsizeSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepsizeSchedule::Harmonic => f.write_str("harmonic"),
            StepsizeSchedule::Constant(c) => write!(f, "constant:{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XfpConfig {
    pub iterations: usize,
    pub schedule: StepsizeSchedule,
    /// Probability of passing back the uniform action value at each
    /// best-response step.
    pub noise: f64,
    pub eval_every: usize,
    pub seed: u64,
}

impl Default for XfpConfig {
    fn default() -> Self {
        XfpConfig { iterations: 1000, schedule: StepsizeSchedule::Harmonic, noise: 0.0, eval_every: 10, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct XfpRun {
    /// (iteration, exploitability of the average profile after it). Always
    /// includes the first and the last iteration.
    pub curve: Vec<(usize, f64)>,
    pub average: StrategyProfile,
}

impl XfpRun {
    pub fn final_exploitability(&self) -> f64 {
        self.curve.last().map(|&(_, e)| e).unwrap_or(f64::NAN)
    }
}

/// Full-width fictitious play from the uniform profile. Both players best
/// respond to the same average profile, then both averages are updated.
pub fn xfp_run(game: Game, config: &XfpConfig) -> Result<XfpRun, ExactError> {
    let tree = GameTree::build(game)?;
    xfp_on_tree(&tree, config)
}

pub(crate) fn xfp_on_tree(tree: &GameTree, config: &XfpConfig) -> Result<XfpRun, ExactError> {
    if config.iterations == 0 || config.eval_every == 0 {
        return Err(ExactError::InvalidParameter("iterations and eval_every must be positive".into()));
    }
    if !(0.0..=1.0).contains(&config.noise) {
        return Err(ExactError::InvalidParameter(format!("noise {} outside [0, 1]", config.noise)));
    }
    config.schedule.validate()?;
    let mut seeds = ChaCha8Rng::seed_from_u64(config.seed);
    let mut avg = tree.dense_profile(&tree.uniform_profile())?;
    let mut curve = Vec::new();
    for t in 1..=config.iterations {
        let (s0, s1) = (seeds.gen::<u64>(), seeds.gen::<u64>());
        let (br0, br1) = rayon::join(
            || tree.best_response_dense(&avg, PlayerId::ZERO, config.noise, ChaCha8Rng::seed_from_u64(s0)).0,
            || tree.best_response_dense(&avg, PlayerId::ONE, config.noise, ChaCha8Rng::seed_from_u64(s1)).0,
        );
        let mut br = br0;
        for &i in tree.player_infosets(PlayerId::ONE) {
            br[i] = br1[i];
        }
        let lambda = config.schedule.stepsize(t);
        let mut next = avg.clone();
        for p in PlayerId::BOTH {
            tree.mix_dense(&avg, 1.0 - lambda, &br, lambda, p, &mut next);
        }
        avg = next;
        if t == 1 || t % config.eval_every == 0 || t == config.iterations {
            curve.push((t, tree.exploitability_dense(&avg)));
        }
    }
    Ok(XfpRun { curve, average: tree.profile_from_dense(&avg) })
}
