use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::sample_index;
use crate::game::{Card, Game, GameState, NodeKind};

use super::policy::Policy;
use super::HarnessError;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "NFSP_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// Hands come in pairs sharing one deck, with seats swapped.
    #[default]
    Duplicate,
    /// Every hand gets its own deck; seats alternate.
    Independent,
}

/// Win rate of the first policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub hands: usize,
    pub mbb_per_hand: f64,
    /// Sample standard deviation over sqrt(samples), where a sample is one
    /// hand, or one seat-swapped pair in duplicate mode.
    pub std_error: f64,
}

fn configured_threads() -> Result<Option<usize>, HarnessError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            v.parse().map(Some).map_err(|_| HarnessError::Config(format!("{THREADS_ENV}={v:?} is not a thread count")))
        }
        Err(_) => Ok(None),
    }
}

/// Builds a thread pool sized by [`THREADS_ENV`], falling back to rayon's
/// default.
pub fn thread_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = configured_threads()? {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| HarnessError::Config(e.to_string()))
}

/// Sizes rayon's global pool from [`THREADS_ENV`] when it is set.
pub fn init_global_threads() -> Result<(), HarnessError> {
    if let Some(n) = configured_threads()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    Ok(())
}

/// Plays `hands` hands of `first` against `second` and reports the first
/// policy's win rate in milli-stakes per hand (milli-big-blinds in hold'em).
/// Results depend only on the arguments, not on the thread count.
pub fn run_match(
    game: Game,
    first: &dyn Policy,
    second: &dyn Policy,
    hands: usize,
    seed: u64,
    mode: MatchMode,
) -> Result<MatchResult, HarnessError> {
    let samples = match mode {
        MatchMode::Duplicate if hands % 2 != 0 || hands == 0 => {
            return Err(HarnessError::Config(format!("duplicate matches need a positive even hand count, got {hands}")))
        }
        MatchMode::Duplicate => hands / 2,
        MatchMode::Independent => hands,
    };
    if samples < 2 {
        return Err(HarnessError::Config("a match needs at least two samples".into()));
    }
    let scale = 1000.0 / game.spec().stake_unit as f64;
    let play_sample = |i: usize| -> Result<f64, HarnessError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut deck: Vec<Card> = (0..game.spec().deck_size).map(Card::new).collect();
        deck.shuffle(&mut rng);
        let chips = match mode {
            MatchMode::Duplicate => {
                let actions = rng.clone();
                let a = play_hand(game, [first, second], &deck, &mut actions.clone())?[0];
                let b = play_hand(game, [second, first], &deck, &mut actions.clone())?[1];
                (a + b) / 2.0
            }
            MatchMode::Independent if i % 2 == 0 => play_hand(game, [first, second], &deck, &mut rng)?[0],
            MatchMode::Independent => play_hand(game, [second, first], &deck, &mut rng)?[1],
        };
        Ok(chips * scale)
    };
    let values: Vec<f64> =
        thread_pool()?.install(|| (0..samples).into_par_iter().map(play_sample).collect::<Result<_, _>>())?;

    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MatchResult { hands, mbb_per_hand: mean, std_error: (var / n).sqrt() })
}

/// One hand with cards taken from the front of `deck`. Returns chip payoffs
/// by seat.
pub fn play_hand<R: Rng + ?Sized>(
    game: Game,
    seats: [&dyn Policy; 2],
    deck: &[Card],
    rng: &mut R,
) -> Result<[f64; 2], HarnessError> {
    let mut state = GameState::new(game);
    loop {
        match state.node() {
            NodeKind::Chance => state = state.deal_from(deck),
            NodeKind::Decision(p) => {
                let info = state.info_state(p);
                let row = seats[p.index()].distribution(&info)?;
                let action = sample_index(&row, rng.gen());
                if !info.legal().contains(action) {
                    return Err(HarnessError::MissingInfoState(format!(
                        "{}: policy chose illegal {action:?}",
                        info.key()
                    )));
                }
                state = state.apply_action(action);
            }
            NodeKind::Terminal => return Ok(state.payoffs()),
        }
    }
}
