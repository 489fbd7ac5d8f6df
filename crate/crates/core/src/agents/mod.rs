//! Learning agents: neural fictitious self-play, with DQN as the
//! configuration that always follows its best response.

mod config;
mod nfsp;

use rand::Rng;
use thiserror::Error;

use crate::game::{Game, GameState, NodeKind};
use crate::memory::MemoryError;
use crate::neural::NeuralError;

pub use config::{AgentConfig, ExplorationClock};
pub(crate) use nfsp::sample_index;
pub use nfsp::{AgentCounters, NfspAgent, PolicyMode, StepLosses};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error("network parameters became non-finite")]
    NonFiniteParameters,
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("agent state: {0}")]
    Json(#[from] serde_json::Error),
}

/// Plays one hand between two learning agents, each in its own seat, and
/// returns the payoffs.
pub fn self_play_episode<R: Rng + ?Sized>(
    game: Game,
    agents: &mut [NfspAgent; 2],
    chance: &mut R,
) -> Result<[f64; 2], AgentError> {
    for a in agents.iter_mut() {
        a.begin_episode();
    }
    let mut state = GameState::new(game);
    loop {
        match state.node() {
            NodeKind::Chance => state = state.sample_chance(chance),
            NodeKind::Decision(p) => {
                let info = state.info_state(p);
                let action = agents[p.index()].step(&info)?;
                state = state.apply_action(action);
            }
            NodeKind::Terminal => {
                let payoffs = state.payoffs();
                for (a, v) in agents.iter_mut().zip(payoffs) {
                    a.end_episode(v);
                }
                return Ok(payoffs);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::GameTree;
    use crate::game::{Features, InfoState, LegalMask, PlayerId, PokerAction};
    use crate::memory::{Memory, MemoryKind, Transition};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small(config: AgentConfig) -> AgentConfig {
        AgentConfig { rl_capacity: 5_000, sl_capacity: 20_000, ..config }
    }

    fn pair(game: Game, config: &AgentConfig, seed: u64) -> [NfspAgent; 2] {
        [
            NfspAgent::new(game, PlayerId::ZERO, config.clone(), seed).unwrap(),
            NfspAgent::new(game, PlayerId::ONE, config.clone(), seed + 1).unwrap(),
        ]
    }

    fn leduc_opening() -> InfoState {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        GameState::new(Game::Leduc).sample_chance(&mut rng).info_state(PlayerId::ZERO)
    }

    #[test]
    fn best_response_frequency_matches_anticipatory_parameter() {
        let mut agent = NfspAgent::new(Game::Leduc, PlayerId::ZERO, AgentConfig::default(), 3).unwrap();
        let n = 100_000;
        let br = (0..n).filter(|_| agent.begin_episode() == PolicyMode::BestResponse).count();
        assert!((br as f64 / n as f64 - 0.1).abs() < 0.005, "{br}");
        for (eta, mode) in [(1.0, PolicyMode::BestResponse), (0.0, PolicyMode::AveragePolicy)] {
            let cfg = AgentConfig { anticipatory: eta, ..AgentConfig::default() };
            let mut agent = NfspAgent::new(Game::Leduc, PlayerId::ZERO, cfg, 3).unwrap();
            assert!((0..1000).all(|_| agent.begin_episode() == mode));
        }
    }

    #[test]
    fn full_exploration_is_uniform() {
        let cfg = AgentConfig {
            anticipatory: 1.0,
            epsilon_start: 1.0,
            epsilon_decay_horizon: 1e12,
            ..AgentConfig::default()
        };
        let mut agent = NfspAgent::new(Game::Leduc, PlayerId::ZERO, cfg, 4).unwrap();
        agent.begin_episode();
        let info = leduc_opening();
        let n = 30_000;
        let raises = (0..n).filter(|_| agent.act(&info) == PokerAction::Raise).count();
        assert!((raises as f64 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn fresh_average_policy_is_near_uniform() {
        let cfg = AgentConfig { anticipatory: 0.0, ..AgentConfig::default() };
        let mut agent = NfspAgent::new(Game::Leduc, PlayerId::ZERO, cfg, 5).unwrap();
        agent.begin_episode();
        let info = leduc_opening();
        let n = 20_000;
        let calls = (0..n).filter(|_| agent.act(&info) == PokerAction::Call).count();
        // Glorot initialisation keeps the logits of a sparse input small
        assert!((calls as f64 / n as f64 - 0.5).abs() < 0.15, "{calls}");
    }

    #[test]
    fn greedy_q_breaks_ties_towards_lowest_index() {
        let cfg = AgentConfig { anticipatory: 1.0, epsilon_start: 0.0, ..AgentConfig::default() };
        let mut agent = NfspAgent::new(Game::Leduc, PlayerId::ZERO, cfg, 6).unwrap();
        agent.replace_q_network(crate::neural::Mlp::zeros(&[30, 64, 3]));
        agent.begin_episode();
        assert_eq!(agent.act(&leduc_opening()), PokerAction::Call);
    }

    #[test]
    fn behaviour_tuples_only_in_best_response_mode() {
        let t = || Transition { state: Features::zeros(30), legal: LegalMask::ALL, action: 1, reward: 0.0, next: None };
        for (eta, sl_growth) in [(0.0, 0), (1.0, 3)] {
            let cfg = AgentConfig { anticipatory: eta, ..AgentConfig::default() };
            let mut agent = NfspAgent::new(Game::Leduc, PlayerId::ZERO, cfg, 7).unwrap();
            agent.begin_episode();
            for _ in 0..3 {
                agent.observe(t());
            }
            assert_eq!(agent.rl_memory().len(), 3);
            assert_eq!(agent.sl_memory().len(), sl_growth);
        }
    }

    #[test]
    fn learning_cadence_and_refits() {
        let cfg = AgentConfig { anticipatory: 1.0, batch_size: 4, ..AgentConfig::default() };
        let mut agent = NfspAgent::new(Game::Leduc, PlayerId::ZERO, cfg, 8).unwrap();
        agent.begin_episode();
        for i in 0..10 {
            agent.observe(Transition {
                state: leduc_opening().features().clone(),
                legal: LegalMask::from_bits(0b110),
                action: 1 + (i % 2),
                reward: 1.0,
                next: None,
            });
        }
        for _ in 1..128 {
            assert_eq!(agent.train_step().unwrap(), StepLosses::default());
        }
        let losses = agent.train_step().unwrap();
        assert!(losses.q.is_some() && losses.policy.is_some());
        let c = agent.counters();
        assert_eq!((c.q_updates, c.policy_updates), (2, 2));
        // 150 learning phases of 2 updates each: 300 updates, one refit
        for _ in 0..149 * 128 {
            agent.train_step().unwrap();
        }
        assert_eq!(agent.counters().q_updates, 300);
        assert_eq!(agent.counters().target_refits, 1);
        assert_eq!(agent.target().net(), agent.q_network());
    }

    #[test]
    fn empty_supervised_memory_skips_policy_updates() {
        let cfg = AgentConfig { anticipatory: 0.0, batch_size: 2, learn_every: 1, ..AgentConfig::default() };
        let mut agent = NfspAgent::new(Game::Leduc, PlayerId::ZERO, cfg, 9).unwrap();
        agent.begin_episode();
        for _ in 0..3 {
            agent.observe(Transition {
                state: Features::zeros(30),
                legal: LegalMask::ALL,
                action: 0,
                reward: -1.0,
                next: None,
            });
        }
        let losses = agent.train_step().unwrap();
        assert!(losses.q.is_some());
        assert!(losses.policy.is_none());
    }

    #[test]
    fn extraction_covers_the_seat_and_rows_are_distributions() {
        let tree = GameTree::build(Game::Leduc).unwrap();
        let agent = NfspAgent::new(Game::Leduc, PlayerId::ONE, AgentConfig::default(), 10).unwrap();
        let avg = agent.extract_average_strategy(&tree);
        assert_eq!(avg.len(), tree.player_infosets(PlayerId::ONE).len());
        for (key, row) in avg.iter() {
            assert_eq!(tree.infoset(key).unwrap().player, PlayerId::ONE);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
        for s in [agent.extract_greedy_average(&tree), agent.extract_best_response(&tree)] {
            assert!(s.iter().all(|(_, row)| row.iter().filter(|&&p| p == 1.0).count() == 1));
        }
    }

    #[test]
    fn self_play_is_deterministic() {
        let cfg = small(AgentConfig { batch_size: 32, learn_every: 32, ..AgentConfig::default() });
        let run = || {
            let mut agents = pair(Game::Leduc, &cfg, 11);
            let mut chance = ChaCha8Rng::seed_from_u64(12);
            let mut total = 0.0;
            for _ in 0..2_000 {
                total += self_play_episode(Game::Leduc, &mut agents, &mut chance).unwrap()[0];
            }
            (total, agents[0].policy_network().params(), agents[1].q_network().params())
        };
        let (a, b) = (run(), run());
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert!(a.1.iter().zip(&b.1).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.2.iter().zip(&b.2).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn dqn_actions_ignore_the_policy_network() {
        let base = small(AgentConfig { batch_size: 32, learn_every: 32, ..AgentConfig::leduc_dqn() });
        let trace = |train_policy: bool| {
            let cfg = AgentConfig { train_policy, ..base.clone() };
            let mut agents = pair(Game::Leduc, &cfg, 13);
            let mut chance = ChaCha8Rng::seed_from_u64(14);
            let mut payoffs = Vec::new();
            for _ in 0..1_500 {
                payoffs.push(self_play_episode(Game::Leduc, &mut agents, &mut chance).unwrap()[0]);
            }
            (payoffs, agents[0].counters().policy_updates)
        };
        let (with, n_with) = trace(true);
        let (without, n_without) = trace(false);
        assert!(n_with > 0 && n_without == 0);
        assert_eq!(with, without);
    }

    #[test]
    fn checkpoint_roundtrip_resumes_identically() {
        let cfg = small(AgentConfig { batch_size: 16, learn_every: 16, ..AgentConfig::default() });
        let mut agents = pair(Game::Kuhn, &cfg, 15);
        let mut chance = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..500 {
            self_play_episode(Game::Kuhn, &mut agents, &mut chance).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        agents[0].save(dir.path()).unwrap();
        let back = NfspAgent::load(dir.path()).unwrap();
        assert_eq!(back.counters(), agents[0].counters());
        assert_eq!(back.q_network(), agents[0].q_network());
        assert_eq!(back.policy_network(), agents[0].policy_network());
        assert_eq!(back.target(), agents[0].target());
        assert_eq!(back.config(), agents[0].config());
        assert_eq!(back.rl_memory().len(), 0);
        std::fs::write(dir.path().join("q.bin"), b"junk").unwrap();
        assert!(NfspAgent::load(dir.path()).is_err());
    }

    #[test]
    fn sliding_window_supervised_memory_is_configurable() {
        let cfg = AgentConfig { sl_memory: MemoryKind::SlidingWindow, sl_capacity: 10, ..AgentConfig::default() };
        let agent = NfspAgent::new(Game::Leduc, PlayerId::ZERO, cfg, 17).unwrap();
        assert_eq!(agent.sl_memory().capacity(), 10);
        assert!(NfspAgent::new(
            Game::Leduc,
            PlayerId::ZERO,
            AgentConfig { anticipatory: -0.1, ..AgentConfig::default() },
            0
        )
        .is_err());
    }
}
