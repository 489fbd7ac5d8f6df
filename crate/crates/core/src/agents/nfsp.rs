use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exact::{BehaviouralStrategy, GameTree};
use crate::game::{Features, Game, InfoState, LegalMask, PlayerId, PokerAction, NUM_ACTIONS};
use crate::memory::{sample_minibatch, BehaviourTuple, Memory, ReplayMemory, Transition};
use crate::neural::{self, masked_argmax, masked_softmax, Mlp, TargetParams, Workspace};

use super::{AgentConfig, AgentError, ExplorationClock};

/// Which of its two strategies the agent follows during an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyMode {
    /// Epsilon-greedy with respect to the Q-network.
    BestResponse,
    /// Sampled from the average-policy network.
    AveragePolicy,
}

/// Losses of the updates made by one `train_step`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepLosses {
    pub q: Option<f64>,
    pub policy: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq)]
pub struct AgentCounters {
    pub episodes: u64,
    pub best_response_episodes: u64,
    pub steps: u64,
    pub q_updates: u64,
    pub policy_updates: u64,
    pub target_refits: u64,
}

#[derive(Serialize, Deserialize)]
struct SavedState {
    game: Game,
    seat: PlayerId,
    config: AgentConfig,
    counters: AgentCounters,
    target_staleness: u64,
    mode_rng: ChaCha8Rng,
    act_rng: ChaCha8Rng,
    rl_rng: ChaCha8Rng,
    sl_rng: ChaCha8Rng,
    memory_seed: u64,
}

struct Pending {
    state: Features,
    legal: LegalMask,
    action: u8,
}

/// Neural fictitious self-play agent for one seat: a Q-network learning a
/// best response from a circular transition memory and a policy network
/// learning the agent's average behaviour from a reservoir of its own
/// best-response actions.
pub struct NfspAgent {
    game: Game,
    seat: PlayerId,
    config: AgentConfig,
    q: Mlp,
    target: TargetParams,
    policy: Mlp,
    rl_memory: ReplayMemory<Transition>,
    sl_memory: ReplayMemory<BehaviourTuple>,
    mode: PolicyMode,
    counters: AgentCounters,
    mode_rng: ChaCha8Rng,
    act_rng: ChaCha8Rng,
    rl_rng: ChaCha8Rng,
    sl_rng: ChaCha8Rng,
    memory_seed: u64,
    pending: Option<Pending>,
    ws: Workspace,
    q_loss: (f64, u64),
    policy_loss: (f64, u64),
}

impl NfspAgent {
    pub fn new(game: Game, seat: PlayerId, config: AgentConfig, seed: u64) -> Result<Self, AgentError> {
        config.validate()?;
        let mut seeds = ChaCha8Rng::seed_from_u64(seed);
        let mut sizes = vec![game.spec().encoding_len()];
        sizes.extend(&config.hidden_layers);
        sizes.push(NUM_ACTIONS);
        let mut init = ChaCha8Rng::seed_from_u64(seeds.gen());
        let q = Mlp::new(&sizes, &mut init);
        let policy = Mlp::new(&sizes, &mut init);
        let memory_seed = seeds.gen();
        let mut agent = NfspAgent {
            game,
            seat,
            target: TargetParams::new(&q),
            ws: q.workspace(),
            q,
            policy,
            rl_memory: ReplayMemory::new(config.rl_memory, config.rl_capacity, memory_seed),
            sl_memory: ReplayMemory::new(config.sl_memory, config.sl_capacity, memory_seed ^ 1),
            mode: PolicyMode::AveragePolicy,
            counters: AgentCounters::default(),
            mode_rng: ChaCha8Rng::seed_from_u64(seeds.gen()),
            act_rng: ChaCha8Rng::seed_from_u64(seeds.gen()),
            rl_rng: ChaCha8Rng::seed_from_u64(seeds.gen()),
            sl_rng: ChaCha8Rng::seed_from_u64(seeds.gen()),
            memory_seed,
            pending: None,
            q_loss: (0.0, 0),
            policy_loss: (0.0, 0),
            config,
        };
        agent.mode =
            if agent.config.anticipatory >= 1.0 { PolicyMode::BestResponse } else { PolicyMode::AveragePolicy };
        Ok(agent)
    }

    pub fn game(&self) -> Game {
        self.game
    }

    pub fn seat(&self) -> PlayerId {
        self.seat
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn mode(&self) -> PolicyMode {
        self.mode
    }

    pub fn counters(&self) -> AgentCounters {
        self.counters
    }

    pub fn q_network(&self) -> &Mlp {
        &self.q
    }

    #[cfg(test)]
    pub(crate) fn replace_q_network(&mut self, net: Mlp) {
        self.q = net;
    }

    pub fn target(&self) -> &TargetParams {
        &self.target
    }

    pub fn policy_network(&self) -> &Mlp {
        &self.policy
    }

    pub fn rl_memory(&self) -> &ReplayMemory<Transition> {
        &self.rl_memory
    }

    pub fn sl_memory(&self) -> &ReplayMemory<BehaviourTuple> {
        &self.sl_memory
    }

    /// Current exploration rate of the best-response policy.
    pub fn epsilon(&self) -> f64 {
        let clock = match self.config.exploration_clock {
            ExplorationClock::Episodes => self.counters.episodes,
            ExplorationClock::QUpdates => self.counters.q_updates,
        };
        self.config.epsilon(clock)
    }

    /// Draws the policy for the coming episode.
    pub fn begin_episode(&mut self) -> PolicyMode {
        // drawn even at the extremes so the stream does not depend on eta
        let u: f64 = self.mode_rng.gen();
        self.mode = if u < self.config.anticipatory { PolicyMode::BestResponse } else { PolicyMode::AveragePolicy };
        self.pending = None;
        self.mode
    }

    /// Chooses an action under the current episode's policy without
    /// recording anything.
    pub fn act(&mut self, info: &InfoState) -> PokerAction {
        self.act_on(info.features(), info.legal())
    }

    fn act_on(&mut self, features: &Features, legal: LegalMask) -> PokerAction {
        assert!(!legal.is_empty(), "no legal action to choose from");
        match self.mode {
            PolicyMode::BestResponse => {
                let eps = self.epsilon();
                if self.act_rng.gen::<f64>() < eps {
                    let i = self.act_rng.gen_range(0..legal.count());
                    legal.iter().nth(i).expect("index below count")
                } else {
                    let q = self.q.forward_with(features, &mut self.ws);
                    PokerAction::from_index(masked_argmax(q, legal).0)
                }
            }
            PolicyMode::AveragePolicy => {
                let p = masked_softmax(self.policy.forward_with(features, &mut self.ws), legal);
                sample_index(&p, self.act_rng.gen())
            }
        }
    }

    /// Stores an own-perspective transition, and the behaviour tuple when
    /// the episode follows the best response.
    pub fn observe(&mut self, transition: Transition) {
        if self.mode == PolicyMode::BestResponse {
            self.sl_memory.push(BehaviourTuple {
                state: transition.state.clone(),
                action: transition.action,
                legal: transition.legal,
            });
        }
        self.rl_memory.push(transition);
    }

    /// Counts one own step and runs a learning phase when one is due.
    pub fn train_step(&mut self) -> Result<StepLosses, AgentError> {
        self.counters.steps += 1;
        let mut out = StepLosses::default();
        if self.counters.steps % self.config.learn_every != 0 {
            return Ok(out);
        }
        let batch = self.config.batch_size;
        for _ in 0..self.config.updates_per_learn {
            if self.rl_memory.len() >= batch {
                let sample = sample_minibatch(&self.rl_memory, batch, &mut self.rl_rng)?;
                let loss = neural::q_update(&mut self.q, &mut self.target, &sample, &self.config.rl_sgd())?;
                self.counters.q_updates += 1;
                self.q_loss.0 += loss;
                self.q_loss.1 += 1;
                out.q = Some(loss);
                if self.target.staleness() >= self.config.target_refit_every {
                    if !self.q.is_finite() || !self.policy.is_finite() {
                        return Err(AgentError::NonFiniteParameters);
                    }
                    self.target.refit(&self.q);
                    self.counters.target_refits += 1;
                }
            }
            if self.config.train_policy && self.sl_memory.len() >= batch {
                let sample = sample_minibatch(&self.sl_memory, batch, &mut self.sl_rng)?;
                let loss = neural::policy_update(&mut self.policy, &sample, &self.config.sl_sgd())?;
                self.counters.policy_updates += 1;
                self.policy_loss.0 += loss;
                self.policy_loss.1 += 1;
                out.policy = Some(loss);
            }
        }
        Ok(out)
    }

    /// One own decision inside a self-play episode: completes the previous
    /// transition, acts and learns.
    pub fn step(&mut self, info: &InfoState) -> Result<PokerAction, AgentError> {
        let features = info.features();
        let legal = info.legal();
        if let Some(p) = self.pending.take() {
            self.observe(Transition {
                state: p.state,
                legal: p.legal,
                action: p.action,
                reward: 0.0,
                next: Some((features.clone(), legal)),
            });
        }
        let action = self.act_on(features, legal);
        self.pending = Some(Pending { state: features.clone(), legal, action: action.index() as u8 });
        self.train_step()?;
        Ok(action)
    }

    /// Closes the episode with the agent's chip outcome.
    pub fn end_episode(&mut self, payoff: f64) {
        if let Some(p) = self.pending.take() {
            self.observe(Transition {
                state: p.state,
                legal: p.legal,
                action: p.action,
                reward: payoff * self.config.reward_scale,
                next: None,
            });
        }
        self.counters.episodes += 1;
        if self.mode == PolicyMode::BestResponse {
            self.counters.best_response_episodes += 1;
        }
    }

    /// Mean Q and policy losses since the previous call.
    pub fn take_losses(&mut self) -> (Option<f64>, Option<f64>) {
        let mean = |acc: &mut (f64, u64)| {
            let m = (acc.1 > 0).then(|| acc.0 / acc.1 as f64);
            *acc = (0.0, 0);
            m
        };
        (mean(&mut self.q_loss), mean(&mut self.policy_loss))
    }

    /// Tabular form of the average-policy network over every information
    /// state of the agent's seat.
    pub fn extract_average_strategy(&self, tree: &GameTree) -> BehaviouralStrategy {
        self.tabulate(tree, |agent, f, legal| masked_softmax(&agent.policy.forward(f), legal))
    }

    /// Point mass on the most probable action of the average policy.
    pub fn extract_greedy_average(&self, tree: &GameTree) -> BehaviouralStrategy {
        self.tabulate(tree, |agent, f, legal| {
            point_mass(masked_argmax(&masked_softmax(&agent.policy.forward(f), legal), legal).0)
        })
    }

    /// Point mass on the action with the largest predicted value.
    pub fn extract_best_response(&self, tree: &GameTree) -> BehaviouralStrategy {
        self.tabulate(tree, |agent, f, legal| point_mass(masked_argmax(&agent.q.forward(f), legal).0))
    }

    fn tabulate(
        &self,
        tree: &GameTree,
        row: impl Fn(&Self, &Features, LegalMask) -> [f64; NUM_ACTIONS],
    ) -> BehaviouralStrategy {
        let mut s = BehaviouralStrategy::new();
        for &i in tree.player_infosets(self.seat) {
            let info = &tree.infosets()[i];
            let p = row(self, &info.features, info.legal);
            s.insert(info.key.clone(), info.legal.iter().map(|a| p[a.index()]).collect());
        }
        s
    }

    /// Writes `q.bin`, `target.bin`, `policy.bin` and `state.json` into
    /// `dir`. Replay memories are not saved.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), AgentError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        self.q.save(dir.join("q.bin"))?;
        self.target.net().save(dir.join("target.bin"))?;
        self.policy.save(dir.join("policy.bin"))?;
        let state = SavedState {
            game: self.game,
            seat: self.seat,
            config: self.config.clone(),
            counters: self.counters,
            target_staleness: self.target.staleness(),
            mode_rng: self.mode_rng.clone(),
            act_rng: self.act_rng.clone(),
            rl_rng: self.rl_rng.clone(),
            sl_rng: self.sl_rng.clone(),
            memory_seed: self.memory_seed,
        };
        fs::write(dir.join("state.json"), serde_json::to_string_pretty(&state)? + "\n")?;
        Ok(())
    }

    /// Restores networks, counters and random streams. Memories start empty.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, AgentError> {
        let dir = dir.as_ref();
        let state: SavedState = serde_json::from_str(&fs::read_to_string(dir.join("state.json"))?)?;
        state.config.validate()?;
        let q = Mlp::load(dir.join("q.bin"))?;
        let target = Mlp::load(dir.join("target.bin"))?;
        let policy = Mlp::load(dir.join("policy.bin"))?;
        let width = state.game.spec().encoding_len();
        for net in [&q, &target, &policy] {
            if net.input_width() != width || net.output_width() != NUM_ACTIONS {
                return Err(AgentError::InvalidConfig(format!(
                    "checkpoint network {:?} does not fit {}",
                    net.sizes(),
                    state.game
                )));
            }
        }
        // fresh memory seeds so a resumed run does not replay the old stream
        let memory_seed = state.memory_seed.wrapping_add(state.counters.episodes);
        let config = state.config;
        Ok(NfspAgent {
            game: state.game,
            seat: state.seat,
            target: TargetParams::from_parts(target, state.target_staleness),
            ws: q.workspace(),
            q,
            policy,
            rl_memory: ReplayMemory::new(config.rl_memory, config.rl_capacity, memory_seed),
            sl_memory: ReplayMemory::new(config.sl_memory, config.sl_capacity, memory_seed ^ 1),
            mode: PolicyMode::AveragePolicy,
            counters: state.counters,
            mode_rng: state.mode_rng,
            act_rng: state.act_rng,
            rl_rng: state.rl_rng,
            sl_rng: state.sl_rng,
            memory_seed,
            pending: None,
            q_loss: (0.0, 0),
            policy_loss: (0.0, 0),
            config,
        })
    }
}

fn point_mass(index: usize) -> [f64; NUM_ACTIONS] {
    let mut p = [0.0; NUM_ACTIONS];
    p[index] = 1.0;
    p
}

/// Inverse-CDF draw from a distribution over the three actions.
pub(crate) fn sample_index(p: &[f64; NUM_ACTIONS], u: f64) -> PokerAction {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &pi) in p.iter().enumerate() {
        if pi > 0.0 {
            acc += pi;
            last = i;
            if u < acc {
                return PokerAction::from_index(i);
            }
        }
    }
    PokerAction::from_index(last)
}
