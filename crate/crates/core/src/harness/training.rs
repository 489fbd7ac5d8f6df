use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{self_play_episode, AgentError, NfspAgent};
use crate::exact::{GameTree, StrategyProfile};
use crate::game::{Game, PlayerId};
use crate::neural::NeuralError;

use super::config::ExperimentConfig;
use super::matches::{run_match, MatchMode};
use super::policy::{NetworkMode, NetworkPolicy};
use super::HarnessError;

/// One line of the metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub episode: u64,
    /// Exploitability in chips per hand for games with an exact solver,
    /// otherwise the win rate against the configured baseline in mbb/h.
    pub exploitability_or_mbbh: f64,
    pub q_loss: Option<f64>,
    pub pi_loss: Option<f64>,
    pub wall_clock_s: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Continue from an experiment checkpoint directory.
    pub resume: Option<PathBuf>,
    /// Fill the `wall_clock_s` column. Off by default so that reruns
    /// produce identical files.
    pub wall_clock: bool,
}

#[derive(Serialize, Deserialize)]
struct TrainerState {
    game: Game,
    episode: u64,
    chance: ChaCha8Rng,
}

/// Self-play between two independent agents, one per seat.
pub struct Trainer {
    config: ExperimentConfig,
    agents: [NfspAgent; 2],
    chance: ChaCha8Rng,
    episode: u64,
    tree: Option<GameTree>,
    started: Instant,
}

impl Trainer {
    pub fn new(config: ExperimentConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let mut master = ChaCha8Rng::seed_from_u64(config.seed);
        let [c0, c1] = config.seat_configs();
        let agents = [
            NfspAgent::new(config.game, PlayerId::ZERO, c0, master.next_u64())?,
            NfspAgent::new(config.game, PlayerId::ONE, c1, master.next_u64())?,
        ];
        let chance = ChaCha8Rng::seed_from_u64(master.next_u64());
        Self::assemble(config, agents, chance, 0)
    }

    /// Restores agents and the deal stream from `dir`. The episode budget
    /// and evaluation settings come from `config`.
    pub fn resume(config: ExperimentConfig, dir: impl AsRef<Path>) -> Result<Self, HarnessError> {
        config.validate()?;
        let dir = dir.as_ref();
        let state: TrainerState = serde_json::from_str(&fs::read_to_string(dir.join("trainer.json"))?)?;
        if state.game != config.game {
            return Err(HarnessError::Config(format!("checkpoint is for {}, config for {}", state.game, config.game)));
        }
        let agents = [NfspAgent::load(dir.join("agent-0"))?, NfspAgent::load(dir.join("agent-1"))?];
        Self::assemble(config, agents, state.chance, state.episode)
    }

    fn assemble(
        config: ExperimentConfig,
        agents: [NfspAgent; 2],
        chance: ChaCha8Rng,
        episode: u64,
    ) -> Result<Self, HarnessError> {
        let tree = match config.game {
            Game::Lhe => None,
            g => Some(GameTree::build(g)?),
        };
        Ok(Trainer { config, agents, chance, episode, tree, started: Instant::now() })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn agents(&self) -> &[NfspAgent; 2] {
        &self.agents
    }

    pub fn tree(&self) -> Option<&GameTree> {
        self.tree.as_ref()
    }

    /// Plays episodes until the counter reaches `target`.
    pub fn train_until(&mut self, target: u64) -> Result<(), HarnessError> {
        while self.episode < target {
            self_play_episode(self.config.game, &mut self.agents, &mut self.chance)?;
            self.episode += 1;
        }
        Ok(())
    }

    /// Tabular profile of both agents. Only for games with a compiled tree.
    pub fn profile(&self, mode: NetworkMode) -> Result<StrategyProfile, HarnessError> {
        let tree = self.tree.as_ref().ok_or(HarnessError::TooLarge(self.config.game))?;
        let extract = |a: &NfspAgent| match mode {
            NetworkMode::Average => a.extract_average_strategy(tree),
            NetworkMode::GreedyAverage => a.extract_greedy_average(tree),
            NetworkMode::BestResponse => a.extract_best_response(tree),
        };
        Ok(StrategyProfile::new(extract(&self.agents[0]), extract(&self.agents[1])))
    }

    pub fn exploitability(&self, mode: NetworkMode) -> Result<f64, HarnessError> {
        let profile = self.profile(mode)?;
        Ok(self.tree.as_ref().expect("profile checked the tree").exploitability(&profile)?)
    }

    /// The tracked metric of the average policies. Reads the networks only,
    /// so calling it never changes the training trajectory.
    pub fn evaluate(&self) -> Result<f64, HarnessError> {
        if self.tree.is_some() {
            return self.exploitability(NetworkMode::Average);
        }
        let policy = NetworkPolicy::from_agents(&self.agents, NetworkMode::Average);
        let eval = &self.config.evaluation;
        let seed = self.config.seed ^ self.episode.rotate_left(32);
        let hands = eval.hands & !1;
        Ok(run_match(self.config.game, &policy, &eval.baseline, hands, seed, MatchMode::Duplicate)?.mbb_per_hand)
    }

    fn take_losses(&mut self) -> (Option<f64>, Option<f64>) {
        let (q0, p0) = self.agents[0].take_losses();
        let (q1, p1) = self.agents[1].take_losses();
        let mean = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => Some((x + y) / 2.0),
            (x, y) => x.or(y),
        };
        (mean(q0, q1), mean(p0, p1))
    }

    /// Trains to the configured budget, handing each metrics row to
    /// `on_row` as soon as it is measured. A non-finite network halts the
    /// run after a diagnostic row whose metric is NaN.
    pub fn run(
        &mut self,
        wall_clock: bool,
        mut on_row: impl FnMut(&MetricsRow) -> Result<(), HarnessError>,
    ) -> Result<Vec<MetricsRow>, HarnessError> {
        let every = self.config.eval_every;
        let mut rows = Vec::new();
        while self.episode < self.config.episodes {
            let next = ((self.episode / every + 1) * every).min(self.config.episodes);
            let outcome = self.train_until(next);
            let (q_loss, pi_loss) = self.take_losses();
            let clock = wall_clock.then(|| self.started.elapsed().as_secs_f64());
            let halted = matches!(
                outcome,
                Err(HarnessError::Agent(
                    AgentError::NonFiniteParameters | AgentError::Neural(NeuralError::NonFinite(_))
                ))
            );
            let value = match &outcome {
                Ok(()) => self.evaluate()?,
                Err(_) if halted => f64::NAN,
                Err(_) => return outcome.map(|_| rows),
            };
            let row = MetricsRow {
                episode: self.episode,
                exploitability_or_mbbh: value,
                q_loss,
                pi_loss,
                wall_clock_s: clock,
            };
            on_row(&row)?;
            rows.push(row);
            outcome?;
        }
        Ok(rows)
    }

    /// Writes `agent-0/`, `agent-1/` and `trainer.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), HarnessError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        self.agents[0].save(dir.join("agent-0"))?;
        self.agents[1].save(dir.join("agent-1"))?;
        let state = TrainerState { game: self.config.game, episode: self.episode, chance: self.chance.clone() };
        fs::write(dir.join("trainer.json"), serde_json::to_string_pretty(&state)? + "\n")?;
        Ok(())
    }
}

/// Runs an experiment end to end: metrics go to the configured CSV (appended
/// to when resuming) and final checkpoints to the configured directory.
pub fn run_training(config: &ExperimentConfig, options: &TrainOptions) -> Result<Vec<MetricsRow>, HarnessError> {
    let mut trainer = match &options.resume {
        Some(dir) => Trainer::resume(config.clone(), dir)?,
        None => Trainer::new(config.clone())?,
    };
    let mut writer = match &config.output.metrics {
        Some(path) => Some(metrics_writer(path, options.resume.is_some())?),
        None => None,
    };
    let rows = trainer.run(options.wall_clock, |row| {
        if let Some(w) = writer.as_mut() {
            w.serialize(row)?;
            w.flush()?;
        }
        Ok(())
    })?;
    if let Some(dir) = &config.output.checkpoints {
        trainer.save(dir)?;
    }
    Ok(rows)
}

fn metrics_writer(path: &Path, append: bool) -> Result<csv::Writer<File>, HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let existing = append && path.exists() && fs::metadata(path)?.len() > 0;
    let file = if existing { OpenOptions::new().append(true).open(path)? } else { File::create(path)? };
    Ok(csv::WriterBuilder::new().has_headers(!existing).from_writer(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AgentConfig;

    fn tiny(game: Game, episodes: u64, eval_every: u64) -> ExperimentConfig {
        let agent = AgentConfig {
            hidden_layers: vec![16],
            rl_capacity: 2_000,
            sl_capacity: 5_000,
            batch_size: 32,
            learn_every: 32,
            ..AgentConfig::default()
        };
        ExperimentConfig::new(game, episodes, eval_every, 9).with_agent(agent)
    }

    #[test]
    fn rows_follow_the_cadence() {
        let rows = Trainer::new(tiny(Game::Kuhn, 2_500, 1_000)).unwrap().run(false, |_| Ok(())).unwrap();
        let episodes: Vec<u64> = rows.iter().map(|r| r.episode).collect();
        assert_eq!(episodes, [1_000, 2_000, 2_500]);
        assert!(rows.iter().all(|r| r.exploitability_or_mbbh.is_finite() && r.wall_clock_s.is_none()));
        assert!(rows[1].q_loss.is_some() && rows[1].pi_loss.is_some());
    }

    #[test]
    fn evaluation_does_not_perturb_training() {
        let finish = |eval_every| {
            let mut t = Trainer::new(tiny(Game::Leduc, 3_000, eval_every)).unwrap();
            t.run(false, |_| Ok(())).unwrap();
            (t.agents[0].policy_network().params(), t.agents[1].q_network().params())
        };
        assert_eq!(finish(250), finish(3_000));
    }

    #[test]
    fn csv_is_byte_identical_across_runs() {
        let dir = tempfile::tempdir().unwrap();
        let run = |name: &str| {
            let mut c = tiny(Game::Kuhn, 1_500, 500);
            c.output.metrics = Some(dir.path().join(name));
            run_training(&c, &TrainOptions::default()).unwrap();
            fs::read(dir.path().join(name)).unwrap()
        };
        let a = run("a.csv");
        assert_eq!(a, run("b.csv"));
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("episode,exploitability_or_mbbh,q_loss,pi_loss,wall_clock_s\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn resuming_matches_an_uninterrupted_run() {
        let dir = tempfile::tempdir().unwrap();
        let mut straight = Trainer::new(tiny(Game::Kuhn, 2_000, 1_000)).unwrap();
        straight.run(false, |_| Ok(())).unwrap();

        let mut first = Trainer::new(tiny(Game::Kuhn, 1_000, 1_000)).unwrap();
        first.run(false, |_| Ok(())).unwrap();
        first.save(dir.path()).unwrap();
        let mut second = Trainer::resume(tiny(Game::Kuhn, 2_000, 1_000), dir.path()).unwrap();
        assert_eq!(second.episode(), 1_000);
        let rows = second.run(false, |_| Ok(())).unwrap();
        assert_eq!(rows.len(), 1);
        // the replay memories restart empty, so only the deal stream and
        // the counters carry over exactly
        assert_eq!(second.chance, straight.chance);
        assert_eq!(second.agents[0].counters().episodes, 2_000);
    }

    #[test]
    fn diverging_networks_halt_with_a_diagnostic_row() {
        let mut c = tiny(Game::Leduc, 50_000, 10_000);
        c.agents[0].rl_learning_rate = 1e150;
        let mut rows = Vec::new();
        let err = Trainer::new(c)
            .unwrap()
            .run(false, |r| {
                rows.push(r.clone());
                Ok(())
            })
            .unwrap_err();
        assert!(matches!(err, HarnessError::Agent(_)), "{err}");
        let last = rows.last().unwrap();
        assert!(last.exploitability_or_mbbh.is_nan() && last.episode < 50_000);
    }

    #[test]
    fn holdem_rows_report_win_rates() {
        let mut c = tiny(Game::Lhe, 40, 40);
        c.evaluation.hands = 200;
        let rows = Trainer::new(c).unwrap().run(false, |_| Ok(())).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].exploitability_or_mbbh.is_finite());
    }
}
