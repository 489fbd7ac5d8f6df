//! Command-line front end. Every command that draws random numbers takes
//! `--seed`, and reruns with the same arguments write identical files.

use std::fs::{self, File};
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::exact::{xfp_run, GameTree, StepsizeSchedule, StrategyProfile, XfpConfig};
use crate::game::{Game, PlayerId};

use super::{run_match, run_training, ExperimentConfig, HarnessError, MatchMode, PolicyRef, TrainOptions};

#[derive(Debug, Parser)]
#[command(name = "nfsp", version, about = "Fictitious self-play for limit poker games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full-width fictitious play with exact best responses.
    Xfp {
        #[arg(long, default_value = "leduc")]
        game: Game,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        /// `harmonic` or `constant:<c>`.
        #[arg(long, default_value = "harmonic")]
        stepsize: StepsizeSchedule,
        /// Probability of replacing a best-response decision by a uniform one.
        #[arg(long, default_value_t = 0.0)]
        br_noise: f64,
        #[arg(long, default_value_t = 10)]
        eval_every: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Curve CSV; printed to stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Writes the final average profile as strategy JSON.
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// Self-play training from a TOML experiment file.
    Train {
        config: PathBuf,
        /// Experiment checkpoint directory to continue from.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Overrides the file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the file's episode budget.
        #[arg(long)]
        episodes: Option<u64>,
        /// Overrides the metrics path.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Record elapsed seconds in the metrics file.
        #[arg(long)]
        wall_clock: bool,
    },
    /// Exploitability of a strategy JSON file covering both seats.
    Exploit {
        strategy: PathBuf,
        #[arg(long, default_value = "leduc")]
        game: Game,
    },
    /// Head-to-head match. Policies are `fold`, `call`, `raise`, `random`,
    /// a strategy JSON path, or `checkpoint:<dir>[:average|greedy|best-response]`.
    Match {
        first: PolicyRef,
        second: PolicyRef,
        #[arg(long, default_value = "lhe")]
        game: Game,
        #[arg(long, default_value_t = 10_000)]
        hands: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "duplicate")]
        mode: MatchModeArg,
        /// Writes a one-row CSV with the result.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Prints the information-state encoding length and its two sections.
    EncodeCheck { game: Game },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum MatchModeArg {
    Duplicate,
    Independent,
}

impl From<MatchModeArg> for MatchMode {
    fn from(m: MatchModeArg) -> Self {
        match m {
            MatchModeArg::Duplicate => MatchMode::Duplicate,
            MatchModeArg::Independent => MatchMode::Independent,
        }
    }
}

#[derive(Serialize)]
struct CurveRow {
    iteration: usize,
    exploitability: f64,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), HarnessError> {
    match cli.command {
        Command::Xfp { game, iterations, stepsize, br_noise, eval_every, seed, output, strategy } => {
            let config = XfpConfig { iterations, schedule: stepsize, noise: br_noise, eval_every, seed };
            let result = xfp_run(game, &config)?;
            let rows = result.curve.iter().map(|&(iteration, exploitability)| CurveRow { iteration, exploitability });
            match &output {
                Some(path) => write_csv(csv::Writer::from_writer(File::create(path)?), rows)?,
                None => write_csv(csv::Writer::from_writer(&mut *out), rows)?,
            }
            if let Some(path) = strategy {
                result.average.save(path)?;
            }
            if output.is_some() {
                writeln!(out, "iteration {iterations} exploitability {}", result.final_exploitability())?;
            }
        }
        Command::Train { config, resume, seed, episodes, metrics, wall_clock } => {
            let mut config = ExperimentConfig::load(config)?;
            config.seed = seed.unwrap_or(config.seed);
            config.episodes = episodes.unwrap_or(config.episodes);
            if metrics.is_some() {
                config.output.metrics = metrics;
            }
            let rows = run_training(&config, &TrainOptions { resume, wall_clock })?;
            if let Some(last) = rows.last() {
                writeln!(out, "episode {} metric {}", last.episode, last.exploitability_or_mbbh)?;
            }
        }
        Command::Exploit { strategy, game } => {
            let tree = GameTree::build(game)?;
            let profile = StrategyProfile::load(&tree, strategy)?;
            writeln!(out, "{}", tree.exploitability(&profile)?)?;
            for p in [PlayerId::ZERO, PlayerId::ONE] {
                let (_, value) = tree.best_response(&profile, p, 0.0, 0)?;
                writeln!(out, "best response {p} {value}")?;
            }
        }
        Command::Match { first, second, game, hands, seed, mode, output } => {
            let a = first.open(game)?;
            let b = second.open(game)?;
            let result = run_match(game, a.as_ref(), b.as_ref(), hands, seed, mode.into())?;
            if let Some(path) = output {
                if let Some(parent) = path.parent() {
                    fs::create_dir_all(parent)?;
                }
                write_csv(csv::Writer::from_writer(File::create(path)?), std::iter::once(result))?;
            }
            writeln!(out, "{:.3} mbb/h +- {:.3} over {} hands", result.mbb_per_hand, result.std_error, result.hands)?;
        }
        Command::EncodeCheck { game } => {
            let spec = game.spec();
            writeln!(out, "{}", spec.encoding_len())?;
            writeln!(out, "cards {}", spec.card_section_len())?;
            writeln!(out, "betting {}", spec.betting_section_len())?;
        }
    }
    Ok(())
}

fn write_csv<W: Write, T: Serialize>(
    mut writer: csv::Writer<W>,
    rows: impl IntoIterator<Item = T>,
) -> Result<(), HarnessError> {
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
