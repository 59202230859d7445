use std::path::PathBuf;
use std::process::ExitCode;

use bedding::cli::{self, Command, Overrides};
use bedding::eval::Condition;
use bedding::human::Target;
use bedding::policy::Mode;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bedding", version, about = "Blanket manipulation: collect, train, evaluate, replay")]
struct Cli {
    #[command(subcommand)]
    command: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Mine high-reward actions with CMA-ES and write the filtered dataset.
    Collect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: Option<Target>,
        #[arg(long)]
        rollouts: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        keep_above: Option<f64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fit a policy to a dataset, or train one with PPO.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: Option<Target>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// PPO episode budget.
        #[arg(long)]
        rollouts: Option<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Score models under one or more conditions.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long = "model", num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long = "condition", num_args = 1..)]
        conditions: Vec<Condition>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Episode log to write.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Re-run one logged episode and write per-frame blanket snapshots.
    Replay {
        #[command(flatten)]
        common: Common,
        /// Episode log to read.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        episode: Option<usize>,
        /// Frame directory.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    workers: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "supervised" => Ok(Mode::Supervised),
        "ppo" => Ok(Mode::Ppo),
        _ => Err(format!("unknown mode '{s}' (supervised or ppo)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(cli::exit_code(&e))
        }
    }
}

fn run(verb: Verb) -> bedding::Result<()> {
    let mut o = Overrides::default();
    let (common, command) = match verb {
        Verb::Collect { common, target, rollouts, keep_above, output } => {
            o = Overrides { target, rollouts, keep_above, output, ..o };
            (common, Command::Collect)
        }
        Verb::Train { common, target, mode, dataset, rollouts, output } => {
            o = Overrides { target, mode, dataset, rollouts, output, ..o };
            (common, Command::Train)
        }
        Verb::Eval { common, models, trials, conditions, output, log } => {
            o = Overrides { models, trials, conditions, output, log, ..o };
            (common, Command::Eval)
        }
        Verb::Replay { common, log, episode, output } => {
            o = Overrides { log, episode, output, ..o };
            (common, Command::Replay)
        }
    };
    o.seed = common.seed;
    o.workers = common.workers;
    let cfg = cli::resolve(common.config.as_deref(), &o, command)?;
    if common.print_config {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    match command {
        Command::Collect => {
            let s = cli::cmd_collect(&cfg)?;
            println!(
                "{} rollouts over {} poses, {} kept above {} -> {}",
                s.rollouts,
                s.poses,
                s.kept,
                cfg.collect.keep_above,
                cfg.collect.output.display()
            );
        }
        Command::Train => {
            let s = cli::cmd_train(&cfg)?;
            let what = match s.mode {
                Mode::Supervised => "supervised, final loss",
                Mode::Ppo => "ppo, last batch reward",
            };
            println!("{} {what} {:.4} -> {}", s.target, s.last, s.output.display());
        }
        Command::Eval => {
            let rows = cli::cmd_eval(&cfg)?;
            for r in &rows {
                println!(
                    "{:<16} {:<15} F1 {:.3}  reward {:.1} (±{:.1})",
                    r.target.name(),
                    r.condition.name(),
                    r.metrics.f1,
                    r.metrics.mean_reward,
                    r.metrics.std_reward
                );
            }
        }
        Command::Replay => {
            let s = cli::cmd_replay(&cfg)?;
            println!(
                "{} frames from {} steps, reward {} -> {}",
                s.frames,
                s.steps,
                s.reward,
                cfg.replay.frames.display()
            );
        }
    }
    Ok(())
}
