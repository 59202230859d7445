//! The four run commands behind the `bedding` binary, callable directly.
//!
//! Each takes a resolved [`RunConfig`], writes its files and returns a short
//! summary. Outputs depend only on the config, so repeating a command with
//! the same config and seed rewrites the same bytes.

mod config;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub use config::{
    CollectSection, Command, EvalSection, Overrides, ReplaySection, RunConfig, TrainSection, SCHEMA_VERSION,
};

use crate::env::{BeddingEnv, EnvConfig, Environment, EpisodeRecord};
use crate::error::{Error, Result};
use crate::eval::{compare_conditions_logged, markdown_table, write_csv, write_trials_csv, Condition, EvalRow};
use crate::human::Target;
use crate::optimizer::{collect_dataset, filter_dataset, CollectConfig, Dataset};
use crate::physics::Frame;
use crate::policy::{ppo_train, train_supervised, Mode, PolicyModel};

/// Process exit status for a failed command, one per error category.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 2,
        Error::Config(_) => 3,
        Error::Format(_) => 4,
        Error::Io(_) => 5,
        Error::Csv(_) => 6,
        Error::Json(_) => 7,
        Error::InvalidState(_) => 8,
        Error::OutOfBed(_) => 9,
        Error::ResetFailed { .. } => 10,
    }
}

/// Loads `path` (or starts from defaults), applies `overrides` and checks
/// the result.
pub fn resolve(path: Option<&Path>, overrides: &Overrides, command: Command) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p).map_err(at(p))?,
        None => RunConfig::default(),
    };
    overrides.apply(&mut cfg, command);
    cfg.sync_seeds();
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `f` on a pool of `workers` threads, or on the global pool when 0.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidState(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Puts the offending path into I/O error messages.
fn at(path: &Path) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let open = || -> Result<BufWriter<File>> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        Ok(BufWriter::new(File::create(path)?))
    };
    open().map_err(at(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectSummary {
    pub rollouts: usize,
    pub kept: usize,
    pub poses: usize,
    pub skipped_poses: usize,
    pub best_reward: f64,
}

/// CMA-ES collection on `config.env`, then the reward filter. Every rollout
/// goes to `collect.all_rows`; the survivors go to `collect.output`.
pub fn cmd_collect(config: &RunConfig) -> Result<CollectSummary> {
    let c = &config.collect;
    let env = BeddingEnv::new(config.env.clone())?;
    let cc = CollectConfig {
        rollouts: c.rollouts,
        pose_budget: c.pose_budget,
        solved_reward: c.solved_reward,
        sigma0: c.sigma0,
        population: c.population,
        seed: config.seed,
    };
    let collection = with_workers(config.workers, || collect_dataset(&env, config.env.target, &cc))?;
    let kept = filter_dataset(&collection.dataset, c.keep_above);
    collection.dataset.write_csv(create(&c.all_rows)?)?;
    kept.write_csv(create(&c.output)?)?;
    Ok(CollectSummary {
        rollouts: collection.dataset.len(),
        kept: kept.len(),
        poses: collection.poses.len(),
        skipped_poses: collection.skipped.len(),
        best_reward: collection.poses.iter().map(|p| p.best_reward).fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub mode: Mode,
    pub target: Target,
    /// Final training-set MSE (supervised) or mean reward of the last batch (PPO).
    pub last: f64,
    pub output: PathBuf,
}

/// Supervised regression on `train.dataset`, or PPO against `config.env`.
/// Writes the model and its learning curve.
pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    let t = &config.train;
    let target = config.env.target;
    let (model, last) = match t.mode {
        Mode::Supervised => {
            if !t.dataset.exists() {
                return Err(Error::invalid_arg(format!(
                    "supervised training needs a dataset; {} does not exist",
                    t.dataset.display()
                )));
            }
            let ds = Dataset::load(&t.dataset).map_err(at(&t.dataset))?;
            if let Some(row) = ds.rows.iter().find(|r| r.target != target) {
                return Err(Error::invalid_arg(format!(
                    "dataset holds {} rows but the run targets {}",
                    row.target.name(),
                    target.name()
                )));
            }
            let (model, report) = with_workers(config.workers, || train_supervised(&ds, target, &t.supervised))?;
            let mut w = csv::Writer::from_writer(create(&t.curve)?);
            w.write_record(["epoch", "loss"])?;
            for (i, l) in report.losses.iter().enumerate() {
                w.write_record([i.to_string(), l.to_string()])?;
            }
            w.flush()?;
            (model, report.losses.last().copied().unwrap_or(f64::NAN))
        }
        Mode::Ppo => {
            let env = BeddingEnv::new(config.env.clone())?;
            let (model, report) = with_workers(config.workers, || ppo_train(&env, target, &t.ppo, &mut |_| {}))?;
            let mut w = csv::Writer::from_writer(create(&t.curve)?);
            w.write_record(["batch", "episodes", "mean_reward", "loss_before", "loss_after", "mean_std"])?;
            for b in &report.batches {
                w.write_record([
                    b.index.to_string(),
                    b.episodes.to_string(),
                    b.mean_reward.to_string(),
                    b.loss_before.to_string(),
                    b.loss_after.to_string(),
                    b.mean_std.to_string(),
                ])?;
            }
            w.flush()?;
            (model, report.batches.last().map_or(f64::NAN, |b| b.mean_reward))
        }
    };
    if let Some(dir) = t.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    model.save(&t.output).map_err(at(&t.output))?;
    Ok(TrainSummary { mode: t.mode, target, last, output: t.output.clone() })
}

/// Scores every model in `eval.models` under every condition. Writes the
/// summary CSV, the Markdown table, per-trial rows and the episode log.
pub fn cmd_eval(config: &RunConfig) -> Result<Vec<EvalRow>> {
    let e = &config.eval;
    if e.models.is_empty() {
        return Err(Error::invalid_arg("no models to evaluate"));
    }
    let models = e.models.iter().map(|p| PolicyModel::load(p).map_err(at(p))).collect::<Result<Vec<_>>>()?;
    let (rows, log) = with_workers(config.workers, || {
        compare_conditions_logged(&models, &e.conditions, &config.env, e.trials, config.seed)
    })?;
    write_csv(&rows, create(&e.output)?)?;
    write_trials_csv(&rows, create(&e.trials_output)?)?;
    let mut md = create(&e.markdown)?;
    md.write_all(markdown_table(&rows).as_bytes())?;
    md.flush()?;
    let mut w = create(&e.log)?;
    for r in &log {
        r.write_line(&mut w)?;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySummary {
    pub frames: usize,
    pub steps: usize,
    pub reward: f64,
}

/// Environment settings an episode-log record was produced under.
pub fn replay_config(base: &EnvConfig, record: &EpisodeRecord) -> Result<EnvConfig> {
    let target: Target = record.target.parse()?;
    let config = EnvConfig { target, ..base.clone() };
    Ok(match &record.condition {
        Some(c) => c.parse::<Condition>()?.apply(&config),
        None => config,
    })
}

/// Re-runs episode `replay.episode` of `replay.log` and writes
/// `frame_NNNNN.json` into `replay.frames`: the reset blanket first, then
/// every `stride`-th physics step, then the final state. Fails unless the
/// re-run reproduces the logged blanket, observation and reward exactly.
pub fn cmd_replay(config: &RunConfig) -> Result<ReplaySummary> {
    let r = &config.replay;
    let file = File::open(&r.log).map_err(|e| at(&r.log)(e.into()))?;
    let records = EpisodeRecord::read_all(BufReader::new(file))?;
    let record = records.get(r.episode).ok_or_else(|| {
        Error::invalid_arg(format!("{} holds {} episodes, asked for #{}", r.log.display(), records.len(), r.episode))
    })?;
    let env = BeddingEnv::new(replay_config(&config.env, record)?)?;
    let (state, obs) = env.reset(record.seed)?;
    if obs != record.observation || state.blanket != record.blanket {
        return Err(Error::InvalidState(format!(
            "episode {} does not reset to the logged person and blanket; check the [env] settings",
            r.episode
        )));
    }
    fs::create_dir_all(&r.frames)?;
    let path = |i: usize| r.frames.join(format!("frame_{i:05}.json"));
    Frame::capture(&state.cloth, 0).write(&path(0))?;
    let mut frames = 1;
    let mut steps = 0;
    let mut failure = None;
    let mut last = None;
    let outcome = env.execute_observed(&state, &record.proposed, &mut |cloth| {
        steps += 1;
        if steps % r.stride == 0 && failure.is_none() {
            if let Err(e) = Frame::capture(cloth, frames).write(&path(frames)) {
                failure = Some(e);
            }
            frames += 1;
            last = None;
        } else {
            last = Some(Frame::capture(cloth, frames));
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if let Some(f) = last {
        f.write(&path(frames))?;
        frames += 1;
    }
    if outcome.reward.total.to_bits() != record.reward.to_bits() {
        return Err(Error::InvalidState(format!(
            "replayed reward {} differs from the logged {}",
            outcome.reward.total, record.reward
        )));
    }
    Ok(ReplaySummary { frames, steps, reward: outcome.reward.total })
}

#[cfg(test)]
mod tests;
