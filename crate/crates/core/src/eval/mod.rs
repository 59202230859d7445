//! Scoring trained policies: confusion counts over body points, F1 and
//! reward statistics, and the condition-by-target comparison table.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{
    Action, BeddingEnv, CoverageReport, EnvConfig, EnvState, Environment, EpisodeRecord, Observation, Outcome,
};
use crate::error::{Error, Result};
use crate::human::Target;
use crate::policy::PolicyModel;
use crate::seed::{self, Stream};

pub const DEFAULT_TRIALS: usize = 100;

/// Confusion counts over body points: uncovered target points are true
/// positives, uncovered non-target points false positives and target points
/// left covered false negatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn from_report(report: &CoverageReport) -> Self {
        Self {
            tp: report.target_uncovered,
            fp: report.non_target_uncovered,
            fn_: report.target_total - report.target_uncovered,
        }
    }

    /// `TP / (TP + (FP + FN) / 2)`, and 0 when nothing was found.
    pub fn f1(&self) -> f64 {
        if self.tp == 0 {
            return 0.0;
        }
        self.tp as f64 / (self.tp as f64 + 0.5 * (self.fp + self.fn_) as f64)
    }
}

impl std::ops::Add for Confusion {
    type Output = Confusion;
    fn add(self, o: Confusion) -> Confusion {
        Confusion { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_ }
    }
}

impl std::iter::Sum for Confusion {
    fn sum<I: Iterator<Item = Confusion>>(iter: I) -> Confusion {
        iter.fold(Confusion::default(), |a, b| a + b)
    }
}

/// (TP, FP, FN) of one episode.
pub fn metrics_from_report(report: &CoverageReport) -> (usize, usize, usize) {
    let c = Confusion::from_report(report);
    (c.tp, c.fp, c.fn_)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub observation: Observation,
    pub action: Action,
    pub confusion: Confusion,
    pub f1: f64,
    pub reward: f64,
    pub settled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Counts summed over every trial.
    pub confusion: Confusion,
    /// F1 of the summed counts.
    pub f1: f64,
    /// Mean of the per-trial F1 scores.
    pub mean_f1: f64,
    pub mean_reward: f64,
    /// Population standard deviation of the trial rewards.
    pub std_reward: f64,
    pub trials: Vec<TrialRecord>,
    /// Episode seeds whose reset failed and were replaced.
    pub skipped: Vec<u64>,
}

impl Metrics {
    pub fn from_trials(trials: Vec<TrialRecord>, skipped: Vec<u64>) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::invalid_arg("no trials to aggregate"));
        }
        let n = trials.len() as f64;
        let confusion: Confusion = trials.iter().map(|t| t.confusion).sum();
        let mean_reward = trials.iter().map(|t| t.reward).sum::<f64>() / n;
        let var = trials.iter().map(|t| (t.reward - mean_reward).powi(2)).sum::<f64>() / n;
        Ok(Self {
            confusion,
            f1: confusion.f1(),
            mean_f1: trials.iter().map(|t| t.f1).sum::<f64>() / n,
            mean_reward,
            std_reward: var.sqrt(),
            trials,
            skipped,
        })
    }
}

/// Runs `trials` episodes of `policy` on `env`. Trial `k` resets from
/// `derive(seed, Eval, k)`; seeds whose reset fails are skipped and later
/// indices fill in, so the result does not depend on thread count.
pub fn evaluate_with<E, P>(env: &E, policy: P, trials: usize, seed: u64) -> Result<Metrics>
where
    E: Environment,
    P: Fn(&Observation) -> Result<Action> + Sync,
{
    Ok(run_trials(env, policy, trials, seed, |_, _, _, _| ())?.0)
}

/// Like [`evaluate_with`], also calling `extra` on every finished episode
/// with its state, the proposed action and the outcome. The values come
/// back in trial order.
pub fn run_trials<E, P, X, F>(env: &E, policy: P, trials: usize, seed: u64, extra: F) -> Result<(Metrics, Vec<X>)>
where
    E: Environment,
    P: Fn(&Observation) -> Result<Action> + Sync,
    X: Send,
    F: Fn(&E::State, &Observation, &Action, &Outcome) -> X + Sync,
{
    if trials == 0 {
        return Err(Error::invalid_arg("evaluation needs at least one trial"));
    }
    let mut records = Vec::with_capacity(trials);
    let mut extras = Vec::with_capacity(trials);
    let mut skipped = Vec::new();
    let mut next = 0u64;
    while records.len() < trials {
        let ids: Vec<u64> = (next..next + (trials - records.len()) as u64).collect();
        next += ids.len() as u64;
        let results: Vec<Result<Option<(TrialRecord, X)>>> = ids
            .par_iter()
            .map(|&k| {
                let s = seed::derive(seed, Stream::Eval, k);
                let (state, obs) = match env.reset(s) {
                    Ok(r) => r,
                    Err(Error::ResetFailed { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                };
                let proposed = policy(&obs)?;
                let outcome = env.execute(&state, &proposed)?;
                let confusion = Confusion::from_report(&outcome.report);
                let x = extra(&state, &obs, &proposed, &outcome);
                let record = TrialRecord {
                    index: 0,
                    seed: s,
                    observation: obs,
                    action: outcome.action,
                    confusion,
                    f1: confusion.f1(),
                    reward: outcome.reward.total,
                    settled: outcome.settled,
                };
                Ok(Some((record, x)))
            })
            .collect();
        for (k, r) in ids.iter().zip(results) {
            match r? {
                Some((mut t, x)) => {
                    t.index = records.len();
                    records.push(t);
                    extras.push(x);
                }
                None => skipped.push(seed::derive(seed, Stream::Eval, *k)),
            }
        }
        if skipped.len() > 100 + 10 * records.len() {
            return Err(Error::InvalidState("too many failed resets during evaluation".into()));
        }
    }
    Ok((Metrics::from_trials(records, skipped)?, extras))
}

/// Evaluates the deterministic (mean) action of `model`.
pub fn evaluate(model: &PolicyModel, config: &EnvConfig, trials: usize, seed: u64) -> Result<Metrics> {
    Ok(evaluate_logged(model, config, trials, seed)?.0)
}

/// [`evaluate`] plus one episode-log record per trial.
pub fn evaluate_logged(
    model: &PolicyModel,
    config: &EnvConfig,
    trials: usize,
    seed: u64,
) -> Result<(Metrics, Vec<EpisodeRecord>)> {
    let env = BeddingEnv::new(config.clone())?;
    let target = config.target.name();
    run_trials(
        &env,
        |obs: &Observation| Ok(model.forward(&obs.0)?.0),
        trials,
        seed,
        |state: &EnvState, obs, proposed, outcome| {
            EpisodeRecord::new(state.seed, target, *obs, state.blanket, *proposed, outcome)
        },
    )
}

/// Evaluation setting: the training distribution, or one of the two
/// generalization shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Original,
    RandomBlanket,
    RandomBody,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Original, Condition::RandomBlanket, Condition::RandomBody];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Original => "original",
            Condition::RandomBlanket => "random_blanket",
            Condition::RandomBody => "random_body",
        }
    }

    pub fn apply(self, base: &EnvConfig) -> EnvConfig {
        let mut c = base.clone();
        match self {
            Condition::Original => {}
            Condition::RandomBlanket => c.vary_blanket = true,
            Condition::RandomBody => c.vary_body = true,
        }
        c
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid_arg(format!("unknown condition '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub target: Target,
    pub condition: Condition,
    pub metrics: Metrics,
}

/// Evaluates every model under every condition. Each model is scored on its
/// own target, with `base` supplying everything else; all cells share the
/// master `seed`, so conditions see the same trial seeds.
pub fn compare_conditions(
    models: &[PolicyModel],
    conditions: &[Condition],
    base: &EnvConfig,
    trials: usize,
    seed: u64,
) -> Result<Vec<EvalRow>> {
    Ok(compare_conditions_logged(models, conditions, base, trials, seed)?.0)
}

/// [`compare_conditions`] plus the episode log of every cell, tagged with its
/// condition, in row order.
pub fn compare_conditions_logged(
    models: &[PolicyModel],
    conditions: &[Condition],
    base: &EnvConfig,
    trials: usize,
    seed: u64,
) -> Result<(Vec<EvalRow>, Vec<EpisodeRecord>)> {
    let mut rows = Vec::with_capacity(models.len() * conditions.len());
    let mut log = Vec::new();
    for model in models {
        let config = EnvConfig { target: model.target, ..base.clone() };
        for &condition in conditions {
            let (metrics, records) = evaluate_logged(model, &condition.apply(&config), trials, seed)?;
            log.extend(records.into_iter().map(|r| EpisodeRecord { condition: Some(condition.name().into()), ..r }));
            rows.push(EvalRow { target: model.target, condition, metrics });
        }
    }
    Ok((rows, log))
}

pub const CSV_HEADER: [&str; 9] =
    ["target", "condition", "trials", "TP", "FP", "FN", "F1", "mean_reward", "std_reward"];

pub fn write_csv<W: Write>(rows: &[EvalRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.target.name().to_string(),
            r.condition.name().to_string(),
            m.trials.len().to_string(),
            m.confusion.tp.to_string(),
            m.confusion.fp.to_string(),
            m.confusion.fn_.to_string(),
            format!("{:.6}", m.f1),
            format!("{:.6}", m.mean_reward),
            format!("{:.6}", m.std_reward),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One line per trial: `target,condition,trial,seed,TP,FP,FN,F1,reward,settled`.
pub fn write_trials_csv<W: Write>(rows: &[EvalRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["target", "condition", "trial", "seed", "TP", "FP", "FN", "F1", "reward", "settled"])?;
    for r in rows {
        for t in &r.metrics.trials {
            w.write_record([
                r.target.name().to_string(),
                r.condition.name().to_string(),
                t.index.to_string(),
                t.seed.to_string(),
                t.confusion.tp.to_string(),
                t.confusion.fp.to_string(),
                t.confusion.fn_.to_string(),
                format!("{:.6}", t.f1),
                format!("{:.6}", t.reward),
                t.settled.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Targets down the side, one column group per condition. Each group shows
/// pooled F1, the mean of per-trial F1 and the mean reward with its spread.
pub fn markdown_table(rows: &[EvalRow]) -> String {
    let mut conditions: Vec<Condition> = Vec::new();
    let mut targets: Vec<Target> = Vec::new();
    for r in rows {
        if !conditions.contains(&r.condition) {
            conditions.push(r.condition);
        }
        if !targets.contains(&r.target) {
            targets.push(r.target);
        }
    }
    let mut s = String::from("| Target |");
    for c in &conditions {
        let _ = write!(s, " {0} F1 | {0} mean F1 | {0} μ_R |", c.name());
    }
    s.push_str("\n|---|");
    s.push_str(&"---:|".repeat(3 * conditions.len()));
    s.push('\n');
    for t in &targets {
        let _ = write!(s, "| {} |", t.title());
        for c in &conditions {
            match rows.iter().find(|r| r.target == *t && r.condition == *c) {
                Some(r) => {
                    let m = &r.metrics;
                    let _ = write!(s, " {:.2} | {:.2} | {:.1} (±{:.1}) |", m.f1, m.mean_f1, m.mean_reward, m.std_reward);
                }
                None => s.push_str(" - | - | - |"),
            }
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests;
