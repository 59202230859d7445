//! Mining high-reward actions with CMA-ES, one pose at a time.

pub mod cma;

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{Action, Environment, Observation};
use crate::error::{Error, Result};
use crate::human::Target;
use crate::seed::{self, Stream};

pub use cma::{default_population, CmaState};

/// Rollouts spent on one pose before moving on.
pub const POSE_BUDGET: usize = 300;
/// A pose is considered solved once some action reaches this reward.
pub const SOLVED_REWARD: f64 = 95.0;
/// Rows with reward strictly above this survive [`filter_dataset`].
pub const KEEP_ABOVE: f64 = 90.0;
pub const SIGMA0: f64 = 0.3;
pub const POPULATION: usize = 8;

/// Maps an unbounded search point onto the action box through tanh.
pub fn action_from_search(x: &[f64]) -> Action {
    Action::from_unit(std::array::from_fn(|i| x[i].tanh()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub observation: Observation,
    pub action: Action,
    pub reward: f64,
    pub target: Target,
    pub pose_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<DatasetRow>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = (0..Observation::LEN).map(|i| format!("obs_{i}")).collect();
        h.extend((0..Action::LEN).map(|i| format!("act_{i}")));
        h.extend(["reward", "target", "pose_seed"].map(String::from));
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::header())?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.observation.0.iter().map(f64::to_string).collect();
            rec.extend(r.action.0.iter().map(f64::to_string));
            rec.push(r.reward.to_string());
            rec.push(r.target.name().to_string());
            rec.push(r.pose_seed.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
        if header != Self::header() {
            return Err(Error::Format(format!("unexpected dataset header {header:?}")));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i].parse().map_err(|_| {
                    Error::Format(format!("row {}: bad number '{}' in column {i}", line + 1, &rec[i]))
                })
            };
            let observation = Observation(std::array::from_fn(|i| num(i).unwrap_or(f64::NAN)));
            let action = Action(std::array::from_fn(|i| num(12 + i).unwrap_or(f64::NAN)));
            let reward = num(16)?;
            if observation.0.iter().chain(&action.0).any(|v| v.is_nan()) || !reward.is_finite() {
                return Err(Error::Format(format!("row {}: non-numeric or non-finite value", line + 1)));
            }
            let pose_seed = rec[18]
                .parse()
                .map_err(|_| Error::Format(format!("row {}: bad pose seed", line + 1)))?;
            rows.push(DatasetRow { observation, action, reward, target: rec[17].parse().map_err(|e: Error| Error::Format(format!("row {}: {e}", line + 1)))?, pose_seed });
        }
        Ok(Self { rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Keeps rows whose reward is strictly above `threshold`, in order.
pub fn filter_dataset(ds: &Dataset, threshold: f64) -> Dataset {
    Dataset { rows: ds.rows.iter().filter(|r| r.reward > threshold).cloned().collect() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollectConfig {
    pub rollouts: usize,
    pub pose_budget: usize,
    pub solved_reward: f64,
    pub sigma0: f64,
    pub population: usize,
    pub seed: u64,
}

impl Default for CollectConfig {
    fn default() -> Self {
        Self {
            rollouts: 5000,
            pose_budget: POSE_BUDGET,
            solved_reward: SOLVED_REWARD,
            sigma0: SIGMA0,
            population: POPULATION,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseSummary {
    pub pose_seed: u64,
    pub rollouts: usize,
    pub best_reward: f64,
    pub best_action: Action,
}

#[derive(Debug, Clone, Default)]
pub struct Collection {
    pub dataset: Dataset,
    pub poses: Vec<PoseSummary>,
    /// Pose seeds whose reset could not produce a valid drape.
    pub skipped: Vec<u64>,
    /// Covariance repairs summed over all CMA-ES runs.
    pub repairs: usize,
}

/// Runs CMA-ES on successive poses until `cfg.rollouts` actions have been
/// evaluated. A pose is abandoned once some action reaches
/// `cfg.solved_reward` or after `cfg.pose_budget` rollouts. Every evaluated
/// action becomes a dataset row. A generation cut short by either budget is
/// evaluated but not used to update the search distribution.
pub fn collect_dataset<E: Environment>(env: &E, target: Target, cfg: &CollectConfig) -> Result<Collection> {
    if cfg.rollouts == 0 || cfg.pose_budget == 0 {
        return Err(Error::invalid_arg("rollout budgets must be positive"));
    }
    let mut out = Collection::default();
    let mut pose_index = 0u64;
    let mut used = 0;
    while used < cfg.rollouts {
        let pose_seed = seed::derive(cfg.seed, Stream::Pose, pose_index);
        pose_index += 1;
        let state = match env.reset(pose_seed) {
            Ok((state, obs)) => (state, obs),
            Err(Error::ResetFailed { .. }) => {
                out.skipped.push(pose_seed);
                if out.skipped.len() > 100 && out.poses.is_empty() {
                    return Err(Error::InvalidState("no pose produced a valid reset".into()));
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let (state, obs) = state;
        let mut rng = seed::rng(seed::derive(cfg.seed, Stream::Cma, pose_index - 1));
        let mut es = CmaState::new(&[0.0; Action::LEN], cfg.sigma0, cfg.population)?;
        let mut summary =
            PoseSummary { pose_seed, rollouts: 0, best_reward: f64::NEG_INFINITY, best_action: Action([0.0; 4]) };
        loop {
            let room = (cfg.rollouts - used).min(cfg.pose_budget - summary.rollouts);
            let xs = es.ask(&mut rng)?;
            let take = room.min(xs.len());
            let actions: Vec<Action> = xs[..take].iter().map(|x| action_from_search(x)).collect();
            let outcomes: Vec<_> = actions
                .par_iter()
                .map(|a| env.execute(&state, a))
                .collect::<Result<Vec<_>>>()?;
            for o in &outcomes {
                out.dataset.rows.push(DatasetRow {
                    observation: obs,
                    action: o.action,
                    reward: o.reward.total,
                    target,
                    pose_seed,
                });
                if o.reward.total > summary.best_reward {
                    summary.best_reward = o.reward.total;
                    summary.best_action = o.action;
                }
            }
            used += take;
            summary.rollouts += take;
            if take < xs.len() {
                break;
            }
            let fitness: Vec<f64> = outcomes.iter().map(|o| -o.reward.total).collect();
            es.tell(&xs, &fitness)?;
            if summary.best_reward >= cfg.solved_reward
                || summary.rollouts >= cfg.pose_budget
                || used >= cfg.rollouts
            {
                break;
            }
        }
        out.repairs += es.repairs;
        out.poses.push(summary);
    }
    Ok(out)
}
