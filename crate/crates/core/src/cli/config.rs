//! Run configuration: one TOML file per run, overridable from the command
//! line. Every section rejects unknown keys and fills missing ones from
//! [`crate::defaults`].
//!
//! ```toml
//! schema = 1
//! seed = 0
//! workers = 0            # 0 lets the thread pool pick
//!
//! [env]
//! target = "upper_body"
//! vary_blanket = false
//!
//! [collect]
//! rollouts = 5000
//! keep_above = 90.0
//! output = "dataset.csv"
//!
//! [train]
//! mode = "supervised"
//! dataset = "dataset.csv"
//! output = "model.json"
//!
//! [train.ppo]
//! learning_rate = 5e-5
//!
//! [eval]
//! models = ["model.json"]
//! trials = 100
//! conditions = ["original"]
//!
//! [replay]
//! log = "episodes.jsonl"
//! episode = 0
//! frames = "frames"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::eval::{Condition, DEFAULT_TRIALS};
use crate::human::Target;
use crate::optimizer::{KEEP_ABOVE, POPULATION, POSE_BUDGET, SIGMA0, SOLVED_REWARD};
use crate::policy::{Mode, PpoConfig, SupervisedConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema: u32,
    /// Master seed; every stochastic stream of the run derives from it.
    pub seed: u64,
    /// Worker threads for concurrent episodes, 0 for one per core.
    pub workers: usize,
    pub env: EnvConfig,
    pub collect: CollectSection,
    pub train: TrainSection,
    pub eval: EvalSection,
    pub replay: ReplaySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            seed: 0,
            workers: 0,
            env: EnvConfig::default(),
            collect: CollectSection::default(),
            train: TrainSection::default(),
            eval: EvalSection::default(),
            replay: ReplaySection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollectSection {
    pub rollouts: usize,
    pub pose_budget: usize,
    pub solved_reward: f64,
    /// Rows with reward strictly above this go into `output`.
    pub keep_above: f64,
    pub sigma0: f64,
    pub population: usize,
    /// Filtered training set.
    pub output: PathBuf,
    /// Every evaluated rollout, before filtering.
    pub all_rows: PathBuf,
}

impl Default for CollectSection {
    fn default() -> Self {
        Self {
            rollouts: 5000,
            pose_budget: POSE_BUDGET,
            solved_reward: SOLVED_REWARD,
            keep_above: KEEP_ABOVE,
            sigma0: SIGMA0,
            population: POPULATION,
            output: "dataset.csv".into(),
            all_rows: "rollouts.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub mode: Mode,
    /// Training set for supervised mode.
    pub dataset: PathBuf,
    pub output: PathBuf,
    /// Per-epoch losses (supervised) or per-batch statistics (PPO).
    pub curve: PathBuf,
    pub supervised: SupervisedConfig,
    pub ppo: PpoConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            mode: Mode::Supervised,
            dataset: "dataset.csv".into(),
            output: "model.json".into(),
            curve: "curve.csv".into(),
            supervised: SupervisedConfig::default(),
            ppo: PpoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// One model per target; each is scored on the target stored in it.
    pub models: Vec<PathBuf>,
    pub trials: usize,
    pub conditions: Vec<Condition>,
    pub output: PathBuf,
    pub markdown: PathBuf,
    /// Per-trial rows.
    pub trials_output: PathBuf,
    /// Episode log for replay, one JSON object per trial.
    pub log: PathBuf,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            models: vec!["model.json".into()],
            trials: DEFAULT_TRIALS,
            conditions: vec![Condition::Original],
            output: "results.csv".into(),
            markdown: "results.md".into(),
            trials_output: "trials.csv".into(),
            log: "episodes.jsonl".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReplaySection {
    pub log: PathBuf,
    /// Zero-based line of the log to replay.
    pub episode: usize,
    /// Directory receiving one JSON file per frame.
    pub frames: PathBuf,
    /// Keep every n-th physics step.
    pub stride: usize,
}

impl Default for ReplaySection {
    fn default() -> Self {
        Self { log: "episodes.jsonl".into(), episode: 0, frames: "frames".into(), stride: 10 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Seeds of every section follow the master seed.
    pub fn sync_seeds(&mut self) {
        self.train.supervised.seed = self.seed;
        self.train.ppo.seed = self.seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.train.supervised.validate()?;
        self.train.ppo.validate()?;
        if self.collect.rollouts == 0 || self.collect.pose_budget == 0 || self.collect.population < 2 {
            return Err(Error::invalid_arg("collect needs positive budgets and a population of at least 2"));
        }
        if !(self.collect.sigma0 > 0.0) {
            return Err(Error::invalid_arg("initial step size must be positive"));
        }
        if self.eval.trials == 0 || self.eval.conditions.is_empty() {
            return Err(Error::invalid_arg("eval needs at least one trial and one condition"));
        }
        if self.replay.stride == 0 {
            return Err(Error::invalid_arg("frame stride must be positive"));
        }
        Ok(())
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub target: Option<Target>,
    pub rollouts: Option<usize>,
    pub keep_above: Option<f64>,
    pub mode: Option<Mode>,
    pub dataset: Option<PathBuf>,
    pub models: Vec<PathBuf>,
    pub trials: Option<usize>,
    pub conditions: Vec<Condition>,
    pub output: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub episode: Option<usize>,
    pub frames: Option<PathBuf>,
}

/// Which command an [`Overrides::output`] path belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Collect,
    Train,
    Eval,
    Replay,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig, command: Command) {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.target {
            cfg.env.target = v;
        }
        if let Some(v) = self.rollouts {
            cfg.collect.rollouts = v;
            cfg.train.ppo.rollouts = v;
        }
        if let Some(v) = self.keep_above {
            cfg.collect.keep_above = v;
        }
        if let Some(v) = self.mode {
            cfg.train.mode = v;
        }
        if let Some(v) = &self.dataset {
            cfg.train.dataset = v.clone();
        }
        if !self.models.is_empty() {
            cfg.eval.models = self.models.clone();
        }
        if let Some(v) = self.trials {
            cfg.eval.trials = v;
        }
        if !self.conditions.is_empty() {
            cfg.eval.conditions = self.conditions.clone();
        }
        if let Some(v) = &self.log {
            match command {
                Command::Eval => cfg.eval.log = v.clone(),
                _ => cfg.replay.log = v.clone(),
            }
        }
        if let Some(v) = self.episode {
            cfg.replay.episode = v;
        }
        if let Some(v) = &self.frames {
            cfg.replay.frames = v.clone();
        }
        if let Some(v) = &self.output {
            match command {
                Command::Collect => cfg.collect.output = v.clone(),
                Command::Train => cfg.train.output = v.clone(),
                Command::Eval => cfg.eval.output = v.clone(),
                Command::Replay => cfg.replay.frames = v.clone(),
            }
        }
    }
}
