//! Policies mapping an observation of the person to a grasp/release action,
//! and the two ways of training them: regression onto optimizer-mined
//! actions, and one-step PPO.
//!
//! Network outputs live in the unit box `[-1, 1]^4` and are scaled by
//! [`Action::HALF_RANGE`] into bed coordinates.

pub mod mlp;
mod ppo;
mod supervised;

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::env::{Action, Observation};
use crate::error::{Error, Result};
use crate::human::Target;

pub use mlp::{Activation, Layer, Mlp, Optimizer, OptimizerKind, Trace};
pub use ppo::{ppo_loss, ppo_train, BatchStats, PpoConfig, PpoReport, PpoSample};
pub use supervised::{mse_loss, train_supervised, SupervisedConfig, SupervisedReport};

/// Model file format version.
pub const MODEL_VERSION: u32 = 1;
pub const SUPERVISED_HIDDEN: usize = 32;
pub const PPO_HIDDEN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Supervised,
    Ppo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyModel {
    pub version: u32,
    pub mode: Mode,
    pub target: Target,
    /// Half-extent of the action box each tanh output is scaled by.
    pub bounds: [f64; 4],
    pub net: Mlp,
    /// PPO only: per-coordinate log standard deviation in unit-box units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_std: Option<[f64; 4]>,
    /// PPO only: state-value network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Mlp>,
}

impl PolicyModel {
    /// 12 → 32 → 32 → 4 with ReLU hidden units and tanh output.
    pub fn supervised<R: Rng + ?Sized>(target: Target, rng: &mut R) -> Self {
        let sizes = [Observation::LEN, SUPERVISED_HIDDEN, SUPERVISED_HIDDEN, Action::LEN];
        let net = Mlp::random(&sizes, Activation::Relu, Activation::Tanh, rng).expect("fixed sizes");
        Self { version: MODEL_VERSION, mode: Mode::Supervised, target, bounds: Action::HALF_RANGE, net, log_std: None, value: None }
    }

    /// 12 → 50 → 50 → 4 tanh policy with a 12 → 50 → 50 → 1 value network.
    pub fn ppo<R: Rng + ?Sized>(target: Target, init_log_std: f64, rng: &mut R) -> Self {
        let sizes = [Observation::LEN, PPO_HIDDEN, PPO_HIDDEN, Action::LEN];
        let net = Mlp::random(&sizes, Activation::Tanh, Activation::Tanh, rng).expect("fixed sizes");
        let value = Mlp::random(&[Observation::LEN, PPO_HIDDEN, PPO_HIDDEN, 1], Activation::Tanh, Activation::Identity, rng)
            .expect("fixed sizes");
        Self {
            version: MODEL_VERSION,
            mode: Mode::Ppo,
            target,
            bounds: Action::HALF_RANGE,
            net,
            log_std: Some([init_log_std; 4]),
            value: Some(value),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {}", self.version)));
        }
        self.net.validate()?;
        if self.net.inputs() != Observation::LEN || self.net.outputs() != Action::LEN {
            return Err(Error::Format("policy network must map 12 inputs to 4 outputs".into()));
        }
        if self.net.layers.last().map(|l| l.activation) != Some(Activation::Tanh) {
            return Err(Error::Format("policy output must be tanh".into()));
        }
        if self.bounds != Action::HALF_RANGE {
            return Err(Error::Format(format!("model bounds {:?} differ from the action box", self.bounds)));
        }
        match self.mode {
            Mode::Supervised => {
                if self.log_std.is_some() || self.value.is_some() {
                    return Err(Error::Format("supervised model carries PPO fields".into()));
                }
            }
            Mode::Ppo => {
                let v = self.value.as_ref().ok_or_else(|| Error::Format("PPO model lacks a value network".into()))?;
                v.validate()?;
                if v.inputs() != Observation::LEN || v.outputs() != 1 {
                    return Err(Error::Format("value network must map 12 inputs to 1 output".into()));
                }
                let ls = self.log_std.ok_or_else(|| Error::Format("PPO model lacks log-std".into()))?;
                if ls.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Format("non-finite log-std".into()));
                }
            }
        }
        Ok(())
    }

    /// Policy mean in the unit box.
    pub fn mean_unit(&self, obs: &[f64]) -> Result<[f64; 4]> {
        let out = self.net.forward(obs)?;
        Ok(std::array::from_fn(|i| out[i]))
    }

    /// Mean action, plus the state value for PPO models.
    pub fn forward(&self, obs: &[f64]) -> Result<(Action, Option<f64>)> {
        let u = self.mean_unit(obs)?;
        let value = match &self.value {
            Some(v) => Some(v.forward(obs)?[0]),
            None => None,
        };
        Ok((self.scale(u), value))
    }

    fn scale(&self, u: [f64; 4]) -> Action {
        Action(std::array::from_fn(|i| self.bounds[i] * u[i]))
    }

    /// Deterministic: the mean. Stochastic (PPO only): a Gaussian draw around
    /// the mean, clamped into the unit box. Returns the action and the raw
    /// unit-box sample before clamping.
    pub fn sample<R: Rng + ?Sized>(&self, obs: &Observation, deterministic: bool, rng: &mut R) -> Result<(Action, [f64; 4])> {
        let mean = self.mean_unit(&obs.0)?;
        let raw = match (deterministic, self.log_std) {
            (false, Some(ls)) => std::array::from_fn(|i| {
                let z: f64 = rng.sample(StandardNormal);
                mean[i] + ls[i].exp() * z
            }),
            _ => mean,
        };
        let clamped = raw.map(|u| u.clamp(-1.0, 1.0));
        Ok((self.scale(clamped), raw))
    }

    pub fn act<R: Rng + ?Sized>(&self, obs: &Observation, deterministic: bool, rng: &mut R) -> Result<Action> {
        Ok(self.sample(obs, deterministic, rng)?.0)
    }

    /// Number of trainable parameters: policy, log-std, then value network.
    pub fn param_count(&self) -> usize {
        self.net.param_count()
            + self.log_std.map_or(0, |l| l.len())
            + self.value.as_ref().map_or(0, Mlp::param_count)
    }

    /// Every trainable parameter in the order of [`PolicyModel::param_count`].
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        let ls = self.log_std.iter_mut().flat_map(|l| l.iter_mut());
        let v = self.value.iter_mut().flat_map(|v| v.params_mut());
        self.net.params_mut().chain(ls).chain(v)
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.net.params().copied().collect();
        out.extend(self.log_std.iter().flatten());
        if let Some(v) = &self.value {
            out.extend(v.params());
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Which training loss [`grad_check`] differentiates.
#[derive(Debug, Clone)]
pub enum CheckBatch {
    /// Observation and unit-box target pairs.
    Mse(Vec<([f64; 12], [f64; 4])>),
    Ppo { samples: Vec<PpoSample>, config: PpoConfig },
}

fn batch_loss(model: &PolicyModel, batch: &CheckBatch, grad: Option<&mut [f64]>) -> Result<f64> {
    match batch {
        CheckBatch::Mse(pairs) => mse_loss(&model.net, pairs, grad),
        CheckBatch::Ppo { samples, config } => ppo_loss(model, samples, config, grad),
    }
}

/// Analytic gradient of the batch loss against central differences with step
/// `h`; returns the largest relative error over all parameters. Components
/// where both gradients are below `1e-7` in magnitude are compared on that
/// absolute scale.
pub fn grad_check_with_step(model: &PolicyModel, batch: &CheckBatch, h: f64) -> Result<f64> {
    let (analytic, numeric) = gradients(model, batch, h)?;
    Ok(analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-7))
        .fold(0.0, f64::max))
}

pub fn grad_check(model: &PolicyModel, batch: &CheckBatch) -> Result<f64> {
    grad_check_with_step(model, batch, 1e-5)
}

/// Analytic and central-difference gradients of the batch loss.
pub fn gradients(model: &PolicyModel, batch: &CheckBatch, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let empty = match batch {
        CheckBatch::Mse(p) => p.is_empty(),
        CheckBatch::Ppo { samples, .. } => samples.is_empty(),
    };
    if empty {
        return Err(Error::invalid_arg("gradient check needs a nonempty batch"));
    }
    let n = match batch {
        CheckBatch::Mse(_) => model.net.param_count(),
        CheckBatch::Ppo { .. } => model.param_count(),
    };
    let mut analytic = vec![0.0; n];
    batch_loss(model, batch, Some(&mut analytic))?;
    let mut probe = model.clone();
    let mut numeric = Vec::with_capacity(n);
    for k in 0..n {
        let orig = model_param(&mut probe, k);
        *param_slot(&mut probe, k) = orig + h;
        let up = batch_loss(&probe, batch, None)?;
        *param_slot(&mut probe, k) = orig - h;
        let down = batch_loss(&probe, batch, None)?;
        *param_slot(&mut probe, k) = orig;
        numeric.push((up - down) / (2.0 * h));
    }
    Ok((analytic, numeric))
}

fn param_slot(model: &mut PolicyModel, k: usize) -> &mut f64 {
    model.params_mut().nth(k).expect("parameter index in range")
}

fn model_param(model: &mut PolicyModel, k: usize) -> f64 {
    *param_slot(model, k)
}
