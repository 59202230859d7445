//! Clipped-surrogate policy gradient for single-step episodes.
//!
//! Each episode is one observation, one action and one terminal reward, so
//! there is no bootstrapping: the advantage is the scaled reward minus the
//! value network's prediction for that observation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mlp::{Optimizer, OptimizerKind};
use super::{Mode, PolicyModel};
use crate::env::{Environment, Observation};
use crate::error::{Error, Result};
use crate::human::Target;
use crate::seed::{self, Stream};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub rollouts: usize,
    /// Episodes collected between updates.
    pub batch_size: usize,
    /// Full-batch gradient steps per collected batch.
    pub updates_per_batch: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub clip: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub init_log_std: f64,
    /// Rewards are divided by this before entering the loss.
    pub reward_scale: f64,
    pub seed: u64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            rollouts: 5000,
            batch_size: 32,
            updates_per_batch: 50,
            learning_rate: 5e-5,
            optimizer: OptimizerKind::Adam,
            clip: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.0,
            init_log_std: 0.3f64.ln(),
            reward_scale: 100.0,
            seed: 0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rollouts == 0 || self.batch_size == 0 || self.updates_per_batch == 0 {
            return Err(Error::invalid_arg("rollouts, batch size and updates must be positive"));
        }
        let positive = [self.learning_rate, self.clip, self.reward_scale];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid_arg("learning rate, clip and reward scale must be positive"));
        }
        if !(self.value_coef >= 0.0 && self.entropy_coef >= 0.0 && self.init_log_std.is_finite()) {
            return Err(Error::invalid_arg("bad value/entropy coefficient or initial log-std"));
        }
        Ok(())
    }
}

/// One collected episode as the loss sees it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpoSample {
    pub observation: [f64; 12],
    /// Unit-box action sample before clamping.
    pub raw: [f64; 4],
    pub log_prob_old: f64,
    pub advantage: f64,
    /// Scaled reward, the value network's regression target.
    pub ret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub index: usize,
    pub episodes: usize,
    pub mean_reward: f64,
    pub loss_before: f64,
    pub loss_after: f64,
    pub mean_std: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PpoReport {
    pub batches: Vec<BatchStats>,
    /// Reward of every training episode, in collection order.
    pub rewards: Vec<f64>,
    /// Episode indices whose reset failed.
    pub skipped: Vec<u64>,
}

pub(super) fn log_prob(mean: &[f64], log_std: &[f64; 4], raw: &[f64; 4]) -> f64 {
    (0..4)
        .map(|j| {
            let z = (raw[j] - mean[j]) / log_std[j].exp();
            -0.5 * z * z - log_std[j] - 0.5 * LN_2PI
        })
        .sum()
}

/// Negative clipped surrogate plus weighted value error minus weighted
/// entropy, averaged over `samples`. The gradient, ordered as
/// [`PolicyModel::params_mut`], is added into `grad` when given.
pub fn ppo_loss(model: &PolicyModel, samples: &[PpoSample], cfg: &PpoConfig, mut grad: Option<&mut [f64]>) -> Result<f64> {
    if model.mode != Mode::Ppo {
        return Err(Error::invalid_arg("PPO loss needs a PPO model"));
    }
    if samples.is_empty() {
        return Err(Error::invalid_arg("empty batch"));
    }
    let log_std = model.log_std.expect("validated PPO model");
    let value = model.value.as_ref().expect("validated PPO model");
    let n_pi = model.net.param_count();
    let n = samples.len() as f64;
    let var: [f64; 4] = log_std.map(|l| (2.0 * l).exp());
    let mut loss = 0.0;
    for s in samples {
        let trace = model.net.trace(&s.observation)?;
        let mean = trace.output();
        let ratio = (log_prob(mean, &log_std, &s.raw) - s.log_prob_old).exp();
        let clipped = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip);
        let surrogate = (ratio * s.advantage).min(clipped * s.advantage);
        let vtrace = value.trace(&s.observation)?;
        let verr = vtrace.output()[0] - s.ret;
        loss += (-surrogate + cfg.value_coef * verr * verr) / n;

        if let Some(g) = grad.as_deref_mut() {
            let unclipped = if s.advantage >= 0.0 { ratio <= 1.0 + cfg.clip } else { ratio >= 1.0 - cfg.clip };
            let (g_pi, rest) = g.split_at_mut(n_pi);
            let (g_ls, g_v) = rest.split_at_mut(4);
            if unclipped && s.advantage != 0.0 {
                let w = -s.advantage * ratio / n;
                let dmean: Vec<f64> = (0..4).map(|j| w * (s.raw[j] - mean[j]) / var[j]).collect();
                model.net.backward(&trace, &dmean, g_pi);
                for j in 0..4 {
                    let d = s.raw[j] - mean[j];
                    g_ls[j] += w * (d * d / var[j] - 1.0);
                }
            }
            value.backward(&vtrace, &[cfg.value_coef * 2.0 * verr / n], g_v);
        }
    }
    let entropy: f64 = log_std.iter().map(|l| l + 0.5 * (LN_2PI + 1.0)).sum();
    loss -= cfg.entropy_coef * entropy;
    if let Some(g) = grad {
        for j in 0..4 {
            g[n_pi + j] -= cfg.entropy_coef;
        }
    }
    Ok(loss)
}

/// Trains a fresh PPO policy against `env`. Episode `k` resets from
/// `derive(seed, Episode, k)` and draws its action noise from
/// `derive(seed, Policy, k)`, so results do not depend on how many threads
/// run the batch. `on_batch` is called after every update round.
pub fn ppo_train<E: Environment>(
    env: &E,
    target: Target,
    cfg: &PpoConfig,
    on_batch: &mut dyn FnMut(&BatchStats),
) -> Result<(PolicyModel, PpoReport)> {
    cfg.validate()?;
    let mut model = PolicyModel::ppo(target, cfg.init_log_std, &mut seed::rng(seed::derive(cfg.seed, Stream::Init, 0)));
    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, model.param_count());
    let mut grad = vec![0.0; model.param_count()];
    let mut report = PpoReport::default();
    let mut next_episode = 0u64;
    while report.rewards.len() < cfg.rollouts {
        let want = cfg.batch_size.min(cfg.rollouts - report.rewards.len());
        let mut states: Vec<(u64, E::State, Observation)> = Vec::with_capacity(want);
        while states.len() < want {
            let ids: Vec<u64> = (next_episode..next_episode + (want - states.len()) as u64).collect();
            next_episode += ids.len() as u64;
            let resets: Vec<_> =
                ids.par_iter().map(|&k| (k, env.reset(seed::derive(cfg.seed, Stream::Episode, k)))).collect();
            for (k, r) in resets {
                match r {
                    Ok((s, o)) => states.push((k, s, o)),
                    Err(Error::ResetFailed { .. }) => report.skipped.push(k),
                    Err(e) => return Err(e),
                }
            }
            if report.skipped.len() > 100 + 10 * report.rewards.len() {
                return Err(Error::InvalidState("too many failed resets".into()));
            }
        }
        let snapshot = &model;
        let episodes: Vec<([f64; 4], Observation, f64)> = states
            .par_iter()
            .map(|(k, s, o)| {
                let mut rng = seed::rng(seed::derive(cfg.seed, Stream::Policy, *k));
                let (action, raw) = snapshot.sample(o, false, &mut rng)?;
                let outcome = env.execute(s, &action)?;
                Ok((raw, *o, outcome.reward.total))
            })
            .collect::<Result<_>>()?;
        drop(states);

        let log_std = model.log_std.expect("PPO model");
        let value = model.value.as_ref().expect("PPO model");
        let mut samples = Vec::with_capacity(episodes.len());
        for (raw, obs, reward) in &episodes {
            let mean = model.net.forward(&obs.0)?;
            let ret = reward / cfg.reward_scale;
            samples.push(PpoSample {
                observation: obs.0,
                raw: *raw,
                log_prob_old: log_prob(&mean, &log_std, raw),
                advantage: ret - value.forward(&obs.0)?[0],
                ret,
            });
        }
        let loss_before = ppo_loss(&model, &samples, cfg, None)?;
        for _ in 0..cfg.updates_per_batch {
            grad.iter_mut().for_each(|g| *g = 0.0);
            ppo_loss(&model, &samples, cfg, Some(&mut grad))?;
            opt.step(model.params_mut(), &grad);
        }
        if !model.params().iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidState("PPO diverged to non-finite parameters".into()));
        }
        let rewards: Vec<f64> = episodes.iter().map(|e| e.2).collect();
        let stats = BatchStats {
            index: report.batches.len(),
            episodes: rewards.len(),
            mean_reward: rewards.iter().sum::<f64>() / rewards.len() as f64,
            loss_before,
            loss_after: ppo_loss(&model, &samples, cfg, None)?,
            mean_std: model.log_std.expect("PPO model").iter().map(|l| l.exp()).sum::<f64>() / 4.0,
        };
        on_batch(&stats);
        report.rewards.extend(rewards);
        report.batches.push(stats);
    }
    Ok((model, report))
}
