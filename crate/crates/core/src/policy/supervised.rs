//! Regression from observations onto optimizer-mined actions.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, Optimizer, OptimizerKind};
use super::PolicyModel;
use crate::error::{Error, Result};
use crate::human::Target;
use crate::optimizer::Dataset;
use crate::seed::{self, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupervisedConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for SupervisedConfig {
    fn default() -> Self {
        Self { epochs: 100, batch_size: 8, learning_rate: 1e-3, optimizer: OptimizerKind::Adam, seed: 0 }
    }
}

impl SupervisedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || !(self.learning_rate > 0.0) {
            return Err(Error::invalid_arg("epochs, batch size and learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedReport {
    /// Mean squared error over the whole training set after each epoch.
    pub losses: Vec<f64>,
    pub rows: usize,
}

/// Mean over the batch of the per-sample mean squared error across the four
/// outputs. When `grad` is given, the gradient with respect to the network
/// parameters is added into it.
pub fn mse_loss(net: &Mlp, pairs: &[([f64; 12], [f64; 4])], mut grad: Option<&mut [f64]>) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::invalid_arg("empty batch"));
    }
    let scale = 1.0 / (pairs.len() * 4) as f64;
    let mut loss = 0.0;
    for (x, y) in pairs {
        let trace = net.trace(x)?;
        let out = trace.output();
        let diff: Vec<f64> = out.iter().zip(y).map(|(o, t)| o - t).collect();
        loss += diff.iter().map(|d| d * d).sum::<f64>() * scale;
        if let Some(g) = grad.as_deref_mut() {
            let dout: Vec<f64> = diff.iter().map(|d| 2.0 * d * scale).collect();
            net.backward(&trace, &dout, g);
        }
    }
    Ok(loss)
}

/// Trains a fresh 12-32-32-4 network on `ds` with shuffled mini-batches.
pub fn train_supervised(ds: &Dataset, target: Target, cfg: &SupervisedConfig) -> Result<(PolicyModel, SupervisedReport)> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::invalid_arg("training dataset is empty"));
    }
    let pairs: Vec<([f64; 12], [f64; 4])> =
        ds.rows.iter().map(|r| (r.observation.0, r.action.to_unit())).collect();
    let mut model = PolicyModel::supervised(target, &mut seed::rng(seed::derive(cfg.seed, Stream::Init, 0)));
    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, model.net.param_count());
    let mut rng = seed::rng(seed::derive(cfg.seed, Stream::Shuffle, 0));
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut grad = vec![0.0; model.net.param_count()];
    let mut losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<_> = chunk.iter().map(|&i| pairs[i]).collect();
            grad.iter_mut().for_each(|g| *g = 0.0);
            mse_loss(&model.net, &batch, Some(&mut grad))?;
            opt.step(model.net.params_mut(), &grad);
        }
        losses.push(mse_loss(&model.net, &pairs, None)?);
    }
    if !model.net.is_finite() {
        return Err(Error::InvalidState("training diverged to non-finite weights".into()));
    }
    Ok((model, SupervisedReport { losses, rows: pairs.len() }))
}
