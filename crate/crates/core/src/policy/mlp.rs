//! Fully-connected networks over `f64` with hand-written backpropagation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative at pre-activation `x` whose output is `y`.
    #[inline]
    fn slope(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Dense layer `y = act(W x + b)`, `W` stored row-major as outputs x inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    /// Weights and biases uniform in `±1/sqrt(inputs)`.
    pub fn random<R: Rng + ?Sized>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let mut draw = || rng.random_range(-bound..bound);
        let weights = (0..inputs * outputs).map(|_| draw()).collect();
        let bias = (0..outputs).map(|_| draw()).collect();
        Self { inputs, outputs, activation, weights, bias }
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self { inputs, outputs, activation, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs] }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn pre_activation(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.inputs).zip(&self.bias) {
            out.push(b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>());
        }
    }
}

/// Intermediate values of one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `acts[0]` is the input, `acts[l + 1]` the output of layer `l`.
    pub acts: Vec<Vec<f64>>,
    pub pres: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("trace has an input")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// Network with the given layer widths, `hidden` on every hidden layer
    /// and `output` on the last.
    pub fn random<R: Rng + ?Sized>(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid_arg(format!("bad layer sizes {sizes:?}")));
        }
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| Layer::random(w[0], w[1], if i == last { output } else { hidden }, rng))
            .collect();
        Ok(Self { layers })
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().expect("at least one layer").outputs
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.inputs()];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Every parameter, layer by layer, weights before biases.
    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn is_finite(&self) -> bool {
        self.params().all(|p| p.is_finite())
    }

    /// Checks that consecutive layers fit together and buffers have the
    /// declared sizes.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Format("network has no layers".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs || l.inputs == 0 {
                return Err(Error::Format(format!("layer {i} has inconsistent shapes")));
            }
            if i > 0 && self.layers[i - 1].outputs != l.inputs {
                return Err(Error::Format(format!("layer {i} does not match its predecessor")));
            }
        }
        if !self.is_finite() {
            return Err(Error::Format("network has non-finite weights".into()));
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs() {
            return Err(Error::invalid_arg(format!(
                "network expects {} inputs, got {}",
                self.inputs(),
                x.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for l in &self.layers {
            l.pre_activation(&cur, &mut next);
            next.iter_mut().for_each(|v| *v = l.activation.apply(*v));
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    pub fn trace(&self, x: &[f64]) -> Result<Trace> {
        self.check_input(x)?;
        let mut acts = vec![x.to_vec()];
        let mut pres = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let mut pre = Vec::with_capacity(l.outputs);
            l.pre_activation(acts.last().expect("nonempty"), &mut pre);
            acts.push(pre.iter().map(|&v| l.activation.apply(v)).collect());
            pres.push(pre);
        }
        Ok(Trace { acts, pres })
    }

    /// Adds the gradient of a loss with respect to every parameter into
    /// `grad` (ordered as [`Mlp::params`]), given the loss gradient `dout`
    /// with respect to the network output. Returns the gradient with respect
    /// to the input.
    pub fn backward(&self, trace: &Trace, dout: &[f64], grad: &mut [f64]) -> Vec<f64> {
        debug_assert_eq!(grad.len(), self.param_count());
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut at = 0;
        for l in &self.layers {
            offsets.push(at);
            at += l.param_count();
        }
        let mut delta = dout.to_vec();
        for (li, l) in self.layers.iter().enumerate().rev() {
            let (pre, post, input) = (&trace.pres[li], &trace.acts[li + 1], &trace.acts[li]);
            for (j, d) in delta.iter_mut().enumerate() {
                *d *= l.activation.slope(pre[j], post[j]);
            }
            let (gw, gb) = grad[offsets[li]..offsets[li] + l.param_count()].split_at_mut(l.weights.len());
            for (j, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (g, x) in gw[j * l.inputs..(j + 1) * l.inputs].iter_mut().zip(input) {
                    *g += d * x;
                }
                gb[j] += d;
            }
            let mut below = vec![0.0; l.inputs];
            for (row, &d) in l.weights.chunks_exact(l.inputs).zip(&delta) {
                for (b, w) in below.iter_mut().zip(row) {
                    *b += d * w;
                }
            }
            delta = below;
        }
        delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// Adam with the usual moment decays, or plain SGD.
#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, params: usize) -> Self {
        Self { kind, lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; params], v: vec![0.0; params], t: 0 }
    }

    pub fn step<'a>(&mut self, params: impl Iterator<Item = &'a mut f64>, grad: &[f64]) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.zip(grad) {
                    *p -= self.lr * g;
                }
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let c1 = 1.0 - self.beta1.powi(self.t);
                let c2 = 1.0 - self.beta2.powi(self.t);
                for (((p, g), m), v) in params.zip(grad).zip(&mut self.m).zip(&mut self.v) {
                    *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                    *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                    *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
                }
            }
        }
    }
}
