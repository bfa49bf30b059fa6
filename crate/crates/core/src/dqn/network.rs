use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-layer Q-network: `outputs = W2 · relu(W1 · x + b1) + b2`.
///
/// Weights are stored row-major: `w1` is `hidden × inputs`, `w2` is
/// `outputs × hidden`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    inputs: usize,
    hidden: usize,
    outputs: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

/// Gradient of the loss with respect to every network parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradient {
    /// Flattened in the same order as [`QNetwork::params`].
    pub fn flatten(&self) -> Vec<f64> {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.flatten().iter().all(|&g| g == 0.0)
    }
}

impl QNetwork {
    /// All-zero network.
    pub fn zeros(inputs: usize, hidden: usize, outputs: usize) -> Self {
        QNetwork {
            inputs,
            hidden,
            outputs,
            w1: vec![0.0; hidden * inputs],
            b1: vec![0.0; hidden],
            w2: vec![0.0; outputs * hidden],
            b2: vec![0.0; outputs],
        }
    }

    /// Weights and biases uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn random<R: Rng + ?Sized>(
        inputs: usize,
        hidden: usize,
        outputs: usize,
        rng: &mut R,
    ) -> Self {
        let mut net = Self::zeros(inputs, hidden, outputs);
        let l1 = 1.0 / (inputs as f64).sqrt();
        let l2 = 1.0 / (hidden as f64).sqrt();
        for w in net.w1.iter_mut().chain(net.b1.iter_mut()) {
            *w = rng.random_range(-l1..=l1);
        }
        for w in net.w2.iter_mut().chain(net.b2.iter_mut()) {
            *w = rng.random_range(-l2..=l2);
        }
        net
    }

    /// Builds a network from explicit row-major weights.
    pub fn from_parts(
        inputs: usize,
        hidden: usize,
        outputs: usize,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: Vec<f64>,
    ) -> Result<Self> {
        let net = QNetwork {
            inputs,
            hidden,
            outputs,
            w1,
            b1,
            w2,
            b2,
        };
        net.validate()?;
        Ok(net)
    }

    /// Checks that every array matches the declared shape.
    pub fn validate(&self) -> Result<()> {
        let shapes = [
            (self.w1.len(), self.hidden * self.inputs),
            (self.b1.len(), self.hidden),
            (self.w2.len(), self.outputs * self.hidden),
            (self.b2.len(), self.outputs),
        ];
        for (got, expected) in shapes {
            if got != expected {
                return Err(Error::Arity { expected, got });
            }
        }
        if self.inputs == 0 || self.hidden == 0 || self.outputs == 0 {
            return Err(Error::Config("network layers must be non-empty".into()));
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    fn check_arity(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs {
            return Err(Error::Arity {
                expected: self.inputs,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Pre-activations of the hidden layer.
    fn hidden_pre(&self, x: &[f64], pre: &mut [f64]) {
        for (h, p) in pre.iter_mut().enumerate() {
            let row = &self.w1[h * self.inputs..(h + 1) * self.inputs];
            *p = self.b1[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    fn output_row(&self, a: usize, act: &[f64]) -> f64 {
        let row = &self.w2[a * self.hidden..(a + 1) * self.hidden];
        self.b2[a] + row.iter().zip(act).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Q-values of every action for input `x`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(x)?;
        let mut act = vec![0.0; self.hidden];
        self.hidden_pre(x, &mut act);
        for a in &mut act {
            *a = a.max(0.0);
        }
        Ok((0..self.outputs)
            .map(|a| self.output_row(a, &act))
            .collect())
    }

    /// Mean squared TD error over a batch and its gradient.
    ///
    /// Only the output of each sample's taken action contributes.
    pub fn loss_and_gradient(
        &self,
        features: &[Vec<f64>],
        actions: &[usize],
        targets: &[f64],
    ) -> Result<(f64, Gradient)> {
        if features.len() != actions.len() || features.len() != targets.len() {
            return Err(Error::Arity {
                expected: features.len(),
                got: targets.len().min(actions.len()),
            });
        }
        if features.is_empty() {
            return Err(Error::Config("empty training batch".into()));
        }
        let mut grad = Gradient {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.hidden],
            w2: vec![0.0; self.w2.len()],
            b2: vec![0.0; self.outputs],
        };
        let scale = 1.0 / features.len() as f64;
        let mut pre = vec![0.0; self.hidden];
        let mut act = vec![0.0; self.hidden];
        let mut loss = 0.0;
        for ((x, &a), &y) in features.iter().zip(actions).zip(targets) {
            self.check_arity(x)?;
            if a >= self.outputs {
                return Err(Error::Arity {
                    expected: self.outputs,
                    got: a + 1,
                });
            }
            self.hidden_pre(x, &mut pre);
            for (v, p) in act.iter_mut().zip(&pre) {
                *v = p.max(0.0);
            }
            let q = self.output_row(a, &act);
            let err = y - q;
            loss += err * err * scale;
            // dL/dq for this sample
            let g = -2.0 * err * scale;
            if g == 0.0 {
                continue;
            }
            grad.b2[a] += g;
            let w2_row = &self.w2[a * self.hidden..(a + 1) * self.hidden];
            let gw2_row = &mut grad.w2[a * self.hidden..(a + 1) * self.hidden];
            for h in 0..self.hidden {
                gw2_row[h] += g * act[h];
                if pre[h] > 0.0 {
                    let gh = g * w2_row[h];
                    grad.b1[h] += gh;
                    let gw1 = &mut grad.w1[h * self.inputs..(h + 1) * self.inputs];
                    for (gw, xi) in gw1.iter_mut().zip(x) {
                        *gw += gh * xi;
                    }
                }
            }
        }
        Ok((loss, grad))
    }

    /// Plain gradient descent: `θ ← θ − rate · ∇`.
    pub fn apply_gradient(&mut self, grad: &Gradient, rate: f64) {
        let pairs = [
            (&mut self.w1, &grad.w1),
            (&mut self.b1, &grad.b1),
            (&mut self.w2, &grad.w2),
            (&mut self.b2, &grad.b2),
        ];
        for (params, g) in pairs {
            for (p, gi) in params.iter_mut().zip(g) {
                *p -= rate * gi;
            }
        }
    }

    /// Every parameter as one flat vector: `w1, b1, w2, b2`.
    pub fn params(&self) -> Vec<f64> {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    /// Inverse of [`params`](Self::params).
    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        let total = self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len();
        if flat.len() != total {
            return Err(Error::Arity {
                expected: total,
                got: flat.len(),
            });
        }
        let mut rest = flat;
        for part in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            let (head, tail) = rest.split_at(part.len());
            part.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }

    /// Scales the output layer's weights and biases by `c`.
    pub fn scale_output(&mut self, c: f64) {
        for w in self.w2.iter_mut().chain(self.b2.iter_mut()) {
            *w *= c;
        }
    }
}
