//! Single-agent deep Q-learning machinery: network, replay pool, TD targets,
//! gradient descent and target synchronization.

mod checkpoint;
mod network;
mod replay;

pub use checkpoint::{AgentCheckpoint, Checkpoint};
pub use network::{Gradient, QNetwork};
pub use replay::{ReplayBuffer, Transition};

use crate::error::{Error, Result};
use crate::space::ParameterSpace;

/// A minibatch with states pre-encoded for network input.
#[derive(Debug, Clone)]
pub struct Batch {
    pub features: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    /// `rewards[j][i]` is agent `i`'s reward for sample `j`.
    pub rewards: Vec<Vec<f64>>,
    pub next_features: Vec<Vec<f64>>,
    pub next_masks: Vec<Vec<bool>>,
    pub terminal: Vec<bool>,
}

impl Batch {
    pub fn encode<'a>(
        transitions: impl IntoIterator<Item = &'a Transition>,
        space: &ParameterSpace,
    ) -> Self {
        let mut b = Batch {
            features: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_features: Vec::new(),
            next_masks: Vec::new(),
            terminal: Vec::new(),
        };
        for t in transitions {
            b.features.push(space.encode(&t.state));
            b.actions.push(t.action);
            b.rewards.push(t.rewards.clone());
            b.next_features.push(space.encode(&t.next_state));
            b.next_masks.push(space.feasible_mask(&t.next_state));
            b.terminal.push(t.terminal);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Bootstrapped targets for `agent`:
    /// `y = r` when terminal, else `r + γ · max_{a' feasible} Q̂(s', a')`.
    pub fn td_targets(&self, target_net: &QNetwork, agent: usize, gamma: f64) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|j| {
                let r = *self.rewards[j].get(agent).ok_or(Error::Arity {
                    expected: agent + 1,
                    got: self.rewards[j].len(),
                })?;
                if self.terminal[j] || gamma == 0.0 {
                    return Ok(r);
                }
                let q = target_net.forward(&self.next_features[j])?;
                let best = q
                    .iter()
                    .zip(&self.next_masks[j])
                    .filter(|(_, &ok)| ok)
                    .map(|(&v, _)| v)
                    .fold(f64::NEG_INFINITY, f64::max);
                Ok(r + gamma * best)
            })
            .collect()
    }
}

/// TD targets for `agent` over a list of transitions.
pub fn td_targets(
    batch: &[Transition],
    target_net: &QNetwork,
    agent: usize,
    gamma: f64,
    space: &ParameterSpace,
) -> Result<Vec<f64>> {
    Batch::encode(batch, space).td_targets(target_net, agent, gamma)
}

/// One gradient-descent step on the mean squared TD error. Returns the loss
/// measured before the update.
pub fn gradient_step(
    net: &mut QNetwork,
    features: &[Vec<f64>],
    actions: &[usize],
    targets: &[f64],
    rate: f64,
) -> Result<f64> {
    let (loss, grad) = net.loss_and_gradient(features, actions, targets)?;
    net.apply_gradient(&grad, rate);
    Ok(loss)
}

/// A fresh target network: an exact copy of `online`.
pub fn sync_target(online: &QNetwork) -> QNetwork {
    online.clone()
}
