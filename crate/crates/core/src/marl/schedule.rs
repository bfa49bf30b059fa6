use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Increasing ε-greedy schedule.
///
/// Here ε is the probability of acting *greedily*: it starts at `start`,
/// grows by `increment` every step and saturates at `max`. The value after
/// `t` steps is computed as `min(start + increment·t, max)` rather than by
/// repeated addition, so traces are exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    start: f64,
    increment: f64,
    max: f64,
    steps: u64,
}

impl EpsilonSchedule {
    pub fn new(increment: f64, max: f64) -> Result<Self> {
        Self::starting_at(0.0, increment, max)
    }

    pub fn starting_at(start: f64, increment: f64, max: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&max)
            || !(0.0..=max).contains(&start)
            || increment.is_nan()
            || increment < 0.0
        {
            return Err(Error::Config(format!(
                "epsilon schedule needs 0 <= start <= max <= 1 and increment >= 0 \
                 (start {start}, increment {increment}, max {max})"
            )));
        }
        Ok(EpsilonSchedule {
            start,
            increment,
            max,
            steps: 0,
        })
    }

    /// A schedule pinned at `epsilon`.
    pub fn fixed(epsilon: f64) -> Result<Self> {
        Self::starting_at(epsilon, 0.0, epsilon)
    }

    pub fn epsilon(&self) -> f64 {
        (self.start + self.increment * self.steps as f64).min(self.max)
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Advances one step and returns the new ε.
    pub fn step(&mut self) -> f64 {
        self.steps += 1;
        self.epsilon()
    }
}

pub(crate) fn choose_with<R, G>(
    epsilon: f64,
    mask: &[bool],
    rng: &mut R,
    greedy: G,
) -> Result<usize>
where
    R: Rng + ?Sized,
    G: FnOnce() -> Result<usize>,
{
    let coin: f64 = rng.random();
    if coin > epsilon {
        let feasible = mask.iter().filter(|&&ok| ok).count();
        if feasible == 0 {
            return Err(Error::NoFeasibleAction);
        }
        let pick = rng.random_range(0..feasible);
        Ok(mask
            .iter()
            .enumerate()
            .filter(|(_, &ok)| ok)
            .nth(pick)
            .map(|(k, _)| k)
            .expect("pick < feasible"))
    } else {
        greedy()
    }
}

/// With probability `1 - ε` a uniformly random feasible action, otherwise
/// `greedy_index`.
pub fn epsilon_choose<R: Rng + ?Sized>(
    epsilon: f64,
    greedy_index: usize,
    mask: &[bool],
    rng: &mut R,
) -> Result<usize> {
    choose_with(epsilon, mask, rng, || Ok(greedy_index))
}
