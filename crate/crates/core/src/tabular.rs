//! Tabular reference solvers for small grids: Q-learning and value
//! iteration. Both use the same transition model as the deep agents
//! (deterministic moves, infeasible actions masked) and serve as oracles.

use crate::error::{Error, Result};
use crate::marl::{feasible_argmax, EpsilonSchedule};
use crate::seed;
use crate::space::{ParameterSpace, StateVector};

/// Default largest grid the tabular solvers accept.
pub const DEFAULT_MAX_STATES: usize = 10_000;

/// One Q-learning update: `q + α (r + γ max_next - q)`.
pub fn q_update(q: f64, r: f64, max_next: f64, alpha: f64, gamma: f64) -> f64 {
    q + alpha * (r + gamma * max_next - q)
}

/// Dense `states × actions` table with infeasible entries flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    actions: usize,
    values: Vec<f64>,
    feasible: Vec<bool>,
}

impl QTable {
    pub fn zeros(space: &ParameterSpace) -> Self {
        let actions = space.action_count();
        let mut feasible = Vec::new();
        for s in space.states() {
            feasible.extend(space.feasible_mask(&s));
        }
        QTable {
            actions,
            values: vec![0.0; feasible.len()],
            feasible,
        }
    }

    pub fn states(&self) -> usize {
        self.values.len() / self.actions
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.actions + action] = value;
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.actions..(state + 1) * self.actions]
    }

    pub fn mask(&self, state: usize) -> &[bool] {
        &self.feasible[state * self.actions..(state + 1) * self.actions]
    }

    /// Feasible argmax at `state`, ties to the lowest action index.
    pub fn greedy(&self, state: usize) -> usize {
        feasible_argmax(self.row(state), self.mask(state))
            .expect("the stay action is always feasible")
    }

    pub fn max_feasible(&self, state: usize) -> f64 {
        self.get(state, self.greedy(state))
    }

    /// Greedy action for every state, in grid order.
    pub fn policy(&self) -> Vec<usize> {
        (0..self.states()).map(|s| self.greedy(s)).collect()
    }
}

fn check_size(space: &ParameterSpace, max_states: usize) -> Result<usize> {
    let states = space.grid_cardinality();
    if states > max_states as u128 {
        return Err(Error::CapExceeded {
            states,
            cap: max_states as u128,
        });
    }
    Ok(states as usize)
}

/// Deterministic successor and reward for every feasible `(state, action)`.
struct Model {
    actions: usize,
    next: Vec<Option<(usize, f64)>>,
}

impl Model {
    fn build<F>(space: &ParameterSpace, reward: &F) -> Result<Self>
    where
        F: Fn(&StateVector, &StateVector) -> f64,
    {
        let actions = space.action_count();
        let mut next = Vec::with_capacity(space.grid_cardinality() as usize * actions);
        for s in space.states() {
            for (a, ok) in space.feasible_mask(&s).into_iter().enumerate() {
                next.push(if ok {
                    let s2 = space.apply(&s, a)?;
                    Some((space.grid_index(&s2), reward(&s, &s2)))
                } else {
                    None
                });
            }
        }
        Ok(Model { actions, next })
    }

    fn backup(&self, s: usize, values: &[f64], gamma: f64) -> (usize, f64) {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for a in 0..self.actions {
            if let Some((s2, r)) = self.next[s * self.actions + a] {
                let q = r + gamma * values[s2];
                if q > best.1 {
                    best = (a, q);
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueIteration {
    /// Optimal value per state, in grid order.
    pub values: Vec<f64>,
    /// Greedy action per state, ties to the lowest index.
    pub policy: Vec<usize>,
    /// Sup-norm Bellman residual of `values`.
    pub residual: f64,
    pub sweeps: usize,
}

/// Value iteration until the sup-norm Bellman residual is at most `tol`.
///
/// `reward(s, s')` scores the deterministic move from `s` to `s'`.
pub fn value_iteration<F>(
    space: &ParameterSpace,
    reward: F,
    gamma: f64,
    tol: f64,
    max_states: usize,
) -> Result<ValueIteration>
where
    F: Fn(&StateVector, &StateVector) -> f64,
{
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Config(format!(
            "value iteration needs 0 <= gamma < 1, got {gamma}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let n = check_size(space, max_states)?;
    let model = Model::build(space, &reward)?;
    let mut values = vec![0.0; n];
    let mut sweeps = 0;
    loop {
        let next: Vec<f64> = (0..n).map(|s| model.backup(s, &values, gamma).1).collect();
        let diff = next
            .iter()
            .zip(&values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = next;
        sweeps += 1;
        if diff <= tol {
            break;
        }
    }
    let backups: Vec<(usize, f64)> = (0..n).map(|s| model.backup(s, &values, gamma)).collect();
    let residual = backups
        .iter()
        .zip(&values)
        .map(|((_, q), v)| (q - v).abs())
        .fold(0.0, f64::max);
    Ok(ValueIteration {
        values,
        policy: backups.into_iter().map(|(a, _)| a).collect(),
        residual,
        sweeps,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct QLearningParams {
    pub alpha: f64,
    pub gamma: f64,
    /// Probability of acting greedily, per the increasing ε-greedy rule.
    pub schedule: EpsilonSchedule,
    pub steps: usize,
    pub max_states: usize,
}

/// Tabular Q-learning along a single trajectory from a random start.
pub fn run_q_learning<F>(
    space: &ParameterSpace,
    reward: F,
    params: QLearningParams,
    seed: u64,
) -> Result<QTable>
where
    F: Fn(&StateVector, &StateVector) -> f64,
{
    if !(0.0..=1.0).contains(&params.alpha) || !(0.0..=1.0).contains(&params.gamma) {
        return Err(Error::Config("alpha and gamma must lie in [0, 1]".into()));
    }
    check_size(space, params.max_states)?;
    let model = Model::build(space, &reward)?;
    let mut q = QTable::zeros(space);
    let mut schedule = params.schedule;
    let mut rng = seed::named(seed, "tabular/explore");
    let mut s = space.grid_index(&space.random_state_with(&mut seed::named(seed, "tabular/start")));
    for _ in 0..params.steps {
        let epsilon = schedule.step();
        let a = crate::marl::epsilon_choose(epsilon, q.greedy(s), q.mask(s), &mut rng)?;
        let (s2, r) = model.next[s * model.actions + a].expect("chosen action is feasible");
        let updated = q_update(
            q.get(s, a),
            r,
            q.max_feasible(s2),
            params.alpha,
            params.gamma,
        );
        q.set(s, a, updated);
        s = s2;
    }
    Ok(q)
}
