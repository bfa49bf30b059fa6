//! Discrete parameter grids, the joint action set and state transitions.
//!
//! A [`ParameterSpace`] is an ordered list of process variables, each living
//! on an evenly spaced grid `low, low + u, ..., high`. Every time step the
//! optimizer moves each variable by `-u`, `0` or `+u`, which gives `3^n`
//! joint actions. Actions are indexed in base 3 with the first variable as
//! the most significant digit and digit `d` meaning delta `d - 1`, so for a
//! single variable the order is `[-1, 0, +1]` and the all-zero action sits
//! at index `(3^n - 1) / 2`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

const GRID_TOL: f64 = 1e-9;

/// One adjustable process variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSpec {
    pub name: String,
    pub low: f64,
    pub high: f64,
    pub unit_step: f64,
}

impl ParameterSpec {
    pub fn new(name: impl Into<String>, low: f64, high: f64, unit_step: f64) -> Self {
        ParameterSpec {
            name: name.into(),
            low,
            high,
            unit_step,
        }
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidSpec {
            name: self.name.clone(),
            reason: reason.into(),
        }
    }

    fn validate(&self) -> Result<usize> {
        if !(self.low.is_finite() && self.high.is_finite() && self.unit_step.is_finite()) {
            return Err(self.invalid("bounds and step must be finite"));
        }
        if self.unit_step <= 0.0 {
            return Err(self.invalid(format!("unit_step {} must be positive", self.unit_step)));
        }
        if self.low >= self.high {
            return Err(self.invalid(format!("low {} must be below high {}", self.low, self.high)));
        }
        let span = (self.high - self.low) / self.unit_step;
        let rounded = span.round();
        if (span - rounded).abs() > GRID_TOL * rounded.max(1.0) {
            return Err(self.invalid(format!(
                "range [{}, {}] is not a multiple of unit_step {}",
                self.low, self.high, self.unit_step
            )));
        }
        if rounded > (u32::MAX as f64) {
            return Err(self.invalid("too many grid levels"));
        }
        Ok(rounded as usize + 1)
    }

    /// Grid value at `level` (0-based).
    pub fn value_at(&self, level: usize) -> f64 {
        self.low + level as f64 * self.unit_step
    }

    /// Grid level of `value`, if it lies on the grid.
    pub fn level_of(&self, value: f64, levels: usize) -> Option<usize> {
        let r = (value - self.low) / self.unit_step;
        let k = r.round();
        if (r - k).abs() > GRID_TOL * k.abs().max(1.0) || k < 0.0 || k >= levels as f64 {
            None
        } else {
            Some(k as usize)
        }
    }
}

/// A concrete parameter solution; the Markov-game state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    /// Wraps raw values without checking them against any grid.
    pub fn from_raw(values: Vec<f64>) -> Self {
        StateVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Per-variable multipliers on the unit step, each in `{-1, 0, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionVector(Vec<i8>);

impl ActionVector {
    /// Builds an action from raw deltas; every entry must be -1, 0 or 1.
    pub fn new(deltas: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = deltas.iter().find(|d| !(-1..=1).contains(*d)) {
            return Err(Error::Config(format!(
                "action delta {bad} outside {{-1, 0, 1}}"
            )));
        }
        Ok(ActionVector(deltas))
    }

    pub fn deltas(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> ActionVector {
        ActionVector(self.0.iter().map(|d| -d).collect())
    }
}

/// The validated grid of all process variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace {
    specs: Vec<ParameterSpec>,
    levels: Vec<usize>,
    action_count: usize,
}

impl ParameterSpace {
    /// Validates `specs` and builds the space.
    pub fn new(specs: Vec<ParameterSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::EmptySpace);
        }
        let levels = specs
            .iter()
            .map(ParameterSpec::validate)
            .collect::<Result<Vec<_>>>()?;
        let n = u32::try_from(specs.len())
            .ok()
            .filter(|&n| n <= 20)
            .ok_or_else(|| Error::Config(format!("{} variables is too many", specs.len())))?;
        Ok(ParameterSpace {
            specs,
            levels,
            action_count: 3usize.pow(n),
        })
    }

    /// The four-variable ozonation grid: water content, temperature, pH, time.
    pub fn ozonation() -> Self {
        ParameterSpace::new(vec![
            ParameterSpec::new("water_content", 0.0, 150.0, 50.0),
            ParameterSpec::new("temperature", 0.0, 100.0, 10.0),
            ParameterSpec::new("ph", 1.0, 14.0, 1.0),
            ParameterSpec::new("time", 1.0, 60.0, 1.0),
        ])
        .expect("ozonation grid is valid")
    }

    pub fn specs(&self) -> &[ParameterSpec] {
        &self.specs
    }

    /// Number of variables `n`.
    pub fn dims(&self) -> usize {
        self.specs.len()
    }

    /// Grid points per variable.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// `3^n`.
    pub fn action_count(&self) -> usize {
        self.action_count
    }

    /// Index of the all-zero action.
    pub fn stay_action(&self) -> usize {
        (self.action_count - 1) / 2
    }

    /// Product of per-variable level counts.
    pub fn grid_cardinality(&self) -> u128 {
        self.levels.iter().map(|&l| l as u128).product()
    }

    /// Checks grid membership and wraps `values` as a state.
    pub fn state(&self, values: Vec<f64>) -> Result<StateVector> {
        if values.len() != self.dims() {
            return Err(Error::Arity {
                expected: self.dims(),
                got: values.len(),
            });
        }
        for (j, spec) in self.specs.iter().enumerate() {
            if spec.level_of(values[j], self.levels[j]).is_none() {
                return Err(Error::OffGrid {
                    values,
                    reason: format!("`{}` is outside or between grid points", spec.name),
                });
            }
        }
        Ok(StateVector(values))
    }

    /// Builds a state from per-variable grid levels, which must be in range.
    pub fn state_from_levels(&self, levels: &[usize]) -> StateVector {
        debug_assert_eq!(levels.len(), self.dims());
        StateVector(
            self.specs
                .iter()
                .zip(levels)
                .map(|(s, &l)| s.value_at(l))
                .collect(),
        )
    }

    /// Grid levels of a state previously validated against this space.
    pub fn levels_of(&self, state: &StateVector) -> Vec<usize> {
        self.specs
            .iter()
            .zip(&self.levels)
            .zip(state.values())
            .map(|((s, &l), &v)| s.level_of(v, l).expect("state is on the grid"))
            .collect()
    }

    /// Row-major grid index (first variable most significant).
    pub fn grid_index(&self, state: &StateVector) -> usize {
        self.levels_of(state)
            .iter()
            .zip(&self.levels)
            .fold(0, |acc, (&l, &size)| acc * size + l)
    }

    /// Inverse of [`grid_index`](Self::grid_index).
    pub fn state_at(&self, mut index: usize) -> StateVector {
        let mut levels = vec![0; self.dims()];
        for j in (0..self.dims()).rev() {
            levels[j] = index % self.levels[j];
            index /= self.levels[j];
        }
        self.state_from_levels(&levels)
    }

    /// Every grid state in lexicographic order.
    pub fn states(&self) -> impl Iterator<Item = StateVector> + '_ {
        let total = usize::try_from(self.grid_cardinality()).unwrap_or(usize::MAX);
        (0..total).map(move |i| self.state_at(i))
    }

    /// Decodes an action index into its deltas.
    pub fn action(&self, mut index: usize) -> ActionVector {
        assert!(index < self.action_count, "action index out of range");
        let mut deltas = vec![0i8; self.dims()];
        for d in deltas.iter_mut().rev() {
            *d = (index % 3) as i8 - 1;
            index /= 3;
        }
        ActionVector(deltas)
    }

    /// Encodes deltas back into an action index.
    pub fn action_index(&self, action: &ActionVector) -> Result<usize> {
        if action.0.len() != self.dims() {
            return Err(Error::Arity {
                expected: self.dims(),
                got: action.0.len(),
            });
        }
        Ok(action
            .0
            .iter()
            .fold(0usize, |acc, &d| acc * 3 + (d + 1) as usize))
    }

    /// All `3^n` actions in index order.
    pub fn enumerate_actions(&self) -> Vec<ActionVector> {
        (0..self.action_count).map(|k| self.action(k)).collect()
    }

    /// Index of the action with every delta negated.
    pub fn opposite_action(&self, index: usize) -> usize {
        self.action_count - 1 - index
    }

    /// Executes action `index` at `state`.
    pub fn apply(&self, state: &StateVector, index: usize) -> Result<StateVector> {
        let action = self.action(index);
        self.apply_vector(state, &action)
    }

    /// Executes `action` at `state`; leaving the grid is an error.
    pub fn apply_vector(&self, state: &StateVector, action: &ActionVector) -> Result<StateVector> {
        let index = self.action_index(action)?;
        let mut levels = self.levels_of(state);
        for (j, (&d, level)) in action.0.iter().zip(levels.iter_mut()).enumerate() {
            let next = *level as i64 + i64::from(d);
            if next < 0 || next >= self.levels[j] as i64 {
                return Err(Error::Infeasible {
                    state: state.0.clone(),
                    action: index,
                });
            }
            *level = next as usize;
        }
        Ok(self.state_from_levels(&levels))
    }

    /// `mask[k]` is true iff action `k` keeps every variable in bounds.
    pub fn feasible_mask(&self, state: &StateVector) -> Vec<bool> {
        let levels = self.levels_of(state);
        let allowed: Vec<[bool; 3]> = levels
            .iter()
            .zip(&self.levels)
            .map(|(&l, &size)| [l > 0, true, l + 1 < size])
            .collect();
        (0..self.action_count)
            .map(|mut k| {
                let mut ok = true;
                for a in allowed.iter().rev() {
                    ok &= a[k % 3];
                    k /= 3;
                }
                ok
            })
            .collect()
    }

    /// Min-max scales each component to `[0, 1]` for network input.
    pub fn encode(&self, state: &StateVector) -> Vec<f64> {
        self.specs
            .iter()
            .zip(state.values())
            .map(|(s, &v)| (v - s.low) / (s.high - s.low))
            .collect()
    }

    /// Uniform grid state drawn from `rng`.
    pub fn random_state_with<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector {
        let levels: Vec<usize> = self
            .levels
            .iter()
            .map(|&l| rng.random_range(0..l))
            .collect();
        self.state_from_levels(&levels)
    }

    /// Uniform grid state, reproducible for a fixed seed.
    pub fn random_state(&self, seed: u64) -> StateVector {
        self.random_state_with(&mut seed::rng(seed, 0))
    }
}
