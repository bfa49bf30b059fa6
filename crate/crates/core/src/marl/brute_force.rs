use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ParameterSpace, StateVector};
use crate::surrogate::ObjectiveModel;

/// Default cap on exhaustively enumerated grids.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Environment variable overriding [`DEFAULT_ENUMERATION_CAP`].
pub const MAX_GRID_ENV: &str = "FADEOPT_MAX_GRID";

/// The enumeration cap, honouring `FADEOPT_MAX_GRID` when it parses.
pub fn enumeration_cap() -> Result<u128> {
    match std::env::var(MAX_GRID_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::Config(format!(
                "{MAX_GRID_ENV}=`{v}` is not a non-negative integer"
            ))
        }),
        Err(_) => Ok(DEFAULT_ENUMERATION_CAP),
    }
}

/// A scored grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub state: StateVector,
    pub predictions: Vec<f64>,
    pub errors: Vec<f64>,
    pub summed_error: f64,
}

impl Solution {
    pub fn evaluate(
        model: &dyn ObjectiveModel,
        targets: &[f64],
        state: StateVector,
    ) -> Result<Self> {
        let predictions = model.predict(&state)?;
        if predictions.len() != targets.len() {
            return Err(Error::Arity {
                expected: targets.len(),
                got: predictions.len(),
            });
        }
        let errors: Vec<f64> = predictions
            .iter()
            .zip(targets)
            .map(|(f, p)| (f - p).abs())
            .collect();
        let summed_error = errors.iter().sum();
        Ok(Solution {
            state,
            predictions,
            errors,
            summed_error,
        })
    }
}

fn check_cap(space: &ParameterSpace, cap: u128) -> Result<()> {
    let states = space.grid_cardinality();
    if states > cap {
        return Err(Error::CapExceeded { states, cap });
    }
    Ok(())
}

/// Summed absolute error of every grid state, in grid order.
pub fn grid_errors(
    space: &ParameterSpace,
    model: &dyn ObjectiveModel,
    targets: &[f64],
    cap: u128,
) -> Result<Vec<f64>> {
    check_cap(space, cap)?;
    space
        .states()
        .map(|s| Solution::evaluate(model, targets, s).map(|sol| sol.summed_error))
        .collect()
}

/// Global minimizer of `Σ_i |f_i(s) - p_i|` over the whole grid. Ties go to
/// the lexicographically smallest state.
pub fn brute_force_optimum(
    space: &ParameterSpace,
    model: &dyn ObjectiveModel,
    targets: &[f64],
    cap: u128,
) -> Result<Solution> {
    check_cap(space, cap)?;
    let mut best: Option<Solution> = None;
    for s in space.states() {
        let sol = Solution::evaluate(model, targets, s)?;
        if best
            .as_ref()
            .is_none_or(|b| sol.summed_error < b.summed_error)
        {
            best = Some(sol);
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Median of the summed errors over the grid.
pub fn median_grid_error(
    space: &ParameterSpace,
    model: &dyn ObjectiveModel,
    targets: &[f64],
    cap: u128,
) -> Result<f64> {
    let mut e = grid_errors(space, model, targets, cap)?;
    e.sort_by(f64::total_cmp);
    let n = e.len();
    Ok(if n % 2 == 1 {
        e[n / 2]
    } else {
        0.5 * (e[n / 2 - 1] + e[n / 2])
    })
}
