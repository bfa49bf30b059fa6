//! Evolutionary comparison methods over the same grid and objective model:
//! NSGA-II and a crowding-archive MOPSO. Both minimize the per-objective
//! absolute errors `|f_i(s) - p_i|` and report the best summed error seen.

mod mopso;
mod nsga2;
mod pareto;

use rayon::prelude::*;

use crate::error::Result;
use crate::marl::Solution;
use crate::space::{ParameterSpace, StateVector};
use crate::surrogate::ObjectiveModel;

pub use mopso::{run_mopso, run_mopso_from, MopsoOutcome, MopsoParams, Particle};
pub use nsga2::{run_nsga2, run_nsga2_from, select_survivors, Nsga2Outcome, Nsga2Params};
pub use pareto::{
    crowding_distance, dominates, error_dominates, fast_nondominated_sort, nondominated_fronts,
    Individual,
};

/// Scores genomes in parallel, keeping their order.
fn evaluate_all(
    space: &ParameterSpace,
    model: &dyn ObjectiveModel,
    targets: &[f64],
    genomes: &[Vec<usize>],
) -> Result<Vec<Individual>> {
    genomes
        .par_iter()
        .map(|g| Individual::evaluate(model, targets, space.state_from_levels(g)))
        .collect()
}

/// Lowest summed error seen so far; the earliest wins ties.
#[derive(Debug, Default)]
struct BestSoFar {
    best: Option<Individual>,
    evaluations: usize,
}

impl BestSoFar {
    fn observe(&mut self, batch: &[Individual]) {
        self.evaluations += batch.len();
        for ind in batch {
            if self
                .best
                .as_ref()
                .is_none_or(|b| ind.summed_error() < b.summed_error())
            {
                self.best = Some(ind.clone());
            }
        }
    }

    fn summed(&self) -> f64 {
        self.best
            .as_ref()
            .map_or(f64::INFINITY, Individual::summed_error)
    }

    fn solution(&self) -> Solution {
        self.best
            .as_ref()
            .expect("at least one evaluation")
            .to_solution()
    }
}

/// Validated starting genomes as level vectors.
fn initial_levels(
    space: &ParameterSpace,
    initial: Option<Vec<StateVector>>,
    size: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<Vec<usize>>> {
    match initial {
        Some(states) => {
            if states.len() != size {
                return Err(crate::Error::Config(format!(
                    "initial population has {} members, expected {size}",
                    states.len()
                )));
            }
            states
                .into_iter()
                .map(|s| Ok(space.levels_of(&space.state(s.into_inner())?)))
                .collect()
        }
        None => Ok((0..size)
            .map(|_| space.levels_of(&space.random_state_with(rng)))
            .collect()),
    }
}
