//! Objective functions mapping a parameter solution to process performances.
//!
//! Two families are provided: the analytic [`SyntheticOzonation`] model and
//! data-driven [`RegressionForest`] surrogates fitted from CSV data.

mod dataset;
mod forest;
mod synthetic;

pub use dataset::{generate_dataset, Dataset};
pub use forest::{fit_forest, ForestModel, ForestParams, RegressionForest, RegressionTree};
pub use synthetic::{synthetic_ozonation, SyntheticOzonation, OZONATION_OUTPUTS};

use crate::error::{Error, Result};
use crate::space::StateVector;

/// Maps a state to `m` objective values. Implementations must be pure.
pub trait ObjectiveModel: Send + Sync {
    fn objective_count(&self) -> usize;

    fn predict(&self, state: &StateVector) -> Result<Vec<f64>>;
}

impl<T: ObjectiveModel + ?Sized> ObjectiveModel for &T {
    fn objective_count(&self) -> usize {
        (**self).objective_count()
    }

    fn predict(&self, state: &StateVector) -> Result<Vec<f64>> {
        (**self).predict(state)
    }
}

impl<T: ObjectiveModel + ?Sized> ObjectiveModel for Box<T> {
    fn objective_count(&self) -> usize {
        (**self).objective_count()
    }

    fn predict(&self, state: &StateVector) -> Result<Vec<f64>> {
        (**self).predict(state)
    }
}

/// Adapts a closure into an [`ObjectiveModel`] with `m` outputs.
pub struct FnModel<F> {
    outputs: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(outputs: usize, f: F) -> Self {
        FnModel { outputs, f }
    }
}

impl<F> ObjectiveModel for FnModel<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn objective_count(&self) -> usize {
        self.outputs
    }

    fn predict(&self, state: &StateVector) -> Result<Vec<f64>> {
        let out = (self.f)(state.values());
        if out.len() != self.outputs {
            return Err(Error::Arity {
                expected: self.outputs,
                got: out.len(),
            });
        }
        Ok(out)
    }
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r_squared(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::Arity {
            expected: truth.len(),
            got: predictions.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Dataset("R² needs at least one value".into()));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let ss_res: f64 = predictions
        .iter()
        .zip(truth)
        .map(|(p, y)| (y - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}
