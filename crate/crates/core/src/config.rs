//! Run configuration: one TOML document describing the grid, the objectives,
//! the model and every hyperparameter. Unknown keys are rejected.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{MopsoParams, Nsga2Params};
use crate::error::{Error, Result};
use crate::marl::{DqnParams, LoopParams, ScheduleParams, TrainingConfig};
use crate::seed;
use crate::space::{ParameterSpace, ParameterSpec};
use crate::surrogate::{
    Dataset, ForestModel, ForestParams, ObjectiveModel, SyntheticOzonation, OZONATION_OUTPUTS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Objective {
    pub name: String,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// The closed-form ozonation response.
    Synthetic {},
    /// Regression forests fitted to a dataset CSV, one per objective.
    Forest {
        /// Relative paths resolve against the config file's directory.
        data: PathBuf,
        #[serde(default = "default_trees")]
        trees: usize,
        /// Maximum tree depth; 0 means unlimited.
        #[serde(default = "default_depth")]
        depth: usize,
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
    },
}

fn default_trees() -> usize {
    ForestParams::default().trees
}

fn default_depth() -> usize {
    ForestParams::default().max_depth.unwrap_or(0)
}

fn default_min_leaf() -> usize {
    ForestParams::default().min_leaf
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineParams {
    pub nsga2: Nsga2Params,
    pub mopso: MopsoParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "ozonation_specs")]
    pub space: Vec<ParameterSpec>,
    #[serde(default = "ozonation_objectives")]
    pub objectives: Vec<Objective>,
    #[serde(default = "synthetic")]
    pub model: ModelConfig,
    #[serde(default)]
    pub dqn: DqnParams,
    #[serde(default)]
    pub schedule: ScheduleParams,
    #[serde(default, rename = "loop")]
    pub run: LoopParams,
    #[serde(default)]
    pub baselines: BaselineParams,
}

fn ozonation_specs() -> Vec<ParameterSpec> {
    ParameterSpace::ozonation().specs().to_vec()
}

/// Targets of the reference fading case.
fn ozonation_objectives() -> Vec<Objective> {
    OZONATION_OUTPUTS
        .iter()
        .zip([0.81, 15.76, -20.84, -70.79])
        .map(|(name, target)| Objective {
            name: name.to_string(),
            target,
        })
        .collect()
}

fn synthetic() -> ModelConfig {
    ModelConfig::Synthetic {}
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            space: ozonation_specs(),
            objectives: ozonation_objectives(),
            model: ModelConfig::Synthetic {},
            dqn: DqnParams::default(),
            schedule: ScheduleParams::default(),
            run: LoopParams::default(),
            baselines: BaselineParams::default(),
        }
    }
}

/// Independent seeds for each component, all derived from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubSeeds {
    pub training: u64,
    pub agents: u64,
    pub forest: u64,
    pub nsga2: u64,
    pub mopso: u64,
    pub data: u64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.parameter_space()?;
        if self.objectives.is_empty() {
            return Err(Error::Config("at least one objective is required".into()));
        }
        let mut names = HashSet::new();
        for o in &self.objectives {
            if !names.insert(o.name.as_str()) {
                return Err(Error::Config(format!(
                    "duplicate objective name {:?}",
                    o.name
                )));
            }
            if !o.target.is_finite() {
                return Err(Error::Config(format!(
                    "objective {:?} has a non-finite target",
                    o.name
                )));
            }
        }
        match &self.model {
            ModelConfig::Synthetic {} => {
                if self.space.len() != 4 || self.objectives.len() != OZONATION_OUTPUTS.len() {
                    return Err(Error::Config(
                        "the synthetic model needs 4 variables and 4 objectives".into(),
                    ));
                }
            }
            ModelConfig::Forest {
                trees, min_leaf, ..
            } => {
                if *trees == 0 || *min_leaf == 0 {
                    return Err(Error::Config(
                        "forest trees and min_leaf must be >= 1".into(),
                    ));
                }
            }
        }
        self.dqn.validate()?;
        self.schedule.build()?;
        if let Some(t) = self.run.stop_threshold {
            if t.is_nan() || t < 0.0 {
                return Err(Error::Config("loop.stop_threshold must be >= 0".into()));
            }
        }
        self.baselines.nsga2.validate()?;
        self.baselines.mopso.validate()?;
        Ok(())
    }

    pub fn parameter_space(&self) -> Result<ParameterSpace> {
        ParameterSpace::new(self.space.clone())
    }

    pub fn targets(&self) -> Vec<f64> {
        self.objectives.iter().map(|o| o.target).collect()
    }

    pub fn objective_names(&self) -> Vec<String> {
        self.objectives.iter().map(|o| o.name.clone()).collect()
    }

    pub fn training(&self) -> TrainingConfig {
        TrainingConfig {
            dqn: self.dqn,
            schedule: self.schedule,
            run: self.run,
        }
    }

    pub fn sub_seeds(&self) -> SubSeeds {
        let d = |label| seed::derive(self.seed, label);
        SubSeeds {
            training: d("training"),
            agents: d("agents"),
            forest: d("forest"),
            nsga2: d("nsga2"),
            mopso: d("mopso"),
            data: d("data"),
        }
    }

    /// Builds the objective model. Forest data paths are resolved against
    /// `base_dir`.
    pub fn build_model(&self, base_dir: &Path) -> Result<Box<dyn ObjectiveModel>> {
        match &self.model {
            ModelConfig::Synthetic {} => Ok(Box::new(SyntheticOzonation)),
            ModelConfig::Forest {
                data,
                trees,
                depth,
                min_leaf,
            } => {
                let path = base_dir.join(data);
                let dataset = Dataset::load(&path, self.space.len())?;
                if dataset.output_names.len() != self.objectives.len() {
                    return Err(Error::Config(format!(
                        "{} has {} outputs but {} objectives are configured",
                        path.display(),
                        dataset.output_names.len(),
                        self.objectives.len()
                    )));
                }
                let params = ForestParams {
                    trees: *trees,
                    max_depth: (*depth > 0).then_some(*depth),
                    min_leaf: *min_leaf,
                };
                Ok(Box::new(ForestModel::fit(
                    &dataset,
                    params,
                    self.sub_seeds().forest,
                )?))
            }
        }
    }
}
