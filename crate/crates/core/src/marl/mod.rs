//! The Markov-game orchestrator.
//!
//! `m` agents, one per objective, share a parameter grid. Each step a
//! single joint action is executed: with probability ε the one maximizing
//! `Σ_i Q_i(s, a)` over feasible actions, otherwise a uniformly random
//! feasible action. Agent `i` is rewarded with the improvement
//! `|f_i(s) - p_i| - |f_i(s') - p_i|`, so along any trajectory its rewards
//! telescope to the change in its own error.

mod brute_force;
mod schedule;
mod select;
mod training;

pub use brute_force::{
    brute_force_optimum, enumeration_cap, grid_errors, median_grid_error, Solution,
    DEFAULT_ENUMERATION_CAP, MAX_GRID_ENV,
};
pub use schedule::{epsilon_choose, EpsilonSchedule};
pub use select::{feasible_argmax, max_unilateral_regret, utilitarian_select};
pub use training::{
    deviation_check, reward, run_training, run_training_with_names, telescoping_residual, Agent,
    AgentEnsemble, DqnParams, LoopParams, RunLog, ScheduleParams, StepRecord, TrainingConfig,
};
