//! Multi-objective optimization of discrete process-parameter grids with
//! one deep Q-network agent per objective.
//!
//! The agents share a single grid environment ([`space`]) and each owns a
//! small Q-network ([`dqn`]). At every step the joint move is the one that
//! maximizes the sum of all agents' Q-values ([`marl`]); each agent is
//! rewarded by how much closer its objective moved to its target. Objective
//! values come from a surrogate ([`surrogate`]). Exhaustive search, tabular
//! Q-learning ([`tabular`]), NSGA-II and MOPSO ([`baselines`]) serve as
//! oracles and comparison points.

pub mod baselines;
pub mod config;
pub mod dqn;
pub mod error;
pub mod marl;
pub mod numfmt;
pub mod seed;
pub mod space;
pub mod surrogate;
pub mod tabular;

pub use error::{Error, Result};
pub use space::{ActionVector, ParameterSpace, ParameterSpec, StateVector};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/surrogates.md")]
    mod surrogates {}
    #[doc = include_str!("../../../book/src/agents.md")]
    mod agents {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
