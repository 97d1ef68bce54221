//! Tabular Bayesian reinforcement learning with epistemically guided rewards.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod belief;
pub mod envs;
pub mod error;
pub mod harness;
pub mod planner;
pub mod special;
pub mod theory;

pub use agents::{Agent, AgentConfig, AgentKind};
pub use belief::{BeliefConfig, BeliefState, RewardPrior, UncertaintyMode};
pub use envs::{EnvInstance, EnvSpec, Transition};
pub use error::{Error, Result};
pub use harness::{Experiment, ExperimentConfig, MetricsSummary, RunRecord, Seeds};
pub use planner::{Policy, SolverOptions, TabularMdp, ValueFunction};
pub use theory::CheckReport;
