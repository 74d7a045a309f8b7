//! Dual-system decision models for a four-target trial-and-error task.
//!
//! The crate simulates the problem-solving task, implements model-free
//! Q-learning, a Bayesian working memory with entropy-gated sequential
//! retrieval, and the two ways of combining them (a reliability-weighted
//! mixture and an entropy-based coordination). Models are fitted to choices
//! and reaction times with NSGA-II, a solution is picked from the Pareto
//! front by Chebyshev aggregation, and models are compared with BIC.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory, one per
//! capability. The `wmrl` binary is a thin command-line wrapper.

pub mod agent;
pub mod analysis;
pub mod coordination;
pub mod data;
pub mod error;
pub mod fitting;
pub mod memory;
pub mod policy;
pub mod qlearning;
pub mod rng;
pub mod simulate;
pub mod task;

pub use agent::{Agent, AgentConfig, ModelKind, Param, ParamVector, Variation};
pub use error::{Error, Result};
pub use policy::{Action, ActionDist, N_ACTIONS};
pub use task::{Phase, ProblemSpec, TaskState, TrialRecord};
