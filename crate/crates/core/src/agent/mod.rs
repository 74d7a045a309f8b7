//! Configurable agents: pure Q-learning, pure working memory, the weighted
//! mixture and the entropy-based coordination, each with its variations.

mod config;
mod runtime;

pub use config::{free_parameters, AgentConfig, ModelKind, Param, ParamVector, Variation, VariationSpec};
pub use runtime::{simulated_rt, Agent, Decision, Evaluation, Observation};
