//! The hybrid circuit-plus-network regression model.

mod hybrid;
mod mlp;

pub use hybrid::{Checkpoint, Head, HybridModel, ModelGradient, Pass};
pub use mlp::{hidden_width_for_budget, mlp_param_count, Mlp, Trace};
