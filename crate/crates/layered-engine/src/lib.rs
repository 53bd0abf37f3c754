//! Layered decomposition of cross-layer decision problems.
//!
//! Each protocol layer owns its state set, its external action (which drives
//! its state transition) and its internal action (which shapes the service it
//! provides upward). A layer summarizes everything below it as a QoS triple
//! (loss ratio, per-packet time, accumulated internal cost); only the
//! non-dominated triples — the optimal frontier — travel upward, and expected
//! future-value tables travel back down. The solver here runs value iteration
//! through exactly those two message channels and reproduces the centralized
//! solution while evaluating fewer action candidates.

mod compile;
mod error;
mod frontier;
mod layer;
mod message;
mod qos;
mod simplified;
mod sweep;
pub mod tabular;
mod to_mdp;

pub use compile::CompiledStack;
pub use error::{LayeredError, Result};
pub use frontier::{prune_to_frontier, prune_with_epsilon, Frontier, FrontierElement, Provenance};
pub use layer::{
    base_qos, build_frontier, check_preservation, compose_profile, qos_compose, ratio_time, Layer,
    LayerStack, ServiceQos,
};
pub use message::{exchange_messages, DownwardMessage, MessageExchange, UpwardMessage};
pub use qos::{dominates, pareto_equivalent, QosTriple};
pub use simplified::{
    simplified1_value_iteration, simplified2_value_iteration, QosPrior, Simplified1Outcome,
};
pub use sweep::{
    frontier_equivalence_check, layered_value_iteration, LayeredPolicy, LayeredSolution,
    LayeredSolveOptions, SweepSemantics,
};
pub use to_mdp::stack_to_mdp;
