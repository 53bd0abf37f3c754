//! Finite discounted Markov decision processes over layered state and action
//! spaces.
//!
//! States and actions are joint over an ordered list of layers. Transition
//! kernels are factored along the layer chain: layer `l` draws its next state
//! conditioned on the already-drawn next states of the layers below it, its
//! own current state and its own driving action, while the top layer may
//! condition on the full current state and the full internal-action profile.
//! Rewards decompose into an internal reward minus multiplier-weighted
//! per-layer action costs.
//!
//! The solvers here are the centralized reference algorithms: exact policy
//! evaluation and value iteration by successive sweeps, with per-state
//! backups that may run in parallel (Jacobi style) and are bit-identical to
//! the sequential order.

mod error;
mod kernel;
mod policy;
mod reward;
mod solve;
mod space;
mod value;

pub use error::{ContractionFailure, MdpError, Result};
pub use kernel::{validate_row, MatrixFactor, TransitionFactor, TransitionKernel, PRODUCT_SUM_TOL, ROW_SUM_TOL};
pub use policy::Policy;
pub use reward::RewardModel;
pub use solve::{
    bellman_backup, contraction_residuals, discounted_return, evaluate_policy, value_iteration,
    EvalOutcome, Mdp, Parallelism, SolveOptions, SolveOutcome, SweepStats,
};
pub use space::{ActionSpace, JointAction, JointState, StateSpace};
pub use value::{fmt_real, ValueTable};
