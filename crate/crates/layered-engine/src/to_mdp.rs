//! Bridge from a layer stack to the centralized model: the factored kernel
//! and reward evaluated over joint states and joint actions, with internal
//! profiles resolved through the same service-composition chain the layered
//! solver uses.

use std::sync::Arc;

use mdp_core::{
    ActionSpace, JointAction, Mdp, RewardModel, TransitionFactor, TransitionKernel,
};

use crate::compile::CompiledStack;
use crate::error::Result;

/// Kernel factor of a driven (non-top) layer.
struct LowerFactor {
    compiled: Arc<CompiledStack>,
    layer: usize,
}

impl TransitionFactor for LowerFactor {
    fn depends_on_next_prefix(&self) -> bool {
        self.compiled.stack().layer(self.layer).depends_on_next_prefix()
    }

    fn action_group(&self, _state: &[usize], action: &JointAction, _aspace: &ActionSpace) -> u64 {
        action.external(self.layer) as u64
    }

    fn fill_row(&self, next_prefix: &[usize], state: &[usize], action: &JointAction, out: &mut [f64]) {
        self.compiled.stack().layer(self.layer).transition_row(
            next_prefix,
            state[self.layer],
            action.external(self.layer),
            out,
        );
    }
}

/// Kernel factor of the top layer: conditions on the full current state and
/// the internal profile through its composed service triple.
struct TopFactor {
    compiled: Arc<CompiledStack>,
}

impl TopFactor {
    fn top_layer(&self) -> usize {
        self.compiled.layers() - 1
    }
}

impl TransitionFactor for TopFactor {
    fn depends_on_next_prefix(&self) -> bool {
        self.compiled.stack().top().depends_on_next_prefix() && self.compiled.layers() > 1
    }

    fn action_group(&self, state: &[usize], action: &JointAction, _aspace: &ActionSpace) -> u64 {
        let space = self.compiled.space();
        let z = self.compiled.z_key(space.index(state), action);
        z * self.compiled.stack().top().external_count() as u64
            + action.external(self.top_layer()) as u64
    }

    fn fill_row(&self, next_prefix: &[usize], state: &[usize], action: &JointAction, out: &mut [f64]) {
        let space = self.compiled.space();
        let flat = space.index(state);
        let z = self.compiled.z_of(flat, action);
        self.compiled.stack().top().top_transition_row(
            next_prefix,
            state,
            action.external(self.top_layer()),
            z,
            out,
        );
    }
}

/// Reward assembled through the service chain: the top layer's internal
/// reward of the composed triple (whose cost component is the weighted
/// internal-cost sum) minus the weighted external costs.
struct StackReward {
    compiled: Arc<CompiledStack>,
}

impl RewardModel for StackReward {
    fn layers(&self) -> usize {
        self.compiled.layers()
    }

    fn internal_reward(&self, state: &[usize], action: &JointAction) -> f64 {
        let space = self.compiled.space();
        let flat = space.index(state);
        let z = self.compiled.z_of(flat, action);
        let top = self.compiled.stack().top();
        top.internal_reward(state[self.layers() - 1], z)
    }

    fn external_cost(&self, layer: usize, s_l: usize, a_l: usize) -> f64 {
        self.compiled.stack().layer(layer).external_cost(s_l, a_l)
    }

    fn internal_cost(&self, layer: usize, s_l: usize, b_l: usize) -> f64 {
        self.compiled.stack().layer(layer).internal_cost(s_l, b_l)
    }

    fn external_multiplier(&self, layer: usize) -> f64 {
        self.compiled.stack().layer(layer).external_multiplier()
    }

    fn internal_multiplier(&self, layer: usize) -> f64 {
        self.compiled.stack().layer(layer).internal_multiplier()
    }
}

/// Builds the centralized model over the stack's joint spaces.
pub fn stack_to_mdp(compiled: &Arc<CompiledStack>) -> Result<Mdp> {
    let space = compiled.space().clone();
    let aspace = compiled.action_space().clone();
    let layers = compiled.layers();
    let mut factors: Vec<Box<dyn TransitionFactor>> = Vec::with_capacity(layers);
    for l in 0..layers - 1 {
        factors.push(Box::new(LowerFactor {
            compiled: Arc::clone(compiled),
            layer: l,
        }));
    }
    factors.push(Box::new(TopFactor {
        compiled: Arc::clone(compiled),
    }));
    let kernel = TransitionKernel::new(space, aspace, factors)?;
    Ok(Mdp {
        kernel,
        reward: Box::new(StackReward {
            compiled: Arc::clone(compiled),
        }),
    })
}
