//! Stage rewards: an internal reward earned by the internal-action profile
//! minus multiplier-weighted external action costs.
//!
//! The canonical assembly is `reward = internal_reward + external_reward`
//! with `external_reward = -(sum over layers of lambda_l^a * c_l)`
//! accumulated in layer order. Providers compute the internal reward with
//! their own internal-cost accumulation in the same layer order, so the two
//! evaluation routes agree bit for bit.

use crate::space::JointAction;

pub trait RewardModel: Send + Sync {
    fn layers(&self) -> usize;

    /// Internal reward: utility gain minus accumulated weighted internal costs.
    fn internal_reward(&self, state: &[usize], action: &JointAction) -> f64;

    /// External action cost `c_l(s_l, a_l)`.
    fn external_cost(&self, layer: usize, s_l: usize, a_l: usize) -> f64;

    /// Internal action cost `d_l(s_l, b_l)`.
    fn internal_cost(&self, layer: usize, s_l: usize, b_l: usize) -> f64;

    fn external_multiplier(&self, layer: usize) -> f64;

    fn internal_multiplier(&self, layer: usize) -> f64;

    /// `-(sum_l lambda_l^a c_l(s_l, a_l))`, accumulated in layer order.
    fn external_reward(&self, state: &[usize], action: &JointAction) -> f64 {
        let mut acc = 0.0;
        for l in 0..self.layers() {
            acc += self.external_multiplier(l) * self.external_cost(l, state[l], action.external(l));
        }
        -acc
    }

    /// Weighted internal cost sum, accumulated in layer order.
    fn internal_cost_sum(&self, state: &[usize], action: &JointAction) -> f64 {
        let mut acc = 0.0;
        for l in 0..self.layers() {
            acc += self.internal_multiplier(l) * self.internal_cost(l, state[l], action.internal(l));
        }
        acc
    }

    /// Total stage reward.
    fn reward(&self, state: &[usize], action: &JointAction) -> f64 {
        self.internal_reward(state, action) + self.external_reward(state, action)
    }
}
