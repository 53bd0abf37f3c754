//! Factored transition kernels.
//!
//! The joint next-state distribution is a product of per-layer factors
//! evaluated in layer order: layer `l < L` conditions on the already-drawn
//! next states of layers `1..l-1`, the current `s_l` and the external action
//! `a_l`; the top layer additionally conditions on the full current state and
//! the internal-action profile. Rows must be distributions to 1e-12, so the
//! full product over joint next states is stochastic to well within 1e-10.

use crate::error::{MdpError, Result};
use crate::space::{ActionSpace, JointAction, StateSpace};

pub const ROW_SUM_TOL: f64 = 1e-12;
pub const PRODUCT_SUM_TOL: f64 = 1e-10;

/// One layer's conditional next-state distribution.
pub trait TransitionFactor: Send + Sync {
    /// Whether rows vary with the next-state prefix of the layers below.
    /// Factors that ignore the prefix let solvers hoist row construction.
    fn depends_on_next_prefix(&self) -> bool {
        true
    }

    /// Key such that equal keys imply identical rows for this `state`.
    /// Solvers group actions by key to share expectation work; the default
    /// makes every action its own group, which is always correct.
    fn action_group(&self, state: &[usize], action: &JointAction, aspace: &ActionSpace) -> u64 {
        let _ = state;
        aspace.index(&action.pairs) as u64
    }

    /// Write the distribution over this layer's next states into `out`.
    fn fill_row(&self, next_prefix: &[usize], state: &[usize], action: &JointAction, out: &mut [f64]);
}

/// The factored kernel of a layered MDP.
pub struct TransitionKernel {
    space: StateSpace,
    aspace: ActionSpace,
    factors: Vec<Box<dyn TransitionFactor>>,
}

impl TransitionKernel {
    pub fn new(
        space: StateSpace,
        aspace: ActionSpace,
        factors: Vec<Box<dyn TransitionFactor>>,
    ) -> Result<Self> {
        if factors.len() != space.layers() || aspace.layers() != space.layers() {
            return Err(MdpError::ModelContract(format!(
                "kernel needs one factor per layer: {} factors for {} layers",
                factors.len(),
                space.layers()
            )));
        }
        Ok(Self {
            space,
            aspace,
            factors,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.aspace
    }

    pub fn factor(&self, layer: usize) -> &dyn TransitionFactor {
        self.factors[layer].as_ref()
    }

    /// Row of the layer-`layer` factor, validated to be a distribution.
    pub fn factor_row(
        &self,
        layer: usize,
        next_prefix: &[usize],
        state: &[usize],
        action: &JointAction,
    ) -> Result<Vec<f64>> {
        let mut row = vec![0.0; self.space.layer_size(layer)];
        self.factors[layer].fill_row(next_prefix, state, action, &mut row);
        validate_row(&row, ROW_SUM_TOL).map_err(|e| {
            MdpError::ModelContract(format!(
                "factor {layer} row at state {state:?}, prefix {next_prefix:?}: {e}"
            ))
        })?;
        Ok(row)
    }

    /// Full product probability of one joint transition.
    pub fn probability(&self, state: &[usize], action: &JointAction, next: &[usize]) -> f64 {
        let mut p = 1.0;
        let mut row = Vec::new();
        for l in 0..self.space.layers() {
            row.clear();
            row.resize(self.space.layer_size(l), 0.0);
            self.factors[l].fill_row(&next[..l], state, action, &mut row);
            p *= row[next[l]];
        }
        p
    }

    /// Sum of the full product over all joint next states. Used by the
    /// stochasticity checks; must be 1 within [`PRODUCT_SUM_TOL`].
    pub fn product_row_sum(&self, state: &[usize], action: &JointAction) -> f64 {
        let layers = self.space.layers();
        let mut total = 0.0;
        let mut next = vec![0usize; layers];
        self.sum_rec(state, action, &mut next, 0, 1.0, &mut total);
        total
    }

    fn sum_rec(
        &self,
        state: &[usize],
        action: &JointAction,
        next: &mut Vec<usize>,
        layer: usize,
        weight: f64,
        total: &mut f64,
    ) {
        if layer == self.space.layers() {
            *total += weight;
            return;
        }
        let n = self.space.layer_size(layer);
        let mut row = vec![0.0; n];
        self.factors[layer].fill_row(&next[..layer], state, action, &mut row);
        for s in 0..n {
            next[layer] = s;
            self.sum_rec(state, action, next, layer + 1, weight * row[s], total);
        }
        next[layer] = 0;
    }
}

pub fn validate_row(row: &[f64], tol: f64) -> std::result::Result<(), String> {
    let mut sum = 0.0;
    for (i, &p) in row.iter().enumerate() {
        if !p.is_finite() || !(-tol..=1.0 + tol).contains(&p) {
            return Err(format!("entry {i} = {p} outside [0, 1]"));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > tol {
        return Err(format!("row sums to {sum}, not 1"));
    }
    Ok(())
}

/// A factor backed by explicit rows, keyed by `(state coordinate, external action)`.
/// Suits layers whose transition ignores the next-state prefix and the other
/// layers entirely.
pub struct MatrixFactor {
    layer: usize,
    /// `rows[a_l][s_l]` is a distribution over this layer's next states.
    rows: Vec<Vec<Vec<f64>>>,
}

impl MatrixFactor {
    pub fn new(layer: usize, rows: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        for (a, per_state) in rows.iter().enumerate() {
            for (s, row) in per_state.iter().enumerate() {
                validate_row(row, ROW_SUM_TOL).map_err(|e| {
                    MdpError::ModelContract(format!("matrix factor {layer}, action {a}, state {s}: {e}"))
                })?;
            }
        }
        Ok(Self { layer, rows })
    }
}

impl TransitionFactor for MatrixFactor {
    fn depends_on_next_prefix(&self) -> bool {
        false
    }

    fn action_group(&self, _state: &[usize], action: &JointAction, _aspace: &ActionSpace) -> u64 {
        action.external(self.layer) as u64
    }

    fn fill_row(&self, _next_prefix: &[usize], state: &[usize], action: &JointAction, out: &mut [f64]) {
        out.copy_from_slice(&self.rows[action.external(self.layer)][state[self.layer]]);
    }
}
