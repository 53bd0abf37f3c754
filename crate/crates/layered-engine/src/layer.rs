//! The per-layer model contract and the service composition chain.

use std::sync::Arc;

use mdp_core::{ActionSpace, StateSpace};

use crate::error::{LayeredError, Result};
use crate::frontier::{prune_to_frontier, Frontier, FrontierElement};
use crate::qos::QosTriple;

/// Loss/time part of a service mapping; the engine accumulates the cost
/// component itself so the accumulation law is uniform across models.
#[derive(Debug, Clone, Copy)]
pub struct ServiceQos {
    pub loss: f64,
    pub time_s: f64,
}

/// One protocol layer. Layers below the top must provide `transition_row`;
/// the top layer must provide `internal_reward` and `top_transition_row`.
pub trait Layer: Send + Sync {
    fn state_count(&self) -> usize;
    fn external_count(&self) -> usize;
    fn internal_count(&self) -> usize;

    fn external_cost(&self, s_l: usize, a_l: usize) -> f64;
    fn internal_cost(&self, s_l: usize, b_l: usize) -> f64;
    fn external_multiplier(&self) -> f64;
    fn internal_multiplier(&self) -> f64;

    /// Loss/time service map. `lower` is `None` only at the bottom layer.
    fn service(&self, s_l: usize, b_l: usize, lower: Option<&QosTriple>) -> ServiceQos;

    /// Next-state distribution of a driven (non-top) layer.
    fn transition_row(&self, next_prefix: &[usize], s_l: usize, a_l: usize, out: &mut [f64]) {
        let _ = (next_prefix, s_l, a_l, out);
        unreachable!("transition_row is only defined for layers below the top");
    }

    /// Whether transition rows vary with the realized next states below.
    fn depends_on_next_prefix(&self) -> bool {
        true
    }

    /// Top-layer reward of operating at service level `qos`.
    fn internal_reward(&self, s_l: usize, qos: &QosTriple) -> f64 {
        let _ = (s_l, qos);
        unreachable!("internal_reward is only defined for the top layer");
    }

    /// Top-layer next-state distribution given the chosen service level.
    fn top_transition_row(
        &self,
        next_prefix: &[usize],
        state: &[usize],
        a_l: usize,
        qos: &QosTriple,
        out: &mut [f64],
    ) {
        let _ = (next_prefix, state, a_l, qos, out);
        unreachable!("top_transition_row is only defined for the top layer");
    }
}

/// An ordered stack of layers; the last entry is the top layer.
#[derive(Clone)]
pub struct LayerStack {
    layers: Vec<Arc<dyn Layer>>,
}

impl LayerStack {
    pub fn new(layers: Vec<Arc<dyn Layer>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(LayeredError::ModelContract("a stack needs at least one layer".into()));
        }
        Ok(Self { layers })
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layer(&self, l: usize) -> &dyn Layer {
        self.layers[l].as_ref()
    }

    pub fn top(&self) -> &dyn Layer {
        self.layers.last().unwrap().as_ref()
    }

    pub fn state_space(&self) -> Result<StateSpace> {
        Ok(StateSpace::new(
            self.layers.iter().map(|l| l.state_count()).collect(),
        )?)
    }

    pub fn action_space(&self) -> Result<ActionSpace> {
        Ok(ActionSpace::new(
            self.layers.iter().map(|l| l.external_count()).collect(),
            self.layers.iter().map(|l| l.internal_count()).collect(),
        )?)
    }
}

/// Service triple of the bottom layer under internal action `b_1`.
pub fn base_qos(layer: &dyn Layer, s_1: usize, b_1: usize) -> Result<QosTriple> {
    let svc = layer.service(s_1, b_1, None);
    let cost = 0.0 + layer.internal_multiplier() * layer.internal_cost(s_1, b_1);
    QosTriple::new(svc.loss, svc.time_s, cost)
}

/// One step of the service chain: layer `l`'s triple from the lower layer's.
/// The cost component accumulates `lambda_l^b * d_l` on top of the lower cost.
pub fn qos_compose(layer: &dyn Layer, s_l: usize, b_l: usize, lower: &QosTriple) -> Result<QosTriple> {
    let svc = layer.service(s_l, b_l, Some(lower));
    let cost = lower.cost + layer.internal_multiplier() * layer.internal_cost(s_l, b_l);
    QosTriple::new(svc.loss, svc.time_s, cost)
}

/// Expected transmission time per packet when each packet is retried until
/// success or the retry limit: `(sum_{j<=limit} loss^j) * time / share`.
/// Evaluates cleanly at `loss = 1` (every packet burns `limit + 1` attempts).
pub fn ratio_time(loss: f64, time_s: f64, limit: usize, share: f64) -> f64 {
    let mut attempts = 0.0;
    let mut p = 1.0;
    for _ in 0..=limit {
        attempts += p;
        p *= loss;
    }
    attempts * time_s / share
}

/// Composes the service chain for a full internal-action profile.
pub fn compose_profile(stack: &LayerStack, coords: &[usize], profile: &[usize]) -> Result<QosTriple> {
    let mut z = base_qos(stack.layer(0), coords[0], profile[0])?;
    for l in 1..stack.len() {
        z = qos_compose(stack.layer(l), coords[l], profile[l], &z)?;
    }
    Ok(z)
}

/// The optimal frontier of layers `1..=level` at the given current states.
/// Layer 1 enumerates its internal actions; each following layer composes
/// every lower frontier element with each of its internal actions and prunes.
pub fn build_frontier(stack: &LayerStack, level: usize, states: &[usize]) -> Result<Frontier> {
    if level == 0 || level > stack.len() || states.len() < level {
        return Err(LayeredError::ModelContract(format!(
            "frontier level {level} outside stack of {} layers",
            stack.len()
        )));
    }
    let bottom = stack.layer(0);
    let mut candidates = Vec::with_capacity(bottom.internal_count());
    for b in 0..bottom.internal_count() {
        candidates.push(FrontierElement {
            qos: base_qos(bottom, states[0], b)?,
            provenance: vec![b as u16],
        });
    }
    let mut frontier = prune_to_frontier(candidates)?;
    for l in 1..level {
        let layer = stack.layer(l);
        let mut next = Vec::with_capacity(frontier.len() * layer.internal_count());
        for elem in frontier.iter() {
            for b in 0..layer.internal_count() {
                let qos = qos_compose(layer, states[l], b, &elem.qos)?;
                let mut provenance = elem.provenance.clone();
                provenance.push(b as u16);
                next.push(FrontierElement { qos, provenance });
            }
        }
        frontier = prune_to_frontier(next)?;
    }
    Ok(frontier)
}

/// Checks that composition preserves dominance-or-equality: for every
/// dominated pair of lower service levels, every state and internal action of
/// `layer` maps the dominant one to a triple that still dominates or equals.
pub fn check_preservation(layer: &dyn Layer, layer_index: usize, lower_pool: &[QosTriple]) -> Result<()> {
    use crate::qos::dominates;
    for zi in lower_pool {
        for zj in lower_pool {
            if !dominates(zi, zj) {
                continue;
            }
            for s in 0..layer.state_count() {
                for b in 0..layer.internal_count() {
                    let hi = qos_compose(layer, s, b, zi)?;
                    let lo = qos_compose(layer, s, b, zj)?;
                    if !dominates(&hi, &lo) && hi != lo {
                        return Err(LayeredError::PreservationViolated {
                            layer: layer_index,
                            state: s,
                            action: b,
                            detail: format!(
                                "{zi:?} dominates {zj:?} but composes to {hi:?} vs {lo:?}"
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}
