//! The two reduced solvers: a top-layer-only iteration against a service
//! prior, and the full layered iteration with the top layer's actions pinned.

use mdp_core::{SweepStats, ValueTable};

use crate::compile::CompiledStack;
use crate::error::{LayeredError, Result};
use crate::layer::qos_compose;
use crate::qos::QosTriple;
use crate::sweep::{layered_value_iteration, LayeredSolution, LayeredSolveOptions};

/// A probability distribution over lower-layer service levels.
#[derive(Debug, Clone, PartialEq)]
pub struct QosPrior {
    pub elements: Vec<(QosTriple, f64)>,
}

impl QosPrior {
    pub fn validate(&self) -> Result<()> {
        if self.elements.is_empty() {
            return Err(LayeredError::EmptyPrior);
        }
        let sum: f64 = self.elements.iter().map(|(_, w)| w).sum();
        if self.elements.iter().any(|(_, w)| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > 1e-12
        {
            return Err(LayeredError::ModelContract(format!(
                "prior weights must be a distribution (sum {sum})"
            )));
        }
        Ok(())
    }

    /// Uniform over every distinct service level reported on any lower
    /// frontier (the union across current state prefixes, deduplicated).
    pub fn uniform_over_frontier_union(compiled: &CompiledStack) -> Result<Self> {
        let layers = compiled.layers();
        if layers < 2 {
            return Err(LayeredError::ModelContract(
                "a service prior needs at least one layer below the top".into(),
            ));
        }
        let n_prefix = compiled.space().prefix_total(layers - 1);
        let mut union: Vec<QosTriple> = Vec::new();
        for p in 0..n_prefix {
            for elem in compiled.lower_frontier(layers - 1, p).iter() {
                if !union.contains(&elem.qos) {
                    union.push(elem.qos);
                }
            }
        }
        if union.is_empty() {
            return Err(LayeredError::EmptyPrior);
        }
        let w = 1.0 / union.len() as f64;
        Ok(Self {
            elements: union.into_iter().map(|z| (z, w)).collect(),
        })
    }
}

pub struct Simplified1Outcome {
    /// Value table over the top layer's own states only.
    pub value: ValueTable,
    /// Chosen `(external, internal)` top action per top-layer state.
    pub policy: Vec<(u16, u16)>,
    pub stats: SweepStats,
}

/// Top-layer-only value iteration: lower layers exchange no messages and are
/// modeled by the prior over their service levels. Each backup maximizes the
/// prior expectation of stage reward plus discounted future value over the
/// top layer's own next states.
pub fn simplified1_value_iteration(
    compiled: &CompiledStack,
    prior: &QosPrior,
    opts: &LayeredSolveOptions,
) -> Result<Simplified1Outcome> {
    prior.validate()?;
    if !(0.0..1.0).contains(&opts.discount) {
        return Err(LayeredError::Mdp(mdp_core::MdpError::InvalidDiscount(
            opts.discount,
        )));
    }
    let stack = compiled.stack();
    let layers = stack.len();
    if layers < 2 {
        return Err(LayeredError::ModelContract(
            "the top-layer-only reduction needs at least two layers".into(),
        ));
    }
    let top = stack.top();
    let n = top.state_count();
    let n_ext = top.external_count();
    let n_int = top.internal_count();
    let lambda = top.external_multiplier();
    let space = compiled.space();
    let full_coords_with = |s_top: usize| {
        // kernel factors may read other coordinates only through the service
        // triple, which the prior supplies; fill the rest with zeros
        let mut coords = vec![0usize; layers];
        coords[layers - 1] = s_top;
        coords
    };

    // per (s_top, b, prior element): composed service and stage reward
    let mut composed: Vec<QosTriple> = Vec::with_capacity(n * n_int * prior.elements.len());
    for s in 0..n {
        for b in 0..n_int {
            for (zeta, _) in &prior.elements {
                composed.push(qos_compose(top, s, b, zeta)?);
            }
        }
    }
    let z_at = |s: usize, b: usize, e: usize| {
        &composed[(s * n_int + b) * prior.elements.len() + e]
    };

    let threshold = if opts.discount > 0.0 {
        opts.tolerance * (1.0 - opts.discount) / opts.discount
    } else {
        f64::INFINITY
    };
    let n_top_next = space.layer_size(layers - 1);
    let mut row = vec![0.0; n_top_next];
    let mut v = vec![0.0; n];
    let mut v_next = vec![0.0; n];
    let mut stats = SweepStats::default();
    let mut policy = vec![(0u16, 0u16); n];

    for _ in 0..opts.max_sweeps {
        for s in 0..n {
            let coords = full_coords_with(s);
            let mut best = f64::NEG_INFINITY;
            let mut arg = (0u16, 0u16);
            for a in 0..n_ext {
                let cost = lambda * top.external_cost(s, a);
                for b in 0..n_int {
                    let mut acc = 0.0;
                    for (e, (_, w)) in prior.elements.iter().enumerate() {
                        let z = z_at(s, b, e);
                        top.top_transition_row(&[], &coords, a, z, &mut row);
                        let mut future = 0.0;
                        for (x, &p) in row.iter().enumerate() {
                            future += p * v[x];
                        }
                        acc += w * (top.internal_reward(s, z) - cost + opts.discount * future);
                    }
                    if acc > best {
                        best = acc;
                        arg = (a as u16, b as u16);
                    }
                }
            }
            v_next[s] = best;
            policy[s] = arg;
        }
        let residual = v
            .iter()
            .zip(&v_next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut v_next);
        stats.residuals.push(residual);
        stats
            .evaluations_per_sweep
            .push((n * n_ext * n_int) as u64);
        stats.sweeps += 1;
        if residual <= threshold {
            stats.converged = true;
            break;
        }
    }

    Ok(Simplified1Outcome {
        value: ValueTable::from_values(vec![n], v)?,
        policy,
        stats,
    })
}

/// Full layered iteration with the top layer's external and internal actions
/// pinned to constants; the top sub-iteration then maximizes only over the
/// service levels reported from below.
pub fn simplified2_value_iteration(
    compiled: &CompiledStack,
    pinned_top: (usize, usize),
    opts: &LayeredSolveOptions,
) -> Result<LayeredSolution> {
    let opts = LayeredSolveOptions {
        pinned_top: Some(pinned_top),
        ..*opts
    };
    layered_value_iteration(compiled, &opts)
}
