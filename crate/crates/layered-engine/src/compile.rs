//! Precomputed frontier and service-composition tables for one stack.
//!
//! Frontiers depend only on current states, never on value iterates, so they
//! are built once: one frontier per state prefix at every level (the upward
//! message payloads) plus the top layer's own frontier per joint state. For
//! the centralized bridge the full internal-profile composition is interned
//! per prefix so identical service triples share kernel rows.

use mdp_core::{ActionSpace, JointAction, StateSpace};

use crate::error::Result;
use crate::frontier::{prune_to_frontier, Frontier, FrontierElement};
use crate::layer::{base_qos, check_preservation, qos_compose, LayerStack};
use crate::qos::QosTriple;

/// Composition results of every lower-layer internal profile at one prefix.
pub struct PrefixProfiles {
    /// Deduplicated composed triples.
    pub triples: Vec<QosTriple>,
    /// Flat lower-profile index (layer-0-major mixed radix) to triple id.
    pub of_profile: Vec<u32>,
}

pub struct CompiledStack {
    stack: LayerStack,
    space: StateSpace,
    aspace: ActionSpace,
    /// `lower_frontiers[l-1][prefix]`: frontier of layers `1..=l` at the
    /// current prefix `s_{1..l}`, for `l = 1..L-1`.
    lower_frontiers: Vec<Vec<Frontier>>,
    /// Top frontier per joint state.
    top_frontiers: Vec<Frontier>,
    /// Interned lower-profile compositions per prefix of length `L-1`
    /// (single unit entry when `L == 1`).
    lower_profiles: Vec<PrefixProfiles>,
    /// Composed top triple per state, indexed `b_L * n_lower_triples + lower_id`.
    top_z: Vec<Vec<QosTriple>>,
}

impl CompiledStack {
    pub fn new(stack: LayerStack) -> Result<Self> {
        let space = stack.state_space()?;
        let aspace = stack.action_space()?;
        let layers = stack.len();

        // frontiers level by level
        let mut lower_frontiers: Vec<Vec<Frontier>> = Vec::new();
        for level in 1..layers {
            let n_prefix = space.prefix_total(level);
            let mut table = Vec::with_capacity(n_prefix);
            for p in 0..n_prefix {
                let coords = prefix_coords(&space, p, level);
                let frontier = if level == 1 {
                    base_frontier(&stack, coords[0])?
                } else {
                    let below = &lower_frontiers[level - 2][space_prefix(&space, &coords, level - 1)];
                    compose_frontier(&stack, level - 1, coords[level - 1], below)?
                };
                table.push(frontier);
            }
            lower_frontiers.push(table);
        }

        // full lower-profile composition at prefix length L-1
        let lower_profiles = build_lower_profiles(&stack, &space)?;

        // top frontier and interned top compositions per joint state
        let top = stack.top();
        let mut top_frontiers = Vec::with_capacity(space.total());
        let mut top_z = Vec::with_capacity(space.total());
        for s in 0..space.total() {
            let coords = space.coords(s);
            let s_top = coords[layers - 1];
            let frontier = if layers == 1 {
                base_frontier(&stack, coords[0])?
            } else {
                let prefix = space.prefix_of(s, layers - 1);
                compose_frontier(&stack, layers - 1, s_top, &lower_frontiers[layers - 2][prefix])?
            };
            top_frontiers.push(frontier);

            let profiles = if layers == 1 {
                &lower_profiles[0]
            } else {
                &lower_profiles[space.prefix_of(s, layers - 1)]
            };
            let n_lower = profiles.triples.len();
            let mut zs = Vec::with_capacity(top.internal_count() * n_lower.max(1));
            if layers == 1 {
                for b in 0..top.internal_count() {
                    zs.push(base_qos(top, s_top, b)?);
                }
            } else {
                for b in 0..top.internal_count() {
                    for zeta in &profiles.triples {
                        zs.push(qos_compose(top, s_top, b, zeta)?);
                    }
                }
            }
            top_z.push(zs);
        }

        Ok(Self {
            stack,
            space,
            aspace,
            lower_frontiers,
            top_frontiers,
            lower_profiles,
            top_z,
        })
    }

    pub fn stack(&self) -> &LayerStack {
        &self.stack
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.aspace
    }

    pub fn layers(&self) -> usize {
        self.stack.len()
    }

    /// Frontier of layers `1..=level` at the given current prefix.
    pub fn lower_frontier(&self, level: usize, prefix_flat: usize) -> &Frontier {
        &self.lower_frontiers[level - 1][prefix_flat]
    }

    pub fn top_frontier(&self, state_flat: usize) -> &Frontier {
        &self.top_frontiers[state_flat]
    }

    pub fn lower_profiles(&self, prefix_flat: usize) -> &PrefixProfiles {
        &self.lower_profiles[prefix_flat]
    }

    /// Number of interned lower triples at a state's prefix.
    fn n_lower(&self, state_flat: usize) -> usize {
        if self.layers() == 1 {
            1
        } else {
            let prefix = self.space.prefix_of(state_flat, self.layers() - 1);
            self.lower_profiles[prefix].triples.len()
        }
    }

    /// Service triple realized by a joint action's internal profile.
    pub fn z_of(&self, state_flat: usize, action: &JointAction) -> &QosTriple {
        let layers = self.layers();
        if layers == 1 {
            return &self.top_z[state_flat][action.internal(0)];
        }
        let prefix = self.space.prefix_of(state_flat, layers - 1);
        let profiles = &self.lower_profiles[prefix];
        let mut flat = 0usize;
        for l in 0..layers - 1 {
            flat = flat * self.stack.layer(l).internal_count() + action.internal(l);
        }
        let lower_id = profiles.of_profile[flat] as usize;
        &self.top_z[state_flat][action.internal(layers - 1) * profiles.triples.len() + lower_id]
    }

    /// Key identifying the composed triple of an action at a state; equal
    /// keys share the top kernel row.
    pub fn z_key(&self, state_flat: usize, action: &JointAction) -> u64 {
        let layers = self.layers();
        if layers == 1 {
            return action.internal(0) as u64;
        }
        let prefix = self.space.prefix_of(state_flat, layers - 1);
        let profiles = &self.lower_profiles[prefix];
        let mut flat = 0usize;
        for l in 0..layers - 1 {
            flat = flat * self.stack.layer(l).internal_count() + action.internal(l);
        }
        (action.internal(layers - 1) * profiles.triples.len() + profiles.of_profile[flat] as usize)
            as u64
    }

    /// Index into `top_z` for a (b_top, lower triple id) pair.
    pub fn top_z_at(&self, state_flat: usize, b_top: usize, lower_id: usize) -> &QosTriple {
        &self.top_z[state_flat][b_top * self.n_lower(state_flat) + lower_id]
    }

    /// Exhaustive check that every layer's service map preserves dominance
    /// across the full (unpruned) candidate pools of the layers below it.
    pub fn verify_preservation(&self) -> Result<()> {
        let layers = self.stack.len();
        for l in 1..layers {
            let n_prefix = self.space.prefix_total(l);
            for p in 0..n_prefix {
                let coords = prefix_coords(&self.space, p, l);
                let pool = full_pool(&self.stack, &coords, l)?;
                check_preservation(self.stack.layer(l), l, &pool)?;
            }
        }
        Ok(())
    }
}

fn prefix_coords(space: &StateSpace, mut prefix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0usize; len];
    for l in (0..len).rev() {
        out[l] = prefix % space.layer_size(l);
        prefix /= space.layer_size(l);
    }
    out
}

fn space_prefix(space: &StateSpace, coords: &[usize], len: usize) -> usize {
    coords[..len]
        .iter()
        .zip(space.sizes())
        .fold(0, |acc, (&c, &n)| acc * n + c)
}

fn base_frontier(stack: &LayerStack, s_1: usize) -> Result<Frontier> {
    let bottom = stack.layer(0);
    let mut candidates = Vec::with_capacity(bottom.internal_count());
    for b in 0..bottom.internal_count() {
        candidates.push(FrontierElement {
            qos: base_qos(bottom, s_1, b)?,
            provenance: vec![b as u16],
        });
    }
    prune_to_frontier(candidates)
}

fn compose_frontier(
    stack: &LayerStack,
    layer_index: usize,
    s_l: usize,
    below: &Frontier,
) -> Result<Frontier> {
    let layer = stack.layer(layer_index);
    let mut candidates = Vec::with_capacity(below.len() * layer.internal_count());
    for elem in below.iter() {
        for b in 0..layer.internal_count() {
            let qos = qos_compose(layer, s_l, b, &elem.qos)?;
            let mut provenance = elem.provenance.clone();
            provenance.push(b as u16);
            candidates.push(FrontierElement { qos, provenance });
        }
    }
    prune_to_frontier(candidates)
}

/// Deduplicated composition of every internal profile of layers `1..=len`.
fn full_pool(stack: &LayerStack, coords: &[usize], len: usize) -> Result<Vec<QosTriple>> {
    let mut pool: Vec<QosTriple> = Vec::new();
    for b in 0..stack.layer(0).internal_count() {
        pool.push(base_qos(stack.layer(0), coords[0], b)?);
    }
    for l in 1..len {
        let mut next = Vec::with_capacity(pool.len() * stack.layer(l).internal_count());
        for z in &pool {
            for b in 0..stack.layer(l).internal_count() {
                next.push(qos_compose(stack.layer(l), coords[l], b, z)?);
            }
        }
        pool = next;
    }
    let mut dedup: Vec<QosTriple> = Vec::new();
    for z in pool {
        if !dedup.contains(&z) {
            dedup.push(z);
        }
    }
    Ok(dedup)
}

fn build_lower_profiles(stack: &LayerStack, space: &StateSpace) -> Result<Vec<PrefixProfiles>> {
    let layers = stack.len();
    if layers == 1 {
        return Ok(vec![PrefixProfiles {
            triples: Vec::new(),
            of_profile: Vec::new(),
        }]);
    }
    let n_prefix = space.prefix_total(layers - 1);
    let mut out = Vec::with_capacity(n_prefix);
    for p in 0..n_prefix {
        let coords = prefix_coords(space, p, layers - 1);
        // composed triple per profile, profiles in layer-0-major order
        let mut per_profile: Vec<QosTriple> = Vec::new();
        for b in 0..stack.layer(0).internal_count() {
            per_profile.push(base_qos(stack.layer(0), coords[0], b)?);
        }
        for l in 1..layers - 1 {
            let mut next = Vec::with_capacity(per_profile.len() * stack.layer(l).internal_count());
            for z in &per_profile {
                for b in 0..stack.layer(l).internal_count() {
                    next.push(qos_compose(stack.layer(l), coords[l], b, z)?);
                }
            }
            per_profile = next;
        }
        let mut triples: Vec<QosTriple> = Vec::new();
        let mut of_profile = Vec::with_capacity(per_profile.len());
        for z in per_profile {
            let id = match triples.iter().position(|t| *t == z) {
                Some(i) => i,
                None => {
                    triples.push(z);
                    triples.len() - 1
                }
            };
            of_profile.push(id as u32);
        }
        out.push(PrefixProfiles { triples, of_profile });
    }
    Ok(out)
}

impl std::fmt::Debug for CompiledStack {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompiledStack")
            .field("layers", &self.stack.len())
            .field("states", &self.space.total())
            .finish()
    }
}
