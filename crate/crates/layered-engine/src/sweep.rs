//! Layered value iteration driven by frontier and value-table messages.
//!
//! Within a sweep, messages flow strictly from the top layer down. The top
//! layer turns the previous sweep's full-state table into expected-future
//! tables over the lower layers' next-state prefixes; each layer below folds
//! in its own transition factor and external cost and passes the result
//! further down; the bottom layer closes the telescope and yields the new
//! full-state values. A layer only ever touches its own model plus the
//! message payloads — the sub-iteration functions take nothing else.
//!
//! Two maximization semantics are provided:
//!
//! * [`SweepSemantics::Exact`] (default) keeps one table per open candidate
//!   decision of the layers above, so every layer's choice is resolved
//!   jointly at the bottom. The computed operator is identical to the
//!   centralized Bellman backup restricted to frontier service levels, which
//!   loses nothing (see the equivalence tests), so the layered and
//!   centralized value tables coincide.
//! * [`SweepSemantics::PrefixAdaptive`] maximizes separately for each
//!   realized next-state prefix of the layers below. That lets choices
//!   condition on information that is not available at decision time, so it
//!   computes an upper bound on the achievable value; it is kept for
//!   comparison experiments.

use std::borrow::Cow;

use mdp_core::{Policy, SweepStats, ValueTable};

use crate::compile::CompiledStack;
use crate::error::{LayeredError, Result};
use crate::frontier::{prune_to_frontier, Frontier, FrontierElement};
use crate::layer::{qos_compose, Layer};
use crate::message::{DownwardMessage, MessageExchange, UpwardMessage};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepSemantics {
    #[default]
    Exact,
    PrefixAdaptive,
}

#[derive(Debug, Clone, Copy)]
pub struct LayeredSolveOptions {
    pub discount: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub parallelism: mdp_core::Parallelism,
    pub semantics: SweepSemantics,
    /// Verify the dominance-preservation contract before sweeping.
    pub check_preservation: bool,
    /// Restrict the top layer to one (external, internal) action pair.
    pub pinned_top: Option<(usize, usize)>,
}

impl Default for LayeredSolveOptions {
    fn default() -> Self {
        Self {
            discount: 0.9,
            tolerance: 1e-8,
            max_sweeps: 10_000,
            parallelism: mdp_core::Parallelism::default(),
            semantics: SweepSemantics::Exact,
            check_preservation: true,
            pinned_top: None,
        }
    }
}

impl LayeredSolveOptions {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.discount) {
            return Err(LayeredError::Mdp(mdp_core::MdpError::InvalidDiscount(
                self.discount,
            )));
        }
        if !(self.tolerance > 0.0) || self.max_sweeps == 0 {
            return Err(LayeredError::ModelContract(
                "tolerance must be positive and max_sweeps at least 1".into(),
            ));
        }
        Ok(())
    }

    fn stop_threshold(&self) -> f64 {
        if self.discount > 0.0 {
            self.tolerance * (1.0 - self.discount) / self.discount
        } else {
            f64::INFINITY
        }
    }
}

/// Per-layer decision rules extracted from the layered sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredPolicy {
    /// Chosen external action per layer, per joint state.
    pub externals: Vec<Vec<u16>>,
    /// The top layer's chosen frontier element (service level with the
    /// internal-action profile that realizes it), per joint state.
    pub top_choice: Vec<FrontierElement>,
}

impl LayeredPolicy {
    /// Expands provenance into a full joint policy accepted by the
    /// centralized machinery.
    pub fn expand_joint(&self, aspace: &mdp_core::ActionSpace) -> Result<Policy> {
        let mut choices = Vec::with_capacity(self.externals.len());
        for (ext, choice) in self.externals.iter().zip(&self.top_choice) {
            if ext.len() != choice.provenance.len() {
                return Err(LayeredError::ModelContract(format!(
                    "provenance {:?} does not cover {} layers",
                    choice.provenance,
                    ext.len()
                )));
            }
            let pairs: Vec<(usize, usize)> = ext
                .iter()
                .zip(&choice.provenance)
                .map(|(&a, &b)| (a as usize, b as usize))
                .collect();
            choices.push(aspace.index(&pairs));
        }
        Ok(Policy::Deterministic(choices))
    }
}

pub struct LayeredSolution {
    pub value: ValueTable,
    pub policy: LayeredPolicy,
    pub stats: SweepStats,
}

// ---------------------------------------------------------------------------
// per-solve caches
// ---------------------------------------------------------------------------

struct SweepCache<'a> {
    compiled: &'a CompiledStack,
    /// Allowed top external actions (original indices).
    top_ext: Vec<usize>,
    /// Frontier in effect at the top, per state.
    frontiers: Vec<Cow<'a, Frontier>>,
    /// Stage term per top candidate `(a_idx * nf + k)`, per state.
    stage: Vec<Vec<f64>>,
    /// Cached top rows per candidate, per state; `None` when the top factor
    /// conditions on the realized lower next states.
    top_rows: Vec<Option<Vec<f64>>>,
    /// Cached rows per lower layer, indexed `(s_l * ext + a) * n_l`;
    /// `None` when that layer's rows vary with the next prefix.
    mid_rows: Vec<Option<Vec<f64>>>,
    /// Bracket evaluations contributed by one state per sweep.
    evals_per_state: Vec<u64>,
}

impl<'a> SweepCache<'a> {
    fn new(compiled: &'a CompiledStack, opts: &LayeredSolveOptions) -> Result<Self> {
        let space = compiled.space();
        let stack = compiled.stack();
        let layers = stack.len();
        let top = stack.top();

        let top_ext: Vec<usize> = match opts.pinned_top {
            Some((a, b)) => {
                if a >= top.external_count() || b >= top.internal_count() {
                    return Err(LayeredError::ModelContract(format!(
                        "pinned top action ({a}, {b}) outside the top layer's action sets"
                    )));
                }
                vec![a]
            }
            None => (0..top.external_count()).collect(),
        };

        let mut frontiers: Vec<Cow<'a, Frontier>> = Vec::with_capacity(space.total());
        for s in 0..space.total() {
            match opts.pinned_top {
                None => frontiers.push(Cow::Borrowed(compiled.top_frontier(s))),
                Some((_, b)) => {
                    let coords = space.coords(s);
                    let s_top = coords[layers - 1];
                    let restricted = if layers == 1 {
                        let qos = crate::layer::base_qos(top, s_top, b)?;
                        prune_to_frontier(vec![FrontierElement {
                            qos,
                            provenance: vec![b as u16],
                        }])?
                    } else {
                        let prefix = space.prefix_of(s, layers - 1);
                        let below = compiled.lower_frontier(layers - 1, prefix);
                        let mut cands = Vec::with_capacity(below.len());
                        for elem in below.iter() {
                            let qos = qos_compose(top, s_top, b, &elem.qos)?;
                            let mut provenance = elem.provenance.clone();
                            provenance.push(b as u16);
                            cands.push(FrontierElement { qos, provenance });
                        }
                        prune_to_frontier(cands)?
                    };
                    frontiers.push(Cow::Owned(restricted));
                }
            }
        }

        let lambda_top = top.external_multiplier();
        let mut stage = Vec::with_capacity(space.total());
        let mut top_rows = Vec::with_capacity(space.total());
        let n_top = space.layer_size(layers - 1);
        for s in 0..space.total() {
            let coords = space.coords(s);
            let s_top = coords[layers - 1];
            let front = frontiers[s].as_ref();
            let nf = front.len();
            let mut st = Vec::with_capacity(top_ext.len() * nf);
            for &a in &top_ext {
                let cost = lambda_top * top.external_cost(s_top, a);
                for elem in front.iter() {
                    st.push(top.internal_reward(s_top, &elem.qos) - cost);
                }
            }
            stage.push(st);

            if top.depends_on_next_prefix() && layers > 1 {
                top_rows.push(None);
            } else {
                let mut rows = vec![0.0; top_ext.len() * nf * n_top];
                for (ai, &a) in top_ext.iter().enumerate() {
                    for (k, elem) in front.iter().enumerate() {
                        let off = (ai * nf + k) * n_top;
                        top.top_transition_row(&[], &coords, a, &elem.qos, &mut rows[off..off + n_top]);
                    }
                }
                top_rows.push(Some(rows));
            }
        }

        let mut mid_rows = Vec::with_capacity(layers.saturating_sub(1));
        for l in 0..layers.saturating_sub(1) {
            let layer = stack.layer(l);
            if layer.depends_on_next_prefix() {
                mid_rows.push(None);
                continue;
            }
            let n = space.layer_size(l);
            let mut rows = vec![0.0; layer.state_count() * layer.external_count() * n];
            for s_l in 0..layer.state_count() {
                for a in 0..layer.external_count() {
                    let off = (s_l * layer.external_count() + a) * n;
                    layer.transition_row(&[], s_l, a, &mut rows[off..off + n]);
                }
            }
            mid_rows.push(Some(rows));
        }

        let mut evals_per_state = Vec::with_capacity(space.total());
        for s in 0..space.total() {
            let nf = frontiers[s].len() as u64;
            let mut ncand = top_ext.len() as u64 * nf;
            let mut evals = ncand * space.prefix_total(layers - 1) as u64;
            for l in (0..layers.saturating_sub(1)).rev() {
                let na = stack.layer(l).external_count() as u64;
                evals += ncand * na * space.prefix_total(l) as u64;
                ncand *= na;
            }
            evals_per_state.push(evals);
        }

        Ok(Self {
            compiled,
            top_ext,
            frontiers,
            stage,
            top_rows,
            mid_rows,
            evals_per_state,
        })
    }
}

struct Scratch {
    tier: Vec<f64>,
    next_tier: Vec<f64>,
    row: Vec<f64>,
    prefix: Vec<usize>,
}

impl Scratch {
    fn new() -> Self {
        Self {
            tier: Vec::new(),
            next_tier: Vec::new(),
            row: Vec::new(),
            prefix: Vec::new(),
        }
    }
}

#[inline]
fn dot(row: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (p, v) in row.iter().zip(values) {
        acc += p * v;
    }
    acc
}

fn decode_prefix(mut index: usize, sizes: &[usize], len: usize, out: &mut Vec<usize>) {
    out.clear();
    out.resize(len, 0);
    for l in (0..len).rev() {
        out[l] = index % sizes[l];
        index /= sizes[l];
    }
}

// ---------------------------------------------------------------------------
// sub-iterations (each sees one layer plus message payloads only)
// ---------------------------------------------------------------------------

/// Top-layer sub-iteration: stage reward plus discounted expectation over the
/// top layer's own next state, one table over the lower next prefix per
/// candidate `(a_top, frontier element)`.
#[allow(clippy::too_many_arguments)]
fn top_sub_iteration(
    top: &dyn Layer,
    coords: &[usize],
    state: usize,
    cache: &SweepCache<'_>,
    v_prev: &[f64],
    discount: f64,
    sizes: &[usize],
    scratch: &mut Scratch,
) {
    let layers = sizes.len();
    let n_top = sizes[layers - 1];
    let np: usize = sizes[..layers - 1].iter().product();
    let front = cache.frontiers[state].as_ref();
    let nf = front.len();
    let ncand = cache.top_ext.len() * nf;
    let stage = &cache.stage[state];

    scratch.tier.clear();
    scratch.tier.resize(ncand * np, 0.0);
    match &cache.top_rows[state] {
        Some(rows) => {
            for c in 0..ncand {
                let row = &rows[c * n_top..(c + 1) * n_top];
                let st = stage[c];
                for u in 0..np {
                    scratch.tier[c * np + u] =
                        st + discount * dot(row, &v_prev[u * n_top..(u + 1) * n_top]);
                }
            }
        }
        None => {
            scratch.row.clear();
            scratch.row.resize(n_top, 0.0);
            for (ai, &a) in cache.top_ext.iter().enumerate() {
                for (k, elem) in front.iter().enumerate() {
                    let c = ai * nf + k;
                    for u in 0..np {
                        decode_prefix(u, sizes, layers - 1, &mut scratch.prefix);
                        top.top_transition_row(&scratch.prefix, coords, a, &elem.qos, &mut scratch.row);
                        scratch.tier[c * np + u] = stage[c]
                            + discount * dot(&scratch.row, &v_prev[u * n_top..(u + 1) * n_top]);
                    }
                }
            }
        }
    }
}

/// Mid-layer sub-iteration: folds one driven layer's cost and transition
/// factor into every incoming candidate table. Produces `ext_count` times as
/// many candidate tables, one prefix level shorter.
#[allow(clippy::too_many_arguments)]
fn mid_sub_iteration(
    layer: &dyn Layer,
    layer_index: usize,
    s_l: usize,
    ncand_in: usize,
    rows: Option<&[f64]>,
    sizes: &[usize],
    scratch: &mut Scratch,
) {
    let n_l = sizes[layer_index];
    let np: usize = sizes[..layer_index].iter().product();
    let span = np * n_l;
    let na = layer.external_count();
    let lambda = layer.external_multiplier();

    scratch.next_tier.clear();
    scratch.next_tier.resize(na * ncand_in * np, 0.0);
    for a in 0..na {
        let cost = lambda * layer.external_cost(s_l, a);
        for c in 0..ncand_in {
            let out_base = (a * ncand_in + c) * np;
            let src = &scratch.tier[c * span..(c + 1) * span];
            match rows {
                Some(rows) => {
                    let row = &rows[(s_l * na + a) * n_l..(s_l * na + a + 1) * n_l];
                    for u in 0..np {
                        scratch.next_tier[out_base + u] =
                            -cost + dot(row, &src[u * n_l..(u + 1) * n_l]);
                    }
                }
                None => {
                    scratch.row.clear();
                    scratch.row.resize(n_l, 0.0);
                    for u in 0..np {
                        decode_prefix(u, sizes, layer_index, &mut scratch.prefix);
                        layer.transition_row(&scratch.prefix, s_l, a, &mut scratch.row);
                        scratch.next_tier[out_base + u] =
                            -cost + dot(&scratch.row, &src[u * n_l..(u + 1) * n_l]);
                    }
                }
            }
        }
    }
    std::mem::swap(&mut scratch.tier, &mut scratch.next_tier);
}

// ---------------------------------------------------------------------------
// per-state backups
// ---------------------------------------------------------------------------

struct StateResult {
    value: f64,
    externals: Vec<u16>,
    frontier_choice: u16,
}

fn backup_exact(
    cache: &SweepCache<'_>,
    state: usize,
    v_prev: &[f64],
    discount: f64,
    scratch: &mut Scratch,
    mut capture: Option<&mut Vec<DownwardMessage>>,
) -> StateResult {
    let compiled = cache.compiled;
    let space = compiled.space();
    let stack = compiled.stack();
    let sizes = space.sizes();
    let layers = stack.len();
    let coords = space.coords(state);

    top_sub_iteration(
        stack.top(),
        &coords,
        state,
        cache,
        v_prev,
        discount,
        sizes,
        scratch,
    );
    let nf = cache.frontiers[state].len();
    let mut ncand = cache.top_ext.len() * nf;
    if layers > 1 {
        if let Some(sink) = capture.as_deref_mut() {
            sink.push(downward_message(layers, &scratch.tier, ncand, sizes, layers - 1));
        }
    }

    for l in (0..layers - 1).rev() {
        mid_sub_iteration(
            stack.layer(l),
            l,
            coords[l],
            ncand,
            cache.mid_rows[l].as_deref(),
            sizes,
            scratch,
        );
        ncand *= stack.layer(l).external_count();
        if l > 0 {
            if let Some(sink) = capture.as_deref_mut() {
                sink.push(downward_message(l + 1, &scratch.tier, ncand, sizes, l));
            }
        }
    }

    // joint resolution: scan candidates in lexicographic digit order
    // (a_1, ..., a_{L-1}, a_top, frontier element), ties to the lowest
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0usize;
    for (c, &v) in scratch.tier[..ncand].iter().enumerate() {
        if v > best {
            best = v;
            arg = c;
        }
    }

    // decode the winning candidate id
    let mut id = arg;
    let k = id % nf;
    id /= nf;
    let a_top = cache.top_ext[id % cache.top_ext.len()];
    id /= cache.top_ext.len();
    let mut externals = vec![0u16; layers];
    externals[layers - 1] = a_top as u16;
    for l in (0..layers - 1).rev() {
        let na = stack.layer(l).external_count();
        externals[l] = (id % na) as u16;
        id /= na;
    }

    StateResult {
        value: best,
        externals,
        frontier_choice: k as u16,
    }
}

fn backup_prefix_adaptive(
    cache: &SweepCache<'_>,
    state: usize,
    v_prev: &[f64],
    discount: f64,
    scratch: &mut Scratch,
) -> StateResult {
    let compiled = cache.compiled;
    let space = compiled.space();
    let stack = compiled.stack();
    let sizes = space.sizes();
    let layers = stack.len();
    let coords = space.coords(state);

    top_sub_iteration(
        stack.top(),
        &coords,
        state,
        cache,
        v_prev,
        discount,
        sizes,
        scratch,
    );
    let nf = cache.frontiers[state].len();
    let ncand = cache.top_ext.len() * nf;
    let np: usize = sizes[..layers - 1].iter().product();

    // collapse candidates per realized next prefix
    let mut collapsed = vec![f64::NEG_INFINITY; np];
    let mut top_arg = 0usize;
    for c in 0..ncand {
        for u in 0..np {
            let v = scratch.tier[c * np + u];
            if v > collapsed[u] {
                collapsed[u] = v;
                if u == 0 {
                    top_arg = c;
                }
            }
        }
    }
    scratch.tier.clear();
    scratch.tier.extend_from_slice(&collapsed);

    let mut externals = vec![0u16; layers];
    externals[layers - 1] = cache.top_ext[top_arg / nf] as u16;
    let frontier_choice = (top_arg % nf) as u16;

    for l in (0..layers - 1).rev() {
        mid_sub_iteration(
            stack.layer(l),
            l,
            coords[l],
            1,
            cache.mid_rows[l].as_deref(),
            sizes,
            scratch,
        );
        // collapse the external-action dimension per prefix
        let np2: usize = sizes[..l].iter().product();
        let na = stack.layer(l).external_count();
        let mut best = vec![f64::NEG_INFINITY; np2];
        let mut arg0 = 0usize;
        for a in 0..na {
            for u in 0..np2 {
                let v = scratch.tier[a * np2 + u];
                if v > best[u] {
                    best[u] = v;
                    if u == 0 {
                        arg0 = a;
                    }
                }
            }
        }
        externals[l] = arg0 as u16;
        scratch.tier.clear();
        scratch.tier.extend_from_slice(&best);
    }

    StateResult {
        value: scratch.tier[0],
        externals,
        frontier_choice,
    }
}

fn downward_message(
    from_layer_1based: usize,
    tier: &[f64],
    ncand: usize,
    sizes: &[usize],
    prefix_len: usize,
) -> DownwardMessage {
    let np: usize = sizes[..prefix_len].iter().product();
    let dims = sizes[..prefix_len].to_vec();
    let tables = (0..ncand)
        .map(|c| {
            let values = tier[c * np..(c + 1) * np].to_vec();
            (
                c as u32,
                ValueTable::from_values(dims.clone(), values).expect("table shape"),
            )
        })
        .collect();
    DownwardMessage {
        from_layer: from_layer_1based,
        to_layer: from_layer_1based - 1,
        tables,
    }
}

// ---------------------------------------------------------------------------
// solver
// ---------------------------------------------------------------------------

pub fn layered_value_iteration(
    compiled: &CompiledStack,
    opts: &LayeredSolveOptions,
) -> Result<LayeredSolution> {
    opts.validate()?;
    if opts.check_preservation {
        compiled.verify_preservation()?;
    }
    let space = compiled.space();
    let cache = SweepCache::new(compiled, opts)?;
    let evals_per_sweep: u64 = cache.evals_per_state.iter().sum();
    let threshold = opts.stop_threshold();

    let backup = |s: usize, v_prev: &[f64], scratch: &mut Scratch| -> StateResult {
        match opts.semantics {
            SweepSemantics::Exact => backup_exact(&cache, s, v_prev, opts.discount, scratch, None),
            SweepSemantics::PrefixAdaptive => {
                backup_prefix_adaptive(&cache, s, v_prev, opts.discount, scratch)
            }
        }
    };

    let mut v_prev = vec![0.0; space.total()];
    let mut v_next = vec![0.0; space.total()];
    let mut stats = SweepStats::default();
    for _ in 0..opts.max_sweeps {
        sweep_into(&backup, &mut v_next, &v_prev, opts.parallelism);
        let residual = v_prev
            .iter()
            .zip(&v_next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v_prev, &mut v_next);
        stats.residuals.push(residual);
        stats.evaluations_per_sweep.push(evals_per_sweep);
        stats.sweeps += 1;
        if residual <= threshold {
            stats.converged = true;
            break;
        }
    }

    // policy extraction from the final table
    let results = collect_results(&backup, &v_prev, space.total(), opts.parallelism);
    let mut externals = Vec::with_capacity(space.total());
    let mut top_choice = Vec::with_capacity(space.total());
    for (s, r) in results.into_iter().enumerate() {
        externals.push(r.externals);
        top_choice.push(cache.frontiers[s].elements()[r.frontier_choice as usize].clone());
    }

    let value = ValueTable::from_values(space.sizes().to_vec(), v_prev)?;
    Ok(LayeredSolution {
        value,
        policy: LayeredPolicy {
            externals,
            top_choice,
        },
        stats,
    })
}

fn sweep_into<F>(backup: &F, out: &mut [f64], v_prev: &[f64], parallelism: mdp_core::Parallelism)
where
    F: Fn(usize, &[f64], &mut Scratch) -> StateResult + Sync,
{
    match parallelism {
        mdp_core::Parallelism::Sequential => {
            let mut scratch = Scratch::new();
            for (s, slot) in out.iter_mut().enumerate() {
                *slot = backup(s, v_prev, &mut scratch).value;
            }
        }
        #[cfg(feature = "parallel")]
        mdp_core::Parallelism::Rayon => {
            out.par_iter_mut()
                .enumerate()
                .for_each_init(Scratch::new, |scratch, (s, slot)| {
                    *slot = backup(s, v_prev, scratch).value;
                });
        }
    }
}

fn collect_results<F>(
    backup: &F,
    v_prev: &[f64],
    n: usize,
    parallelism: mdp_core::Parallelism,
) -> Vec<StateResult>
where
    F: Fn(usize, &[f64], &mut Scratch) -> StateResult + Sync,
{
    match parallelism {
        mdp_core::Parallelism::Sequential => {
            let mut scratch = Scratch::new();
            (0..n).map(|s| backup(s, v_prev, &mut scratch)).collect()
        }
        #[cfg(feature = "parallel")]
        mdp_core::Parallelism::Rayon => (0..n)
            .into_par_iter()
            .map_init(Scratch::new, |scratch, s| backup(s, v_prev, scratch))
            .collect(),
    }
}

/// One state's message traffic for a sweep against `v_prev`:
/// `L-1` upward frontier channels and `L-1` downward table channels.
pub fn exchange_messages(
    compiled: &CompiledStack,
    v_prev: &ValueTable,
    state: &[usize],
    discount: f64,
) -> Result<MessageExchange> {
    let space = compiled.space();
    let layers = compiled.layers();
    if !space.contains(state) {
        return Err(LayeredError::ModelContract(format!(
            "state {state:?} outside the stack's space"
        )));
    }
    if v_prev.len() != space.total() {
        return Err(LayeredError::ModelContract(
            "message exchange needs the previous full-state table".into(),
        ));
    }
    let flat = space.index(state);

    let mut upward = Vec::new();
    for l in 1..layers {
        let prefix = space.prefix_of(flat, l);
        upward.push(UpwardMessage {
            from_layer: l,
            to_layer: l + 1,
            frontier: compiled.lower_frontier(l, prefix).clone(),
        });
    }

    let opts = LayeredSolveOptions {
        discount,
        ..LayeredSolveOptions::default()
    };
    opts.validate()?;
    let cache = SweepCache::new(compiled, &opts)?;
    let mut scratch = Scratch::new();
    let mut downward = Vec::new();
    backup_exact(
        &cache,
        flat,
        v_prev.values(),
        discount,
        &mut scratch,
        Some(&mut downward),
    );
    Ok(MessageExchange::new(upward, downward))
}

/// Verifies that maximizing the internal reward over the top frontier equals
/// maximizing over every internal-action profile.
pub fn frontier_equivalence_check(compiled: &CompiledStack, state: &[usize]) -> Result<()> {
    const TOL: f64 = 1e-12;
    let space = compiled.space();
    let stack = compiled.stack();
    let layers = stack.len();
    if !space.contains(state) {
        return Err(LayeredError::ModelContract(format!(
            "state {state:?} outside the stack's space"
        )));
    }
    let flat = space.index(state);
    let top = stack.top();
    let s_top = state[layers - 1];

    let frontier_max = compiled
        .top_frontier(flat)
        .iter()
        .map(|e| top.internal_reward(s_top, &e.qos))
        .fold(f64::NEG_INFINITY, f64::max);

    // exhaustive enumeration over all internal profiles
    let mut counts = Vec::with_capacity(layers);
    for l in 0..layers {
        counts.push(stack.layer(l).internal_count());
    }
    let total: usize = counts.iter().product();
    let mut exhaustive_max = f64::NEG_INFINITY;
    let mut witness = vec![0usize; layers];
    let mut profile = vec![0usize; layers];
    for mut p in 0..total {
        for l in (0..layers).rev() {
            profile[l] = p % counts[l];
            p /= counts[l];
        }
        let z = crate::layer::compose_profile(stack, state, &profile)?;
        let r = top.internal_reward(s_top, &z);
        if r > exhaustive_max {
            exhaustive_max = r;
            witness.copy_from_slice(&profile);
        }
    }

    if (frontier_max - exhaustive_max).abs() > TOL {
        return Err(LayeredError::FrontierEquivalence {
            state: state.to_vec(),
            frontier_max,
            exhaustive_max,
            witness,
        });
    }
    Ok(())
}
