//! Exact solvers: policy evaluation and value iteration.
//!
//! Value iteration maximizes over pure joint actions (the backup objective is
//! multilinear in per-layer mixing probabilities, so a pure maximizer always
//! exists; see the grid-search test). Per-state backups exploit the factored
//! kernel: actions are grouped by identical factor rows and the next-state
//! expectation is eliminated layer by layer from the top down, which changes
//! arithmetic cost but not a single float of any action's value.
//!
//! Ties in every argmax go to the lowest canonical action index. Sweeps stop
//! once the sup-norm residual drops below `tolerance * (1 - gamma) / gamma`,
//! which bounds the distance to the fixed point by `tolerance`.

use std::collections::HashMap;

use crate::error::{ContractionFailure, MdpError, Result};
use crate::kernel::TransitionKernel;
use crate::policy::Policy;
use crate::reward::RewardModel;
use crate::space::JointAction;
use crate::value::ValueTable;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A complete model: factored kernel plus reward.
pub struct Mdp {
    pub kernel: TransitionKernel,
    pub reward: Box<dyn RewardModel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[cfg(feature = "parallel")]
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Parallelism::Rayon
        }
        #[cfg(not(feature = "parallel"))]
        {
            Parallelism::Sequential
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub discount: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub parallelism: Parallelism,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            discount: 0.9,
            tolerance: 1e-8,
            max_sweeps: 10_000,
            parallelism: Parallelism::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.discount) {
            return Err(MdpError::InvalidDiscount(self.discount));
        }
        if !(self.tolerance > 0.0) || self.max_sweeps == 0 {
            return Err(MdpError::ModelContract(
                "tolerance must be positive and max_sweeps at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn stop_threshold(&self) -> f64 {
        if self.discount > 0.0 {
            self.tolerance * (1.0 - self.discount) / self.discount
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepStats {
    /// Sup-norm residual after each sweep.
    pub residuals: Vec<f64>,
    /// Candidate actions compared in the maximization, per sweep.
    pub evaluations_per_sweep: Vec<u64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl SweepStats {
    pub fn total_evaluations(&self) -> u64 {
        self.evaluations_per_sweep.iter().sum()
    }
}

pub struct SolveOutcome {
    pub value: ValueTable,
    pub policy: Policy,
    pub stats: SweepStats,
}

pub struct EvalOutcome {
    pub value: ValueTable,
    pub stats: SweepStats,
}

/// `sum_k gamma^k r_k` over a finite reward sequence.
pub fn discounted_return(rewards: &[f64], discount: f64) -> f64 {
    let mut acc = 0.0;
    let mut weight = 1.0;
    for &r in rewards {
        acc += weight * r;
        weight *= discount;
    }
    acc
}

/// Verifies `r_{n+1} <= gamma * r_n + 1e-10` across a residual history.
pub fn contraction_residuals(residuals: &[f64], discount: f64) -> Result<()> {
    const SLACK: f64 = 1e-10;
    if residuals.len() < 3 {
        return Err(MdpError::ModelContract(format!(
            "contraction check needs at least 3 recorded sweeps, got {}",
            residuals.len()
        )));
    }
    for n in 1..residuals.len() {
        if residuals[n] > discount * residuals[n - 1] + SLACK {
            return Err(MdpError::Contraction(ContractionFailure {
                sweep: n,
                residual: residuals[n],
                previous: residuals[n - 1],
                discount,
                slack: SLACK,
            }));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// backup plans
// ---------------------------------------------------------------------------

/// Per-state grouping of actions by identical factor rows, with cached rows
/// and stage rewards. Built once per solve; sweeps only do dot products.
struct StatePlan {
    coords: Vec<usize>,
    /// Stage reward per joint action.
    rewards: Vec<f64>,
    /// Per layer: suffix-group structure. `pairs[l][c] = (row_group, next_suffix)`.
    pairs: Vec<Vec<(u32, u32)>>,
    /// Suffix id at the bottom level, per action: the key into the final
    /// expectation scalars.
    suffix_bottom: Vec<u32>,
    /// Per layer: cached rows (group-major) when the factor ignores the
    /// next-state prefix; `None` means rows are rebuilt per prefix.
    rows: Vec<Option<Vec<f64>>>,
    /// Representative action index per (layer, row group).
    reps: Vec<Vec<u32>>,
}

pub(crate) struct SolveContext<'a> {
    mdp: &'a Mdp,
    actions: Vec<JointAction>,
    plans: Vec<StatePlan>,
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

impl<'a> SolveContext<'a> {
    fn new(mdp: &'a Mdp) -> Result<Self> {
        let space = mdp.kernel.space();
        let aspace = mdp.kernel.action_space();
        let layers = space.layers();
        let actions = aspace.enumerate();
        let mut plans = Vec::with_capacity(space.total());
        for s in 0..space.total() {
            let coords = space.coords(s);
            let rewards: Vec<f64> = actions
                .iter()
                .map(|a| mdp.reward.reward(&coords, a))
                .collect();

            // group actions per layer by row key
            let mut group_of: Vec<Vec<u32>> = Vec::with_capacity(layers);
            let mut reps: Vec<Vec<u32>> = Vec::with_capacity(layers);
            for l in 0..layers {
                let factor = mdp.kernel.factor(l);
                let mut ids: HashMap<u64, u32> = HashMap::new();
                let mut of = Vec::with_capacity(actions.len());
                let mut rep = Vec::new();
                for (ai, a) in actions.iter().enumerate() {
                    let key = factor.action_group(&coords, a, aspace);
                    let next = ids.len() as u32;
                    let id = *ids.entry(key).or_insert_with(|| {
                        rep.push(ai as u32);
                        next
                    });
                    of.push(id);
                }
                group_of.push(of);
                reps.push(rep);
            }

            // suffix interning from the top layer down
            let mut suffix: Vec<u32> = group_of[layers - 1].clone();
            let mut pairs: Vec<Vec<(u32, u32)>> = vec![Vec::new(); layers];
            pairs[layers - 1] = (0..reps[layers - 1].len() as u32).map(|g| (g, 0)).collect();
            for l in (0..layers - 1).rev() {
                let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
                let mut new_suffix = Vec::with_capacity(actions.len());
                for (ai, &c_next) in suffix.iter().enumerate() {
                    let key = (group_of[l][ai], c_next);
                    let next = ids.len() as u32;
                    let id = *ids.entry(key).or_insert(next);
                    if id == next {
                        pairs[l].push(key);
                    }
                    new_suffix.push(id);
                }
                suffix = new_suffix;
            }

            // cache rows for factors that ignore the next prefix
            let mut rows: Vec<Option<Vec<f64>>> = Vec::with_capacity(layers);
            for l in 0..layers {
                let factor = mdp.kernel.factor(l);
                if factor.depends_on_next_prefix() {
                    rows.push(None);
                    continue;
                }
                let n = space.layer_size(l);
                let mut cache = vec![0.0; reps[l].len() * n];
                for (g, &rep) in reps[l].iter().enumerate() {
                    factor.fill_row(&[], &coords, &actions[rep as usize], &mut cache[g * n..(g + 1) * n]);
                }
                rows.push(Some(cache));
            }

            plans.push(StatePlan {
                coords,
                rewards,
                pairs,
                suffix_bottom: suffix,
                rows,
                reps,
            });
        }
        Ok(Self { mdp, actions, plans })
    }

    /// One Bellman backup: value and argmax over all joint actions.
    fn backup(&self, state: usize, v_prev: &[f64], discount: f64, scratch: &mut Scratch) -> (f64, u32) {
        let space = self.mdp.kernel.space();
        let layers = space.layers();
        let plan = &self.plans[state];

        // top tier: expectation over the top layer's next state, one table
        // over the lower-layer next prefix per row group
        let top = layers - 1;
        let np = space.prefix_total(top);
        let nl = space.layer_size(top);
        let ng = plan.pairs[top].len();
        scratch.tier.clear();
        scratch.tier.resize(ng * np, 0.0);
        for g in 0..ng {
            match &plan.rows[top] {
                Some(cache) => {
                    let row = &cache[g * nl..(g + 1) * nl];
                    for u in 0..np {
                        scratch.tier[g * np + u] = dot(row, &v_prev[u * nl..(u + 1) * nl]);
                    }
                }
                None => {
                    let rep = &self.actions[plan.reps[top][g] as usize];
                    scratch.row.clear();
                    scratch.row.resize(nl, 0.0);
                    for u in 0..np {
                        decode_prefix(u, space.sizes(), top, &mut scratch.prefix);
                        self.mdp.kernel.factor(top).fill_row(
                            &scratch.prefix,
                            &plan.coords,
                            rep,
                            &mut scratch.row,
                        );
                        scratch.tier[g * np + u] = dot(&scratch.row, &v_prev[u * nl..(u + 1) * nl]);
                    }
                }
            }
        }

        // eliminate the remaining layers from the top down
        for l in (0..top).rev() {
            let np2 = space.prefix_total(l);
            let nl2 = space.layer_size(l);
            let span = np2 * nl2; // size of a level-(l+1) table
            let ns = plan.pairs[l].len();
            scratch.next_tier.clear();
            scratch.next_tier.resize(ns * np2, 0.0);
            for (cid, &(g, c_next)) in plan.pairs[l].iter().enumerate() {
                let src = &scratch.tier[c_next as usize * span..(c_next as usize + 1) * span];
                match &plan.rows[l] {
                    Some(cache) => {
                        let row = &cache[g as usize * nl2..(g as usize + 1) * nl2];
                        for u in 0..np2 {
                            scratch.next_tier[cid * np2 + u] = dot(row, &src[u * nl2..(u + 1) * nl2]);
                        }
                    }
                    None => {
                        let rep = &self.actions[plan.reps[l][g as usize] as usize];
                        scratch.row.clear();
                        scratch.row.resize(nl2, 0.0);
                        for u in 0..np2 {
                            decode_prefix(u, space.sizes(), l, &mut scratch.prefix);
                            self.mdp.kernel.factor(l).fill_row(
                                &scratch.prefix,
                                &plan.coords,
                                rep,
                                &mut scratch.row,
                            );
                            scratch.next_tier[cid * np2 + u] = dot(&scratch.row, &src[u * nl2..(u + 1) * nl2]);
                        }
                    }
                }
            }
            std::mem::swap(&mut scratch.tier, &mut scratch.next_tier);
        }

        // maximize over actions; ties to the lowest canonical index
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0u32;
        for (ai, &r) in plan.rewards.iter().enumerate() {
            let val = r + discount * scratch.tier[plan.suffix_bottom[ai] as usize];
            if val > best {
                best = val;
                arg = ai as u32;
            }
        }
        (best, arg)
    }

    /// Expected next value of one action (used by policy evaluation).
    fn action_expectation(&self, state: usize, action: usize, v_prev: &[f64], scratch: &mut Scratch) -> f64 {
        let space = self.mdp.kernel.space();
        let layers = space.layers();
        let plan = &self.plans[state];
        let a = &self.actions[action];

        let top = layers - 1;
        let np = space.prefix_total(top);
        let nl = space.layer_size(top);
        scratch.tier.clear();
        scratch.tier.resize(np, 0.0);
        scratch.row.clear();
        scratch.row.resize(nl, 0.0);
        let top_factor = self.mdp.kernel.factor(top);
        if !top_factor.depends_on_next_prefix() {
            top_factor.fill_row(&[], &plan.coords, a, &mut scratch.row);
        }
        for u in 0..np {
            if top_factor.depends_on_next_prefix() {
                decode_prefix(u, space.sizes(), top, &mut scratch.prefix);
                top_factor.fill_row(&scratch.prefix, &plan.coords, a, &mut scratch.row);
            }
            scratch.tier[u] = dot(&scratch.row, &v_prev[u * nl..(u + 1) * nl]);
        }
        for l in (0..top).rev() {
            let np2 = space.prefix_total(l);
            let nl2 = space.layer_size(l);
            scratch.next_tier.clear();
            scratch.next_tier.resize(np2, 0.0);
            scratch.row.clear();
            scratch.row.resize(nl2, 0.0);
            let factor = self.mdp.kernel.factor(l);
            if !factor.depends_on_next_prefix() {
                factor.fill_row(&[], &plan.coords, a, &mut scratch.row);
            }
            for u in 0..np2 {
                if factor.depends_on_next_prefix() {
                    decode_prefix(u, space.sizes(), l, &mut scratch.prefix);
                    factor.fill_row(&scratch.prefix, &plan.coords, a, &mut scratch.row);
                }
                scratch.next_tier[u] = dot(&scratch.row, &scratch.tier[u * nl2..(u + 1) * nl2]);
            }
            std::mem::swap(&mut scratch.tier, &mut scratch.next_tier);
        }
        scratch.tier[0]
    }
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
// public solvers
// ---------------------------------------------------------------------------

/// One Bellman backup at a single state against the given value table.
pub fn bellman_backup(
    mdp: &Mdp,
    value: &ValueTable,
    state: &[usize],
    discount: f64,
) -> Result<(f64, JointAction)> {
    let space = mdp.kernel.space();
    if !space.contains(state) {
        return Err(MdpError::InvalidIndex(format!("state {state:?} outside space")));
    }
    if value.len() != space.total() {
        return Err(MdpError::ModelContract(
            "backup needs a full-state value table".into(),
        ));
    }
    let ctx = SolveContext::new(mdp)?;
    let mut scratch = Scratch::new();
    let (v, arg) = ctx.backup(space.index(state), value.values(), discount, &mut scratch);
    Ok((v, ctx.actions[arg as usize].clone()))
}

fn run_sweep(
    ctx: &SolveContext<'_>,
    v_prev: &[f64],
    out: &mut [f64],
    args: Option<&mut [u32]>,
    discount: f64,
    parallelism: Parallelism,
) {
    match parallelism {
        Parallelism::Sequential => {
            let mut scratch = Scratch::new();
            match args {
                Some(args) => {
                    for s in 0..out.len() {
                        let (v, a) = ctx.backup(s, v_prev, discount, &mut scratch);
                        out[s] = v;
                        args[s] = a;
                    }
                }
                None => {
                    for s in 0..out.len() {
                        out[s] = ctx.backup(s, v_prev, discount, &mut scratch).0;
                    }
                }
            }
        }
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => match args {
            Some(args) => {
                out.par_iter_mut()
                    .zip(args.par_iter_mut())
                    .enumerate()
                    .for_each_init(Scratch::new, |scratch, (s, (slot, arg))| {
                        let (v, a) = ctx.backup(s, v_prev, discount, scratch);
                        *slot = v;
                        *arg = a;
                    });
            }
            None => {
                out.par_iter_mut()
                    .enumerate()
                    .for_each_init(Scratch::new, |scratch, (s, slot)| {
                        *slot = ctx.backup(s, v_prev, discount, scratch).0;
                    });
            }
        },
    }
}

/// Value iteration to the optimal value function with greedy policy
/// extraction from the final table. Non-convergence within `max_sweeps` is
/// reported through `stats.converged`, not an error.
pub fn value_iteration(mdp: &Mdp, opts: &SolveOptions) -> Result<SolveOutcome> {
    opts.validate()?;
    let space = mdp.kernel.space();
    let ctx = SolveContext::new(mdp)?;
    let evals_per_sweep = (space.total() * mdp.kernel.action_space().total()) as u64;
    let threshold = opts.stop_threshold();

    let mut v_prev = vec![0.0; space.total()];
    let mut v_next = vec![0.0; space.total()];
    let mut stats = SweepStats::default();
    for _ in 0..opts.max_sweeps {
        run_sweep(&ctx, &v_prev, &mut v_next, None, opts.discount, opts.parallelism);
        let residual = sup_diff(&v_prev, &v_next);
        std::mem::swap(&mut v_prev, &mut v_next);
        stats.residuals.push(residual);
        stats.evaluations_per_sweep.push(evals_per_sweep);
        stats.sweeps += 1;
        if residual <= threshold {
            stats.converged = true;
            break;
        }
    }

    // greedy policy with respect to the final table
    let mut values = vec![0.0; space.total()];
    let mut args = vec![0u32; space.total()];
    run_sweep(
        &ctx,
        &v_prev,
        &mut values,
        Some(&mut args),
        opts.discount,
        opts.parallelism,
    );
    let policy = Policy::Deterministic(args.iter().map(|&a| a as usize).collect());

    let value = ValueTable::from_values(space.sizes().to_vec(), v_prev)?;
    Ok(SolveOutcome {
        value,
        policy,
        stats,
    })
}

/// Iterative policy evaluation to the fixed point of the policy's Bellman
/// recursion, within `tolerance` in sup norm.
pub fn evaluate_policy(mdp: &Mdp, policy: &Policy, opts: &SolveOptions) -> Result<EvalOutcome> {
    opts.validate()?;
    let space = mdp.kernel.space();
    let aspace = mdp.kernel.action_space();
    policy.validate(space, aspace)?;
    let ctx = SolveContext::new(mdp)?;
    let threshold = opts.stop_threshold();

    // per-state support: (action, probability) pairs
    let support: Vec<Vec<(usize, f64)>> = (0..space.total())
        .map(|s| match policy {
            Policy::Deterministic(c) => vec![(c[s], 1.0)],
            Policy::Stochastic(rows) => rows[s]
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(a, &p)| (a, p))
                .collect(),
        })
        .collect();
    let stage: Vec<f64> = (0..space.total())
        .map(|s| {
            support[s]
                .iter()
                .map(|&(a, p)| p * ctx.plans[s].rewards[a])
                .sum()
        })
        .collect();

    let eval_state = |s: usize, v_prev: &[f64], scratch: &mut Scratch| -> f64 {
        let mut future = 0.0;
        for &(a, p) in &support[s] {
            future += p * ctx.action_expectation(s, a, v_prev, scratch);
        }
        stage[s] + opts.discount * future
    };

    let mut v_prev = vec![0.0; space.total()];
    let mut v_next = vec![0.0; space.total()];
    let mut stats = SweepStats::default();
    for _ in 0..opts.max_sweeps {
        match opts.parallelism {
            Parallelism::Sequential => {
                let mut scratch = Scratch::new();
                for s in 0..space.total() {
                    v_next[s] = eval_state(s, &v_prev, &mut scratch);
                }
            }
            #[cfg(feature = "parallel")]
            Parallelism::Rayon => {
                v_next
                    .par_iter_mut()
                    .enumerate()
                    .for_each_init(Scratch::new, |scratch, (s, slot)| {
                        *slot = eval_state(s, &v_prev, scratch);
                    });
            }
        }
        let residual = sup_diff(&v_prev, &v_next);
        std::mem::swap(&mut v_prev, &mut v_next);
        stats.residuals.push(residual);
        stats.evaluations_per_sweep.push(space.total() as u64);
        stats.sweeps += 1;
        if residual <= threshold {
            stats.converged = true;
            break;
        }
    }
    let value = ValueTable::from_values(space.sizes().to_vec(), v_prev)?;
    Ok(EvalOutcome { value, stats })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
