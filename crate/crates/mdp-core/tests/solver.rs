//! Solver tests against closed forms and brute-force oracles.
//!
//! Expected values marked by hand derivations: the 2-state cycle solves the
//! 2x2 linear system V0 = 1 + 0.9 V1, V1 = 0 + 0.9 V0, giving
//! V = (1/(1-0.81), 0.9/(1-0.81)).

use mdp_core::*;

struct FnReward {
    layers: usize,
    f: Box<dyn Fn(&[usize], &JointAction) -> f64 + Send + Sync>,
}

impl RewardModel for FnReward {
    fn layers(&self) -> usize {
        self.layers
    }
    fn internal_reward(&self, state: &[usize], action: &JointAction) -> f64 {
        (self.f)(state, action)
    }
    fn external_cost(&self, _l: usize, _s: usize, _a: usize) -> f64 {
        0.0
    }
    fn internal_cost(&self, _l: usize, _s: usize, _b: usize) -> f64 {
        0.0
    }
    fn external_multiplier(&self, _l: usize) -> f64 {
        1.0
    }
    fn internal_multiplier(&self, _l: usize) -> f64 {
        1.0
    }
}

fn single_layer_mdp(rows: Vec<Vec<Vec<f64>>>, rewards: Vec<Vec<f64>>) -> Mdp {
    // rows[a][s] over next states; rewards[s][a]
    let n_states = rows[0].len();
    let n_actions = rows.len();
    let space = StateSpace::new(vec![n_states]).unwrap();
    let aspace = ActionSpace::new(vec![n_actions], vec![1]).unwrap();
    let factor = mdp_core_test_factor(rows);
    let kernel = TransitionKernel::new(space, aspace, vec![factor]).unwrap();
    let reward = FnReward {
        layers: 1,
        f: Box::new(move |s: &[usize], a: &JointAction| rewards[s[0]][a.external(0)]),
    };
    Mdp {
        kernel,
        reward: Box::new(reward),
    }
}

fn mdp_core_test_factor(rows: Vec<Vec<Vec<f64>>>) -> Box<dyn TransitionFactor> {
    struct F {
        rows: Vec<Vec<Vec<f64>>>,
    }
    impl TransitionFactor for F {
        fn depends_on_next_prefix(&self) -> bool {
            false
        }
        fn action_group(&self, _s: &[usize], action: &JointAction, _asp: &ActionSpace) -> u64 {
            action.external(0) as u64
        }
        fn fill_row(&self, _p: &[usize], state: &[usize], action: &JointAction, out: &mut [f64]) {
            out.copy_from_slice(&self.rows[action.external(0)][state[0]]);
        }
    }
    Box::new(F { rows })
}

fn opts(discount: f64) -> SolveOptions {
    SolveOptions {
        discount,
        tolerance: 1e-10,
        max_sweeps: 10_000,
        parallelism: Parallelism::Sequential,
    }
}

#[test]
fn geometric_series_single_state() {
    let mdp = single_layer_mdp(vec![vec![vec![1.0]]], vec![vec![1.0]]);
    let policy = Policy::Deterministic(vec![0]);
    let out = evaluate_policy(&mdp, &policy, &opts(0.5)).unwrap();
    assert!((out.value.get(0) - 2.0).abs() < 1e-9);
    assert!(out.stats.converged);
}

#[test]
fn zero_discount_evaluates_to_stage_reward() {
    let mdp = single_layer_mdp(
        vec![vec![vec![0.3, 0.7], vec![0.6, 0.4]]],
        vec![vec![1.25], vec![-0.5]],
    );
    let policy = Policy::Deterministic(vec![0, 0]);
    let out = evaluate_policy(&mdp, &policy, &opts(0.0)).unwrap();
    assert_eq!(out.value.get(0), 1.25);
    assert_eq!(out.value.get(1), -0.5);
}

#[test]
fn two_state_cycle_matches_linear_system() {
    // deterministic cycle with rewards (1, 0), discount 0.9
    let mdp = single_layer_mdp(
        vec![vec![vec![0.0, 1.0], vec![1.0, 0.0]]],
        vec![vec![1.0], vec![0.0]],
    );
    let policy = Policy::Deterministic(vec![0, 0]);
    let out = evaluate_policy(&mdp, &policy, &opts(0.9)).unwrap();
    let v0 = 1.0 / (1.0 - 0.81);
    let v1 = 0.9 / (1.0 - 0.81);
    assert!((out.value.get(0) - v0).abs() < 1e-8, "{}", out.value.get(0));
    assert!((out.value.get(1) - v1).abs() < 1e-8, "{}", out.value.get(1));
}

#[test]
fn evaluate_policy_rejects_bad_inputs() {
    let mdp = single_layer_mdp(vec![vec![vec![1.0]]], vec![vec![1.0]]);
    let bad_row = Policy::Stochastic(vec![vec![0.7]]);
    assert!(matches!(
        evaluate_policy(&mdp, &bad_row, &opts(0.5)),
        Err(MdpError::InvalidPolicy(_))
    ));
    let policy = Policy::Deterministic(vec![0]);
    let mut o = opts(1.0);
    o.discount = 1.0;
    assert!(matches!(
        evaluate_policy(&mdp, &policy, &o),
        Err(MdpError::InvalidDiscount(_))
    ));
}

#[test]
fn value_iteration_picks_dominant_action() {
    let mdp = single_layer_mdp(
        vec![vec![vec![1.0]], vec![vec![1.0]]],
        vec![vec![0.0, 1.0]],
    );
    let out = value_iteration(&mdp, &opts(0.5)).unwrap();
    assert!((out.value.get(0) - 2.0).abs() < 1e-9);
    assert_eq!(out.policy.action_at(0), Some(1));
}

#[test]
fn zero_discount_value_iteration_is_myopic() {
    let rewards = vec![vec![0.4, -1.0, 0.9], vec![2.0, 2.5, -3.0], vec![0.0, 0.0, 0.0]];
    let rows = vec![
        vec![vec![0.2, 0.5, 0.3]; 3],
        vec![vec![1.0, 0.0, 0.0]; 3],
        vec![vec![0.0, 0.0, 1.0]; 3],
    ];
    let mdp = single_layer_mdp(rows, rewards.clone());
    let out = value_iteration(&mdp, &opts(0.0)).unwrap();
    for s in 0..3 {
        // first maximizer, matching the lowest-index tie-break
        let mut myopic = 0;
        for a in 1..3 {
            if rewards[s][a] > rewards[s][myopic] {
                myopic = a;
            }
        }
        assert_eq!(out.policy.action_at(s), Some(myopic));
        assert_eq!(out.value.get(s), rewards[s][myopic]);
    }
}

#[test]
fn non_convergence_is_flagged() {
    let mdp = single_layer_mdp(
        vec![vec![vec![0.0, 1.0], vec![1.0, 0.0]]],
        vec![vec![1.0], vec![0.0]],
    );
    let mut o = opts(0.9);
    o.max_sweeps = 2;
    let out = value_iteration(&mdp, &o).unwrap();
    assert!(!out.stats.converged);
    assert_eq!(out.stats.sweeps, 2);
    assert!(out.stats.residuals.last().unwrap() > &o.stop_threshold());
}

// ---------------------------------------------------------------------------
// Bellman backup against brute force
// ---------------------------------------------------------------------------

/// Brute-force backup: enumerate all joint next states via the full product.
fn brute_backup(mdp: &Mdp, v: &ValueTable, state: &[usize], discount: f64) -> (f64, usize) {
    let space = mdp.kernel.space();
    let aspace = mdp.kernel.action_space();
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (ai, action) in aspace.enumerate().iter().enumerate() {
        let mut future = 0.0;
        for next in 0..space.total() {
            let coords = space.coords(next);
            future += mdp.kernel.probability(state, action, &coords) * v.get(next);
        }
        let val = mdp.reward.reward(state, action) + discount * future;
        if val > best {
            best = val;
            arg = ai;
        }
    }
    (best, arg)
}

fn two_layer_mdp() -> Mdp {
    // layer 1: 2 states, 2 external actions; layer 2 (top): 3 states,
    // 2 internal actions, kernel conditioned on layer 1's next state
    let space = StateSpace::new(vec![2, 3]).unwrap();
    let aspace = ActionSpace::new(vec![2, 1], vec![1, 2]).unwrap();

    let f1 = mdp_core_test_factor_layer1();
    let f2 = top_factor();
    let kernel = TransitionKernel::new(space, aspace, vec![f1, f2]).unwrap();
    let reward = FnReward {
        layers: 2,
        f: Box::new(|s: &[usize], a: &JointAction| {
            (s[0] as f64 - 0.3) * (1.0 + a.external(0) as f64)
                + s[1] as f64 * 0.25
                + a.internal(1) as f64 * 0.4
        }),
    };
    Mdp {
        kernel,
        reward: Box::new(reward),
    }
}

fn mdp_core_test_factor_layer1() -> Box<dyn TransitionFactor> {
    struct F;
    impl TransitionFactor for F {
        fn depends_on_next_prefix(&self) -> bool {
            false
        }
        fn action_group(&self, _s: &[usize], a: &JointAction, _asp: &ActionSpace) -> u64 {
            a.external(0) as u64
        }
        fn fill_row(&self, _p: &[usize], state: &[usize], action: &JointAction, out: &mut [f64]) {
            let rows = [
                [[0.8, 0.2], [0.4, 0.6]], // action 0
                [[0.1, 0.9], [0.9, 0.1]], // action 1
            ];
            out.copy_from_slice(&rows[action.external(0)][state[0]]);
        }
    }
    Box::new(F)
}

fn top_factor() -> Box<dyn TransitionFactor> {
    struct F;
    impl TransitionFactor for F {
        fn depends_on_next_prefix(&self) -> bool {
            true
        }
        fn action_group(&self, _s: &[usize], a: &JointAction, _asp: &ActionSpace) -> u64 {
            a.internal(1) as u64
        }
        fn fill_row(&self, prefix: &[usize], state: &[usize], action: &JointAction, out: &mut [f64]) {
            // rotate mass by the realized lower next state and internal action
            let shift = (prefix[0] + action.internal(1) + state[1]) % 3;
            let base = [0.6, 0.3, 0.1];
            for i in 0..3 {
                out[i] = base[(i + shift) % 3];
            }
        }
    }
    Box::new(F)
}

#[test]
fn backup_matches_brute_force_enumeration() {
    let mdp = two_layer_mdp();
    let space = mdp.kernel.space().clone();
    let mut v = ValueTable::zeros(&space, 2);
    for (i, slot) in v.values_mut().iter_mut().enumerate() {
        *slot = ((i * 7919) % 13) as f64 * 0.17 - 0.9;
    }
    for s in 0..space.total() {
        let coords = space.coords(s);
        let (val, act) = bellman_backup(&mdp, &v, &coords, 0.9).unwrap();
        let (bval, barg) = brute_backup(&mdp, &v, &coords, 0.9);
        assert!((val - bval).abs() < 1e-12, "state {coords:?}: {val} vs {bval}");
        assert_eq!(mdp.kernel.action_space().index(&act.pairs), barg);
    }
}

#[test]
fn backup_with_zero_values_is_max_stage_reward() {
    let mdp = two_layer_mdp();
    let space = mdp.kernel.space().clone();
    let v = ValueTable::zeros(&space, 2);
    let coords = vec![1, 2];
    let (val, _) = bellman_backup(&mdp, &v, &coords, 0.9).unwrap();
    let best = mdp
        .kernel
        .action_space()
        .enumerate()
        .iter()
        .map(|a| mdp.reward.reward(&coords, a))
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(val, best);
}

#[test]
fn backup_deterministic_transition() {
    // single action, deterministic hop 0 -> 1
    let mdp = single_layer_mdp(
        vec![vec![vec![0.0, 1.0], vec![0.0, 1.0]]],
        vec![vec![0.5], vec![0.0]],
    );
    let space = mdp.kernel.space().clone();
    let mut v = ValueTable::zeros(&space, 1);
    v.set(1, 3.0);
    let (val, _) = bellman_backup(&mdp, &v, &[0], 0.9).unwrap();
    assert!((val - (0.5 + 0.9 * 3.0)).abs() < 1e-15);
}

// ---------------------------------------------------------------------------
// discounted return and contraction
// ---------------------------------------------------------------------------

#[test]
fn discounted_return_examples() {
    let ones = vec![1.0; 10];
    assert_eq!(discounted_return(&ones, 0.0), 1.0);
    assert_eq!(discounted_return(&[1.0, 1.0, 1.0, 1.0], 0.5), 1.875);
}

#[test]
fn discounted_return_matches_reversed_horner() {
    // reversed-order summation oracle
    let mut state = 88172645463325252u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 1000) as f64 / 250.0 - 2.0
    };
    for len in [1usize, 5, 40, 200] {
        let rewards: Vec<f64> = (0..len).map(|_| next()).collect();
        for gamma in [0.0, 0.3, 0.9, 0.99] {
            let forward = discounted_return(&rewards, gamma);
            let horner = rewards.iter().rev().fold(0.0, |acc, &r| r + gamma * acc);
            assert!((forward - horner).abs() < 1e-12, "{forward} vs {horner}");
        }
    }
}

#[test]
fn contraction_verdicts() {
    // zero-discount residuals collapse after the first sweep
    assert!(contraction_residuals(&[5.0, 0.0, 0.0, 0.0], 0.0).is_ok());
    // constant-reward geometric decay
    let r = 3.0;
    let seq: Vec<f64> = (0..10).map(|n| r * 0.9f64.powi(n)).collect();
    assert!(contraction_residuals(&seq, 0.9).is_ok());
    // violation names the sweep
    let err = contraction_residuals(&[1.0, 0.9, 0.95], 0.9).unwrap_err();
    match err {
        MdpError::Contraction(f) => assert_eq!(f.sweep, 2),
        other => panic!("unexpected error {other:?}"),
    }
    assert!(contraction_residuals(&[1.0, 0.5], 0.9).is_err());
}

#[test]
fn solver_residuals_contract_on_toy() {
    let mdp = two_layer_mdp();
    let out = value_iteration(&mdp, &opts(0.9)).unwrap();
    assert!(out.stats.converged);
    contraction_residuals(&out.stats.residuals, 0.9).unwrap();
}

// ---------------------------------------------------------------------------
// optimality properties
// ---------------------------------------------------------------------------

#[test]
fn greedy_policy_evaluation_reproduces_value_table() {
    let mdp = two_layer_mdp();
    let o = opts(0.9);
    let out = value_iteration(&mdp, &o).unwrap();
    let eval = evaluate_policy(&mdp, &out.policy, &o).unwrap();
    assert!(eval.value.sup_norm_diff(&out.value) <= 2.0 * o.tolerance);
}

#[test]
fn random_policies_never_beat_value_iteration() {
    let mdp = two_layer_mdp();
    let o = opts(0.9);
    let out = value_iteration(&mdp, &o).unwrap();
    let n_actions = mdp.kernel.action_space().total();
    let n_states = mdp.kernel.space().total();
    let mut seed = 0x9e3779b97f4a7c15u64;
    for _ in 0..20 {
        let choices: Vec<usize> = (0..n_states)
            .map(|_| {
                seed ^= seed << 13;
                seed ^= seed >> 7;
                seed ^= seed << 17;
                (seed % n_actions as u64) as usize
            })
            .collect();
        let policy = Policy::Deterministic(choices);
        let eval = evaluate_policy(&mdp, &policy, &o).unwrap();
        for s in 0..n_states {
            assert!(eval.value.get(s) <= out.value.get(s) + 2.0 * o.tolerance);
        }
    }
}

/// Pure-action maximization loses nothing against mixed actions: the backup
/// objective is multilinear in the per-layer mixing probabilities, so its
/// maximum over the product of simplices sits at a vertex. Because both the
/// reward and the kernel are linear in each layer's mixture, a mixed action's
/// backup value is the mixture-weighted combination of pure backup values.
#[test]
fn mixed_action_grid_never_beats_pure_max() {
    let mdp = two_layer_mdp();
    let space = mdp.kernel.space().clone();
    let aspace = mdp.kernel.action_space().clone();
    let mut v = ValueTable::zeros(&space, 2);
    for (i, slot) in v.values_mut().iter_mut().enumerate() {
        *slot = ((i * 31) % 7) as f64 * 0.5 - 1.0;
    }
    // grid over the two binary simplices (external layer 1, internal layer 2)
    let steps: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    for s in 0..space.total() {
        let coords = space.coords(s);
        let pure: Vec<f64> = aspace
            .enumerate()
            .iter()
            .map(|a| {
                let mut future = 0.0;
                for next in 0..space.total() {
                    future += mdp.kernel.probability(&coords, a, &space.coords(next)) * v.get(next);
                }
                mdp.reward.reward(&coords, a) + 0.9 * future
            })
            .collect();
        let pure_max = pure.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut grid_max = f64::NEG_INFINITY;
        for &p in &steps {
            for &q in &steps {
                // weight(a) = P(ext1 = a.0) * P(int2 = b.1)
                let mut val = 0.0;
                for (ai, a) in aspace.enumerate().iter().enumerate() {
                    let w_ext = if a.external(0) == 0 { p } else { 1.0 - p };
                    let w_int = if a.internal(1) == 0 { q } else { 1.0 - q };
                    val += w_ext * w_int * pure[ai];
                }
                grid_max = grid_max.max(val);
            }
        }
        assert!(
            grid_max <= pure_max + 1e-9,
            "state {coords:?}: grid {grid_max} vs pure {pure_max}"
        );
    }
}

#[cfg(feature = "parallel")]
#[test]
fn parallel_and_sequential_sweeps_are_bit_identical() {
    let mdp = two_layer_mdp();
    let seq = value_iteration(
        &mdp,
        &SolveOptions {
            parallelism: Parallelism::Sequential,
            ..opts(0.9)
        },
    )
    .unwrap();
    let par = value_iteration(
        &mdp,
        &SolveOptions {
            parallelism: Parallelism::Rayon,
            ..opts(0.9)
        },
    )
    .unwrap();
    assert_eq!(seq.value.values(), par.value.values());
    assert_eq!(seq.policy, par.policy);
    assert_eq!(seq.stats.residuals, par.stats.residuals);
}
