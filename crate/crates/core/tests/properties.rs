use std::sync::Arc;

use cmab_core::environments::{
    conditional_inclusion_probabilities, subgaussian_proxy, Environment,
};
use cmab_core::numerics::{bernoulli_kl, cholesky, klucb_index, stream_rng, Matrix};
use cmab_core::oracles::Sense;
use cmab_core::policies::{CtsBeta, Policy};
use cmab_core::{linear_reward, Action, ActionSpace, BanditInstance, CounterState};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn space_strategy() -> impl Strategy<Value = ActionSpace> {
    prop_oneof![
        (2usize..8)
            .prop_flat_map(|n| (Just(n), 1..=n))
            .prop_map(|(n, m)| ActionSpace::msets(n, m).unwrap()),
        (1usize..4, 1usize..4).prop_map(|(k, m)| ActionSpace::partition(k * m, m).unwrap()),
        (1usize..5).prop_map(|q| ActionSpace::matching(q).unwrap()),
    ]
}

fn with_weights() -> impl Strategy<Value = (ActionSpace, Vec<f64>)> {
    space_strategy().prop_flat_map(|s| {
        let n = s.n();
        (Just(s), prop::collection::vec(-1.0f64..1.0, n))
    })
}

fn eigen_min(m: &Matrix) -> f64 {
    let n = m.n();
    let d = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    d.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn oracle_is_optimal((space, w) in with_weights()) {
        let actions = space.enumerate().unwrap();
        let best = actions.iter().map(|a| linear_reward(a, &w).unwrap()).fold(f64::NEG_INFINITY, f64::max);
        let worst = actions.iter().map(|a| linear_reward(a, &w).unwrap()).fold(f64::INFINITY, f64::min);
        let got = linear_reward(&space.oracle(&w).unwrap(), &w).unwrap();
        prop_assert!((got - best).abs() < 1e-12);
        let low = linear_reward(&space.solve(&w, Sense::Minimize).unwrap(), &w).unwrap();
        prop_assert!((low - worst).abs() < 1e-12);
        let neg: Vec<f64> = w.iter().map(|x| -x).collect();
        prop_assert_eq!(space.oracle(&neg).unwrap(), space.solve(&w, Sense::Minimize).unwrap());
    }

    #[test]
    fn positive_part_proxy_is_smaller((space, w) in with_weights()) {
        let n = space.n();
        let c = Matrix::from_fn(n, |i, j| w[i.min(j)] * w[i.max(j)] + if i == j { 1.0 } else { 0.0 });
        let abs = subgaussian_proxy(&c, &space, false).unwrap();
        let pos = subgaussian_proxy(&c, &space, true).unwrap();
        for i in 0..n {
            prop_assert!(pos[i] <= abs[i]);
            prop_assert!(pos[i] >= c[(i, i)]);
        }
    }

    #[test]
    fn normalized_pair_counts_are_psd(picks in prop::collection::vec(0usize..24, 1..60), c in 0.0f64..=1.0) {
        let space = ActionSpace::matching(4).unwrap();
        let actions = space.enumerate().unwrap();
        let mut counters = CounterState::new(16, true);
        for &k in &picks {
            counters.update(&actions[k], &[0.0; 4]);
        }
        let seen: Vec<usize> = (0..16).filter(|&i| counters.pulls()[i] > 0).collect();
        let cm = Matrix::equicorrelated(16, 1.0, c);
        let sigma = Matrix::from_fn(seen.len(), |a, b| {
            let (i, j) = (seen[a], seen[b]);
            cm[(i, j)] * counters.pair(i, j).unwrap() as f64
                / (counters.pulls()[i] as f64 * counters.pulls()[j] as f64)
        });
        prop_assert!(eigen_min(&sigma) > -1e-12);
        let l = cholesky(&sigma).unwrap();
        prop_assert!(l.gram().max_abs_diff(&sigma) < 1e-9);
    }

    #[test]
    fn cholesky_reconstructs_gram_matrices(rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 5), 1..8)) {
        // B is k x 5, so B^T B is PSD with rank at most k.
        let sigma = Matrix::from_fn(5, |i, j| rows.iter().map(|r| r[i] * r[j]).sum());
        let l = cholesky(&sigma).unwrap();
        prop_assert!(l.gram().max_abs_diff(&sigma) < 1e-9);
        for i in 0..5 {
            for j in i + 1..5 {
                prop_assert_eq!(l[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn klucb_bounds(mean in 0.0f64..1.0, count in 1u32..2000, threshold in 0.0f64..20.0) {
        let q = klucb_index(mean, count as f64, threshold);
        prop_assert!(q >= mean && q <= 1.0);
        if q < 1.0 {
            prop_assert!(count as f64 * bernoulli_kl(mean, q) <= threshold + 1e-9);
        }
    }

    #[test]
    fn conditional_marginals_sum_to_s(p in prop::collection::vec(0.0f64..=1.0, 2..40), frac in 0.0f64..1.0) {
        let n = p.len();
        let s = 1 + ((n - 1) as f64 * frac) as usize;
        let pi = conditional_inclusion_probabilities(&p, s.min(n)).unwrap();
        prop_assert!((pi.iter().sum::<f64>() - s.min(n) as f64).abs() < 1e-8);
        prop_assert!(pi.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
    }

    #[test]
    fn counters_track_pulls(picks in prop::collection::vec(prop::collection::btree_set(0usize..6, 1..4), 0..40)) {
        let mut c = CounterState::new(6, true);
        for arms in &picks {
            let a = Action::new(arms.iter().copied().collect(), 6).unwrap();
            let x: Vec<f64> = a.arms().iter().map(|&i| i as f64).collect();
            c.update(&a, &x);
        }
        let total: u64 = c.pulls().iter().sum();
        prop_assert_eq!(total as usize, picks.iter().map(|s| s.len()).sum::<usize>());
        for i in 0..6 {
            prop_assert_eq!(c.pair(i, i), Some(c.pulls()[i]));
            if let Some(m) = c.mean(i) {
                prop_assert!((m - i as f64).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn beta_bookkeeping_along_a_run() {
    let env = Environment::independent_bernoulli(vec![0.2, 0.5, 0.7, 0.4, 0.9], 1.0).unwrap();
    let inst = Arc::new(
        BanditInstance::new(
            ActionSpace::msets(5, 2).unwrap(),
            env,
            Some((0.0, 1.0)),
            None,
        )
        .unwrap(),
    );
    let mut pol = CtsBeta::new("cts-beta".into(), Arc::clone(&inst)).unwrap();
    let mut rng = stream_rng(5, &[]);
    let mut env_rng = stream_rng(5, &[1]);
    let mut seen = [0u64; 5];
    for t in 1..=2000 {
        let a = pol.select(t, &mut rng).unwrap();
        let x = inst.env().sample(&mut env_rng);
        let obs: Vec<f64> = a.arms().iter().map(|&i| x[i]).collect();
        pol.observe(t, &a, &obs, &mut rng).unwrap();
        for &i in a.arms() {
            seen[i] += 1;
        }
        let post = pol.posterior();
        for i in 0..5 {
            assert!(post.a[i] >= 1 && post.b[i] >= 1);
            assert_eq!(post.a[i] + post.b[i] - 2, seen[i]);
        }
    }
}
