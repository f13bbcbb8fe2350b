mod common;

use common::{expected_path_reward, future_paths, log_pref, mdp, path_entropy, tuples};
use efe_core::aif::{
    efe_exact, efe_mean_field, marginalize_first_action, predictive_dist, sophisticated_plan, sophisticated_table,
    standard_plan, unroll_efe_check, EfeMode, EfeScore, Preferences, Prune,
};
use efe_core::dp::backward_induction;
use efe_core::model::trajectory_probability;
use efe_core::{ActionSequence, FiniteMdp, Guards, TIE_TOL};

fn g(score: EfeScore) -> f64 {
    score.g().expect("finite score")
}

#[test]
fn preference_examples() {
    let c = Preferences::finite(&[0.0, 0.0], 5.0).unwrap().c();
    assert_eq!(c, vec![0.5, 0.5]);
    let c = Preferences::finite(&[0.0, 1.0], 1.0).unwrap().c();
    let e = 1f64.exp();
    assert!((c[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
    assert!((c[1] - e / (1.0 + e)).abs() < 1e-15);
    let lim = Preferences::limit(&[0.0, 1.0, 1.0]).unwrap();
    assert_eq!(lim.max_reward_states(), &[1, 2]);
    // large beta does not overflow
    let c = Preferences::finite(&[0.0, 1000.0], 10.0).unwrap();
    assert!(c.log_c().unwrap().iter().all(|x| x.is_finite()));
}

#[test]
fn predictive_joint_matches_trajectory_probabilities() {
    let m = mdp(2, 3, 2, 3);
    let actions = [1usize, 0, 1];
    let q = predictive_dist(&m, &actions, 2).unwrap();
    let mut initial_at_2 = vec![0.0; 3];
    initial_at_2[2] = 1.0;
    let pinned = FiniteMdp::new(
        (0..2)
            .map(|a| (0..3).map(|s| m.transition_row(a, s).to_vec()).collect())
            .collect(),
        initial_at_2,
        m.reward().to_vec(),
        3,
    )
    .unwrap();
    for path in tuples(3, 3) {
        let mut full = vec![2];
        full.extend(&path);
        let p = trajectory_probability(&pinned, &actions, &full).unwrap();
        assert!((q.prob_of(&path) - p).abs() < 1e-15);
    }
    for (a, b) in q.marginal(0).iter().zip(m.transition_row(1, 2)) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn exact_efe_matches_direct_summation() {
    for seed in 0..10 {
        let m = mdp(seed, 3, 2, 2);
        let beta = 0.5 + seed as f64;
        let prefs = Preferences::finite(m.reward(), beta).unwrap();
        let lc = log_pref(m.reward(), beta);
        for actions in tuples(2, 2) {
            for s in 0..3 {
                let direct: f64 = future_paths(&m, s, &actions)
                    .iter()
                    .map(|(path, p)| p * (p.ln() - path.iter().map(|&x| lc[x]).sum::<f64>()))
                    .sum();
                let got = g(efe_exact(&m, &prefs, &actions, s).unwrap());
                assert!((got - direct).abs() < 1e-9, "{got} vs {direct}");
            }
        }
    }
}

#[test]
fn exact_efe_closed_forms() {
    // deterministic walk on 3 states with flat reward: G = T ln 3
    let shift = |k: usize| -> Vec<Vec<f64>> {
        (0..3)
            .map(|s| {
                let mut row = vec![0.0; 3];
                row[(s + k) % 3] = 1.0;
                row
            })
            .collect()
    };
    let m = FiniteMdp::new(vec![shift(1), shift(2)], vec![1.0, 0.0, 0.0], vec![0.3; 3], 2).unwrap();
    let prefs = Preferences::finite(m.reward(), 4.0).unwrap();
    assert!((g(efe_exact(&m, &prefs, &[0, 1], 0).unwrap()) - 2.0 * 3f64.ln()).abs() < 1e-12);
    // transitions equal to the preferences: G = 0
    let beta = 1.3;
    let reward = vec![0.0, 0.4, 1.0];
    let c: Vec<f64> = log_pref(&reward, beta).iter().map(|x| x.exp()).collect();
    let m = FiniteMdp::new(vec![vec![c.clone(); 3]], vec![1.0, 0.0, 0.0], reward.clone(), 3).unwrap();
    let prefs = Preferences::finite(&reward, beta).unwrap();
    assert!(g(efe_exact(&m, &prefs, &[0, 0, 0], 1).unwrap()).abs() < 1e-12);
}

#[test]
fn mean_field_gap_is_multi_information() {
    for seed in 0..20 {
        let m = mdp(seed, 3, 2, 3);
        let prefs = Preferences::finite(m.reward(), 2.0).unwrap();
        for actions in tuples(2, 3) {
            let exact = g(efe_exact(&m, &prefs, &actions, 0).unwrap());
            let mf = g(efe_mean_field(&m, &prefs, &actions, 0, None).unwrap());
            // multi-information from the enumerated joint
            let paths = future_paths(&m, 0, &actions);
            let mut marg = vec![vec![0.0; 3]; 3];
            for (path, p) in &paths {
                for (k, &s) in path.iter().enumerate() {
                    marg[k][s] += p;
                }
            }
            let h_joint = -paths.iter().map(|(_, p)| p * p.ln()).sum::<f64>();
            let h_marg: f64 = marg
                .iter()
                .map(|row| -row.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>())
                .sum();
            assert!(((exact - mf) - (h_marg - h_joint)).abs() < 1e-9);
        }
    }
}

#[test]
fn mean_field_is_exact_on_deterministic_models() {
    let m = FiniteMdp::new(
        vec![vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        3,
    )
    .unwrap();
    let prefs = Preferences::finite(m.reward(), 1.0).unwrap();
    for actions in tuples(2, 3) {
        let e = efe_exact(&m, &prefs, &actions, 0).unwrap();
        let f = efe_mean_field(&m, &prefs, &actions, 0, None).unwrap();
        assert!(e.max_abs_diff(&f) < 1e-12);
    }
}

#[test]
fn disabled_pruning_matches_unpruned() {
    let m = mdp(5, 4, 2, 3);
    let prefs = Preferences::finite(m.reward(), 3.0).unwrap();
    let prune = Prune {
        threshold: 0.0,
        best_seen: f64::NEG_INFINITY,
    };
    for actions in tuples(2, 3) {
        let a = efe_mean_field(&m, &prefs, &actions, 1, Some(prune)).unwrap();
        let b = efe_mean_field(&m, &prefs, &actions, 1, None).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn pruned_plan_keeps_the_winner() {
    for seed in 0..10 {
        let m = mdp(seed, 3, 3, 3);
        let prefs = Preferences::finite(m.reward(), 2.0).unwrap();
        let full = standard_plan(&m, &prefs, 0, 0, EfeMode::MeanField { prune: None }, &Guards::default()).unwrap();
        let pruned =
            standard_plan(&m, &prefs, 0, 0, EfeMode::MeanField { prune: Some(1.0) }, &Guards::default()).unwrap();
        let best = |plan: &efe_core::aif::StandardPlan| {
            plan.per_sequence
                .iter()
                .filter_map(|(_, s)| s.g())
                .fold(f64::INFINITY, f64::min)
        };
        assert_eq!(best(&full), best(&pruned));
        for ((sa, a), (sb, b)) in full.per_sequence.iter().zip(&pruned.per_sequence) {
            assert_eq!(sa, sb);
            if !b.is_pruned() {
                assert_eq!(a, b);
            } else {
                assert!(g(*a) > best(&full));
            }
        }
    }
}

#[test]
fn softmax_is_shift_invariant() {
    let m = mdp(8, 3, 3, 2);
    let prefs = Preferences::finite(m.reward(), 2.0).unwrap();
    let plan = standard_plan(&m, &prefs, 1, 0, EfeMode::Exact, &Guards::default()).unwrap();
    for shift in [-50.0, 3.0, 700.0] {
        let shifted: Vec<(ActionSequence, EfeScore)> = plan
            .per_sequence
            .iter()
            .map(|(s, e)| (s.clone(), EfeScore::finite(g(*e) + shift)))
            .collect();
        let post = marginalize_first_action(3, &shifted);
        for (a, b) in post.iter().zip(&plan.action_posterior) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn single_action_posterior_is_dirac() {
    let m = mdp(1, 3, 1, 3);
    for prefs in [Preferences::finite(m.reward(), 1.0).unwrap(), Preferences::limit(m.reward()).unwrap()] {
        let plan = standard_plan(&m, &prefs, 0, 0, EfeMode::Exact, &Guards::default()).unwrap();
        assert_eq!(plan.action_posterior, vec![1.0]);
        assert_eq!(plan.chosen, 0);
    }
}

#[test]
fn one_step_standard_and_sophisticated_agree_with_backward_induction() {
    for seed in 0..30 {
        let m = mdp(seed, 4, 3, 1);
        let prefs = Preferences::limit(m.reward()).unwrap();
        let bi = backward_induction(&m, TIE_TOL);
        for s in 0..4 {
            let std = standard_plan(&m, &prefs, s, 0, EfeMode::Exact, &Guards::default()).unwrap();
            let soph = sophisticated_plan(&m, &prefs, 0, s).unwrap();
            assert!(bi.argmax_sets.get(0, s).contains(&std.chosen));
            assert_eq!(std.chosen, soph.chosen);
        }
    }
}

#[test]
fn sophisticated_sets_equal_backward_induction_sets() {
    for seed in 0..20 {
        let m = mdp(seed, 4, 3, 4);
        let prefs = Preferences::limit(m.reward()).unwrap();
        let table = sophisticated_table(&m, &prefs, 0).unwrap();
        let bi = backward_induction(&m, TIE_TOL);
        for t in 0..4 {
            for s in 0..4 {
                assert_eq!(table.argmin(t, s), bi.argmax_sets.get(t, s), "seed {seed} t {t} s {s}");
                match table.get(t, s, table.canonical(t, s)) {
                    EfeScore::Limit { expected_reward, .. } => {
                        assert!((expected_reward - bi.values.get(t, s)).abs() < 1e-9)
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
        }
    }
}

#[test]
fn sophisticated_prefers_the_higher_entropy_tie() {
    // action 0 -> Dirac on state 1, action 1 -> uniform over states 1 and 2; both rewarding
    let m = FiniteMdp::new(
        vec![vec![vec![0.0, 1.0, 0.0]; 3], vec![vec![0.0, 0.5, 0.5]; 3]],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 1.0],
        1,
    )
    .unwrap();
    let prefs = Preferences::limit(m.reward()).unwrap();
    let plan = sophisticated_plan(&m, &prefs, 0, 0).unwrap();
    assert_eq!(plan.argmin_set, vec![1]);
    assert_eq!(plan.table.get(0, 0, 0), EfeScore::limit(1.0, 0.0));
}

#[test]
fn unrolled_identity_holds() {
    for seed in 0..15 {
        let m = mdp(seed, 3, 2, 3);
        for prefs in [Preferences::limit(m.reward()).unwrap(), Preferences::finite(m.reward(), 1.7).unwrap()] {
            let table = sophisticated_table(&m, &prefs, 0).unwrap();
            for t in 0..3 {
                for s in 0..3 {
                    for a in 0..2 {
                        let u = unroll_efe_check(&m, &prefs, t, s, a).unwrap();
                        assert!(u.max_abs_diff(&table.get(t, s, a)) < 1e-9);
                    }
                }
            }
            // last step: the unrolled sum is the one-step exact EFE
            for s in 0..3 {
                for a in 0..2 {
                    let u = unroll_efe_check(&m, &prefs, 2, s, a).unwrap();
                    let e = efe_exact(&m, &prefs, &[a], s).unwrap();
                    assert!(u.max_abs_diff(&e) < 1e-12);
                }
            }
        }
    }
}

#[test]
fn unroll_on_deterministic_model_is_greedy_path_efe() {
    let m = FiniteMdp::new(
        vec![vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]], vec![vec![1.0, 0.0, 0.0]; 3]],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.5, 1.0],
        3,
    )
    .unwrap();
    let prefs = Preferences::finite(m.reward(), 2.0).unwrap();
    let table = sophisticated_table(&m, &prefs, 0).unwrap();
    let mut s = 0;
    let mut actions = vec![0];
    s = (0..3).find(|&x| m.transition(0, s, x) == 1.0).unwrap();
    for t in 1..3 {
        let a = table.canonical(t, s);
        actions.push(a);
        s = (0..3).find(|&x| m.transition(a, s, x) == 1.0).unwrap();
    }
    let u = unroll_efe_check(&m, &prefs, 0, 0, 0).unwrap();
    let e = efe_exact(&m, &prefs, &actions, 0).unwrap();
    assert!(u.max_abs_diff(&e) < 1e-12);
}

#[test]
fn limit_sequences_maximize_reward_then_entropy() {
    for seed in 0..20 {
        let m = mdp(seed, 3, 2, 3);
        let prefs = Preferences::limit(m.reward()).unwrap();
        let plan = standard_plan(&m, &prefs, 0, 0, EfeMode::Exact, &Guards::default()).unwrap();
        for (seq, score) in &plan.per_sequence {
            let EfeScore::Limit {
                expected_reward,
                residual,
            } = *score
            else {
                panic!()
            };
            assert!((expected_reward - expected_path_reward(&m, 0, &seq.0)).abs() < 1e-12);
            assert!((residual + path_entropy(&m, 0, &seq.0)).abs() < 1e-12);
        }
    }
}

#[test]
fn standard_scheme_can_miss_the_optimum_at_horizon_two() {
    let guards = Guards::default();
    let witness = (0..1000).find(|&seed| {
        let m = mdp(seed, 3, 2, 2);
        let prefs = Preferences::limit(m.reward()).unwrap();
        let bi = backward_induction(&m, TIE_TOL);
        (0..3).any(|s| {
            let plan = standard_plan(&m, &prefs, s, 0, EfeMode::Exact, &guards).unwrap();
            !bi.argmax_sets.get(0, s).contains(&plan.chosen)
        })
    });
    assert!(witness.is_some());
}
