mod common;

use common::pomdp;
use efe_core::learning::{
    column_tv, count_update, dirichlet_update, expected_likelihood, learn_likelihood, mean_column_entropy, median,
    normalize_columns, DirichletPrior,
};
use efe_core::pomdp::{exact_posterior, BeliefState};
use efe_core::rollout::rollout_pomdp;
use efe_core::{Error, FinitePomdp};

fn smoothed_episode(p: &FinitePomdp, seed: u64) -> (Vec<usize>, Vec<BeliefState>) {
    let ep = rollout_pomdp(p, |ctx| Ok((ctx.time + seed as usize) % p.n_actions()), seed).unwrap();
    let obs = ep.observations.clone().unwrap();
    let post = exact_posterior(p, &ep.actions, &obs).unwrap();
    (obs, post.smoothed)
}

fn truth(p: &FinitePomdp) -> Vec<Vec<f64>> {
    (0..p.n_states()).map(|s| p.likelihood_row(s).to_vec()).collect()
}

#[test]
fn updates_commute_and_conserve_mass() {
    let p = pomdp(4, 3, 2, 3, 4);
    let prior = DirichletPrior::uniform(3, 3, 0.5).unwrap();
    let (o1, q1) = smoothed_episode(&p, 1);
    let (o2, q2) = smoothed_episode(&p, 2);
    let a = dirichlet_update(&dirichlet_update(&prior, &o1, &q1).unwrap(), &o2, &q2).unwrap();
    let b = dirichlet_update(&dirichlet_update(&prior, &o2, &q2).unwrap(), &o1, &q1).unwrap();
    for (ra, rb) in a.counts().iter().zip(b.counts()) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-12);
        }
    }
    let added = a.total_mass() - prior.total_mass();
    assert!((added - 10.0).abs() < 1e-12);
}

#[test]
fn mismatched_lengths_are_rejected() {
    let prior = DirichletPrior::uniform(2, 2, 1.0).unwrap();
    let q = BeliefState::new(0, vec![0.5, 0.5]);
    assert!(matches!(
        dirichlet_update(&prior, &[0, 1], &[q]).unwrap_err(),
        Error::LengthMismatch { .. }
    ));
}

#[test]
fn count_and_dirichlet_differ_by_the_prior() {
    let p = pomdp(9, 3, 2, 2, 3);
    let a0 = vec![vec![2.0, 0.5, 1.0], vec![1.0, 0.5, 3.0]];
    let mut prior = DirichletPrior::new(a0.clone()).unwrap();
    let mut counts = vec![vec![0.0; 3]; 2];
    for seed in 0..30 {
        let (o, q) = smoothed_episode(&p, seed);
        prior = dirichlet_update(&prior, &o, &q).unwrap();
        counts = count_update(&counts, &o, &q).unwrap();
    }
    for k in 0..2 {
        for s in 0..3 {
            assert!((prior.get(k, s) - a0[k][s] - counts[k][s]).abs() < 1e-9);
        }
    }
    let from_counts = normalize_columns(&counts).unwrap();
    let summed: Vec<Vec<f64>> = (0..2).map(|k| (0..3).map(|s| a0[k][s] + counts[k][s]).collect()).collect();
    let readout = expected_likelihood(&prior).unwrap();
    let direct = normalize_columns(&summed).unwrap();
    for s in 0..3 {
        for k in 0..2 {
            assert!((readout[s][k] - direct[s][k]).abs() < 1e-12);
        }
    }
    assert!(readout.iter().zip(&from_counts).any(|(a, b)| a != b));
}

#[test]
fn single_count_column_reads_as_dirac() {
    let counts = vec![vec![0.0, 1.0], vec![3.0, 0.0], vec![0.0, 2.0]];
    let l = normalize_columns(&counts).unwrap();
    assert_eq!(l[0], vec![0.0, 1.0, 0.0]);
    assert!(matches!(
        normalize_columns(&[vec![0.0, 1.0], vec![0.0, 2.0]]).unwrap_err(),
        Error::ZeroColumn { state: 0 }
    ));
}

#[test]
fn concentrating_updates_lower_column_entropy() {
    let mut prior = DirichletPrior::uniform(3, 2, 1.0).unwrap();
    let dirac = BeliefState::new(0, vec![1.0, 0.0]);
    let mut last = mean_column_entropy(&expected_likelihood(&prior).unwrap());
    for _ in 0..20 {
        prior = dirichlet_update(&prior, &[2], &[dirac.clone()]).unwrap();
        let h = mean_column_entropy(&expected_likelihood(&prior).unwrap());
        assert!(h < last);
        last = h;
    }
}

#[test]
fn median_of_even_and_odd() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
}

#[test]
fn learned_likelihood_supports_accurate_inference() {
    let p = pomdp(12, 3, 2, 3, 3);
    let learned = learn_likelihood(&p, DirichletPrior::uniform(3, 3, 1.0).unwrap(), 20_000, 7, |_, _| Ok(())).unwrap();
    let estimate = expected_likelihood(&learned).unwrap();
    let tv = column_tv(&estimate, &truth(&p));
    assert!(tv.iter().all(|&x| x < 0.05), "{tv:?}");
    let model = p.with_likelihood(estimate).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 1000..1100 {
        let ep = rollout_pomdp(&p, |ctx| Ok(ctx.time % 2), seed).unwrap();
        let obs = ep.observations.unwrap();
        let exact = exact_posterior(&p, &ep.actions, &obs).unwrap();
        let approx = exact_posterior(&model, &ep.actions, &obs).unwrap();
        for (a, b) in exact.smoothed.iter().zip(&approx.smoothed) {
            let d: f64 = a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0;
            worst = worst.max(d);
        }
    }
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn learning_is_reproducible() {
    let p = pomdp(2, 3, 2, 2, 3);
    let run = || learn_likelihood(&p, DirichletPrior::uniform(2, 3, 1.0).unwrap(), 50, 99, |_, _| Ok(())).unwrap();
    assert_eq!(run(), run());
    let mut seen = Vec::new();
    learn_likelihood(&p, DirichletPrior::uniform(2, 3, 1.0).unwrap(), 5, 99, |k, prior| {
        seen.push((k, prior.total_mass()));
        Ok(())
    })
    .unwrap();
    let masses: Vec<f64> = seen.iter().map(|(_, m)| *m).collect();
    assert_eq!(seen.iter().map(|(k, _)| *k).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    for (k, m) in masses.iter().enumerate() {
        assert!((m - (6.0 + 4.0 * (k + 1) as f64)).abs() < 1e-9);
    }
}
