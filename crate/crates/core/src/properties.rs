//! Randomized invariants across the whole pipeline.

use crate::arimoto::{arimoto_map, iterate, StoppingRule};
use crate::channel::{
    entropy, kl_divergence, mutual_information, output_distribution, Channel, Distribution,
};
use crate::empirics::mu_series;
use crate::fixtures;
use crate::local::analyze;
use crate::numeric::{max_abs_diff, norm2, sum};
use crate::oracles::{fd_jacobian, random_channel, FdSettings};
use crate::slow_rate::slow_constants;
use crate::solver::{solve_capacity, SolverOptions};
use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn channel() -> impl Strategy<Value = Channel> {
    (2usize..=4, 0usize..=4, any::<u64>()).prop_map(|(m, extra, seed)| {
        let n = (m + extra).min(6);
        random_channel(&mut ChaCha8Rng::seed_from_u64(seed), m, n)
    })
}

fn interior(k: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|w| Distribution::normalized(w).unwrap())
}

fn channel_and_start() -> impl Strategy<Value = (Channel, Distribution)> {
    channel().prop_flat_map(|c| {
        let m = c.inputs();
        (Just(c), interior(m))
    })
}

/// `H(Q) − Σ λ_i H(P_i)`, written out independently of the library.
fn mi_by_entropies(lambda: &Distribution, c: &Channel) -> f64 {
    let h = |p: &[f64]| {
        -p.iter()
            .filter(|&&x| x > 0.0)
            .map(|x| x * x.ln())
            .sum::<f64>()
    };
    let q: Vec<f64> = (0..c.outputs())
        .map(|j| {
            (0..c.inputs())
                .map(|i| lambda.probs()[i] * c.row(i)[j])
                .sum()
        })
        .collect();
    h(&q)
        - (0..c.inputs())
            .map(|i| lambda.probs()[i] * h(c.row(i)))
            .sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutual_information_matches_entropy_form((c, l) in channel_and_start()) {
        let mi = mutual_information(&l, &c).unwrap();
        assert_abs_diff_eq!(mi, mi_by_entropies(&l, &c), epsilon = 1e-12);
        prop_assert!(mi >= -1e-15);
        prop_assert!(mi <= (c.inputs() as f64).ln() + 1e-12);
    }

    #[test]
    fn divergence_is_nonnegative(a in interior(5), b in interior(5)) {
        prop_assert!(kl_divergence(&a, &b).unwrap() >= 0.0);
        prop_assert!(kl_divergence(&a, &a).unwrap().abs() < 1e-15);
        let h = entropy(&a);
        prop_assert!((0.0..=5f64.ln() + 1e-12).contains(&h));
    }

    #[test]
    fn update_stays_in_the_simplex((c, l) in channel_and_start()) {
        let next = arimoto_map(&c, &l).unwrap();
        prop_assert!(next.probs().iter().all(|&x| x > 0.0));
        assert_abs_diff_eq!(sum(next.probs().iter().copied()), 1.0, epsilon = 1e-12);
        let q = output_distribution(&next, &c).unwrap();
        assert_abs_diff_eq!(sum(q.probs().iter().copied()), 1.0, epsilon = 1e-12);
        prop_assert!(mutual_information(&next, &c).unwrap() >= mutual_information(&l, &c).unwrap() - 1e-12);
    }

    #[test]
    fn summation_ignores_order(v in prop::collection::vec(-1e3f64..1e3, 0..40)) {
        let rev: Vec<f64> = v.iter().rev().copied().collect();
        prop_assert!((sum(v.iter().copied()) - sum(rev)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn capacity_sandwich_on_random_traces((c, l) in channel_and_start()) {
        let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
        let t = iterate(&c, &l, StoppingRule::iterations(200)).unwrap();
        prop_assert_eq!(t.sandwich_violation(&sol.lambda_star, sol.capacity, 1e-12).unwrap(), None);
    }

    #[test]
    fn local_identities_at_the_optimum(c in channel()) {
        let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
        let la = analyze(&c, &sol).unwrap();
        let m = c.inputs();
        for row in &la.jacobian {
            prop_assert!(sum(row.iter().copied()).abs() <= 1e-10);
        }
        let at = sol.lambda_star.probs();
        for i in 0..m {
            let s = sum((0..m).map(|a| at[a] * la.dstar.first[a][i]));
            assert_abs_diff_eq!(s, -1.0, epsilon = 1e-12);
        }
        let fd = fd_jacobian(&c, at, FdSettings::default()).unwrap();
        prop_assert!(max_abs_diff(&la.jacobian, &fd) <= 1e-6);
        prop_assert!(la.spectrum.blocks.ranges_hold());
    }
}

#[test]
fn decay_is_bounded_by_the_second_eigenvalue_envelope() {
    let c = fixtures::phi4();
    let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
    let la = analyze(&c, &sol).unwrap();
    let theta = la.spectrum.theta_sec.unwrap();
    let t = iterate(&c, &Distribution::uniform(3), StoppingRule::iterations(60)).unwrap();
    let mu = mu_series(&t, &sol.lambda_star).unwrap();
    let ratio = |n: usize| norm2(&mu[n]) / theta.powi(n as i32);
    let k = (0..=20).map(ratio).fold(0.0, f64::max);
    for n in 21..=60 {
        assert!(ratio(n) <= k, "N = {n}: {} > {k}", ratio(n));
    }
}

#[test]
fn slow_projection_tracks_the_trace() {
    let c = fixtures::phi2_exact();
    let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
    let la = analyze(&c, &sol).unwrap();
    let k = slow_constants(&la.dstar, &sol.classification).unwrap();
    let t = iterate(&c, &Distribution::uniform(3), StoppingRule::iterations(500)).unwrap();
    let mu = mu_series(&t, &sol.lambda_star).unwrap();
    let amp = k.fit_amplitude(&mu, 10, 50);
    let [i1, i2, i3] = k.order;
    let p = k.project_mu12(mu[500][i3], amp, 500);
    assert_abs_diff_eq!(p[0], mu[500][i1], epsilon = 1e-5);
    assert_abs_diff_eq!(p[1], mu[500][i2], epsilon = 1e-5);
}
