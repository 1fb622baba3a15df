use proptest::prelude::*;

use dpcov::adaptive::{bias_hat, build_histogram, diff_query, noise_hat, NormHistogram};
use dpcov::datagen::{parse_csv, rescale_radius, synth, write_csv_to, SynthSpec};
use dpcov::linalg::{covariance, eig_sym, eig_sym_jacobi, eigvals_sym, frobenius_dist, l2_norm, radius};
use dpcov::mechanisms::{gauss_cov, lap_cov, separate_cov, separate_cov_pure};
use dpcov::privacy::{compose, pure_to_zcdp, zcdp_to_approx};
use dpcov::{Dataset, PrivacyBudget, RandomStream, SymMatrix};

/// Ball-constrained dataset from a seed: random directions, norms from
/// `norm_of(u)` for uniform `u`.
fn dataset(d: usize, n: usize, seed: u64, norm_of: impl Fn(f64) -> f64) -> Dataset {
    let mut s = RandomStream::new(seed);
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| s.raw_normal()).collect();
            let r = norm_of(s.uniform()) / l2_norm(&v).max(f64::MIN_POSITIVE);
            v.iter().map(|x| x * r).collect()
        })
        .collect();
    Dataset::from_columns(&cols).unwrap()
}

fn any_budget() -> impl Strategy<Value = PrivacyBudget> {
    (any::<bool>(), 1e-3f64..10.0).prop_map(|(pure, v)| if pure { PrivacyBudget::pure(v) } else { PrivacyBudget::zcdp(v) }.unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mechanisms_return_symmetric_finite(d in 1usize..10, n in 1usize..40, seed in any::<u64>(), v in 0.01f64..5.0) {
        let x = dataset(d, n, seed, |u| u);
        let mut s = RandomStream::new(seed ^ 1);
        for est in [
            gauss_cov(&x, v, &mut s).unwrap().estimate,
            lap_cov(&x, v, &mut s).unwrap().estimate,
            separate_cov(&x, v, &mut s).unwrap().estimate,
            separate_cov_pure(&x, v, &mut s).unwrap().estimate,
        ] {
            prop_assert!(est.is_symmetric());
            prop_assert!(est.is_finite());
        }
    }

    #[test]
    fn zero_noise_worst_case_is_exact(d in 1usize..10, n in 1usize..40, seed in any::<u64>()) {
        let x = dataset(d, n, seed, |u| u);
        let sigma = covariance(&x).unwrap();
        let mut z = RandomStream::zero_noise(seed);
        prop_assert_eq!(gauss_cov(&x, 0.5, &mut z).unwrap().estimate, sigma.clone());
        prop_assert_eq!(lap_cov(&x, 0.5, &mut z).unwrap().estimate, sigma.clone());
        let sep = separate_cov(&x, 0.5, &mut z).unwrap().estimate;
        prop_assert!(frobenius_dist(&sep, &sigma).unwrap() <= 1e-10 * sigma.frobenius_norm().max(1e-300));
    }

    #[test]
    fn same_seed_same_estimate(d in 1usize..8, n in 1usize..30, seed in any::<u64>()) {
        let x = dataset(d, n, seed, |u| u);
        let a = separate_cov(&x, 0.3, &mut RandomStream::new(seed)).unwrap().estimate;
        let b = separate_cov(&x, 0.3, &mut RandomStream::new(seed)).unwrap().estimate;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn eigendecomposition_invariants(d in 1usize..12, seed in any::<u64>()) {
        let mut s = RandomStream::new(seed);
        let a = SymMatrix::from_upper_fn(d, |_, _| s.raw_normal());
        let e = eig_sym(&a).unwrap();
        let scale = a.frobenius_norm().max(1.0);
        prop_assert!(frobenius_dist(&e.reconstruct(), &a).unwrap() <= 1e-10 * scale);
        let vals = e.values();
        prop_assert!((vals.iter().sum::<f64>() - a.trace()).abs() <= 1e-10 * scale);
        for j in 0..d {
            for k in 0..d {
                let dot: f64 = e.vector(j).iter().zip(e.vector(k)).map(|(p, q)| p * q).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() <= 1e-10);
            }
        }
        let mut jac = eig_sym_jacobi(&a).unwrap().values().to_vec();
        jac.sort_by(|p, q| q.total_cmp(p));
        for (p, q) in eigvals_sym(&a).unwrap().iter().zip(&jac) {
            prop_assert!((p - q).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn composition_is_order_free(bs in prop::collection::vec(1e-3f64..5.0, 1..8), rot in 0usize..8) {
        let budgets: Vec<PrivacyBudget> = bs.iter().map(|&v| PrivacyBudget::zcdp(v).unwrap()).collect();
        let total = compose(&budgets).unwrap();
        let mut rotated = budgets.clone();
        rotated.rotate_left(rot % budgets.len());
        prop_assert!((compose(&rotated).unwrap().value - total.value).abs() <= 1e-12 * total.value);
        let (l, r) = budgets.split_at(budgets.len() / 2);
        if !l.is_empty() {
            let grouped = compose(&[compose(l).unwrap(), compose(r).unwrap()]).unwrap();
            prop_assert!((grouped.value - total.value).abs() <= 1e-12 * total.value);
        }
    }

    #[test]
    fn mixed_kinds_rejected(v in 1e-3f64..5.0) {
        prop_assert!(compose(&[PrivacyBudget::zcdp(v).unwrap(), PrivacyBudget::pure(v).unwrap()]).is_err());
    }

    #[test]
    fn conversion_never_gains_privacy(eps in 1e-4f64..20.0, delta in 1e-12f64..0.5) {
        let back = zcdp_to_approx(pure_to_zcdp(eps).unwrap(), delta).unwrap();
        prop_assert!(back >= eps * (1.0 - 1e-12));
    }

    #[test]
    fn bias_falls_noise_rises_with_threshold(d in 1usize..20, n in 1usize..200, seed in any::<u64>(), rho in 0.01f64..10.0) {
        let x = dataset(d, n, seed, |u| u.powi(4));
        let h = build_histogram(&x);
        let tr = 0.5;
        let mut prev_bias = 0.0;
        let mut prev_noise = 0.0;
        let mut prev_diff = f64::INFINITY;
        for k in 0..30 {
            let tau = 2f64.powi(-k);
            let b = bias_hat(&h, tau).unwrap();
            let z = noise_hat(tr, tau, rho, 0.05, d, n).unwrap();
            let diff = diff_query(&h, tr, tau, rho, 0.05, 1.0, d, n).unwrap();
            // walking down the grid: bias grows, noise shrinks
            if k > 0 {
                prop_assert!(b >= prev_bias * (1.0 - 1e-12));
                prop_assert!(z <= prev_noise);
                prop_assert!(diff >= prev_diff - 1e-9 * prev_diff.abs().max(1.0));
            }
            prev_bias = b;
            prev_noise = z;
            prev_diff = diff;
        }
    }

    #[test]
    fn histogram_neighbor_changes_one_bucket(d in 1usize..8, n in 2usize..60, seed in any::<u64>(), i in any::<prop::sample::Index>()) {
        let x = dataset(d, n, seed, |u| u.powi(3));
        let y = x.with_column(i.index(n), dataset(d, 1, seed ^ 7, |u| u.powi(3)).column(0)).unwrap();
        let (hx, hy) = (build_histogram(&x), build_histogram(&y));
        let keys: std::collections::BTreeSet<i32> = hx.counts().keys().chain(hy.counts().keys()).copied().collect();
        let moved: u64 = keys.iter().map(|&s| hx.count(s).abs_diff(hy.count(s))).sum();
        prop_assert!(moved <= 2);
        prop_assert!(hx.n() == hy.n());
    }

    #[test]
    fn synth_is_ball_constrained_and_dyadic(
        (bins, n) in (1usize..6).prop_flat_map(|b| (Just(b), b.max(2)..300)),
        d in 1usize..10,
        seed in any::<u64>(),
    ) {
        let x = synth(&SynthSpec::new(n, d, bins).with_seed(seed)).unwrap();
        prop_assert!(x.is_ball_constrained());
        for r in x.norms() {
            let k = -r.log2();
            prop_assert!((k - k.round()).abs() <= 1e-9 && k.round() >= 0.0 && k.round() < bins as f64);
        }
    }

    #[test]
    fn rescaled_radius_in_half_open_interval(d in 1usize..6, n in 1usize..30, seed in any::<u64>(), scale in -20.0f64..20.0) {
        let x = dataset(d, n, seed, |u| 0.1 + u).scaled(2f64.powf(scale));
        let r = radius(&rescale_radius(&x).unwrap()).unwrap();
        prop_assert!(r > 0.5 && r <= 1.0);
    }

    #[test]
    fn csv_round_trip(d in 1usize..6, n in 1usize..30, seed in any::<u64>()) {
        let x = dataset(d, n, seed, |u| u);
        let mut buf = Vec::new();
        write_csv_to(&x, &mut buf).unwrap();
        prop_assert_eq!(parse_csv(buf.as_slice()).unwrap(), x);
    }

    #[test]
    fn budgets_validate(b in any_budget()) {
        prop_assert!(b.value > 0.0);
        prop_assert!(PrivacyBudget::new(b.kind, -b.value).is_err());
        prop_assert!(PrivacyBudget::new(b.kind, 0.0).is_err());
    }
}

/// On clipped neighbors the threshold-search query moves by at most one.
#[test]
fn diff_query_sensitivity() {
    let mut s = RandomStream::new(42);
    let mut worst: f64 = 0.0;
    for trial in 0..10_000u64 {
        let d = 1 + s.below(16) as usize;
        let n = 2 + s.below(100) as usize;
        let x = dataset(d, n, trial, |u| u.powi(2));
        let replacement = dataset(d, 1, trial ^ 0xabc, |u| u.sqrt());
        let y = x.with_column(s.below(n as u64) as usize, replacement.column(0)).unwrap();
        let (hx, hy) = (build_histogram(&x), build_histogram(&y));
        let rho = 10f64.powf(-2.0 + 4.0 * s.uniform());
        let tr = s.uniform();
        for k in 0..24 {
            let tau = 2f64.powi(-k);
            let a = diff_query(&hx, tr, tau, rho, 0.05, 1.0, d, n).unwrap();
            let b = diff_query(&hy, tr, tau, rho, 0.05, 1.0, d, n).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst <= 1.0 + 1e-9, "largest change {worst}");
}

#[test]
fn histogram_ignores_zero_norms() {
    let h = NormHistogram::from_norms(&[0.0, 0.0, 0.75, 0.5]);
    assert_eq!(h.n(), 4);
    assert_eq!(h.total(), 2);
    assert_eq!(h.count(-1), 1);
    assert_eq!(h.count(-2), 1);
}
