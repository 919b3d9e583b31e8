use approx::assert_relative_eq;
use proptest::prelude::*;

use poslab::bounds::*;
use poslab::forms::{HMatrix, PQForm};
use poslab::models::{ClassModel, SplitP1Model, TorusModel};
use poslab::report::Status;
use poslab::sampling::diagonal;
use poslab::scan::trial_rng;

fn example() -> (SplitP1Model, Vec<f64>, Vec<f64>) {
    (SplitP1Model::new(2).unwrap(), vec![3.0, 2.0], vec![1.0, 0.5])
}

fn scalar(n: usize, volume: f64, mixed: f64, s0: f64, t0: f64) -> ScalarData {
    ScalarData {
        n,
        volume,
        mixed,
        s0,
        t0,
    }
}

#[test]
fn split_p1_example_values() {
    let (m, a, b) = example();
    assert_relative_eq!(conjecture_rhs(&m, &a, &b).unwrap(), 5.0, epsilon = 1e-13);
    assert_relative_eq!(vol_exact_nef(&m, &vec![2.0, 1.5]).unwrap(), 6.0, epsilon = 1e-14);
    assert_relative_eq!(vol_exact_nef(&m, &vec![0.0, 0.0]).unwrap(), 0.0);
    assert!(matches!(
        vol_exact_nef(&m, &vec![1.0, -1.0]),
        Err(BoundError::NotNef(_))
    ));
    assert_relative_eq!(suboptimal_bound(2, 12.0, 3.5).unwrap(), 25.0 / 12.0, epsilon = 1e-14);
    assert_relative_eq!(p_vol_bound(2, 12.0, 3.0).unwrap(), 16.0 / 3.0, epsilon = 1e-14);
    // (7/4, 7/6) - (1, 1/2)
    assert_relative_eq!(
        kahler_current_class_margin(&m, &a, &b, 1.0).unwrap(),
        2.0 / 3.0,
        epsilon = 1e-14
    );
    assert_eq!(kahler_current_class_margin(&m, &a, &b, 0.0).unwrap(), 0.0);

    let r = bound_report(&m, &a, &b).unwrap();
    assert_relative_eq!(r.volume, 12.0);
    assert_relative_eq!(r.mixed, 3.5);
    assert_relative_eq!(r.r, 24.0 / 7.0, epsilon = 1e-14);
    assert_relative_eq!(r.s0, 3.0, epsilon = 1e-12);
    assert_relative_eq!(r.t0, 3.0, epsilon = 1e-14);
    assert_eq!(r.vol_exact, Some(6.0));
    assert_relative_eq!(r.bounds["chain_n"], 6.0, epsilon = 1e-13);
    assert!(r.constants.is_none());
    assert!(r.g_status.contains("nef"));
}

#[test]
fn bound_errors() {
    assert!(matches!(
        suboptimal_bound(2, 4.0, 2.0),
        Err(BoundError::RatioTooSmall { .. })
    ));
    assert!(matches!(
        p_vol_bound(2, 4.0, 1.0),
        Err(BoundError::ThresholdTooSmall(_))
    ));
    let d = scalar(2, 12.0, 3.5, 0.5, 3.0);
    assert!(matches!(g_eval(&d, 0.9), Err(BoundError::OutOfDomain { .. })));
    assert!(matches!(
        g_eval(&scalar(2, 12.0, 3.5, 1.0, 3.0), 1.0),
        Err(BoundError::NefThresholdOutOfRange(_))
    ));
    assert!(matches!(f_eval(&d, 1.5), Err(BoundError::OutOfDomain { .. })));
    assert!(matches!(
        g_eval(&scalar(2, 4.0, 3.0, 0.5, 3.0), 1.0),
        Err(BoundError::RatioTooSmall { .. })
    ));
}

#[test]
fn trivial_limits() {
    assert_relative_eq!(suboptimal_bound(3, 7.0, 1e-300).unwrap(), 7.0, max_relative = 1e-12);
    assert_relative_eq!(p_vol_bound(3, 7.0, 1e12).unwrap(), 7.0, max_relative = 1e-10);
    // t0 = R/n reproduces the suboptimal bound.
    let (v, m) = (12.0, 1.5);
    assert_relative_eq!(
        p_vol_bound(2, v, v / m / 2.0).unwrap(),
        suboptimal_bound(2, v, m).unwrap(),
        max_relative = 1e-14
    );
    let m3 = SplitP1Model::new(3).unwrap();
    let a = vec![1.0, 2.0, 3.0];
    // a^3 = 3! * 1 * 2 * 3
    assert_relative_eq!(conjecture_rhs(&m3, &a, &vec![0.0; 3]).unwrap(), 36.0);
    assert_relative_eq!(conjecture_rhs(&m3, &a, &a).unwrap(), -2.0 * 36.0, epsilon = 1e-12);
}

#[test]
fn g_frozen_value_and_endpoints() {
    let d = scalar(2, 12.0, 3.5, 0.5, 3.0);
    assert_relative_eq!(g_eval(&d, 1.2).unwrap(), 2.5, epsilon = 1e-13);
    assert_relative_eq!(
        g_eval(&d, 1.0).unwrap(),
        suboptimal_bound(2, 12.0, 3.5).unwrap(),
        max_relative = 1e-14
    );
    let hi = d.ratio() / 2.0;
    assert_relative_eq!(g_eval(&d, hi).unwrap(), nef_threshold_bound(&d), max_relative = 1e-13);
    assert!(g_monotone_margin(&d, 200).unwrap() > 0.0);
    assert!(derivative_check(&d, 20).unwrap() < 1e-6);
}

#[test]
fn g_right_end_tends_to_conjecture_as_s0_approaches_one() {
    let mut prev = f64::INFINITY;
    for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
        let d = scalar(3, 20.0, 1.0, 1.0 - eps, 4.0);
        let gap = (g_eval(&d, d.ratio() / 3.0).unwrap() - 17.0).abs();
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 1e-6);
}

#[test]
fn f_endpoints_and_turning_point() {
    let d = scalar(3, 20.0, 4.0, 0.3, 4.0);
    assert_relative_eq!(f_eval(&d, 1.0).unwrap(), 20.0 - 12.0, max_relative = 1e-14);
    assert_relative_eq!(
        f_eval(&d, 0.0).unwrap(),
        p_vol_bound(3, 20.0, 4.0).unwrap(),
        max_relative = 1e-14
    );
    // R = 5, t0 = 4: f' changes sign at s = 1/2.
    let s_star = f_decreasing_from(&d);
    assert_relative_eq!(s_star, 0.5, epsilon = 1e-15);
    assert!(f_prime(&d, s_star - 1e-3).unwrap() > 0.0);
    assert!(f_prime(&d, s_star + 1e-3).unwrap() < 0.0);
    assert!(f_prime(&d, s_star).unwrap().abs() < 1e-12);
    assert!(f_monotone_margin(&d, 100).unwrap().unwrap() >= 0.0);
    // The interval is empty when (R - t0)/(n - 1) > 1.
    assert_eq!(f_monotone_margin(&scalar(2, 20.0, 1.0, 0.3, 4.0), 10).unwrap(), None);
}

#[test]
fn g_constants_satisfy_their_defining_identities() {
    for n in 2..=8 {
        let nf = n as f64;
        let s0 = (nf - 1.0) / nf;
        assert_relative_eq!(g_constants(n, nf + 1.0, s0).r2, nf, max_relative = 1e-14);
        for (r, s0) in [(nf + 0.5, 0.2), (3.0 * nf, 0.7), (nf * 1.01, 0.5)] {
            let c = g_constants(n, r, s0);
            assert_relative_eq!(
                c.delta_r,
                (r - c.r1) * (r - c.r2),
                max_relative = 1e-12,
                epsilon = 1e-12
            );
            assert_relative_eq!(c.delta_prime, (c.r2 - c.r1).powi(2), max_relative = 1e-12);
            if c.delta_r >= 0.0 {
                for x in [c.a1, c.a2] {
                    let q = r * x * x - (nf * s0 - 1.0 + r) * x + (nf - 1.0) * s0;
                    assert!(q.abs() < 1e-12 * r, "n={n} R={r} s0={s0} x={x} q={q}");
                }
            }
            assert_relative_eq!(c.a, 1.0 - nf / r * (1.0 - s0), epsilon = 1e-15);
            assert_eq!(c.a3, s0);
        }
    }
}

#[test]
fn close_threshold_example() {
    let (m, a, b) = example();
    let r = close_threshold_conjecture_check(&m, &a, &b).unwrap();
    assert_eq!(r.status, Status::Asserted);
    assert_relative_eq!(r.worst_margin, 1.0 / 12.0, epsilon = 1e-13);
    // Both conditions fail: large ratio, small thresholds.
    let m3 = SplitP1Model::new(3).unwrap();
    let skipped = close_threshold_conjecture_check(&m3, &vec![10.0, 10.0, 1.0], &vec![0.1, 0.1, 1.5]).unwrap();
    assert_eq!(skipped.status, Status::Skipped);
}

#[test]
fn chain_example_and_trivial_case() {
    let (m, a, b) = example();
    let c = chain_check(&m, &a, &b, 2, &[]).unwrap();
    assert_relative_eq!(c.difference_power, 6.0, epsilon = 1e-13);
    assert_relative_eq!(c.linearized, 5.0, epsilon = 1e-13);
    assert!(c.margins().iter().all(|&x| x >= 0.0));
    let zero = chain_check(&m, &a, &vec![0.0, 0.0], 2, &[]).unwrap();
    assert_relative_eq!(zero.margins()[0], 0.0);
    assert_relative_eq!(zero.margins()[1], 0.0);
    assert!(chain_check(&m, &a, &b, 1, &[]).is_err());
}

#[test]
fn torus_chain_from_forms_matches_model_chain() {
    let mut rng = trial_rng(60, 0);
    let torus = TorusModel::new(3).unwrap();
    for k in 1..=3 {
        let a = torus.random_kahler(&mut rng) * poslab::forms::C64::new(4.0, 0.0);
        let b = torus.random_kahler(&mut rng);
        let ws: Vec<HMatrix> = (0..3 - k).map(|_| torus.random_kahler(&mut rng)).collect();
        let mut omega = PQForm::scalar(3, 1.0).unwrap();
        for w in &ws {
            omega = omega.wedge(&PQForm::from_hermitian(w).unwrap()).unwrap();
        }
        let via_model = chain_check(&torus, &a, &b, k, &ws).unwrap();
        let via_form = chain_check_form(&a, &b, k, &omega).unwrap();
        for (x, y) in via_model.margins().iter().zip(via_form.margins()) {
            assert_relative_eq!(*x, y, max_relative = 1e-9, epsilon = 1e-10);
        }
    }
}

#[test]
fn diagonal_torus_chain_matches_split_p1() {
    // Diagonal torus classes intersect like split classes, so the chains agree.
    let split = SplitP1Model::new(3).unwrap();
    let (x, y) = (vec![4.0, 5.0, 3.0], vec![0.5, 1.0, 0.25]);
    let w = vec![1.5, 0.5, 2.0];
    let omega = PQForm::from_hermitian(&diagonal(&w)).unwrap();
    let from_split = chain_check(&split, &x, &y, 2, &[w]).unwrap();
    let from_form = chain_check_form(&diagonal(&x), &diagonal(&y), 2, &omega).unwrap();
    for (p, q) in from_split.margins().iter().zip(from_form.margins()) {
        assert_relative_eq!(*p, q, max_relative = 1e-12, epsilon = 1e-12);
    }
}

#[test]
fn s_k_identity_small_cases() {
    let x = [1.0, -2.0, 0.5];
    let y = [0.3, 0.7, -1.1];
    let omega2 = PQForm::power(&HMatrix::identity(3, 3), 2).unwrap();
    assert!(s_k_identity_check(&x, &y, 1, &omega2).unwrap() < 1e-15);
    let omega1 = PQForm::from_hermitian(&diagonal(&[2.0, 1.0, 3.0])).unwrap();
    assert!(s_k_identity_check(&x, &y, 2, &omega1).unwrap() < 1e-14);
    assert!(s_k_identity_check(&x, &y, 3, &PQForm::scalar(3, 1.0).unwrap()).unwrap() < 1e-13);
    assert!(s_k_identity_check(&x, &y, 2, &omega2).is_err());
}

#[test]
fn power_diff_margins_vanish_at_zero_scale() {
    let m = SplitP1Model::new(3).unwrap();
    let (a, b) = (vec![4.0, 5.0, 3.0], vec![0.5, 1.0, 0.25]);
    let r = power_diff_rhs_check(&m, &a, &b, &[vec![1.0, 1.0, 1.0]], 2, 0.0).unwrap();
    assert_eq!(r, [0.0, 0.0]);
    assert!(power_diff_rhs_check(&m, &a, &b, &[], 2, 1.0).is_err());
}

#[test]
fn bound_csv_has_fixed_columns() {
    let (m, a, b) = example();
    let rows = vec![("example".to_string(), bound_report(&m, &a, &b).unwrap())];
    let mut buf = Vec::new();
    write_bound_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), BOUND_CSV_COLUMNS.join(","));
    assert_eq!(lines.next().unwrap().split(',').count(), 22);
}

proptest! {
    #[test]
    fn g_is_increasing_and_f_non_increasing(
        n in 2usize..8, lr in -4.0f64..2.0, s0 in 1e-3f64..0.999, tfrac in 0.0f64..1.0
    ) {
        let nf = n as f64;
        let r = nf * (1.0 + lr.exp());
        let t0 = r / nf + tfrac * (r - r / nf);
        let d = scalar(n, 1.0, 1.0 / r, s0, t0);
        prop_assert!(g_monotone_margin(&d, 100).unwrap() >= -1e-10);
        if let Some(m) = f_monotone_margin(&d, 100).unwrap() {
            prop_assert!(m >= -1e-10);
        }
        let g1 = g_eval(&d, 1.0).unwrap();
        let gend = g_eval(&d, r / nf).unwrap();
        prop_assert!((g1 - suboptimal_bound(n, 1.0, 1.0 / r).unwrap()).abs() <= 1e-12);
        prop_assert!(gend >= g1 - 1e-12);
        prop_assert!(gend <= 1.0 - nf / r + 1e-12);
    }

    #[test]
    fn suboptimal_dominates_the_linear_bound(n in 1usize..8, lr in 0.0f64..4.0) {
        let r = n as f64 * (1.0 + lr.exp());
        let v = suboptimal_bound(n, 1.0, 1.0 / r).unwrap();
        prop_assert!(v >= 1.0 - (n * n) as f64 / r - 1e-12);
        prop_assert!(v <= 1.0 - n as f64 / r + 1e-12);
    }

    #[test]
    fn s_k_identity_holds_for_any_signs(
        x in prop::collection::vec(-3.0f64..3.0, 4), y in prop::collection::vec(-3.0f64..3.0, 4),
        k in 1usize..5, seed in 0u64..100
    ) {
        let mut rng = trial_rng(seed, 0);
        let omega = poslab::sampling::weakly_positive_form(4, 4 - k, &mut rng);
        prop_assert!(s_k_identity_check(&x, &y, k, &omega).unwrap() <= 1e-12);
    }
}
