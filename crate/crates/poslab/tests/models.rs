use approx::assert_relative_eq;
use proptest::prelude::*;

use poslab::forms::{factorial, HMatrix};
use poslab::models::*;
use poslab::sampling::diagonal;
use poslab::scan::trial_rng;

fn permanent_oracle(rows: &[Vec<f64>]) -> f64 {
    fn rec(rows: &[Vec<f64>], used: &mut Vec<bool>, r: usize) -> f64 {
        if r == rows.len() {
            return 1.0;
        }
        let mut acc = 0.0;
        for c in 0..rows.len() {
            if !used[c] {
                used[c] = true;
                acc += rows[r][c] * rec(rows, used, r + 1);
                used[c] = false;
            }
        }
        acc
    }
    rec(rows, &mut vec![false; rows.len()], 0)
}

#[test]
fn permanent_matches_expansion() {
    let mut rng = trial_rng(50, 0);
    let model = SplitP1Model::new(5).unwrap();
    for _ in 0..5 {
        let rows: Vec<Vec<f64>> = (0..5).map(|_| model.random_class(&mut rng)).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        assert_relative_eq!(
            permanent(&refs, &[0, 1, 2, 3, 4]),
            permanent_oracle(&rows),
            max_relative = 1e-12,
            epsilon = 1e-12
        );
    }
}

#[test]
fn diagonal_torus_classes_agree_with_split_p1() {
    let mut rng = trial_rng(51, 0);
    for n in 1..=5 {
        let torus = TorusModel::new(n).unwrap();
        let split = SplitP1Model::new(n).unwrap();
        let vecs: Vec<Vec<f64>> = (0..n).map(|_| split.random_class(&mut rng)).collect();
        let mats: Vec<HMatrix> = vecs.iter().map(|v| diagonal(v)).collect();
        let t = torus.intersection(&mats.iter().collect::<Vec<_>>()).unwrap();
        let s = split.intersection(&vecs.iter().collect::<Vec<_>>()).unwrap();
        assert_relative_eq!(t, s, max_relative = 1e-11, epsilon = 1e-11);
        let a = split.random_kahler(&mut rng);
        let b = split.random_kahler(&mut rng);
        let pt = torus.psef_threshold_exact(&diagonal(&a), &diagonal(&b)).unwrap();
        let ps = split.psef_threshold_exact(&a, &b).unwrap();
        assert_relative_eq!(pt, ps, max_relative = 1e-12);
    }
}

#[test]
fn torus_identity_has_factorial_volume() {
    for n in 1..=6 {
        let m = TorusModel::new(n).unwrap();
        let id = HMatrix::identity(n, n);
        assert_relative_eq!(
            m.intersection(&vec![&id; n]).unwrap(),
            factorial(n),
            max_relative = 1e-12
        );
    }
    assert!(TorusModel::new(0).is_err());
    assert!(TorusModel::new(9).is_err());
}

#[test]
fn intersection_errors() {
    let m = SplitP1Model::new(3).unwrap();
    let a = vec![1.0; 3];
    assert_eq!(
        m.intersection(&[&a, &a]),
        Err(ModelError::ClassCount { expected: 3, found: 2 })
    );
    let short = vec![1.0; 2];
    assert!(matches!(
        m.intersection(&[&a, &a, &short]),
        Err(ModelError::Dimension { .. })
    ));
    assert!(matches!(
        m.psef_threshold_exact(&a, &vec![1.0, 0.0, 1.0]),
        Err(ModelError::NotBig(_))
    ));
    let t = TorusModel::new(2).unwrap();
    assert!(matches!(
        bisect_threshold(&t, &HMatrix::identity(2, 2), &diagonal(&[1.0, -1.0]), Cone::Nef),
        Err(ModelError::NotKahler(_))
    ));
}

#[test]
fn cone_membership_examples() {
    let split = SplitP1Model::new(2).unwrap();
    assert_relative_eq!(split.cone_margin(&vec![1.0, -0.1], Cone::Psef).unwrap(), -0.1);
    let torus = TorusModel::new(2).unwrap();
    for t in [0.0, 0.5, 1.0, 1.5] {
        let m = torus.cone_margin(&diagonal(&[1.0, 1.0 - t]), Cone::Nef).unwrap();
        assert_eq!(m >= 0.0, t <= 1.0, "t = {t}");
        assert_relative_eq!(m, (1.0 - t).min(1.0), epsilon = 1e-15);
    }
}

#[test]
fn threshold_examples() {
    let split = SplitP1Model::new(2).unwrap();
    let (a, b) = (vec![3.0, 2.0], vec![1.0, 0.5]);
    assert_relative_eq!(mixed_power(&split, &a, 2, &b).unwrap(), 12.0, epsilon = 1e-14);
    let p = psef_threshold(&split, &a, &b).unwrap();
    assert_relative_eq!(p.value, 3.0, epsilon = 1e-14);
    assert_relative_eq!(p.bisection, 3.0, epsilon = 1e-12);
    let nt = nef_threshold(&split, &a, &b).unwrap();
    assert_relative_eq!(nt.value, 3.0, epsilon = 1e-12);
    assert_relative_eq!(nt.cross_check, 3.0, epsilon = 1e-14);

    let torus = TorusModel::new(3).unwrap();
    let id = HMatrix::identity(3, 3);
    assert_relative_eq!(psef_threshold(&torus, &id, &id).unwrap().value, 1.0, epsilon = 1e-13);
    let b = diagonal(&[0.5, 2.0, 1.25]);
    let p = psef_threshold(&torus, &id, &b).unwrap();
    assert_relative_eq!(p.value, 0.5, epsilon = 1e-13);
    assert_relative_eq!(p.bisection, 0.5, epsilon = 1e-12);
}

#[test]
fn nef_volume_bracket_example() {
    let split = SplitP1Model::new(2).unwrap();
    let br = nef_volume_bracket(&split, &vec![3.0, 2.0], &vec![1.0, 0.5]).unwrap();
    // Curves give ratios 3 and 4; the whole space gives 12/7 and 24/7.
    assert_relative_eq!(br.lower, 12.0 / 7.0, epsilon = 1e-14);
    assert_relative_eq!(br.upper, 3.0, epsilon = 1e-14);
    assert_relative_eq!(br.nef_threshold, 3.0, epsilon = 1e-12);
    assert!(br.margin() >= -1e-12);
}

#[test]
fn equal_classes_give_a_flat_profile() {
    let mut rng = trial_rng(52, 0);
    let torus = TorusModel::new(4).unwrap();
    let a = torus.random_kahler(&mut rng);
    let prof = c_profile(&torus, &a, &a).unwrap();
    let v = torus.intersection(&[&a; 4]).unwrap().ln();
    for c in &prof.c {
        assert_relative_eq!(*c, v, epsilon = 1e-12);
    }
    assert!(concavity_margin(&prof).abs() < 1e-12);
    let neg = diagonal(&[1.0, -1.0, 1.0, 1.0]);
    assert!(matches!(
        c_profile(&torus, &a, &neg),
        Err(ModelError::NonPositiveIntersection { .. })
    ));
}

#[test]
fn hodge_teissier_degrees_are_checked() {
    let split = SplitP1Model::new(3).unwrap();
    let a = vec![1.0, 2.0, 3.0];
    assert!(matches!(
        ht_check(&split, &a, &a, 2, 2),
        Err(ModelError::InvalidDegrees { .. })
    ));
    assert_relative_eq!(ht_check(&split, &a, &a, 1, 1).unwrap(), 0.0, epsilon = 1e-12);
}

#[test]
fn split_p1_kahler_infimum_matches_explicit_ratios() {
    let split = SplitP1Model::new(3).unwrap();
    let (a, b) = (vec![2.0, 5.0, 1.0], vec![1.0, 2.0, 4.0]);
    let mut rng = trial_rng(53, 0);
    for y in split.subvarieties() {
        let inf = split.kahler_infimum_on(&y, &a, &b).unwrap();
        for _ in 0..50 {
            let w = split.random_kahler(&mut rng);
            assert!(split.kahler_ratio_on(&y, &a, &b, &w).unwrap() >= inf - 1e-12);
        }
    }
    assert_eq!(split.subvarieties().len(), 7);
    assert_relative_eq!(subvariety_infimum(&split, &a, &b).unwrap(), 0.25, epsilon = 1e-15);
}

proptest! {
    #[test]
    fn torus_intersection_is_symmetric_and_multilinear(seed in 0u64..500, s in -2.0f64..2.0) {
        let mut rng = trial_rng(seed, 0);
        let m = TorusModel::new(3).unwrap();
        let cs: Vec<HMatrix> = (0..4).map(|_| m.random_class(&mut rng)).collect();
        let base = m.intersection(&[&cs[0], &cs[1], &cs[2]]).unwrap();
        let perm = m.intersection(&[&cs[2], &cs[0], &cs[1]]).unwrap();
        prop_assert!((base - perm).abs() <= 1e-10 * (1.0 + base.abs()));
        let mixed = m.combine(1.0, &cs[0], s, &cs[3]);
        let lhs = m.intersection(&[&mixed, &cs[1], &cs[2]]).unwrap();
        let rhs = base + s * m.intersection(&[&cs[3], &cs[1], &cs[2]]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn split_p1_intersection_is_multilinear(seed in 0u64..500, s in -2.0f64..2.0) {
        let mut rng = trial_rng(seed, 1);
        let m = SplitP1Model::new(4).unwrap();
        let cs: Vec<Vec<f64>> = (0..5).map(|_| m.random_class(&mut rng)).collect();
        let base = m.intersection(&[&cs[0], &cs[1], &cs[2], &cs[3]]).unwrap();
        let mixed = m.combine(1.0, &cs[1], s, &cs[4]);
        let lhs = m.intersection(&[&cs[0], &mixed, &cs[2], &cs[3]]).unwrap();
        let rhs = base + s * m.intersection(&[&cs[0], &cs[4], &cs[2], &cs[3]]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn kahler_profiles_are_concave_and_satisfy_hodge_teissier(seed in 0u64..300, n in 2usize..5) {
        let mut rng = trial_rng(seed, 2);
        let m = TorusModel::new(n).unwrap();
        let a = m.random_kahler(&mut rng);
        let b = m.random_kahler(&mut rng);
        prop_assert!(concavity_margin(&c_profile(&m, &a, &b).unwrap()) >= -1e-10);
        for p in 0..=n {
            for k in 0..=n - p {
                let (lhs, rhs) = ht_sides(&m, &a, &b, p, k).unwrap();
                prop_assert!(lhs - rhs >= -1e-10 * lhs.abs().max(rhs.abs()));
            }
        }
    }

    #[test]
    fn thresholds_agree_with_bisection(seed in 0u64..300, n in 1usize..5) {
        let mut rng = trial_rng(seed, 3);
        let m = TorusModel::new(n).unwrap();
        let a = m.random_class(&mut rng);
        let b = m.random_kahler(&mut rng);
        let t = psef_threshold(&m, &a, &b).unwrap();
        prop_assert!((t.value - t.bisection).abs() <= 1e-9 * t.value.abs().max(1.0));
        let nt = nef_threshold(&m, &a, &b).unwrap();
        prop_assert!((nt.value - nt.cross_check).abs() <= 1e-9 * nt.value.abs().max(1.0));
        // Membership flips at the threshold.
        let below = m.combine(1.0, &a, -(t.value - 1e-6), &b);
        let above = m.combine(1.0, &a, -(t.value + 1e-6), &b);
        prop_assert!(m.cone_margin(&below, Cone::Psef).unwrap() >= 0.0);
        prop_assert!(m.cone_margin(&above, Cone::Psef).unwrap() < 0.0);
    }
}
