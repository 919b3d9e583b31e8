use poslab::forms::{mixed_discriminant, HMatrix, C64};
use poslab::ma::*;
use poslab::sampling::hermitian_pd;
use poslab::scan::trial_rng;

fn herm2(a11: f64, a22: f64, a12: C64) -> HMatrix {
    HMatrix::from_row_slice(2, 2, &[C64::new(a11, 0.0), a12, a12.conj(), C64::new(a22, 0.0)])
}

fn solved(alpha: &HMatrix, beta: &FormField, gamma: &HMatrix, sp: &Spectral) -> (MAProblem, Solution) {
    let problem = assemble_rhs(alpha, beta, gamma).unwrap();
    let sol = solve_ma(&problem, sp, &SolveOptions::default(), None).unwrap();
    (problem, sol)
}

#[test]
fn identity_prod_traces_margin_is_n_minus_one() {
    for n in 1..=2 {
        let grid = TorusGrid::cubic(n, 8).unwrap();
        let sp = Spectral::new(&grid);
        let id = HMatrix::identity(n, n);
        let beta = FormField::constant(&PointForm::identity(n), grid.len());
        let (problem, sol) = solved(&id, &beta, &id, &sp);
        let pt = verify_prod_traces(&problem, &sol, &beta, &id, &sp, 1e-10).unwrap();
        // (n!)^2 against (1/n) (n!)^2
        let f = if n == 1 { 1.0 } else { 2.0 };
        assert!((pt.lhs - f * f).abs() < 1e-13);
        assert!((pt.rhs - f * f / n as f64).abs() < 1e-13);
        assert!((pt.margin - (n as f64 - 1.0)).abs() < 1e-13);
    }
}

#[test]
fn constant_prod_traces_match_mixed_discriminants() {
    let grid = TorusGrid::cubic(2, 8).unwrap();
    let sp = Spectral::new(&grid);
    let mut rng = trial_rng(3, 0);
    let (a, b, g) = (
        hermitian_pd(2, &mut rng),
        hermitian_pd(2, &mut rng),
        hermitian_pd(2, &mut rng),
    );
    let beta = FormField::constant(&PointForm::from_hmatrix(&b).unwrap(), grid.len());
    let (problem, sol) = solved(&a, &beta, &g, &sp);
    assert_eq!(sol.newton_iterations, 0);
    let pt = verify_prod_traces(&problem, &sol, &beta, &g, &sp, 1e-10).unwrap();
    let md = |x: &HMatrix, y: &HMatrix| 2.0 * mixed_discriminant(&[x.clone(), y.clone()]).unwrap();
    let lhs = md(&a, &g) * md(&a, &b);
    let rhs = md(&a, &a) * md(&b, &g) / 2.0;
    assert!((pt.lhs - lhs).abs() < 1e-12 * lhs);
    assert!((pt.rhs - rhs).abs() < 1e-12 * rhs);
}

#[test]
fn prod_traces_hold_for_solved_potentials() {
    let grid = TorusGrid::cubic(2, 16).unwrap();
    let sp = Spectral::new(&grid);
    for i in 0..10 {
        let mut rng = trial_rng(21, i);
        let alpha = hermitian_pd(2, &mut rng);
        let gamma = hermitian_pd(2, &mut rng);
        let modes = random_modes(4, 4, 2, 0.3, &mut rng);
        let beta = FieldForm::Scaled {
            base: hermitian_pd(2, &mut rng),
            modes,
        }
        .realize(&sp)
        .unwrap();
        let (problem, sol) = solved(&alpha, &beta, &gamma, &sp);
        assert!(sol.residual < 1e-8);
        let pt = verify_prod_traces(&problem, &sol, &beta, &gamma, &sp, 1e-8).unwrap();
        assert!(pt.margin >= -1e-6, "instance {i}: {pt:?}");
    }
}

#[test]
fn closed_data_preserves_cohomological_integrals() {
    let grid = TorusGrid::cubic(2, 16).unwrap();
    let sp = Spectral::new(&grid);
    let alpha = herm2(1.1, 0.95, C64::new(0.1, 0.2));
    let gamma = herm2(0.8, 1.3, C64::new(-0.2, 0.05));
    let mut rng = trial_rng(8, 0);
    let beta = FieldForm::Closed {
        base: herm2(1.0, 1.0, C64::new(0.0, 0.1)),
        modes: random_modes(4, 3, 2, 0.004, &mut rng),
    }
    .realize(&sp)
    .unwrap();
    let (problem, sol) = solved(&alpha, &beta, &gamma, &sp);
    let pt = verify_prod_traces(&problem, &sol, &beta, &gamma, &sp, 1e-8).unwrap();
    assert!(pt.cohomology_defect < 1e-12, "{pt:?}");
}

#[test]
fn prod_traces_reject_unsolved_potential() {
    let grid = TorusGrid::cubic(1, 8).unwrap();
    let sp = Spectral::new(&grid);
    let id = HMatrix::identity(1, 1);
    let beta = FieldForm::Scaled {
        base: id.clone(),
        modes: vec![Mode {
            amplitude: 0.3,
            wave: vec![1, 1],
            phase: 0.0,
        }],
    }
    .realize(&sp)
    .unwrap();
    let problem = assemble_rhs(&id, &beta, &id).unwrap();
    let fake = Solution {
        u: vec![0.0; grid.len()],
        residual: residual(&problem, &sp, &vec![0.0; grid.len()]),
        target_residual: 0.0,
        history: vec![],
        newton_iterations: 0,
        linear_iterations: 0,
        log_shift: 0.0,
        mass_defect: 0.0,
    };
    assert!(matches!(
        verify_prod_traces(&problem, &fake, &beta, &id, &sp, 1e-8),
        Err(MaError::Unsolved(_))
    ));
}

#[test]
fn power_diff_on_constant_data_matches_constant_algebra() {
    let grid = TorusGrid::cubic(2, 8).unwrap();
    let a = herm2(1.3, 0.7, C64::new(0.1, -0.2));
    let b = herm2(0.6, 1.1, C64::new(0.3, 0.0));
    let o = herm2(0.9, 0.4, C64::new(0.0, 0.1));
    let af = FormField::constant(&PointForm::from_hmatrix(&a).unwrap(), grid.len());
    let bf = FormField::constant(&PointForm::from_hmatrix(&b).unwrap(), grid.len());
    let md = |x: &HMatrix, y: &HMatrix| 2.0 * mixed_discriminant(&[x.clone(), y.clone()]).unwrap();
    // p = 1: 2 (a.o)(a.b) against (a.a)(b.o)
    let chk = power_diff_integral_check(&af, &bf, &WeightForm::Form(o.clone()), 1).unwrap();
    assert!((chk.lhs - 2.0 * md(&a, &o) * md(&a, &b)).abs() < 1e-12);
    assert!((chk.rhs - md(&a, &a) * md(&b, &o)).abs() < 1e-12);
    // p = n with scalar weight: both sides coincide.
    let chk = power_diff_integral_check(&af, &bf, &WeightForm::Scalar(2.0), 2).unwrap();
    assert!(chk.margin.abs() < 1e-14);
    // beta = alpha with p = 1: margin is n/p - 1 = 1.
    let chk = power_diff_integral_check(&af, &af, &WeightForm::Form(o), 1).unwrap();
    assert!((chk.margin - 1.0).abs() < 1e-13);
    assert!(power_diff_integral_check(&af, &bf, &WeightForm::Scalar(1.0), 1).is_err());
}

fn fixed_point_instance(sp: &Spectral) -> (HMatrix, FormField) {
    let alpha = herm2(1.2, 0.9, C64::new(0.15, -0.1));
    let mut rng = trial_rng(31, 0);
    let beta = FieldForm::Closed {
        base: herm2(1.0, 1.1, C64::new(0.2, 0.1)),
        modes: random_modes(4, 4, 2, 0.006, &mut rng),
    }
    .realize(sp)
    .unwrap();
    (alpha, beta)
}

#[test]
fn fixed_point_with_p_one_takes_one_step() {
    let grid = TorusGrid::cubic(2, 12).unwrap();
    let sp = Spectral::new(&grid);
    let (alpha, beta) = fixed_point_instance(&sp);
    let weight = WeightForm::Form(herm2(0.5, 0.8, C64::new(0.1, 0.0)));
    let input = FixedPointInput {
        alpha: &alpha,
        beta: &beta,
        omega_ref: &alpha,
        weight: &weight,
        p: 1,
        epsilon: 0.1,
        iters: 50,
        tol: 1e-9,
    };
    let trace = approx_fixed_point(&input, &sp, &SolveOptions::default()).unwrap();
    assert!(trace.converged);
    assert_eq!(trace.differences.len(), 1);
    assert!(trace.power_diff.margin >= -1e-6);
    assert!(trace.pointwise_margin >= -1e-6);
}

#[test]
fn fixed_point_with_constant_data_is_immediate() {
    let grid = TorusGrid::cubic(2, 8).unwrap();
    let sp = Spectral::new(&grid);
    let alpha = herm2(1.2, 0.9, C64::new(0.15, -0.1));
    let beta = FormField::constant(&PointForm::from_hmatrix(&alpha).unwrap(), grid.len());
    let input = FixedPointInput {
        alpha: &alpha,
        beta: &beta,
        omega_ref: &alpha,
        weight: &WeightForm::Scalar(1.0),
        p: 2,
        epsilon: 0.1,
        iters: 50,
        tol: 1e-9,
    };
    let trace = approx_fixed_point(&input, &sp, &SolveOptions::default()).unwrap();
    assert!(trace.converged);
    assert_eq!(trace.newton_iterations, vec![0]);
    assert_eq!(trace.differences, vec![0.0]);
}

#[test]
fn fixed_point_converges_for_decreasing_epsilon() {
    let grid = TorusGrid::cubic(2, 12).unwrap();
    let sp = Spectral::new(&grid);
    let (alpha, beta) = fixed_point_instance(&sp);
    for (p, weight) in [
        (2, WeightForm::Scalar(1.0)),
        (1, WeightForm::Form(herm2(0.5, 0.8, C64::new(0.1, 0.0)))),
    ] {
        for eps in [0.2, 0.1, 0.05] {
            let input = FixedPointInput {
                alpha: &alpha,
                beta: &beta,
                omega_ref: &alpha,
                weight: &weight,
                p,
                epsilon: eps,
                iters: 50,
                tol: 1e-7,
            };
            let trace = approx_fixed_point(&input, &sp, &SolveOptions::default()).unwrap();
            eprintln!(
                "p={p} eps={eps} steps={} converged={} rate={:?} pointwise={:e} power={:e}",
                trace.differences.len(),
                trace.converged,
                trace.decay_rate,
                trace.pointwise_margin,
                trace.power_diff.margin
            );
            assert!(trace.converged);
            if p > 1 {
                assert!(*trace.differences.last().unwrap() < 1e-6);
            }
            assert!(trace.pointwise_margin >= -1e-6);
            assert!(trace.power_diff.margin >= -1e-6);
            assert!((trace.damping_factor - (1.0 - eps).powi(p as i32 - 1)).abs() < 1e-15);
        }
    }
}

#[test]
fn fixed_point_validates_inputs() {
    let grid = TorusGrid::cubic(2, 8).unwrap();
    let sp = Spectral::new(&grid);
    let (alpha, beta) = fixed_point_instance(&sp);
    let w = WeightForm::Scalar(1.0);
    for eps in [0.0, 1.0, -0.5] {
        let input = FixedPointInput {
            alpha: &alpha,
            beta: &beta,
            omega_ref: &alpha,
            weight: &w,
            p: 2,
            epsilon: eps,
            iters: 5,
            tol: 1e-9,
        };
        assert!(approx_fixed_point(&input, &sp, &SolveOptions::default()).is_err());
    }
}
