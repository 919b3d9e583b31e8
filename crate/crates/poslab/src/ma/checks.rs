//! Integral inequalities evaluated on solved potentials, and the damped
//! fixed-point iteration.

use serde::Serialize;

use crate::forms::HMatrix;

use super::grid::Spectral;
use super::point::{integrate, sup_norm, wedge_density, FormField, PointForm};
use super::solver::{solve_ma, MAProblem, Solution, SolveOptions};
use super::MaError;

#[derive(Clone, Debug, Serialize)]
pub struct ProdTraces {
    /// `(∫ α̃ ∧ γ^{n-1}) (∫ α̃^{n-1} ∧ β)`
    pub lhs: f64,
    /// `(1/n) (∫ α̃^n) (∫ β ∧ γ^{n-1})`
    pub rhs: f64,
    /// `(lhs - rhs) / rhs`
    pub margin: f64,
    /// `|∫ α̃ ∧ γ^{n-1} - ∫ α ∧ γ^{n-1}| / ∫ α ∧ γ^{n-1}`
    pub cohomology_defect: f64,
}

fn field_density(len: usize, f: impl Fn(usize) -> f64) -> f64 {
    integrate(&(0..len).map(f).collect::<Vec<_>>())
}

/// Trace-product inequality for the solution `α̃` of
/// `α̃^n = c β ∧ γ^{n-1}`.
pub fn verify_prod_traces(
    problem: &MAProblem,
    solution: &Solution,
    beta: &FormField,
    gamma: &HMatrix,
    spectral: &Spectral,
    max_residual: f64,
) -> Result<ProdTraces, MaError> {
    if !(solution.residual <= max_residual) {
        return Err(MaError::Unsolved(solution.residual));
    }
    let gamma = PointForm::from_hmatrix(gamma)?;
    let n = problem.n();
    let at = solution.form(problem, spectral);
    let len = at.len();
    let with = |first: PointForm, copies: usize, fill: PointForm| {
        let mut v = vec![fill; copies];
        v.push(first);
        wedge_density(&v)
    };
    let a_gamma = field_density(len, |i| with(at.at(i), n - 1, gamma));
    let a_beta = field_density(len, |i| with(beta.at(i), n - 1, at.at(i)));
    let a_top = field_density(len, |i| wedge_density(&vec![at.at(i); n]));
    let b_gamma = field_density(len, |i| with(beta.at(i), n - 1, gamma));
    let lhs = a_gamma * a_beta;
    let rhs = a_top * b_gamma / n as f64;
    let base = with(problem.alpha, n - 1, gamma);
    Ok(ProdTraces {
        lhs,
        rhs,
        margin: (lhs - rhs) / rhs,
        cohomology_defect: (a_gamma - base).abs() / base,
    })
}

/// Weight form of bidegree `(n-p, n-p)`: a positive scalar when `p = n`, a
/// constant (1,1)-form when `p = n - 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightForm {
    Scalar(f64),
    Form(HMatrix),
}

#[derive(Clone, Copy, Debug)]
enum Weight {
    Scalar(f64),
    Form(PointForm),
}

impl Weight {
    fn new(w: &WeightForm, n: usize, p: usize) -> Result<Self, MaError> {
        match w {
            WeightForm::Scalar(s) if p == n && *s > 0.0 => Ok(Weight::Scalar(*s)),
            WeightForm::Form(m) if p + 1 == n => {
                let f = PointForm::from_hmatrix(m)?;
                if f.n != n || f.min_eigenvalue() < 0.0 {
                    return Err(MaError::InvalidProblem(
                        "weight form must be positive semidefinite".into(),
                    ));
                }
                Ok(Weight::Form(f))
            }
            _ => Err(MaError::InvalidProblem(format!(
                "weight form must have bidegree ({k},{k}) and be positive for p = {p}",
                k = n - p
            ))),
        }
    }

    /// Density of `forms ∧ Ω`.
    fn top(&self, mut forms: Vec<PointForm>) -> f64 {
        match self {
            Weight::Scalar(s) => s * wedge_density(&forms),
            Weight::Form(o) => {
                forms.push(*o);
                wedge_density(&forms)
            }
        }
    }
}

fn power_with(x: PointForm, k: usize, extra: &[PointForm]) -> Vec<PointForm> {
    let mut v = vec![x; k];
    v.extend_from_slice(extra);
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerDiffCheck {
    /// `(n/p) (∫ α̃^p ∧ Ω) (∫ α̃^{n-1} ∧ β)`
    pub lhs: f64,
    /// `(∫ α̃^n) (∫ α̃^{p-1} ∧ β ∧ Ω)`
    pub rhs: f64,
    /// `(lhs - rhs) / rhs`
    pub margin: f64,
}

/// Integral power-difference inequality evaluated on a form field `α̃`.
pub fn power_diff_integral_check(
    alpha_tilde: &FormField,
    beta: &FormField,
    weight: &WeightForm,
    p: usize,
) -> Result<PowerDiffCheck, MaError> {
    let n = alpha_tilde.n;
    if p == 0 || p > n {
        return Err(MaError::InvalidProblem(format!("degree {p} not in 1..={n}")));
    }
    let w = Weight::new(weight, n, p)?;
    let len = alpha_tilde.len();
    let a = |i| alpha_tilde.at(i);
    let ap_omega = field_density(len, |i| w.top(power_with(a(i), p, &[])));
    let an1_beta = field_density(len, |i| wedge_density(&power_with(a(i), n - 1, &[beta.at(i)])));
    let a_top = field_density(len, |i| wedge_density(&power_with(a(i), n, &[])));
    let ap1_beta_omega = field_density(len, |i| w.top(power_with(a(i), p - 1, &[beta.at(i)])));
    let lhs = n as f64 / p as f64 * ap_omega * an1_beta;
    let rhs = a_top * ap1_beta_omega;
    Ok(PowerDiffCheck {
        lhs,
        rhs,
        margin: (lhs - rhs) / rhs,
    })
}

pub struct FixedPointInput<'a> {
    /// Constant representative of the class.
    pub alpha: &'a HMatrix,
    pub beta: &'a FormField,
    /// Constant Kähler reference form used for damping.
    pub omega_ref: &'a HMatrix,
    pub weight: &'a WeightForm,
    pub p: usize,
    pub epsilon: f64,
    pub iters: usize,
    /// Convergence threshold on `sup |u_{k+1} - u_k|`.
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointTrace {
    /// `sup |u_{k+1} - u_k|` for each step.
    pub differences: Vec<f64>,
    pub newton_iterations: Vec<usize>,
    pub converged: bool,
    /// Geometric mean ratio of successive differences.
    pub decay_rate: Option<f64>,
    /// `(1 - ε)^{p-1}`
    pub damping_factor: f64,
    /// `min_x [α̃^n - K (1-ε)^{p-1} α̃^{p-1} ∧ β ∧ Ω] / ∫ α^n` at the last iterate.
    pub pointwise_margin: f64,
    pub power_diff: PowerDiffCheck,
    pub final_residual: f64,
    #[serde(skip)]
    pub u: Vec<f64>,
}

/// Iterate `u -> solution of α̃^n = K [(1-ε) α̃_prev + ε ω]^{p-1} ∧ β ∧ Ω`
/// with `K` fixed by mass. Smoothing of the previous iterate is the identity.
pub fn approx_fixed_point(
    input: &FixedPointInput,
    spectral: &Spectral,
    opts: &SolveOptions,
) -> Result<FixedPointTrace, MaError> {
    let FixedPointInput {
        alpha,
        beta,
        omega_ref,
        weight,
        p,
        epsilon,
        iters,
        tol,
    } = *input;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(MaError::InvalidProblem(format!("epsilon {epsilon} not in (0,1)")));
    }
    if !(tol > 0.0) {
        return Err(MaError::InvalidProblem("tolerance must be positive".into()));
    }
    let alpha_pt = PointForm::from_hmatrix(alpha)?;
    let omega_pt = PointForm::from_hmatrix(omega_ref)?;
    let n = alpha_pt.n;
    if p == 0 || p > n {
        return Err(MaError::InvalidProblem(format!("degree {p} not in 1..={n}")));
    }
    if omega_pt.n != n || omega_pt.min_eigenvalue() <= 0.0 {
        return Err(MaError::InvalidProblem(
            "reference form must be positive definite".into(),
        ));
    }
    let w = Weight::new(weight, n, p)?;
    let len = spectral.grid().len();

    let rhs_for = |u: &[f64]| -> Vec<f64> {
        let prev = spectral.hessian(u).shifted(&alpha_pt);
        (0..len)
            .map(|i| {
                let x = prev.at(i).scale(1.0 - epsilon).add(&omega_pt.scale(epsilon));
                w.top(power_with(x, p - 1, &[beta.at(i)]))
            })
            .collect()
    };

    let mut u = vec![0.0; len];
    let mut differences = Vec::new();
    let mut newton_iterations = Vec::new();
    let mut converged = false;
    let mut last: Option<(MAProblem, Solution)> = None;
    for _ in 0..iters.max(1) {
        let problem = MAProblem::from_density(alpha_pt, rhs_for(&u))?;
        let sol = solve_ma(&problem, spectral, opts, Some(&u))?;
        let diff = sup_norm(&sol.u.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>());
        differences.push(diff);
        newton_iterations.push(sol.newton_iterations);
        u = sol.u.clone();
        last = Some((problem, sol));
        // With p = 1 the right-hand side does not involve the iterate.
        if diff < tol || p == 1 {
            converged = true;
            break;
        }
    }
    let (problem, sol) = last.expect("at least one step");

    let at = sol.form(&problem, spectral);
    let damping_factor = (1.0 - epsilon).powi(p as i32 - 1);
    let k = problem.c;
    let scale = wedge_density(&vec![alpha_pt; n]);
    let pointwise_margin = (0..len)
        .map(|i| {
            let a = at.at(i);
            let lhs = wedge_density(&vec![a; n]);
            let rhs = k * damping_factor * w.top(power_with(a, p - 1, &[beta.at(i)]));
            (lhs - rhs) / scale
        })
        .fold(f64::INFINITY, f64::min);
    let power_diff = power_diff_integral_check(&at, beta, weight, p)?;
    let ratios: Vec<f64> = differences
        .windows(2)
        .filter(|d| d[0] > 0.0 && d[1] > 0.0)
        .map(|d| (d[1] / d[0]).ln())
        .collect();
    let decay_rate = (!ratios.is_empty()).then(|| (ratios.iter().sum::<f64>() / ratios.len() as f64).exp());
    Ok(FixedPointTrace {
        differences,
        newton_iterations,
        converged,
        decay_rate,
        damping_factor,
        pointwise_margin,
        power_diff,
        final_residual: sol.residual,
        u,
    })
}
