use crate::forms::{factorial, HMatrix, C64};

use super::gmres::{gmres, GmresOptions};
use super::grid::Spectral;
use super::point::{integrate, sup_norm, wedge_density, FormField, PointForm};
use super::MaError;

/// `(alpha + i ddbar u)^n = c * rho`, with `rho` a top-form density against
/// the unit-mass volume form.
#[derive(Clone, Debug)]
pub struct MAProblem {
    pub alpha: PointForm,
    pub rho: Vec<f64>,
    pub c: f64,
}

impl MAProblem {
    /// Pick `c` so that both sides have the same total mass.
    pub fn from_density(alpha: PointForm, rho: Vec<f64>) -> Result<Self, MaError> {
        if alpha.min_eigenvalue() <= 0.0 {
            return Err(MaError::InvalidProblem("alpha must be positive definite".into()));
        }
        if let Some((index, &value)) = rho.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(MaError::NonPositiveDensity { index, value });
        }
        let c = factorial(alpha.n) * alpha.det() / integrate(&rho);
        Ok(MAProblem { alpha, rho, c })
    }

    pub fn n(&self) -> usize {
        self.alpha.n
    }

    /// Pointwise target for `det(alpha + H u)`.
    pub fn target(&self) -> Vec<f64> {
        let k = self.c / factorial(self.n());
        self.rho.iter().map(|r| k * r).collect()
    }
}

/// Right-hand side `c * beta ∧ gamma^{n-1}` for a constant `alpha` and `gamma`.
pub fn assemble_rhs(alpha: &HMatrix, beta: &FormField, gamma: &HMatrix) -> Result<MAProblem, MaError> {
    let alpha = PointForm::from_hmatrix(alpha)?;
    let gamma = PointForm::from_hmatrix(gamma)?;
    if gamma.min_eigenvalue() <= 0.0 {
        return Err(MaError::InvalidProblem("gamma must be positive definite".into()));
    }
    if alpha.n != gamma.n || beta.n != alpha.n {
        return Err(MaError::InvalidProblem(
            "alpha, beta and gamma must share a dimension".into(),
        ));
    }
    let n = alpha.n;
    let rho = (0..beta.len())
        .map(|i| {
            let mut forms = vec![gamma; n - 1];
            forms.push(beta.at(i));
            wedge_density(&forms)
        })
        .collect();
    MAProblem::from_density(alpha, rho)
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Stop once `sup |det(alpha + H u) - e^s target| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-11,
            max_iter: 60,
            gmres_restart: 40,
            gmres_max_iter: 600,
        }
    }
}

/// Normalized potential (`sup u = 0`) with solver diagnostics.
#[derive(Clone, Debug)]
pub struct Solution {
    pub u: Vec<f64>,
    /// Final `sup |det(alpha + H u) - e^s target|`, with `s = log_shift`.
    pub residual: f64,
    /// Final `sup |det(alpha + H u) - target|`.
    pub target_residual: f64,
    /// Residual before each Newton step and at the end.
    pub history: Vec<f64>,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    /// Additive shift of the log-determinant carried as an extra unknown. It
    /// absorbs the discrete mass mismatch and vanishes with grid refinement.
    pub log_shift: f64,
    /// `|mean det(alpha + H u) - mean target| / mean target`.
    pub mass_defect: f64,
}

impl Solution {
    /// `alpha + H u` on the grid.
    pub fn form(&self, problem: &MAProblem, spectral: &Spectral) -> FormField {
        spectral.hessian(&self.u).shifted(&problem.alpha)
    }
}

struct Eval {
    m: FormField,
    det: Vec<f64>,
    merit: f64,
    log_res: Vec<f64>,
}

fn evaluate(
    alpha: &PointForm,
    spectral: &Spectral,
    u: &[f64],
    log_target: &[f64],
    shift: f64,
) -> Result<Eval, MaError> {
    let m = spectral.hessian(u).shifted(alpha);
    let (min_eig, at) = m.min_eigenvalue();
    if !(min_eig > 0.0) {
        return Err(MaError::NotAdmissible(at));
    }
    let det: Vec<f64> = (0..m.len()).map(|i| m.at(i).det()).collect();
    let log_res: Vec<f64> = det.iter().zip(log_target).map(|(d, t)| d.ln() - t - shift).collect();
    let merit = (log_res.iter().map(|r| r * r).sum::<f64>() / log_res.len() as f64).sqrt();
    Ok(Eval { m, det, merit, log_res })
}

fn det_residual(det: &[f64], target: &[f64], shift: f64) -> f64 {
    let k = shift.exp();
    det.iter()
        .zip(target)
        .fold(0.0, |m: f64, (d, t)| m.max((d - k * t).abs()))
}

/// `sup |det(alpha + H u) - target|` for an arbitrary potential.
pub fn residual(problem: &MAProblem, spectral: &Spectral, u: &[f64]) -> f64 {
    let m = spectral.hessian(u).shifted(&problem.alpha);
    let det: Vec<f64> = (0..m.len()).map(|i| m.at(i).det()).collect();
    det_residual(&det, &problem.target(), 0.0)
}

/// Linearized operator `v -> tr((alpha + H u)^{-1} H v)` at a fixed state.
struct Linearization<'a> {
    spectral: &'a Spectral,
    g11: Vec<f64>,
    g22: Vec<f64>,
    g21: Vec<C64>,
    symbol: Vec<f64>,
}

impl<'a> Linearization<'a> {
    fn new(spectral: &'a Spectral, m: &FormField) -> Self {
        let len = m.len();
        let (mut g11, mut g22, mut g21) = (
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
        );
        for i in 0..len {
            let (a, b, c) = m.at(i).inverse_entries();
            g11.push(a);
            g22.push(b);
            g21.push(c);
        }
        let mean_c = g21.iter().sum::<C64>() / len as f64;
        let symbol = spectral.operator_symbol(integrate(&g11), if m.n == 2 { integrate(&g22) } else { 0.0 }, mean_c);
        Linearization {
            spectral,
            g11,
            g22,
            g21,
            symbol,
        }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let h = self.spectral.hessian(v);
        if h.n == 1 {
            return h.a11.iter().zip(&self.g11).map(|(a, g)| a * g).collect();
        }
        (0..v.len())
            .map(|i| self.g11[i] * h.a11[i] + self.g22[i] * h.a22[i] + 2.0 * (self.g21[i] * h.a12[i]).re)
            .collect()
    }
}

/// Damped Newton on `log det(alpha + H u) - log target - s = 0` with the
/// mean of the update fixed to zero. Linear steps use GMRES preconditioned by
/// the constant-coefficient operator with averaged coefficients.
pub fn solve_ma(
    problem: &MAProblem,
    spectral: &Spectral,
    opts: &SolveOptions,
    init: Option<&[f64]>,
) -> Result<Solution, MaError> {
    let grid = spectral.grid();
    let len = grid.len();
    if problem.n() != grid.n_complex || problem.rho.len() != len {
        return Err(MaError::InvalidProblem("problem does not match the grid".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(MaError::InvalidProblem("tolerance must be positive".into()));
    }
    let target = problem.target();
    let log_target: Vec<f64> = target.iter().map(|t| t.ln()).collect();
    let mut u = match init {
        Some(u0) if u0.len() == len => u0.to_vec(),
        Some(_) => {
            return Err(MaError::InvalidProblem(
                "initial potential does not match the grid".into(),
            ))
        }
        None => vec![0.0; len],
    };
    let mut shift = 0.0;
    let mut state = evaluate(&problem.alpha, spectral, &u, &log_target, shift)?;
    let mut history = Vec::new();
    let mut linear_iterations = 0;
    let mut iter = 0;
    loop {
        let res = det_residual(&state.det, &target, shift);
        history.push(res);
        if res <= opts.tol {
            break;
        }
        if iter == opts.max_iter {
            return Err(MaError::NotConverged {
                iterations: iter,
                residual: res,
            });
        }
        iter += 1;

        let lin = Linearization::new(spectral, &state.m);
        let apply = |x: &[f64]| {
            let (v, sigma) = (&x[..len], x[len]);
            let mut out: Vec<f64> = lin.apply(v).into_iter().map(|y| y - sigma).collect();
            out.push(integrate(v));
            out
        };
        let precond = |y: &[f64]| {
            let (r, rho) = (&y[..len], y[len]);
            let mean = integrate(r);
            let mut out: Vec<f64> = spectral
                .solve_symbol(&lin.symbol, r)
                .into_iter()
                .map(|v| v + rho)
                .collect();
            out.push(-mean);
            out
        };
        let mut rhs: Vec<f64> = state.log_res.iter().map(|r| -r).collect();
        rhs.push(0.0);
        let eta = state.merit.clamp(1e-13, 0.1);
        let gm = gmres(
            apply,
            precond,
            &rhs,
            GmresOptions {
                restart: opts.gmres_restart,
                max_iter: opts.gmres_max_iter,
                rel_tol: eta,
            },
        );
        linear_iterations += gm.iterations;
        let (du, ds) = (&gm.x[..len], gm.x[len]);

        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(du).map(|(a, b)| a + lambda * b).collect();
            let trial_shift = shift + lambda * ds;
            if let Ok(next) = evaluate(&problem.alpha, spectral, &trial, &log_target, trial_shift) {
                if next.merit <= (1.0 - 1e-4 * lambda) * state.merit {
                    u = trial;
                    shift = trial_shift;
                    state = next;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < f64::powi(2.0, -20) {
                return Err(MaError::Divergence {
                    iterations: iter,
                    residual: res,
                });
            }
        }
    }
    let top = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    u.iter_mut().for_each(|x| *x -= top);
    let mass = integrate(&target);
    let mass_defect = (integrate(&state.det) - mass).abs() / mass;
    Ok(Solution {
        u,
        residual: *history.last().unwrap_or(&f64::NAN),
        target_residual: det_residual(&state.det, &target, 0.0),
        history,
        newton_iterations: iter,
        linear_iterations,
        log_shift: shift,
        mass_defect,
    })
}

/// Taylor remainders `sup |F(u + h v) - F(u) - h F'(u) v|` of the
/// log-determinant map for each step `h`.
pub fn linearization_remainders(
    problem: &MAProblem,
    spectral: &Spectral,
    u: &[f64],
    v: &[f64],
    steps: &[f64],
) -> Result<Vec<f64>, MaError> {
    let zeros = vec![0.0; u.len()];
    let base = evaluate(&problem.alpha, spectral, u, &zeros, 0.0)?;
    let dv = Linearization::new(spectral, &base.m).apply(v);
    steps
        .iter()
        .map(|&h| {
            let moved: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + h * b).collect();
            let next = evaluate(&problem.alpha, spectral, &moved, &zeros, 0.0)?;
            let rem: Vec<f64> = (0..u.len())
                .map(|i| next.log_res[i] - base.log_res[i] - h * dv[i])
                .collect();
            Ok(sup_norm(&rem))
        })
        .collect()
}

/// Observed order `log2(e(h) / e(h/2))`, minimised over consecutive halvings.
pub fn observed_order(remainders: &[f64]) -> f64 {
    remainders
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min)
}

/// Convergence order estimated from the last three Newton residuals above
/// `floor`; `None` when too few are available.
pub fn newton_order(history: &[f64], floor: f64) -> Option<f64> {
    let h: Vec<f64> = history.iter().cloned().filter(|&r| r > floor).collect();
    if h.len() < 3 {
        return None;
    }
    let k = h.len();
    let (a, b, c) = (h[k - 3], h[k - 2], h[k - 1]);
    Some((c / b).ln() / (b / a).ln())
}

/// Mean-zero spectral solution of the complex-dimension-1 equation, which is
/// linear: `alpha + u_{z zbar} = target`.
pub fn poisson_reference(problem: &MAProblem, spectral: &Spectral) -> Result<Vec<f64>, MaError> {
    if problem.n() != 1 {
        return Err(MaError::InvalidProblem(
            "the linear reduction needs complex dimension 1".into(),
        ));
    }
    let symbol = spectral.operator_symbol(1.0, 0.0, C64::new(0.0, 0.0));
    let r: Vec<f64> = problem.target().iter().map(|t| t - problem.alpha.a11).collect();
    let mut u = spectral.solve_symbol(&symbol, &r);
    let top = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    u.iter_mut().for_each(|x| *x -= top);
    Ok(u)
}
