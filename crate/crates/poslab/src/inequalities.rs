//! Verifiers for the pointwise and combinatorial inequalities.
//!
//! Each verifier scans an exhaustive grid and/or seeded random inputs and
//! reports the smallest value of `LHS - RHS`. Every `*_margin` function takes
//! exactly the input recorded in `worst_input`, so a report can be replayed.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::forms::{
    binomial, elementary_symmetric, elementary_symmetric_all, trace_lambda, FormError, HMatrix, PQForm, C64,
};
use crate::report::{MarginReport, Status};
use crate::sampling;
use crate::scan::{grid_scan, indexed_scan, random_scan, trial_rng, Worst};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Form(#[from] FormError),
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), LabError> {
    if cond {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(msg()))
    }
}

fn check_grid(n: usize, step: f64) -> Result<(), LabError> {
    check(n >= 1, || "n must be at least 1".into())?;
    check(step > 0.0 && step <= 1.0, || format!("grid step {step} outside (0, 1]"))
}

/// `prod(1 - b_j) - (1 - sum b_j)`.
pub fn product_bound_margin(b: &[f64]) -> f64 {
    let prod: f64 = b.iter().map(|x| 1.0 - x).product();
    let sum: f64 = b.iter().sum();
    prod - (1.0 - sum)
}

pub fn verify_product_bound(n: usize, grid_step: f64, random_trials: u64, seed: u64) -> Result<MarginReport, LabError> {
    check_grid(n, grid_step)?;
    let start = Instant::now();
    let grid = grid_scan(n, grid_step, product_bound_margin);
    let random = random_scan(random_trials, seed, |rng| {
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        (product_bound_margin(&b), b)
    });
    Ok(
        MarginReport::new(format!("product_bound.n{n}"), "prod(1-b_j) >= 1 - sum b_j on [0,1]^n")
            .with_worst(grid.merge(random))
            .tolerance(1e-12, "absolute, acceptance threshold for the product bound")
            .timed(start),
    )
}

/// Product-form nef-angle margin:
/// `e_{n-k}(g) / C(n,k) - [((n-k)/n) sum g + k + 1 - n]`.
///
/// `e_{n-k}(g) / C(n,k)` equals `(k!(n-k)!/n!) * sum_K prod(g) / g_K` over
/// k-subsets `K`, without dividing by possibly vanishing entries.
pub fn nef_angle_margin(gamma: &[f64], k: usize) -> f64 {
    let n = gamma.len();
    let lhs = elementary_symmetric(gamma, n - k) / binomial(n, k);
    let sum: f64 = gamma.iter().sum();
    let rhs = (n - k) as f64 / n as f64 * sum + (k as f64 + 1.0 - n as f64);
    lhs - rhs
}

/// The three-dimensional, `k = 1` case written out directly.
pub fn nef_angle_n3k1_margin(g: &[f64]) -> f64 {
    let lhs = (g[0] * g[1] + g[1] * g[2] + g[2] * g[0]) / 3.0;
    let rhs = 2.0 / 3.0 * (g[0] + g[1] + g[2]) - 1.0;
    lhs - rhs
}

pub fn verify_nef_angle(
    n: usize,
    k: usize,
    grid_step: f64,
    random_trials: u64,
    seed: u64,
) -> Result<MarginReport, LabError> {
    check_grid(n, grid_step)?;
    check(k <= n, || format!("k = {k} exceeds n = {n}"))?;
    let start = Instant::now();
    let grid = grid_scan(n, grid_step, |g| nef_angle_margin(g, k));
    let random = random_scan(random_trials, seed, |rng| {
        let g: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        (nef_angle_margin(&g, k), g)
    });
    Ok(MarginReport::new(
        format!("nef_angle.n{n}.k{k}"),
        "e_{n-k}(g)/C(n,k) >= ((n-k)/n) sum g + k + 1 - n on [0,1]^n",
    )
    .with_worst(grid.merge(random))
    .tolerance(1e-10, "absolute, acceptance threshold for the nef-angle inequality")
    .timed(start))
}

pub fn verify_nef_angle_n3k1(grid_step: f64) -> Result<MarginReport, LabError> {
    check_grid(3, grid_step)?;
    let start = Instant::now();
    let grid = grid_scan(3, grid_step, nef_angle_n3k1_margin);
    Ok(MarginReport::new(
        "nef_angle.n3.k1.explicit",
        "(g1 g2 + g2 g3 + g3 g1)/3 >= (2/3)(g1 + g2 + g3) - 1 on [0,1]^3",
    )
    .with_worst(grid)
    .tolerance(1e-10, "absolute, acceptance threshold for the nef-angle inequality")
    .timed(start))
}

fn identity_power(n: usize, p: usize) -> PQForm {
    PQForm::power(&HMatrix::identity(n, n), p).expect("identity is Hermitian")
}

fn check_star_input(b: &[f64], omega: &PQForm, p: usize) -> Result<usize, LabError> {
    let n = b.len();
    check(omega.n() == n, || "form and spectrum dimensions differ".into())?;
    check((1..=n).contains(&p), || format!("p = {p} outside 1..={n}"))?;
    check(omega.q() == n - p, || format!("form must have degree {}", n - p))?;
    Ok(n)
}

/// `C(n,p) (alpha^(n-p) ^ beta^p / alpha^n)(alpha^p ^ Omega / alpha^n)
///  - beta^p ^ Omega / alpha^n` with `alpha = I`, `beta = diag(b)`.
pub fn star_margin(b: &[f64], omega: &PQForm, p: usize) -> Result<f64, LabError> {
    let n = check_star_input(b, omega, p)?;
    let alpha_part = identity_power(n, p).pair(omega)?;
    let beta_part = PQForm::power(&sampling::diagonal(b), p)?.pair(omega)?;
    Ok(elementary_symmetric(b, p) * alpha_part - beta_part)
}

/// `(n/p)(alpha^(n-1) ^ beta / alpha^n)(alpha^p ^ Omega / alpha^n)
///  - alpha^(p-1) ^ beta ^ Omega / alpha^n` with `alpha = I`, `beta = diag(b)`.
pub fn star_bis_margin(b: &[f64], omega: &PQForm, p: usize) -> Result<f64, LabError> {
    let n = check_star_input(b, omega, p)?;
    let alpha_part = identity_power(n, p).pair(omega)?;
    let mixed = identity_power(n, p - 1)
        .wedge(&PQForm::from_hermitian(&sampling::diagonal(b))?)?
        .pair(omega)?;
    let e1: f64 = b.iter().sum();
    Ok(e1 / p as f64 * alpha_part - mixed)
}

/// Draws `b` in (0,1] with max 1 and `Omega` weakly positive with unit
/// `alpha`-trace; both inequalities are homogeneous in each argument.
fn star_instance(n: usize, p: usize, b_rng: &mut ChaCha8Rng, o_rng: &mut ChaCha8Rng) -> (Vec<f64>, PQForm) {
    let mut b = sampling::positive_values(n, b_rng);
    let top = b.iter().cloned().fold(0.0, f64::max);
    b.iter_mut().for_each(|x| *x /= top);
    let omega = sampling::weakly_positive_form(n, n - p, o_rng);
    let trace = identity_power(n, p).pair(&omega).expect("complementary degrees");
    (b, omega.scale(1.0 / trace))
}

fn flat_star_input(b: &[f64], omega: &PQForm) -> Vec<f64> {
    let mut v = b.to_vec();
    v.extend(omega.to_flat());
    v
}

/// Splits a recorded star input back into `(b, Omega)`.
pub fn decode_star_input(n: usize, p: usize, input: &[f64]) -> Result<(Vec<f64>, PQForm), LabError> {
    check(input.len() >= n, || "input too short".into())?;
    Ok((input[..n].to_vec(), PQForm::from_flat(n, n - p, &input[n..])?))
}

fn star_scan(
    n: usize,
    p: usize,
    spectra: u64,
    forms_per_spectrum: u64,
    seed: u64,
    margin: fn(&[f64], &PQForm, usize) -> Result<f64, LabError>,
) -> Result<Worst, LabError> {
    check((1..=n).contains(&p), || format!("p = {p} outside 1..={n}"))?;
    check(n <= crate::forms::MAX_DIM, || format!("n = {n} too large"))?;
    let per = forms_per_spectrum.max(1);
    Ok(indexed_scan(spectra * per, |i| {
        let mut b_rng = trial_rng(seed ^ 0x5bd1_e995, i / per);
        let mut o_rng = trial_rng(seed, i);
        let (b, omega) = star_instance(n, p, &mut b_rng, &mut o_rng);
        let m = margin(&b, &omega, p).expect("instance matches degrees");
        (m, flat_star_input(&b, &omega))
    }))
}

pub fn verify_star(
    n: usize,
    p: usize,
    spectra: u64,
    forms_per_spectrum: u64,
    seed: u64,
) -> Result<MarginReport, LabError> {
    let start = Instant::now();
    let worst = star_scan(n, p, spectra, forms_per_spectrum, seed, star_margin)?;
    Ok(MarginReport::new(
        format!("star.n{n}.p{p}"),
        "C(n,p)(a^{n-p}b^p/a^n)(a^p W/a^n) >= b^p W/a^n, W weakly positive",
    )
    .with_worst(worst)
    .tolerance(1e-10, "absolute on unit-trace forms, acceptance threshold")
    .timed(start))
}

pub fn verify_star_bis(
    n: usize,
    p: usize,
    spectra: u64,
    forms_per_spectrum: u64,
    seed: u64,
) -> Result<MarginReport, LabError> {
    let start = Instant::now();
    let worst = star_scan(n, p, spectra, forms_per_spectrum, seed, star_bis_margin)?;
    Ok(MarginReport::new(
        format!("star_bis.n{n}.p{p}"),
        "(n/p)(a^{n-1}b/a^n)(a^p W/a^n) >= a^{p-1} b W/a^n, W weakly positive",
    )
    .with_worst(worst)
    .tolerance(1e-10, "absolute on unit-trace forms, acceptance threshold")
    .timed(start))
}

/// Both sides of `(n-p) sum_{|J|=p} b_J (sum_{j in J} b_j) >= p(p+1) e_{p+1}(b)`.
pub fn starstar_core_sides(b: &[f64], p: usize) -> (f64, f64) {
    let n = b.len();
    let e = elementary_symmetric_all(b);
    let e1: f64 = b.iter().sum();
    // sum_J b_J (sum_{j in J} b_j) = e_p e_1 - (p+1) e_{p+1}
    let inner = e[p] * e1 - (p as f64 + 1.0) * e.get(p + 1).copied().unwrap_or(0.0);
    let lhs = (n - p) as f64 * inner;
    let rhs = (p * (p + 1)) as f64 * e.get(p + 1).copied().unwrap_or(0.0);
    (lhs, rhs)
}

/// `(LHS - RHS) / max(LHS, RHS)` for the combinatorial core.
pub fn starstar_core_relative_margin(b: &[f64], p: usize) -> f64 {
    let (lhs, rhs) = starstar_core_sides(b, p);
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs) / scale
    }
}

/// Relative margin of
/// `(a^{n-p} b^p / a^n)(a^{p+k} b^{n-p-k} / a^n) >= a^k b^{n-k} / a^n`.
pub fn starstar_wedge_relative_margin(b: &[f64], p: usize, k: usize) -> f64 {
    let n = b.len();
    let e = elementary_symmetric_all(b);
    let ratio = |j: usize| e[j] / binomial(n, j);
    let lhs = ratio(p) * ratio(n - p - k);
    let rhs = ratio(n - k);
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs) / scale
    }
}

fn starstar_sample(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    sampling::positive_values(n, rng)
}

pub fn verify_starstar_core(n: usize, p: usize, trials: u64, seed: u64) -> Result<MarginReport, LabError> {
    check(p < n, || format!("p = {p} must be below n = {n}"))?;
    let start = Instant::now();
    let worst = random_scan(trials, seed, |rng| {
        let b = starstar_sample(n, rng);
        (starstar_core_relative_margin(&b, p), b)
    });
    let ones = vec![1.0; n];
    let (lhs, rhs) = starstar_core_sides(&ones, p);
    Ok(MarginReport::new(
        format!("starstar_core.n{n}.p{p}"),
        "(n-p) sum_{|J|=p} b_J sum_{j in J} b_j >= p(p+1) e_{p+1}(b), relative",
    )
    .with_worst(worst)
    .tolerance(1e-10, "relative, acceptance threshold for the combinatorial core")
    .stat("equality_defect_at_ones", (lhs - rhs).abs() / rhs.abs().max(1.0))
    .timed(start))
}

/// Wedge-ratio inequality for `(p, k)`; asserted only for `p + k = n - 1`.
pub fn verify_starstar(n: usize, p: usize, k: usize, trials: u64, seed: u64) -> Result<MarginReport, LabError> {
    check(p + k <= n, || format!("p + k = {} exceeds n = {n}", p + k))?;
    let start = Instant::now();
    let worst = random_scan(trials, seed, |rng| {
        let b = starstar_sample(n, rng);
        (starstar_wedge_relative_margin(&b, p, k), b)
    });
    let status = if p + k + 1 == n {
        Status::Asserted
    } else {
        Status::Unproven
    };
    Ok(MarginReport::new(
        format!("starstar.n{n}.p{p}.k{k}"),
        "(a^{n-p}b^p/a^n)(a^{p+k}b^{n-p-k}/a^n) >= a^k b^{n-k}/a^n, relative",
    )
    .with_worst(worst)
    .status(status)
    .tolerance(1e-10, "relative, acceptance threshold for the combinatorial core")
    .timed(start))
}

/// `tr_g(a) tr_a(b) - factor * tr_g(b)`; `factor = 1` is the proved inequality.
pub fn trace_product_margin(gamma: &HMatrix, alpha: &HMatrix, beta: &HMatrix, factor: f64) -> Result<f64, LabError> {
    let ga = trace_lambda(gamma, alpha)?;
    let ab = trace_lambda(alpha, beta)?;
    let gb = trace_lambda(gamma, beta)?;
    Ok(ga * ab - factor * gb)
}

fn flat_matrices(ms: &[&HMatrix]) -> Vec<f64> {
    ms.iter()
        .flat_map(|m| m.iter().flat_map(|c| [c.re, c.im]).collect::<Vec<_>>())
        .collect()
}

/// Splits a recorded trace-product input into `(gamma, alpha, beta)`.
pub fn decode_matrix_triple(n: usize, input: &[f64]) -> Result<[HMatrix; 3], LabError> {
    check(input.len() == 6 * n * n, || "input length does not match n".into())?;
    let mat = |k: usize| {
        HMatrix::from_iterator(
            n,
            n,
            input[2 * k * n * n..2 * (k + 1) * n * n]
                .chunks(2)
                .map(|c| C64::new(c[0], c[1])),
        )
    };
    Ok([mat(0), mat(1), mat(2)])
}

fn trace_triple(n: usize, rng: &mut ChaCha8Rng) -> [HMatrix; 3] {
    [
        sampling::hermitian_pd(n, rng),
        sampling::hermitian_pd(n, rng),
        sampling::hermitian_psd(n, rng),
    ]
}

pub fn verify_trace_product(n: usize, trials: u64, seed: u64) -> Result<MarginReport, LabError> {
    check(n >= 1, || "n must be at least 1".into())?;
    let start = Instant::now();
    let worst = random_scan(trials, seed, |rng| {
        let [g, a, b] = trace_triple(n, rng);
        let m = trace_product_margin(&g, &a, &b, 1.0).unwrap_or(f64::NAN);
        (m, flat_matrices(&[&g, &a, &b]))
    });
    Ok(MarginReport::new(
        format!("trace_product.n{n}"),
        "tr_g(a) tr_a(b) >= tr_g(b) for metrics g, a and b >= 0",
    )
    .with_worst(worst)
    .tolerance(1e-10, "absolute, acceptance threshold for the trace product")
    .timed(start))
}

/// The strengthened form `tr_g(a) tr_a(b) >= n tr_g(b)`, which fails in
/// general. Recorded with its counterexample frequency unless `assert` is set.
pub fn verify_trace_product_improved(n: usize, trials: u64, seed: u64, assert: bool) -> Result<MarginReport, LabError> {
    check(n >= 1, || "n must be at least 1".into())?;
    let start = Instant::now();
    let eval = |i: u64| {
        let mut rng = trial_rng(seed, i);
        let [g, a, b] = trace_triple(n, &mut rng);
        let m = trace_product_margin(&g, &a, &b, n as f64).unwrap_or(f64::NAN);
        (m, flat_matrices(&[&g, &a, &b]))
    };
    let worst = indexed_scan(trials, eval);
    #[cfg(feature = "parallel")]
    let failures = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().filter(|&i| !(eval(i).0 >= 0.0)).count()
    };
    #[cfg(not(feature = "parallel"))]
    let failures = (0..trials).filter(|&i| !(eval(i).0 >= 0.0)).count();
    let status = if assert { Status::Asserted } else { Status::Recorded };
    Ok(MarginReport::new(
        format!("trace_product_improved.n{n}"),
        "tr_g(a) tr_a(b) >= n tr_g(b) (not a theorem)",
    )
    .with_worst(worst)
    .status(status)
    .tolerance(1e-10, "absolute, same threshold as the proved trace product")
    .stat("counterexample_frequency", failures as f64 / trials.max(1) as f64)
    .timed(start))
}
