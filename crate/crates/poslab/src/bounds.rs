//! Volume lower bounds for differences of classes and the scalar analysis
//! behind them.
//!
//! Notation: `V = a^n`, `m = a^{n-1} b`, `R = V/m`, `s0` the nef threshold of
//! `a` with respect to `b` and `t0` the psef threshold.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{binomial, FormError, HMatrix, PQForm};
use crate::models::{mixed_power, nef_threshold, psef_threshold, ClassModel, Cone, ModelError};
use crate::report::{MarginReport, Status};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("requires R > n (R = {r}, n = {n})")]
    RatioTooSmall { r: f64, n: usize },
    #[error("requires psef threshold > 1 (t0 = {0})")]
    ThresholdTooSmall(f64),
    #[error("requires nef threshold in (0, 1) (s0 = {0})")]
    NefThresholdOutOfRange(f64),
    #[error("{name} = {value} outside [{lo}, {hi}]")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("class is not nef (margin {0:.3e})")]
    NotNef(f64),
    #[error("invalid degree {k} for dimension {n}")]
    InvalidDegree { k: usize, n: usize },
    #[error("dimension must be at least {0}")]
    DimensionTooSmall(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// The scalars the g/f analysis depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarData {
    pub n: usize,
    /// `a^n`
    pub volume: f64,
    /// `a^{n-1} b`
    pub mixed: f64,
    pub s0: f64,
    pub t0: f64,
}

impl ScalarData {
    pub fn ratio(&self) -> f64 {
        self.volume / self.mixed
    }

    /// `A = 1 - (n/R)(1 - s0)`.
    pub fn a_const(&self) -> f64 {
        1.0 - self.n as f64 / self.ratio() * (1.0 - self.s0)
    }
}

/// Roots and constants of the g analysis, defined when `R > n` and
/// `s0 in (0,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GConstants {
    pub a: f64,
    pub delta_r: f64,
    pub delta_prime: f64,
    pub r1: f64,
    pub r2: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

/// Constants for given `(n, R, s0)`; no domain checks.
pub fn g_constants(n: usize, r: f64, s0: f64) -> GConstants {
    let nf = n as f64;
    let mid = (nf - 2.0) * s0 + 1.0;
    let delta_r = r * r - 2.0 * mid * r + (nf * s0 - 1.0).powi(2);
    let root = ((nf - 1.0) * s0 * (1.0 - s0)).sqrt();
    let sq = delta_r.max(0.0).sqrt();
    GConstants {
        a: 1.0 - nf / r * (1.0 - s0),
        delta_r,
        delta_prime: 16.0 * (nf - 1.0) * s0 * (1.0 - s0),
        r1: mid - 2.0 * root,
        r2: mid + 2.0 * root,
        a1: (nf * s0 - 1.0 + r - sq) / (2.0 * r),
        a2: (nf * s0 - 1.0 + r + sq) / (2.0 * r),
        a3: s0,
        a4: 1.0 - (1.0 - s0) / r,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub volume: f64,
    pub mixed: f64,
    pub r: f64,
    /// `R_p = V / (a^{n-p} b^p)` for `p = 1..=n`.
    pub r_p: Vec<f64>,
    pub s0: f64,
    pub t0: f64,
    pub constants: Option<GConstants>,
    pub bounds: BTreeMap<String, f64>,
    pub vol_exact: Option<f64>,
    /// Why the g analysis was skipped, if it was.
    pub g_status: String,
}

pub fn conjecture_rhs<M: ClassModel>(model: &M, a: &M::Class, b: &M::Class) -> Result<f64, BoundError> {
    let n = model.dim();
    Ok(mixed_power(model, a, n, b)? - n as f64 * mixed_power(model, a, n - 1, b)?)
}

/// `d^n` for a nef class `d`, which is its volume.
pub fn vol_exact_nef<M: ClassModel>(model: &M, d: &M::Class) -> Result<f64, BoundError> {
    let margin = model.cone_margin(d, Cone::Nef)?;
    if margin < 0.0 {
        return Err(BoundError::NotNef(margin));
    }
    let n = model.dim();
    Ok(model.intersection(&vec![d; n])?)
}

/// `(V - n m) ((V - n m)/V)^{n-1}` for `R > n`.
pub fn suboptimal_bound(n: usize, volume: f64, mixed: f64) -> Result<f64, BoundError> {
    let r = volume / mixed;
    if !(r > n as f64) {
        return Err(BoundError::RatioTooSmall { r, n });
    }
    let d = volume - n as f64 * mixed;
    Ok(d * (d / volume).powi(n as i32 - 1))
}

/// `(1 - 1/t0)^n V` for `t0 > 1`.
pub fn p_vol_bound(n: usize, volume: f64, t0: f64) -> Result<f64, BoundError> {
    if !(t0 > 1.0) {
        return Err(BoundError::ThresholdTooSmall(t0));
    }
    Ok((1.0 - 1.0 / t0).powi(n as i32) * volume)
}

/// `(V - n m)^n / (V - n s0 m)^{n-1}` for `s0 < 1`, else `V - n m`.
pub fn nef_threshold_bound(data: &ScalarData) -> f64 {
    let n = data.n as f64;
    let d = data.volume - n * data.mixed;
    if data.s0 >= 1.0 {
        d
    } else {
        let e = data.volume - n * data.s0 * data.mixed;
        d * (d / e).powi(data.n as i32 - 1)
    }
}

/// Psef margin of `(n t / R) a - t b`.
pub fn kahler_current_class_margin<M: ClassModel>(
    model: &M,
    a: &M::Class,
    b: &M::Class,
    t: f64,
) -> Result<f64, BoundError> {
    let n = model.dim();
    let r = mixed_power(model, a, n, b)? / mixed_power(model, a, n - 1, b)?;
    let class = model.combine(n as f64 * t / r, a, -t, b);
    Ok(model.cone_margin(&class, Cone::Psef)?)
}

fn check_g_domain(data: &ScalarData) -> Result<(), BoundError> {
    if data.n < 2 {
        return Err(BoundError::DimensionTooSmall(2));
    }
    if !(data.s0 > 0.0 && data.s0 < 1.0) {
        return Err(BoundError::NefThresholdOutOfRange(data.s0));
    }
    let r = data.ratio();
    if !(r > data.n as f64) {
        return Err(BoundError::RatioTooSmall { r, n: data.n });
    }
    Ok(())
}

fn check_t(data: &ScalarData, t: f64) -> Result<(), BoundError> {
    let hi = data.ratio() / data.n as f64;
    // Allow rounding at the right end point.
    if !(t >= 1.0 && t <= hi * (1.0 + 1e-14)) {
        return Err(BoundError::OutOfDomain {
            name: "t",
            value: t,
            lo: 1.0,
            hi,
        });
    }
    Ok(())
}

/// `g(t) = ((A t - s0)/(t - s0))^n (V - s0 (t-1)/(A t - s0) n m)` on `[1, R/n]`.
pub fn g_eval(data: &ScalarData, t: f64) -> Result<f64, BoundError> {
    check_g_domain(data)?;
    check_t(data, t)?;
    Ok(g_raw(data, t))
}

fn g_raw(data: &ScalarData, t: f64) -> f64 {
    let (n, s0) = (data.n as f64, data.s0);
    let a = data.a_const();
    let u = a * t - s0;
    (u / (t - s0)).powi(data.n as i32) * (data.volume - s0 * (t - 1.0) / u * n * data.mixed)
}

/// Closed-form derivative of g.
pub fn g_prime(data: &ScalarData, t: f64) -> Result<f64, BoundError> {
    check_g_domain(data)?;
    check_t(data, t)?;
    let (n, s0) = (data.n as f64, data.s0);
    let a = data.a_const();
    let u = a * t - s0;
    let lead = n * (1.0 - a) * s0 * u.powi(data.n as i32 - 1) / (t - s0).powi(data.n as i32 + 1);
    let num = (n * s0 - n * s0 * a + a - s0) * t - n * s0 * (1.0 - a) - s0 * (a - s0);
    Ok(lead * (data.volume - num / ((1.0 - a) * u) * data.mixed))
}

fn sample_grid(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let k = samples.max(2);
    (0..k)
        .map(|i| {
            if i + 1 == k {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (k - 1) as f64
            }
        })
        .collect()
}

/// `min_i (g(t_{i+1}) - g(t_i)) / V` over an even grid of `[1, R/n]`.
pub fn g_monotone_margin(data: &ScalarData, samples: usize) -> Result<f64, BoundError> {
    check_g_domain(data)?;
    let ts = sample_grid(1.0, data.ratio() / data.n as f64, samples);
    let vals: Vec<f64> = ts.iter().map(|&t| g_raw(data, t)).collect();
    Ok(vals
        .windows(2)
        .map(|w| (w[1] - w[0]) / data.volume)
        .fold(f64::INFINITY, f64::min))
}

fn check_f(data: &ScalarData, s: f64) -> Result<(), BoundError> {
    if !(data.t0 > 1.0) {
        return Err(BoundError::ThresholdTooSmall(data.t0));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(BoundError::OutOfDomain {
            name: "s",
            value: s,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// `f(s) = (1 - (1-s)/(t0-s))^n (V - n s m)` on `[0, 1]`.
pub fn f_eval(data: &ScalarData, s: f64) -> Result<f64, BoundError> {
    check_f(data, s)?;
    Ok(f_raw(data, s))
}

fn f_raw(data: &ScalarData, s: f64) -> f64 {
    let n = data.n as f64;
    (1.0 - (1.0 - s) / (data.t0 - s)).powi(data.n as i32) * (data.volume - n * s * data.mixed)
}

/// Closed-form derivative of f.
pub fn f_prime(data: &ScalarData, s: f64) -> Result<f64, BoundError> {
    check_f(data, s)?;
    let n = data.n as f64;
    let t0 = data.t0;
    Ok(n * (t0 - 1.0).powi(data.n as i32) / (t0 - s).powi(data.n as i32 + 1)
        * (data.volume - ((n - 1.0) * s + t0) * data.mixed))
}

/// Left end `(R - t0)/(n - 1)` of the interval where f is non-increasing.
pub fn f_decreasing_from(data: &ScalarData) -> f64 {
    (data.ratio() - data.t0) / (data.n as f64 - 1.0)
}

/// `min_i (f(s_i) - f(s_{i+1})) / V` on `[max(0, (R-t0)/(n-1)), 1]`; `None`
/// when that interval is empty.
pub fn f_monotone_margin(data: &ScalarData, samples: usize) -> Result<Option<f64>, BoundError> {
    if data.n < 2 {
        return Err(BoundError::DimensionTooSmall(2));
    }
    check_f(data, 1.0)?;
    let lo = f_decreasing_from(data).max(0.0);
    if lo > 1.0 {
        return Ok(None);
    }
    let ss = sample_grid(lo, 1.0, samples);
    let vals: Vec<f64> = ss.iter().map(|&s| f_raw(data, s)).collect();
    Ok(Some(
        vals.windows(2)
            .map(|w| (w[0] - w[1]) / data.volume)
            .fold(f64::INFINITY, f64::min),
    ))
}

/// Relative mismatch between a closed-form derivative and a central
/// difference, measured against `max(|closed|, |value|)`.
pub fn derivative_mismatch(value: impl Fn(f64) -> f64, closed: f64, x: f64, h: f64) -> f64 {
    let fd = (value(x + h) - value(x - h)) / (2.0 * h);
    let scale = closed.abs().max(value(x).abs()).max(f64::MIN_POSITIVE);
    (fd - closed).abs() / scale
}

/// Largest derivative mismatch of g and f over interior sample points.
pub fn derivative_check(data: &ScalarData, samples: usize) -> Result<f64, BoundError> {
    check_g_domain(data)?;
    let hi = data.ratio() / data.n as f64;
    let mut worst: f64 = 0.0;
    for t in sample_grid(1.0, hi, samples + 2).into_iter().skip(1).take(samples) {
        let h = 1e-5 * (hi - 1.0).min(t - 1.0).min(hi - t).max(1e-300);
        let h = h.max(1e-7 * t);
        if t - h < 1.0 || t + h > hi {
            continue;
        }
        worst = worst.max(derivative_mismatch(|x| g_raw(data, x), g_prime(data, t)?, t, h));
    }
    if data.t0 > 1.0 {
        for s in sample_grid(0.0, 1.0, samples + 2).into_iter().skip(1).take(samples) {
            let h = 1e-6;
            worst = worst.max(derivative_mismatch(|x| f_raw(data, x), f_prime(data, s)?, s, h));
        }
    }
    Ok(worst)
}

/// Scalars, thresholds and all volume lower bounds for one pair of classes.
pub fn bound_report<M: ClassModel>(model: &M, a: &M::Class, b: &M::Class) -> Result<BoundReport, BoundError> {
    let n = model.dim();
    let volume = mixed_power(model, a, n, b)?;
    let mixed = mixed_power(model, a, n - 1, b)?;
    let r = volume / mixed;
    let mut r_p = Vec::with_capacity(n);
    for p in 1..=n {
        r_p.push(volume / mixed_power(model, a, n - p, b)?);
    }
    let s0 = nef_threshold(model, a, b)?.value;
    let t0 = psef_threshold(model, a, b)?.value;
    let data = ScalarData {
        n,
        volume,
        mixed,
        s0,
        t0,
    };
    let mut bounds = BTreeMap::new();
    bounds.insert("conjecture_rhs".to_string(), volume - n as f64 * mixed);
    if let Ok(v) = suboptimal_bound(n, volume, mixed) {
        bounds.insert("suboptimal".to_string(), v);
    }
    if let Ok(v) = p_vol_bound(n, volume, t0) {
        bounds.insert("p_vol".to_string(), v);
    }
    if r > n as f64 && s0 > 0.0 {
        bounds.insert("nefT".to_string(), nef_threshold_bound(&data));
    }
    let diff = model.combine(1.0, a, -1.0, b);
    bounds.insert("chain_n".to_string(), model.intersection(&vec![&diff; n])?);
    let vol_exact = vol_exact_nef(model, &diff).ok();
    let (constants, g_status) = if n < 2 {
        (None, "skipped: n < 2".to_string())
    } else if !(r > n as f64) {
        (None, "skipped: R <= n".to_string())
    } else if s0 <= 0.0 {
        (None, "skipped: s0 <= 0".to_string())
    } else if s0 >= 1.0 {
        (None, "skipped: s0 >= 1 (difference is nef)".to_string())
    } else {
        (Some(g_constants(n, r, s0)), "ok".to_string())
    };
    Ok(BoundReport {
        n,
        volume,
        mixed,
        r,
        r_p,
        s0,
        t0,
        constants,
        bounds,
        vol_exact,
        g_status,
    })
}

impl BoundReport {
    pub fn scalar_data(&self) -> ScalarData {
        ScalarData {
            n: self.n,
            volume: self.volume,
            mixed: self.mixed,
            s0: self.s0,
            t0: self.t0,
        }
    }
}

/// Fixed CSV columns of a bound table.
pub const BOUND_CSV_COLUMNS: [&str; 22] = [
    "instance",
    "n",
    "volume",
    "mixed",
    "R",
    "s0",
    "t0",
    "A",
    "delta_R",
    "delta_prime",
    "R1",
    "R2",
    "A1",
    "A2",
    "A3",
    "A4",
    "conjecture_rhs",
    "suboptimal",
    "p_vol",
    "nefT",
    "chain_n",
    "vol_exact",
];

pub fn write_bound_csv<W: std::io::Write>(rows: &[(String, BoundReport)], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUND_CSV_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for (name, r) in rows {
        let c = r.constants;
        let bound = |k: &str| opt(r.bounds.get(k).copied());
        w.write_record([
            name.clone(),
            r.n.to_string(),
            format!("{:e}", r.volume),
            format!("{:e}", r.mixed),
            format!("{:e}", r.r),
            format!("{:e}", r.s0),
            format!("{:e}", r.t0),
            opt(c.map(|c| c.a)),
            opt(c.map(|c| c.delta_r)),
            opt(c.map(|c| c.delta_prime)),
            opt(c.map(|c| c.r1)),
            opt(c.map(|c| c.r2)),
            opt(c.map(|c| c.a1)),
            opt(c.map(|c| c.a2)),
            opt(c.map(|c| c.a3)),
            opt(c.map(|c| c.a4)),
            bound("conjecture_rhs"),
            bound("suboptimal"),
            bound("p_vol"),
            bound("nefT"),
            bound("chain_n"),
            opt(r.vol_exact),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Volume bound near the thresholds: when `s0 >= 1` or
/// `s0 >= (R - t0)/(n - 1)`, the volume of `a - b` is at least `V - n m`.
/// The margin is `Vol - (V - n m)` when `a - b` is nef, else `f(s0) - f(1)`.
pub fn close_threshold_conjecture_check<M: ClassModel>(
    model: &M,
    a: &M::Class,
    b: &M::Class,
) -> Result<MarginReport, BoundError> {
    let start = Instant::now();
    let report = bound_report(model, a, b)?;
    let data = report.scalar_data();
    let rhs = report.volume - report.n as f64 * report.mixed;
    let mut input = model.flatten(a);
    input.extend(model.flatten(b));
    let base = MarginReport::new(
        format!("close_threshold.{}.n{}", model.name(), report.n),
        "N >= 1 or N >= (R - P)/(n-1) implies Vol(a - b) >= a^n - n a^{n-1} b",
    )
    .tolerance(1e-10, "relative to a^n");
    let cond_i = report.s0 >= 1.0;
    let cond_ii = report.n >= 2 && report.s0 >= f_decreasing_from(&data);
    if !(rhs > 0.0) || !(cond_i || cond_ii) {
        let mut r = base.status(Status::Skipped).timed(start);
        r.trials = 1;
        r.worst_input = input;
        return Ok(r);
    }
    let margin = match report.vol_exact {
        Some(v) => v - rhs,
        None => f_eval(&data, report.s0.min(1.0))? - rhs,
    };
    let mut r = base.timed(start);
    r.trials = 1;
    r.worst_margin = margin / report.volume;
    r.worst_input = input;
    Ok(r)
}

/// The four quantities of the chain
/// `{a^k - b^k}W >= {a - b}^k W >= {a^k - k a^{k-1} b}W >= (1 - n/R) a^k W >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainValues {
    pub power_difference: f64,
    pub difference_power: f64,
    pub linearized: f64,
    pub scaled: f64,
}

impl ChainValues {
    /// Margins `(I, II, III, final)`; each should be nonnegative.
    pub fn margins(&self) -> [f64; 4] {
        [
            self.power_difference - self.difference_power,
            self.difference_power - self.linearized,
            self.linearized - self.scaled,
            self.scaled,
        ]
    }
}

fn chain_from<F>(n: usize, k: usize, r: f64, integral: F) -> Result<ChainValues, BoundError>
where
    F: Fn(usize, usize, usize) -> Result<f64, BoundError>,
{
    // integral(i, j, l) = int a^i b^j (a - b)^l W with i + j + l = k
    let ak = integral(k, 0, 0)?;
    Ok(ChainValues {
        power_difference: ak - integral(0, k, 0)?,
        difference_power: integral(0, 0, k)?,
        linearized: ak - k as f64 * integral(k - 1, 1, 0)?,
        scaled: (1.0 - n as f64 / r) * ak,
    })
}

/// Chain values with `W` the product of the `n - k` model classes `omega`.
pub fn chain_check<M: ClassModel>(
    model: &M,
    a: &M::Class,
    b: &M::Class,
    k: usize,
    omega: &[M::Class],
) -> Result<ChainValues, BoundError> {
    let n = model.dim();
    if !(1..=n).contains(&k) || omega.len() != n - k {
        return Err(BoundError::InvalidDegree { k, n });
    }
    let r = mixed_power(model, a, n, b)? / mixed_power(model, a, n - 1, b)?;
    let diff = model.combine(1.0, a, -1.0, b);
    chain_from(n, k, r, |i, j, l| {
        let mut cs: Vec<&M::Class> = Vec::with_capacity(n);
        cs.extend(std::iter::repeat_n(a, i));
        cs.extend(std::iter::repeat_n(b, j));
        cs.extend(std::iter::repeat_n(&diff, l));
        cs.extend(omega.iter());
        Ok(model.intersection(&cs)?)
    })
}

/// `int a^i b^j c^l W` on the unit torus for constant forms.
fn torus_integral(
    a: &HMatrix,
    i: usize,
    b: &HMatrix,
    j: usize,
    c: &HMatrix,
    l: usize,
    omega: &PQForm,
) -> Result<f64, BoundError> {
    let n = omega.n();
    let form = PQForm::power(a, i)?
        .wedge(&PQForm::power(b, j)?)?
        .wedge(&PQForm::power(c, l)?)?
        .wedge(omega)?;
    Ok(crate::forms::factorial(n) * form.top_coefficient()?.re)
}

/// Chain values on the torus with `W` a constant (n-k, n-k)-form.
pub fn chain_check_form(a: &HMatrix, b: &HMatrix, k: usize, omega: &PQForm) -> Result<ChainValues, BoundError> {
    let n = a.nrows();
    if !(1..=n).contains(&k) || omega.q() + k != n {
        return Err(BoundError::InvalidDegree { k, n });
    }
    let one = PQForm::scalar(n, 1.0)?;
    let v = torus_integral(a, n, b, 0, a, 0, &one)?;
    let m = torus_integral(a, n - 1, b, 1, a, 0, &one)?;
    let diff = a - b;
    chain_from(n, k, v / m, |i, j, l| torus_integral(a, i, b, j, &diff, l, omega))
}

/// `|S_direct - S_sum| / scale` for
/// `S = int [(a-b)^k - a^k + k a^{k-1} b] W = sum_{l=1}^{k-1} l int (a-b)^{k-l-1} a^{l-1} b^2 W`,
/// with `a = diag(x)`, `b = diag(y)` of any signs.
pub fn s_k_identity_check(x: &[f64], y: &[f64], k: usize, omega: &PQForm) -> Result<f64, BoundError> {
    let n = x.len();
    if !(1..=n).contains(&k) || omega.q() + k != n || y.len() != n {
        return Err(BoundError::InvalidDegree { k, n });
    }
    let a = crate::sampling::diagonal(x);
    let b = crate::sampling::diagonal(y);
    let d = &a - &b;
    let dk = torus_integral(&a, 0, &b, 0, &d, k, omega)?;
    let ak = torus_integral(&a, k, &b, 0, &d, 0, omega)?;
    let akb = torus_integral(&a, k - 1, &b, 1, &d, 0, omega)?;
    let direct = dk - ak + k as f64 * akb;
    let mut sum = 0.0;
    let mut scale = dk.abs().max(ak.abs()).max(k as f64 * akb.abs());
    for l in 1..k {
        let term = l as f64 * torus_integral(&a, l - 1, &b, 2, &d, k - l - 1, omega)?;
        scale = scale.max(term.abs());
        sum += term;
    }
    if scale == 0.0 {
        return Ok((direct - sum).abs());
    }
    Ok((direct - sum).abs() / scale)
}

/// Margins of `int (a^p - t p a^{p-1} b) W >= (1 - t n/R) int a^p W` and
/// `int (a^p - t^p b^p) W >= (1 - t^p C(n,p)/R_p) int a^p W`, with `W` the
/// product of `n - p` model classes. The common `int a^p W` cancels; each
/// margin is relative to the largest of the remaining terms and `int a^p W`.
pub fn power_diff_rhs_check<M: ClassModel>(
    model: &M,
    a: &M::Class,
    b: &M::Class,
    omega: &[M::Class],
    p: usize,
    t: f64,
) -> Result<[f64; 2], BoundError> {
    let n = model.dim();
    if !(1..=n).contains(&p) || omega.len() != n - p {
        return Err(BoundError::InvalidDegree { k: p, n });
    }
    let integral = |i: usize, j: usize| -> Result<f64, BoundError> {
        let mut cs: Vec<&M::Class> = Vec::with_capacity(n);
        cs.extend(std::iter::repeat_n(a, i));
        cs.extend(std::iter::repeat_n(b, j));
        cs.extend(omega.iter());
        Ok(model.intersection(&cs)?)
    };
    let volume = mixed_power(model, a, n, b)?;
    let r = volume / mixed_power(model, a, n - 1, b)?;
    let r_p = volume / mixed_power(model, a, n - p, b)?;
    let ap = integral(p, 0)?;
    let lin = t * p as f64 * integral(p - 1, 1)?;
    let lin_rhs = t * n as f64 / r * ap;
    let first = lin_rhs - lin;
    let tp = t.powi(p as i32);
    let pow = tp * integral(0, p)?;
    let pow_rhs = tp * binomial(n, p) / r_p * ap;
    let second = pow_rhs - pow;
    Ok([
        first / ap.max(lin.abs()).max(lin_rhs.abs()),
        second / ap.max(pow.abs()).max(pow_rhs.abs()),
    ])
}
