//! Batch checks over random instances, each summarized as a [`MarginReport`].
//!
//! Model suites are generic over [`ClassModel`]; scalar suites sample the
//! constants of the g/f analysis directly; the Monge-Ampere suites run the
//! solver on fixed band-limited instances. An evaluation error turns the
//! trial's margin into NaN, which fails an asserted report.

use std::fmt::Display;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    chain_check, chain_check_form, close_threshold_conjecture_check, derivative_check, f_decreasing_from, f_eval,
    f_monotone_margin, g_constants, g_eval, g_monotone_margin, kahler_current_class_margin, nef_threshold_bound,
    p_vol_bound, power_diff_rhs_check, s_k_identity_check, suboptimal_bound, vol_exact_nef, ScalarData,
};
use crate::forms::{HMatrix, C64};
use crate::ma::{
    approx_fixed_point, assemble_rhs, eval_modes, linearization_remainders, observed_order, poisson_reference,
    random_modes, solve_ma, sup_norm, verify_prod_traces, FieldForm, FixedPointInput, FormField, MAProblem, MaError,
    PointForm, SolveOptions, Spectral, TorusGrid, WeightForm,
};
use crate::models::{
    c_profile, concavity_margin, ht_sides, mixed_power, nef_threshold, nef_volume_bracket, psef_threshold, ClassModel,
    ModelError,
};
use crate::report::{MarginReport, Status};
use crate::sampling::{hermitian_pd, weakly_positive_form};
use crate::scan::{random_scan, trial_rng, Worst};

/// Seed for one report, so reports sharing a base seed draw distinct streams.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    label.bytes().fold(seed ^ 0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn or_nan<E: Display>(r: Result<f64, E>) -> f64 {
    r.unwrap_or(f64::NAN)
}

fn scan_report<F>(id: String, statement: &str, trials: u64, seed: u64, tol: f64, source: &str, eval: F) -> MarginReport
where
    F: Fn(&mut ChaCha8Rng) -> (f64, Vec<f64>) + Sync,
{
    let start = Instant::now();
    let worst = random_scan(trials, derive_seed(seed, &id), eval);
    MarginReport::new(id, statement)
        .with_worst(worst)
        .tolerance(tol, source)
        .timed(start)
}

fn flat_all<M: ClassModel>(model: &M, classes: &[&M::Class]) -> Vec<f64> {
    classes.iter().flat_map(|c| model.flatten(c)).collect()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi).exp()
}

/// Kahler pair with `R = a^n / a^{n-1} b` equal to `n u`, `u` drawn from
/// `[lo, hi)`, obtained by rescaling `b`.
pub fn pair_with_ratio<M: ClassModel>(
    model: &M,
    rng: &mut ChaCha8Rng,
    lo: f64,
    hi: f64,
) -> Result<(M::Class, M::Class), ModelError> {
    let n = model.dim();
    let a = model.random_kahler(rng);
    let b0 = model.random_kahler(rng);
    let r0 = mixed_power(model, &a, n, &b0)? / mixed_power(model, &a, n - 1, &b0)?;
    let r = n as f64 * rng.random_range(lo..hi);
    Ok((a, model.combine(r0 / r, &b0, 0.0, &b0)))
}

/// Pair `(b + d, b)` with `b`, `d` Kahler, so the difference is nef.
pub fn nef_difference_pair<M: ClassModel>(model: &M, rng: &mut ChaCha8Rng) -> (M::Class, M::Class, M::Class) {
    let b = model.random_kahler(rng);
    let d0 = model.random_kahler(rng);
    let d = model.combine(log_uniform(rng, -1.0, 3.0), &d0, 0.0, &d0);
    (model.combine(1.0, &b, 1.0, &d), b, d)
}

fn model_tag<M: ClassModel>(model: &M) -> String {
    format!("{}.n{}", model.name(), model.dim())
}

/// Threshold calculus on random Kahler pairs.
pub fn threshold_suite<M: ClassModel>(model: &M, trials: u64, seed: u64) -> Vec<MarginReport> {
    let tag = model_tag(model);
    let n = model.dim();
    let pair = |rng: &mut ChaCha8Rng| (model.random_kahler(rng), model.random_kahler(rng));
    let input = |a: &M::Class, b: &M::Class| flat_all(model, &[a, b]);
    let mut out = Vec::new();
    out.push(scan_report(
        format!("thresholds.psef_closed_form.{tag}"),
        "closed-form psef threshold equals the bisection value",
        trials,
        seed,
        1e-9,
        "absolute; bisection bracket shrinks below 1e-20",
        |rng| {
            let (a, b) = pair(rng);
            let m = or_nan(psef_threshold(model, &a, &b).map(|t| -(t.value - t.bisection).abs()));
            (m, input(&a, &b))
        },
    ));
    out.push(scan_report(
        format!("thresholds.nef_cross_check.{tag}"),
        "bisected nef threshold equals the subvariety infimum",
        trials,
        seed,
        1e-9,
        "relative to max(1, N)",
        |rng| {
            let (a, b) = pair(rng);
            let m =
                or_nan(nef_threshold(model, &a, &b).map(|t| -(t.value - t.cross_check).abs() / t.value.abs().max(1.0)));
            (m, input(&a, &b))
        },
    ));
    out.push(scan_report(
        format!("thresholds.nef_below_psef.{tag}"),
        "N(a, b) <= P(a, b)",
        trials,
        seed,
        1e-10,
        "relative to max(1, P)",
        |rng| {
            let (a, b) = pair(rng);
            let m = or_nan((|| {
                let p = psef_threshold(model, &a, &b)?.value;
                let s = nef_threshold(model, &a, &b)?.value;
                Ok::<_, ModelError>((p - s) / p.abs().max(1.0))
            })());
            (m, input(&a, &b))
        },
    ));
    out.push(scan_report(
        format!("thresholds.volume_bracket.{tag}"),
        "a^n / (n a^{n-1} b) <= P(a, b) <= a^n / a^{n-1} b",
        trials,
        seed,
        1e-10,
        "relative to a^n / a^{n-1} b",
        |rng| {
            let (a, b) = pair(rng);
            let m = or_nan((|| {
                let r = mixed_power(model, &a, n, &b)? / mixed_power(model, &a, n - 1, &b)?;
                let p = psef_threshold(model, &a, &b)?.value;
                Ok::<_, ModelError>((p - r / n as f64).min(r - p) / r)
            })());
            (m, input(&a, &b))
        },
    ));
    out.push(scan_report(
        format!("thresholds.self.{tag}"),
        "P(a, a) = 1",
        trials,
        seed,
        1e-12,
        "absolute; closed form is an eigenvalue of the identity",
        |rng| {
            let a = model.random_kahler(rng);
            (
                or_nan(psef_threshold(model, &a, &a).map(|t| -(t.value - 1.0).abs())),
                model.flatten(&a),
            )
        },
    ));
    out.push(scan_report(
        format!("thresholds.superadditive.{tag}"),
        "P(a1 + a2, b) >= P(a1, b) + P(a2, b)",
        trials,
        seed,
        1e-10,
        "relative to max(1, P(a1 + a2, b))",
        |rng| {
            let (a1, b) = pair(rng);
            let a2 = model.random_kahler(rng);
            let m = or_nan((|| {
                let sum = model.combine(1.0, &a1, 1.0, &a2);
                let p = psef_threshold(model, &sum, &b)?.value;
                let p1 = psef_threshold(model, &a1, &b)?.value;
                let p2 = psef_threshold(model, &a2, &b)?.value;
                Ok::<_, ModelError>((p - p1 - p2) / p.abs().max(1.0))
            })());
            (m, flat_all(model, &[&a1, &a2, &b]))
        },
    ));
    out.push(scan_report(
        format!("thresholds.homogeneous.{tag}"),
        "P(t a, b) = t P(a, b) and P(a, t b) = P(a, b)/t for t > 0",
        trials,
        seed,
        1e-10,
        "relative to the larger side",
        |rng| {
            let (a, b) = pair(rng);
            let t = log_uniform(rng, -2.0, 2.0);
            let m = or_nan((|| {
                let p = psef_threshold(model, &a, &b)?.value;
                let ta = model.combine(t, &a, 0.0, &a);
                let tb = model.combine(t, &b, 0.0, &b);
                let pa = psef_threshold(model, &ta, &b)?.value;
                let pb = psef_threshold(model, &a, &tb)?.value;
                let e1 = (pa - t * p).abs() / pa.abs().max((t * p).abs());
                let e2 = (pb - p / t).abs() / pb.abs().max((p / t).abs());
                Ok::<_, ModelError>(-e1.max(e2))
            })());
            let mut x = input(&a, &b);
            x.push(t);
            (m, x)
        },
    ));
    out.push(scan_report(
        format!("thresholds.transitive.{tag}"),
        "P(a, c) >= P(a, b) P(b, c) for psef a",
        trials,
        seed,
        1e-10,
        "relative to max(1, P(a, c))",
        |rng| {
            let (a, b) = pair(rng);
            let c = model.random_kahler(rng);
            let m = or_nan((|| {
                let pac = psef_threshold(model, &a, &c)?.value;
                let pab = psef_threshold(model, &a, &b)?.value;
                let pbc = psef_threshold(model, &b, &c)?.value;
                Ok::<_, ModelError>((pac - pab * pbc) / pac.abs().max(1.0))
            })());
            (m, flat_all(model, &[&a, &b, &c]))
        },
    ));
    out.push(scan_report(
        format!("thresholds.nef_volume_bracket.{tag}"),
        "inf_Y a^m[Y] / (m a^{m-1} b [Y]) <= N(a, b) <= inf_Y a^m[Y] / (a^{m-1} b [Y])",
        trials,
        seed,
        1e-10,
        "relative to the upper estimate",
        |rng| {
            let (a, b) = pair(rng);
            let m = or_nan(nef_volume_bracket(model, &a, &b).map(|br| br.margin() / br.upper.abs().max(1.0)));
            (m, input(&a, &b))
        },
    ));
    out
}

/// Log-concavity of `j -> a^j b^{n-j}` and the mixed Hodge-Teissier inequalities.
pub fn hodge_teissier_suite<M: ClassModel>(model: &M, trials: u64, seed: u64) -> Vec<MarginReport> {
    let tag = model_tag(model);
    let n = model.dim();
    let pair = |rng: &mut ChaCha8Rng| (model.random_kahler(rng), model.random_kahler(rng));
    vec![
        scan_report(
            format!("profile.concavity.{tag}"),
            "c_{j-1} + c_{j+1} <= 2 c_j for c_j = log a^j b^{n-j}",
            trials,
            seed,
            1e-12,
            "absolute on logarithms",
            |rng| {
                let (a, b) = pair(rng);
                (
                    or_nan(c_profile(model, &a, &b).map(|p| concavity_margin(&p))),
                    flat_all(model, &[&a, &b]),
                )
            },
        ),
        scan_report(
            format!("profile.hodge_teissier.{tag}"),
            "(a^{n-p} b^p)(a^{p+k} b^{n-p-k}) >= (a^n)(a^k b^{n-k}) for all p + k <= n",
            trials,
            seed,
            1e-10,
            "relative to the right side",
            |rng| {
                let (a, b) = pair(rng);
                let m = or_nan((|| {
                    let mut worst = f64::INFINITY;
                    for p in 0..=n {
                        for k in 0..=n - p {
                            let (lhs, rhs) = ht_sides(model, &a, &b, p, k)?;
                            worst = worst.min((lhs - rhs) / rhs);
                        }
                    }
                    Ok::<_, ModelError>(worst)
                })());
                (m, flat_all(model, &[&a, &b]))
            },
        ),
    ]
}

/// Volume lower bounds on pairs whose difference is nef, where the volume is
/// the top self-intersection of the difference.
pub fn volume_ordering_suite<M: ClassModel>(model: &M, trials: u64, seed: u64) -> Vec<MarginReport> {
    let tag = model_tag(model);
    let n = model.dim();
    // (V, m, s0, t0, Vol) of one nef-difference instance.
    let scalars = |a: &M::Class, b: &M::Class, d: &M::Class| -> Result<(ScalarData, f64), String> {
        let volume = mixed_power(model, a, n, b).map_err(|e| e.to_string())?;
        let mixed = mixed_power(model, a, n - 1, b).map_err(|e| e.to_string())?;
        let s0 = nef_threshold(model, a, b).map_err(|e| e.to_string())?.value;
        let t0 = psef_threshold(model, a, b).map_err(|e| e.to_string())?.value;
        let vol = vol_exact_nef(model, d).map_err(|e| e.to_string())?;
        Ok((
            ScalarData {
                n,
                volume,
                mixed,
                s0,
                t0,
            },
            vol,
        ))
    };
    let with = |rng: &mut ChaCha8Rng, f: &dyn Fn(&ScalarData, f64) -> Result<f64, String>| {
        let (a, b, d) = nef_difference_pair(model, rng);
        let m = or_nan(scalars(&a, &b, &d).and_then(|(data, vol)| f(&data, vol)));
        (m, flat_all(model, &[&a, &b]))
    };
    let mut out = vec![
        scan_report(
            format!("volume.exact_vs_nef_threshold.{tag}"),
            "Vol(a - b) >= nefT bound for nef a - b",
            trials,
            seed,
            1e-10,
            "relative to a^n",
            |rng| with(rng, &|data, vol| Ok((vol - nef_threshold_bound(data)) / data.volume)),
        ),
        scan_report(
            format!("volume.nef_threshold_vs_suboptimal.{tag}"),
            "nefT bound >= suboptimal bound when R > n",
            trials,
            seed,
            1e-10,
            "relative to a^n",
            |rng| {
                with(rng, &|data, _| match suboptimal_bound(n, data.volume, data.mixed) {
                    Ok(sub) => Ok((nef_threshold_bound(data) - sub) / data.volume),
                    Err(_) => Ok(f64::INFINITY),
                })
            },
        ),
        scan_report(
            format!("volume.exact_vs_conjecture.{tag}"),
            "Vol(a - b) >= a^n - n a^{n-1} b for nef a - b",
            trials,
            seed,
            1e-10,
            "relative to a^n",
            |rng| {
                with(rng, &|data, vol| {
                    Ok((vol - (data.volume - n as f64 * data.mixed)) / data.volume)
                })
            },
        ),
        scan_report(
            format!("volume.exact_vs_p_vol.{tag}"),
            "Vol(a - b) >= (1 - 1/P)^n a^n when P > 1",
            trials,
            seed,
            1e-10,
            "relative to a^n",
            |rng| {
                with(rng, &|data, vol| match p_vol_bound(n, data.volume, data.t0) {
                    Ok(pv) => Ok((vol - pv) / data.volume),
                    Err(_) => Ok(f64::INFINITY),
                })
            },
        ),
    ];
    let non_orth = scan_report(
        format!("volume.non_orthogonal.{tag}"),
        "a^n - n a^{n-1} b > 0 and b != 0 imply a^{n-1} b > 0",
        trials,
        seed,
        0.0,
        "strict inequality",
        |rng| {
            let (a, b) = match pair_with_ratio(model, rng, 1.0, 4.0) {
                Ok(p) => p,
                Err(_) => return (f64::NAN, Vec::new()),
            };
            let m = or_nan((|| {
                let v = mixed_power(model, &a, n, &b)?;
                let mixed = mixed_power(model, &a, n - 1, &b)?;
                Ok::<_, ModelError>(if v - n as f64 * mixed > 0.0 {
                    mixed / v
                } else {
                    f64::INFINITY
                })
            })());
            (m, flat_all(model, &[&a, &b]))
        },
    )
    .strict();
    out.push(non_orth);
    out.push(scan_report(
        format!("volume.kahler_current_class.{tag}"),
        "(n t / R) a - t b is psef for t >= 0",
        trials,
        seed,
        1e-10,
        "relative to t |b|",
        |rng| {
            let (a, b) = (model.random_kahler(rng), model.random_kahler(rng));
            let t = rng.random_range(0.01..3.0);
            let m = or_nan(kahler_current_class_margin(model, &a, &b, t).map(|m| m / (t * model.norm(&b))));
            let mut x = flat_all(model, &[&a, &b]);
            x.push(t);
            (m, x)
        },
    ));
    out
}

/// The near-threshold volume bound over random pairs; instances meeting
/// neither condition are skipped and counted.
pub fn close_threshold_suite<M: ClassModel>(model: &M, trials: u64, seed: u64) -> MarginReport {
    let id = format!("volume.close_threshold.{}", model_tag(model));
    let start = Instant::now();
    let seed = derive_seed(seed, &id);
    let eval = |i: u64| -> (f64, Vec<f64>) {
        let mut rng = trial_rng(seed, i);
        // Half the instances have a nef difference, half are generic pairs.
        let (a, b) = if i.is_multiple_of(2) {
            let (a, b, _) = nef_difference_pair(model, &mut rng);
            (a, b)
        } else {
            match pair_with_ratio(model, &mut rng, 1.0, 4.0) {
                Ok(p) => p,
                Err(_) => return (f64::NAN, Vec::new()),
            }
        };
        match close_threshold_conjecture_check(model, &a, &b) {
            Ok(r) if r.status == Status::Skipped => (f64::INFINITY, r.worst_input),
            Ok(r) => (r.worst_margin, r.worst_input),
            Err(_) => (f64::NAN, flat_all(model, &[&a, &b])),
        }
    };
    let worst = crate::scan::indexed_scan(trials, eval);
    let applicable = (0..trials).filter(|&i| eval(i).0.is_finite()).count();
    MarginReport::new(
        id,
        "N >= 1 or N >= (R - P)/(n-1) implies Vol(a - b) >= a^n - n a^{n-1} b",
    )
    .with_worst(worst)
    .tolerance(1e-10, "relative to a^n")
    .stat("applicable", applicable as f64)
    .timed(start)
}

fn chain_margins(values: [f64; 4], k: usize, scale: f64) -> f64 {
    let [i, ii, iii, last] = values;
    if k == 1 {
        // I_1 and II_1 are identities.
        -(i.abs().max(ii.abs())) / scale
    } else {
        i.min(ii).min(iii).min(last) / scale
    }
}

/// The chain `I_k >= II_k >= III_k >= 0` with `W` a product of Kahler classes.
pub fn chain_suite<M: ClassModel>(model: &M, trials: u64, seed: u64) -> MarginReport {
    let n = model.dim();
    scan_report(
        format!("chain.{}", model_tag(model)),
        "{a^k - b^k}W >= {a - b}^k W >= {a^k - k a^{k-1} b}W >= (1 - n/R) a^k W >= 0 for R > n, all k",
        trials,
        seed,
        1e-10,
        "relative to a^k W; k = 1 entries as equalities",
        |rng| {
            let (a, b) = match pair_with_ratio(model, rng, 1.05, 5.0) {
                Ok(p) => p,
                Err(_) => return (f64::NAN, Vec::new()),
            };
            let omega: Vec<M::Class> = (0..n).map(|_| model.random_kahler(rng)).collect();
            let mut worst = f64::INFINITY;
            for k in 1..=n {
                let w = &omega[..n - k];
                let m = or_nan((|| {
                    let values = chain_check(model, &a, &b, k, w)?;
                    let mut cs: Vec<&M::Class> = vec![&a; k];
                    cs.extend(w.iter());
                    let ak = model.intersection(&cs)?;
                    Ok::<_, crate::bounds::BoundError>(chain_margins(values.margins(), k, ak))
                })());
                worst = if m.is_nan() { f64::NAN } else { worst.min(m) };
            }
            let mut x = flat_all(model, &[&a, &b]);
            x.extend(omega.iter().flat_map(|c| model.flatten(c)));
            (worst, x)
        },
    )
}

/// The chain on the torus with `W` a weakly positive constant form.
pub fn chain_form_suite(n: usize, trials: u64, seed: u64) -> MarginReport {
    let model = crate::models::TorusModel::new(n).expect("valid dimension");
    scan_report(
        format!("chain_form.torus.n{n}"),
        "{a^k - b^k}W >= {a - b}^k W >= {a^k - k a^{k-1} b}W >= (1 - n/R) a^k W >= 0, W weakly positive",
        trials,
        seed,
        1e-10,
        "relative to a^k W; k = 1 entries as equalities",
        |rng| {
            let (a, b) = match pair_with_ratio(&model, rng, 1.05, 5.0) {
                Ok(p) => p,
                Err(_) => return (f64::NAN, Vec::new()),
            };
            let mut worst = f64::INFINITY;
            for k in 1..=n {
                let w = weakly_positive_form(n, n - k, rng);
                let m = or_nan(chain_check_form(&a, &b, k, &w).map(|v| {
                    let scale = v
                        .power_difference
                        .abs()
                        .max(v.linearized.abs())
                        .max(v.scaled.abs())
                        .max(1e-300);
                    chain_margins(v.margins(), k, scale)
                }));
                worst = if m.is_nan() { f64::NAN } else { worst.min(m) };
            }
            (worst, flat_all(&model, &[&a, &b]))
        },
    )
}

/// The `S_k` rearrangement on diagonal data of arbitrary sign.
pub fn s_k_identity_suite(max_n: usize, trials: u64, seed: u64) -> MarginReport {
    scan_report(
        "chain.s_k_identity".into(),
        "(a-b)^k - a^k + k a^{k-1} b = sum_l l (a-b)^{k-l-1} a^{l-1} b^2 against W",
        trials,
        seed,
        1e-12,
        "relative to the largest term",
        |rng| {
            let n = rng.random_range(1..=max_n);
            let k = rng.random_range(1..=n);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let w = weakly_positive_form(n, n - k, rng);
            let m = or_nan(s_k_identity_check(&x, &y, k, &w).map(|r| -r));
            let mut input = vec![n as f64, k as f64];
            input.extend(&x);
            input.extend(&y);
            (m, input)
        },
    )
}

/// Lower bounds for `int (a^p - t p a^{p-1} b) W` and `int (a^p - t^p b^p) W`.
pub fn power_diff_rhs_suite<M: ClassModel>(model: &M, trials: u64, seed: u64) -> MarginReport {
    let n = model.dim();
    scan_report(
        format!("chain.power_diff_rhs.{}", model_tag(model)),
        "int (a^p - t p a^{p-1} b) W >= (1 - t n/R) int a^p W and int (a^p - t^p b^p) W >= (1 - t^p C(n,p)/R_p) int a^p W",
        trials,
        seed,
        1e-10,
        "relative to the largest term",
        |rng| {
            let (a, b) = (model.random_kahler(rng), model.random_kahler(rng));
            let p = rng.random_range(1..=n);
            let t = rng.random_range(0.0..3.0);
            let omega: Vec<M::Class> = (0..n - p).map(|_| model.random_kahler(rng)).collect();
            let m = or_nan(power_diff_rhs_check(model, &a, &b, &omega, p, t).map(|[m1, m2]| m1.min(m2)));
            let mut x = flat_all(model, &[&a, &b]);
            x.extend([p as f64, t]);
            (m, x)
        },
    )
}

/// Synthetic `(n, R, s0, t0)` with `R > n`, `s0 in (0,1)` and `t0 in [R/n, R]`.
pub fn random_scalar_data(max_n: usize, rng: &mut ChaCha8Rng) -> ScalarData {
    let n = rng.random_range(2..=max_n);
    let r = n as f64 * (1.0 + log_uniform(rng, -4.0, 2.0));
    let s0 = rng.random_range(1e-3..1.0 - 1e-3);
    let t0 = rng.random_range(r / n as f64..r);
    ScalarData {
        n,
        volume: 1.0,
        mixed: 1.0 / r,
        s0,
        t0,
    }
}

fn scalar_input(d: &ScalarData) -> Vec<f64> {
    vec![d.n as f64, d.ratio(), d.s0, d.t0]
}

/// Shape of g and f on synthetic scalar data.
pub fn g_f_suite(max_n: usize, trials: u64, seed: u64) -> Vec<MarginReport> {
    let with = |f: fn(&ScalarData) -> f64| {
        move |rng: &mut ChaCha8Rng| {
            let d = random_scalar_data(max_n, rng);
            (f(&d), scalar_input(&d))
        }
    };
    vec![
        scan_report(
            "g_f.g_increasing".into(),
            "g is increasing on [1, R/n]",
            trials,
            seed,
            1e-10,
            "forward differences on 100 points, relative to a^n",
            with(|d| or_nan(g_monotone_margin(d, 100))),
        ),
        scan_report(
            "g_f.g_left_end".into(),
            "g(1) equals the suboptimal bound",
            trials,
            seed,
            1e-12,
            "relative to a^n",
            with(|d| {
                or_nan((|| {
                    let g1 = g_eval(d, 1.0)?;
                    Ok::<_, crate::bounds::BoundError>(
                        -(g1 - suboptimal_bound(d.n, d.volume, d.mixed)?).abs() / d.volume,
                    )
                })())
            }),
        ),
        scan_report(
            "g_f.g_right_end".into(),
            "g(R/n) equals the nefT bound and lies in [g(1), a^n - n a^{n-1} b]",
            trials,
            seed,
            1e-12,
            "relative to a^n",
            with(|d| {
                or_nan((|| {
                    let gr = g_eval(d, d.ratio() / d.n as f64)?;
                    let g1 = g_eval(d, 1.0)?;
                    let conj = d.volume - d.n as f64 * d.mixed;
                    let eq = -(gr - nef_threshold_bound(d)).abs();
                    Ok::<_, crate::bounds::BoundError>(eq.min(gr - g1).min(conj - gr) / d.volume)
                })())
            }),
        ),
        scan_report(
            "g_f.f_non_increasing".into(),
            "f is non-increasing on [(R - P)/(n-1), 1] and f(N) >= f(1) there",
            trials,
            seed,
            1e-10,
            "forward differences on 100 points, relative to a^n",
            with(|d| {
                or_nan((|| {
                    let mono = f_monotone_margin(d, 100)?.unwrap_or(f64::INFINITY);
                    let end = if d.s0 >= f_decreasing_from(d) {
                        (f_eval(d, d.s0)? - f_eval(d, 1.0)?) / d.volume
                    } else {
                        f64::INFINITY
                    };
                    Ok::<_, crate::bounds::BoundError>(mono.min(end))
                })())
            }),
        ),
        scan_report(
            "g_f.derivatives".into(),
            "closed-form g' and f' match central differences",
            trials,
            seed,
            1e-6,
            "relative mismatch",
            with(|d| or_nan(derivative_check(d, 20).map(|e| -e))),
        ),
    ]
}

/// Orderings of the constants of the g analysis, all strict except `R2 <= n`,
/// plus the equality `R2 = n` at `s0 = (n-1)/n`.
pub fn constants_suite(max_n: usize, trials: u64, seed: u64) -> Vec<MarginReport> {
    let strict = |id: &str, statement: &str, f: fn(&ScalarData) -> f64| {
        scan_report(
            format!("constants.{id}"),
            statement,
            trials,
            seed,
            0.0,
            "strict inequality",
            move |rng| {
                let d = random_scalar_data(max_n, rng);
                (f(&d), scalar_input(&d))
            },
        )
        .strict()
    };
    let c = |d: &ScalarData| g_constants(d.n, d.ratio(), d.s0);
    let mut out = vec![
        strict("delta_prime", "16(n-1) s0 (1 - s0) > 0", |d| {
            g_constants(d.n, d.ratio(), d.s0).delta_prime
        }),
        strict("r1_below_r2", "R1 < R2", |d| {
            let k = g_constants(d.n, d.ratio(), d.s0);
            k.r2 - k.r1
        }),
        strict("n_below_r", "n < R", |d| d.ratio() - d.n as f64),
        strict("a1_below_a", "A1 < A", |d| {
            let k = g_constants(d.n, d.ratio(), d.s0);
            k.a - k.a1
        }),
        strict("a_below_a2", "A < A2", |d| {
            let k = g_constants(d.n, d.ratio(), d.s0);
            k.a2 - k.a
        }),
        strict("s0_below_a", "s0 = A3 < A", |d| d.a_const() - d.s0),
        strict("a_below_a4", "A < A4 = 1 - (1 - s0)/R", |d| {
            let k = g_constants(d.n, d.ratio(), d.s0);
            k.a4 - k.a
        }),
    ];
    out.push(scan_report(
        "constants.r2_at_most_n".into(),
        "R2 <= n",
        trials,
        seed,
        1e-12,
        "relative to n",
        move |rng| {
            let d = random_scalar_data(max_n, rng);
            ((d.n as f64 - c(&d).r2) / d.n as f64, scalar_input(&d))
        },
    ));
    let start = Instant::now();
    let worst = (2..=max_n)
        .map(|n| {
            let s0 = (n as f64 - 1.0) / n as f64;
            let r2 = g_constants(n, 2.0 * n as f64, s0).r2;
            Worst {
                margin: -(r2 - n as f64).abs() / n as f64,
                input: vec![n as f64, s0],
                index: n as u64,
                trials: 1,
            }
        })
        .fold(Worst::empty(), Worst::merge);
    out.push(
        MarginReport::new("constants.r2_equality", "R2 = n at s0 = (n-1)/n")
            .with_worst(worst)
            .tolerance(1e-12, "relative to n")
            .timed(start),
    );
    out
}

fn herm2(a11: f64, a22: f64, a12: C64) -> HMatrix {
    HMatrix::from_row_slice(2, 2, &[C64::new(a11, 0.0), a12, a12.conj(), C64::new(a22, 0.0)])
}

/// The reference class of the shipped two-dimensional instances.
pub fn reference_alpha() -> HMatrix {
    herm2(1.2, 0.9, C64::new(0.15, -0.1))
}

/// Manufactured problem on a cubic grid: the density of `alpha + i ddbar u*`
/// for a band-limited `u*` normalized to `sup u* = 0`.
pub fn manufactured_problem(sp: &Spectral, seed: u64, amplitude: f64) -> Result<(MAProblem, Vec<f64>), MaError> {
    let grid = sp.grid();
    let n = grid.n_complex;
    let alpha = if n == 2 {
        reference_alpha()
    } else {
        HMatrix::from_element(1, 1, C64::new(1.3, 0.0))
    };
    let mut rng = trial_rng(seed, 0);
    let modes = random_modes(2 * n, 5, 2, amplitude, &mut rng);
    let mut u = eval_modes(&modes, grid);
    let top = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    u.iter_mut().for_each(|x| *x -= top);
    let a = PointForm::from_hmatrix(&alpha)?;
    let m = sp.hessian(&u).shifted(&a);
    let fact = if n == 2 { 2.0 } else { 1.0 };
    let rho: Vec<f64> = (0..grid.len()).map(|i| fact * m.at(i).det()).collect();
    Ok((MAProblem::from_density(a, rho)?, u))
}

fn fail_report(id: &str, statement: &str, err: &MaError) -> MarginReport {
    let mut r =
        MarginReport::new(id, format!("{statement} (failed: {err})")).tolerance(f64::MIN_POSITIVE, "solver failure");
    r.worst_margin = f64::NAN;
    r.trials = 1;
    r
}

/// Complex dimension 1: the solve against the spectral linear solve.
pub fn ma_linear_report(size: usize, seed: u64) -> MarginReport {
    let id = format!("ma.dim1.linear.{size}");
    let statement = "dimension-one solution equals the spectral Poisson solve";
    let start = Instant::now();
    let run = || -> Result<MarginReport, MaError> {
        let grid = TorusGrid::cubic(1, size)?;
        let sp = Spectral::new(&grid);
        let a = HMatrix::from_element(1, 1, C64::new(1.3, 0.0));
        let mut rng = trial_rng(seed, 0);
        let beta = FieldForm::Scaled {
            base: a.clone(),
            modes: random_modes(2, 6, 5, 0.4, &mut rng),
        }
        .realize(&sp)?;
        let problem = assemble_rhs(&a, &beta, &HMatrix::identity(1, 1))?;
        let sol = solve_ma(&problem, &sp, &SolveOptions::default(), None)?;
        let reference = poisson_reference(&problem, &sp)?;
        let diff: Vec<f64> = sol.u.iter().zip(&reference).map(|(x, y)| x - y).collect();
        let err = sup_norm(&diff);
        let mut r = MarginReport::new(&id, statement)
            .tolerance(1e-10, "sup norm")
            .stat("mass_defect", sol.mass_defect)
            .stat("newton_iterations", sol.newton_iterations as f64)
            .timed(start);
        r.trials = 1;
        r.worst_margin = -err;
        Ok(r)
    };
    run().unwrap_or_else(|e| fail_report(&id, statement, &e))
}

/// Complex dimension 2: recovery of a manufactured potential, residual,
/// mass balance and the second-order linearization remainder.
pub fn ma_manufactured_reports(size: usize, seed: u64) -> Vec<MarginReport> {
    let base = format!("ma.dim2.manufactured.{size}");
    let start = Instant::now();
    let run = || -> Result<Vec<MarginReport>, MaError> {
        let grid = TorusGrid::cubic(2, size)?;
        let sp = Spectral::new(&grid);
        let (problem, u_star) = manufactured_problem(&sp, seed, 0.006)?;
        let sol = solve_ma(&problem, &sp, &SolveOptions::default(), None)?;
        let elapsed = start.elapsed().as_secs_f64();
        let diff: Vec<f64> = sol.u.iter().zip(&u_star).map(|(x, y)| x - y).collect();
        let single = |id: &str, statement: &str, margin: f64, tol: f64, source: &str| {
            let mut r = MarginReport::new(format!("{base}.{id}"), statement).tolerance(tol, source);
            r.trials = 1;
            r.worst_margin = margin;
            r.elapsed = elapsed;
            r
        };
        let mut rng = trial_rng(seed, 1);
        let v = eval_modes(&random_modes(4, 4, 2, 0.004, &mut rng), &grid);
        let rem = linearization_remainders(&problem, &sp, &u_star, &v, &[0.4, 0.2, 0.1])?;
        let order = observed_order(&rem);
        Ok(vec![
            single(
                "recovery",
                "solver recovers the manufactured potential",
                -sup_norm(&diff),
                1e-7,
                "sup norm",
            )
            .stat("newton_iterations", sol.newton_iterations as f64)
            .stat("linear_iterations", sol.linear_iterations as f64),
            single(
                "residual",
                "sup |det(a + i ddbar u) - c rho| after convergence",
                -sol.target_residual,
                1e-8,
                "sup norm",
            ),
            single(
                "mass",
                "int det(a + i ddbar u) = int c rho",
                -sol.mass_defect,
                1e-10,
                "relative",
            ),
            single(
                "linearization_order",
                "linearization remainder decays with order at least 1.9",
                order - 1.9,
                1e-12,
                "observed order against 1.9",
            ),
        ])
    };
    run().unwrap_or_else(|e| vec![fail_report(&base, "manufactured solve", &e)])
}

/// Solved instances of the integrated trace-product inequality.
pub fn prod_traces_report(instances: u64, size: usize, seed: u64) -> MarginReport {
    let id = format!("ma.prod_traces.{size}");
    let statement = "int tr_a(g) int tr_a(b) >= (1/n) int tr_a(a) int tr_a(b g) for solved a";
    let start = Instant::now();
    let run = || -> Result<MarginReport, MaError> {
        let grid = TorusGrid::cubic(2, size)?;
        let sp = Spectral::new(&grid);
        let eval = |i: u64| -> (f64, Vec<f64>) {
            let mut rng = trial_rng(seed, i);
            let alpha = hermitian_pd(2, &mut rng);
            let gamma = hermitian_pd(2, &mut rng);
            let modes = random_modes(4, 4, 2, 0.3, &mut rng);
            let m = (|| {
                let beta = FieldForm::Scaled {
                    base: hermitian_pd(2, &mut rng),
                    modes,
                }
                .realize(&sp)?;
                let problem = assemble_rhs(&alpha, &beta, &gamma)?;
                let sol = solve_ma(&problem, &sp, &SolveOptions::default(), None)?;
                Ok::<_, MaError>(verify_prod_traces(&problem, &sol, &beta, &gamma, &sp, 1e-8)?.margin)
            })();
            (m.unwrap_or(f64::NAN), vec![i as f64])
        };
        let worst = crate::scan::indexed_scan(instances, eval);
        Ok(MarginReport::new(&id, statement)
            .with_worst(worst)
            .tolerance(1e-6, "quadrature")
            .timed(start))
    };
    run().unwrap_or_else(|e| fail_report(&id, statement, &e))
}

/// Closed non-constant datum of the shipped fixed-point instance.
pub fn fixed_point_beta(sp: &Spectral, seed: u64) -> Result<FormField, MaError> {
    let mut rng = trial_rng(seed, 0);
    FieldForm::Closed {
        base: herm2(1.0, 1.1, C64::new(0.2, 0.1)),
        modes: random_modes(4, 4, 2, 0.006, &mut rng),
    }
    .realize(sp)
}

/// The damped fixed-point iteration for each `epsilon`, with `p = n`
/// (scalar weight) and `p = 1` (constant form weight).
pub fn fixed_point_reports(size: usize, epsilons: &[f64], iters: usize, seed: u64) -> Vec<MarginReport> {
    let base = format!("ma.fixed_point.{size}");
    let run = || -> Result<Vec<MarginReport>, MaError> {
        let grid = TorusGrid::cubic(2, size)?;
        let sp = Spectral::new(&grid);
        let alpha = reference_alpha();
        let beta = fixed_point_beta(&sp, seed)?;
        let mut out = Vec::new();
        for (p, weight) in [
            (2, WeightForm::Scalar(1.0)),
            (1, WeightForm::Form(herm2(0.5, 0.8, C64::new(0.1, 0.0)))),
        ] {
            let (mut pointwise, mut power) = (Worst::empty(), Worst::empty());
            let mut convergence = Worst::empty();
            let mut slowest: f64 = 0.0;
            let start = Instant::now();
            for (i, &epsilon) in epsilons.iter().enumerate() {
                let input = FixedPointInput {
                    alpha: &alpha,
                    beta: &beta,
                    omega_ref: &alpha,
                    weight: &weight,
                    p,
                    epsilon,
                    iters,
                    tol: 1e-7,
                };
                let trace = approx_fixed_point(&input, &sp, &SolveOptions::default())?;
                let one = |m: f64| Worst {
                    margin: m,
                    input: vec![epsilon],
                    index: i as u64,
                    trials: 1,
                };
                pointwise = pointwise.merge(one(trace.pointwise_margin));
                power = power.merge(one(trace.power_diff.margin));
                let last = trace.differences.last().copied().unwrap_or(0.0);
                // For p = 1 the iteration is a single solve; its only
                // difference is measured against the zero start.
                let gap = if p > 1 { last } else { 0.0 };
                convergence = convergence.merge(one(if trace.converged { -gap } else { f64::NAN }));
                slowest = slowest.max(trace.differences.len() as f64);
            }
            let tag = format!("{base}.p{p}");
            out.push(
                MarginReport::new(
                    format!("{tag}.pointwise"),
                    "pointwise power-difference bound at the approximate fixed point",
                )
                .with_worst(pointwise)
                .tolerance(1e-6, "quadrature")
                .timed(start),
            );
            out.push(
                MarginReport::new(
                    format!("{tag}.integral"),
                    "integrated power-difference bound at the approximate fixed point",
                )
                .with_worst(power)
                .tolerance(1e-6, "quadrature")
                .timed(start),
            );
            out.push(
                MarginReport::new(
                    format!("{tag}.convergence"),
                    "sup-norm iterate difference falls below 1e-6",
                )
                .with_worst(convergence)
                .tolerance(1e-6, "sup norm")
                .status(Status::Recorded)
                .stat("max_iterations", slowest)
                .timed(start),
            );
        }
        Ok(out)
    };
    run().unwrap_or_else(|e| vec![fail_report(&base, "fixed-point iteration", &e)])
}
