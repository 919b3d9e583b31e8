//! Browser bindings for three poslab computations. Every entry point takes
//! plain numbers or slices and returns a JSON string, so the page needs no
//! generated TypeScript glue beyond `JSON.parse`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use poslab::bounds::{bound_report, f_eval, g_eval, nef_threshold_bound, p_vol_bound, suboptimal_bound, ScalarData};
use poslab::ma::{solve_ma, SolveOptions, Spectral, TorusGrid};
use poslab::models::{c_profile, concavity_margin, SplitP1Model};
use poslab::suites::manufactured_problem;

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn error(msg: impl ToString) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

/// Samples g on `[1, R/n]` and f on `[0, 1]` for `V = 1`, `m = 1/R`, with the
/// scalar bounds they interpolate between.
#[wasm_bindgen]
pub fn bound_curves(n: usize, ratio: f64, s0: f64, t0: f64, samples: usize) -> String {
    let data = ScalarData {
        n,
        volume: 1.0,
        mixed: 1.0 / ratio,
        s0,
        t0,
    };
    let k = samples.clamp(2, 2000);
    let hi = ratio / n as f64;
    let mut g = Vec::with_capacity(k);
    for i in 0..k {
        let t = if i + 1 == k {
            hi
        } else {
            1.0 + (hi - 1.0) * i as f64 / (k - 1) as f64
        };
        match g_eval(&data, t) {
            Ok(v) => g.push([t, v]),
            Err(e) => return error(e),
        }
    }
    let mut f = Vec::with_capacity(k);
    for i in 0..k {
        let s = i as f64 / (k - 1) as f64;
        match f_eval(&data, s) {
            Ok(v) => f.push([s, v]),
            Err(e) => return error(e),
        }
    }
    json!({
        "g": g,
        "f": f,
        "f_decreasing_from": finite((ratio - t0) / (n as f64 - 1.0)),
        "conjecture_rhs": 1.0 - n as f64 / ratio,
        "suboptimal": suboptimal_bound(n, 1.0, 1.0 / ratio).map(finite).unwrap_or(Value::Null),
        "p_vol": p_vol_bound(n, 1.0, t0).map(finite).unwrap_or(Value::Null),
        "nef_threshold_bound": finite(nef_threshold_bound(&data)),
    })
    .to_string()
}

/// Thresholds, volume bounds and the log intersection profile of a pair of
/// classes on `(P^1)^n`, given by their coefficient vectors.
#[wasm_bindgen]
pub fn split_pair(alpha: &[f64], beta: &[f64]) -> String {
    if alpha.is_empty() || alpha.len() != beta.len() || alpha.len() > 8 {
        return error("alpha and beta need the same length, between 1 and 8");
    }
    let model = match SplitP1Model::new(alpha.len()) {
        Ok(m) => m,
        Err(e) => return error(e),
    };
    let (a, b) = (alpha.to_vec(), beta.to_vec());
    let report = match bound_report(&model, &a, &b) {
        Ok(r) => r,
        Err(e) => return error(e),
    };
    let profile = c_profile(&model, &a, &b).ok();
    let mut out = serde_json::to_value(&report).expect("report serializes");
    out["profile"] = json!(profile.as_ref().map(|p| p.c.clone()));
    out["concavity_margin"] = profile
        .as_ref()
        .map(|p| finite(concavity_margin(p)))
        .unwrap_or(Value::Null);
    out.to_string()
}

/// Solves a manufactured complex-dimension-one Monge-Ampere problem on a
/// `size x size` grid and returns the computed and exact potentials.
#[wasm_bindgen]
pub fn ma_dim1(size: usize, amplitude: f64, seed: u64) -> String {
    let run = || -> Result<Value, poslab::ma::MaError> {
        let grid = TorusGrid::cubic(1, size)?;
        let sp = Spectral::new(&grid);
        let (problem, exact) = manufactured_problem(&sp, seed, amplitude)?;
        let sol = solve_ma(&problem, &sp, &SolveOptions::default(), None)?;
        let err = sol.u.iter().zip(&exact).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        Ok(json!({
            "size": size,
            "u": sol.u,
            "exact": exact,
            "sup_error": err,
            "residual": sol.target_residual,
            "newton_iterations": sol.newton_iterations,
            "mass_defect": sol.mass_defect,
        }))
    };
    match run() {
        Ok(v) => v.to_string(),
        Err(e) => error(e),
    }
}
