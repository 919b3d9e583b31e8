//! Deterministic worst-case scans over indexed inputs.
//!
//! Every trial derives its own generator from `(seed, index)`, and the
//! reduction keeps the smallest margin with ties broken by index, so the
//! result does not depend on how trials are split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Worst {
    pub margin: f64,
    pub input: Vec<f64>,
    pub index: u64,
    pub trials: u64,
}

impl Worst {
    pub fn empty() -> Self {
        Worst {
            margin: f64::INFINITY,
            input: Vec::new(),
            index: 0,
            trials: 0,
        }
    }

    /// Combine two scans; `self` wins ties.
    pub fn merge(self, other: Worst) -> Worst {
        let trials = self.trials + other.trials;
        let mut w = if key(other.margin) < key(self.margin) {
            other
        } else {
            self
        };
        w.trials = trials;
        w
    }
}

fn key(m: f64) -> f64 {
    if m.is_nan() {
        f64::NEG_INFINITY
    } else {
        m
    }
}

/// Generator for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn better(a: (f64, u64), b: (f64, u64)) -> (f64, u64) {
    let (ka, kb) = (key(a.0), key(b.0));
    if kb < ka || (kb == ka && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Minimum of `eval(i).0` over `i < count`. `eval` must be deterministic; it
/// is called once more for the winning index to recover the input.
pub fn indexed_scan<F>(count: u64, eval: F) -> Worst
where
    F: Fn(u64) -> (f64, Vec<f64>) + Sync,
{
    if count == 0 {
        return Worst::empty();
    }
    #[cfg(feature = "parallel")]
    let (_, index) = {
        use rayon::prelude::*;
        (0..count)
            .into_par_iter()
            .map(|i| (eval(i).0, i))
            .reduce(|| (f64::INFINITY, u64::MAX), better)
    };
    #[cfg(not(feature = "parallel"))]
    let (_, index) = (0..count)
        .map(|i| (eval(i).0, i))
        .fold((f64::INFINITY, u64::MAX), better);
    let (margin, input) = eval(index);
    Worst {
        margin,
        input,
        index,
        trials: count,
    }
}

/// Random scan: trial `i` draws from [`trial_rng`]`(seed, i)`.
pub fn random_scan<F>(trials: u64, seed: u64, eval: F) -> Worst
where
    F: Fn(&mut ChaCha8Rng) -> (f64, Vec<f64>) + Sync,
{
    indexed_scan(trials, |i| eval(&mut trial_rng(seed, i)))
}

/// Scan over the uniform grid `{0, h, ..., 1}^n` with `h = 1/round(1/step)`.
pub fn grid_scan<F>(n: usize, step: f64, eval: F) -> Worst
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let m = (1.0 / step).round().max(1.0) as u64;
    let count = (m + 1).pow(n as u32);
    indexed_scan(count, |i| {
        let x = grid_point(n, m, i);
        (eval(&x), x)
    })
}

fn grid_point(n: usize, m: u64, mut i: u64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for v in x.iter_mut() {
        *v = (i % (m + 1)) as f64 / m as f64;
        i /= m + 1;
    }
    x
}
