use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::point::FormField;
use super::MaError;
use crate::forms::C64;

/// Default cap on the number of grid points.
pub const DEFAULT_POINT_BUDGET: usize = 1 << 20;

/// Uniform periodic grid on the unit torus `C^n / (Z + iZ)^n`, `n` in {1, 2}.
///
/// Real axes are ordered `x1, y1, x2, y2` with `z_j = x_j + i y_j`; fields are
/// stored row-major with the last axis varying fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusGrid {
    pub n_complex: usize,
    pub sizes: Vec<usize>,
}

impl TorusGrid {
    pub fn new(n_complex: usize, sizes: Vec<usize>) -> Result<Self, MaError> {
        Self::with_budget(n_complex, sizes, DEFAULT_POINT_BUDGET)
    }

    pub fn with_budget(n_complex: usize, sizes: Vec<usize>, budget: usize) -> Result<Self, MaError> {
        if !(1..=2).contains(&n_complex) {
            return Err(MaError::InvalidGrid(format!(
                "complex dimension {n_complex} not in 1..=2"
            )));
        }
        if sizes.len() != 2 * n_complex {
            return Err(MaError::InvalidGrid(format!(
                "expected {} axis sizes, got {}",
                2 * n_complex,
                sizes.len()
            )));
        }
        if let Some(&s) = sizes.iter().find(|&&s| s < 8 || s % 2 != 0) {
            return Err(MaError::InvalidGrid(format!(
                "axis size {s} must be even and at least 8"
            )));
        }
        let total: usize = sizes.iter().product();
        if total > budget {
            return Err(MaError::InvalidGrid(format!(
                "{total} points exceed the budget of {budget}"
            )));
        }
        Ok(TorusGrid { n_complex, sizes })
    }

    /// Same size `m` on every real axis.
    pub fn cubic(n_complex: usize, m: usize) -> Result<Self, MaError> {
        Self::new(n_complex, vec![m; 2 * n_complex])
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates in `[0,1)` of point `index`.
    pub fn coords(&self, mut index: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.sizes.len()];
        for (a, &s) in self.sizes.iter().enumerate().rev() {
            x[a] = (index % s) as f64 / s as f64;
            index /= s;
        }
        x
    }

    /// Evaluate `f` at every grid point.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.coords(i))).collect()
    }
}

/// Signed wavenumber of FFT bin `i` on an axis of `n` points, and whether it
/// is the Nyquist bin.
fn wavenumber(i: usize, n: usize) -> (f64, bool) {
    if i < n / 2 {
        (i as f64, false)
    } else if i == n / 2 {
        (i as f64, true)
    } else {
        (i as f64 - n as f64, false)
    }
}

/// Spectral differentiation on a [`TorusGrid`].
pub struct Spectral {
    grid: TorusGrid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    /// Symbols of `u_{1 1bar}`, `u_{2 2bar}` (real) and `u_{1 2bar}`.
    s11: Vec<f64>,
    s22: Vec<f64>,
    s12: Vec<C64>,
}

impl Spectral {
    pub fn new(grid: &TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = grid.sizes.iter().map(|&s| planner.plan_fft_forward(s)).collect();
        let inverse = grid.sizes.iter().map(|&s| planner.plan_fft_inverse(s)).collect();
        let n = grid.len();
        let (mut s11, mut s22, mut s12) = (vec![0.0; n], vec![0.0; n], vec![C64::new(0.0, 0.0); n]);
        let two_pi = 2.0 * PI;
        for idx in 0..n {
            let mut rest = idx;
            let mut bins = vec![0usize; grid.sizes.len()];
            for (a, &s) in grid.sizes.iter().enumerate().rev() {
                bins[a] = rest % s;
                rest /= s;
            }
            // Second derivative along an axis keeps the Nyquist bin; first
            // derivatives (and so mixed ones) drop it.
            let second = |a: usize| {
                let (k, _) = wavenumber(bins[a], grid.sizes[a]);
                -(two_pi * k).powi(2)
            };
            let first = |a: usize| {
                let (k, nyq) = wavenumber(bins[a], grid.sizes[a]);
                if nyq {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(0.0, two_pi * k)
                }
            };
            s11[idx] = 0.25 * (second(0) + second(1));
            if grid.n_complex == 2 {
                s22[idx] = 0.25 * (second(2) + second(3));
                let i = C64::new(0.0, 1.0);
                s12[idx] = 0.25 * (first(0) - i * first(1)) * (first(2) + i * first(3));
            }
        }
        Spectral {
            grid: grid.clone(),
            forward,
            inverse,
            s11,
            s22,
            s12,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        let sizes = &self.grid.sizes;
        let total = data.len();
        let mut buf = Vec::new();
        for (a, &len) in sizes.iter().enumerate() {
            let stride: usize = sizes[a + 1..].iter().product();
            let plan = if inverse { &self.inverse[a] } else { &self.forward[a] };
            buf.resize(len, C64::new(0.0, 0.0));
            let block = stride * len;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, b) in buf.iter_mut().enumerate() {
                        *b = data[base + j * stride];
                    }
                    plan.process(&mut buf);
                    for (j, b) in buf.iter().enumerate() {
                        data[base + j * stride] = *b;
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / total as f64;
            data.iter_mut().for_each(|z| *z *= scale);
        }
    }

    pub fn forward(&self, u: &[f64]) -> Vec<C64> {
        let mut data: Vec<C64> = u.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    pub fn inverse(&self, mut spec: Vec<C64>) -> Vec<C64> {
        self.transform(&mut spec, true);
        spec
    }

    /// Complex Hessian `u_{j kbar}` of a real field.
    pub fn hessian(&self, u: &[f64]) -> FormField {
        let uh = self.forward(u);
        self.hessian_from_spectrum(&uh)
    }

    pub fn hessian_from_spectrum(&self, uh: &[C64]) -> FormField {
        if self.grid.n_complex == 1 {
            let d = self.inverse(uh.iter().zip(&self.s11).map(|(z, s)| z * s).collect());
            return FormField {
                n: 1,
                a11: d.iter().map(|z| z.re).collect(),
                ..Default::default()
            };
        }
        // h11 and h22 are real, so one inverse transform carries both.
        let i = C64::new(0.0, 1.0);
        let packed: Vec<C64> = uh
            .iter()
            .zip(self.s11.iter().zip(&self.s22))
            .map(|(z, (a, b))| z * a + i * z * b)
            .collect();
        let diag = self.inverse(packed);
        let off = self.inverse(uh.iter().zip(&self.s12).map(|(z, s)| z * s).collect());
        FormField {
            n: 2,
            a11: diag.iter().map(|z| z.re).collect(),
            a22: diag.iter().map(|z| z.im).collect(),
            a12: off,
        }
    }

    /// Symbol of `v -> g11 v_{1 1bar} + g22 v_{2 2bar} + 2 Re(g21 v_{1 2bar})`
    /// for constant coefficients.
    pub fn operator_symbol(&self, g11: f64, g22: f64, g21: C64) -> Vec<f64> {
        (0..self.grid.len())
            .map(|k| {
                let mut s = g11 * self.s11[k];
                if self.grid.n_complex == 2 {
                    s += g22 * self.s22[k] + 2.0 * (g21 * self.s12[k]).re;
                }
                s
            })
            .collect()
    }

    /// Solve `L0 v = r` for the constant-coefficient operator with symbol
    /// `symbol`, returning the mean-zero solution (the mean of `r` is ignored).
    pub fn solve_symbol(&self, symbol: &[f64], r: &[f64]) -> Vec<f64> {
        let mut rh = self.forward(r);
        rh[0] = C64::new(0.0, 0.0);
        for (z, &s) in rh.iter_mut().zip(symbol).skip(1) {
            *z /= s;
        }
        self.inverse(rh).iter().map(|z| z.re).collect()
    }
}
