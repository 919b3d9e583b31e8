//! Band-limited (1,1)-form fields built from a constant part and a few Fourier modes.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::{Spectral, TorusGrid};
use super::point::{FormField, PointForm};
use super::MaError;
use crate::forms::HMatrix;

/// `amplitude * cos(2 pi <wave, x> + phase)` on the unit torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub amplitude: f64,
    pub wave: Vec<i32>,
    #[serde(default)]
    pub phase: f64,
}

impl Mode {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let arg: f64 = self.wave.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
        self.amplitude * (2.0 * PI * arg + self.phase).cos()
    }

    /// The mode must be resolved strictly below the Nyquist frequency.
    pub fn check(&self, grid: &TorusGrid) -> Result<(), MaError> {
        if self.wave.len() != grid.sizes.len() {
            return Err(MaError::InvalidProblem(format!(
                "mode has {} wavenumbers, grid has {} axes",
                self.wave.len(),
                grid.sizes.len()
            )));
        }
        for (&k, &s) in self.wave.iter().zip(&grid.sizes) {
            if 2 * k.unsigned_abs() as usize >= s {
                return Err(MaError::InvalidProblem(format!(
                    "wavenumber {k} not resolved on an axis of {s} points"
                )));
            }
        }
        if !self.amplitude.is_finite() || !self.phase.is_finite() {
            return Err(MaError::InvalidProblem(
                "mode amplitude and phase must be finite".into(),
            ));
        }
        Ok(())
    }
}

pub fn eval_modes(modes: &[Mode], grid: &TorusGrid) -> Vec<f64> {
    grid.sample(|x| modes.iter().map(|m| m.eval(x)).sum())
}

/// Random modes with wavenumbers in `-max_wave..=max_wave` and total
/// amplitude `amplitude`.
pub fn random_modes<R: Rng + ?Sized>(
    axes: usize,
    count: usize,
    max_wave: i32,
    amplitude: f64,
    rng: &mut R,
) -> Vec<Mode> {
    let mut modes: Vec<Mode> = (0..count)
        .map(|_| {
            let mut wave: Vec<i32> = (0..axes).map(|_| rng.random_range(-max_wave..=max_wave)).collect();
            if wave.iter().all(|&k| k == 0) {
                wave[0] = 1;
            }
            Mode {
                amplitude: rng.random_range(0.5..1.0),
                wave,
                phase: rng.random_range(0.0..2.0 * PI),
            }
        })
        .collect();
    let total: f64 = modes.iter().map(|m| m.amplitude).sum();
    for m in &mut modes {
        m.amplitude *= amplitude / total;
    }
    modes
}

/// A (1,1)-form field description.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldForm {
    Constant(HMatrix),
    /// `base * (1 + sum of modes)`; not closed in general.
    Scaled {
        base: HMatrix,
        modes: Vec<Mode>,
    },
    /// `base + i ddbar(sum of modes)`; closed, cohomologous to `base`.
    Closed {
        base: HMatrix,
        modes: Vec<Mode>,
    },
}

impl FieldForm {
    pub fn base(&self) -> &HMatrix {
        match self {
            FieldForm::Constant(b) | FieldForm::Scaled { base: b, .. } | FieldForm::Closed { base: b, .. } => b,
        }
    }

    pub fn realize(&self, spectral: &Spectral) -> Result<FormField, MaError> {
        let grid = spectral.grid();
        let base = PointForm::from_hmatrix(self.base())?;
        if base.n != grid.n_complex {
            return Err(MaError::InvalidProblem(format!(
                "form of dimension {} on a grid of complex dimension {}",
                base.n, grid.n_complex
            )));
        }
        match self {
            FieldForm::Constant(_) => Ok(FormField::constant(&base, grid.len())),
            FieldForm::Scaled { modes, .. } => {
                modes.iter().try_for_each(|m| m.check(grid))?;
                let w = eval_modes(modes, grid);
                Ok(FormField::from_points(base.n, w.iter().map(|&t| base.scale(1.0 + t))))
            }
            FieldForm::Closed { modes, .. } => {
                modes.iter().try_for_each(|m| m.check(grid))?;
                let phi = eval_modes(modes, grid);
                Ok(spectral.hessian(&phi).shifted(&base))
            }
        }
    }
}
