//! Complex Monge-Ampere equation on flat tori of complex dimension 1 or 2.
//!
//! Potentials live on a uniform periodic grid and are differentiated
//! spectrally. [`solve_ma`] runs damped Newton on the log-determinant
//! residual; [`approx_fixed_point`] iterates solves whose right-hand side
//! depends on a damped blend of the previous iterate.

mod checks;
mod export;
mod field;
mod gmres;
mod grid;
mod point;
mod solver;

use thiserror::Error;

use crate::forms::FormError;

pub use checks::{
    approx_fixed_point, power_diff_integral_check, verify_prod_traces, FixedPointInput, FixedPointTrace,
    PowerDiffCheck, ProdTraces, WeightForm,
};
pub use export::{export_field, read_field};
pub use field::{eval_modes, random_modes, FieldForm, Mode};
pub use gmres::{gmres, GmresOptions, GmresResult};
pub use grid::{Spectral, TorusGrid, DEFAULT_POINT_BUDGET};
pub use point::{integrate, sup_norm, wedge_density, FormField, PointForm};
pub use solver::{
    assemble_rhs, linearization_remainders, newton_order, observed_order, poisson_reference, residual, solve_ma,
    MAProblem, Solution, SolveOptions,
};

#[derive(Debug, Error)]
pub enum MaError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("right-hand side density {value:e} is not positive at grid point {index}")]
    NonPositiveDensity { index: usize, value: f64 },
    #[error("alpha + i ddbar u is not positive definite at grid point {0}")]
    NotAdmissible(usize),
    #[error("Newton line search exhausted after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },
    #[error("no convergence within {iterations} Newton iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("potential is not solved (residual {0:e})")]
    Unsolved(f64),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
