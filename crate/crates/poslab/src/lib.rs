//! Numerical checks for positivity of differences of Kahler classes.
//!
//! * [`forms`]: pointwise algebra of Hermitian and (q,q)-forms.
//! * [`inequalities`]: verifiers for the pointwise and combinatorial inequalities.
//! * [`models`]: exact intersection models and psef/nef thresholds.
//! * [`bounds`]: volume lower bounds for differences of classes.
//! * [`ma`]: a spectral Monge-Ampere solver on flat tori.
//! * [`config`], [`runner`], [`report`]: suite configuration and reporting.

// Negated comparisons such as `!(x > 0.0)` are used on purpose so that NaN
// inputs are rejected along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod forms;
pub mod inequalities;
pub mod ma;
pub mod models;
pub mod report;
pub mod runner;
pub mod sampling;
pub mod scan;
pub mod suites;
