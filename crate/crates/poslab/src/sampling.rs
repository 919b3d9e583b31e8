//! Random instances shared by the verifiers and the tests.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::forms::{HMatrix, PQForm, C64};

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<C64> {
    loop {
        let v = DVector::from_fn(n, |_, _| complex_gaussian(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v.unscale(norm);
        }
    }
}

/// Random Hermitian positive definite matrix, condition number at most ~1e3.
pub fn hermitian_pd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HMatrix {
    let g = HMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let scale: f64 = (rng.random_range(-1.0..1.0f64)).exp();
    let m = (&g * g.adjoint()).unscale(n as f64) + HMatrix::identity(n, n).scale(1e-2);
    (&m + m.adjoint()) * C64::new(0.5 * scale, 0.0)
}

/// Random Hermitian positive semidefinite matrix of random rank.
pub fn hermitian_psd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HMatrix {
    let rank = rng.random_range(0..=n);
    let mut m = HMatrix::zeros(n, n);
    for _ in 0..rank {
        let v = DVector::from_fn(n, |_, _| complex_gaussian(rng));
        m += &v * v.adjoint();
    }
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HMatrix {
    let g = HMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

pub fn diagonal(values: &[f64]) -> HMatrix {
    HMatrix::from_fn(values.len(), values.len(), |i, j| {
        if i == j {
            C64::new(values[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Strictly positive values spread over several orders of magnitude.
pub fn positive_values<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-3.0..3.0f64).exp()).collect()
}

/// A weakly positive (q,q)-form: a sum of 1 to 2n products of `q` rank-one
/// (1,1)-forms built from complex Gaussian vectors.
pub fn weakly_positive_form<R: Rng + ?Sized>(n: usize, q: usize, rng: &mut R) -> PQForm {
    if q == 0 {
        return PQForm::scalar(n, rng.random_range(0.1..2.0)).expect("valid dimension");
    }
    let terms = rng.random_range(1..=2 * n);
    let mut acc = PQForm::zero(n, q).expect("valid dimension");
    for _ in 0..terms {
        let mut term = PQForm::scalar(n, 1.0).expect("valid dimension");
        for _ in 0..q {
            let v = DVector::from_fn(n, |_, _| complex_gaussian(rng));
            term = term
                .wedge(&PQForm::rank_one(&v).expect("square"))
                .expect("degree within range");
        }
        acc = acc.add(&term).expect("same degree");
    }
    acc
}
