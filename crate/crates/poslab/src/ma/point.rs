//! Pointwise Hermitian (1,1)-forms in complex dimension 1 or 2, and fields of them.

use crate::forms::Neumaier;
use crate::forms::{HMatrix, C64};

use super::MaError;

/// Hermitian `n x n` matrix with `n <= 2`. For `n = 1` only `a11` is used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointForm {
    pub n: usize,
    pub a11: f64,
    pub a22: f64,
    pub a12: C64,
}

impl PointForm {
    pub fn identity(n: usize) -> Self {
        PointForm {
            n,
            a11: 1.0,
            a22: if n == 2 { 1.0 } else { 0.0 },
            a12: C64::new(0.0, 0.0),
        }
    }

    pub fn from_hmatrix(m: &HMatrix) -> Result<Self, MaError> {
        let n = m.nrows();
        if !(1..=2).contains(&n) || m.ncols() != n {
            return Err(MaError::InvalidProblem(format!(
                "expected a 1x1 or 2x2 matrix, got {}x{}",
                n,
                m.ncols()
            )));
        }
        if crate::forms::hermitian_defect(m) > 1e-12 {
            return Err(MaError::InvalidProblem("matrix is not Hermitian".into()));
        }
        Ok(if n == 1 {
            PointForm {
                n,
                a11: m[(0, 0)].re,
                a22: 0.0,
                a12: C64::new(0.0, 0.0),
            }
        } else {
            PointForm {
                n,
                a11: m[(0, 0)].re,
                a22: m[(1, 1)].re,
                a12: m[(0, 1)],
            }
        })
    }

    pub fn to_hmatrix(&self) -> HMatrix {
        if self.n == 1 {
            HMatrix::from_element(1, 1, C64::new(self.a11, 0.0))
        } else {
            HMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(self.a11, 0.0),
                    self.a12,
                    self.a12.conj(),
                    C64::new(self.a22, 0.0),
                ],
            )
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        PointForm {
            n: self.n,
            a11: self.a11 + o.a11,
            a22: self.a22 + o.a22,
            a12: self.a12 + o.a12,
        }
    }

    pub fn scale(&self, t: f64) -> Self {
        PointForm {
            n: self.n,
            a11: t * self.a11,
            a22: t * self.a22,
            a12: self.a12 * t,
        }
    }

    pub fn det(&self) -> f64 {
        if self.n == 1 {
            self.a11
        } else {
            self.a11 * self.a22 - self.a12.norm_sqr()
        }
    }

    pub fn trace(&self) -> f64 {
        self.a11 + if self.n == 2 { self.a22 } else { 0.0 }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.n == 1 {
            return self.a11;
        }
        let d = (self.a11 - self.a22).hypot(2.0 * self.a12.norm());
        0.5 * (self.a11 + self.a22 - d)
    }

    /// Entries `(g11, g22, g21)` of the inverse.
    pub fn inverse_entries(&self) -> (f64, f64, C64) {
        if self.n == 1 {
            return (1.0 / self.a11, 0.0, C64::new(0.0, 0.0));
        }
        let d = self.det();
        (self.a22 / d, self.a11 / d, -self.a12.conj() / d)
    }

    /// `tr(A^{-1} B)`.
    pub fn trace_inverse_times(&self, b: &Self) -> f64 {
        let (g11, g22, g21) = self.inverse_entries();
        g11 * b.a11 + g22 * b.a22 + 2.0 * (g21 * b.a12).re
    }
}

/// Density of `A_1 ∧ ... ∧ A_n` against the volume form of unit mass on the
/// unit torus, so that a constant `A^n` has density `n! det A`.
pub fn wedge_density(forms: &[PointForm]) -> f64 {
    match forms {
        [a] => a.a11,
        [a, b] => a.add(b).det() - a.det() - b.det(),
        _ => f64::NAN,
    }
}

/// Field of [`PointForm`]s on a grid, stored by component.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FormField {
    pub n: usize,
    pub a11: Vec<f64>,
    pub a22: Vec<f64>,
    pub a12: Vec<C64>,
}

impl FormField {
    pub fn constant(p: &PointForm, len: usize) -> Self {
        FormField {
            n: p.n,
            a11: vec![p.a11; len],
            a22: if p.n == 2 { vec![p.a22; len] } else { Vec::new() },
            a12: if p.n == 2 { vec![p.a12; len] } else { Vec::new() },
        }
    }

    pub fn len(&self) -> usize {
        self.a11.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a11.is_empty()
    }

    pub fn at(&self, i: usize) -> PointForm {
        if self.n == 1 {
            PointForm {
                n: 1,
                a11: self.a11[i],
                a22: 0.0,
                a12: C64::new(0.0, 0.0),
            }
        } else {
            PointForm {
                n: 2,
                a11: self.a11[i],
                a22: self.a22[i],
                a12: self.a12[i],
            }
        }
    }

    pub fn from_points(n: usize, points: impl IntoIterator<Item = PointForm>) -> Self {
        let mut f = FormField {
            n,
            ..Default::default()
        };
        for p in points {
            f.a11.push(p.a11);
            if n == 2 {
                f.a22.push(p.a22);
                f.a12.push(p.a12);
            }
        }
        f
    }

    /// `base + self` pointwise.
    pub fn shifted(&self, base: &PointForm) -> Self {
        Self::from_points(self.n, (0..self.len()).map(|i| base.add(&self.at(i))))
    }

    pub fn map(&self, f: impl Fn(PointForm) -> PointForm) -> Self {
        Self::from_points(self.n, (0..self.len()).map(|i| f(self.at(i))))
    }

    pub fn min_eigenvalue(&self) -> (f64, usize) {
        (0..self.len())
            .map(|i| (self.at(i).min_eigenvalue(), i))
            .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc })
    }
}

/// Mean of a field, i.e. its integral over the unit torus.
pub fn integrate(values: &[f64]) -> f64 {
    let mut acc = Neumaier::default();
    for &v in values {
        acc.add(v);
    }
    acc.value() / values.len() as f64
}

pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_density_of_powers_is_factorial_det() {
        let a = PointForm {
            n: 2,
            a11: 2.0,
            a22: 3.0,
            a12: C64::new(0.5, -1.0),
        };
        assert!((wedge_density(&[a, a]) - 2.0 * a.det()).abs() < 1e-14);
        let id = PointForm::identity(2);
        // tr(A) = A ∧ I density
        assert!((wedge_density(&[a, id]) - a.trace()).abs() < 1e-14);
    }

    #[test]
    fn trace_inverse_matches_dense() {
        let a = PointForm {
            n: 2,
            a11: 2.0,
            a22: 3.0,
            a12: C64::new(0.5, -1.0),
        };
        let b = PointForm {
            n: 2,
            a11: -1.0,
            a22: 0.7,
            a12: C64::new(0.2, 0.3),
        };
        let dense = a.to_hmatrix().try_inverse().unwrap() * b.to_hmatrix();
        assert!((a.trace_inverse_times(&b) - dense.trace().re).abs() < 1e-13);
        let eig = crate::forms::min_eigenvalue(&a.to_hmatrix()).unwrap();
        assert!((a.min_eigenvalue() - eig).abs() < 1e-12);
    }
}
