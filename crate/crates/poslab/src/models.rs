//! Exact finite models of (1,1)-cohomology.
//!
//! * [`TorusModel`]: classes on a complex torus represented by constant
//!   Hermitian matrices. Intersection numbers are `n!` times mixed
//!   discriminants (the standard volume form has total mass 1), and both the
//!   nef and psef cones are the positive semidefinite matrices.
//! * [`SplitP1Model`]: `(P^1)^n` with classes `sum a_i h_i`, `h_i^2 = 0`.
//!   Intersection numbers are permanents and both cones are the nonnegative
//!   orthant. Coordinate sub-products serve as the declared subvarieties.

use std::fmt::Debug;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{
    factorial, generalized_eigenvalues, hermitian_eigenvalues, mixed_discriminant, FormError, HMatrix, C64,
};
use crate::sampling;

/// Number of halvings used by threshold bisection.
pub const BISECTION_STEPS: usize = 80;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("expected {expected} classes, got {found}")]
    ClassCount { expected: usize, found: usize },
    #[error("class has dimension {found}, model has dimension {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("reference class is not big (margin {0:.3e})")]
    NotBig(f64),
    #[error("reference class is not Kahler (margin {0:.3e})")]
    NotKahler(f64),
    #[error("class is not nef (margin {0:.3e})")]
    NotNef(f64),
    #[error("intersection number {value:.3e} at position {index} is not positive")]
    NonPositiveIntersection { index: usize, value: f64 },
    #[error("invalid degrees p = {p}, k = {k} for dimension {n}")]
    InvalidDegrees { p: usize, k: usize, n: usize },
    #[error("model declares no subvarieties")]
    NoSubvarieties,
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cone {
    Nef,
    Psef,
}

/// A declared subvariety: the coordinate factors it keeps. Its codimension is
/// `n - factors.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subvariety {
    pub id: String,
    pub factors: Vec<usize>,
}

impl Subvariety {
    pub fn dim(&self) -> usize {
        self.factors.len()
    }
}

pub trait ClassModel: Sync {
    type Class: Clone + Debug + Send + Sync;

    fn dim(&self) -> usize;
    fn name(&self) -> &'static str;

    /// Intersection number of exactly `dim()` classes.
    fn intersection(&self, classes: &[&Self::Class]) -> Result<f64, ModelError>;

    /// Signed distance to the cone boundary: nonnegative iff the class is a
    /// member (min eigenvalue, resp. min coefficient).
    fn cone_margin(&self, class: &Self::Class, cone: Cone) -> Result<f64, ModelError>;

    fn combine(&self, s: f64, a: &Self::Class, t: f64, b: &Self::Class) -> Self::Class;
    fn zero(&self) -> Self::Class;
    /// A norm with `|margin(a)| <= norm(a)`, used to bracket thresholds.
    fn norm(&self, a: &Self::Class) -> f64;

    /// Closed-form `sup{t : a - t b psef}` for big `b`.
    fn psef_threshold_exact(&self, a: &Self::Class, b: &Self::Class) -> Result<f64, ModelError>;

    fn subvarieties(&self) -> Vec<Subvariety>;
    /// `int_Y c_1 ... c_m` for `m = dim Y` classes.
    fn integral_on(&self, y: &Subvariety, classes: &[&Self::Class]) -> Result<f64, ModelError>;
    /// `inf` over Kahler `w` on `Y` of `int_Y a w^{m-1} / int_Y b w^{m-1}`.
    fn kahler_infimum_on(&self, y: &Subvariety, a: &Self::Class, b: &Self::Class) -> Result<f64, ModelError>;
    /// The ratio above for one Kahler class `w`.
    fn kahler_ratio_on(
        &self,
        y: &Subvariety,
        a: &Self::Class,
        b: &Self::Class,
        w: &Self::Class,
    ) -> Result<f64, ModelError>;

    fn random_kahler(&self, rng: &mut ChaCha8Rng) -> Self::Class;
    fn random_class(&self, rng: &mut ChaCha8Rng) -> Self::Class;
    fn flatten(&self, a: &Self::Class) -> Vec<f64>;
}

/// Classes on an n-dimensional complex torus as constant Hermitian matrices.
#[derive(Clone, Debug)]
pub struct TorusModel {
    n: usize,
}

impl TorusModel {
    pub fn new(n: usize) -> Result<Self, ModelError> {
        if n == 0 || n > crate::forms::MAX_DIM {
            return Err(ModelError::UnsupportedDimension(n));
        }
        let model = TorusModel { n };
        let id = HMatrix::identity(n, n);
        let refs: Vec<&HMatrix> = vec![&id; n];
        let top = model.intersection(&refs)?;
        debug_assert!((top - factorial(n)).abs() <= 1e-9 * factorial(n));
        Ok(model)
    }

    fn check(&self, a: &HMatrix) -> Result<(), ModelError> {
        if a.nrows() != self.n || a.ncols() != self.n {
            return Err(ModelError::Dimension {
                expected: self.n,
                found: a.nrows(),
            });
        }
        Ok(())
    }
}

impl ClassModel for TorusModel {
    type Class = HMatrix;

    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> &'static str {
        "torus"
    }

    fn intersection(&self, classes: &[&HMatrix]) -> Result<f64, ModelError> {
        if classes.len() != self.n {
            return Err(ModelError::ClassCount {
                expected: self.n,
                found: classes.len(),
            });
        }
        for c in classes {
            self.check(c)?;
        }
        let owned: Vec<HMatrix> = classes.iter().map(|c| (*c).clone()).collect();
        Ok(factorial(self.n) * mixed_discriminant(&owned)?)
    }

    fn cone_margin(&self, class: &HMatrix, _cone: Cone) -> Result<f64, ModelError> {
        self.check(class)?;
        Ok(hermitian_eigenvalues(class)?[0])
    }

    fn combine(&self, s: f64, a: &HMatrix, t: f64, b: &HMatrix) -> HMatrix {
        a * C64::new(s, 0.0) + b * C64::new(t, 0.0)
    }

    fn zero(&self) -> HMatrix {
        HMatrix::zeros(self.n, self.n)
    }

    fn norm(&self, a: &HMatrix) -> f64 {
        hermitian_eigenvalues(a)
            .map(|e| e.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .unwrap_or(f64::INFINITY)
    }

    fn psef_threshold_exact(&self, a: &HMatrix, b: &HMatrix) -> Result<f64, ModelError> {
        self.check(a)?;
        self.check(b)?;
        let margin = self.cone_margin(b, Cone::Psef)?;
        if margin <= 0.0 {
            return Err(ModelError::NotBig(margin));
        }
        // a - t b >= 0 iff t <= every eigenvalue of a relative to b.
        Ok(generalized_eigenvalues(b, a)?[0])
    }

    fn subvarieties(&self) -> Vec<Subvariety> {
        vec![Subvariety {
            id: "X".into(),
            factors: (0..self.n).collect(),
        }]
    }

    fn integral_on(&self, _y: &Subvariety, classes: &[&HMatrix]) -> Result<f64, ModelError> {
        self.intersection(classes)
    }

    fn kahler_infimum_on(&self, _y: &Subvariety, a: &HMatrix, b: &HMatrix) -> Result<f64, ModelError> {
        // tr(P a) / tr(P b) over positive P is minimised by rank-one P.
        self.psef_threshold_exact(a, b)
    }

    fn kahler_ratio_on(&self, y: &Subvariety, a: &HMatrix, b: &HMatrix, w: &HMatrix) -> Result<f64, ModelError> {
        let mut num: Vec<&HMatrix> = vec![w; self.n - 1];
        num.push(a);
        let mut den: Vec<&HMatrix> = vec![w; self.n - 1];
        den.push(b);
        Ok(self.integral_on(y, &num)? / self.integral_on(y, &den)?)
    }

    fn random_kahler(&self, rng: &mut ChaCha8Rng) -> HMatrix {
        sampling::hermitian_pd(self.n, rng)
    }

    fn random_class(&self, rng: &mut ChaCha8Rng) -> HMatrix {
        sampling::hermitian(self.n, rng)
    }

    fn flatten(&self, a: &HMatrix) -> Vec<f64> {
        a.iter().flat_map(|c| [c.re, c.im]).collect()
    }
}

/// `(P^1)^n` with classes given by coefficient vectors.
#[derive(Clone, Debug)]
pub struct SplitP1Model {
    n: usize,
}

impl SplitP1Model {
    pub fn new(n: usize) -> Result<Self, ModelError> {
        if n == 0 || n > 16 {
            return Err(ModelError::UnsupportedDimension(n));
        }
        Ok(SplitP1Model { n })
    }

    fn check(&self, a: &[f64]) -> Result<(), ModelError> {
        if a.len() != self.n {
            return Err(ModelError::Dimension {
                expected: self.n,
                found: a.len(),
            });
        }
        Ok(())
    }
}

/// Permanent of the square matrix with rows `rows[i]` restricted to `cols`,
/// by dynamic programming over column subsets (no cancellation for
/// nonnegative entries).
pub fn permanent(rows: &[&[f64]], cols: &[usize]) -> f64 {
    let m = cols.len();
    debug_assert_eq!(rows.len(), m);
    let mut dp = vec![0.0; 1 << m];
    dp[0] = 1.0;
    for mask in 0usize..(1 << m) {
        let r = mask.count_ones() as usize;
        if r == m || dp[mask] == 0.0 {
            continue;
        }
        for (j, &c) in cols.iter().enumerate() {
            if mask & (1 << j) == 0 {
                dp[mask | (1 << j)] += dp[mask] * rows[r][c];
            }
        }
    }
    dp[(1 << m) - 1]
}

impl ClassModel for SplitP1Model {
    type Class = Vec<f64>;

    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> &'static str {
        "split_p1"
    }

    fn intersection(&self, classes: &[&Vec<f64>]) -> Result<f64, ModelError> {
        if classes.len() != self.n {
            return Err(ModelError::ClassCount {
                expected: self.n,
                found: classes.len(),
            });
        }
        for c in classes {
            self.check(c)?;
        }
        let rows: Vec<&[f64]> = classes.iter().map(|c| c.as_slice()).collect();
        let cols: Vec<usize> = (0..self.n).collect();
        Ok(permanent(&rows, &cols))
    }

    fn cone_margin(&self, class: &Vec<f64>, _cone: Cone) -> Result<f64, ModelError> {
        self.check(class)?;
        Ok(class.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    fn combine(&self, s: f64, a: &Vec<f64>, t: f64, b: &Vec<f64>) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| s * x + t * y).collect()
    }

    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.n]
    }

    fn norm(&self, a: &Vec<f64>) -> f64 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn psef_threshold_exact(&self, a: &Vec<f64>, b: &Vec<f64>) -> Result<f64, ModelError> {
        self.check(a)?;
        self.check(b)?;
        let margin = self.cone_margin(b, Cone::Psef)?;
        if margin <= 0.0 {
            return Err(ModelError::NotBig(margin));
        }
        Ok(a.iter().zip(b).map(|(x, y)| x / y).fold(f64::INFINITY, f64::min))
    }

    /// Every coordinate sub-product `prod_{i in S} P^1 x {pt}` with `S`
    /// nonempty; `S = all` is the whole space.
    fn subvarieties(&self) -> Vec<Subvariety> {
        (1u32..(1 << self.n))
            .map(|s| {
                let factors: Vec<usize> = (0..self.n).filter(|i| s & (1 << i) != 0).collect();
                let id = factors
                    .iter()
                    .map(|i| (i + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                Subvariety {
                    id: format!("P1[{id}]"),
                    factors,
                }
            })
            .collect()
    }

    fn integral_on(&self, y: &Subvariety, classes: &[&Vec<f64>]) -> Result<f64, ModelError> {
        if classes.len() != y.dim() {
            return Err(ModelError::ClassCount {
                expected: y.dim(),
                found: classes.len(),
            });
        }
        for c in classes {
            self.check(c)?;
        }
        let rows: Vec<&[f64]> = classes.iter().map(|c| c.as_slice()).collect();
        Ok(permanent(&rows, &y.factors))
    }

    fn kahler_infimum_on(&self, y: &Subvariety, a: &Vec<f64>, b: &Vec<f64>) -> Result<f64, ModelError> {
        // The ratio is sum a_i c_i / sum b_i c_i with arbitrary positive
        // weights c_i (products of the other coordinates of w), so the
        // infimum is the smallest coordinate ratio on Y.
        self.check(a)?;
        self.check(b)?;
        Ok(y.factors.iter().map(|&i| a[i] / b[i]).fold(f64::INFINITY, f64::min))
    }

    fn kahler_ratio_on(&self, y: &Subvariety, a: &Vec<f64>, b: &Vec<f64>, w: &Vec<f64>) -> Result<f64, ModelError> {
        let m = y.dim();
        let mut num: Vec<&Vec<f64>> = vec![w; m - 1];
        num.push(a);
        let mut den: Vec<&Vec<f64>> = vec![w; m - 1];
        den.push(b);
        Ok(self.integral_on(y, &num)? / self.integral_on(y, &den)?)
    }

    fn random_kahler(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.n).map(|_| rng.random_range(-2.0..2.0f64).exp()).collect()
    }

    fn random_class(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.n).map(|_| rng.random_range(-3.0..3.0)).collect()
    }

    fn flatten(&self, a: &Vec<f64>) -> Vec<f64> {
        a.clone()
    }
}

/// `a^j b^(n-j)` as an intersection number.
pub fn mixed_power<M: ClassModel>(model: &M, a: &M::Class, j: usize, b: &M::Class) -> Result<f64, ModelError> {
    let n = model.dim();
    let mut cs: Vec<&M::Class> = vec![a; j];
    cs.extend(std::iter::repeat_n(b, n - j));
    model.intersection(&cs)
}

/// Threshold computed by bisection on cone membership, with the closed form
/// or the subvariety infimum it is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub bisection: f64,
    pub cross_check: f64,
}

/// `sup{t : a - t b in cone}` by bisection on the bracket
/// `[-|a|/m(b), |a|/m(b)]`, where `m(b)` is the cone margin of `b`.
pub fn bisect_threshold<M: ClassModel>(model: &M, a: &M::Class, b: &M::Class, cone: Cone) -> Result<f64, ModelError> {
    let mb = model.cone_margin(b, cone)?;
    if mb <= 0.0 {
        return Err(match cone {
            Cone::Psef => ModelError::NotBig(mb),
            Cone::Nef => ModelError::NotKahler(mb),
        });
    }
    let r = model.norm(a) / mb;
    let (mut lo, mut hi) = (-r, r);
    let member =
        |t: f64| -> Result<bool, ModelError> { Ok(model.cone_margin(&model.combine(1.0, a, -t, b), cone)? >= 0.0) };
    if member(hi)? {
        return Ok(hi);
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if member(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Psef threshold: the closed form, cross-checked by bisection.
pub fn psef_threshold<M: ClassModel>(model: &M, a: &M::Class, b: &M::Class) -> Result<Threshold, ModelError> {
    let exact = model.psef_threshold_exact(a, b)?;
    let bisection = bisect_threshold(model, a, b, Cone::Psef)?;
    Ok(Threshold {
        value: exact,
        bisection,
        cross_check: exact,
    })
}

/// Infimum over declared subvarieties and Kahler classes on them of
/// `int_Y a w^{m-1} / int_Y b w^{m-1}`.
pub fn subvariety_infimum<M: ClassModel>(model: &M, a: &M::Class, b: &M::Class) -> Result<f64, ModelError> {
    let ys = model.subvarieties();
    if ys.is_empty() {
        return Err(ModelError::NoSubvarieties);
    }
    let mut inf = f64::INFINITY;
    for y in &ys {
        inf = inf.min(model.kahler_infimum_on(y, a, b)?);
    }
    Ok(inf)
}

/// Nef threshold by bisection, cross-checked against the subvariety infimum.
pub fn nef_threshold<M: ClassModel>(model: &M, a: &M::Class, b: &M::Class) -> Result<Threshold, ModelError> {
    let bisection = bisect_threshold(model, a, b, Cone::Nef)?;
    let cross_check = subvariety_infimum(model, a, b)?;
    Ok(Threshold {
        value: bisection,
        bisection,
        cross_check,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionProfile {
    /// `c[j] = log(a^j b^(n-j))`.
    pub c: Vec<f64>,
}

pub fn c_profile<M: ClassModel>(model: &M, a: &M::Class, b: &M::Class) -> Result<IntersectionProfile, ModelError> {
    let n = model.dim();
    let mut c = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let v = mixed_power(model, a, j, b)?;
        if !(v > 0.0) {
            return Err(ModelError::NonPositiveIntersection { index: j, value: v });
        }
        c.push(v.ln());
    }
    Ok(IntersectionProfile { c })
}

/// `min_j -(c[j-1] + c[j+1] - 2 c[j])`; infinite when `n < 2`.
pub fn concavity_margin(profile: &IntersectionProfile) -> f64 {
    profile
        .c
        .windows(3)
        .map(|w| 2.0 * w[1] - w[0] - w[2])
        .fold(f64::INFINITY, f64::min)
}

/// Both sides of `(a^{n-p} b^p)(a^{p+k} b^{n-p-k}) >= (a^n)(a^k b^{n-k})`.
pub fn ht_sides<M: ClassModel>(
    model: &M,
    a: &M::Class,
    b: &M::Class,
    p: usize,
    k: usize,
) -> Result<(f64, f64), ModelError> {
    let n = model.dim();
    if p + k > n {
        return Err(ModelError::InvalidDegrees { p, k, n });
    }
    let lhs = mixed_power(model, a, n - p, b)? * mixed_power(model, a, p + k, b)?;
    let rhs = mixed_power(model, a, n, b)? * mixed_power(model, a, k, b)?;
    Ok((lhs, rhs))
}

pub fn ht_check<M: ClassModel>(model: &M, a: &M::Class, b: &M::Class, p: usize, k: usize) -> Result<f64, ModelError> {
    let (lhs, rhs) = ht_sides(model, a, b, p, k)?;
    Ok(lhs - rhs)
}

/// Lower and upper subvariety estimates of the nef threshold:
/// `inf_Y V_Y / (m a^{m-1} b [Y])` and `inf_Y V_Y / (a^{m-1} b [Y])` with
/// `V_Y = int_Y a^m`, `m = dim Y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NefVolumeBracket {
    pub lower: f64,
    pub nef_threshold: f64,
    pub upper: f64,
}

impl NefVolumeBracket {
    pub fn margin(&self) -> f64 {
        (self.nef_threshold - self.lower).min(self.upper - self.nef_threshold)
    }
}

pub fn nef_volume_bracket<M: ClassModel>(
    model: &M,
    a: &M::Class,
    b: &M::Class,
) -> Result<NefVolumeBracket, ModelError> {
    let ys = model.subvarieties();
    if ys.is_empty() {
        return Err(ModelError::NoSubvarieties);
    }
    let (mut lower, mut upper) = (f64::INFINITY, f64::INFINITY);
    for y in &ys {
        let m = y.dim();
        let vol = model.integral_on(y, &vec![a; m])?;
        let mut mixed: Vec<&M::Class> = vec![a; m - 1];
        mixed.push(b);
        let den = model.integral_on(y, &mixed)?;
        lower = lower.min(vol / (m as f64 * den));
        upper = upper.min(vol / den);
    }
    let nef = nef_threshold(model, a, b)?.value;
    Ok(NefVolumeBracket {
        lower,
        nef_threshold: nef,
        upper,
    })
}
