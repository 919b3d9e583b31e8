//! Hermitian (1,1)-forms and constant (q,q)-forms at a point of C^n.
//!
//! A (q,q)-form is stored through its normalised coefficients
//! `Omega / q! = sum c[L,R] i dz_L ^ dzbar_R`, where `i dz_L ^ dzbar_R` is the
//! ordered product of the 2-forms `i dz_l ^ dzbar_r` over the paired entries
//! of the ascending index sets `L` and `R`. With this convention the q-th
//! power of a (1,1)-form `M` has the q x q minors of `M` as coefficients, and
//! an (n,n)-form divided by `I^n` is its single coefficient.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::sampling;

pub type C64 = Complex64;
pub type HMatrix = DMatrix<C64>;

/// Largest ambient dimension handled by the dense (q,q)-form storage.
pub const MAX_DIM: usize = 8;
/// Generalized eigenvalues closer than this to zero are reported as zero.
pub const EIGEN_CLAMP: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degree {degree} out of range for dimension {n}")]
    DegreeOutOfRange { degree: usize, n: usize },
    #[error("dimension {0} is outside 1..=8")]
    UnsupportedDimension(usize),
    #[error("entry {index} must be positive, found {value}")]
    NonPositiveEntry { index: usize, value: f64 },
    #[error("spectrum entry {index} is invalid: {value}")]
    InvalidSpectrum { index: usize, value: f64 },
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// All elementary symmetric polynomials `e_0, ..., e_n` of `x`.
pub fn elementary_symmetric_all(x: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; x.len() + 1];
    e[0] = 1.0;
    for (i, &v) in x.iter().enumerate() {
        for p in (1..=i + 1).rev() {
            e[p] += v * e[p - 1];
        }
    }
    e
}

pub fn elementary_symmetric(x: &[f64], p: usize) -> f64 {
    if p > x.len() {
        return 0.0;
    }
    elementary_symmetric_all(x)[p]
}

/// Nonnegative eigenvalues of one (1,1)-form relative to another.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self, FormError> {
        if values.is_empty() || values.len() > MAX_DIM {
            return Err(FormError::UnsupportedDimension(values.len()));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(FormError::InvalidSpectrum { index, value });
            }
        }
        Ok(Spectrum { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }
}

pub fn hermitian_defect(m: &HMatrix) -> f64 {
    let mut defect: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

fn check_hermitian(m: &HMatrix) -> Result<(), FormError> {
    if !m.is_square() {
        return Err(FormError::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL * scale {
        return Err(FormError::NotHermitian(defect));
    }
    Ok(())
}

fn symmetrize(m: &HMatrix) -> HMatrix {
    (m + m.adjoint()).scale(0.5)
}

// nalgebra takes complex square roots of the pivots, so an indefinite matrix
// still factors; the factor diagonal has to be checked by hand.
fn positive_cholesky(a: &HMatrix) -> Result<nalgebra::linalg::Cholesky<C64, nalgebra::Dyn>, FormError> {
    let chol = symmetrize(a).cholesky().ok_or(FormError::NotPositiveDefinite)?;
    let l = chol.l_dirty();
    if (0..l.nrows()).all(|i| l[(i, i)].re > 0.0 && l[(i, i)].im.abs() <= HERMITIAN_TOL * l[(i, i)].re) {
        Ok(chol)
    } else {
        Err(FormError::NotPositiveDefinite)
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &HMatrix) -> Result<Vec<f64>, FormError> {
    check_hermitian(m)?;
    let mut ev: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn min_eigenvalue(m: &HMatrix) -> Result<f64, FormError> {
    Ok(hermitian_eigenvalues(m)?[0])
}

/// A metric `a` (positive definite) together with a semipositive form `b`.
#[derive(Clone, Debug)]
pub struct HermitianPair {
    pub a: HMatrix,
    pub b: HMatrix,
}

impl HermitianPair {
    pub fn new(a: HMatrix, b: HMatrix) -> Result<Self, FormError> {
        check_hermitian(&a)?;
        check_hermitian(&b)?;
        if a.nrows() != b.nrows() {
            return Err(FormError::DimensionMismatch {
                expected: a.nrows(),
                found: b.nrows(),
            });
        }
        positive_cholesky(&a)?;
        let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let lo = min_eigenvalue(&b)?;
        if lo < -HERMITIAN_TOL * scale {
            return Err(FormError::NotPositiveSemidefinite(lo));
        }
        Ok(HermitianPair { a, b })
    }
}

/// Generalized eigenvalues of Hermitian `b` with respect to positive definite
/// `a`, ascending, with values within [`EIGEN_CLAMP`] of zero set to zero.
pub fn generalized_eigenvalues(a: &HMatrix, b: &HMatrix) -> Result<Vec<f64>, FormError> {
    check_hermitian(a)?;
    check_hermitian(b)?;
    if a.nrows() != b.nrows() {
        return Err(FormError::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let chol = positive_cholesky(a)?;
    let l = chol.l();
    let y = l.solve_lower_triangular(b).ok_or(FormError::NotPositiveDefinite)?;
    let c = l
        .solve_lower_triangular(&y.adjoint())
        .ok_or(FormError::NotPositiveDefinite)?;
    let mut ev: Vec<f64> = symmetrize(&c)
        .symmetric_eigenvalues()
        .iter()
        .map(|&v| if v.abs() < EIGEN_CLAMP { 0.0 } else { v })
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues of `B` relative to `A`: in a basis where `A = I`, `B = diag(b)`.
pub fn simultaneous_spectrum(pair: &HermitianPair) -> Result<Spectrum, FormError> {
    let ev = generalized_eigenvalues(&pair.a, &pair.b)?;
    Spectrum::new(ev.into_iter().map(|v| v.max(0.0)).collect())
}

/// `tr(A^-1 B)`, the trace of `b` with respect to the metric `a`.
pub fn trace_lambda(a: &HMatrix, b: &HMatrix) -> Result<f64, FormError> {
    check_hermitian(a)?;
    check_hermitian(b)?;
    let chol = positive_cholesky(a)?;
    Ok(chol.solve(b).trace().re)
}

/// `e_p(b) / C(n,p)`: the ratio `alpha^(n-p) ^ beta^p / alpha^n` when
/// `alpha = I` and `beta = diag(b)`.
pub fn wedge_ratio_mixed(b: &[f64], p: usize) -> Result<f64, FormError> {
    let n = b.len();
    if p > n {
        return Err(FormError::DegreeOutOfRange { degree: p, n });
    }
    Ok(elementary_symmetric(b, p) / binomial(n, p))
}

/// Mixed discriminant, the polarization of `det` with `D(A, ..., A) = det A`.
pub fn mixed_discriminant(mats: &[HMatrix]) -> Result<f64, FormError> {
    let n = mats.len();
    if n == 0 || n > MAX_DIM {
        return Err(FormError::UnsupportedDimension(n));
    }
    for m in mats {
        if m.nrows() != n || m.ncols() != n {
            return Err(FormError::DimensionMismatch {
                expected: n,
                found: m.nrows(),
            });
        }
    }
    let mut acc = Neumaier::default();
    for s in 1u32..(1 << n) {
        let mut sum = HMatrix::zeros(n, n);
        for (i, m) in mats.iter().enumerate() {
            if s & (1 << i) != 0 {
                sum += m;
            }
        }
        let sign = if (n - s.count_ones() as usize).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        acc.add(sign * sum.determinant().re);
    }
    Ok(acc.value() / factorial(n))
}

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct NeumaierC {
    re: Neumaier,
    im: Neumaier,
}

impl NeumaierC {
    fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Bitmasks of the q-subsets of `0..n`, in lexicographic order of their
/// ascending index tuples.
pub fn subsets(n: usize, q: usize) -> Vec<u32> {
    fn rec(start: usize, n: usize, left: usize, mask: u32, out: &mut Vec<u32>) {
        if left == 0 {
            out.push(mask);
            return;
        }
        for i in start..=n - left {
            rec(i + 1, n, left - 1, mask | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if q <= n {
        rec(0, n, q, 0, &mut out);
    }
    out
}

pub fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Sign of the permutation sorting the concatenation of ascending `a` and `b`.
fn shuffle_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a >> (y + 1)).count_ones();
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// A constant (q,q)-form on C^n, n <= 8, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct PQForm {
    n: usize,
    q: usize,
    index: Vec<u32>,
    rank: Vec<usize>,
    coeffs: Vec<C64>,
}

impl PQForm {
    pub fn zero(n: usize, q: usize) -> Result<Self, FormError> {
        if n == 0 || n > MAX_DIM {
            return Err(FormError::UnsupportedDimension(n));
        }
        if q > n {
            return Err(FormError::DegreeOutOfRange { degree: q, n });
        }
        let index = subsets(n, q);
        let mut rank = vec![usize::MAX; 1 << n];
        for (i, &m) in index.iter().enumerate() {
            rank[m as usize] = i;
        }
        let m = index.len();
        Ok(PQForm {
            n,
            q,
            index,
            rank,
            coeffs: vec![C64::new(0.0, 0.0); m * m],
        })
    }

    pub fn scalar(n: usize, value: f64) -> Result<Self, FormError> {
        let mut f = PQForm::zero(n, 0)?;
        f.coeffs[0] = C64::new(value, 0.0);
        Ok(f)
    }

    /// The (1,1)-form `sum m[j,k] i dz_j ^ dzbar_k`.
    pub fn from_hermitian(m: &HMatrix) -> Result<Self, FormError> {
        Self::power(m, 1)
    }

    /// `i v ^ vbar` for the (1,0)-form `v = sum v_j dz_j`.
    pub fn rank_one(v: &DVector<C64>) -> Result<Self, FormError> {
        Self::from_hermitian(&(v * v.adjoint()))
    }

    /// `M^q`, whose stored coefficients are the q x q minors of `M`.
    pub fn power(m: &HMatrix, q: usize) -> Result<Self, FormError> {
        check_hermitian(m)?;
        let n = m.nrows();
        let mut f = PQForm::zero(n, q)?;
        let sets: Vec<Vec<usize>> = f.index.iter().map(|&s| mask_indices(s)).collect();
        let dim = sets.len();
        for (i, rows) in sets.iter().enumerate() {
            for (j, cols) in sets.iter().enumerate() {
                let sub = HMatrix::from_fn(q, q, |r, c| m[(rows[r], cols[c])]);
                f.coeffs[i * dim + j] = if q == 0 { C64::new(1.0, 0.0) } else { sub.determinant() };
            }
        }
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Index sets of this degree, as bitmasks.
    pub fn index_sets(&self) -> &[u32] {
        &self.index
    }

    pub fn get(&self, l: u32, r: u32) -> C64 {
        let (i, j) = (self.rank[l as usize], self.rank[r as usize]);
        self.coeffs[i * self.index.len() + j]
    }

    pub fn set(&mut self, l: u32, r: u32, value: C64) {
        let (i, j) = (self.rank[l as usize], self.rank[r as usize]);
        let m = self.index.len();
        self.coeffs[i * m + j] = value;
    }

    /// Real part of the diagonal coefficient `c[L,L]`.
    pub fn diag(&self, l: u32) -> f64 {
        self.get(l, l).re
    }

    pub fn hermitian_defect(&self) -> f64 {
        let m = self.index.len();
        let mut d: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                d = d.max((self.coeffs[i * m + j] - self.coeffs[j * m + i].conj()).norm());
            }
        }
        d
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add(&self, other: &PQForm) -> Result<Self, FormError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        Ok(out)
    }

    fn check_same(&self, other: &PQForm) -> Result<(), FormError> {
        if self.n != other.n {
            return Err(FormError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.q != other.q {
            return Err(FormError::DegreeOutOfRange {
                degree: other.q,
                n: self.n,
            });
        }
        Ok(())
    }

    pub fn wedge(&self, other: &PQForm) -> Result<Self, FormError> {
        if self.n != other.n {
            return Err(FormError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let q = self.q + other.q;
        let mut out = PQForm::zero(self.n, q)?;
        let m_out = out.index.len();
        let (m1, m2) = (self.index.len(), other.index.len());
        let mut acc = vec![NeumaierC::default(); m_out * m_out];
        for (i1, &l1) in self.index.iter().enumerate() {
            for (j1, &r1) in self.index.iter().enumerate() {
                let c1 = self.coeffs[i1 * m1 + j1];
                if c1.norm_sqr() == 0.0 {
                    continue;
                }
                for (i2, &l2) in other.index.iter().enumerate() {
                    if l1 & l2 != 0 {
                        continue;
                    }
                    let sl = shuffle_sign(l1, l2);
                    let row = out.rank[(l1 | l2) as usize];
                    for (j2, &r2) in other.index.iter().enumerate() {
                        if r1 & r2 != 0 {
                            continue;
                        }
                        let c2 = other.coeffs[i2 * m2 + j2];
                        let sign = sl * shuffle_sign(r1, r2);
                        acc[row * m_out + out.rank[(r1 | r2) as usize]].add(c1 * c2 * sign);
                    }
                }
            }
        }
        let norm = 1.0 / binomial(q, self.q);
        for (c, a) in out.coeffs.iter_mut().zip(&acc) {
            *c = a.value() * norm;
        }
        Ok(out)
    }

    /// The coefficient of an (n,n)-form, i.e. its ratio to `I^n`.
    pub fn top_coefficient(&self) -> Result<C64, FormError> {
        if self.q != self.n {
            return Err(FormError::DegreeOutOfRange {
                degree: self.q,
                n: self.n,
            });
        }
        Ok(self.coeffs[0])
    }

    /// Coefficients as interleaved (re, im) pairs, row-major.
    pub fn to_flat(&self) -> Vec<f64> {
        self.coeffs.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn from_flat(n: usize, q: usize, flat: &[f64]) -> Result<Self, FormError> {
        let mut f = PQForm::zero(n, q)?;
        if flat.len() != 2 * f.coeffs.len() {
            return Err(FormError::DimensionMismatch {
                expected: 2 * f.coeffs.len(),
                found: flat.len(),
            });
        }
        for (c, pair) in f.coeffs.iter_mut().zip(flat.chunks(2)) {
            *c = C64::new(pair[0], pair[1]);
        }
        Ok(f)
    }

    /// `(self ^ other) / I^n` for forms of complementary degrees.
    pub fn pair(&self, other: &PQForm) -> Result<f64, FormError> {
        Ok(self.wedge(other)?.top_coefficient()?.re)
    }
}

/// Which diagonal weights are used by [`ppform_wedge_diag`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagWeights {
    /// `alpha^p ^ Omega / alpha^n` with `alpha = I`.
    Alpha,
    /// `beta^p ^ Omega / alpha^n` with `beta = diag(b)`.
    Beta,
}

/// Diagonal-coefficient formula for `(weight form)^p ^ Omega / alpha^n`, where
/// `Omega` has bidegree (n-p, n-p), `alpha = I` and `beta = diag(b)`.
pub fn ppform_wedge_diag(omega: &PQForm, b: &[f64], p: usize, weights: DiagWeights) -> Result<f64, FormError> {
    let n = omega.n();
    if b.len() != n {
        return Err(FormError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    if p > n || omega.q() != n - p {
        return Err(FormError::DegreeOutOfRange { degree: omega.q(), n });
    }
    let c = binomial(n, p);
    let mut acc = Neumaier::default();
    match weights {
        DiagWeights::Alpha => {
            for &l in omega.index_sets() {
                acc.add(omega.diag(l));
            }
            Ok(acc.value() / c)
        }
        DiagWeights::Beta => {
            for (index, &value) in b.iter().enumerate() {
                if value.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                    return Err(FormError::NonPositiveEntry { index, value });
                }
            }
            // prod(b) / b_L is the product over the complement of L.
            let full = (1u32 << n) - 1;
            for &l in omega.index_sets() {
                let comp: f64 = mask_indices(full & !l).iter().map(|&j| b[j]).product();
                acc.add(omega.diag(l) * comp);
            }
            Ok(acc.value() / c)
        }
    }
}

/// Sampled weak-positivity margin: the minimum of the diagonal coefficients
/// and of `Omega ^ i a_1 ^ abar_1 ^ ... ^ i a_m ^ abar_m / I^n` over random
/// unit frames. A nonnegative value is a sampling certificate, not a proof.
pub fn weak_positivity_margin(omega: &PQForm, samples: usize, seed: u64) -> f64 {
    let n = omega.n();
    let m = n - omega.q();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut margin = omega
        .index_sets()
        .iter()
        .map(|&l| omega.diag(l))
        .fold(f64::INFINITY, f64::min);
    for _ in 0..samples.max(1) {
        let frame = loop {
            let vs: Vec<DVector<C64>> = (0..m).map(|_| sampling::unit_vector(n, &mut rng)).collect();
            let gram = HMatrix::from_fn(m, m, |i, j| vs[i].dotc(&vs[j]));
            if m == 0 || gram.determinant().re > 1e-8 {
                break vs;
            }
        };
        let mut acc = omega.clone();
        for v in &frame {
            acc = acc
                .wedge(&PQForm::rank_one(v).expect("rank-one form of matching size"))
                .expect("degrees add up to at most n");
        }
        let value = acc.top_coefficient().expect("top degree reached").re;
        margin = margin.min(value);
    }
    margin
}

/// Exact weak-positivity margin where it reduces to an eigenvalue problem:
/// bidegrees 0, 1, n-1 and n. Returns `None` for other bidegrees.
pub fn weak_positivity_exact(omega: &PQForm) -> Option<f64> {
    let (n, q) = (omega.n(), omega.q());
    let m = omega.index_sets().len();
    if q == 0 || q == n {
        return Some(omega.coeffs[0].re);
    }
    if q == 1 {
        let mat = HMatrix::from_fn(n, n, |i, j| omega.coeffs[i * m + j]);
        return hermitian_eigenvalues(&symmetrize(&mat)).ok().map(|e| e[0]);
    }
    if q + 1 == n {
        // Omega ^ i v ^ vbar = w* D w with w = conj(v), D[j,k] = Omega ^ e_jk.
        let mut d = HMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let mut e = PQForm::zero(n, 1).ok()?;
                e.set(1 << j, 1 << k, C64::new(1.0, 0.0));
                d[(j, k)] = omega.wedge(&e).ok()?.top_coefficient().ok()?;
            }
        }
        return hermitian_eigenvalues(&symmetrize(&d)).ok().map(|e| e[0]);
    }
    None
}
