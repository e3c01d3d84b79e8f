//! Truncated coefficient sequences.

use crate::error::{LpaError, Result};
use crate::space::{pow_s_raw, DiskPoint, SpaceParameters};
use crate::sum::{sum, sum_complex, ComplexNeumaier};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Coefficients `a_0, ..., a_m` of a polynomial or a truncated power series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct CoefficientSequence(Vec<Complex64>);

impl CoefficientSequence {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if let Some((k, c)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(LpaError::invalid(format!("coefficient {k} is not finite ({c})")));
        }
        Ok(CoefficientSequence(coeffs))
    }

    pub(crate) fn from_vec(coeffs: Vec<Complex64>) -> Self {
        CoefficientSequence(coeffs)
    }

    pub fn zeros(degree: usize) -> Self {
        CoefficientSequence(vec![Complex64::new(0.0, 0.0); degree + 1])
    }

    pub fn monomial(k: usize) -> Self {
        let mut s = Self::zeros(k);
        s.0[k] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Truncation degree (`len - 1`).
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn lp_norm(&self, e: f64) -> f64 {
        lp_norm(&self.0, e)
    }

    /// Entrywise signed power.
    pub fn pow_s(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(LpaError::invalid(format!("exponent s must be positive, got {s}")));
        }
        Ok(CoefficientSequence(self.0.iter().map(|&a| pow_s_raw(a, s)).collect()))
    }

    /// Horner evaluation of the truncated series.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.0, z)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        CoefficientSequence(self.0.iter().map(|&a| a * c).collect())
    }

    /// Coefficientwise sum, zero-padded to the longer length.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        let get = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or_default();
        CoefficientSequence((0..n).map(|k| get(&self.0, k) + get(&other.0, k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Cauchy product, kept to full degree `deg f + deg g`.
    pub fn product(&self, other: &Self) -> Self {
        if self.is_empty() || other.is_empty() {
            return CoefficientSequence(Vec::new());
        }
        let n = self.len() + other.len() - 1;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let lo = k.saturating_sub(other.len() - 1);
            let hi = k.min(self.len() - 1);
            let mut acc = ComplexNeumaier::default();
            for i in lo..=hi {
                acc.add(self.0[i] * other.0[k - i]);
            }
            out.push(acc.value());
        }
        CoefficientSequence(out)
    }

    /// Cauchy product truncated at degree `m`.
    pub fn product_truncated(&self, other: &Self, m: usize) -> Self {
        let mut full = self.product(other);
        full.0.truncate(m + 1);
        full.0.resize(m + 1, Complex64::default());
        full
    }

    /// `f^<p-1> / ||f||_p^(p-1)`, the unique norming functional of `f` in the
    /// bilinear pairing.
    pub fn norming_functional(&self, sp: &SpaceParameters) -> Result<Self> {
        let nrm = self.lp_norm(sp.p());
        if nrm == 0.0 {
            return Err(LpaError::Degenerate("norming functional of the zero sequence".into()));
        }
        let scale = nrm.powf(sp.p() - 1.0);
        Ok(CoefficientSequence(
            self.0.iter().map(|&a| pow_s_raw(a, sp.p() - 1.0) / scale).collect(),
        ))
    }
}

impl TryFrom<Vec<[f64; 2]>> for CoefficientSequence {
    type Error = LpaError;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        CoefficientSequence::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<CoefficientSequence> for Vec<[f64; 2]> {
    fn from(s: CoefficientSequence) -> Self {
        s.0.into_iter().map(|c| [c.re, c.im]).collect()
    }
}

/// Scaled `l^e` norm (`e >= 1`), safe against overflow and underflow.
pub fn lp_norm(v: &[Complex64], e: f64) -> f64 {
    assert!(e >= 1.0, "lp_norm exponent must be >= 1, got {e}");
    let big = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if big == 0.0 {
        return 0.0;
    }
    if e == 2.0 {
        return big * sum(v.iter().map(|c| (c.norm() / big).powi(2))).sqrt();
    }
    big * sum(v.iter().map(|c| (c.norm() / big).powf(e))).powf(1.0 / e)
}


/// Bilinear pairing `sum f_k g_k` (no conjugation), zero-padded.
pub fn pairing(f: &CoefficientSequence, g: &CoefficientSequence) -> Complex64 {
    pairing_slices(f.coeffs(), g.coeffs())
}

pub(crate) fn pairing_slices(f: &[Complex64], g: &[Complex64]) -> Complex64 {
    sum_complex(f.iter().zip(g.iter()).map(|(a, b)| a * b))
}

pub(crate) fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        acc = acc * z + a;
    }
    acc
}

/// Coefficients `1, w, ..., w^m` of the kernel at `w`.
pub fn kernel_coeffs(w: DiskPoint, m: usize) -> CoefficientSequence {
    CoefficientSequence(powers(w.value(), m))
}

pub(crate) fn powers(w: Complex64, m: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(m + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=m {
        out.push(acc);
        acc *= w;
    }
    out
}

/// Exact `q`-th power of the norm of the truncated kernel,
/// `(1 - |w|^(q(m+1))) / (1 - |w|^q)`.
pub fn truncated_kernel_norm_pow(w: Complex64, q: f64, m: usize) -> f64 {
    let r = w.norm();
    if r == 0.0 {
        return 1.0;
    }
    let rq = r.powf(q);
    let num = -(((m + 1) as f64) * q * r.ln()).exp_m1();
    num / (1.0 - rq)
}
