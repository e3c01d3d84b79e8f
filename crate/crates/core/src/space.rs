//! Exponent pairs, disk points and the signed power map.

use crate::error::{LpaError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// An exponent `p` in `(1, inf)` together with its conjugate `q = p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct SpaceParameters {
    p: f64,
    q: f64,
}

#[derive(Deserialize)]
struct RawSpace {
    p: f64,
    #[serde(default)]
    #[allow(dead_code)]
    q: Option<f64>,
}

impl TryFrom<RawSpace> for SpaceParameters {
    type Error = LpaError;
    fn try_from(raw: RawSpace) -> Result<Self> {
        SpaceParameters::new(raw.p)
    }
}

impl SpaceParameters {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(LpaError::invalid(format!("exponent p must lie in (1, inf), got {p}")));
        }
        let q = if p == 2.0 { 2.0 } else { p / (p - 1.0) };
        Ok(SpaceParameters { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The same pair with the roles of `p` and `q` exchanged.
    pub fn dual(&self) -> SpaceParameters {
        SpaceParameters { p: self.q, q: self.p }
    }

    /// `(1 - |z|^q)^(1/q)`, the reciprocal of the exact kernel norm at `z`.
    pub fn kernel_weight(&self, z: Complex64) -> f64 {
        let t = 1.0 - z.norm().powf(self.q);
        t.powf(1.0 / self.q)
    }

    /// Exact `l^q` norm of the kernel at `z`.
    pub fn kernel_norm(&self, z: Complex64) -> f64 {
        1.0 / self.kernel_weight(z)
    }
}

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(LpaError::invalid(format!("point {z} is not finite")));
        }
        if z.norm() >= 1.0 {
            return Err(LpaError::invalid(format!("point {z} lies outside the open unit disk")));
        }
        Ok(DiskPoint(z))
    }

    pub fn from_re_im(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r, theta))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }
}

impl TryFrom<[f64; 2]> for DiskPoint {
    type Error = LpaError;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        DiskPoint::from_re_im(v[0], v[1])
    }
}

impl From<DiskPoint> for [f64; 2] {
    fn from(z: DiskPoint) -> Self {
        [z.0.re, z.0.im]
    }
}

/// Signed power: `r e^{i theta} -> r^s e^{-i theta}`, with `0 -> 0`.
///
/// The conjugation is part of the map; `pow_s(pow_s(a, s), 1/s) == a`.
pub fn pow_s(alpha: Complex64, s: f64) -> Result<Complex64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(LpaError::invalid(format!("exponent s must be positive and finite, got {s}")));
    }
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(LpaError::invalid(format!("argument {alpha} is not finite")));
    }
    Ok(pow_s_raw(alpha, s))
}

/// [`pow_s`] without validation.
#[inline]
pub(crate) fn pow_s_raw(alpha: Complex64, s: f64) -> Complex64 {
    let r = alpha.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    alpha.conj() * r.powf(s - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_exponents() {
        let sp = SpaceParameters::new(3.0).unwrap();
        assert!((sp.q() - 1.5).abs() < 1e-15);
        assert_eq!(SpaceParameters::new(2.0).unwrap().q(), 2.0);
        assert_eq!(sp.dual().p(), sp.q());
        assert!(SpaceParameters::new(1.0).is_err());
        assert!(SpaceParameters::new(f64::INFINITY).is_err());
        assert!(SpaceParameters::new(f64::NAN).is_err());
    }

    #[test]
    fn disk_point_bounds() {
        assert!(DiskPoint::from_re_im(1.0, 0.0).is_err());
        assert!(DiskPoint::from_re_im(0.6, 0.8).is_err());
        assert!(DiskPoint::from_re_im(0.6, 0.79).is_ok());
        assert!(DiskPoint::from_re_im(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn pow_s_examples() {
        let a = pow_s(Complex64::new(0.0, 2.0), 2.0).unwrap();
        assert!((a - Complex64::new(0.0, -4.0)).norm() < 1e-15);
        assert_eq!(pow_s(Complex64::new(0.0, 0.0), 0.5).unwrap(), Complex64::new(0.0, 0.0));
        assert!(pow_s(Complex64::new(1.0, 0.0), 0.0).is_err());
        assert!(pow_s(Complex64::new(1.0, 0.0), -1.0).is_err());
        let b = pow_s(Complex64::from_polar(0.3, 1.1), 1.7).unwrap();
        assert!((b.norm() - 0.3f64.powf(1.7)).abs() < 1e-15);
        assert!((b.arg() + 1.1).abs() < 1e-14);
    }

    #[test]
    fn serde_round_trip() {
        let sp = SpaceParameters::new(1.5).unwrap();
        let s = serde_json::to_string(&sp).unwrap();
        let back: SpaceParameters = serde_json::from_str(&s).unwrap();
        assert_eq!(sp, back);
        assert!(serde_json::from_str::<SpaceParameters>("{\"p\":0.5}").is_err());
        assert!(serde_json::from_str::<DiskPoint>("[1.0,0.0]").is_err());
    }
}
