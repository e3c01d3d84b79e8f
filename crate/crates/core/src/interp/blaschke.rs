use super::{check_instance, NodeSet, TargetVector};
use crate::error::{LpaError, Result};
use crate::series::{horner, lp_norm, CoefficientSequence};
use crate::space::SpaceParameters;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeInterpolant {
    pub coeffs: CoefficientSequence,
    #[serde(with = "crate::real")]
    pub norm: f64,
    #[serde(with = "crate::real")]
    pub max_residual: f64,
}

/// Coefficients of `prod_{m != skip} (z - z_m) / (1 - conj(z_m) z)` up to degree `deg`.
fn partial_blaschke(z: &[Complex64], skip: usize, deg: usize) -> Vec<Complex64> {
    let mut s = vec![Complex64::default(); deg + 1];
    s[0] = Complex64::new(1.0, 0.0);
    for (m, &zm) in z.iter().enumerate() {
        if m == skip {
            continue;
        }
        for j in (0..=deg).rev() {
            let prev = if j > 0 { s[j - 1] } else { Complex64::default() };
            s[j] = prev - zm * s[j];
        }
        let zc = zm.conj();
        for j in 1..=deg {
            let prev = s[j - 1];
            s[j] += zc * prev;
        }
    }
    s
}

/// `sum_k w_k B_k(z) / B_k(z_k)`, with `B_k` the finite Blaschke product
/// vanishing at every node except `z_k`, expanded to degree `m`.
///
/// Fails with a truncation error when the expansion no longer interpolates
/// to `1e-10` relative accuracy.
pub fn blaschke_interpolant(
    z: &NodeSet,
    w: &TargetVector,
    sp: &SpaceParameters,
    m: usize,
) -> Result<BlaschkeInterpolant> {
    check_instance(z, w, m)?;
    let zs = z.values();
    let mut h = vec![Complex64::default(); m + 1];
    for (k, (&zk, &wk)) in zs.iter().zip(w.values()).enumerate() {
        let mut bk = Complex64::new(1.0, 0.0);
        for (j, &zj) in zs.iter().enumerate() {
            if j != k {
                bk *= (zk - zj) / (Complex64::new(1.0, 0.0) - zj.conj() * zk);
            }
        }
        if bk.norm() == 0.0 {
            return Err(LpaError::Degenerate("Blaschke factor vanishes at its own node".into()));
        }
        let coeff = wk / bk;
        for (hj, bj) in h.iter_mut().zip(partial_blaschke(&zs, k, m)) {
            *hj += coeff * bj;
        }
    }
    let max_residual = zs
        .iter()
        .zip(w.values())
        .map(|(&zk, &wk)| (horner(&h, zk) - wk).norm())
        .fold(0.0, f64::max);
    let scale = w.values().iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if max_residual > 1e-10 * scale {
        let suggested = (2 * m).max(crate::default_truncation(z.max_modulus(), 1e-16) * 2);
        return Err(LpaError::Truncation { degree: m, residual: max_residual, suggested });
    }
    let norm = lp_norm(&h, sp.p());
    Ok(BlaschkeInterpolant { coeffs: CoefficientSequence::from_vec(h), norm, max_residual })
}
