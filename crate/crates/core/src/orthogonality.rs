//! Birkhoff-James orthogonality and Pythagorean-type inequalities.

use crate::error::{LpaError, Result};
use crate::series::{pairing_slices, CoefficientSequence};
use crate::space::{pow_s_raw, SpaceParameters};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Relative tolerance used when a routine requires orthogonal input.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityTest {
    pub orthogonal: bool,
    /// `|sum |f_k|^(p-2) conj(f_k) g_k|`
    #[serde(with = "crate::real")]
    pub residual: f64,
    /// `residual / (||f||^(p-1) ||g||)`, zero when either side vanishes.
    #[serde(with = "crate::real")]
    pub relative_residual: f64,
}

/// Is `f` orthogonal to `g` in the Birkhoff-James sense?
///
/// The test is `|sum |f_k|^(p-2) conj(f_k) g_k| <= tol ||f||_p^(p-1) ||g||_p`.
pub fn bj_orthogonal(
    f: &CoefficientSequence,
    g: &CoefficientSequence,
    sp: &SpaceParameters,
    tol: f64,
) -> Result<OrthogonalityTest> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(LpaError::invalid(format!("tolerance must be nonnegative, got {tol}")));
    }
    let p = sp.p();
    let fp: Vec<Complex64> = f.coeffs().iter().map(|&a| pow_s_raw(a, p - 1.0)).collect();
    let residual = pairing_slices(&fp, g.coeffs()).norm();
    let scale = f.lp_norm(p).powf(p - 1.0) * g.lp_norm(p);
    let relative_residual = if scale > 0.0 { residual / scale } else { 0.0 };
    Ok(OrthogonalityTest {
        orthogonal: relative_residual <= tol,
        residual,
        relative_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `||f+g||^r >= ||f||^r + K ||g||^r`
    Lower,
    /// `||f+g||^r <= ||f||^r + K ||g||^r`
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PythagoreanParams {
    pub r: f64,
    pub k: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PythagoreanOutcome {
    pub holds: bool,
    #[serde(with = "crate::real")]
    pub lhs: f64,
    #[serde(with = "crate::real")]
    pub rhs: f64,
}

/// Check a Pythagorean inequality for a Birkhoff-James orthogonal pair.
pub fn pythagorean_check(
    f: &CoefficientSequence,
    g: &CoefficientSequence,
    sp: &SpaceParameters,
    pp: &PythagoreanParams,
) -> Result<PythagoreanOutcome> {
    if !(pp.r.is_finite() && pp.r > 0.0 && pp.k.is_finite() && pp.k >= 0.0) {
        return Err(LpaError::invalid("r must be positive and K nonnegative"));
    }
    let t = bj_orthogonal(f, g, sp, ORTHOGONALITY_TOL)?;
    if !t.orthogonal {
        return Err(LpaError::Precondition(format!(
            "pair is not orthogonal (relative residual {:.3e})",
            t.relative_residual
        )));
    }
    let p = sp.p();
    let lhs = f.add(g).lp_norm(p).powf(pp.r);
    let rhs = f.lp_norm(p).powf(pp.r) + pp.k * g.lp_norm(p).powf(pp.r);
    let slack = 1e-12 * lhs.max(rhs);
    let holds = match pp.direction {
        Direction::Lower => lhs >= rhs - slack,
        Direction::Upper => lhs <= rhs + slack,
    };
    Ok(PythagoreanOutcome { holds, lhs, rhs })
}

/// Project `g` so that `f` becomes orthogonal to it:
/// `g - (<f^<p-1>, g> / ||f||^p) f`.
pub fn orthogonalize(
    f: &CoefficientSequence,
    g: &CoefficientSequence,
    sp: &SpaceParameters,
) -> Result<CoefficientSequence> {
    let p = sp.p();
    let fp: Vec<Complex64> = f.coeffs().iter().map(|&a| pow_s_raw(a, p - 1.0)).collect();
    let nf = f.lp_norm(p);
    if nf == 0.0 {
        return Err(LpaError::Degenerate("cannot orthogonalize against zero".into()));
    }
    let t = pairing_slices(&fp, g.coeffs()) / nf.powf(p);
    Ok(g.sub(&f.scale(t)))
}

/// Empirical Pythagorean constant over random orthogonal pairs of length `dim`.
///
/// For [`Direction::Lower`] this is the smallest observed
/// `(||f+g||^r - ||f||^r) / ||g||^r`, for [`Direction::Upper`] the largest.
pub fn estimate_pythagorean_constant(
    sp: &SpaceParameters,
    r: f64,
    direction: Direction,
    samples: usize,
    dim: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 || dim < 2 {
        return Err(LpaError::invalid("need at least one sample of dimension >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = sp.p();
    let mut best = match direction {
        Direction::Lower => f64::INFINITY,
        Direction::Upper => f64::NEG_INFINITY,
    };
    let rand_seq = |rng: &mut ChaCha8Rng| {
        CoefficientSequence::from_vec(
            (0..dim)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
    };
    for _ in 0..samples {
        let f = rand_seq(&mut rng);
        let g0 = rand_seq(&mut rng);
        let scale: f64 = rng.random_range(0.01..3.0);
        let g = orthogonalize(&f, &g0, sp)?.scale(Complex64::new(scale, 0.0));
        let ng = g.lp_norm(p);
        if ng == 0.0 {
            continue;
        }
        let ratio = (f.add(&g).lp_norm(p).powf(r) - f.lp_norm(p).powf(r)) / ng.powf(r);
        best = match direction {
            Direction::Lower => best.min(ratio),
            Direction::Upper => best.max(ratio),
        };
    }
    Ok(best)
}
