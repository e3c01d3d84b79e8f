//! Numerical toolkit for analytic functions on the unit disk whose Taylor
//! coefficients are p-summable.
//!
//! Functions are represented by truncated coefficient sequences. The degree
//! `m` of the truncation is always an explicit argument; [`default_truncation`]
//! gives the usual choice for a set of nodes.

pub mod carleson;
pub mod error;
pub mod extremal;
pub mod gramian;
pub mod interp;
mod linalg;
pub mod orthogonality;
pub mod real;
pub mod separation;
pub mod series;
pub mod space;
pub mod sum;

pub use error::{LpaError, Result};
pub use num_complex::Complex64;
pub use series::CoefficientSequence;
pub use space::{pow_s, DiskPoint, SpaceParameters};

/// Tail tolerance used by [`default_truncation`].
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Smallest `m` with `r^(m+1) < tail_tol`, for `r` the largest node modulus.
pub fn default_truncation(max_modulus: f64, tail_tol: f64) -> usize {
    if max_modulus <= 0.0 {
        return 1;
    }
    let r = max_modulus.min(1.0 - f64::EPSILON);
    let m = (tail_tol.ln() / r.ln()).floor() as usize;
    m.max(1)
}

/// [`default_truncation`] for the largest modulus among `points`.
pub fn truncation_for(points: &[DiskPoint]) -> usize {
    let r = points.iter().map(|z| z.modulus()).fold(0.0, f64::max);
    default_truncation(r, DEFAULT_TAIL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_rule() {
        for &r in &[0.1, 0.5, 0.9, 0.99, 0.999] {
            let m = default_truncation(r, 1e-12);
            assert!(r.powi(m as i32 + 1) < 1e-12);
            assert!(m == 1 || r.powi(m as i32) >= 1e-12);
        }
        assert_eq!(default_truncation(0.0, 1e-12), 1);
    }
}
