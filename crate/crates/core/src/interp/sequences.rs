use super::NodeSet;
use crate::error::{LpaError, Result};
use crate::space::DiskPoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Node sequence generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceSpec {
    /// `z_k = 1 - cos(aperture) base^k e^{+-i aperture}`, `k = 1..=count`,
    /// alternating sides of the radius. Aperture zero gives `1 - base^k`.
    Stolz { count: usize, aperture: f64, base: f64 },
    /// `z_k = 1 - sigma^k`, `k = 1..=count`.
    RadialVinogradov { count: usize, sigma: f64 },
    /// `z_k = (1 - (1 - r0) sigma^k) e^{i k angle_step}`, `k = 0..count`.
    ExponentialBoundary { count: usize, r0: f64, sigma: f64, angle_step: f64 },
    Custom { points: Vec<[f64; 2]> },
}

fn unit_interval(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(LpaError::invalid(format!("{name} must lie in (0, 1), got {x}")))
    }
}

pub fn generate_sequence(spec: &SequenceSpec) -> Result<NodeSet> {
    let pts: Vec<Complex64> = match *spec {
        SequenceSpec::Stolz { count, aperture, base } => {
            unit_interval("base", base)?;
            if !(aperture.is_finite() && (0.0..std::f64::consts::FRAC_PI_2).contains(&aperture)) {
                return Err(LpaError::invalid("aperture must lie in [0, pi/2)"));
            }
            (1..=count)
                .map(|k| {
                    let phi = if k % 2 == 1 { aperture } else { -aperture };
                    let d = aperture.cos() * base.powi(k as i32);
                    Complex64::new(1.0, 0.0) - Complex64::from_polar(d, phi)
                })
                .collect()
        }
        SequenceSpec::RadialVinogradov { count, sigma } => {
            unit_interval("sigma", sigma)?;
            (1..=count).map(|k| Complex64::new(1.0 - sigma.powi(k as i32), 0.0)).collect()
        }
        SequenceSpec::ExponentialBoundary { count, r0, sigma, angle_step } => {
            unit_interval("sigma", sigma)?;
            if !(r0.is_finite() && (0.0..1.0).contains(&r0) && angle_step.is_finite()) {
                return Err(LpaError::invalid("r0 must lie in [0, 1) and angle_step be finite"));
            }
            (0..count)
                .map(|k| {
                    let r = 1.0 - (1.0 - r0) * sigma.powi(k as i32);
                    Complex64::from_polar(r, k as f64 * angle_step)
                })
                .collect()
        }
        SequenceSpec::Custom { ref points } => {
            points.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
        }
    };
    NodeSet::new(pts.into_iter().map(DiskPoint::new).collect::<Result<_>>()?)
}
