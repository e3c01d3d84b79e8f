//! Extremal pairs: the minimal-norm function peaking at one node and the
//! distance of the normalized kernel there to the span of the others.

use crate::error::{LpaError, Result};
use crate::interp::{min_norm_interpolate, MinNormConfig, NodeSet, TargetVector};
use crate::linalg::{newton_affine, smoothing_schedule, Tall, ThinQr};
use crate::series::{lp_norm, CoefficientSequence};
use crate::space::SpaceParameters;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Below this `||g||_q` the node is flagged as nearly in the span of the others.
pub const MINIMALITY_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalConfig {
    pub truncation: usize,
    #[serde(with = "crate::real")]
    pub tol: f64,
    pub max_iter: usize,
}

impl ExtremalConfig {
    pub fn new(truncation: usize) -> Self {
        ExtremalConfig { truncation, tol: 1e-6, max_iter: 50_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalPair {
    pub j: usize,
    pub n_level: usize,
    /// Minimal-norm `f` with `f(z_k) = delta_jk / (1 - |z_j|^q)^(1/q)`, `k <= N`.
    pub f: CoefficientSequence,
    /// `g = sum_k gamma_k psi_k` (normalized kernels), closest to zero with `gamma_j = 1`.
    pub g: CoefficientSequence,
    #[serde(with = "crate::real")]
    pub f_norm: f64,
    #[serde(with = "crate::real")]
    pub g_norm: f64,
    /// Coefficients over all nodes; zero beyond level `N`.
    pub gamma: Vec<Complex64>,
    #[serde(with = "crate::real")]
    pub max_constraint_residual: f64,
    #[serde(with = "crate::real")]
    pub duality_gap: f64,
    pub minimality_degenerate: bool,
}

impl ExtremalPair {
    /// Distance between the two sides of the norming relation
    /// `f^<p-1> / ||f||_p^(p-1) = g / ||g||_q`.
    ///
    /// For `p >= 2` this is the `q`-norm of the difference. For `p < 2` the
    /// power `p - 1 < 1` is not Lipschitz at zero, so the equivalent relation
    /// `f / ||f||_p = (g / ||g||_q)^<q-1>` is measured in the `p`-norm instead.
    pub fn norming_residual(&self, sp: &SpaceParameters) -> Result<f64> {
        if self.g_norm == 0.0 || self.f_norm == 0.0 {
            return Err(LpaError::Degenerate("extremal pair has a zero side".into()));
        }
        let gs = self.g.scale(Complex64::new(1.0 / self.g_norm, 0.0));
        if sp.p() >= 2.0 {
            Ok(self.f.norming_functional(sp)?.sub(&gs).lp_norm(sp.q()))
        } else {
            let fs = self.f.scale(Complex64::new(1.0 / self.f_norm, 0.0));
            Ok(gs.norming_functional(&sp.dual())?.sub(&fs).lp_norm(sp.p()))
        }
    }
}

/// Minimize `||u_j + sum_{k != j} beta_k u_k||_q` over the normalized kernels
/// `u_k`, `k <= n_level`.
fn kernel_distance(
    psi: &Tall,
    j: usize,
    n_level: usize,
    q: f64,
    warm: Option<&[Complex64]>,
    max_iter: usize,
) -> Result<Vec<Complex64>> {
    let others: Vec<usize> = (0..=n_level).filter(|&k| k != j).collect();
    let mut gamma = vec![Complex64::default(); psi.n];
    gamma[j] = Complex64::new(1.0, 0.0);
    if others.is_empty() {
        return Ok(gamma);
    }
    let base: Vec<Complex64> = (0..psi.l).map(|r| psi.row(r)[j]).collect();
    let cols: Vec<Vec<Complex64>> =
        others.iter().map(|&k| (0..psi.l).map(|r| psi.row(r)[k]).collect()).collect();
    let qr = ThinQr::new(&Tall::from_columns(&cols))?;
    // warm start in orthonormal coordinates: beta' = R beta
    let start: Vec<Complex64> = match warm {
        Some(w) => (0..others.len())
            .map(|i| (i..others.len()).map(|l| qr.r[(i, l)] * w[others[l]]).sum())
            .collect(),
        None => vec![Complex64::default(); others.len()],
    };
    let scale = base.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let etas = smoothing_schedule(q, 1e-2 * scale, 1e-12 * scale);
    let zero = vec![Complex64::default(); others.len()];
    let out = newton_affine(&qr.q, Some(&base), &zero, q, &etas, start, max_iter)?;
    let beta = qr.solve_r(&out.beta);
    for (&k, b) in others.iter().zip(beta) {
        gamma[k] = b;
    }
    Ok(gamma)
}

/// The extremal pair `(f_{j,N}, g_{j,N})` on the first `n_level + 1` nodes.
/// `f_norm * g_norm = 1` up to solver accuracy.
pub fn extremal_pair(
    z: &NodeSet,
    j: usize,
    n_level: usize,
    sp: &SpaceParameters,
    cfg: &ExtremalConfig,
    warm_gamma: Option<&[Complex64]>,
) -> Result<ExtremalPair> {
    if n_level >= z.len() || j > n_level {
        return Err(LpaError::invalid(format!(
            "need j <= N < {} (got j = {j}, N = {n_level})",
            z.len()
        )));
    }
    let sub = z.prefix(n_level + 1)?;
    let zj = sub.values()[j];
    let mut targets = vec![Complex64::default(); n_level + 1];
    targets[j] = Complex64::new(sp.kernel_norm(zj), 0.0);
    let mn = MinNormConfig {
        truncation: cfg.truncation,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        primal_from_dual: true,
    };
    let res = min_norm_interpolate(&sub, &TargetVector::new(targets)?, sp, &mn)?;

    let psi = sub.normalized_kernel_matrix(sp, cfg.truncation);
    let warm = warm_gamma.map(|w| &w[..(n_level + 1).min(w.len())]);
    let warm = warm.filter(|w| w.len() == n_level + 1);
    let gamma_local = kernel_distance(&psi, j, n_level, sp.q(), warm, cfg.max_iter)?;
    let g = psi.apply(&gamma_local);
    let g_norm = lp_norm(&g, sp.q());
    let mut gamma = vec![Complex64::default(); z.len()];
    gamma[..=n_level].copy_from_slice(&gamma_local);
    Ok(ExtremalPair {
        j,
        n_level,
        f_norm: res.primal_norm,
        f: res.coeffs,
        g: CoefficientSequence::from_vec(g),
        g_norm,
        gamma,
        max_constraint_residual: res.constraint_residual,
        duality_gap: res.duality_gap,
        minimality_degenerate: g_norm < MINIMALITY_THRESHOLD,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalRow {
    pub n: usize,
    #[serde(with = "crate::real")]
    pub f_norm: f64,
    /// `||f_{j,N} - f_{j,N-1}||_p`; absent at the first level.
    pub delta_norm: Option<f64>,
    #[serde(with = "crate::real")]
    pub g_norm: f64,
    #[serde(with = "crate::real")]
    pub max_constraint_residual: f64,
    pub gamma: Vec<Complex64>,
}

/// Extremal pairs for `N = j..=n_max`, each `g` warm-started from the last.
pub fn convergence_profile(
    z: &NodeSet,
    j: usize,
    n_max: usize,
    sp: &SpaceParameters,
    cfg: &ExtremalConfig,
) -> Result<Vec<ExtremalRow>> {
    if n_max >= z.len() || j > n_max {
        return Err(LpaError::invalid(format!("need j <= n_max < {}", z.len())));
    }
    let mut rows = Vec::new();
    let mut prev: Option<ExtremalPair> = None;
    for nn in j..=n_max {
        let pair = extremal_pair(z, j, nn, sp, cfg, prev.as_ref().map(|p| p.gamma.as_slice()))?;
        let delta_norm = prev.as_ref().map(|p| pair.f.sub(&p.f).lp_norm(sp.p()));
        rows.push(ExtremalRow {
            n: nn,
            f_norm: pair.f_norm,
            delta_norm,
            g_norm: pair.g_norm,
            max_constraint_residual: pair.max_constraint_residual,
            gamma: pair.gamma.clone(),
        });
        prev = Some(pair);
    }
    Ok(rows)
}
