//! The normalized-kernel matrix and its operator norm, computed by a
//! nonlinear power method with Hölder-pair certificates.

use crate::error::{LpaError, Result};
use crate::extremal::{extremal_pair, ExtremalConfig};
use crate::interp::{NodeSet, TargetVector};
use crate::linalg::Tall;
use crate::series::{lp_norm, CoefficientSequence};
use crate::space::{pow_s_raw, SpaceParameters};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `Psi[j][k] = z_k^j (1 - |z_k|^q)^(1/q)` for `j = 0..=m`: column `k` is
/// the kernel at `z_k` divided by its exact norm.
#[derive(Debug, Clone)]
pub struct PsiMatrix {
    nodes: NodeSet,
    sp: SpaceParameters,
    truncation: usize,
    data: Tall,
}

impl PsiMatrix {
    pub fn new(nodes: &NodeSet, sp: &SpaceParameters, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(LpaError::invalid("truncation degree must be positive"));
        }
        Ok(PsiMatrix {
            nodes: nodes.clone(),
            sp: *sp,
            truncation,
            data: nodes.normalized_kernel_matrix(sp, truncation),
        })
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn space(&self) -> &SpaceParameters {
        &self.sp
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn rows(&self) -> usize {
        self.data.l
    }

    pub fn cols(&self) -> usize {
        self.data.n
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.data.row(j)[k]
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.data.l).map(|j| self.data.row(j)[k]).collect()
    }

    pub fn apply(&self, a: &[Complex64]) -> Vec<Complex64> {
        self.data.apply(a)
    }

    /// `Psi^T b` without conjugation.
    pub fn transpose_apply(&self, b: &[Complex64]) -> Vec<Complex64> {
        self.data.transpose_apply(b)
    }

    /// Largest `1 - ||column_k||_q`, the norm lost to truncation.
    pub fn column_norm_defect(&self) -> f64 {
        (0..self.cols())
            .map(|k| 1.0 - lp_norm(&self.column(k), self.sp.q()))
            .fold(0.0, f64::max)
    }

    /// Bound on how much the untruncated operator norm can exceed the
    /// truncated one: `(sum_k |z_k|^(p(m+1)))^(1/p)`.
    pub fn truncation_error_bar(&self) -> f64 {
        let p = self.sp.p();
        let e = (self.truncation + 1) as f64;
        self.nodes
            .points()
            .iter()
            .map(|z| z.modulus().powf(p * e))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpNormCertificate {
    /// `nu = ||Psi a~||_q` with `||a~||_q = 1`.
    #[serde(with = "crate::real")]
    pub norm_estimate: f64,
    pub a_tilde: Vec<Complex64>,
    /// `(Psi a~ / nu)^<q-1>`, a unit vector of `l^p`.
    pub b_tilde: Vec<Complex64>,
    /// `||a~ - [Psi^T (Psi a~)^<q-1>]^<p-1> / nu^p||_q`
    #[serde(with = "crate::real")]
    pub residual_a: f64,
    /// `||b~ - [Psi (Psi^T b~)^<p-1>]^<q-1> / nu^q||_p`
    #[serde(with = "crate::real")]
    pub residual_b: f64,
    pub iterations: usize,
    /// Smallest step-to-step change of the objective (negative means a drop).
    #[serde(with = "crate::real")]
    pub min_increment: f64,
    #[serde(with = "crate::real")]
    pub truncation_error_bar: f64,
}

pub(crate) struct PowerOutcome {
    pub x: Vec<Complex64>,
    pub value: f64,
    pub iterations: usize,
    pub min_increment: f64,
}

/// Nonlinear power method for `||T||_{r -> r}`:
/// `x <- normalize_r([T^T (T x)^<r-1>]^<r'-1>)`. The objective `||T x||_r`
/// never decreases; a drop beyond `1e-12` relative is reported as instability.
pub(crate) fn power_method(
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    apply_t: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    r: f64,
    start: &[Complex64],
    max_iter: usize,
    tol: f64,
) -> Result<PowerOutcome> {
    let rc = r / (r - 1.0);
    let mut x = start.to_vec();
    let nx = lp_norm(&x, r);
    if nx == 0.0 {
        return Err(LpaError::invalid("starting vector is zero"));
    }
    x.iter_mut().for_each(|v| *v /= nx);
    let mut value = lp_norm(&apply(&x), r);
    let mut min_increment = f64::INFINITY;
    let mut last_move = f64::INFINITY;
    for it in 1..=max_iter {
        let y = apply(&x);
        let ny = lp_norm(&y, r);
        if ny == 0.0 {
            return Err(LpaError::Degenerate("operator annihilates the iterate".into()));
        }
        let b: Vec<Complex64> = y.iter().map(|&v| pow_s_raw(v / ny, r - 1.0)).collect();
        let t = apply_t(&b);
        let tn = lp_norm(&t, rc);
        if tn == 0.0 {
            return Err(LpaError::Degenerate("adjoint step vanished".into()));
        }
        let mut xn: Vec<Complex64> = t.iter().map(|&v| pow_s_raw(v / tn, rc - 1.0)).collect();
        let nxn = lp_norm(&xn, r);
        xn.iter_mut().for_each(|v| *v /= nxn);
        let vn = lp_norm(&apply(&xn), r);
        let inc = vn - value;
        min_increment = min_increment.min(inc);
        if inc < -1e-12 * value {
            return Err(LpaError::Instability(format!(
                "objective dropped from {value} to {vn} at iteration {it}"
            )));
        }
        let moved = lp_norm(&xn.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>(), r);
        x = xn;
        value = vn;
        last_move = moved;
        if moved <= tol {
            return Ok(PowerOutcome { x, value, iterations: it, min_increment });
        }
    }
    Err(LpaError::Convergence { iterations: max_iter, gap: last_move, best: x })
}

fn phase_normalize(v: &mut [Complex64]) {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-12 * big).copied() {
        let ph = first.conj() / first.norm();
        v.iter_mut().for_each(|z| *z *= ph);
    }
}

/// Power iteration for `||Psi||_{q -> q}` from `start`, with its certificate.
pub fn nonlinear_power_iteration(
    psi: &PsiMatrix,
    start: &[Complex64],
    max_iter: usize,
    tol: f64,
) -> Result<OpNormCertificate> {
    if start.len() != psi.cols() {
        return Err(LpaError::invalid("start vector length differs from column count"));
    }
    let (p, q) = (psi.sp.p(), psi.sp.q());
    let out = power_method(
        &|a| psi.apply(a),
        &|b| psi.transpose_apply(b),
        q,
        start,
        max_iter,
        tol,
    )?;
    let mut a = out.x;
    phase_normalize(&mut a);
    let y = psi.apply(&a);
    let nu = lp_norm(&y, q);
    let b: Vec<Complex64> = y.iter().map(|&v| pow_s_raw(v / nu, q - 1.0)).collect();
    let yq: Vec<Complex64> = y.iter().map(|&v| pow_s_raw(v, q - 1.0)).collect();
    let fa: Vec<Complex64> = psi
        .transpose_apply(&yq)
        .iter()
        .zip(&a)
        .map(|(&t, &ak)| ak - pow_s_raw(t, p - 1.0) / nu.powf(p))
        .collect();
    let tb: Vec<Complex64> =
        psi.transpose_apply(&b).iter().map(|&t| pow_s_raw(t, p - 1.0)).collect();
    let fb: Vec<Complex64> = psi
        .apply(&tb)
        .iter()
        .zip(&b)
        .map(|(&t, &bk)| bk - pow_s_raw(t, q - 1.0) / nu.powf(q))
        .collect();
    Ok(OpNormCertificate {
        norm_estimate: nu,
        residual_a: lp_norm(&fa, q),
        residual_b: lp_norm(&fb, p),
        a_tilde: a,
        b_tilde: b,
        iterations: out.iterations,
        min_increment: out.min_increment,
        truncation_error_bar: psi.truncation_error_bar(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStartCertificate {
    pub best: OpNormCertificate,
    pub restarts_used: usize,
    /// Largest minus smallest converged estimate.
    #[serde(with = "crate::real")]
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    /// Random starts in addition to the all-ones and canonical starts.
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    #[serde(with = "crate::real")]
    pub tol: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig { restarts: 8, seed: 0, max_iter: 200_000, tol: 1e-13 }
    }
}

fn lex_less(a: &[Complex64], b: &[Complex64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x.re != y.re {
            return x.re < y.re;
        }
        if x.im != y.im {
            return x.im < y.im;
        }
    }
    false
}

/// Power iteration from the all-ones vector, every canonical vector and
/// `cfg.restarts` seeded random vectors. The largest estimate wins; ties
/// within `1e-12` relative go to the lexicographically smallest `a~`.
pub fn opnorm_multistart(psi: &PsiMatrix, cfg: &PowerConfig) -> Result<MultiStartCertificate> {
    let n = psi.cols();
    let mut starts = vec![vec![Complex64::new(1.0, 0.0); n]];
    for k in 0..n {
        let mut e = vec![Complex64::default(); n];
        e[k] = Complex64::new(1.0, 0.0);
        starts.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.restarts {
        starts.push(
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        );
    }
    let certs: Vec<OpNormCertificate> = starts
        .par_iter()
        .map(|s| nonlinear_power_iteration(psi, s, cfg.max_iter, cfg.tol))
        .collect::<Result<_>>()?;
    let max = certs.iter().map(|c| c.norm_estimate).fold(0.0, f64::max);
    let min = certs.iter().map(|c| c.norm_estimate).fold(f64::INFINITY, f64::min);
    let mut best: Option<&OpNormCertificate> = None;
    for c in certs.iter().filter(|c| c.norm_estimate >= max * (1.0 - 1e-12)) {
        if best.is_none_or(|b| lex_less(&c.a_tilde, &b.a_tilde)) {
            best = Some(c);
        }
    }
    Ok(MultiStartCertificate {
        best: best.expect("at least one start").clone(),
        restarts_used: starts.len(),
        spread: max - min,
    })
}

/// Rows `f_j`: minimal-norm functions with `f_j(z_k) = delta_jk / (1 - |z_k|^q)^(1/q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiMatrix {
    pub rows: Vec<CoefficientSequence>,
    pub nodes: NodeSet,
    pub truncation: usize,
}

impl PhiMatrix {
    pub fn from_nodes(nodes: &NodeSet, sp: &SpaceParameters, cfg: &ExtremalConfig) -> Result<Self> {
        let n = nodes.len();
        let rows = (0..n)
            .map(|j| extremal_pair(nodes, j, n - 1, sp, cfg, None).map(|e| e.f))
            .collect::<Result<_>>()?;
        Ok(PhiMatrix { rows, nodes: nodes.clone(), truncation: cfg.truncation })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `Phi Psi` row by row.
    pub product: Vec<Vec<Complex64>>,
    #[serde(with = "crate::real")]
    pub max_residual: f64,
    pub within_tolerance: bool,
}

/// Entrywise distance of `Phi Psi` from the identity.
pub fn phi_psi_identity_check(phi: &PhiMatrix, psi: &PsiMatrix, tol: f64) -> Result<IdentityReport> {
    if phi.rows.len() != psi.cols() || phi.rows.iter().any(|r| r.len() != psi.rows()) {
        return Err(LpaError::invalid(format!(
            "Phi is {}x{} but Psi is {}x{}",
            phi.rows.len(),
            phi.rows.first().map_or(0, |r| r.len()),
            psi.rows(),
            psi.cols()
        )));
    }
    let n = psi.cols();
    let mut max_residual = 0.0f64;
    let mut product = Vec::with_capacity(n);
    for (j, row) in phi.rows.iter().enumerate() {
        let v = psi.transpose_apply(row.coeffs());
        for (k, x) in v.iter().enumerate() {
            let target = if j == k { Complex64::new(1.0, 0.0) } else { Complex64::default() };
            max_residual = max_residual.max((x - target).norm());
        }
        product.push(v);
    }
    Ok(IdentityReport { product, max_residual, within_tolerance: max_residual <= tol })
}

/// `Phi^T W = sum_k w_k f_k`, which satisfies
/// `f(z_k) (1 - |z_k|^q)^(1/q) = w_k` for every node.
pub fn interpolate_via_phi(phi: &PhiMatrix, w: &TargetVector) -> Result<CoefficientSequence> {
    if w.len() != phi.rows.len() {
        return Err(LpaError::invalid("target length differs from the number of rows"));
    }
    let mut out = CoefficientSequence::zeros(phi.truncation);
    for (row, wk) in phi.rows.iter().zip(w.values()) {
        out = out.add(&row.scale(*wk));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_norm_is_column_norm() {
        let sp = SpaceParameters::new(3.0).unwrap();
        let z = NodeSet::from_complex(&[Complex64::new(0.4, 0.3)]).unwrap();
        let psi = PsiMatrix::new(&z, &sp, 200).unwrap();
        let c = nonlinear_power_iteration(&psi, &[Complex64::new(0.0, 2.0)], 100, 1e-14).unwrap();
        assert!((c.norm_estimate - lp_norm(&psi.column(0), sp.q())).abs() < 1e-14);
        assert!(c.residual_a < 1e-12);
        assert!(psi.column_norm_defect() < 1e-12);
    }

    #[test]
    fn rejects_zero_start() {
        let sp = SpaceParameters::new(2.0).unwrap();
        let z = NodeSet::from_complex(&[Complex64::new(0.4, 0.3)]).unwrap();
        let psi = PsiMatrix::new(&z, &sp, 20).unwrap();
        assert!(nonlinear_power_iteration(&psi, &[Complex64::default()], 10, 1e-12).is_err());
    }
}
