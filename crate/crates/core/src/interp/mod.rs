//! Interpolation in the coefficient-p space: minimal-norm interpolants, the
//! convex dual, Blaschke interpolants and Riesz-system classification.

mod blaschke;
mod riesz;
mod sequences;

pub use blaschke::{blaschke_interpolant, BlaschkeInterpolant};
pub use riesz::{riesz_classify, riesz_ratio, RieszBudget, RieszClass, RieszReport};
pub use sequences::{generate_sequence, SequenceSpec};

use crate::error::{LpaError, Result};
use crate::linalg::{newton_affine, ConstrainedOutcome, newton_constrained, smoothing_schedule, Tall, ThinQr};
use crate::series::{horner, lp_norm, powers, CoefficientSequence};
use crate::space::{pow_s_raw, DiskPoint, SpaceParameters};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Pairwise distinct points of the open disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DiskPoint>", into = "Vec<DiskPoint>")]
pub struct NodeSet(Vec<DiskPoint>);

/// Two nodes closer than this are treated as equal.
pub const COINCIDENCE_TOL: f64 = 1e-14;

impl NodeSet {
    pub fn new(points: Vec<DiskPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(LpaError::invalid("node set is empty"));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if (points[i].value() - points[j].value()).norm() <= COINCIDENCE_TOL {
                    return Err(LpaError::Degenerate(format!(
                        "nodes {j} and {i} coincide ({})",
                        points[i].value()
                    )));
                }
            }
        }
        Ok(NodeSet(points))
    }

    pub fn from_complex(points: &[Complex64]) -> Result<Self> {
        Self::new(points.iter().map(|&z| DiskPoint::new(z)).collect::<Result<_>>()?)
    }

    pub fn points(&self) -> &[DiskPoint] {
        &self.0
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.0.iter().map(|z| z.value()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.0.iter().map(|z| z.modulus()).fold(0.0, f64::max)
    }

    /// The first `count` nodes.
    pub fn prefix(&self, count: usize) -> Result<NodeSet> {
        if count == 0 || count > self.len() {
            return Err(LpaError::invalid(format!("prefix of length {count} out of range")));
        }
        Ok(NodeSet(self.0[..count].to_vec()))
    }

    /// Columns `z_k^j`, `j = 0..=m`.
    pub(crate) fn kernel_matrix(&self, m: usize) -> Tall {
        let cols: Vec<Vec<Complex64>> = self.0.iter().map(|z| powers(z.value(), m)).collect();
        Tall::from_columns(&cols)
    }

    /// Columns `z_k^j (1 - |z_k|^q)^(1/q)`: kernels normalized by their exact norm.
    pub(crate) fn normalized_kernel_matrix(&self, sp: &SpaceParameters, m: usize) -> Tall {
        let cols: Vec<Vec<Complex64>> = self
            .0
            .iter()
            .map(|z| {
                let w = sp.kernel_weight(z.value());
                powers(z.value(), m).into_iter().map(|c| c * w).collect()
            })
            .collect();
        Tall::from_columns(&cols)
    }
}

impl TryFrom<Vec<DiskPoint>> for NodeSet {
    type Error = LpaError;
    fn try_from(v: Vec<DiskPoint>) -> Result<Self> {
        NodeSet::new(v)
    }
}

impl From<NodeSet> for Vec<DiskPoint> {
    fn from(z: NodeSet) -> Self {
        z.0
    }
}

/// Prescribed values at the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct TargetVector(Vec<Complex64>);

impl TargetVector {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(LpaError::invalid("target values must be finite"));
        }
        Ok(TargetVector(values))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<Complex64>> for TargetVector {
    type Error = LpaError;
    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        TargetVector::new(v)
    }
}

impl From<TargetVector> for Vec<Complex64> {
    fn from(t: TargetVector) -> Self {
        t.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinNormConfig {
    pub truncation: usize,
    /// Relative duality-gap tolerance: `gap <= tol (1 + primal)`.
    #[serde(with = "crate::real")]
    pub tol: f64,
    pub max_iter: usize,
    /// Start the primal solve from the point recovered from the dual optimum.
    /// When false the primal is solved from the least-squares interpolant
    /// alone, without any dual information.
    pub primal_from_dual: bool,
}

impl MinNormConfig {
    pub fn new(truncation: usize) -> Self {
        MinNormConfig { truncation, tol: 1e-6, max_iter: 50_000, primal_from_dual: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationResult {
    pub coeffs: CoefficientSequence,
    #[serde(with = "crate::real")]
    pub primal_norm: f64,
    #[serde(with = "crate::real")]
    pub dual_value: f64,
    #[serde(with = "crate::real")]
    pub duality_gap: f64,
    /// Dual maximizer, scaled so that `||A^T beta||_q = 1` and `beta . w > 0`.
    pub beta_star: Vec<Complex64>,
    #[serde(with = "crate::real")]
    pub constraint_residual: f64,
    /// Condition number of the triangular factor of the kernel matrix.
    #[serde(with = "crate::real")]
    pub condition_estimate: f64,
    pub truncation: usize,
    pub primal_iterations: usize,
    pub dual_iterations: usize,
}

impl InterpolationResult {
    /// `A^T beta_star`, the candidate norming functional of `coeffs`.
    pub fn dual_functional(&self, nodes: &NodeSet) -> CoefficientSequence {
        let a = nodes.kernel_matrix(self.truncation);
        CoefficientSequence::from_vec(a.apply(&self.beta_star))
    }
}

fn check_instance(z: &NodeSet, w: &TargetVector, m: usize) -> Result<()> {
    if z.len() != w.len() {
        return Err(LpaError::invalid(format!(
            "{} nodes but {} target values",
            z.len(),
            w.len()
        )));
    }
    if m + 1 < z.len() {
        return Err(LpaError::Degenerate(format!(
            "truncation degree {m} cannot interpolate {} nodes",
            z.len()
        )));
    }
    Ok(())
}

pub(crate) struct DualSolution {
    pub beta: Vec<Complex64>,
    pub value: f64,
    pub iterations: usize,
}

/// Maximize `|beta . w| / ||A^T beta||_q` through the smooth convex problem
/// `min (1/q) ||A^T beta||_q^q - Re(beta . w)` in orthonormalized coordinates.
fn solve_dual(
    qr: &ThinQr,
    kernels: &Tall,
    w: &[Complex64],
    sp: &SpaceParameters,
    max_iter: usize,
) -> Result<DualSolution> {
    let q = sp.q();
    let w_t = qr.solve_rt(w);
    let start: Vec<Complex64> = w_t.iter().map(|z| z.conj()).collect();
    let v0 = qr.q.apply(&start);
    let nrm2: f64 = w_t.iter().map(|z| z.norm_sqr()).sum();
    let t = (nrm2 / lp_norm(&v0, q).powf(q)).powf(1.0 / (q - 1.0));
    let start: Vec<Complex64> = start.into_iter().map(|z| z * t).collect();
    let vscale = v0.iter().map(|z| z.norm()).fold(0.0, f64::max) * t;
    let etas = smoothing_schedule(q, 1e-2 * vscale, 1e-12 * vscale);
    let out = newton_affine(&qr.q, None, &w_t, q, &etas, start, max_iter)?;
    let beta = qr.solve_r(&out.beta);
    let v = kernels.apply(&beta);
    let nv = lp_norm(&v, q);
    let pair: Complex64 = beta.iter().zip(w).map(|(b, w)| b * w).sum();
    if nv == 0.0 {
        return Err(LpaError::Instability("dual functional vanished".into()));
    }
    let phase = if pair.norm() > 0.0 { pair.conj() / pair.norm() } else { Complex64::new(1.0, 0.0) };
    let beta = beta.into_iter().map(|b| b * phase / nv).collect();
    Ok(DualSolution { beta, value: pair.norm() / nv, iterations: out.iterations })
}

/// Minimal-norm interpolation in the coefficient-p space, truncated at degree
/// `cfg.truncation`, certified by an independently solved dual problem.
pub fn min_norm_interpolate(
    z: &NodeSet,
    w: &TargetVector,
    sp: &SpaceParameters,
    cfg: &MinNormConfig,
) -> Result<InterpolationResult> {
    let m = cfg.truncation;
    check_instance(z, w, m)?;
    let n = z.len();
    if w.values().iter().all(|v| *v == Complex64::default()) {
        return Ok(InterpolationResult {
            coeffs: CoefficientSequence::zeros(m),
            primal_norm: 0.0,
            dual_value: 0.0,
            duality_gap: 0.0,
            beta_star: vec![Complex64::default(); n],
            constraint_residual: 0.0,
            condition_estimate: 1.0,
            truncation: m,
            primal_iterations: 0,
            dual_iterations: 0,
        });
    }
    let kernels = z.kernel_matrix(m);
    let qr = ThinQr::new(&kernels)?;
    let condition_estimate = qr.condition();
    let dual = solve_dual(&qr, &kernels, w.values(), sp, cfg.max_iter)?;

    // Constraints A c = w with A = B^T become conj(Q)^* c = R^-T w. The first
    // attempt starts from the primal point recovered from the dual optimum;
    // the second runs the full smoothing path from the least-squares solution.
    let rhs = qr.solve_rt(w.values());
    let qa = qr.q.conj();
    let v = kernels.apply(&dual.beta);
    let recovered: Vec<Complex64> =
        v.iter().map(|&x| pow_s_raw(x, sp.q() - 1.0) * dual.value).collect();
    let p = sp.p();
    let fine = if p == 2.0 { vec![0.0] } else { vec![1e-10, 1e-13] };
    let mut primal = if cfg.primal_from_dual {
        newton_constrained(&qa, &rhs, p, Some(recovered), &fine, cfg.max_iter)?
    } else {
        ConstrainedOutcome { c: vec![], iterations: 0 }
    };
    let mut primal_norm = if cfg.primal_from_dual { lp_norm(&primal.c, p) } else { f64::INFINITY };
    if !(primal_norm.is_finite() && primal_norm - dual.value <= cfg.tol * (1.0 + primal_norm)) {
        let cold = newton_constrained(&qa, &rhs, p, None, &smoothing_schedule(p, 1e-1, 1e-13), cfg.max_iter)?;
        let cold_norm = lp_norm(&cold.c, p);
        if cold_norm < primal_norm {
            primal = ConstrainedOutcome { iterations: primal.iterations + cold.iterations, ..cold };
            primal_norm = cold_norm;
        }
    }
    let coeffs = primal.c;
    let constraint_residual = z
        .values()
        .iter()
        .zip(w.values())
        .map(|(zk, wk)| (horner(&coeffs, *zk) - wk).norm())
        .fold(0.0, f64::max);
    let duality_gap = primal_norm - dual.value;
    if !(primal_norm.is_finite() && duality_gap <= cfg.tol * (1.0 + primal_norm)) {
        return Err(LpaError::Convergence {
            iterations: primal.iterations + dual.iterations,
            gap: duality_gap,
            best: coeffs,
        });
    }
    Ok(InterpolationResult {
        coeffs: CoefficientSequence::from_vec(coeffs),
        primal_norm,
        dual_value: dual.value,
        duality_gap,
        beta_star: dual.beta,
        constraint_residual,
        condition_estimate,
        truncation: m,
        primal_iterations: primal.iterations,
        dual_iterations: dual.iterations,
    })
}

/// Dual value of the minimal-norm problem only.
pub fn min_norm_value(
    z: &NodeSet,
    w: &TargetVector,
    sp: &SpaceParameters,
    cfg: &MinNormConfig,
) -> Result<f64> {
    check_instance(z, w, cfg.truncation)?;
    if w.values().iter().all(|v| *v == Complex64::default()) {
        return Ok(0.0);
    }
    let kernels = z.kernel_matrix(cfg.truncation);
    let qr = ThinQr::new(&kernels)?;
    Ok(solve_dual(&qr, &kernels, w.values(), sp, cfg.max_iter)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: usize,
    #[serde(with = "crate::real")]
    pub value: f64,
}

/// Minimal norms of the nested problems on the first `N + 1` nodes,
/// `N = 0..=n_max`. The sequence is nondecreasing; it stays bounded exactly
/// when the full target sequence admits an interpolant.
pub fn universal_criterion_profile(
    z: &NodeSet,
    w: &TargetVector,
    sp: &SpaceParameters,
    n_max: usize,
    cfg: &MinNormConfig,
) -> Result<Vec<ProfileRow>> {
    if z.len() != w.len() {
        return Err(LpaError::invalid("node and target lengths differ"));
    }
    if n_max >= z.len() {
        return Err(LpaError::invalid(format!("n_max {n_max} exceeds the node count")));
    }
    (0..=n_max)
        .map(|nn| {
            let zs = z.prefix(nn + 1)?;
            let ws = TargetVector::new(w.values()[..=nn].to_vec())?;
            Ok(ProfileRow { n: nn, value: min_norm_value(&zs, &ws, sp, cfg)? })
        })
        .collect()
}
