use super::NodeSet;
use crate::error::{LpaError, Result};
use crate::linalg::Tall;
use crate::series::lp_norm;
use crate::space::{pow_s_raw, SpaceParameters};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszBudget {
    /// Random starts, in addition to the all-ones and canonical starts.
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    #[serde(with = "crate::real")]
    pub lb_threshold: f64,
    #[serde(with = "crate::real")]
    pub ub_threshold: f64,
}

impl Default for RieszBudget {
    fn default() -> Self {
        RieszBudget { restarts: 8, max_iter: 5000, seed: 0, lb_threshold: 1e-2, ub_threshold: 1e2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RieszClass {
    RieszSystem,
    #[serde(rename = "LB-fails")]
    LbFails,
    #[serde(rename = "UB-fails")]
    UbFails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszReport {
    #[serde(with = "crate::real")]
    pub c1_estimate: f64,
    #[serde(with = "crate::real")]
    pub c2_estimate: f64,
    pub classification: RieszClass,
    /// Coefficients `c` (of the unnormalized kernels) attaining the estimates.
    pub witness_c1: Vec<Complex64>,
    pub witness_c2: Vec<Complex64>,
    pub converged_c1: bool,
    pub converged_c2: bool,
    /// Spread of the converged values across starts.
    #[serde(with = "crate::real")]
    pub spread_c1: f64,
    #[serde(with = "crate::real")]
    pub spread_c2: f64,
    pub restarts_used: usize,
    pub truncation: usize,
}

/// `||sum c_k K_k||_q / (sum |c_k|^q ||K_k||_q^q)^(1/q)` with the kernels
/// truncated at degree `m` and exact kernel norms in the denominator.
pub fn riesz_ratio(z: &NodeSet, sp: &SpaceParameters, m: usize, c: &[Complex64]) -> Result<f64> {
    if c.len() != z.len() {
        return Err(LpaError::invalid("coefficient count differs from node count"));
    }
    let a: Vec<Complex64> =
        c.iter().zip(z.values()).map(|(ck, zk)| ck * sp.kernel_norm(zk)).collect();
    let psi = z.normalized_kernel_matrix(sp, m);
    let na = lp_norm(&a, sp.q());
    if na == 0.0 {
        return Err(LpaError::Degenerate("zero coefficient vector".into()));
    }
    Ok(lp_norm(&psi.apply(&a), sp.q()) / na)
}

struct Run {
    value: f64,
    a: Vec<Complex64>,
    converged: bool,
}

fn log_ratio(psi: &Tall, a: &[Complex64], q: f64) -> (f64, Vec<Complex64>) {
    let y = psi.apply(a);
    let ny = lp_norm(&y, q);
    let na = lp_norm(a, q);
    let yq: Vec<Complex64> = y.iter().map(|&v| pow_s_raw(v / ny, q - 1.0)).collect();
    let t = psi.transpose_apply(&yq);
    let grad = t
        .iter()
        .zip(a)
        .map(|(tk, ak)| tk.conj() / ny - pow_s_raw(ak / na, q - 1.0).conj() / na)
        .collect();
    (ny.ln() - na.ln(), grad)
}

fn normalize(a: &mut [Complex64], q: f64) {
    let n = lp_norm(a, q);
    for v in a.iter_mut() {
        *v /= n;
    }
}

/// Gradient ascent (`sign = 1`) or descent (`sign = -1`) on the log ratio with
/// Barzilai-Borwein steps safeguarded by backtracking.
fn climb(psi: &Tall, q: f64, sign: f64, mut a: Vec<Complex64>, max_iter: usize) -> Run {
    normalize(&mut a, q);
    let (mut f, mut g) = log_ratio(psi, &a, q);
    let mut step = 0.1;
    let mut stall = 0;
    for _ in 0..max_iter {
        let gn2: f64 = g.iter().map(|v| v.norm_sqr()).sum();
        if gn2.sqrt() < 1e-11 {
            return Run { value: f, a, converged: true };
        }
        let mut t = step;
        let mut moved = None;
        for _ in 0..50 {
            let mut trial: Vec<Complex64> =
                a.iter().zip(&g).map(|(ak, gk)| ak + gk * (sign * t)).collect();
            if trial.iter().all(|v| v.norm() == 0.0) {
                t *= 0.5;
                continue;
            }
            normalize(&mut trial, q);
            let (ft, gt) = log_ratio(psi, &trial, q);
            if ft.is_finite() && sign * (ft - f) >= 1e-4 * t * gn2 {
                moved = Some((trial, ft, gt));
                break;
            }
            t *= 0.5;
        }
        let Some((an, fnew, gnew)) = moved else {
            return Run { value: f, a, converged: true };
        };
        let (mut ss, mut sy) = (0.0, 0.0);
        for k in 0..a.len() {
            let s = an[k] - a[k];
            let y = gnew[k] - g[k];
            ss += s.norm_sqr();
            sy += s.re * y.re + s.im * y.im;
        }
        step = if sy.abs() > 0.0 { (ss / sy.abs()).clamp(1e-8, 1e4) } else { t * 2.0 };
        if (fnew - f).abs() <= 1e-15 * (1.0 + f.abs()) {
            stall += 1;
            if stall >= 20 {
                return Run { value: fnew, a: an, converged: true };
            }
        } else {
            stall = 0;
        }
        a = an;
        f = fnew;
        g = gnew;
    }
    Run { value: f, a, converged: false }
}

/// First significant entry made real and positive.
fn fix_phase(v: &mut [Complex64]) {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-12 * big).copied() {
        let ph = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= ph;
        }
    }
}

/// Estimate the optimal lower and upper Riesz constants of the normalized
/// kernels at `z` by multistart gradient methods, and classify the node set.
pub fn riesz_classify(
    z: &NodeSet,
    sp: &SpaceParameters,
    m: usize,
    budget: &RieszBudget,
) -> Result<RieszReport> {
    if budget.max_iter == 0 {
        return Err(LpaError::invalid("iteration budget must be positive"));
    }
    let n = z.len();
    let q = sp.q();
    let psi = z.normalized_kernel_matrix(sp, m);
    let mut starts: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0); n]];
    for k in 0..n {
        let mut e = vec![Complex64::default(); n];
        e[k] = Complex64::new(1.0, 0.0);
        starts.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 0..budget.restarts {
        starts.push(
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        );
    }
    let best_of = |sign: f64| -> (Run, f64) {
        let runs: Vec<Run> =
            starts.iter().map(|s| climb(&psi, q, sign, s.clone(), budget.max_iter)).collect();
        let mut best = 0;
        for (i, r) in runs.iter().enumerate() {
            if sign * (r.value - runs[best].value) > 1e-12 * (1.0 + runs[best].value.abs()) {
                best = i;
            }
        }
        let vals: Vec<f64> = runs.iter().filter(|r| r.converged).map(|r| r.value.exp()).collect();
        let spread = if vals.is_empty() {
            f64::INFINITY
        } else {
            vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - vals.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        (runs.into_iter().nth(best).expect("at least one start"), spread)
    };
    let (lo, spread_c1) = best_of(-1.0);
    let (hi, spread_c2) = best_of(1.0);
    let weights: Vec<f64> = z.values().iter().map(|zk| sp.kernel_weight(*zk)).collect();
    let witness = |a: &[Complex64]| {
        let mut c: Vec<Complex64> = a.iter().zip(&weights).map(|(ak, w)| ak * w).collect();
        fix_phase(&mut c);
        c
    };
    let c1 = lo.value.exp();
    let c2 = hi.value.exp();
    let classification = if !(lo.converged && hi.converged) {
        RieszClass::Inconclusive
    } else if c1 < budget.lb_threshold {
        RieszClass::LbFails
    } else if c2 > budget.ub_threshold {
        RieszClass::UbFails
    } else {
        RieszClass::RieszSystem
    };
    Ok(RieszReport {
        c1_estimate: c1,
        c2_estimate: c2,
        classification,
        witness_c1: witness(&lo.a),
        witness_c2: witness(&hi.a),
        converged_c1: lo.converged,
        converged_c2: hi.converged,
        spread_c1,
        spread_c2,
        restarts_used: starts.len(),
        truncation: m,
    })
}
