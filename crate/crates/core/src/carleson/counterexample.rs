use super::{carleson_constant, Atom, AtomicMeasure, CarlesonConstant};
use crate::error::{LpaError, Result};
use crate::sum::Neumaier;
use crate::space::SpaceParameters;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    #[serde(with = "crate::real")]
    pub epsilon: f64,
    /// Atoms at `1 - 1/n`, `n = 1..=n_atoms`, with masses `1/(n(n+1))`.
    pub n_atoms: usize,
    /// Degree at which the norm of the test function is truncated.
    pub norm_terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub m: usize,
    /// `sum_{n <= m} mu_n |f(r_n)|^p`
    #[serde(with = "crate::real")]
    pub s_m: f64,
    /// `sum_{k <= m} |a_k|^p`
    #[serde(with = "crate::real")]
    pub norm_partial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceProfile {
    pub rows: Vec<DivergenceRow>,
    pub carleson: CarlesonConstant,
    /// `sum_{k <= norm_terms} |a_k|^p`
    #[serde(with = "crate::real")]
    pub norm_at_terms: f64,
    /// Integral-test bounds on `sum_{k > norm_terms} |a_k|^p`.
    #[serde(with = "crate::real")]
    pub tail_lower: f64,
    #[serde(with = "crate::real")]
    pub tail_upper: f64,
    /// Least-squares slope of `log S_m` against `log m` over `[100, 10^4]`
    /// (clipped to the available range).
    #[serde(with = "crate::real")]
    pub slope: f64,
    pub first_m_exceeding_1e3: Option<usize>,
}

/// `f(r) = sum_k r^k / (k+1)^s` by direct summation, stopping once a term
/// falls below `1e-16` of the partial sum.
fn eval_series(table: &[f64], r: f64) -> f64 {
    let mut acc = Neumaier::default();
    let mut partial = 0.0;
    let mut rk = 1.0;
    for &t in table {
        let term = t * rk;
        acc.add(term);
        partial += term;
        if term < 1e-16 * partial {
            break;
        }
        rk *= r;
    }
    acc.value()
}

/// The measure with atoms `1 - 1/n` and masses `1/(n(n+1))` is Carleson with
/// constant at most one, yet for `p > 2` and `p - 2 - p epsilon >= 0` the
/// function with coefficients `(k+1)^-(epsilon + 1/p)` lies in the space
/// while `sum_n mu_n |f(r_n)|^p` diverges. Both facts are tracked numerically.
pub fn counterexample_run(
    sp: &SpaceParameters,
    cfg: &CounterexampleConfig,
) -> Result<DivergenceProfile> {
    let p = sp.p();
    let eps = cfg.epsilon;
    if p <= 2.0 {
        return Err(LpaError::invalid(format!("requires p > 2, got {p}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(LpaError::invalid("epsilon must be positive"));
    }
    if p - 2.0 - p * eps < 0.0 {
        return Err(LpaError::invalid(format!(
            "p - 2 - p*epsilon = {} is negative; the sum would converge",
            p - 2.0 - p * eps
        )));
    }
    if cfg.n_atoms < 2 || cfg.norm_terms == 0 {
        return Err(LpaError::invalid("need n_atoms >= 2 and norm_terms >= 1"));
    }
    let s = eps + 1.0 / p;
    let n = cfg.n_atoms;
    // r = 1 - 1/n needs about 37 n terms before r^k drops below 1e-16
    let len = 40 * n + 1000;
    let table: Vec<f64> = (0..len).map(|k| ((k + 1) as f64).powf(-s)).collect();
    let contributions: Vec<f64> = (1..=n)
        .into_par_iter()
        .map(|m| {
            let r = 1.0 - 1.0 / m as f64;
            let mass = 1.0 / (m as f64 * (m + 1) as f64);
            mass * eval_series(&table, r).powf(p)
        })
        .collect();
    let mut rows = Vec::with_capacity(n);
    let mut acc_s = Neumaier::default();
    let mut acc_n = Neumaier::default();
    let mut first = None;
    for (i, c) in contributions.iter().enumerate() {
        acc_s.add(*c);
        acc_n.add(((i + 1) as f64).powf(-s * p));
        let s_m = acc_s.value();
        if first.is_none() && s_m > 1e3 {
            first = Some(i + 1);
        }
        rows.push(DivergenceRow { m: i + 1, s_m, norm_partial: acc_n.value() });
    }
    let mut norm = Neumaier::default();
    for k in 0..=cfg.norm_terms {
        norm.add(((k + 1) as f64).powf(-s * p));
    }
    let e = p * eps;
    let mt = cfg.norm_terms as f64;
    let tail_lower = (mt + 2.0).powf(-e) / e;
    let tail_upper = (mt + 1.0).powf(-e) / e;
    let hi = n.min(10_000);
    let lo = 100.min(hi / 2).max(1);
    let (mut sx, mut sy, mut sxx, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for row in rows.iter().filter(|r| r.m >= lo && r.m <= hi) {
        let (x, y) = ((row.m as f64).ln(), row.s_m.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        cnt += 1.0;
    }
    let slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    let measure = AtomicMeasure::new(
        (1..=n)
            .map(|m| Atom {
                point: Complex64::new(1.0 - 1.0 / m as f64, 0.0),
                mass: 1.0 / (m as f64 * (m + 1) as f64),
            })
            .collect(),
    )?;
    Ok(DivergenceProfile {
        rows,
        carleson: carleson_constant(&measure),
        norm_at_terms: norm.value(),
        tail_lower,
        tail_upper,
        slope,
        first_m_exceeding_1e3: first,
    })
}
