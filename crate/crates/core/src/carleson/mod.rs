//! Atomic measures on the disk, Carleson windows and constants, the
//! embedding experiment, region geometry and the divergence counterexample.

mod counterexample;
mod regions;

pub use counterexample::{counterexample_run, CounterexampleConfig, DivergenceProfile, DivergenceRow};
pub use regions::{
    figure_kernel, figure_mobius, kernel_region, mobius_region, KernelRegion, MobiusRegion,
    PolarPoint,
};

use crate::error::{LpaError, Result};
use crate::gramian::{power_method, PowerConfig, PsiMatrix};
use crate::interp::{riesz_classify, NodeSet, RieszBudget};
use crate::series::{horner, CoefficientSequence};
use crate::space::{pow_s_raw, SpaceParameters};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Slack used for inclusive window boundaries.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Complex64,
    pub mass: f64,
}

/// Finite sum of point masses in the open disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    atoms: Vec<[f64; 3]>,
}

impl TryFrom<RawMeasure> for AtomicMeasure {
    type Error = LpaError;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        AtomicMeasure::new(
            raw.atoms
                .into_iter()
                .map(|[re, im, mass]| Atom { point: Complex64::new(re, im), mass })
                .collect(),
        )
    }
}

impl From<AtomicMeasure> for RawMeasure {
    fn from(m: AtomicMeasure) -> Self {
        RawMeasure { atoms: m.atoms.iter().map(|a| [a.point.re, a.point.im, a.mass]).collect() }
    }
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if !(a.point.re.is_finite() && a.point.im.is_finite() && a.point.norm() < 1.0) {
                return Err(LpaError::invalid(format!("atom {i} lies outside the open disk")));
            }
            if !(a.mass.is_finite() && a.mass >= 0.0) {
                return Err(LpaError::invalid(format!("atom {i} has invalid mass {}", a.mass)));
            }
        }
        Ok(AtomicMeasure { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        crate::sum::sum(self.atoms.iter().map(|a| a.mass))
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        AtomicMeasure::new(self.atoms.iter().map(|a| Atom { mass: a.mass * lambda, ..*a }).collect())
    }
}

/// `{1 - h <= r < 1, theta0 <= theta <= theta0 + h}` (angles mod 2 pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlesonWindow {
    theta0: f64,
    h: f64,
}

impl CarlesonWindow {
    pub fn new(theta0: f64, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0 && h < 1.0 && theta0.is_finite()) {
            return Err(LpaError::invalid(format!("window needs 0 < h < 1, got h = {h}")));
        }
        Ok(CarlesonWindow { theta0: theta0.rem_euclid(TAU), h })
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Membership with boundaries counted inside (up to [`BOUNDARY_TOL`]).
    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        if r >= 1.0 || r < 1.0 - self.h - BOUNDARY_TOL {
            return false;
        }
        let mut d = (z.arg() - self.theta0).rem_euclid(TAU);
        if d > TAU - BOUNDARY_TOL {
            d -= TAU;
        }
        d <= self.h + BOUNDARY_TOL
    }
}

pub fn window_mass(mu: &AtomicMeasure, s: &CarlesonWindow) -> f64 {
    crate::sum::sum(mu.atoms.iter().filter(|a| s.contains(a.point)).map(|a| a.mass))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlesonConstant {
    /// `sup_S mu(S) / h(S)`.
    #[serde(with = "crate::real")]
    pub value: f64,
    /// A window attaining the supremum; absent when no atom can be captured.
    pub window: Option<CarlesonWindow>,
    pub candidates: usize,
}

struct Fenwick(Vec<f64>);

impl Fenwick {
    fn add(&mut self, mut i: usize, v: f64) {
        i += 1;
        while i < self.0.len() {
            self.0[i] += v;
            i += i & i.wrapping_neg();
        }
    }
    fn prefix(&self, mut i: usize) -> f64 {
        // sum of entries [0, i)
        let mut s = 0.0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
    fn range(&self, lo: usize, hi: usize) -> f64 {
        self.prefix(hi) - self.prefix(lo)
    }
}

/// Exact Carleson constant of an atomic measure.
///
/// An optimal window can be taken with `theta0` at an atom argument and `h`
/// equal to either `1 - |z|` of a captured atom or the angular extent of the
/// captured atoms, so the search runs over that finite family. Candidate
/// widths are swept in increasing order while atoms are activated into a
/// Fenwick tree indexed by argument.
pub fn carleson_constant(mu: &AtomicMeasure) -> CarlesonConstant {
    let mut atoms: Vec<(f64, f64, f64)> = mu
        .atoms
        .iter()
        .filter(|a| a.mass > 0.0 && a.point.norm() > 0.0)
        .map(|a| (1.0 - a.point.norm(), a.point.arg().rem_euclid(TAU), a.mass))
        .collect();
    if atoms.is_empty() {
        return CarlesonConstant { value: 0.0, window: None, candidates: 0 };
    }
    // distinct arguments
    let mut angles: Vec<f64> = atoms.iter().map(|a| a.1).collect();
    angles.sort_by(f64::total_cmp);
    let mut classes: Vec<f64> = Vec::new();
    for a in angles {
        if classes.last().is_none_or(|&l| a - l > BOUNDARY_TOL) {
            classes.push(a);
        }
    }
    let class_of = |theta: f64| -> usize {
        let i = classes.partition_point(|&c| c < theta - BOUNDARY_TOL);
        i.min(classes.len() - 1)
    };
    let mut hs: Vec<f64> = atoms.iter().map(|a| a.0).filter(|&h| h > 0.0 && h < 1.0).collect();
    for (i, &a) in classes.iter().enumerate() {
        for (j, &b) in classes.iter().enumerate() {
            if i != j {
                let d = (b - a).rem_euclid(TAU);
                if d > 0.0 && d < 1.0 {
                    hs.push(d);
                }
            }
        }
    }
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut tree = Fenwick(vec![0.0; classes.len() + 1]);
    let mut active = vec![false; classes.len()];
    let mut active_list: Vec<usize> = Vec::new();
    let mut next = 0;
    let mut best = (0.0f64, None);
    let upper = |x: f64| classes.partition_point(|&c| c <= x);
    for &h in &hs {
        while next < atoms.len() && atoms[next].0 <= h + BOUNDARY_TOL {
            let c = class_of(atoms[next].1);
            tree.add(c, atoms[next].2);
            if !active[c] {
                active[c] = true;
                active_list.push(c);
            }
            next += 1;
        }
        for &a in &active_list {
            let end = classes[a] + h + BOUNDARY_TOL;
            let mass = if end < TAU {
                tree.range(a, upper(end))
            } else {
                tree.range(a, classes.len()) + tree.range(0, upper(end - TAU).min(a))
            };
            let ratio = mass / h;
            if ratio > best.0 {
                best = (ratio, Some((classes[a], h)));
            }
        }
    }
    CarlesonConstant {
        value: best.0,
        window: best.1.map(|(t, h)| CarlesonWindow::new(t, h).expect("candidate width in (0, 1)")),
        candidates: hs.len(),
    }
}

/// `sum_k (1 - |z_k|^q)^(p-1) |f(z_k)|^p`.
pub fn embedding_lhs(f: &CoefficientSequence, z: &NodeSet, sp: &SpaceParameters) -> f64 {
    let p = sp.p();
    crate::sum::sum(z.values().iter().map(|&zk| {
        (1.0 - zk.norm().powf(sp.q())).powf(p - 1.0) * horner(f.coeffs(), zk).norm().powf(p)
    }))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingBudget {
    pub power: PowerConfig,
    pub riesz: RieszBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    /// Best constant in `embedding_lhs(f) <= K ||f||_p^p` over degree-`m` functions.
    #[serde(with = "crate::real")]
    pub k_estimate: f64,
    #[serde(with = "crate::real")]
    pub k_root: f64,
    /// Upper Riesz constant of the normalized kernels.
    #[serde(with = "crate::real")]
    pub c_estimate: f64,
    /// `c_estimate <= 1.05 k_root`.
    pub consistency_flag: bool,
    pub witness_f: CoefficientSequence,
    #[serde(with = "crate::real")]
    pub witness_ratio: f64,
    /// Left side at `f = 1`.
    #[serde(with = "crate::real")]
    pub necessary_sum: f64,
    pub truncation: usize,
}

/// Estimate the embedding constant by the power method for the transpose of
/// the normalized-kernel matrix on `l^p`, and compare with the upper Riesz
/// constant found independently by gradient search.
pub fn embedding_duality_experiment(
    z: &NodeSet,
    sp: &SpaceParameters,
    m: usize,
    budget: &EmbeddingBudget,
) -> Result<EmbeddingReport> {
    let psi = PsiMatrix::new(z, sp, m)?;
    let (p, q) = (sp.p(), sp.q());
    let n = psi.cols();
    let mut starts: Vec<Vec<Complex64>> = (0..n)
        .map(|k| psi.column(k).into_iter().map(|v| pow_s_raw(v, q - 1.0)).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.power.seed);
    for _ in 0..budget.power.restarts {
        let a: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        starts.push(psi.apply(&a).into_iter().map(|v| pow_s_raw(v, q - 1.0)).collect());
    }
    let runs = starts
        .par_iter()
        .map(|s| {
            power_method(
                &|f| psi.transpose_apply(f),
                &|b| psi.apply(b),
                p,
                s,
                budget.power.max_iter,
                budget.power.tol,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value * (1.0 + 1e-12) { b } else { a })
        .expect("at least one start");
    let witness_f = CoefficientSequence::from_vec(best.x);
    let k_estimate = embedding_lhs(&witness_f, z, sp) / witness_f.lp_norm(p).powf(p);
    let riesz = riesz_classify(z, sp, m, &budget.riesz)?;
    let k_root = k_estimate.powf(1.0 / p);
    Ok(EmbeddingReport {
        k_estimate,
        k_root,
        c_estimate: riesz.c2_estimate,
        consistency_flag: riesz.c2_estimate <= 1.05 * k_root,
        witness_ratio: best.value,
        necessary_sum: embedding_lhs(&CoefficientSequence::monomial(0), z, sp),
        witness_f,
        truncation: m,
    })
}
