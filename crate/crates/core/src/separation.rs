//! The p-pseudo-hyperbolic distance, p-Blaschke factors, weak separation and
//! multiplier bounds.

use crate::error::{LpaError, Result};
use crate::interp::NodeSet;
use crate::series::{horner, lp_norm, powers, CoefficientSequence};
use crate::space::{pow_s_raw, DiskPoint, SpaceParameters};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `|z1 - z2| / |1 - z2^<q-1> z1|`.
///
/// Not symmetric unless `p = 2`. The denominator is at least
/// `1 - |z2|^(q-1) |z1| > 0` on the disk.
pub fn rho_p(z1: DiskPoint, z2: DiskPoint, sp: &SpaceParameters) -> Result<f64> {
    rho_raw(z1.value(), z2.value(), sp.q())
}

pub(crate) fn rho_raw(z1: Complex64, z2: Complex64, q: f64) -> Result<f64> {
    let den = (ONE - pow_s_raw(z2, q - 1.0) * z1).norm();
    if !(den > 1e-300) {
        return Err(LpaError::Singular(format!("denominator vanishes at ({z1}, {z2})")));
    }
    Ok((z1 - z2).norm() / den)
}

/// `z -> (z - w) / (1 - w^<q-1> z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PBlaschkeFactor {
    anchor: DiskPoint,
    sp: SpaceParameters,
}

impl PBlaschkeFactor {
    pub fn new(anchor: DiskPoint, sp: SpaceParameters) -> Self {
        PBlaschkeFactor { anchor, sp }
    }

    pub fn anchor(&self) -> Complex64 {
        self.anchor.value()
    }

    fn alpha(&self) -> Complex64 {
        pow_s_raw(self.anchor.value(), self.sp.q() - 1.0)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let den = ONE - self.alpha() * z;
        if !(den.norm() > 1e-300) {
            return Err(LpaError::Singular(format!("pole of the factor at {z}")));
        }
        Ok((z - self.anchor.value()) / den)
    }

    /// Inverse map, which is the factor anchored at `-w`.
    pub fn inverse_eval(&self, u: Complex64) -> Result<Complex64> {
        let den = ONE + self.alpha() * u;
        if !(den.norm() > 1e-300) {
            return Err(LpaError::Singular(format!("pole of the inverse factor at {u}")));
        }
        Ok((u + self.anchor.value()) / den)
    }

    /// Taylor coefficients up to degree `m`:
    /// `-w`, then `alpha^(n-1) (1 - |w|^q)` with `alpha = w^<q-1>`.
    pub fn coeffs(&self, m: usize) -> CoefficientSequence {
        let w = self.anchor.value();
        let a = self.alpha();
        let lead = 1.0 - w.norm().powf(self.sp.q());
        let mut out = Vec::with_capacity(m + 1);
        out.push(-w);
        if m > 0 {
            out.extend(powers(a, m - 1).into_iter().map(|v| v * lead));
        }
        CoefficientSequence::from_vec(out)
    }

    /// Exact `l^1` norm of the coefficients, which bounds the multiplier norm.
    pub fn l1_norm(&self) -> f64 {
        let r = self.anchor.modulus();
        r + (1.0 - r.powf(self.sp.q())) / (1.0 - r.powf(self.sp.q() - 1.0))
    }

    /// `l^1` norm of the first `m + 1` coefficients plus the geometric tail.
    pub fn l1_norm_truncated(&self, m: usize) -> (f64, f64) {
        let c = self.coeffs(m);
        let head = lp_norm(c.coeffs(), 1.0);
        let r = self.anchor.modulus();
        let ra = r.powf(self.sp.q() - 1.0);
        let tail = ra.powi(m as i32) * (1.0 - r.powf(self.sp.q())) / (1.0 - ra);
        (head, tail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleScan {
    #[serde(with = "crate::real")]
    pub sup_ratio: f64,
    pub worst: [Complex64; 3],
    pub samples: usize,
}

fn area_uniform(rng: &mut ChaCha8Rng) -> Complex64 {
    let r: f64 = rng.random::<f64>().sqrt() * (1.0 - 1e-12);
    Complex64::from_polar(r, rng.random_range(0.0..2.0 * PI))
}

/// Largest observed `rho(z1, z3) / (rho(z1, z2) + rho(z2, z3))` over random
/// triples drawn uniformly by area.
pub fn quasi_triangle_scan(sp: &SpaceParameters, samples: usize, seed: u64) -> Result<TriangleScan> {
    if samples == 0 {
        return Err(LpaError::invalid("need at least one sample"));
    }
    let q = sp.q();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = TriangleScan { sup_ratio: 0.0, worst: [Complex64::default(); 3], samples };
    for _ in 0..samples {
        let t = [area_uniform(&mut rng), area_uniform(&mut rng), area_uniform(&mut rng)];
        let den = rho_raw(t[0], t[1], q)? + rho_raw(t[1], t[2], q)?;
        if den == 0.0 {
            continue;
        }
        let ratio = rho_raw(t[0], t[2], q)? / den;
        if ratio > best.sup_ratio {
            best.sup_ratio = ratio;
            best.worst = t;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationClass {
    WeaklySeparated,
    NotWeaklySeparated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    /// Infimum of `rho_p(z_j, z_k)` over ordered pairs `j != k`.
    #[serde(with = "crate::real")]
    pub inf_rho: f64,
    pub argmin_pair: (usize, usize),
    /// `rho_p(z_k, z_j)` for the minimizing pair, in reverse order.
    #[serde(with = "crate::real")]
    pub rho_reverse: f64,
    /// Largest quasi-triangle ratio over node triples.
    #[serde(with = "crate::real")]
    pub quasi_constant_estimate: f64,
    /// Largest exact `l^1` norm of the Blaschke factors at the nodes.
    #[serde(with = "crate::real")]
    pub sup_factor_l1: f64,
    /// `inf_rho / sup_factor_l1`.
    #[serde(with = "crate::real")]
    pub epsilon_estimate: f64,
    #[serde(with = "crate::real")]
    pub threshold: f64,
    pub classification: SeparationClass,
}

pub const DEFAULT_SEPARATION_THRESHOLD: f64 = 1e-4;

pub fn weak_separation_classify(
    z: &NodeSet,
    sp: &SpaceParameters,
    threshold: f64,
) -> Result<SeparationReport> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(LpaError::invalid("threshold must be nonnegative"));
    }
    let v = z.values();
    let n = v.len();
    if n < 2 {
        return Err(LpaError::invalid("need at least two nodes"));
    }
    let q = sp.q();
    let mut inf_rho = f64::INFINITY;
    let mut arg = (0, 1);
    for j in 0..n {
        for k in 0..n {
            if j != k {
                let r = rho_raw(v[j], v[k], q)?;
                if r < inf_rho {
                    inf_rho = r;
                    arg = (j, k);
                }
            }
        }
    }
    let rho_reverse = rho_raw(v[arg.1], v[arg.0], q)?;
    let mut quasi = 0.0f64;
    if (3..=200).contains(&n) {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    let den = rho_raw(v[a], v[b], q)? + rho_raw(v[b], v[c], q)?;
                    quasi = quasi.max(rho_raw(v[a], v[c], q)? / den);
                }
            }
        }
    }
    let sup_factor_l1 = z
        .points()
        .iter()
        .map(|&p| PBlaschkeFactor::new(p, *sp).l1_norm())
        .fold(0.0, f64::max);
    let epsilon_estimate = inf_rho / sup_factor_l1;
    let classification = if epsilon_estimate > threshold {
        SeparationClass::WeaklySeparated
    } else {
        SeparationClass::NotWeaklySeparated
    };
    Ok(SeparationReport {
        inf_rho,
        argmin_pair: arg,
        rho_reverse,
        quasi_constant_estimate: quasi,
        sup_factor_l1,
        epsilon_estimate,
        threshold,
        classification,
    })
}

/// A multiplier of norm at most one vanishing at `z_k` with modulus `epsilon`
/// at `z_j`: a rescaled Blaschke factor anchored at `z_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatingMultiplier {
    pub j: usize,
    pub k: usize,
    pub coeffs: CoefficientSequence,
    #[serde(with = "crate::real")]
    pub l1_norm: f64,
    pub value_at_zj: Complex64,
    pub value_at_zk: Complex64,
}

pub fn separating_multiplier(
    z: &NodeSet,
    sp: &SpaceParameters,
    j: usize,
    k: usize,
    epsilon: f64,
    m: usize,
) -> Result<SeparatingMultiplier> {
    let pts = z.points();
    if j >= pts.len() || k >= pts.len() || j == k {
        return Err(LpaError::invalid(format!("bad node pair ({j}, {k})")));
    }
    let factor = PBlaschkeFactor::new(pts[k], *sp);
    let rho = rho_p(pts[j], pts[k], sp)?;
    let s = epsilon / rho;
    let coeffs = factor.coeffs(m).scale(Complex64::new(s, 0.0));
    Ok(SeparatingMultiplier {
        j,
        k,
        l1_norm: s * factor.l1_norm(),
        value_at_zj: coeffs.eval(pts[j].value()),
        value_at_zk: coeffs.eval(pts[k].value()),
        coeffs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub monomials: usize,
    pub kernel_radii: Vec<f64>,
    pub kernel_angles: usize,
    pub random_polys: usize,
    pub random_degree: usize,
    pub seed: u64,
}

impl Default for ProbeSet {
    fn default() -> Self {
        ProbeSet {
            monomials: 16,
            kernel_radii: vec![0.5, 0.9, 0.99, 0.999],
            kernel_angles: 16,
            random_polys: 16,
            random_degree: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierBounds {
    #[serde(with = "crate::real")]
    pub lower: f64,
    #[serde(with = "crate::real")]
    pub upper: f64,
    pub best_probe: String,
}

/// Bracket the multiplier norm of `f`: the upper bound is `||f||_1`, the
/// lower bound the best `||f g||_p / ||g||_p` over the probes.
pub fn multiplier_norm_bounds(
    f: &CoefficientSequence,
    sp: &SpaceParameters,
    probes: &ProbeSet,
) -> Result<MultiplierBounds> {
    let p = sp.p();
    let mut list: Vec<(String, CoefficientSequence)> = Vec::new();
    for k in 0..probes.monomials {
        list.push((format!("z^{k}"), CoefficientSequence::monomial(k)));
    }
    for &r in &probes.kernel_radii {
        if !(r.is_finite() && (0.0..1.0).contains(&r)) {
            return Err(LpaError::invalid(format!("kernel radius {r} outside [0, 1)")));
        }
        let m = crate::default_truncation(r, 1e-14);
        for a in 0..probes.kernel_angles.max(1) {
            let th = 2.0 * PI * a as f64 / probes.kernel_angles.max(1) as f64;
            let w = Complex64::from_polar(r, th);
            list.push((format!("kernel({r}, {th:.6})"), CoefficientSequence::from_vec(powers(w, m))));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(probes.seed);
    for i in 0..probes.random_polys {
        let g = (0..=probes.random_degree)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        list.push((format!("random#{i}"), CoefficientSequence::from_vec(g)));
    }
    let ratios: Vec<f64> = list
        .par_iter()
        .map(|(_, g)| f.product(g).lp_norm(p) / g.lp_norm(p))
        .collect();
    let (mut lower, mut best) = (0.0, String::new());
    for ((name, _), r) in list.iter().zip(ratios) {
        if r > lower {
            lower = r;
            best = name.clone();
        }
    }
    Ok(MultiplierBounds { lower, upper: f.lp_norm(1.0), best_probe: best })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub pairs: usize,
    pub seed: u64,
    pub grid: usize,
    #[serde(with = "crate::real")]
    pub radius_max: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { pairs: 10_000, seed: 0, grid: 4096, radius_max: 0.95 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PickViolation {
    pub z: Complex64,
    pub w: Complex64,
    #[serde(with = "crate::real")]
    pub lhs: f64,
    #[serde(with = "crate::real")]
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchwarzPickReport {
    pub pairs_tested: usize,
    /// Pairs where the composed map has a pole in the closed disk, or where
    /// `f` leaves the disk, so the inequality does not apply.
    pub skipped: usize,
    pub violations: Vec<PickViolation>,
    /// Largest `lhs / rhs` over tested pairs.
    #[serde(with = "crate::real")]
    pub max_ratio: f64,
}

enum PairOutcome {
    Skipped,
    Tested { lhs: f64, rhs: f64 },
}

fn pick_pair(f: &[Complex64], q: f64, z: Complex64, w: Complex64, grid: usize) -> PairOutcome {
    let fz = horner(f, z);
    let fw = horner(f, w);
    if fz.norm() >= 1.0 || fw.norm() >= 1.0 {
        return PairOutcome::Skipped;
    }
    let aw = pow_s_raw(w, q - 1.0);
    let afw = pow_s_raw(fw, q - 1.0);
    // g(zeta) = phi_{f(w)}(f(phi_w^{-1}(zeta))) split into numerator and denominator
    let parts = |th: f64| -> (Complex64, Complex64) {
        let zeta = Complex64::from_polar(1.0, th);
        let u = (zeta + w) / (ONE + aw * zeta);
        let fu = horner(f, u);
        (fu - fw, ONE - afw * fu)
    };
    let mut best = (0.0f64, 0usize);
    let mut winding = 0.0;
    let mut prev_arg = parts(0.0).1.arg();
    let mut min_den = f64::INFINITY;
    for i in 0..grid {
        let th = 2.0 * PI * i as f64 / grid as f64;
        let (num, den) = parts(th);
        min_den = min_den.min(den.norm());
        let a = den.arg();
        let mut d = a - prev_arg;
        if d > PI {
            d -= 2.0 * PI;
        } else if d < -PI {
            d += 2.0 * PI;
        }
        winding += d;
        prev_arg = a;
        let v = num.norm() / den.norm();
        if v > best.0 {
            best = (v, i);
        }
    }
    let a = parts(0.0).1.arg();
    let mut d = a - prev_arg;
    if d > PI {
        d -= 2.0 * PI;
    } else if d < -PI {
        d += 2.0 * PI;
    }
    winding += d;
    if winding.abs() > PI || min_den < 1e-8 {
        return PairOutcome::Skipped;
    }
    // golden-section refinement around the best grid point
    let h = 2.0 * PI / grid as f64;
    let val = |th: f64| {
        let (n, d) = parts(th);
        n.norm() / d.norm()
    };
    let (mut lo, mut hi) = (2.0 * PI * best.1 as f64 / grid as f64 - h, 2.0 * PI * best.1 as f64 / grid as f64 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (val(x1), val(x2));
    for _ in 0..40 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = val(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = val(x2);
        }
    }
    let m = best.0.max(f1).max(f2);
    let (Ok(lhs), Ok(r)) = (rho_raw(fz, fw, q), rho_raw(z, w, q)) else {
        return PairOutcome::Skipped;
    };
    PairOutcome::Tested { lhs, rhs: m * r }
}

/// Sampled check of `rho(f(z), f(w)) <= M(w) rho(z, w)` for a multiplier `f`
/// with `||f||_1 <= 1`, where `M(w)` is the boundary maximum of the composed
/// map `phi_{f(w)} o f o phi_w^{-1}`.
pub fn schwarz_pick_check(
    f: &CoefficientSequence,
    sp: &SpaceParameters,
    samples: &SampleSpec,
) -> Result<SchwarzPickReport> {
    let l1 = f.lp_norm(1.0);
    if l1 > 1.0 + 1e-12 {
        return Err(LpaError::Precondition(format!(
            "multiplier bound ||f||_1 = {l1} exceeds one"
        )));
    }
    if samples.grid < 16 || !(samples.radius_max > 0.0 && samples.radius_max < 1.0) {
        return Err(LpaError::invalid("grid must have >= 16 points and radius_max lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(samples.seed);
    let pairs: Vec<(Complex64, Complex64)> = (0..samples.pairs)
        .map(|_| {
            let z = area_uniform(&mut rng) * samples.radius_max;
            let w = area_uniform(&mut rng) * samples.radius_max;
            (z, w)
        })
        .collect();
    let q = sp.q();
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|&(z, w)| pick_pair(f.coeffs(), q, z, w, samples.grid))
        .collect();
    let mut report = SchwarzPickReport { pairs_tested: 0, skipped: 0, violations: vec![], max_ratio: 0.0 };
    for ((z, w), o) in pairs.into_iter().zip(outcomes) {
        match o {
            PairOutcome::Skipped => report.skipped += 1,
            PairOutcome::Tested { lhs, rhs } => {
                report.pairs_tested += 1;
                if rhs > 0.0 {
                    report.max_ratio = report.max_ratio.max(lhs / rhs);
                }
                if lhs > rhs + 1e-9 {
                    report.violations.push(PickViolation { z, w, lhs, rhs });
                }
            }
        }
    }
    Ok(report)
}
