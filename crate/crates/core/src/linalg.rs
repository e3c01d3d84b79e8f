//! Dense helpers shared by the solvers: thin QR of tall complex matrices and
//! Newton methods for sums of powers of moduli.
//!
//! Complex vectors are differentiated in real form, with `dz = dx + i dy`
//! and gradients stored as the complex number `df/dx + i df/dy`.

use crate::error::{LpaError, Result};
use crate::sum::Neumaier;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// A tall `l x n` complex matrix stored row-major.
#[derive(Debug, Clone)]
pub(crate) struct Tall {
    pub l: usize,
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl Tall {
    pub fn from_columns(cols: &[Vec<Complex64>]) -> Self {
        let n = cols.len();
        let l = cols.first().map_or(0, |c| c.len());
        let mut data = vec![Complex64::default(); l * n];
        for (k, col) in cols.iter().enumerate() {
            for (j, &v) in col.iter().enumerate() {
                data[j * n + k] = v;
            }
        }
        Tall { l, n, data }
    }

    #[inline]
    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    /// `y = self * beta`
    pub fn apply(&self, beta: &[Complex64]) -> Vec<Complex64> {
        (0..self.l)
            .map(|j| self.row(j).iter().zip(beta).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self^* y`
    pub fn adjoint_apply(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut acc = vec![(Neumaier::default(), Neumaier::default()); self.n];
        for j in 0..self.l {
            for (k, a) in self.row(j).iter().enumerate() {
                let t = a.conj() * y[j];
                acc[k].0.add(t.re);
                acc[k].1.add(t.im);
            }
        }
        acc.iter().map(|(r, i)| Complex64::new(r.value(), i.value())).collect()
    }

    /// `self^T y` (no conjugation)
    pub fn transpose_apply(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut acc = vec![(Neumaier::default(), Neumaier::default()); self.n];
        for j in 0..self.l {
            for (k, a) in self.row(j).iter().enumerate() {
                let t = a * y[j];
                acc[k].0.add(t.re);
                acc[k].1.add(t.im);
            }
        }
        acc.iter().map(|(r, i)| Complex64::new(r.value(), i.value())).collect()
    }

    pub fn conj(&self) -> Tall {
        Tall { l: self.l, n: self.n, data: self.data.iter().map(|z| z.conj()).collect() }
    }
}

/// Thin QR, `A = Q R` with `Q` having orthonormal columns.
pub(crate) struct ThinQr {
    pub q: Tall,
    pub r: DMatrix<Complex64>,
}

impl ThinQr {
    pub fn new(a: &Tall) -> Result<Self> {
        if a.l < a.n {
            return Err(LpaError::Degenerate(format!(
                "{} columns but only {} rows; increase the truncation degree",
                a.n, a.l
            )));
        }
        let m = DMatrix::from_row_slice(a.l, a.n, &a.data);
        let qr = m.qr();
        let q = qr.q();
        let r = qr.r();
        let diag_max = (0..a.n).map(|k| r[(k, k)].norm()).fold(0.0, f64::max);
        let diag_min = (0..a.n).map(|k| r[(k, k)].norm()).fold(f64::INFINITY, f64::min);
        if !(diag_min > 1e-14 * diag_max) {
            return Err(LpaError::Degenerate("columns are numerically dependent".into()));
        }
        let mut data = Vec::with_capacity(a.l * a.n);
        for j in 0..a.l {
            for k in 0..a.n {
                data.push(q[(j, k)]);
            }
        }
        Ok(ThinQr { q: Tall { l: a.l, n: a.n, data }, r })
    }

    /// 2-norm condition number of `R`.
    pub fn condition(&self) -> f64 {
        let sv = self.r.clone().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Solve `R x = b`.
    pub fn solve_r(&self, b: &[Complex64]) -> Vec<Complex64> {
        let rhs = DVector::from_column_slice(b);
        let x = self.r.solve_upper_triangular(&rhs).expect("R is nonsingular");
        x.iter().cloned().collect()
    }

    /// Solve `R^T x = b` (no conjugation).
    pub fn solve_rt(&self, b: &[Complex64]) -> Vec<Complex64> {
        let rhs = DVector::from_column_slice(b);
        let x = self.r.transpose().solve_lower_triangular(&rhs).expect("R is nonsingular");
        x.iter().cloned().collect()
    }
}

/// Solve a symmetric positive semidefinite system, shifting the diagonal if
/// Cholesky fails.
pub(crate) fn solve_spd(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = (0..h.nrows()).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut shift = 0.0;
    for _ in 0..12 {
        let mut hs = h.clone();
        for i in 0..h.nrows() {
            hs[(i, i)] += shift;
        }
        if let Some(ch) = hs.cholesky() {
            let x = ch.solve(g);
            if x.iter().all(|v| v.is_finite()) {
                return Some(x);
            }
        }
        shift = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
    }
    None
}

#[inline]
fn weight(x: Complex64, eta2: f64, e: f64) -> (f64, f64) {
    // returns (s^(e/2-1), (e-2) s^(e/2-2)) with s = |x|^2 + eta^2
    if e == 2.0 {
        return (1.0, 0.0);
    }
    let s = x.norm_sqr() + eta2;
    if s == 0.0 {
        return (0.0, 0.0);
    }
    let w = s.powf(e / 2.0 - 1.0);
    (w, (e - 2.0) * w / s)
}

/// Rows per work unit in parallel reductions. Fixed, so that results do not
/// depend on the number of threads.
const CHUNK: usize = 2048;

fn chunks(l: usize) -> Vec<(usize, usize)> {
    (0..l.div_ceil(CHUNK)).map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(l))).collect()
}

fn add_block(h: &mut DMatrix<f64>, k: usize, l: usize, b: [[f64; 2]; 2]) {
    h[(2 * k, 2 * l)] += b[0][0];
    h[(2 * k, 2 * l + 1)] += b[0][1];
    h[(2 * k + 1, 2 * l)] += b[1][0];
    h[(2 * k + 1, 2 * l + 1)] += b[1][1];
}

fn symmetrize_upper(h: &mut DMatrix<f64>) {
    for k in 0..h.nrows() {
        for l in 0..k {
            h[(k, l)] = h[(l, k)];
        }
    }
}

/// Gradient (complex form, before the linear term) and real Hessian of
/// `(1/e) sum_j (|x_j|^2 + eta^2)^(e/2)` pulled back through `Q`.
fn affine_derivatives(q: &Tall, x: &[Complex64], eta2: f64, e: f64) -> (Vec<Complex64>, DMatrix<f64>) {
    let n = q.n;
    let parts: Vec<(Vec<Complex64>, DMatrix<f64>)> = chunks(q.l)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut grad = vec![Complex64::default(); n];
            let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
            let mut m = Vec::with_capacity(n);
            for j in lo..hi {
                let xj = x[j];
                let (om, tau) = weight(xj, eta2, e);
                if om == 0.0 && tau == 0.0 {
                    continue;
                }
                let row = q.row(j);
                let gy = xj * om;
                for (k, a) in row.iter().enumerate() {
                    grad[k] += a.conj() * gy;
                }
                let d = [
                    [om + tau * xj.re * xj.re, tau * xj.re * xj.im],
                    [tau * xj.re * xj.im, om + tau * xj.im * xj.im],
                ];
                // D B_k with B_k = [[ar, -ai], [ai, ar]]
                m.clear();
                for a in row {
                    m.push([
                        [d[0][0] * a.re + d[0][1] * a.im, -d[0][0] * a.im + d[0][1] * a.re],
                        [d[1][0] * a.re + d[1][1] * a.im, -d[1][0] * a.im + d[1][1] * a.re],
                    ]);
                }
                for (k, a) in row.iter().enumerate() {
                    for (l, ml) in m.iter().enumerate().skip(k) {
                        add_block(
                            &mut h,
                            k,
                            l,
                            [
                                [a.re * ml[0][0] + a.im * ml[1][0], a.re * ml[0][1] + a.im * ml[1][1]],
                                [-a.im * ml[0][0] + a.re * ml[1][0], -a.im * ml[0][1] + a.re * ml[1][1]],
                            ],
                        );
                    }
                }
            }
            (grad, h)
        })
        .collect();
    let mut grad = vec![Complex64::default(); n];
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for (g, hp) in parts {
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
        h += hp;
    }
    symmetrize_upper(&mut h);
    (grad, h)
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub beta: Vec<Complex64>,
    pub iterations: usize,
}

/// Minimize `F(b) = (1/e) sum_j (|x0_j + (Q b)_j|^2 + eta^2)^(e/2) - Re(b^T w)`
/// by damped Newton, following the smoothing schedule `etas` (each stage warm
/// starts the next). `Q` should be well conditioned.
pub(crate) fn newton_affine(
    q: &Tall,
    x0: Option<&[Complex64]>,
    w: &[Complex64],
    e: f64,
    etas: &[f64],
    beta0: Vec<Complex64>,
    max_iter: usize,
) -> Result<NewtonOutcome> {
    let n = q.n;
    let state = |beta: &[Complex64]| -> Vec<Complex64> {
        let mut x = q.apply(beta);
        if let Some(x0) = x0 {
            for (a, b) in x.iter_mut().zip(x0) {
                *a += b;
            }
        }
        x
    };
    let mut beta = beta0;
    let mut x = state(&beta);
    let mut iterations = 0;
    for &eta in etas {
        let eta2 = eta * eta;
        let objective = |x: &[Complex64], beta: &[Complex64]| -> f64 {
            let mut acc = Neumaier::default();
            for v in x {
                acc.add((v.norm_sqr() + eta2).powf(e / 2.0) / e);
            }
            let lin: Complex64 = beta.iter().zip(w).map(|(b, w)| b * w).sum();
            acc.add(-lin.re);
            acc.value()
        };
        let mut f = objective(&x, &beta);
        while iterations < max_iter {
            iterations += 1;
            let (grad, h) = affine_derivatives(q, &x, eta2, e);
            let mut g = DVector::<f64>::zeros(2 * n);
            for k in 0..n {
                g[2 * k] = grad[k].re - w[k].re;
                g[2 * k + 1] = grad[k].im + w[k].im;
            }
            let Some(dir) = solve_spd(&h, &(-&g)) else {
                return Err(LpaError::Instability("Newton system could not be solved".into()));
            };
            let slope = g.dot(&dir);
            if !(-slope > 1e-20 * (1.0 + f.abs())) {
                break;
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<Complex64> = (0..n)
                    .map(|k| beta[k] + Complex64::new(t * dir[2 * k], t * dir[2 * k + 1]))
                    .collect();
                let xt = state(&trial);
                let ft = objective(&xt, &trial);
                if ft < f && ft <= f + 1e-4 * t * slope {
                    beta = trial;
                    x = xt;
                    f = ft;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }
    Ok(NewtonOutcome { beta, iterations })
}

/// Smoothing schedule from `hi` down to `lo`, a decade at a time; a single
/// unsmoothed stage when `e >= 2`.
pub(crate) fn smoothing_schedule(e: f64, hi: f64, lo: f64) -> Vec<f64> {
    if e >= 2.0 {
        return vec![0.0];
    }
    let mut out = vec![];
    let mut t = hi;
    while t > lo {
        out.push(t);
        t /= 10.0;
    }
    out.push(lo);
    out
}

#[derive(Debug, Clone)]
pub(crate) struct ConstrainedOutcome {
    pub c: Vec<Complex64>,
    pub iterations: usize,
}

/// Minimize `sum_j (|c_j|^2 + eps^2)^(e/2)` subject to `Q^* c = rhs`, where
/// `Q` has orthonormal columns, along the smoothing schedule `epss` (relative
/// to the largest entry of the starting point). Without a start the
/// least-squares solution `Q rhs` is used.
pub(crate) fn newton_constrained(
    q: &Tall,
    rhs: &[Complex64],
    e: f64,
    start: Option<Vec<Complex64>>,
    epss: &[f64],
    max_iter: usize,
) -> Result<ConstrainedOutcome> {
    let n = q.n;
    let mut c = match start {
        Some(c) => c,
        None => q.apply(rhs),
    };
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(ConstrainedOutcome { c: q.apply(rhs), iterations: 0 });
    }
    for v in c.iter_mut() {
        *v /= scale;
    }
    let rhs_s: Vec<Complex64> = rhs.iter().map(|z| z / scale).collect();
    let project = |c: &mut Vec<Complex64>| {
        let res: Vec<Complex64> =
            q.adjoint_apply(c).iter().zip(&rhs_s).map(|(a, b)| b - a).collect();
        for (a, b) in c.iter_mut().zip(q.apply(&res)) {
            *a += b;
        }
    };
    project(&mut c);
    let apply2 = |m: &[[f64; 2]; 2], z: Complex64| -> Complex64 {
        Complex64::new(m[0][0] * z.re + m[0][1] * z.im, m[1][0] * z.re + m[1][1] * z.im)
    };
    let mut iterations = 0;
    for &eps in epss {
        let eps2 = eps * eps;
        let objective = |c: &[Complex64]| -> f64 {
            let mut acc = Neumaier::default();
            for v in c {
                acc.add((v.norm_sqr() + eps2).powf(e / 2.0));
            }
            acc.value()
        };
        let mut f = objective(&c);
        while iterations < max_iter {
            iterations += 1;
            let mut g = Vec::with_capacity(q.l);
            let mut hinv = Vec::with_capacity(q.l);
            for v in &c {
                let s = v.norm_sqr() + eps2;
                let (alpha, b) = if e == 2.0 {
                    (2.0, 0.0)
                } else if s == 0.0 {
                    (0.0, 0.0)
                } else {
                    let a = e * s.powf(e / 2.0 - 1.0);
                    (a, a * (e - 2.0) / s)
                };
                g.push(*v * alpha);
                if !(alpha.is_finite() && alpha > 0.0) {
                    hinv.push([[0.0, 0.0], [0.0, 0.0]]);
                    continue;
                }
                // (alpha I + b u u^T)^-1 = (I - b/(alpha + b|u|^2) u u^T) / alpha
                let k = b / (alpha + b * v.norm_sqr());
                hinv.push([
                    [(1.0 - k * v.re * v.re) / alpha, -k * v.re * v.im / alpha],
                    [-k * v.re * v.im / alpha, (1.0 - k * v.im * v.im) / alpha],
                ]);
            }
            // Schur complement of the KKT system. Constraint k has coefficient
            // conj(Q_jk) on coordinate j, so A_kj^T lambda = Q_jk lambda.
            let parts: Vec<(DMatrix<f64>, DVector<f64>)> = chunks(q.l)
                .into_par_iter()
                .map(|(lo, hi)| {
                    let mut s_mat = DMatrix::<f64>::zeros(2 * n, 2 * n);
                    let mut r = DVector::<f64>::zeros(2 * n);
                    let mut cols = Vec::with_capacity(n);
                    for j in lo..hi {
                        let row = q.row(j);
                        let hg = apply2(&hinv[j], g[j]);
                        cols.clear();
                        for a in row {
                            cols.push((
                                apply2(&hinv[j], *a),
                                apply2(&hinv[j], *a * Complex64::new(0.0, 1.0)),
                            ));
                        }
                        for (k, a) in row.iter().enumerate() {
                            let ac = a.conj();
                            let t = ac * hg;
                            r[2 * k] -= t.re;
                            r[2 * k + 1] -= t.im;
                            for (l, (c_re, c_im)) in cols.iter().enumerate().skip(k) {
                                let u = ac * c_re;
                                let v = ac * c_im;
                                add_block(&mut s_mat, k, l, [[u.re, v.re], [u.im, v.im]]);
                            }
                        }
                    }
                    (s_mat, r)
                })
                .collect();
            let mut s_mat = DMatrix::<f64>::zeros(2 * n, 2 * n);
            let mut r = DVector::<f64>::zeros(2 * n);
            for (sp, rp) in parts {
                s_mat += sp;
                r += rp;
            }
            symmetrize_upper(&mut s_mat);
            let Some(lambda) = solve_spd(&s_mat, &r) else {
                return Err(LpaError::Instability("KKT system could not be solved".into()));
            };
            let lam: Vec<Complex64> =
                (0..n).map(|k| Complex64::new(lambda[2 * k], lambda[2 * k + 1])).collect();
            let mut dir = Vec::with_capacity(q.l);
            let mut slope = Neumaier::default();
            for j in 0..q.l {
                let corr: Complex64 = q.row(j).iter().zip(&lam).map(|(a, l)| a * l).sum();
                let d = -apply2(&hinv[j], g[j] + corr);
                slope.add(g[j].re * d.re + g[j].im * d.im);
                dir.push(d);
            }
            let slope = slope.value();
            if !(-slope > 1e-20 * f) {
                break;
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<Complex64> = c.iter().zip(&dir).map(|(a, d)| a + d * t).collect();
                let ft = objective(&trial);
                if ft < f && ft <= f + 1e-4 * t * slope {
                    c = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        project(&mut c);
    }
    for v in c.iter_mut() {
        *v *= scale;
    }
    Ok(ConstrainedOutcome { c, iterations })
}
