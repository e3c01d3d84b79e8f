use super::CarlesonWindow;
use crate::error::{LpaError, Result};
use crate::space::{DiskPoint, SpaceParameters};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub theta: f64,
    pub r: f64,
}

impl PolarPoint {
    fn of(z: Complex64) -> Self {
        PolarPoint { theta: z.arg(), r: z.norm() }
    }
}

fn window_outline(w: &CarlesonWindow, samples: usize) -> Vec<PolarPoint> {
    let (t0, h) = (w.theta0(), w.h());
    let mut out = Vec::new();
    for i in 0..=samples {
        out.push(PolarPoint { theta: t0 + h * i as f64 / samples as f64, r: 1.0 - h });
    }
    for i in 0..=samples {
        out.push(PolarPoint { theta: t0 + h * (samples - i) as f64 / samples as f64, r: 1.0 });
    }
    out.push(PolarPoint { theta: t0, r: 1.0 - h });
    out
}

fn window_samples(w: &CarlesonWindow, n: usize) -> Vec<Complex64> {
    let mut out = Vec::new();
    for i in 0..=n {
        for k in 0..=n {
            let r = 1.0 - w.h() + w.h() * k as f64 / n as f64;
            let th = w.theta0() + w.h() * i as f64 / n as f64;
            out.push(Complex64::from_polar(r.min(1.0 - 1e-15), th));
        }
    }
    out
}

/// `{z : |(a - z)/(1 - conj(a) z)| >= c}`, the complement in the disk of the
/// pseudo-hyperbolic disk of radius `c` about `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobiusRegion {
    pub a: Complex64,
    pub c: f64,
    /// Center and radius of the excluded Euclidean disk.
    pub center: Complex64,
    pub radius: f64,
    /// Intersections of the boundary circle with the line through 0 and `a`,
    /// as signed distances along the direction of `a`.
    pub axis_roots: (f64, f64),
    pub window: CarlesonWindow,
    /// `(|a|^p + (1 - |a|^2)^p / (1 - |a|^p)) / c^p`, the factor multiplying
    /// the Carleson constant in the bound for the region's mass.
    pub bound_factor: f64,
    pub boundary: Vec<PolarPoint>,
    pub window_outline: Vec<PolarPoint>,
}

impl MobiusRegion {
    pub fn contains(&self, z: Complex64) -> bool {
        let v = ((self.a - z) / (Complex64::new(1.0, 0.0) - self.a.conj() * z)).norm();
        z.norm() < 1.0 && v >= self.c - 1e-12
    }

    /// Whether a grid of points of the window lies inside the region.
    pub fn window_inside(&self, grid: usize) -> bool {
        window_samples(&self.window, grid).into_iter().all(|z| self.contains(z))
    }
}

pub fn mobius_region(a: DiskPoint, c: f64, sp: &SpaceParameters) -> Result<MobiusRegion> {
    if !(c > 0.0 && c < 1.0) {
        return Err(LpaError::invalid(format!("c must lie in (0, 1), got {c}")));
    }
    let r = a.modulus();
    let dir = if r > 0.0 { a.value() / r } else { Complex64::new(1.0, 0.0) };
    let den = 1.0 - c * c * r * r;
    let xc = r * (1.0 - c * c) / den;
    let radius = c * (1.0 - r * r) / den;
    let x_plus = xc + radius;
    let delta = 1.0 - x_plus;
    let window = CarlesonWindow::new(dir.arg() - delta / 2.0, delta)?;
    let p = sp.p();
    let bound_factor =
        (r.powf(p) + (1.0 - r * r).powf(p) / (1.0 - r.powf(p))) / c.powf(p);
    let center = dir * xc;
    let boundary = (0..=720)
        .map(|i| PolarPoint::of(center + Complex64::from_polar(radius, TAU * i as f64 / 720.0)))
        .collect();
    Ok(MobiusRegion {
        a: a.value(),
        c,
        center,
        radius,
        axis_roots: (xc - radius, x_plus),
        window_outline: window_outline(&window, 64),
        window,
        bound_factor,
        boundary,
    })
}

/// `{z in D : |1 - a z| <= 1/c}`, where the kernel at `a` has modulus at least `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRegion {
    pub a: Complex64,
    pub c: f64,
    /// `1/a` and `1/(|a| c)`.
    pub center: Complex64,
    pub radius: f64,
    /// Radial extent `(1 - (1 - |a|) c) / (|a| c)`; nonpositive when the region is empty.
    pub width: f64,
    /// Largest Carleson window centered on the ray of `1/a` inside the region.
    pub window: Option<CarlesonWindow>,
    /// `1 / ((1 - |a|^p) c^p)`.
    pub bound_factor: f64,
    pub boundary: Vec<PolarPoint>,
    pub window_outline: Vec<PolarPoint>,
}

impl KernelRegion {
    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() < 1.0 && (z - self.center).norm() <= self.radius * (1.0 + 1e-12)
    }

    pub fn window_inside(&self, grid: usize) -> bool {
        match &self.window {
            Some(w) => window_samples(w, grid).into_iter().all(|z| self.contains(z)),
            None => true,
        }
    }
}

pub fn kernel_region(a: DiskPoint, c: f64, sp: &SpaceParameters) -> Result<KernelRegion> {
    if !(c > 1.0 && c.is_finite()) {
        return Err(LpaError::invalid(format!("c must exceed 1, got {c}")));
    }
    let r = a.modulus();
    if r == 0.0 {
        return Err(LpaError::invalid("the kernel at 0 is constant; a must be nonzero"));
    }
    let center = Complex64::new(1.0, 0.0) / a.value();
    let d = 1.0 / r;
    let radius = 1.0 / (r * c);
    let width = (1.0 - (1.0 - r) * c) / (r * c);
    let phi = center.arg();
    let fits = |delta: f64| {
        [1.0 - delta, 1.0].iter().all(|&rr| {
            let dist2 = rr * rr + d * d - 2.0 * rr * d * (delta / 2.0).cos();
            dist2 <= radius * radius
        })
    };
    let window = if width > 0.0 {
        let (mut lo, mut hi) = (0.0, width.min(1.0 - 1e-15));
        if fits(hi) {
            lo = hi;
        } else {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if fits(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        if lo > 0.0 {
            Some(CarlesonWindow::new(phi - lo / 2.0, lo)?)
        } else {
            None
        }
    } else {
        None
    };
    let mut boundary: Vec<PolarPoint> = (0..=2048)
        .map(|i| center + Complex64::from_polar(radius, TAU * i as f64 / 2048.0))
        .filter(|z| z.norm() <= 1.0)
        .map(PolarPoint::of)
        .collect();
    boundary.extend(
        (0..=2048)
            .map(|i| Complex64::from_polar(1.0, TAU * i as f64 / 2048.0))
            .filter(|z| (z - center).norm() <= radius)
            .map(PolarPoint::of),
    );
    Ok(KernelRegion {
        a: a.value(),
        c,
        center,
        radius,
        width,
        window_outline: window.map_or(vec![], |w| window_outline(&w, 64)),
        window,
        bound_factor: 1.0 / ((1.0 - r.powf(sp.p())) * c.powf(sp.p())),
        boundary,
    })
}

/// The configuration with `c = 1 - h` and `a = h^(1/p) c`.
pub fn figure_mobius(sp: &SpaceParameters, h: f64) -> Result<MobiusRegion> {
    if !(h > 0.0 && h < 1.0) {
        return Err(LpaError::invalid("h must lie in (0, 1)"));
    }
    let c = 1.0 - h;
    mobius_region(DiskPoint::from_re_im(h.powf(1.0 / sp.p()) * c, 0.0)?, c, sp)
}

/// The configuration with `c = 1/h` and `a = (1 - h^(p-1))^(1/p)`.
pub fn figure_kernel(sp: &SpaceParameters, h: f64) -> Result<KernelRegion> {
    if !(h > 0.0 && h < 1.0) {
        return Err(LpaError::invalid("h must lie in (0, 1)"));
    }
    let p = sp.p();
    kernel_region(DiskPoint::from_re_im((1.0 - h.powf(p - 1.0)).powf(1.0 / p), 0.0)?, 1.0 / h, sp)
}
