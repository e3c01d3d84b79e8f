#![allow(dead_code)]

use lpa::interp::{NodeSet, TargetVector};
use lpa::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the disk of radius `r_max`.
pub fn disk_point(rng: &mut ChaCha8Rng, r_max: f64) -> Complex64 {
    let r = r_max * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
}

/// `n` nodes in `|z| <= r_max` with pairwise distances at least `min_gap`.
pub fn nodes(rng: &mut ChaCha8Rng, n: usize, r_max: f64, min_gap: f64) -> NodeSet {
    let mut pts: Vec<Complex64> = Vec::new();
    while pts.len() < n {
        let z = disk_point(rng, r_max);
        if pts.iter().all(|w| (w - z).norm() >= min_gap) {
            pts.push(z);
        }
    }
    NodeSet::from_complex(&pts).unwrap()
}

pub fn targets(rng: &mut ChaCha8Rng, n: usize) -> TargetVector {
    TargetVector::new(
        (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect(),
    )
    .unwrap()
}

/// Plain `l^e` norm, summed in order without compensation.
pub fn naive_norm(v: &[Complex64], e: f64) -> f64 {
    v.iter().map(|z| z.norm().powf(e)).sum::<f64>().powf(1.0 / e)
}

pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::default(), |acc, &a| acc * z + a)
}
