mod common;

use common::{c, rng};
use lpa::carleson::{
    carleson_constant, counterexample_run, embedding_duality_experiment, figure_kernel, figure_mobius,
    kernel_region, mobius_region, window_mass, Atom, AtomicMeasure, CarlesonWindow, CounterexampleConfig,
    EmbeddingBudget,
};
use lpa::interp::NodeSet;
use lpa::{Complex64, DiskPoint, LpaError, SpaceParameters};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::TAU;

/// Sup of `mu(S) / h` over windows on a `grid x grid` lattice of
/// `theta0 = 2 pi i / grid`, `h = k / grid`.
fn brute_force(mu: &AtomicMeasure, grid: usize) -> f64 {
    let mut best = 0.0f64;
    for i in 0..grid {
        let theta0 = TAU * i as f64 / grid as f64;
        for k in 1..grid {
            let h = k as f64 / grid as f64;
            let mut mass = 0.0;
            for a in mu.atoms() {
                let r = a.point.norm();
                let d = (a.point.arg() - theta0).rem_euclid(TAU);
                let inside_angle = d <= h + 1e-12 || d >= TAU - 1e-12;
                if r >= 1.0 - h - 1e-12 && inside_angle {
                    mass += a.mass;
                }
            }
            best = best.max(mass / h);
        }
    }
    best
}

/// Atoms with `1 - r` in `[0.15, 0.5]` and angles on the `2 pi / 400` lattice.
fn lattice_measure(seed: u64) -> AtomicMeasure {
    let mut r = rng(seed);
    let n = r.random_range(1..=10);
    let atoms = (0..n)
        .map(|_| {
            let depth = r.random_range(60..=200) as f64 / 400.0;
            let angle = TAU * r.random_range(0..400) as f64 / 400.0;
            Atom { point: Complex64::from_polar(1.0 - depth, angle), mass: r.random_range(0.01..1.0) }
        })
        .collect();
    AtomicMeasure::new(atoms).unwrap()
}

#[test]
fn constant_matches_grid_search() {
    for seed in 0..6 {
        let mu = lattice_measure(seed);
        let exact = carleson_constant(&mu);
        let brute = brute_force(&mu, 400);
        assert!(brute <= exact.value * (1.0 + 1e-9), "seed {seed}");
        assert!((exact.value - brute).abs() <= 0.02 * exact.value, "seed {seed}: {} vs {brute}", exact.value);
        let w = exact.window.unwrap();
        assert!((window_mass(&mu, &w) / w.h() - exact.value).abs() <= 1e-9 * exact.value);
    }
}

#[test]
fn single_atom_constant() {
    let mu = AtomicMeasure::new(vec![Atom { point: c(0.7, 0.0), mass: 0.6 }]).unwrap();
    let k = carleson_constant(&mu);
    assert!((k.value - 2.0).abs() < 1e-12);
    assert!(AtomicMeasure::new(vec![Atom { point: c(1.0, 0.0), mass: 1.0 }]).is_err());
    assert!(AtomicMeasure::new(vec![Atom { point: c(0.1, 0.0), mass: -1.0 }]).is_err());
    assert!(CarlesonWindow::new(0.0, 1.0).is_err());
}

#[test]
fn measure_json_format() {
    let mu: AtomicMeasure = serde_json::from_str(r#"{"atoms": [[0.5, 0.0, 0.25], [0.0, -0.5, 0.5]]}"#).unwrap();
    assert_eq!(mu.atoms().len(), 2);
    assert!((mu.total_mass() - 0.75).abs() < 1e-15);
    let text = serde_json::to_string(&mu).unwrap();
    assert_eq!(serde_json::from_str::<AtomicMeasure>(&text).unwrap(), mu);
}

#[test]
fn embedding_consistent_on_small_sets() {
    for (pts, p) in [(vec![c(0.3, 0.1), c(-0.5, 0.2)], 1.5), (vec![c(0.6, 0.0), c(0.0, 0.6), c(-0.6, 0.0)], 3.0)] {
        let z = NodeSet::from_complex(&pts).unwrap();
        let sp = SpaceParameters::new(p).unwrap();
        let rep = embedding_duality_experiment(&z, &sp, lpa::truncation_for(z.points()), &EmbeddingBudget::default()).unwrap();
        assert!(rep.consistency_flag, "C = {}, K^(1/p) = {}", rep.c_estimate, rep.k_root);
        assert!(rep.witness_ratio <= rep.k_estimate * (1.0 + 1e-9));
    }
}

#[test]
fn counterexample_small() {
    let sp = SpaceParameters::new(4.0).unwrap();
    let cfg = CounterexampleConfig { epsilon: 0.05, n_atoms: 2000, norm_terms: 10_000 };
    let prof = counterexample_run(&sp, &cfg).unwrap();
    assert!(prof.carleson.value <= 1.0 + 1e-9);
    assert!(prof.rows.windows(2).all(|w| w[1].s_m >= w[0].s_m));
    assert!(prof.rows.windows(2).all(|w| w[1].norm_partial >= w[0].norm_partial));
    assert!(prof.tail_lower <= prof.tail_upper);
    let bad = CounterexampleConfig { epsilon: 0.6, ..cfg };
    assert!(matches!(counterexample_run(&sp, &bad), Err(LpaError::InvalidArgument(_))));
    let sp2 = SpaceParameters::new(2.0).unwrap();
    assert!(counterexample_run(&sp2, &cfg).is_err());
}

#[test]
fn figure_windows_inside_regions() {
    let m = figure_mobius(&SpaceParameters::new(1.5).unwrap(), 0.1).unwrap();
    assert!(m.window_inside(400));
    assert!((m.axis_roots.1 - (1.0 - m.window.h())).abs() < 1e-15);
    let k = figure_kernel(&SpaceParameters::new(4.0).unwrap(), 0.125).unwrap();
    assert!(k.window.is_some());
    assert!(k.window_inside(400));
}

#[test]
fn centered_mobius_region_is_annulus() {
    let sp = SpaceParameters::new(1.5).unwrap();
    let reg = mobius_region(DiskPoint::from_re_im(0.0, 0.0).unwrap(), 0.5, &sp).unwrap();
    assert!(reg.center.norm() < 1e-15);
    assert!(reg.boundary.iter().all(|pt| (pt.r - 0.5).abs() < 1e-12));
    assert!(kernel_region(DiskPoint::from_re_im(0.0, 0.0).unwrap(), 2.0, &sp).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constant_scales_and_bounds_windows(seed in 0u64..10_000, lambda in 0.1f64..10.0, t0 in 0.0f64..TAU, h in 0.01f64..0.99) {
        let mu = lattice_measure(seed);
        let k = carleson_constant(&mu).value;
        let ks = carleson_constant(&mu.scaled(lambda).unwrap()).value;
        prop_assert!((ks - lambda * k).abs() <= 1e-9 * lambda * k);
        let w = CarlesonWindow::new(t0, h).unwrap();
        prop_assert!(window_mass(&mu, &w) / h <= k * (1.0 + 1e-9));
    }

    #[test]
    fn mobius_region_contains_its_window(r in 0.05f64..0.9, theta in 0.0f64..TAU, cc in 0.5f64..0.95) {
        let sp = SpaceParameters::new(1.5).unwrap();
        let reg = mobius_region(DiskPoint::from_polar(r, theta).unwrap(), cc, &sp).unwrap();
        prop_assert!(reg.window_inside(64));
    }
}
