//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line to stdout (bypassing capture).

use lpa::carleson::{
    carleson_constant, counterexample_run, embedding_duality_experiment, Atom, AtomicMeasure,
    CounterexampleConfig, EmbeddingBudget,
};
use lpa::extremal::{extremal_pair, ExtremalConfig};
use lpa::gramian::{opnorm_multistart, phi_psi_identity_check, PhiMatrix, PowerConfig, PsiMatrix};
use lpa::interp::{generate_sequence, min_norm_interpolate, MinNormConfig, NodeSet, SequenceSpec, TargetVector};
use lpa::separation::{quasi_triangle_scan, rho_p, separating_multiplier, weak_separation_classify};
use lpa::series::kernel_coeffs;
use lpa::{default_truncation, truncation_for, Complex64, DiskPoint, SpaceParameters, DEFAULT_TAIL_TOL};
use lpa_cli::{run, ExperimentConfig, NodeSource, Subcommand};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::io::Write;
use std::time::{Duration, Instant};

fn report(id: &str, pass: bool, started: Instant, budget: Duration, detail: String) {
    let elapsed = started.elapsed();
    let ok = pass && elapsed <= budget;
    let line = format!(
        "criterion {id}: {} {detail} [{:.2}s of {}s]\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(ok, "{}", line.trim());
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn disk_point(r: &mut ChaCha8Rng, r_max: f64) -> Complex64 {
    Complex64::from_polar(r_max * r.random::<f64>().sqrt(), r.random_range(0.0..TAU))
}

fn nodes(r: &mut ChaCha8Rng, n: usize, r_max: f64, gap: f64) -> NodeSet {
    let mut pts: Vec<Complex64> = Vec::new();
    while pts.len() < n {
        let z = disk_point(r, r_max);
        if pts.iter().all(|w| (w - z).norm() >= gap) {
            pts.push(z);
        }
    }
    NodeSet::from_complex(&pts).unwrap()
}

fn targets(r: &mut ChaCha8Rng, n: usize) -> TargetVector {
    TargetVector::new((0..n).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect()).unwrap()
}

fn norm(v: &[Complex64], e: f64) -> f64 {
    v.iter().map(|z| z.norm().powf(e)).sum::<f64>().powf(1.0 / e)
}

#[test]
fn criterion_01_kernel_norm() {
    let t = Instant::now();
    let ws = [c(0.1, 0.0), c(0.5, 0.0), c(0.9, 0.9) / 2f64.sqrt() * 0.99];
    let mut worst = 0.0f64;
    for &w in &ws {
        for q in [1.5, 2.0, 4.0] {
            let m = default_truncation(w.norm(), DEFAULT_TAIL_TOL);
            let k = kernel_coeffs(DiskPoint::new(w).unwrap(), m);
            let exact = (1.0 - w.norm().powf(q)).powf(-1.0 / q);
            worst = worst.max((k.lp_norm(q) - exact).abs());
        }
    }
    report("1", worst <= 1e-8, t, secs(1), format!("max |truncated - closed form| = {worst:.2e} (tol 1e-8)"));
}

#[test]
fn criterion_02_single_node() {
    let t = Instant::now();
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let z0 = disk_point(&mut r, 0.95);
        let w0 = c(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let sp = SpaceParameters::new(r.random_range(1.2..5.0)).unwrap();
        let z = NodeSet::from_complex(&[z0]).unwrap();
        let res = min_norm_interpolate(&z, &TargetVector::new(vec![w0]).unwrap(), &sp, &MinNormConfig::new(truncation_for(z.points())))
            .unwrap();
        let exact = w0.norm() * (1.0 - z0.norm().powf(sp.q())).powf(1.0 / sp.q());
        worst = worst.max((res.primal_norm - exact).abs());
    }
    report("2", worst <= 1e-7, t, secs(10), format!("max error {worst:.2e} over 20 triples (tol 1e-7)"));
}

#[test]
fn criterion_03_hilbert_oracle() {
    let t = Instant::now();
    let sp = SpaceParameters::new(2.0).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let mut r = rng(300 + seed);
        let n = r.random_range(1..=5);
        let z = nodes(&mut r, n, 0.85, 0.05);
        let w = targets(&mut r, n);
        let res = min_norm_interpolate(&z, &w, &sp, &MinNormConfig::new(truncation_for(z.points()))).unwrap();
        let v = z.values();
        let one = c(1.0, 0.0);
        let g = DMatrix::from_fn(n, n, |j, k| one / (one - v[j] * v[k].conj()));
        let wv = DVector::from_column_slice(w.values());
        let a = g.lu().solve(&wv).unwrap();
        let oracle = wv.dotc(&a).re.sqrt();
        worst = worst.max((res.primal_norm - oracle).abs());
    }
    report("3", worst <= 1e-7, t, secs(30), format!("max |primal - Gram oracle| = {worst:.2e} over 50 seeds (tol 1e-7)"));
}

#[test]
fn criterion_04_duality_gap() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for seed in 0..30u64 {
        let mut r = rng(400 + seed);
        let p = if seed % 2 == 0 { 1.5 } else { 3.0 };
        let sp = SpaceParameters::new(p).unwrap();
        let n = r.random_range(1..=6);
        let z = nodes(&mut r, n, 0.8, 0.08);
        let w = targets(&mut r, n);
        let m = truncation_for(z.points()).max(60);
        let res = min_norm_interpolate(&z, &w, &sp, &MinNormConfig::new(m)).unwrap();
        worst = worst.max(res.duality_gap / (1.0 + res.primal_norm));
        count += 1;
    }
    report("4", worst <= 1e-6, t, secs(300), format!("max gap/(1+primal) = {worst:.2e} over {count} instances (tol 1e-6)"));
}

struct CertStats {
    worst_pairing: f64,
    worst_image: f64,
    worst_back: f64,
    worst_residual: f64,
    worst_increment: f64,
}

fn certificate_sweep() -> (f64, CertStats) {
    let sp2 = SpaceParameters::new(2.0).unwrap();
    let mut svd_err = 0.0f64;
    for seed in 0..30u64 {
        let mut r = rng(500 + seed);
        let n = r.random_range(1..=8);
        let z = nodes(&mut r, n, 0.8, 0.05);
        let m = truncation_for(z.points());
        let psi = PsiMatrix::new(&z, &sp2, m).unwrap();
        let cert = opnorm_multistart(&psi, &PowerConfig::default()).unwrap();
        let v = z.values();
        let a = DMatrix::from_fn(m + 1, n, |k, j| v[j].powu(k as u32) * (1.0 - v[j].norm_sqr()).sqrt());
        svd_err = svd_err.max((cert.best.norm_estimate - a.singular_values().max()).abs());
    }
    let mut st = CertStats { worst_pairing: 0.0, worst_image: 0.0, worst_back: 0.0, worst_residual: 0.0, worst_increment: 0.0 };
    for seed in 0..20u64 {
        let mut r = rng(550 + seed);
        let p = if seed % 2 == 0 { 1.5 } else { 3.0 };
        let sp = SpaceParameters::new(p).unwrap();
        let n = r.random_range(2..=6);
        let z = nodes(&mut r, n, 0.8, 0.08);
        let psi = PsiMatrix::new(&z, &sp, truncation_for(z.points())).unwrap();
        let cert = opnorm_multistart(&psi, &PowerConfig::default()).unwrap().best;
        let nu = cert.norm_estimate;
        let image = psi.apply(&cert.a_tilde);
        let back = psi.transpose_apply(&cert.b_tilde);
        let pair: Complex64 = cert.b_tilde.iter().zip(&image).map(|(b, a)| b * a).sum();
        st.worst_pairing = st.worst_pairing.max((pair - nu).norm());
        st.worst_image = st.worst_image.max((norm(&image, sp.q()) - nu).abs() / nu);
        st.worst_back = st.worst_back.max((norm(&back, p) - nu).abs() / nu);
        st.worst_residual = st.worst_residual.max(cert.residual_a.max(cert.residual_b));
        st.worst_increment = st.worst_increment.min(cert.min_increment);
    }
    (svd_err, st)
}

#[test]
fn criterion_05_06_operator_norm() {
    let t = Instant::now();
    let (svd_err, st) = certificate_sweep();
    let elapsed = t;
    report(
        "5",
        svd_err <= 1e-6 && st.worst_residual <= 1e-8 && st.worst_increment >= -1e-12,
        elapsed,
        secs(60),
        format!(
            "SVD error {svd_err:.2e} (tol 1e-6), fixed-point residual {:.2e} (tol 1e-8), min step increment {:.2e} (tol -1e-12)",
            st.worst_residual, st.worst_increment
        ),
    );
    report(
        "6",
        st.worst_pairing <= 1e-8 && st.worst_image <= 1e-9 && st.worst_back <= 1e-8,
        elapsed,
        secs(60),
        format!(
            "|<b,Pa> - nu| = {:.2e} (1e-8), |‖Pa‖_q - nu|/nu = {:.2e} (1e-9), |‖P^T b‖_p - nu|/nu = {:.2e} (1e-8)",
            st.worst_pairing, st.worst_image, st.worst_back
        ),
    );
}

#[test]
fn criterion_07_phi_psi_identity() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for (seed, p) in [(1u64, 2.0), (2, 3.0), (3, 2.0), (4, 3.0)] {
        let mut r = rng(700 + seed);
        let sp = SpaceParameters::new(p).unwrap();
        let z = nodes(&mut r, 3, 0.8, 0.1);
        let m = truncation_for(z.points());
        let phi = PhiMatrix::from_nodes(&z, &sp, &ExtremalConfig::new(m)).unwrap();
        let psi = PsiMatrix::new(&z, &sp, m).unwrap();
        worst = worst.max(phi_psi_identity_check(&phi, &psi, 1e-6).unwrap().max_residual);
    }
    report("7", worst <= 1e-6, t, secs(60), format!("max |(Phi Psi)_jk - delta_jk| = {worst:.2e} (tol 1e-6)"));
}

#[test]
fn criterion_08_09_extremal_relations() {
    let t = Instant::now();
    let mut norming = 0.0f64;
    let mut recip = 0.0f64;
    for seed in 0..20u64 {
        let mut r = rng(800 + seed);
        let p = [1.5, 2.0, 3.0, 4.0][(seed % 4) as usize];
        let sp = SpaceParameters::new(p).unwrap();
        let n = r.random_range(2..=5);
        let z = nodes(&mut r, n, 0.8, 0.08);
        let level = r.random_range(0..n);
        let j = r.random_range(0..=level);
        let pair = extremal_pair(&z, j, level, &sp, &ExtremalConfig::new(truncation_for(z.points())), None).unwrap();
        norming = norming.max(pair.norming_residual(&sp).unwrap());
        recip = recip.max((pair.f_norm * pair.g_norm - 1.0).abs());
    }
    report("8", norming <= 1e-6, t, secs(120), format!("max norming residual {norming:.2e} over 20 instances (tol 1e-6)"));
    report("9", recip <= 1e-6, t, secs(120), format!("max |f_norm g_norm - 1| = {recip:.2e} (tol 1e-6)"));
}

#[test]
fn criterion_10_quasimetric() {
    let t = Instant::now();
    let sp2 = SpaceParameters::new(2.0).unwrap();
    let mut r = rng(10);
    let mut sym = 0.0f64;
    let mut exact_origin = true;
    let origin = DiskPoint::from_re_im(0.0, 0.0).unwrap();
    for _ in 0..100_000 {
        let a = DiskPoint::new(disk_point(&mut r, 1.0 - 1e-9)).unwrap();
        let b = DiskPoint::new(disk_point(&mut r, 1.0 - 1e-9)).unwrap();
        sym = sym.max((rho_p(a, b, &sp2).unwrap() - rho_p(b, a, &sp2).unwrap()).abs());
        for p in [1.5, 2.0, 4.0] {
            let sp = SpaceParameters::new(p).unwrap();
            exact_origin &= rho_p(origin, a, &sp).unwrap() == a.modulus();
        }
    }
    let tri = quasi_triangle_scan(&sp2, 100_000, 10).unwrap().sup_ratio;
    let q4 = quasi_triangle_scan(&SpaceParameters::new(4.0).unwrap(), 100_000, 10).unwrap().sup_ratio;
    report(
        "10",
        sym <= 1e-14 && tri <= 1.0 + 1e-12 && exact_origin,
        t,
        secs(30),
        format!("rho_2 asymmetry {sym:.2e} (1e-14), triangle sup {tri:.15} (1+1e-12), rho_p(0,z)=|z| exact: {exact_origin}, p=4 quasi constant (recorded) {q4:.6}"),
    );
}

#[test]
fn criterion_11_weak_separation() {
    let t = Instant::now();
    let sp = SpaceParameters::new(3.0).unwrap();
    let z = generate_sequence(&SequenceSpec::RadialVinogradov { count: 10, sigma: 0.5 }).unwrap();
    let rep = weak_separation_classify(&z, &sp, 1e-4).unwrap();
    let eps = rep.epsilon_estimate;
    let m = truncation_for(z.points());
    let (mut l1, mut at_j, mut at_k) = (0.0f64, 0.0f64, 0.0f64);
    for j in 0..10 {
        for k in 0..10 {
            if j != k {
                let s = separating_multiplier(&z, &sp, j, k, eps, m).unwrap();
                l1 = l1.max(s.l1_norm);
                at_j = at_j.max((s.value_at_zj.norm() - eps).abs());
                at_k = at_k.max(s.value_at_zk.norm());
            }
        }
    }
    report(
        "11",
        l1 <= 1.0 + 1e-9 && at_j <= 1e-9 && at_k <= 1e-9,
        t,
        secs(60),
        format!("eps = {eps:.4e}, max ‖phi‖_1 = {l1:.12}, max ||phi(z_j)| - eps| = {at_j:.2e}, max |phi(z_k)| = {at_k:.2e}"),
    );
}

fn counterexample() -> lpa::carleson::DivergenceProfile {
    let sp = SpaceParameters::new(4.0).unwrap();
    counterexample_run(&sp, &CounterexampleConfig { epsilon: 0.05, n_atoms: 10_000, norm_terms: 100_000 }).unwrap()
}

#[test]
fn criterion_12_counterexample_divergence() {
    let t = Instant::now();
    let prof = counterexample();
    let k = prof.carleson.value;
    let first = prof.first_m_exceeding_1e3;
    let pass = k <= 1.0 + 1e-9 && (prof.slope - 1.8).abs() <= 0.3 && first.is_some_and(|m| m < 1_000_000);
    report(
        "12 (Carleson constant, slope, growth)",
        pass,
        t,
        secs(300),
        format!("C = {k:.10} (<= 1+1e-9), slope {:.4} (1.8 +- 0.3), S_m > 1e3 first at m = {first:?} (< 1e6)", prof.slope),
    );
}

#[test]
fn criterion_12_counterexample_norm_tail() {
    let t = Instant::now();
    let prof = counterexample();
    report(
        "12 (norm tail)",
        prof.tail_upper < 1e-3,
        t,
        secs(300),
        format!(
            "tail of ‖f‖_p^p beyond M = 1e5 lies in [{:.6}, {:.6}] (required < 1e-3)",
            prof.tail_lower, prof.tail_upper
        ),
    );
}

#[test]
fn criterion_13_embedding_consistency() {
    let t = Instant::now();
    let mut all = true;
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let mut r = rng(1300 + seed);
        let p = if seed % 2 == 0 { 1.5 } else { 3.0 };
        let sp = SpaceParameters::new(p).unwrap();
        let n = r.random_range(1..=4);
        let z = nodes(&mut r, n, 0.8, 0.08);
        let rep = embedding_duality_experiment(&z, &sp, truncation_for(z.points()), &EmbeddingBudget::default()).unwrap();
        all &= rep.consistency_flag;
        worst = worst.max(rep.c_estimate / rep.k_root);
    }
    report("13", all, t, secs(300), format!("all flags true: {all}, max C / K^(1/p) = {worst:.6} (<= 1.05)"));
}

/// Atoms with `1 - r` in `[0.15, 0.5]` on a `1/400` lattice and angles on the
/// `2 pi / 400` lattice.
fn lattice_measure(r: &mut ChaCha8Rng) -> AtomicMeasure {
    let n = r.random_range(1..=10);
    AtomicMeasure::new(
        (0..n)
            .map(|_| Atom {
                point: Complex64::from_polar(1.0 - r.random_range(60..=200) as f64 / 400.0, TAU * r.random_range(0..400) as f64 / 400.0),
                mass: r.random_range(0.01..1.0),
            })
            .collect(),
    )
    .unwrap()
}

fn brute_force(mu: &AtomicMeasure, grid: usize) -> f64 {
    let mut best = 0.0f64;
    for i in 0..grid {
        let theta0 = TAU * i as f64 / grid as f64;
        for k in 1..grid {
            let h = k as f64 / grid as f64;
            let mass: f64 = mu
                .atoms()
                .iter()
                .filter(|a| {
                    let d = (a.point.arg() - theta0).rem_euclid(TAU);
                    a.point.norm() >= 1.0 - h - 1e-12 && (d <= h + 1e-12 || d >= TAU - 1e-12)
                })
                .map(|a| a.mass)
                .sum();
            best = best.max(mass / h);
        }
    }
    best
}

#[test]
fn criterion_14_window_sup() {
    let t = Instant::now();
    let mut r = rng(14);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mu = lattice_measure(&mut r);
        let exact = carleson_constant(&mu).value;
        worst = worst.max((exact - brute_force(&mu, 400)).abs() / exact);
    }
    report("14", worst <= 0.02, t, secs(60), format!("max relative gap to 400x400 grid search {worst:.4} (tol 0.02)"));
}

#[test]
fn criterion_15_determinism() {
    let t = Instant::now();
    let base = tempfile::tempdir().unwrap();
    let configs = vec![
        ExperimentConfig {
            subcommand: Some(Subcommand::Riesz),
            p: Some(3.0),
            seed: 15,
            nodes: Some(NodeSource::Points(vec![[0.1, 0.2], [-0.4, 0.3], [0.5, -0.5], [0.0, 0.7]])),
            ..ExperimentConfig::default()
        },
        ExperimentConfig {
            subcommand: Some(Subcommand::Separation),
            p: Some(4.0),
            seed: 15,
            nodes: Some(NodeSource::Generated(SequenceSpec::RadialVinogradov { count: 6, sigma: 0.5 })),
            ..ExperimentConfig::default()
        },
        ExperimentConfig { subcommand: Some(Subcommand::Figures), seed: 15, ..ExperimentConfig::default() },
    ];
    let mut same = true;
    for (i, cfg) in configs.into_iter().enumerate() {
        let mut bytes = Vec::new();
        for pass in 0..2 {
            let dir = base.path().join(format!("{i}-{pass}"));
            run(&ExperimentConfig { out: Some(dir.clone()), ..cfg.clone() }).unwrap();
            bytes.push(std::fs::read(dir.join("manifest.json")).unwrap());
        }
        same &= bytes[0] == bytes[1];
    }
    report("15", same, t, secs(60), format!("manifests byte-identical across repeated runs: {same}"));
}
