use crate::config::{ExperimentConfig, NodeSource, Params, Subcommand};
use crate::error::CliError;
use crate::outputs::{json_bytes, num, Sink};
use lpa::carleson::{
    carleson_constant, counterexample_run, embedding_duality_experiment, figure_kernel, figure_mobius,
    AtomicMeasure, CounterexampleConfig, EmbeddingBudget, PolarPoint,
};
use lpa::extremal::{convergence_profile, ExtremalConfig};
use lpa::gramian::{opnorm_multistart, phi_psi_identity_check, PhiMatrix, PowerConfig, PsiMatrix};
use lpa::interp::{
    generate_sequence, min_norm_interpolate, riesz_classify, universal_criterion_profile, MinNormConfig,
    NodeSet, RieszBudget, TargetVector,
};
use lpa::separation::{quasi_triangle_scan, separating_multiplier, weak_separation_classify};
use lpa::{truncation_for, Complex64, SpaceParameters};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Written as `manifest.json`. Wall-clock times go to `timings.json` so that
/// the manifest is a pure function of the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: Subcommand,
    pub config: ExperimentConfig,
    pub workers: usize,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Instance {
    p: f64,
    nodes: Vec<[f64; 2]>,
    targets: Option<Vec<[f64; 2]>>,
    truncation: Option<usize>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn complexes(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

fn node_set(src: &NodeSource) -> Result<NodeSet, CliError> {
    Ok(match src {
        NodeSource::Points(v) => NodeSet::from_complex(&complexes(v))?,
        NodeSource::Generated(spec) => generate_sequence(spec)?,
    })
}

fn require<T: Clone>(v: &Option<T>, what: &str, sub: Subcommand) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::Config(format!("{} needs {what}", sub.name())))
}

fn fill<T>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

/// Fill every unset value the chosen experiment uses, so the manifest shows
/// exactly what ran.
fn resolve(cfg: &ExperimentConfig) -> Result<ExperimentConfig, CliError> {
    let mut c = cfg.clone();
    let sub = require(&c.subcommand, "a subcommand", Subcommand::Interp)
        .map_err(|_| CliError::Config("no subcommand given".into()))?;
    if let Some(path) = &c.instance {
        let inst: Instance = read_json(path)?;
        fill(&mut c.p, inst.p);
        fill(&mut c.nodes, NodeSource::Points(inst.nodes));
        if let Some(t) = inst.targets {
            fill(&mut c.targets, t);
        }
        if let Some(m) = inst.truncation {
            fill(&mut c.truncation, m);
        }
    }
    fill(&mut c.workers, 1);
    if c.workers == Some(0) {
        return Err(CliError::Config("workers must be positive".into()));
    }
    let needs_space = !matches!(sub, Subcommand::Figures);
    if needs_space && c.p.is_none() {
        return Err(CliError::Config(format!("{} needs p", sub.name())));
    }
    if let Some(p) = c.p {
        SpaceParameters::new(p)?;
    }
    let needs_nodes = !matches!(sub, Subcommand::Counterexample | Subcommand::Figures | Subcommand::Carleson);
    if needs_nodes && c.nodes.is_none() {
        return Err(CliError::Config(format!("{} needs nodes", sub.name())));
    }
    if sub == Subcommand::Carleson && c.nodes.is_none() && c.measure.is_none() {
        return Err(CliError::Config("carleson needs a measure or nodes".into()));
    }
    let nodes = c.nodes.as_ref().map(node_set).transpose()?;
    if let Some(z) = &nodes {
        fill(&mut c.truncation, truncation_for(z.points()));
    }
    fill(&mut c.tol, 1e-6);
    let n = nodes.as_ref().map_or(0, |z| z.len());
    let p = &mut c.params;
    match sub {
        Subcommand::Interp => {
            if c.targets.is_none() {
                return Err(CliError::Config("interp needs targets".into()));
            }
            fill(&mut p.max_iter, 50_000);
        }
        Subcommand::Riesz => {
            fill(&mut p.restarts, 8);
            fill(&mut p.max_iter, 5000);
            fill(&mut p.lb_threshold, 1e-2);
            fill(&mut p.ub_threshold, 1e2);
        }
        Subcommand::Extremal => {
            fill(&mut p.j, 0);
            fill(&mut p.n_max, n.saturating_sub(1));
            fill(&mut p.max_iter, 50_000);
        }
        Subcommand::Opnorm => {
            fill(&mut p.restarts, 8);
            fill(&mut p.max_iter, 200_000);
            fill(&mut p.identity_check, false);
        }
        Subcommand::Separation => {
            fill(&mut p.threshold, lpa::separation::DEFAULT_SEPARATION_THRESHOLD);
            fill(&mut p.samples, 100_000);
        }
        Subcommand::Carleson => {
            if c.nodes.is_some() {
                fill(&mut p.restarts, 8);
                fill(&mut p.max_iter, 200_000);
            }
        }
        Subcommand::Counterexample => {
            fill(&mut p.epsilon, 0.05);
            fill(&mut p.n_atoms, 10_000);
            fill(&mut p.norm_terms, 100_000);
        }
        Subcommand::Figures => {
            fill(&mut p.p_mobius, 1.5);
            fill(&mut p.h_mobius, 0.1);
            fill(&mut p.p_kernel, 4.0);
            fill(&mut p.h_kernel, 0.125);
        }
    }
    Ok(c)
}

/// Run one experiment, writing its outputs, `timings.json` and
/// `manifest.json` into the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest, CliError> {
    let c = resolve(cfg)?;
    let sub = c.subcommand.expect("resolved");
    let workers = c.workers.expect("resolved");
    let dir: PathBuf = c.out.clone().unwrap_or_else(|| "out".into());
    let mut sink = Sink::new(&dir)?;
    let mut timings = Vec::new();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| dispatch(sub, &c, &mut sink, &mut timings))?;
    let manifest = RunManifest {
        tool: "lpa".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: sub,
        config: c,
        workers,
        outputs: sink.records,
    };
    std::fs::write(dir.join("timings.json"), json_bytes(&timings)?)?;
    std::fs::write(dir.join("manifest.json"), json_bytes(&manifest)?)?;
    Ok(manifest)
}

struct Stopwatch<'a> {
    timings: &'a mut Vec<StageTiming>,
}

impl Stopwatch<'_> {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }
}

fn c_cols(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn dispatch(
    sub: Subcommand,
    c: &ExperimentConfig,
    sink: &mut Sink,
    timings: &mut Vec<StageTiming>,
) -> Result<(), CliError> {
    let mut sw = Stopwatch { timings };
    let pr: &Params = &c.params;
    let sp = c.p.map(SpaceParameters::new).transpose()?;
    let nodes = c.nodes.as_ref().map(node_set).transpose()?;
    let m = c.truncation.unwrap_or(0);
    let tol = c.tol.expect("resolved");
    match sub {
        Subcommand::Interp => {
            let (sp, z) = (sp.expect("resolved"), nodes.expect("resolved"));
            let w = TargetVector::new(complexes(c.targets.as_ref().expect("resolved")))?;
            let mut mc = MinNormConfig::new(m);
            mc.tol = tol;
            mc.max_iter = pr.max_iter.expect("resolved");
            let res = sw.time("solve", || min_norm_interpolate(&z, &w, &sp, &mc))?;
            sink.json("result.json", &res)?;
            if let Some(n_max) = pr.n_max {
                let rows = sw.time("profile", || universal_criterion_profile(&z, &w, &sp, n_max, &mc))?;
                let rows: Vec<_> = rows.iter().map(|r| vec![r.n.to_string(), num(r.value)]).collect();
                sink.csv("profile.csv", &["N", "value"], &rows)?;
            }
        }
        Subcommand::Riesz => {
            let (sp, z) = (sp.expect("resolved"), nodes.expect("resolved"));
            let budget = RieszBudget {
                restarts: pr.restarts.expect("resolved"),
                max_iter: pr.max_iter.expect("resolved"),
                seed: c.seed,
                lb_threshold: pr.lb_threshold.expect("resolved"),
                ub_threshold: pr.ub_threshold.expect("resolved"),
            };
            let rep = sw.time("classify", || riesz_classify(&z, &sp, m, &budget))?;
            sink.json("riesz.json", &rep)?;
        }
        Subcommand::Extremal => {
            let (sp, z) = (sp.expect("resolved"), nodes.expect("resolved"));
            let mut ec = ExtremalConfig::new(m);
            ec.tol = tol;
            ec.max_iter = pr.max_iter.expect("resolved");
            let (j, n_max) = (pr.j.expect("resolved"), pr.n_max.expect("resolved"));
            let rows = sw.time("profile", || convergence_profile(&z, j, n_max, &sp, &ec))?;
            let table: Vec<_> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        num(r.f_norm),
                        r.delta_norm.map(num).unwrap_or_default(),
                        num(r.g_norm),
                        num(r.max_constraint_residual),
                    ]
                })
                .collect();
            sink.csv("profile.csv", &["N", "f_norm", "delta_norm", "g_norm", "max_constraint_residual"], &table)?;
            let mut gamma = Vec::new();
            for r in &rows {
                for (k, g) in r.gamma.iter().enumerate() {
                    let [re, im] = c_cols(*g);
                    gamma.push(vec![r.n.to_string(), k.to_string(), re, im]);
                }
            }
            sink.csv("gamma.csv", &["N", "k", "re", "im"], &gamma)?;
        }
        Subcommand::Opnorm => {
            let (sp, z) = (sp.expect("resolved"), nodes.expect("resolved"));
            let psi = PsiMatrix::new(&z, &sp, m)?;
            let pc = PowerConfig {
                restarts: pr.restarts.expect("resolved"),
                seed: c.seed,
                max_iter: pr.max_iter.expect("resolved"),
                ..PowerConfig::default()
            };
            let cert = sw.time("power", || opnorm_multistart(&psi, &pc))?;
            sink.json("certificate.json", &cert)?;
            if pr.identity_check == Some(true) {
                let mut ec = ExtremalConfig::new(m);
                ec.tol = tol;
                let phi = sw.time("phi", || PhiMatrix::from_nodes(&z, &sp, &ec))?;
                let rep = sw.time("identity", || phi_psi_identity_check(&phi, &psi, tol))?;
                sink.json("identity.json", &rep)?;
            }
        }
        Subcommand::Separation => {
            let (sp, z) = (sp.expect("resolved"), nodes.expect("resolved"));
            let rep = sw.time("classify", || weak_separation_classify(&z, &sp, pr.threshold.expect("resolved")))?;
            sink.json("separation.json", &rep)?;
            let scan = sw.time("triangle", || quasi_triangle_scan(&sp, pr.samples.expect("resolved"), c.seed))?;
            sink.json("triangle.json", &scan)?;
            let mut rows = Vec::new();
            sw.time("multipliers", || -> Result<(), CliError> {
                for j in 0..z.len() {
                    for k in 0..z.len() {
                        if j == k {
                            continue;
                        }
                        let s = separating_multiplier(&z, &sp, j, k, rep.epsilon_estimate, m)?;
                        let [a, b] = c_cols(s.value_at_zj);
                        let [c2, d] = c_cols(s.value_at_zk);
                        rows.push(vec![j.to_string(), k.to_string(), num(s.l1_norm), a, b, c2, d]);
                    }
                }
                Ok(())
            })?;
            sink.csv(
                "multipliers.csv",
                &["j", "k", "l1_norm", "at_zj_re", "at_zj_im", "at_zk_re", "at_zk_im"],
                &rows,
            )?;
        }
        Subcommand::Carleson => {
            if let Some(path) = &c.measure {
                let mu: AtomicMeasure = read_json(path)?;
                let k = sw.time("constant", || carleson_constant(&mu));
                sink.json("carleson.json", &k)?;
            }
            if let Some(z) = nodes {
                let sp = sp.expect("resolved");
                let mut budget = EmbeddingBudget::default();
                budget.power.restarts = pr.restarts.expect("resolved");
                budget.power.max_iter = pr.max_iter.expect("resolved");
                budget.power.seed = c.seed;
                budget.riesz.seed = c.seed;
                let rep = sw.time("embedding", || embedding_duality_experiment(&z, &sp, m, &budget))?;
                sink.json("embedding.json", &rep)?;
            }
        }
        Subcommand::Counterexample => {
            let sp = sp.expect("resolved");
            let cc = CounterexampleConfig {
                epsilon: pr.epsilon.expect("resolved"),
                n_atoms: pr.n_atoms.expect("resolved"),
                norm_terms: pr.norm_terms.expect("resolved"),
            };
            let mut prof = sw.time("divergence", || counterexample_run(&sp, &cc))?;
            let rows: Vec<_> = prof
                .rows
                .iter()
                .map(|r| vec![r.m.to_string(), num(r.s_m), num(r.norm_partial)])
                .collect();
            sink.csv("divergence.csv", &["m", "S_m", "norm_partial"], &rows)?;
            prof.rows.clear();
            sink.json("summary.json", &prof)?;
        }
        Subcommand::Figures => {
            let sp1 = SpaceParameters::new(pr.p_mobius.expect("resolved"))?;
            let fig1 = sw.time("mobius", || figure_mobius(&sp1, pr.h_mobius.expect("resolved")))?;
            let sp2 = SpaceParameters::new(pr.p_kernel.expect("resolved"))?;
            let fig2 = sw.time("kernel", || figure_kernel(&sp2, pr.h_kernel.expect("resolved")))?;
            let inside1 = fig1.window_inside(200);
            let inside2 = fig2.window_inside(200);
            sink.csv("mobius_region.csv", &["curve", "theta", "r"], &polylines(&fig1.boundary, &fig1.window_outline))?;
            sink.csv("kernel_region.csv", &["curve", "theta", "r"], &polylines(&fig2.boundary, &fig2.window_outline))?;
            let mut r1 = fig1.clone();
            r1.boundary.clear();
            r1.window_outline.clear();
            let mut r2 = fig2.clone();
            r2.boundary.clear();
            r2.window_outline.clear();
            sink.json("mobius_region.json", &FigureRecord { region: r1, window_inside: inside1 })?;
            sink.json("kernel_region.json", &FigureRecord { region: r2, window_inside: inside2 })?;
        }
    }
    Ok(())
}

/// Region descriptor without its polylines, which live in the CSV.
#[derive(Debug, Serialize)]
struct FigureRecord<R: Serialize> {
    region: R,
    window_inside: bool,
}

fn polylines(boundary: &[PolarPoint], window: &[PolarPoint]) -> Vec<Vec<String>> {
    let tag = |name: &str, pts: &[PolarPoint]| -> Vec<Vec<String>> {
        pts.iter().map(|pt| vec![name.to_string(), num(pt.theta), num(pt.r)]).collect()
    };
    let mut rows = tag("boundary", boundary);
    rows.extend(tag("window", window));
    rows
}
