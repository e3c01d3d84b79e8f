use lpa::interp::InterpolationResult;
use lpa_cli::{run, Cli, ExperimentConfig, NodeSource, RunManifest, Subcommand};
use clap::Parser;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lpa"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn interp_instance_writes_result_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = tmp.path().join("inst.json");
    write(&inst, r#"{"p": 3, "nodes": [[0.1, 0.2], [-0.5, 0.3]], "targets": [[1, 0], [0, 1]], "truncation": 60}"#);
    let out = tmp.path().join("out");
    let status = bin().args(["interp", "--instance"]).arg(&inst).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("result.json")).unwrap();
    assert!(text.contains("duality_gap"));
    let res: InterpolationResult = serde_json::from_str(&text).unwrap();
    assert_eq!(res.truncation, 60);
    let m = manifest(&out);
    assert_eq!(m.config.tol, Some(1e-6));
    assert_eq!(m.config.truncation, Some(60));
    assert_eq!(m.outputs.len(), 1);
    assert_eq!(m.outputs[0].sha256.len(), 64);
    assert!(out.join("timings.json").exists());
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    write(
        &cfg,
        "subcommand = \"riesz\"\np = 1.5\nseed = 3\nnodes = [[0.1, 0.0], [0.0, 0.5]]\n\n[params]\nrestarts = 2\n",
    );
    let cli = Cli::try_parse_from(["lpa", "--config", cfg.to_str().unwrap(), "--p", "3", "--seed", "9"]).unwrap();
    let c = cli.into_config().unwrap();
    assert_eq!(c.subcommand, Some(Subcommand::Riesz));
    assert_eq!(c.p, Some(3.0));
    assert_eq!(c.seed, 9);
    assert_eq!(c.params.restarts, Some(2));
    let json = tmp.path().join("run.json");
    write(&json, r#"{"subcommand": "figures", "params": {"h_mobius": 0.2}}"#);
    let c = Cli::try_parse_from(["lpa", "--config", json.to_str().unwrap()]).unwrap().into_config().unwrap();
    assert_eq!(c.params.h_mobius, Some(0.2));
}

#[test]
fn every_subcommand_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let measure = tmp.path().join("mu.json");
    write(&measure, r#"{"atoms": [[0.5, 0.0, 0.25], [0.0, -0.8, 0.1]]}"#);
    let pts = NodeSource::Points(vec![[0.1, 0.2], [-0.4, 0.3], [0.5, -0.5]]);
    let cases: Vec<(Subcommand, ExperimentConfig, Vec<&str>)> = vec![
        (Subcommand::Riesz, ExperimentConfig { p: Some(3.0), nodes: Some(pts.clone()), ..Default::default() }, vec!["riesz.json"]),
        (Subcommand::Extremal, ExperimentConfig { p: Some(1.5), nodes: Some(pts.clone()), ..Default::default() }, vec!["profile.csv", "gamma.csv"]),
        (
            Subcommand::Opnorm,
            ExperimentConfig {
                p: Some(3.0),
                nodes: Some(pts.clone()),
                params: lpa_cli::Params { identity_check: Some(true), ..Default::default() },
                ..Default::default()
            },
            vec!["certificate.json", "identity.json"],
        ),
        (
            Subcommand::Separation,
            ExperimentConfig {
                p: Some(4.0),
                nodes: Some(pts.clone()),
                params: lpa_cli::Params { samples: Some(1000), ..Default::default() },
                ..Default::default()
            },
            vec!["separation.json", "triangle.json", "multipliers.csv"],
        ),
        (
            Subcommand::Carleson,
            ExperimentConfig { p: Some(3.0), nodes: Some(pts.clone()), measure: Some(measure.clone()), ..Default::default() },
            vec!["carleson.json", "embedding.json"],
        ),
        (Subcommand::Figures, ExperimentConfig::default(), vec!["mobius_region.csv", "kernel_region.csv", "mobius_region.json", "kernel_region.json"]),
    ];
    for (sub, cfg, files) in cases {
        let out = tmp.path().join(sub.name());
        let m = run(&ExperimentConfig { subcommand: Some(sub), out: Some(out.clone()), ..cfg }).unwrap();
        let names: Vec<&str> = m.outputs.iter().map(|o| o.file.as_str()).collect();
        assert_eq!(names, files, "{}", sub.name());
        for f in files {
            let text = std::fs::read_to_string(out.join(f)).unwrap();
            assert!(!text.contains("NaN"));
            if f.ends_with(".csv") {
                assert!(text.lines().count() >= 2, "{f} has a header and data");
            } else {
                serde_json::from_str::<serde_json::Value>(&text).unwrap();
            }
        }
    }
}

#[test]
fn figures_window_inside() {
    let tmp = tempfile::tempdir().unwrap();
    run(&ExperimentConfig { subcommand: Some(Subcommand::Figures), out: Some(tmp.path().into()), ..Default::default() }).unwrap();
    for f in ["mobius_region.json", "kernel_region.json"] {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join(f)).unwrap()).unwrap();
        assert_eq!(v["window_inside"], serde_json::Value::Bool(true), "{f}");
    }
    let csv = std::fs::read_to_string(tmp.path().join("mobius_region.csv")).unwrap();
    assert!(csv.starts_with("curve,theta,r\n"));
    assert!(csv.contains("\nwindow,"));
}

#[test]
fn counterexample_csv_is_monotone() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["counterexample", "--p", "4", "--epsilon", "0.05", "--n-atoms", "10000", "--out"])
        .arg(tmp.path())
        .status()
        .unwrap();
    assert!(status.success());
    let mut rdr = csv::Reader::from_path(tmp.path().join("divergence.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["m", "S_m", "norm_partial"]);
    let s: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(s.len(), 10_000);
    assert!(s.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        subcommand: Some(Subcommand::Opnorm),
        p: Some(1.5),
        nodes: Some(NodeSource::Points(vec![[0.1, 0.2], [-0.4, 0.3], [0.5, -0.5], [0.0, 0.9]])),
        ..Default::default()
    };
    let hashes: Vec<Vec<String>> = [1, 4]
        .iter()
        .map(|&w| {
            let out = tmp.path().join(w.to_string());
            run(&ExperimentConfig { workers: Some(w), out: Some(out), ..cfg.clone() })
                .unwrap()
                .outputs
                .into_iter()
                .map(|o| o.sha256)
                .collect()
        })
        .collect();
    assert_eq!(hashes[0], hashes[1]);
}

#[test]
fn errors_have_codes_and_records() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("missing-p");
    let st = bin().args(["riesz", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(rec["code"], "config");

    let inst = tmp.path().join("dup.json");
    write(&inst, r#"{"p": 2, "nodes": [[0.1, 0.0], [0.1, 0.0]], "targets": [[1, 0], [1, 0]]}"#);
    let out = tmp.path().join("dup");
    let st = bin().arg("interp").arg("--instance").arg(&inst).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(3));
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(rec["code"], "degenerate-input");

    let bad = tmp.path().join("bad.json");
    write(&bad, r#"{"subcommand": "interp", "unknown_field": 1}"#);
    let st = bin().arg("--config").arg(&bad).arg("--out").arg(tmp.path().join("bad")).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = bin().args(["counterexample", "--p", "1.5", "--out"]).arg(tmp.path().join("p")).status().unwrap();
    assert_eq!(st.code(), Some(3));
}
