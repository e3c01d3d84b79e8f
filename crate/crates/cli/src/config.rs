use crate::error::CliError;
use clap::{Parser, ValueEnum};
use lpa::interp::SequenceSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Interp,
    Riesz,
    Extremal,
    Opnorm,
    Separation,
    Carleson,
    Counterexample,
    Figures,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Interp => "interp",
            Subcommand::Riesz => "riesz",
            Subcommand::Extremal => "extremal",
            Subcommand::Opnorm => "opnorm",
            Subcommand::Separation => "separation",
            Subcommand::Carleson => "carleson",
            Subcommand::Counterexample => "counterexample",
            Subcommand::Figures => "figures",
        }
    }
}

/// Nodes given inline or by a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeSource {
    Points(Vec<[f64; 2]>),
    Generated(SequenceSpec),
}

/// Experiment-specific knobs. Unset values are filled with defaults before
/// the run and recorded in the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub j: Option<usize>,
    pub n_max: Option<usize>,
    pub restarts: Option<usize>,
    pub max_iter: Option<usize>,
    pub samples: Option<usize>,
    pub threshold: Option<f64>,
    pub lb_threshold: Option<f64>,
    pub ub_threshold: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_atoms: Option<usize>,
    pub norm_terms: Option<usize>,
    pub h_mobius: Option<f64>,
    pub p_mobius: Option<f64>,
    pub h_kernel: Option<f64>,
    pub p_kernel: Option<f64>,
    pub identity_check: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcommand: Option<Subcommand>,
    pub p: Option<f64>,
    pub truncation: Option<usize>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    pub workers: Option<usize>,
    /// Output directory; not echoed in the manifest.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    /// Instance file `{p, nodes, targets, truncation}`.
    pub instance: Option<PathBuf>,
    pub nodes: Option<NodeSource>,
    pub targets: Option<Vec<[f64; 2]>>,
    /// Measure file `{atoms: [[re, im, mass], ...]}`.
    pub measure: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
}

impl ExperimentConfig {
    /// Read a `.toml` or JSON configuration file.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lpa", version, about = "Interpolation and Carleson experiments in coefficient-p spaces")]
pub struct Cli {
    /// Experiment to run; overrides the configuration file.
    #[arg(value_enum)]
    pub command: Option<Subcommand>,
    /// JSON or TOML (by `.toml` extension) experiment configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every randomized routine
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exponent p of the space, 1 < p < inf
    #[arg(long)]
    pub p: Option<f64>,
    /// Coefficient truncation degree M [default: from the largest node modulus]
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Relative duality-gap tolerance [default: 1e-6]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads; results do not depend on it [default: 1]
    #[arg(long)]
    pub workers: Option<usize>,
    /// interp instance file {p, nodes, targets, truncation}
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// carleson: atomic measure file {atoms: [[re, im, mass], ...]}
    #[arg(long)]
    pub measure: Option<PathBuf>,
    /// extremal: node index j [default: 0]
    #[arg(long)]
    pub j: Option<usize>,
    /// extremal/interp: largest level N of the profile
    #[arg(long)]
    pub n_max: Option<usize>,
    /// counterexample: epsilon [default: 0.05]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// counterexample: number of atoms [default: 10000]
    #[arg(long)]
    pub n_atoms: Option<usize>,
}

impl Cli {
    /// Configuration file values overridden by flags.
    pub fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$($field).+ = Some(v); })*
            };
        }
        set!(
            command => subcommand,
            p => p,
            truncation => truncation,
            tol => tol,
            workers => workers,
            out => out,
            instance => instance,
            measure => measure,
            j => params.j,
            n_max => params.n_max,
            epsilon => params.epsilon,
            n_atoms => params.n_atoms,
        );
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}
