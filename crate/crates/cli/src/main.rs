use clap::Parser;
use lpa_cli::{run, Cli, CliError};
use std::process::ExitCode;

fn report(e: &CliError, out: Option<&std::path::Path>) {
    eprintln!("error [{}]: {e}", e.code());
    if let Some(dir) = out {
        if std::fs::create_dir_all(dir).is_ok() {
            if let Ok(text) = serde_json::to_string_pretty(&e.record()) {
                let _ = std::fs::write(dir.join("error.json"), text + "\n");
            }
        }
    }
}

fn main() -> ExitCode {
    let cfg = match Cli::parse().into_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            report(&e, None);
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let out = cfg.out.clone().unwrap_or_else(|| "out".into());
    match run(&cfg) {
        Ok(manifest) => {
            println!("{}: {} outputs in {}", manifest.subcommand.name(), manifest.outputs.len(), out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            report(&e, Some(&out));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
