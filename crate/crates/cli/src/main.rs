use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wgcorr_cli::config::{apply_override, merge, read_table};
use wgcorr_cli::presets::preset_table;
use wgcorr_cli::{presets, run_scenario, CliError, ScenarioConfig};

/// Environment variable that overrides the output directory of a run.
const OUT_ENV: &str = "WGCORR_OUT";

#[derive(Parser)]
#[command(name = "wgcorr", version, about = "Photon correlations in a two-mirror multimode waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a config file and/or a preset.
    Run {
        /// TOML scenario file, layered over the preset if both are given.
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Override one setting, e.g. `--set geometry.width=57um`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the built-in scenarios.
    Presets,
}

fn build_config(
    config: Option<PathBuf>,
    preset: Option<String>,
    overrides: &[String],
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<ScenarioConfig, CliError> {
    if config.is_none() && preset.is_none() {
        return Err(CliError::Config("give a config file or --preset".into()));
    }
    let mut table = match &preset {
        Some(name) => preset_table(name)?,
        None => toml::Table::new(),
    };
    if let Some(path) = &config {
        merge(&mut table, read_table(path)?);
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let mut cfg = ScenarioConfig::from_table(table)?;
    if let Ok(dir) = std::env::var(OUT_ENV) {
        cfg.output.dir = dir;
    }
    if let Some(dir) = out {
        cfg.output.dir = dir.display().to_string();
    }
    if let Some(s) = seed {
        cfg.compute.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            for p in presets() {
                println!("{:<6}  {}", p.name, p.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, preset, overrides, out, seed } => {
            let result = build_config(config, preset, &overrides, out, seed).and_then(|cfg| {
                let dir = PathBuf::from(&cfg.output.dir);
                run_scenario(&cfg, &dir).map(|r| (r, dir))
            });
            match result {
                Ok((report, dir)) => {
                    println!("{}: {} files written to {}", report.name, report.files.len() + 1, dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
