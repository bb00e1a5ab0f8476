use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use expid::par::Exec;
use expid::scenario::config::preset_source;
use expid::scenario::run::output_root;
use expid::scenario::{run_scenario, sweep, verify, write_artifacts, ScenarioConfig};

/// Online estimation of exponential parameters: simulation, verification and sweeps.
#[derive(Parser)]
#[command(name = "expid", version)]
struct Cli {
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a scenario and write CSV, summary and SVG artifacts.
    Run {
        /// Config file, or `preset:<name>`.
        config: String,
        /// Output directory (overrides the config and EXPID_OUTPUT_DIR).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check monotonicity, Jacobians and the regression residual.
    Verify {
        config: String,
    },
    /// Run one child per value of a config field.
    Sweep {
        config: String,
        /// Dotted config path, e.g. `estimator.gamma_w`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in preset.
    Preset {
        name: String,
    },
}

fn load_value(spec: &str) -> expid::Result<toml::Value> {
    match spec.strip_prefix("preset:") {
        Some(name) => ScenarioConfig::merged_value(&format!("preset = \"{name}\"")),
        None => {
            let path = Path::new(spec);
            let src = std::fs::read_to_string(path).map_err(|e| expid::Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            ScenarioConfig::merged_value(&src)
        }
    }
}

fn load(spec: &str) -> expid::Result<ScenarioConfig> {
    ScenarioConfig::from_value(load_value(spec)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match dispatch(cli.cmd, exec) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Cmd, exec: Exec) -> expid::Result<bool> {
    match cmd {
        Cmd::Run { config, out } => {
            let cfg = load(&config)?;
            let outcome = run_scenario(&cfg)?;
            let dir = out.unwrap_or_else(|| output_root(&cfg).join(cfg.label()));
            for p in write_artifacts(&cfg, &outcome, &dir)? {
                log::info!("wrote {}", p.display());
            }
            print!("{}", outcome.summary.to_toml()?);
            // Integration finished; failing checks are reported in the summary.
            Ok(true)
        }
        Cmd::Verify { config } => {
            let cfg = load(&config)?;
            let rep = verify(&cfg, exec)?;
            println!("{rep}");
            Ok(rep.passed())
        }
        Cmd::Sweep { config, param, values, out } => {
            let base = load_value(&config)?;
            let label = ScenarioConfig::from_value(base.clone())?;
            let dir = out.unwrap_or_else(|| output_root(&label).join(format!("{}-sweep", label.label())));
            let values: Vec<String> = values.into_iter().map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            let records = sweep(&base, &param, &values, Some(&dir), exec)?;
            for r in &records {
                match (&r.summary, &r.error) {
                    (Some(s), _) => println!(
                        "{param}={:<12} error_norm={:.3e} delta_end={:.4} {}",
                        r.value,
                        s.error_norm,
                        s.delta_end,
                        if s.passed() { "pass" } else { "fail" }
                    ),
                    (None, e) => println!("{param}={:<12} error: {}", r.value, e.as_deref().unwrap_or("")),
                }
            }
            log::info!("wrote {}", dir.join("sweep.csv").display());
            Ok(records.iter().all(|r| r.error.is_none()))
        }
        Cmd::Preset { name } => {
            print!("{}", preset_source(&name)?);
            Ok(true)
        }
    }
}
