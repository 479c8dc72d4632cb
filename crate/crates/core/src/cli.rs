//! The `reflex-sim` command line: `run`, `list` and `validate`.
//!
//! Exit status is [`EXIT_OK`], [`EXIT_CONFIG`] for unreadable or invalid
//! input and [`EXIT_DIVERGED`] when the simulation fails numerically.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{self, RunSetup};
use crate::scenarios;
use crate::sim::run_scenario;
use crate::summary::summarize;
use crate::SimError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

/// Output directory used when `--out` is absent.
pub const OUT_ENV: &str = "REFLEX_SIM_OUT";

#[derive(Debug, Parser)]
#[command(name = "reflex-sim", version, about = "Coupled finger grasp and slip-reflex simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and write its trace and summary.
    Run(RunArgs),
    /// List the built-in scenarios.
    List,
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Built-in scenario name or path to a scenario file.
    #[arg(long)]
    pub scenario: String,
    /// Override file applied on top of the scenario.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $REFLEX_SIM_OUT, then the current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Integration step, s.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulated time, s.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Also write a matplotlib script that plots the trace.
    #[arg(long)]
    pub plot: bool,
}

/// Runs the command line with explicit streams and environment lookup.
pub fn run_with<I, T>(args: I, env_out: Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::List => list(stdout),
        Command::Validate { config } => validate(&config, stdout),
        Command::Run(args) => run_cmd(&args, env_out, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure { code, message }) => {
            let _ = writeln!(stderr, "error: {message}");
            code
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let env_out = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    run_with(std::env::args_os(), env_out, &mut std::io::stdout(), &mut std::io::stderr())
}

struct Failure {
    code: i32,
    message: String,
}

fn config_failure(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, message: message.into() }
}

fn list(out: &mut dyn Write) -> Result<(), Failure> {
    for name in scenarios::BUILTIN_NAMES {
        writeln!(out, "{name:<12} {}", scenarios::describe(name)).map_err(|e| config_failure(e.to_string()))?;
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| config_failure(format!("{}: {e}", path.display())))
}

fn validate(path: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let setup = config::load(&read(path)?).map_err(|e| config_failure(format!("{}: {e}", path.display())))?;
    writeln!(out, "ok: scenario {} ({} s at dt = {} s)", setup.scenario.name, setup.scenario.duration, setup.sim.dt)
        .map_err(|e| config_failure(e.to_string()))
}

/// Built-in name, else a scenario file; then overrides and flags.
pub fn resolve_setup(args: &RunArgs) -> Result<RunSetup, String> {
    let mut setup = match scenarios::builtin(&args.scenario) {
        Some(sc) => RunSetup::new(sc),
        None => {
            let path = Path::new(&args.scenario);
            if !path.is_file() {
                return Err(format!(
                    "{:?} is neither a built-in scenario ({}) nor a file",
                    args.scenario,
                    scenarios::BUILTIN_NAMES.join(", ")
                ));
            }
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            config::load(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
    };
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        config::apply_overrides(&mut setup, &text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if let Some(dt) = args.dt {
        setup.sim.dt = dt;
    }
    if let Some(duration) = args.duration {
        setup.scenario.duration = duration;
    }
    setup.sim.validate().map_err(|e| format!("--dt: {e}"))?;
    setup.scenario.validate().map_err(|e| format!("--duration: {e}"))?;
    Ok(setup)
}

fn run_cmd(args: &RunArgs, env_out: Option<PathBuf>, out: &mut dyn Write) -> Result<(), Failure> {
    let setup = resolve_setup(args).map_err(config_failure)?;
    let dir = args.out.clone().or(env_out).unwrap_or_else(|| PathBuf::from("."));
    let name = setup.scenario.name.clone();

    let trace = run_scenario(&setup.scenario, &setup.sim).map_err(|e| match e {
        SimError::NonFinite { .. } | SimError::Control { .. } => {
            Failure { code: EXIT_DIVERGED, message: e.to_string() }
        }
        other => config_failure(other.to_string()),
    })?;
    let events = setup.scenario.events().map_err(|e| config_failure(e.to_string()))?;
    let summary = summarize(&name, &trace, &events);

    let io = |e: std::io::Error| config_failure(format!("{}: {e}", dir.display()));
    fs::create_dir_all(&dir).map_err(io)?;
    let csv_path = dir.join(format!("{name}.csv"));
    let file = fs::File::create(&csv_path).map_err(io)?;
    trace.write_csv(std::io::BufWriter::new(file)).map_err(|e| config_failure(e.to_string()))?;
    let summary_path = dir.join(format!("{name}.summary"));
    fs::write(&summary_path, summary.to_text()).map_err(io)?;
    let mut written = vec![csv_path, summary_path];
    if args.plot {
        let plot_path = dir.join(format!("{name}_plot.py"));
        fs::write(&plot_path, plot_script(&format!("{name}.csv"))).map_err(io)?;
        written.push(plot_path);
    }

    let w = |e: std::io::Error| config_failure(e.to_string());
    out.write_all(summary.to_text().as_bytes()).map_err(w)?;
    for p in written {
        writeln!(out, "wrote {}", p.display()).map_err(w)?;
    }
    Ok(())
}

/// Python script plotting the trace next to it.
pub fn plot_script(csv_name: &str) -> String {
    format!(
        r#"import csv
import os

import matplotlib.pyplot as plt

path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "{csv_name}")
with open(path, newline="") as f:
    rows = list(csv.DictReader(f))
col = lambda k: [float(r[k]) for r in rows]
t = col("t")

fig, ax = plt.subplots(4, 1, sharex=True, figsize=(8, 9))
ax[0].plot(t, col("theta1"))
ax[0].set_ylabel("theta1 [rad]")
ax[1].plot(t, col("f_e"), label="f_e")
ax[1].plot(t, col("f_d"), "--", label="f_d")
ax[1].set_ylabel("force [N]")
ax[1].legend()
ax[2].plot(t, col("v"))
ax[2].set_ylabel("slip v [m/s]")
ax[3].plot(t, col("m_hat"))
ax[3].set_ylabel("m_hat [kg]")
ax[3].set_xlabel("t [s]")
fig.tight_layout()
plt.show()
"#
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(std::iter::once("reflex-sim").chain(args.iter().copied()), None, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn list_names_builtins() {
        let (code, out, _) = call(&["list"]);
        assert_eq!(code, EXIT_OK);
        for name in scenarios::BUILTIN_NAMES {
            assert!(out.contains(name));
        }
    }

    #[test]
    fn usage_errors_are_config_errors() {
        assert_eq!(call(&["frobnicate"]).0, EXIT_CONFIG);
        assert_eq!(call(&["run"]).0, EXIT_CONFIG);
        assert_eq!(call(&["run", "--scenario", "no_such_thing"]).0, EXIT_CONFIG);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn flags_override_scenario() {
        let args = RunArgs {
            scenario: "fig3_step".into(),
            config: None,
            out: None,
            dt: Some(2e-4),
            duration: Some(0.3),
            plot: false,
        };
        let setup = resolve_setup(&args).unwrap();
        assert_eq!((setup.sim.dt, setup.scenario.duration), (2e-4, 0.3));
        assert!(resolve_setup(&RunArgs { dt: Some(-1.0), ..args }).is_err());
    }

    #[test]
    fn plot_script_reads_the_trace() {
        let s = plot_script("fig6_slip.csv");
        assert!(s.contains("\"fig6_slip.csv\"") && s.contains("m_hat"));
    }
}
