//! The `regenloc` command.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};
use regenloc::hsl::play_hsl_with;
use regenloc::instance::{generate_instance, GeneratorParams, DEFAULT_HORIZON};
use regenloc::io::{load_instance, save_instance};
use regenloc::methods::{solve, Method, SolveOptions};
use regenloc::paths::{build_transformed_graph, Regime};
use regenloc::rational::{format_rational, parse_rational, ratio};
use regenloc::{Error, Rational};

use crate::config::{ConfigFile, ExperimentConfig};
use crate::experiment::{read_results, run_experiment, write_results};
use crate::profile::{input_from_rows, performance_profile, write_profile};
use crate::report::{change_text, to_pretty_json, GraphJson, ReportJson};

/// Exit code for bad input files and infeasible instances.
pub const EXIT_INPUT: i32 = 1;
/// Exit code for command-line misuse.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "regenloc", version, about = "Robust regenerator placement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).ok_or_else(|| format!("not a rational number: {text}"))
}

fn method_arg(text: &str) -> Result<Method, String> {
    text.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        gamma_e: usize,
        #[arg(long, default_value_t = 2)]
        gamma_v: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, value_parser = rational_arg, default_value = "1000")]
        d_max: Rational,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
        /// Output file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance and print a JSON report.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = method_arg)]
        method: Method,
        #[arg(long, value_parser = rational_arg)]
        epsilon: Option<Rational>,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[arg(long, value_parser = rational_arg, default_value = "0.1")]
        eta_d: Rational,
        /// On a complete communication graph place nothing.
        #[arg(long)]
        complete_shortcut: bool,
        /// Also write the communication graph as JSON.
        #[arg(long)]
        dump_graph: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment grid; writes results.csv, results.meta.json and profile.csv.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Shrink sizes and instance counts by this factor.
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Turn a results table into profile breakpoints (solver,tau,k).
    Profile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play the hide-and-seek game and print its trace as CSV.
    Hsl {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = rational_arg, default_value = "0.1")]
        eta_d: Rational,
        #[arg(long, value_parser = rational_arg)]
        epsilon: Option<Rational>,
        #[arg(long, default_value_t = 10)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::InvalidArgument(_)) => EXIT_USAGE,
            _ => EXIT_INPUT,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, bytes),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn time_limit(seconds: Option<f64>) -> Result<Option<Duration>, CliError> {
    match seconds {
        None => Ok(None),
        Some(s) if s.is_finite() && s > 0.0 => Ok(Some(Duration::from_secs_f64(s))),
        Some(s) => Err(CliError::Usage(format!(
            "--time-limit must be positive, got {s}"
        ))),
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate {
            n,
            gamma_e,
            gamma_v,
            seed,
            density,
            d_max,
            horizon,
            out,
        } => {
            let inst = generate_instance(&GeneratorParams {
                n,
                density,
                d_max,
                gamma_e,
                gamma_v,
                horizon,
                seed,
            })?;
            emit(out.as_deref(), &save_instance(&inst))
        }
        Command::Solve {
            instance,
            method,
            epsilon,
            time_limit: limit,
            max_iter,
            eta_d,
            complete_shortcut,
            dump_graph,
            out,
        } => {
            let inst = load_instance(&read(&instance)?)?;
            let opts = SolveOptions {
                epsilon,
                time_limit: time_limit(limit)?,
                max_iter,
                eta_d,
                complete_shortcut,
            };
            if let Some(path) = dump_graph {
                let regime = match method {
                    Method::Dwc => Regime::Dwc,
                    Method::Rsb => Regime::Rsb,
                    _ => Regime::Rdb,
                };
                let m = build_transformed_graph(&inst, regime)?;
                write_file(
                    &path,
                    to_pretty_json(&GraphJson::new(&regime.to_string(), &m)).as_bytes(),
                )?;
            }
            let report = solve(&inst, method, &opts)?;
            emit(
                out.as_deref(),
                to_pretty_json(&ReportJson::from(&report)).as_bytes(),
            )
        }
        Command::Experiment {
            config,
            scale,
            threads,
            out_dir,
        } => {
            let bytes = read(&config)?;
            let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse {
                line: 0,
                column: 0,
                message: e.to_string(),
            })?;
            let file: ConfigFile = regenloc::io::parse_json(text)?;
            let mut cfg = ExperimentConfig::resolve(file, scale)?;
            if threads.is_some() {
                cfg.threads = threads;
            }
            fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
                path: out_dir.clone(),
                source,
            })?;
            let (rows, summary) = run_experiment(&cfg)?;
            let mut csv = Vec::new();
            write_results(&mut csv, &rows)?;
            write_file(&out_dir.join("results.csv"), &csv)?;
            let meta = serde_json::json!({
                "experiment": cfg.experiment.name(),
                "n_values": cfg.n_values,
                "gamma_e": cfg.gamma_e,
                "gamma_v": cfg.gamma_v,
                "instances": cfg.instances,
                "methods": cfg.methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
                "d_max": format_rational(&cfg.d_max),
                "density": cfg.density,
                "horizon": cfg.horizon,
                "eta_d": format_rational(&cfg.eta_d),
                "max_iter": cfg.max_iter,
                "master_seed": cfg.master_seed,
                "time_limit_s": cfg.time_limit.as_secs_f64(),
                "scale": cfg.scale,
                "summary": summary,
                "version": env!("CARGO_PKG_VERSION"),
            });
            write_file(
                &out_dir.join("results.meta.json"),
                to_pretty_json(&meta).as_bytes(),
            )?;
            let profile = performance_profile(&input_from_rows(&rows))?;
            let mut csv = Vec::new();
            write_profile(&mut csv, &profile)?;
            write_file(&out_dir.join("profile.csv"), &csv)?;
            eprintln!(
                "{} rows, {} resampled, {} timeouts -> {}",
                summary.rows,
                summary.resampled,
                summary.timeouts,
                out_dir.display()
            );
            Ok(())
        }
        Command::Profile { input, out } => {
            let rows = read_results(read(&input)?.as_slice())?;
            let profile = performance_profile(&input_from_rows(&rows))?;
            let mut csv = Vec::new();
            write_profile(&mut csv, &profile)?;
            emit(out.as_deref(), &csv)
        }
        Command::Hsl {
            instance,
            eta_d,
            epsilon,
            max_iter,
            out,
        } => {
            let inst = load_instance(&read(&instance)?)?;
            let opts = SolveOptions {
                epsilon: epsilon.or_else(|| Some(ratio(1, 1_000_000))),
                max_iter,
                eta_d,
                ..SolveOptions::default()
            };
            let report = play_hsl_with(&inst, &opts)?;
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer
                .write_record(["k", "loss", "placement", "changed"])
                .map_err(|e| Error::Internal(e.to_string()))?;
            for row in &report.trace {
                let placement: Vec<String> = row.placement.iter().map(|v| v.to_string()).collect();
                writer
                    .write_record([
                        row.iteration.to_string(),
                        format_rational(&row.value),
                        placement.join(" "),
                        change_text(row).join(" "),
                    ])
                    .map_err(|e| Error::Internal(e.to_string()))?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| Error::Internal(e.to_string()))?;
            emit(out.as_deref(), &bytes)?;
            eprintln!(
                "{} after {} iteration(s), objective {}",
                if report.converged {
                    "converged"
                } else {
                    "stopped"
                },
                report.iterations,
                format_rational(&report.objective)
            );
            Ok(())
        }
    }
}
