//! `pinch`: verify inequality suites, analyze model submanifolds, probe
//! sharpness and re-render saved reports.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check, 2 on a
//! configuration error.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pinch_core::analyzer::{
    analyze, fmt_f64, from_json_bytes, report_emit, sweep_with, to_json_bytes, ChartConfig, Format,
    PinchReport, RunConfig, Suite, SweepOptions, SweepSummary,
};
use pinch_core::extremal::{maximize_bw_ratio, maximize_ddvv_ratio, SearchConfig, SearchResult};
use pinch_core::models::ModelParams;
use pinch_core::Error;

/// Lowest acceptable extremal ratio, as a fraction of the supremum.
const EXTREMAL_REACH: f64 = 0.999;
/// Allowed overshoot above the supremum.
const EXTREMAL_SLACK: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "pinch",
    version,
    about = "Curvature pinching checks for minimal submanifolds of spheres"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Ddvv,
    Bw,
    Lemma32,
    Lemma33,
    Lemma34,
    FrameInvariance,
    RelIdentity,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FunctionalArg {
    Ddvv,
    Bw,
}

#[derive(clap::Args, Debug)]
struct Output {
    /// json, csv or text
    #[arg(long, default_value = "text")]
    format: String,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run randomized inequality and identity sweeps.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Negative control: break every measured quantity on purpose.
        #[arg(long)]
        corrupt: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Analyze a registered model.
    Model {
        /// great_sphere, clifford, sphere_product, veronese or nonminimal_torus
        name: Option<String>,
        /// Chart config JSON file; replaces the name and parameter flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        partition: Option<Vec<usize>>,
        #[arg(long)]
        radius: Option<f64>,
        /// Sample points per axis, comma separated.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long)]
        fd_step: Option<f64>,
        #[arg(long)]
        margin: Option<f64>,
        /// Slack in hypothesis comparisons.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Random-restart search for near-extremal inputs.
    Extremal {
        #[arg(value_enum)]
        functional: FunctionalArg,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Matrix dimension.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Number of matrices (ddvv only).
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Re-render a saved JSON model report.
    Report {
        input: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Model(_) | Error::Shape(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn read(path: &PathBuf) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn write_output(output: &Output, bytes: &[u8]) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn sweep_text(summaries: &[SweepSummary]) -> String {
    let mut s = String::new();
    for sum in summaries {
        for c in &sum.checks {
            s.push_str(&format!(
                "{:<5} {:<17} {:<34} worst {} (threshold {}) at sample {} [{}]\n",
                if c.passed { "PASS" } else { "FAIL" },
                sum.suite.as_str(),
                c.name,
                fmt_f64(c.worst),
                fmt_f64(c.threshold),
                c.worst_index,
                c.worst_digest
            ));
        }
    }
    s
}

fn extremal_text(r: &SearchResult, passed: bool) -> String {
    format!(
        "{} {:?}: best ratio {} (supremum {}) from restart {} after {} iterations, seed {}, digest {}\n",
        if passed { "PASS" } else { "FAIL" },
        r.functional,
        fmt_f64(r.best_ratio),
        fmt_f64(r.functional.bound()),
        r.best_restart,
        r.iterations_used,
        r.seed,
        r.digest
    )
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Verify {
            suite,
            count,
            seed,
            corrupt,
            output,
        } => {
            let format: Format = output.format.parse()?;
            let cfg = RunConfig {
                count,
                seed,
                ..RunConfig::default()
            };
            cfg.validate()?;
            let suites: Vec<Suite> = match suite {
                SuiteArg::All => Suite::ALL.to_vec(),
                SuiteArg::Ddvv => vec![Suite::Ddvv],
                SuiteArg::Bw => vec![Suite::Bw],
                SuiteArg::Lemma32 => vec![Suite::Lemma32],
                SuiteArg::Lemma33 => vec![Suite::Lemma33],
                SuiteArg::Lemma34 => vec![Suite::Lemma34],
                SuiteArg::FrameInvariance => vec![Suite::FrameInvariance],
                SuiteArg::RelIdentity => vec![Suite::RelIdentity],
            };
            let opts = SweepOptions {
                count,
                seed,
                corrupt,
            };
            let summaries = suites
                .iter()
                .map(|s| sweep_with(*s, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            let bytes = match format {
                Format::Json => to_json_bytes(&summaries)?,
                Format::Text => sweep_text(&summaries).into_bytes(),
                Format::Csv => {
                    return Err(Failure::Config(
                        "verify supports json and text output".into(),
                    ))
                }
            };
            write_output(&output, &bytes)?;
            Ok(summaries.iter().all(|s| s.passed))
        }
        Command::Model {
            name,
            config,
            n,
            m,
            k,
            partition,
            radius,
            grid,
            fd_step,
            margin,
            tol,
            seed,
            output,
        } => {
            let format: Format = output.format.parse()?;
            let chart = match (config, name) {
                (Some(path), _) => {
                    let text = String::from_utf8(read(&path)?)
                        .map_err(|_| Failure::Config(format!("{} is not UTF-8", path.display())))?;
                    let mut c = ChartConfig::from_json(&text)?;
                    c.grid = grid.or(c.grid);
                    c.fd_step = fd_step.or(c.fd_step);
                    c.margin = margin.or(c.margin);
                    c
                }
                (None, Some(model)) => ChartConfig {
                    model,
                    params: ModelParams {
                        n,
                        m,
                        k,
                        partition,
                        radius,
                    },
                    grid,
                    fd_step,
                    margin,
                },
                (None, None) => {
                    return Err(Failure::Config("model needs a name or --config".into()))
                }
            };
            let cfg = RunConfig {
                chart: Some(chart.clone()),
                tol,
                seed,
                format,
                ..RunConfig::default()
            };
            cfg.validate()?;
            let model = chart.build()?;
            let report = analyze(&model, &cfg.analyze_options())?;
            write_output(&output, &report_emit(&report, format)?)?;
            Ok(report.all_checks_pass())
        }
        Command::Extremal {
            functional,
            restarts,
            seed,
            n,
            m,
            max_iters,
            output,
        } => {
            let format: Format = output.format.parse()?;
            let cfg = SearchConfig {
                restarts,
                seed,
                n,
                m,
                max_iters,
                ..SearchConfig::default()
            };
            cfg.validate()?;
            let result = match functional {
                FunctionalArg::Ddvv => maximize_ddvv_ratio(&cfg)?,
                FunctionalArg::Bw => maximize_bw_ratio(&cfg)?,
            };
            let bound = result.functional.bound();
            let passed = result.best_ratio <= bound + EXTREMAL_SLACK
                && result.best_ratio >= EXTREMAL_REACH * bound;
            let bytes = match format {
                Format::Json => to_json_bytes(&result)?,
                Format::Text => extremal_text(&result, passed).into_bytes(),
                Format::Csv => {
                    return Err(Failure::Config(
                        "extremal supports json and text output".into(),
                    ))
                }
            };
            write_output(&output, &bytes)?;
            Ok(passed)
        }
        Command::Report { input, output } => {
            let format: Format = output.format.parse()?;
            let report: PinchReport = from_json_bytes(&read(&input)?)?;
            write_output(&output, &report_emit(&report, format)?)?;
            Ok(report.all_checks_pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
