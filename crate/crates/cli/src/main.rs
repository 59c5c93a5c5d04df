use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use eqbtq_core::experiments::{shipped_models, OutputFormat, SCHEMA};
use eqbtq_core::{run, Error, ExperimentConfig, ExperimentKind, ExperimentReport};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "eqbtq",
    version,
    about = "Equivariant Szego/Toeplitz expansions checked against an exact oracle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Overrides the output path from the config ("-" for stdout).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run every runtime property suite.
    Invariants {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the shipped models.
    ListModels,
}

fn threads_from_env() -> Result<(), String> {
    let Ok(raw) = std::env::var("EQBTQ_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("EQBTQ_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::Dimension { .. } => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn report_error(e: &Error) -> ExitCode {
    eprintln!("error [{}]: {e}", e.module());
    ExitCode::from(exit_for(e))
}

fn summarize(report: &ExperimentReport) {
    for (point, check) in report.checks() {
        let label = if point.ends_with(check.name.as_str()) {
            point.to_string()
        } else {
            format!("{point} {}", check.name)
        };
        eprintln!(
            "{} {label}: {:.3e} (tol {:.1e})",
            if check.passed { "PASS" } else { "FAIL" },
            check.value,
            check.tolerance
        );
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{} {} on {}",
        report.experiment.name(),
        if report.passed { "passed" } else { "FAILED" },
        report.model
    );
}

fn emit(
    report: &ExperimentReport,
    path: Option<&PathBuf>,
    format: OutputFormat,
) -> Result<(), Error> {
    let text = report.render(format)?;
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, text)?,
        _ => print!("{text}"),
    }
    Ok(())
}

fn run_config(path: &PathBuf, output: Option<PathBuf>, format: Option<Format>) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    let spec = cfg.output.clone().unwrap_or_default();
    let format = format.map(OutputFormat::from).unwrap_or(spec.format);
    let path = output.or(spec.path);
    if let Err(e) = emit(&report, path.as_ref(), format) {
        return report_error(&e);
    }
    summarize(&report);
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn run_invariants(seed: u64) -> ExitCode {
    let cfg = ExperimentConfig {
        seed,
        ..ExperimentConfig::from_json(&format!(
            r#"{{"schema": "{SCHEMA}", "experiment": "invariants"}}"#
        ))
        .expect("static config")
    };
    debug_assert_eq!(cfg.experiment, ExperimentKind::Invariants);
    match run(&cfg) {
        Ok(report) => {
            summarize(&report);
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Err(e) => report_error(&e),
    }
}

fn list_models() -> ExitCode {
    for m in shipped_models() {
        let kind = match m.weights {
            Some(w) => format!("weights {w:?}"),
            None => format!("chart {:?}", m.chart.expect("chart model")),
        };
        println!("{:<10} d={} {:<22} {}", m.name, m.d, kind, m.description);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = threads_from_env() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match cli.command {
        Command::Run {
            config,
            output,
            format,
        } => run_config(&config, output, format),
        Command::Invariants { seed } => run_invariants(seed),
        Command::ListModels => list_models(),
    }
}
