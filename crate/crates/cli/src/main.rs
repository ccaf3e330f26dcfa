//! `mkbell`: Bell polynomials, their bounds and classification verdicts from
//! the command line.

mod commands;
mod config;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mkbell::{Error, PolynomialKind};
use serde::Serialize;

use commands::{ClassifyInput, Model, PolySource, Report};
use config::{cap_flag, Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "mkbell",
    version,
    about = "Mermin-Klyshko and Svetlichny Bell polynomials"
)]
struct Cli {
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = config::DEFAULT_SEED, value_parser = parse_seed)]
    seed: u64,
    /// See-saw restarts.
    #[arg(long, global = true, default_value_t = config::DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,
    /// See-saw stopping tolerance, in (0, 1e-2).
    #[arg(long, global = true)]
    seesaw_tol: Option<f64>,
    #[arg(long, global = true)]
    max_sweeps: Option<usize>,
    /// Largest n for local enumeration.
    #[arg(long, global = true)]
    local_cap: Option<u32>,
    /// Largest smaller-block size for hybrid enumeration.
    #[arg(long, global = true)]
    hybrid_block_cap: Option<u32>,
    /// Largest qubit count for dense Bell operators.
    #[arg(long, global = true)]
    spectral_cap: Option<u32>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct PolyArgs {
    /// mk, mk-prime, svetlichny or svetlichny-minus.
    #[arg(value_parser = parse_kind, required_unless_present = "poly_file")]
    kind: Option<PolynomialKind>,
    #[arg(required_unless_present = "poly_file")]
    n: Option<u32>,
    /// Polynomial in canonical text form instead of a built-in.
    #[arg(long, conflicts_with_all = ["kind", "n"])]
    poly_file: Option<PathBuf>,
}

impl PolyArgs {
    fn source(&self) -> PolySource<'_> {
        match (&self.poly_file, self.kind, self.n) {
            (Some(path), _, _) => PolySource::File(path),
            (None, Some(k), Some(n)) => PolySource::Builtin(k, n),
            _ => unreachable!("clap enforces kind and n without --poly-file"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print a polynomial in canonical text form.
    Poly(PolyArgs),
    /// Exact local, hybrid and algebraic bounds with witnesses.
    Bounds {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "local,hybrid,algebraic"
        )]
        models: Vec<Model>,
        /// Single bipartition, e.g. `A=3|B=1,2`.
        #[arg(long)]
        partition: Option<String>,
    },
    /// Quantum maximum by see-saw, optionally for a fixed state.
    Qmax {
        #[command(flatten)]
        poly: PolyArgs,
        /// ghz:<n>, basis:<n>:<index> or file:<path>.
        #[arg(long)]
        state: Option<String>,
        /// Save the maximizing frame in frame-file form.
        #[arg(long)]
        write_frame: Option<PathBuf>,
    },
    /// Entanglement-depth or non-separability verdict.
    Classify {
        #[arg(long, num_args = 2, value_names = ["KIND", "N"], required = true)]
        poly: Vec<String>,
        #[arg(long, allow_hyphen_values = true, group = "input")]
        value: Option<f64>,
        /// Correlation file: `n=<count>` then `<settings> <value>` lines.
        #[arg(long, group = "input")]
        correlations: Option<PathBuf>,
        #[arg(long, group = "input", requires = "frame")]
        state: Option<String>,
        #[arg(long, requires = "state")]
        frame: Option<PathBuf>,
    },
    /// Recompute and check the three-party table of M3 and S3.
    Table1 {
        /// Corrupt one closed form (`M3:<col>` or `S3:<col>`) to exercise
        /// the integrity check.
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

fn parse_kind(s: &str) -> Result<PolynomialKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_seed(s: &str) -> Result<u64, String> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    }
    .map_err(|e| format!("bad seed `{s}`: {e}"))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::NotTabulated(_) => 2,
        Error::ResourceLimit { .. } => 3,
        Error::IncompleteData { .. }
        | Error::Parse { .. }
        | Error::Io { .. }
        | Error::InconsistentInput(_) => 4,
        Error::NumericalIntegrity(_) | Error::Integrity(_) => 5,
    }
}

fn message(e: &Error) -> String {
    match e {
        Error::ResourceLimit { cap, .. } => {
            format!("{e}; raise it with {}", cap_flag(cap))
        }
        _ => e.to_string(),
    }
}

#[derive(Serialize)]
struct Document<'a> {
    schema_version: u32,
    command: &'a str,
    config: &'a RunConfig,
    result: serde_json::Value,
}

fn config_from(cli: &Cli) -> RunConfig {
    let d = RunConfig::default();
    RunConfig {
        seed: cli.seed,
        restarts: cli.restarts,
        seesaw_tolerance: cli.seesaw_tol.unwrap_or(d.seesaw_tolerance),
        max_sweeps: cli.max_sweeps.unwrap_or(d.max_sweeps),
        local_cap: cli.local_cap.unwrap_or(d.local_cap),
        hybrid_block_cap: cli.hybrid_block_cap.unwrap_or(d.hybrid_block_cap),
        spectral_cap: cli.spectral_cap.unwrap_or(d.spectral_cap),
        format: cli.format,
    }
}

fn run(cli: &Cli, cfg: &RunConfig) -> mkbell::Result<Option<(&'static str, Report)>> {
    let Some(command) = &cli.command else {
        return Ok(None);
    };
    let out = match command {
        Command::Poly(p) => ("poly", commands::poly(&p.source())?),
        Command::Bounds {
            poly,
            models,
            partition,
        } => (
            "bounds",
            commands::bounds(&poly.source(), models, partition.as_deref(), cfg)?,
        ),
        Command::Qmax {
            poly,
            state,
            write_frame,
        } => (
            "qmax",
            commands::qmax(
                &poly.source(),
                state.as_deref(),
                write_frame.as_deref(),
                cfg,
            )?,
        ),
        Command::Classify {
            poly,
            value,
            correlations,
            state,
            frame,
        } => {
            let kind: PolynomialKind = poly[0].parse()?;
            let n: u32 = poly[1]
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad party count `{}`", poly[1])))?;
            let input = match (value, correlations, state, frame) {
                (Some(v), None, None, None) => ClassifyInput::Value(*v),
                (None, Some(path), None, None) => ClassifyInput::Correlations(path),
                (None, None, Some(s), Some(f)) => ClassifyInput::StateFrame(s, f),
                _ => {
                    return Err(Error::InvalidArgument(
                        "give exactly one of --value, --correlations or --state with --frame"
                            .into(),
                    ))
                }
            };
            ("classify", commands::classify(kind, n, &input)?)
        }
        Command::Table1 { inject_fault } => {
            ("table1", commands::table1(cfg, inject_fault.as_deref())?)
        }
    };
    Ok(Some(out))
}

/// Writes to stdout; a closed pipe is not an error worth reporting.
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = config_from(&cli);
    if let Err(e) = cfg.validate() {
        eprintln!("mkbell: {}", message(&e));
        return ExitCode::from(exit_code(&e));
    }
    if cli.show_config {
        match cfg.format {
            Format::Text => emit(&cfg.to_text()),
            Format::Structured => {
                let doc = serde_json::json!({ "schema_version": 1, "config": cfg });
                emit(&format!(
                    "{}\n",
                    serde_json::to_string_pretty(&doc).expect("config serializes")
                ));
            }
        }
        return ExitCode::SUCCESS;
    }
    match run(&cli, &cfg) {
        Ok(None) => {
            eprintln!("mkbell: no command given; see --help");
            ExitCode::from(2)
        }
        Ok(Some((command, report))) => {
            match cfg.format {
                Format::Text => emit(&report.text),
                Format::Structured => {
                    let doc = Document {
                        schema_version: 1,
                        command,
                        config: &cfg,
                        result: report.data,
                    };
                    match serde_json::to_string_pretty(&doc) {
                        Ok(s) => emit(&format!("{s}\n")),
                        Err(e) => {
                            eprintln!("mkbell: cannot serialize output: {e}");
                            return ExitCode::from(5);
                        }
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mkbell: {}", message(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
