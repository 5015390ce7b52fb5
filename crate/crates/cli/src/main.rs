//! `shastry`: runs the verification suites and writes a JSON report.
//!
//! Exit status: 0 when every check passes, 1 when any check fails or errors,
//! 2 on a usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser};
use shastry_core::suite::{self, default_grid, RunConfig, SuiteName};
use shastry_core::Coupling;

/// Every flag can also be set through the SHASTRY_* variable named next to it; flags win.
#[derive(Parser, Debug)]
#[command(name = "shastry", version, about = "Verify the Hubbard-model Lax operator, R-matrix and spectral curves")]
struct Args {
    /// Comma list of curves, elliptic, lax, rmatrix, fibration or all.
    #[arg(long, env = "SHASTRY_SUITE", default_value = "all")]
    suite: String,

    /// Working precision in bits (≥ 64).
    #[arg(long, env = "SHASTRY_PRECISION", default_value_t = 128)]
    precision: u32,

    /// Numeric tolerance 2^(−E); defaults to precision/2 − 12.
    #[arg(long = "tolerance-exponent", env = "SHASTRY_TOLERANCE_EXPONENT")]
    tolerance_exponent: Option<u32>,

    /// Random samples per numeric check.
    #[arg(long, env = "SHASTRY_SAMPLES", default_value_t = 100)]
    samples: usize,

    #[arg(long, env = "SHASTRY_SEED", default_value_t = 0)]
    seed: u64,

    /// Coupling, e.g. 2, 3/2, 1+i; repeat the flag or separate with commas.
    #[arg(long = "u", env = "SHASTRY_U", value_delimiter = ',', allow_hyphen_values = true)]
    u: Vec<String>,

    /// Also run the exact per-base-point Weierstrass reduction.
    #[arg(long, env = "SHASTRY_STRETCH", action = ArgAction::SetTrue)]
    stretch: bool,

    /// Add mutation controls; each passes when its mutant is caught.
    #[arg(long, env = "SHASTRY_MUTATIONS", action = ArgAction::SetTrue)]
    mutations: bool,

    /// Record per-check runtimes (makes reports run-dependent).
    #[arg(long, env = "SHASTRY_TIMINGS", action = ArgAction::SetTrue)]
    timings: bool,

    /// Report path; stdout when absent.
    #[arg(long, env = "SHASTRY_OUT")]
    out: Option<PathBuf>,

    /// Write a CSV of the weights along a λ grid for the first coupling.
    #[arg(long = "emit-weights", env = "SHASTRY_EMIT_WEIGHTS")]
    emit_weights: Option<PathBuf>,
}

fn config(a: &Args) -> Result<RunConfig, String> {
    let mut cfg = RunConfig {
        precision: a.precision,
        tolerance_exponent: a.tolerance_exponent,
        samples: a.samples,
        seed: a.seed,
        suites: SuiteName::parse_list(&a.suite).map_err(|e| e.to_string())?,
        stretch: a.stretch,
        mutations: a.mutations,
        timings: a.timings,
        ..RunConfig::default()
    };
    if !a.u.is_empty() {
        cfg.couplings = a.u.iter().map(|s| s.parse::<Coupling>().map_err(|e| format!("--u {s}: {e}"))).collect::<Result<_, _>>()?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("shastry: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match config(&args) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    if let Some(path) = &args.emit_weights {
        let u = cfg.couplings[0].to_complex(cfg.precision);
        let csv = match suite::emit_weights(&u, cfg.precision, &default_grid()) {
            Ok(s) => s,
            Err(e) => return usage_error(&format!("weights: {e}")),
        };
        if let Err(e) = std::fs::write(path, csv) {
            return usage_error(&format!("{}: {e}", path.display()));
        }
    }
    let report = match suite::run(&cfg) {
        Ok(r) => r,
        Err(e) => return usage_error(&e.to_string()),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &args.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, json + "\n") {
                return usage_error(&format!("{}: {e}", p.display()));
            }
        }
        None => println!("{json}"),
    }
    eprintln!("{} passed, {} failed, {} errors", report.passed, report.failed, report.errors);
    ExitCode::from(report.exit_code() as u8)
}
