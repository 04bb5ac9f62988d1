//! `nqdelta`: JSON-spec driven front end for nqdelta-core.

mod error;
mod report;
mod run;
mod spec;

use std::io::{Read, Write};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};

use nqdelta_core::duality::Variant;
use nqdelta_core::spaces::Base;
use nqdelta_core::{Mode, Rational};

use error::CliError;
use run::Command;
use spec::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaseArg {
    C0,
    C,
    Linf,
}

impl From<BaseArg> for Base {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::C0 => Base::C0,
            BaseArg::C => Base::C,
            BaseArg::Linf => Base::Linf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Derived,
    Printed,
}

/// Computations on weighted-mean difference sequence spaces.
///
/// Exit status: 0 holds or computed, 1 fails, 2 inconclusive, 3 unreadable or
/// malformed spec, 4 invalid weights, 5 other invalid input, 6 unsupported
/// class pair, 7 singular matrix, 8 matrix not in the class, 9 evaluation error.
#[derive(Debug, Parser)]
#[command(name = "nqdelta", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Problem spec file, or `-` for stdin.
    #[arg(long, value_name = "FILE")]
    spec: String,
    /// Largest index scanned by windowed estimates.
    #[arg(long)]
    nmax: Option<usize>,
    /// Tolerance as a rational or decimal, e.g. `1/1000` or `1e-9`.
    #[arg(long)]
    tol: Option<Rational>,
    /// Exact rational arithmetic (the default).
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// f64 arithmetic.
    #[arg(long)]
    float: bool,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Base of the wrapped domain space.
    #[arg(long, value_enum)]
    domain: Option<BaseArg>,
    #[arg(long, value_enum)]
    codomain: Option<BaseArg>,
    /// Skip the class check before measure-of-noncompactness estimates.
    #[arg(long)]
    assume_member: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Omit `generated_at`, making reports byte-for-byte reproducible.
    #[arg(long)]
    no_timestamp: bool,
}

fn read_spec(path: &str) -> Result<ProblemSpec, CliError> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(e.to_string()))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Json(e.to_string()))
}

fn apply_flags(cli: &Cli, spec: &mut ProblemSpec) {
    if cli.exact {
        spec.mode = Some(Mode::Exact);
    }
    if cli.float {
        spec.mode = Some(Mode::Float);
    }
    if let Some(n) = cli.nmax {
        spec.policy.n_max = Some(n);
    }
    if let Some(t) = &cli.tol {
        spec.policy.tol = Some(t.clone());
    }
    if let Some(v) = cli.variant {
        spec.variant = Some(match v {
            VariantArg::Derived => Variant::Derived,
            VariantArg::Printed => Variant::Printed,
        });
    }
    if let Some(d) = cli.domain {
        spec.domain = Some(d.into());
    }
    if let Some(c) = cli.codomain {
        spec.codomain = Some(c.into());
    }
    if cli.assume_member {
        spec.assume_member = true;
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = read_spec(&cli.spec).and_then(|mut spec| {
        apply_flags(&cli, &mut spec);
        run::run(cli.command, &spec)
    });
    match result {
        Ok(mut report) => {
            if !cli.no_timestamp {
                report.generated_at = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .ok()
                    .map(|d| d.as_secs());
            }
            let out = match cli.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
                Format::Text => report.to_text(),
            };
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{}", out.trim_end());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
