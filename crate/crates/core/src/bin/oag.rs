use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use oag_core::dsl;
use oag_core::fields::{kaplansky_check, transfer_verdict, FieldError, ValuedFieldDescriptor};
use oag_core::group::{h_n, h_n_minus, Element};
use oag_core::ladder::{Ambient, LadderSubgroup};
use oag_core::report::{
    moduli_strings, subgroup_text, CrtPartView, CutView, Report, ReportError, SubgroupOutcome,
};
use oag_core::selftest;

#[derive(Parser)]
#[command(
    name = "oag",
    version,
    about = "Invariants of presented ordered abelian groups"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Spines, k_p, c_G, dp-ranks, verdict and witnesses of a group.
    Analyze { expr: String },
    /// H_n(x) and H_n^-(x) for an element given by its block coefficients.
    Hn {
        expr: String,
        n: u64,
        coeffs: String,
    },
    /// Operations on subgroups `tail(c) + nG` written as modulus vectors such as `(inf,4,1)`.
    Subgroup {
        expr: String,
        op: SubgroupOp,
        a: String,
        b: Option<String>,
    },
    /// Henselian valued fields.
    Field {
        #[command(subcommand)]
        command: FieldCommand,
    },
    /// Cross-check the subgroup calculus against the integer-lattice oracle.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        iters: u64,
    },
}

#[derive(Subcommand)]
enum FieldCommand {
    /// Classify a valued field from a JSON descriptor.
    Classify { descriptor: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SubgroupOp {
    Intersect,
    Sum,
    Index,
    Crt,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Parse(_)
            | ReportError::Json(_)
            | ReportError::Invalid(_)
            | ReportError::Schema(_) => Failure::Input(e.to_string()),
            ReportError::Group(_) | ReportError::Ladder(_) => Failure::Input(e.to_string()),
            ReportError::Rank(_) | ReportError::WitnessFailed(_) => {
                Failure::Internal(e.to_string())
            }
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

#[derive(Serialize)]
struct HnOutput {
    group: String,
    n: u64,
    coeffs: Vec<i64>,
    h_n: CutView,
    h_n_minus: CutView,
}

fn emit_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    println!("{s}");
    Ok(())
}

/// Prints a report after re-checking it round-trips and its witnesses verify.
fn emit_report(report: &Report, format: Format) -> Result<(), Failure> {
    let json = report.to_json();
    let back = Report::from_json(&json)
        .map_err(|e| Failure::Internal(format!("report self-check: {e}")))?;
    if &back != report {
        return Err(Failure::Internal("report does not round-trip".into()));
    }
    match format {
        Format::Json => println!("{json}"),
        Format::Text => print!("{}", report.to_text()),
    }
    Ok(())
}

fn subgroup(
    expr: &str,
    op: SubgroupOp,
    a: &str,
    b: Option<&str>,
    format: Format,
) -> Result<(), Failure> {
    let (g, mut report) = Report::analyze(expr)?;
    let ambient = Ambient::of_group(&g).map_err(input)?;
    let ladder = |text: &str| -> Result<LadderSubgroup, Failure> {
        let moduli = dsl::parse_ladder(text).map_err(input)?;
        LadderSubgroup::new(ambient.clone(), moduli).map_err(input)
    };
    let a = ladder(a)?;
    let second = || -> Result<LadderSubgroup, Failure> {
        ladder(b.ok_or_else(|| Failure::Input("this operation takes two subgroups".into()))?)
    };
    let outcome = match op {
        SubgroupOp::Intersect => {
            let b = second()?;
            let result = a.intersect(&b).map_err(input)?;
            SubgroupOutcome::Intersect {
                a: moduli_strings(&a),
                b: moduli_strings(&b),
                result: moduli_strings(&result),
            }
        }
        SubgroupOp::Sum => {
            let b = second()?;
            let result = a.sum(&b).map_err(input)?;
            SubgroupOutcome::Sum {
                a: moduli_strings(&a),
                b: moduli_strings(&b),
                result: moduli_strings(&result),
            }
        }
        SubgroupOp::Index => {
            let b = second()?;
            let index = a.index(&b).map_err(input)?;
            SubgroupOutcome::Index {
                a: moduli_strings(&a),
                b: moduli_strings(&b),
                index,
            }
        }
        SubgroupOp::Crt => {
            if b.is_some() {
                return Err(Failure::Input("crt takes one subgroup".into()));
            }
            let d = a.decompose_crt();
            if d.recompose()
                .map_err(|e| Failure::Internal(e.to_string()))?
                != a
            {
                return Err(Failure::Internal("CRT parts do not recompose".into()));
            }
            SubgroupOutcome::Crt {
                a: moduli_strings(&a),
                convex: moduli_strings(&d.convex),
                parts: d
                    .parts
                    .iter()
                    .map(|(p, l)| CrtPartView {
                        p: *p,
                        moduli: moduli_strings(l),
                    })
                    .collect(),
            }
        }
    };
    match format {
        Format::Text => {
            println!("{}", subgroup_text(&outcome));
            Ok(())
        }
        Format::Json => {
            report.subgroup = Some(outcome);
            emit_report(&report, format)
        }
    }
}

fn field_classify(path: &PathBuf, format: Format) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let descriptor: ValuedFieldDescriptor = serde_json::from_str(&text).map_err(input)?;
    let vf = descriptor.resolve().map_err(input)?;
    let (_, mut report) = Report::analyze(&descriptor.value_group)?;
    let verdict = transfer_verdict(&vf).map_err(|e| match e {
        FieldError::Rank(_) => Failure::Internal(e.to_string()),
        _ => Failure::Input(e.to_string()),
    })?;
    report.field = Some(verdict);
    report.kaplansky = match kaplansky_check(&vf) {
        Ok(k) => Some(k),
        Err(FieldError::NotResidueCharP) => None,
        Err(e) => return Err(Failure::Internal(e.to_string())),
    };
    emit_report(&report, format)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let format = cli.format;
    match cli.command {
        Command::Analyze { expr } => {
            let (_, report) = Report::analyze(&expr)?;
            emit_report(&report, format)
        }
        Command::Hn { expr, n, coeffs } => {
            let g = dsl::parse(&expr).map_err(input)?;
            let ks = dsl::parse_coeffs(&coeffs).map_err(input)?;
            let x = Element::from_slice(&ks);
            let hn = h_n(&x, n, &g).map_err(input)?;
            let hm = h_n_minus(&x, n, &g).map_err(input)?;
            let out = HnOutput {
                group: g.to_string(),
                n,
                coeffs: ks,
                h_n: CutView::new(&g, hn),
                h_n_minus: CutView::new(&g, hm),
            };
            match format {
                Format::Json => emit_json(&out),
                Format::Text => {
                    println!(
                        "H_{n}   = {}\nH_{n}^- = {}",
                        out.h_n.label, out.h_n_minus.label
                    );
                    Ok(())
                }
            }
        }
        Command::Subgroup { expr, op, a, b } => subgroup(&expr, op, &a, b.as_deref(), format),
        Command::Field {
            command: FieldCommand::Classify { descriptor },
        } => field_classify(&descriptor, format),
        Command::Selftest { seed, iters } => {
            let seed = match std::env::var("OAG_SEED") {
                Ok(s) => s
                    .parse()
                    .map_err(|_| Failure::Input(format!("OAG_SEED is not an integer: {s:?}")))?,
                Err(_) => seed,
            };
            let summary = selftest::run(seed, iters);
            match format {
                Format::Json => emit_json(&summary)?,
                Format::Text => {
                    println!(
                        "seed {} iterations {} checks {} discrepancies {}",
                        summary.seed, summary.iterations, summary.checks, summary.discrepancies
                    );
                    for e in &summary.examples {
                        println!("  {e}");
                    }
                }
            }
            if summary.discrepancies > 0 {
                return Err(Failure::Internal(format!(
                    "{} discrepancies",
                    summary.discrepancies
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(msg) | Failure::Internal(msg)) = &f;
            eprintln!("oag: {msg}");
            ExitCode::from(f.code())
        }
    }
}
