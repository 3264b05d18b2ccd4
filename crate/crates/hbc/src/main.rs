use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hbc::cube_json::CubeFile;
use hbc::output::{ResultJson, WFormJson};
use hbc::report::{Report, Status};
use hbc::suites::{run_suite, SuiteOptions, SUITES};
use hbc_core::bott_chern::{ch_of_cube, BottChernOptions, Target};
use hbc_core::cube::EXACT_TOL;
use hbc_core::quadrature::QuadratureScheme;

const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;
const INVALID: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hbc",
    version,
    about = "Higher Bott-Chern forms of metrized exact cubes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    #[value(name = "W")]
    W,
    #[value(name = "TW")]
    Tw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite, or `all`.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replaces the tolerance of every case.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Bott-Chern value of a cube over a point.
    Compute {
        #[arg(long)]
        cube: PathBuf,
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long)]
        nodes_radial: Option<usize>,
        #[arg(long)]
        nodes_angular: Option<usize>,
        #[arg(long)]
        cutoff: Option<f64>,
        /// Exactness tolerance for the cube file.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print I′(W_n) and the triple W_n.
    Wform {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn verify(suite: &str, seed: u64, tol: Option<f64>, report_path: Option<PathBuf>) -> ExitCode {
    let cases = match run_suite(suite, &SuiteOptions { seed, tol }) {
        Ok(c) => c,
        Err(e) => {
            return fail(
                USAGE,
                format!("{e}; known suites: all, {}", SUITES.join(", ")),
            )
        }
    };
    let report = Report::new(suite, seed, cases);
    for c in &report.cases {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        };
        let value = c.value.map_or("-".to_string(), |v| format!("{v:.3e}"));
        println!(
            "{status:5} {}: value {value}, expected {:.3e} ± {:.1e} ({:.2}s)",
            c.name, c.expected, c.tolerance, c.runtime
        );
        if let Some(n) = &c.note {
            println!("      note: {n}");
        }
    }
    if let Some(path) = report_path {
        if let Err(e) = std::fs::write(&path, report.to_json()) {
            return fail(USAGE, format!("cannot write {}: {e}", path.display()));
        }
    }
    let passed = report.cases.iter().filter(|c| c.passed()).count();
    println!(
        "{suite}: {passed}/{} passed (seed {seed})",
        report.cases.len()
    );
    ExitCode::from(if report.passed { PASS } else { FAIL })
}

fn compute(
    path: PathBuf,
    target: TargetArg,
    radial: Option<usize>,
    angular: Option<usize>,
    cutoff: Option<f64>,
    tol: Option<f64>,
) -> ExitCode {
    let src = match std::fs::read_to_string(&path) {
        Ok(s) => s,
        Err(e) => return fail(USAGE, format!("cannot read {}: {e}", path.display())),
    };
    let cube = match CubeFile::parse(&src).and_then(|f| f.to_cube(tol.unwrap_or(EXACT_TOL))) {
        Ok(c) => c,
        Err(e) => return fail(INVALID, e),
    };
    let mut opts = BottChernOptions::default();
    if radial.is_some() || angular.is_some() || cutoff.is_some() {
        // two angular nodes unless given, as in the default pipelines
        match QuadratureScheme::from_flags(radial, Some(angular.unwrap_or(2)), cutoff) {
            Ok(s) => opts = BottChernOptions::uniform(s),
            Err(e) => return fail(USAGE, e),
        }
    }
    let target = match target {
        TargetArg::W => Target::W,
        TargetArg::Tw => Target::TW,
    };
    match ch_of_cube(&cube, target, &opts) {
        Ok(r) => {
            let out = ResultJson::from(&r);
            println!(
                "{}",
                serde_json::to_string_pretty(&out).expect("results serialize")
            );
            ExitCode::from(PASS)
        }
        Err(e) => fail(INVALID, e),
    }
}

fn wform(n: usize, format: Format) -> ExitCode {
    let Some(w) = WFormJson::new(n) else {
        return fail(USAGE, format!("--n must be in 1..=5, got {n}"));
    };
    match format {
        Format::Text => print!("{}", w.text()),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&w).expect("forms serialize")
        ),
    }
    ExitCode::from(PASS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            suite,
            seed,
            tol,
            report,
        } => verify(&suite, seed, tol, report),
        Command::Compute {
            cube,
            target,
            nodes_radial,
            nodes_angular,
            cutoff,
            tol,
        } => compute(cube, target, nodes_radial, nodes_angular, cutoff, tol),
        Command::Wform { n, format } => wform(n, format),
    }
}
