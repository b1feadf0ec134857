//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::approx::{certify_kq, CertifyOptions};
use crate::expr::Expr;
use crate::hilbert::write_sparse;
use crate::spingeom::{commutator_growth, spectrum, spectrum_csv, Dirac};
use crate::verify::{run_suite, with_thread_cap, Status, VerifyConfig};
use crate::{Error, Generator, HalfInteger, Precision, Result};

#[derive(Parser, Debug)]
#[command(name = "qsu2", version, about = "Truncated operators on quantum SU(2) and certificates for their identities")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Deformation parameter, 0 < q < 1; echoed verbatim in reports.
    #[arg(long, global = true, default_value = "0.5")]
    q: String,
    /// Truncation as the integer 2J.
    #[arg(long, global = true, default_value_t = 16)]
    jmax: i32,
    /// isospectral | qdirac | c1u,c2u,c1d,c2d
    #[arg(long, global = true, default_value = "isospectral")]
    dirac: String,
    /// Residual bound for exact identities.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = PrecisionArg::Double)]
    precision: PrecisionArg,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PrecisionArg {
    Double,
    Extended,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full certification suite and write the JSON report.
    Verify {
        /// Smallest cutoff (2J) for decay certificates.
        #[arg(long, default_value_t = 40)]
        decay_jmax: i32,
        #[arg(long, default_value_t = 0.15)]
        rate_tol: f64,
    },
    /// Dirac eigenvalues and multiplicities as CSV.
    Spectrum,
    /// Decay certificate for an operator expression.
    Decay {
        expr: String,
        /// Target rate in units of ln(1/q) per unit j.
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.15)]
        rate_tol: f64,
        /// Known polynomial prefactor degree removed before fitting.
        #[arg(long, default_value_t = 0)]
        prefactor_degree: u32,
        /// Also write block norms as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Norm of [D, pi_prime(x)] across truncations, as CSV.
    Growth {
        #[arg(long, default_value = "a")]
        generator: String,
        /// Comma-separated cutoffs, each as 2J.
        #[arg(long, default_value = "10,20,30,40")]
        grid: String,
    },
    /// Write an operator as a sparse matrix file.
    Export { expr: String },
}

fn params(c: &Common) -> Result<crate::Params> {
    let q: f64 = c.q.trim().parse().map_err(|_| Error::Invalid(format!("q must be a decimal number, got {:?}", c.q)))?;
    let precision = match c.precision {
        PrecisionArg::Double => Precision::Double,
        PrecisionArg::Extended => Precision::Extended,
    };
    Ok(crate::Params::new(q)?.with_precision(precision))
}

fn cutoff(twice: i32) -> Result<HalfInteger> {
    if twice < 0 {
        return Err(Error::Invalid(format!("--jmax must be non-negative, got {twice}")));
    }
    Ok(HalfInteger::from_twice(twice))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Invalid(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Invalid(e.to_string())),
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let c = &cli.common;
    let p = params(c)?;
    let dirac: Dirac = c.dirac.parse()?;
    let jmax = cutoff(c.jmax)?;
    match cli.command {
        Command::Verify { decay_jmax, rate_tol } => {
            let mut cfg = VerifyConfig::new(&c.q)?;
            cfg.params = p;
            cfg.jmax = jmax;
            cfg.decay_jmax = cutoff(decay_jmax)?;
            cfg.dirac = dirac;
            cfg.tolerances.exact = c.tol;
            cfg.tolerances.rate_tol = rate_tol;
            let report = run_suite(&cfg)?;
            for check in &report.checks {
                let status = match check.status {
                    Status::Pass => "pass",
                    Status::PassWithNote => "pass (with note)",
                    Status::Fail => "FAIL",
                };
                eprintln!("{:<28} {status}", check.name);
            }
            emit(&c.out, &(report.to_json() + "\n"))?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Spectrum => {
            emit(&c.out, &spectrum_csv(&spectrum(&dirac, jmax, &p)))?;
            Ok(0)
        }
        Command::Decay { expr, alpha, rate_tol, prefactor_degree, csv } => {
            let e: Expr = expr.parse()?;
            let basis = e.basis(jmax)?;
            let op = with_thread_cap(|| e.evaluate(&basis, &dirac, &p))?;
            let opts = CertifyOptions { rate_tol, word_length: e.word_length(), prefactor_degree, ..CertifyOptions::default() };
            let cert = certify_kq(&e.to_string(), &op, alpha, &p, &opts)?;
            for w in &cert.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(path) = csv {
                emit(&Some(path), &cert.csv())?;
            }
            emit(&c.out, &(serde_json::to_string_pretty(&cert).expect("certificate serializes") + "\n"))?;
            Ok(0)
        }
        Command::Growth { generator, grid } => {
            let x = Generator::parse(&generator).ok_or_else(|| Error::Invalid(format!("unknown generator {generator:?}; use a, b, a* or b*")))?;
            let grid = grid
                .split(',')
                .map(|t| t.trim().parse::<i32>().map_err(|_| Error::Invalid(format!("bad grid entry {t:?}"))).and_then(cutoff))
                .collect::<Result<Vec<_>>>()?;
            let g = with_thread_cap(|| commutator_growth(&dirac, x, &p, &grid))?;
            eprintln!("{dirac} {x}: {:?}", g.verdict);
            emit(&c.out, &g.csv())?;
            Ok(0)
        }
        Command::Export { expr } => {
            let e: Expr = expr.parse()?;
            let basis = e.basis(jmax)?;
            let op = e.evaluate(&basis, &dirac, &p)?;
            emit(&c.out, &write_sparse(&op, &c.q))?;
            Ok(0)
        }
    }
}

/// Parse arguments and run; returns the process exit code (0 success or
/// suite pass, 1 suite failure, 2 usage or runtime error).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
