//! `forge`: run transformation jobs, re-verify exported artifacts, and check
//! expressions.
//!
//! Exit status: 0 success, 1 I/O or other failure, 2 invalid configuration
//! or input, 3 singular construction, 4 residual check failed.

mod config;
mod csv;
mod job;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use forge_core::verify::{residual_from_values, TRANSFORMED_TOLERANCE};
use forge_core::{AnalyticExpr, Weight};
use serde::Serialize;

use config::ConfigError;
use report::ToleranceSource;

/// Overrides the default residual tolerance when a config sets none.
const TOLERANCE_ENV: &str = "FORGE_TOLERANCE";

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "Darboux and Bargmann transformations of radial equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the job described by a JSON config and write CSV and JSON artifacts.
    Run { config: PathBuf },
    /// Re-check an exported potential and solution against the radial equation.
    Verify {
        potential: PathBuf,
        solution: PathBuf,
        /// Weight function h(r).
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long, allow_hyphen_values = true)]
        gamma_sq: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Parse an expression and print its canonical form and derivative.
    ParseCheck {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
}

enum Code {
    Ok = 0,
    Other = 1,
    Config = 2,
    Singular = 3,
    Residual = 4,
}

fn classify(err: &anyhow::Error) -> Code {
    for cause in err.chain() {
        if cause.is::<ConfigError>() || cause.is::<serde_json::Error>() {
            return Code::Config;
        }
        if let Some(e) = cause.downcast_ref::<forge_core::Error>() {
            return match e {
                e if e.is_singular() => Code::Singular,
                forge_core::Error::NonFinite { .. } => Code::Other,
                _ => Code::Config,
            };
        }
        if cause.is::<forge_core::ParseError>() {
            return Code::Config;
        }
    }
    Code::Other
}

fn tolerance(config: Option<f64>) -> anyhow::Result<(f64, ToleranceSource)> {
    if let Some(t) = config {
        return Ok((t, ToleranceSource::Config));
    }
    match std::env::var(TOLERANCE_ENV) {
        Ok(text) => match text.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok((t, ToleranceSource::Environment)),
            _ => Err(ConfigError(format!("{TOLERANCE_ENV}={text:?} is not a positive number")).into()),
        },
        Err(_) => Ok((TRANSFORMED_TOLERANCE, ToleranceSource::Default)),
    }
}

/// Write every file to a temporary sibling first and rename afterwards, so
/// a failure part-way leaves no half-written artifact behind.
fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)
            .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, path) in staged {
        tmp.persist(&path)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn run(path: &Path) -> anyhow::Result<Code> {
    let loaded = config::load(path)?;
    let (tol, source) = tolerance(loaded.config.tolerance)?;
    let artifacts = job::run(&loaded.config, &loaded.raw, tol, source)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let dir = base.join(&loaded.config.output.dir);
    write_all(&dir, &artifacts.files)?;
    for r in &artifacts.report.residuals {
        println!(
            "{} {}: max relative residual {:.3e} (tol {:.1e})",
            if r.pass { "ok  " } else { "FAIL" },
            r.label,
            r.max_rel,
            r.tol
        );
    }
    if let Some(d) = artifacts.report.chain_vs_bargmann_supnorm {
        println!("chain vs bargmann sup-norm: {d:.3e}");
    }
    if let Some(d) = artifacts.report.symmetry_defect {
        println!("symmetry defect: {d:.3e}");
    }
    println!("wrote {} files to {}", artifacts.files.len(), dir.display());
    Ok(if artifacts.passed() { Code::Ok } else { Code::Residual })
}

#[derive(Serialize)]
struct VerifyReport {
    potential: String,
    solution: String,
    h: String,
    gamma_sq: f64,
    n: usize,
    max_abs: f64,
    max_rel: f64,
    argmax_node: usize,
    argmax_r: f64,
    tol: f64,
    pass: bool,
}

fn verify(potential: &Path, solution: &Path, h: &str, gamma_sq: f64, tol: Option<f64>) -> anyhow::Result<Code> {
    let (tol, _) = tolerance(tol)?;
    let vt = csv::read(potential)?;
    let pt = csv::read(solution)?;
    let v = vt.column("V").ok_or_else(|| {
        ConfigError(format!(
            "{}: no V column (matrix potentials are not supported)",
            potential.display()
        ))
    })?;
    let phi = pt
        .column("phi")
        .ok_or_else(|| ConfigError(format!("{}: no phi column", solution.display())))?;
    if vt.r.len() != pt.r.len() {
        return Err(ConfigError(format!(
            "grid mismatch: {} has {} rows, {} has {}",
            potential.display(),
            vt.r.len(),
            solution.display(),
            pt.r.len()
        ))
        .into());
    }
    if let Some(i) = (0..vt.r.len()).find(|&i| vt.r[i] != pt.r[i]) {
        return Err(ConfigError(format!("grid mismatch at row {i}: r = {} vs {}", vt.r[i], pt.r[i])).into());
    }
    let grid = vt.grid()?;
    let weight = Weight::new(AnalyticExpr::parse(h)?, &grid)?;
    let rep = residual_from_values(v, weight.h(), phi, gamma_sq, grid.step(), tol)?;
    let out = VerifyReport {
        potential: potential.display().to_string(),
        solution: solution.display().to_string(),
        h: h.to_string(),
        gamma_sq,
        n: grid.len(),
        max_abs: rep.max_abs,
        max_rel: rep.max_rel,
        argmax_node: rep.argmax_node,
        argmax_r: grid.node(rep.argmax_node),
        tol,
        pass: rep.pass,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if rep.pass { Code::Ok } else { Code::Residual })
}

fn parse_check(text: &str) -> anyhow::Result<Code> {
    let expr = AnalyticExpr::parse(text).with_context(|| format!("cannot parse {text:?}"))?;
    println!("expr: {expr}");
    println!("d/dr: {}", expr.derivative());
    Ok(Code::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config } => run(config),
        Command::Verify {
            potential,
            solution,
            h,
            gamma_sq,
            tol,
        } => verify(potential, solution, h, *gamma_sq, *tol),
        Command::ParseCheck { expr } => parse_check(expr),
    };
    let code = outcome.unwrap_or_else(|err| {
        eprintln!("error: {err:#}");
        classify(&err)
    });
    ExitCode::from(code as u8)
}
