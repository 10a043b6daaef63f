//! Command-line front end: `kernel`, `solve`, `oracle` and `verify`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{parse_config, RunDocument};
use crate::error::{Error, Result};
use crate::io::{fmt_num, write_csv, Provenance};
use crate::kernel::{KernelMethod, Kernels};
use crate::oracle::solve_oracle;
use crate::solver::solve;
use crate::verify::{Outcome, Suite};

#[derive(Debug, Parser)]
#[command(name = "ultraslow", version, about = "Distributed-order subdiffusion: kernels, spectral solver, reference oracle, experiments")]
pub struct Cli {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Override the number of retained modes N.
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    /// Override the seed used by randomized experiments.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the Gauss–Legendre order per ray panel.
    #[arg(long, global = true)]
    pub ray_order: Option<usize>,
    /// Override the Gauss–Legendre order on the arc.
    #[arg(long, global = true)]
    pub arc_order: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Tabulate E_n and G_n by both methods.
    Kernel,
    /// Spectral solution on the configured time grid.
    Solve,
    /// L1 time-stepping reference on the same problem.
    Oracle {
        /// Override the oracle time step.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run experiment suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Decay,
    H2,
    Stability,
    Bounds,
    Smoothness,
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Decay => vec![Suite::Decay],
            SuiteArg::H2 => vec![Suite::H2],
            SuiteArg::Stability => vec![Suite::Stability],
            SuiteArg::Bounds => vec![Suite::Bounds],
            SuiteArg::Smoothness => vec![Suite::Smoothness],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

/// Numeric overrides from the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub modes: Option<usize>,
    pub ray_order: Option<usize>,
    pub arc_order: Option<usize>,
    pub dt: Option<f64>,
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
    pub overrides: Overrides,
    pub seed: Option<u64>,
    pub document: RunDocument,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let mut document = match &cli.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config {
                    key: p.display().to_string(),
                    detail: e.to_string(),
                })?;
                parse_config(&text)?
            }
            None => RunDocument::default(),
        };
        let dt = match &cli.command {
            Command::Oracle { dt } => *dt,
            _ => None,
        };
        let overrides = Overrides { modes: cli.modes, ray_order: cli.ray_order, arc_order: cli.arc_order, dt };
        apply_overrides(&mut document, &overrides, cli.seed)?;
        Ok(Self { command: cli.command, config_path: cli.config, out: cli.out, overrides, seed: cli.seed, document })
    }

    fn command_name(&self) -> &'static str {
        match self.command {
            Command::Kernel => "kernel",
            Command::Solve => "solve",
            Command::Oracle { .. } => "oracle",
            Command::Verify { .. } => "verify",
        }
    }
}

fn out_of_range(key: &str, detail: String) -> Error {
    Error::Config { key: key.to_string(), detail }
}

fn apply_overrides(doc: &mut RunDocument, o: &Overrides, seed: Option<u64>) -> Result<()> {
    if let Some(n) = o.modes {
        doc.operator.modes = n;
    }
    if let Some(r) = o.ray_order {
        if !(2..=64).contains(&r) {
            return Err(out_of_range("--ray-order", format!("{r} not in 2..=64")));
        }
        doc.numerics.kernel.ray_order = r;
    }
    if let Some(a) = o.arc_order {
        if !(2..=128).contains(&a) {
            return Err(out_of_range("--arc-order", format!("{a} not in 2..=128")));
        }
        doc.numerics.kernel.arc_order = a;
    }
    if let Some(dt) = o.dt {
        doc.numerics.oracle.dt = dt;
    }
    if let Some(s) = seed {
        doc.numerics.seed = s;
        doc.verify.seed = s;
    }
    doc.validate()
}

/// Runs one resolved command; the returned code is the process exit status.
pub fn dispatch(run: &RunConfig) -> Result<i32> {
    let doc = &run.document;
    let prov = Provenance::new(run.command_name(), doc)?;
    prov.write(&run.out, doc)?;
    let header = prov.header();
    match &run.command {
        Command::Kernel => kernel_command(doc, &run.out, &header),
        Command::Solve => solve_command(doc, &run.out, &header),
        Command::Oracle { .. } => oracle_command(doc, &run.out, &header),
        Command::Verify { suite } => verify_command(doc, *suite, &run.out, &header),
    }
}

fn kernel_command(doc: &RunDocument, out: &Path, header: &[String]) -> Result<i32> {
    let basis = doc.build_basis()?;
    let kernels = Kernels::new(&doc.weight, &basis, doc.numerics.kernel.clone());
    let modes: Vec<usize> = doc.numerics.table.modes.iter().map(|n| n - 1).collect();
    let times = &doc.numerics.table.times;
    let contour = kernels.tables(&modes, times, KernelMethod::Contour)?;
    let spectral = kernels.tables(&modes, times, KernelMethod::Spectral)?;
    let mut rows = Vec::new();
    for (c, s) in contour.iter().zip(&spectral) {
        for (k, &t) in times.iter().enumerate() {
            let rel = (c.g[k] - s.g[k]).abs() / c.g[k].abs();
            rows.push(vec![
                (c.mode + 1).to_string(),
                fmt_num(t),
                fmt_num(c.e[k]),
                fmt_num(c.g[k]),
                fmt_num(s.g[k]),
                fmt_num(rel),
            ]);
        }
    }
    let path = out.join("kernel.csv");
    write_csv(&path, header, &["n", "t", "E_n", "G_n_contour", "G_n_spectral", "rel_diff"], &rows)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn field_rows(times: &[f64], x: &[f64], values: &[Vec<f64>]) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(times.len() * x.len());
    for (t, row) in times.iter().zip(values) {
        for (xj, u) in x.iter().zip(row) {
            rows.push(vec![fmt_num(*t), fmt_num(*xj), fmt_num(*u)]);
        }
    }
    rows
}

fn solve_command(doc: &RunDocument, out: &Path, header: &[String]) -> Result<i32> {
    let basis = Arc::new(doc.build_basis()?);
    let problem = doc.build_problem(basis)?;
    let times = doc.output_times()?;
    let field = solve(&problem, &times)?;
    let grid = field.to_grid()?;
    let path = out.join("solution.csv");
    write_csv(&path, header, &["t", "x", "u"], &field_rows(&grid.times, &grid.x, &grid.values))?;

    let mut columns = vec!["t".to_string(), "L2".to_string()];
    let mut norms = vec![field.norms(0.0)?];
    for &k in &doc.problem.kappa {
        columns.push(format!("DA_kappa_{k}"));
        norms.push(field.norms(k)?);
    }
    let rows: Vec<Vec<String>> = (0..times.len())
        .map(|i| std::iter::once(fmt_num(times[i])).chain(norms.iter().map(|n| fmt_num(n[i]))).collect())
        .collect();
    let cols: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let npath = out.join("norms.csv");
    write_csv(&npath, header, &cols, &rows)?;
    println!("wrote {} and {}", path.display(), npath.display());
    Ok(0)
}

fn oracle_command(doc: &RunDocument, out: &Path, header: &[String]) -> Result<i32> {
    let basis = doc.build_basis()?;
    let (problem, cfg) = doc.build_oracle(&basis)?;
    let full = solve_oracle(&problem, &cfg)?;
    let times = doc.output_times()?;
    let mut values = Vec::with_capacity(times.len());
    for &t in &times {
        let k = (t / cfg.dt).round() as usize;
        if k == 0 || (k as f64 * cfg.dt - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::Config {
                key: "problem.times".into(),
                detail: format!("output time {t} is not a multiple of the oracle step {}", cfg.dt),
            });
        }
        values.push(full.values[k - 1].clone());
    }
    let path = out.join("oracle_solution.csv");
    write_csv(&path, header, &["t", "x", "u"], &field_rows(&times, &full.x, &values))?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn verify_command(doc: &RunDocument, suite: SuiteArg, out: &Path, header: &[String]) -> Result<i32> {
    let mut status = 0;
    for s in suite.suites() {
        match s.run(&doc.verify) {
            Ok(mut report) => {
                report.write_to(out, header)?;
                print!("{}", report.summary());
                if report.outcome() != Outcome::Pass {
                    status = 1;
                }
            }
            Err(e) => {
                eprintln!("error [suite {}]: {e}", s.name());
                status = 1;
            }
        }
    }
    Ok(status)
}

/// Parses arguments, runs, and maps every failure to an exit status:
/// 2 for usage errors, 1 for run failures.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let name = match cli.command {
        Command::Kernel => "kernel",
        Command::Solve => "solve",
        Command::Oracle { .. } => "oracle",
        Command::Verify { .. } => "verify",
    };
    match RunConfig::from_cli(cli).and_then(|r| dispatch(&r)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{name}]: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["ultraslow", "frobnicate"]), 2);
        assert_eq!(run(["ultraslow"]), 2);
    }

    #[test]
    fn overrides_are_range_checked() {
        let mut doc = RunDocument::default();
        let o = Overrides { ray_order: Some(1000), ..Default::default() };
        assert!(apply_overrides(&mut doc, &o, None).is_err());
        let o = Overrides { modes: Some(16), ..Default::default() };
        apply_overrides(&mut doc, &o, Some(7)).unwrap();
        assert_eq!(doc.operator.modes, 16);
        assert_eq!(doc.verify.seed, 7);
    }
}
