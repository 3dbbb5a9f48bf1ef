//! The `aniso` command-line front end.
//!
//! Every command reads one flat JSON config; command-line flags override it.
//! Exit codes: 0 success, 1 validation failure, 2 I/O, parse or config
//! error, 3 solver did not converge (outputs are still written).

pub mod check;
pub mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::eigensolver::{minimize_fractional, minimize_local, s_sweep, SolveReport, SweepTable};
use crate::error::{Error, Result};
use crate::exponents::{harmonic_mean, validate, vec_product};
use crate::grid::{read_field, write_field};
use crate::norms::{fractional_components, gradient_norm, mixed_norm};

pub use config::{Mode, PerAxis, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "aniso", version, about = "First eigenvalues of anisotropic and fractional Rayleigh quotients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args, Clone, Default)]
pub struct GlobalArgs {
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for files (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides `rng_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Omit the `# generated ...` first line of CSV files.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand, Clone)]
pub enum Command {
    /// Check the standing assumptions on p (and s).
    Validate,
    /// Norms and seminorms of a field file.
    Norm {
        /// Field file; overrides the `field` key.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Minimize the local quotient.
    Solve,
    /// Minimize the fractional quotient.
    SolveFrac,
    /// Fractional eigenvalues along `s_list` against the local limit.
    SweepS,
    /// Seeded invariant suite.
    Check {
        /// Random problems per dimension.
        #[arg(long, default_value_t = 20)]
        instances: usize,
    },
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Input(String),
    NotConverged,
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Input(_) => 2,
            Failure::NotConverged => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::Parse { .. } | Error::Config(_) => Failure::Input(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

/// Stdout plus the context needed to write files.
pub struct Run {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub timestamp: bool,
    pub stdout: String,
}

impl Run {
    fn emit(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }

    fn write_csv(&self, name: &str, body: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir).map_err(|source| Error::Io {
            path: self.out_dir.clone(),
            source,
        })?;
        let path = self.out_dir.join(name);
        let mut text = String::with_capacity(body.len() + 48);
        if self.timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let _ = writeln!(text, "# generated at unix time {secs}");
        }
        text.push_str(body);
        std::fs::write(&path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }

    fn write_report(&self, report: &SolveReport<f64>) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir).map_err(|source| Error::Io {
            path: self.out_dir.clone(),
            source,
        })?;
        write_field(&report.u, self.out_dir.join("eigenfunction.field"))?;
        self.write_csv("history.csv", &history_csv(report))?;
        Ok(())
    }
}

pub fn history_csv(report: &SolveReport<f64>) -> String {
    let mut s = String::from("iter,Q,residual\n");
    for h in &report.history {
        let _ = writeln!(s, "{},{:e},{:e}", h.iteration, h.q, h.residual);
    }
    s
}

pub fn sweep_csv(table: &SweepTable<f64>) -> String {
    let n = table.rows.first().map_or(1, |r| r.s.len());
    let mut s = String::new();
    let s_cols: Vec<String> = if n == 1 {
        vec!["s".into()]
    } else {
        (1..=n).map(|i| format!("s{i}")).collect()
    };
    let _ = writeln!(
        s,
        "{},lambda_s,lambda_local,lambda_local_limit,ratio,converged",
        s_cols.join(",")
    );
    for r in &table.rows {
        let sv: Vec<String> = r.s.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(
            s,
            "{},{:e},{:e},{:e},{:e},{}",
            sv.join(","),
            r.lambda_s,
            r.lambda_local,
            r.lambda_local_limit,
            r.ratio,
            r.converged
        );
    }
    s
}

fn summary(report: &SolveReport<f64>) -> String {
    format!("lambda,{},converged,{}", report.lambda, report.converged)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cmd_validate(run: &mut Run) -> std::result::Result<(), Failure> {
    let cfg = &run.config;
    let p = cfg.raw_p()?.to_vec();
    let n = cfg.dim()?;
    let s = cfg.raw_s()?;
    let mode = cfg.mode();
    if mode == Mode::Fractional && s.is_none() {
        return Err(Failure::Input("fractional mode needs `s`".into()));
    }
    let report = validate(&p, s.as_deref(), n);
    let positive = p.iter().all(|&x| x > 0.0);
    let pbar = positive.then(|| harmonic_mean(&p).ok()).flatten();
    let spbar = s
        .as_ref()
        .filter(|s| positive && s.len() == p.len())
        .and_then(|s| vec_product(s, &p).ok())
        .and_then(|sp| harmonic_mean(&sp).ok());

    run.emit("condition,ok,value");
    run.emit(format!(
        "ordering,{},{}",
        report.ordering_ok,
        opt(p.iter().copied().reduce(f64::max))
    ));
    run.emit(format!("subcritical,{},{}", report.subcritical_ok, opt(pbar)));
    run.emit(format!("critical_exponent,{},{}", report.pstar.is_some(), opt(report.pstar)));
    if s.is_some() {
        run.emit(format!(
            "fractional_subcritical,{},{}",
            report.fractional_subcritical_ok,
            opt(spbar)
        ));
        run.emit(format!(
            "fractional_embedding,{},{}",
            report.fractional_embedding_ok,
            opt(report.pstar_s)
        ));
    }
    let ok = match mode {
        Mode::Local => report.local_ok(),
        Mode::Fractional => report.fractional_ok(),
    };
    if ok {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("standing assumptions fail in {mode:?} mode").to_lowercase()))
    }
}

fn cmd_norm(run: &mut Run, field: Option<PathBuf>) -> std::result::Result<(), Failure> {
    let path = field
        .or_else(|| run.config.field.clone())
        .ok_or_else(|| Failure::Input("no field file: pass --field or set `field`".into()))?;
    let u = read_field::<f64>(&path)?;
    let p = run.config.exponents()?;
    let s = run.config.raw_s()?;
    run.emit("quantity,value");
    run.emit(format!("mixed_norm,{}", mixed_norm(&u, &p)?));
    run.emit(format!("gradient_norm,{}", gradient_norm(&u, &p)?));
    if let Some(s) = s {
        let setup = run.config.fractional_setup(&s)?;
        let terms = fractional_components(&u, &setup)?;
        let mut total = 0.0;
        for t in &terms {
            let v = t.seminorm();
            total += v;
            run.emit(format!("fractional_axis_{},{}", t.axis + 1, v));
        }
        run.emit(format!("fractional_seminorm,{total}"));
    }
    Ok(())
}

/// Ordering is required; the embedding conditions only matter for the
/// continuous theory, so they are reported and not enforced.
fn precheck(run: &Run, s: Option<&[f64]>) -> std::result::Result<(), Failure> {
    let cfg = &run.config;
    if let Some(k) = cfg.eigen_index.filter(|&k| k != 1) {
        return Err(Failure::Invalid(format!(
            "eigen_index = {k}: only the first (min-Q) eigenvalue is computed; \
             lambda_k = inf over symmetric compact sets of genus >= k of sup Q is not implemented"
        )));
    }
    let p = cfg.raw_p()?;
    let n = cfg.dim()?;
    let report = validate(p, s, n);
    if !report.ordering_ok {
        return Err(Failure::Invalid(format!(
            "p must satisfy 1 < p_1 <= ... <= p_n < inf with n = {n}"
        )));
    }
    if !report.subcritical_ok {
        eprintln!("warning: harmonic mean of p is not below n; the discrete problem is still well posed");
    }
    if s.is_some() && !report.fractional_ok() {
        eprintln!("warning: fractional subcriticality/embedding conditions fail for this (s, p)");
    }
    cfg.solve.validate()?;
    Ok(())
}

fn finish(run: &mut Run, report: &SolveReport<f64>) -> std::result::Result<(), Failure> {
    run.write_report(report)?;
    run.emit(summary(report));
    eprintln!(
        "min-Q eigenvalue {} after {} iterations, residual {:e}, restart {}",
        report.lambda, report.iterations, report.residual, report.restart
    );
    if report.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn cmd_solve(run: &mut Run) -> std::result::Result<(), Failure> {
    precheck(run, None)?;
    let grid = run.config.grid()?;
    let report = minimize_local(&run.config.exponents()?, &grid, &run.config.solve)?;
    finish(run, &report)
}

fn cmd_solve_frac(run: &mut Run) -> std::result::Result<(), Failure> {
    let s = run
        .config
        .raw_s()?
        .ok_or_else(|| Failure::Input("solve-frac needs `s`".into()))?;
    precheck(run, Some(&s))?;
    let grid = run.config.grid()?;
    let setup = run.config.fractional_setup(&s)?;
    let report = minimize_fractional(&setup, &grid, &run.config.solve)?;
    finish(run, &report)
}

fn cmd_sweep(run: &mut Run) -> std::result::Result<(), Failure> {
    precheck(run, None)?;
    if run.config.normalized == Some(false) {
        return Err(Failure::Invalid("sweep-s compares against the normalized limit; drop `normalized: false`".into()));
    }
    let s_list = run.config.s_list()?;
    let grid = run.config.grid()?;
    let table = s_sweep(&run.config.exponents()?, &grid, &s_list, &run.config.window(), &run.config.solve)?;
    let path = run.write_csv("sweep.csv", &sweep_csv(&table))?;
    eprintln!(
        "lambda_local_limit minimizes sum_i (2/p_i)^(1/p_i) |u_xi|_pi / |u|_p, a derived normalization of the s -> 1 limit"
    );
    run.emit(format!("rows,{},converged,{}", table.rows.len(), table.all_converged()));
    eprintln!("wrote {}", path.display());
    if table.all_converged() {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn cmd_check(run: &mut Run, instances: usize) -> std::result::Result<(), Failure> {
    let rows = check::run_checks(run.config.solve.rng_seed, instances)?;
    run.emit("invariant,max_error,pass");
    for r in &rows {
        run.emit(format!("{},{:e},{}", r.invariant, r.value, r.pass));
    }
    if rows.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::Invalid("invariant suite failed".into()))
    }
}

/// Loads the config and applies flag overrides.
pub fn prepare(global: &GlobalArgs) -> std::result::Result<Run, Failure> {
    let mut config = match &global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = global.seed {
        config.solve.rng_seed = seed;
    }
    let out_dir = global
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Run {
        config,
        out_dir,
        timestamp: !global.no_timestamp,
        stdout: String::new(),
    })
}

/// Executes one command; stdout text accumulates in `run.stdout` even on
/// failure.
pub fn execute(command: &Command, run: &mut Run) -> std::result::Result<(), Failure> {
    match command {
        Command::Validate => cmd_validate(run),
        Command::Norm { field } => cmd_norm(run, field.clone()),
        Command::Solve => cmd_solve(run),
        Command::SolveFrac => cmd_solve_frac(run),
        Command::SweepS => cmd_sweep(run),
        Command::Check { instances } => cmd_check(run, *instances),
    }
}

fn configure_threads(threads: Option<usize>) -> std::result::Result<(), Failure> {
    if let Some(k) = threads {
        if k == 0 {
            return Err(Failure::Input("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Input(e.to_string()))?;
    }
    Ok(())
}

/// Entry point used by the binary.
pub fn main_with(cli: Cli) -> ExitCode {
    let result = configure_threads(cli.global.threads).and_then(|()| {
        let mut run = prepare(&cli.global)?;
        let res = execute(&cli.command, &mut run);
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(run.stdout.as_bytes());
        let _ = out.flush();
        res
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(msg) | Failure::Input(msg) => eprintln!("error: {msg}"),
                Failure::NotConverged => eprintln!("error: solver did not reach tol_residual; outputs written"),
            }
            ExitCode::from(f.code())
        }
    }
}
