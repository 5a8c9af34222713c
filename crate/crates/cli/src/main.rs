use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use rug::{Float, Integer, Rational};

use sdpcert::ipm::{solve_with_big_m, Solution, SolverConfig, SolverError};
use sdpcert::linalg::PrecisionContext;
use sdpcert::polytope::{convex_hull, in_convex_hull, PointSet};
use sdpcert::rump::{default_case, default_config, format_csv, format_table, rump_generate, run_benchmark};
use sdpcert::sdp::SdProblem;
use sdpcert::sos::{certify, verify_certificate, CertifyConfig, CertifyReport, RationalProgram, SosCertificate, SosError};
use sdpcert::text::parse_rational;

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_INVALID: u8 = 4;

#[derive(Parser)]
#[command(name = "sdpcert", version, about = "High-precision SDP solver and exact SOS lower-bound certification")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a semidefinite program from a text file.
    Solve(SolveArgs),
    /// Certify a lower bound for f/g and write the certificate.
    Certify(CertifyArgs),
    /// Check a certificate exactly; exits 0 iff it is valid.
    Verify {
        program: PathBuf,
        certificate: PathBuf,
    },
    /// Generate and certify one instance of Rump's model problem.
    Rump(RumpArgs),
    /// Certify Rump instances n = min-n..=max-n and print the table.
    Bench(BenchArgs),
    /// Convex hull of a point list.
    Hull(HullArgs),
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Working precision in decimal digits.
    #[arg(long)]
    digits: Option<u32>,
    /// Gap weight ν of the potential.
    #[arg(long, value_parser = rational)]
    nu: Option<Rational>,
    /// Duality-gap tolerance.
    #[arg(long, value_parser = rational)]
    eps: Option<Rational>,
    /// Big-M bound on the dual trace.
    #[arg(long, value_parser = rational)]
    m1: Option<Rational>,
    /// Big-M bound on the primal slack trace.
    #[arg(long, value_parser = rational)]
    m2: Option<Rational>,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Write per-iteration CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CertifyFlags {
    #[command(flatten)]
    solver: SolverFlags,
    /// Solver iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Common denominator for rounding the Gram matrix.
    #[arg(long, value_parser = integer)]
    den_bound: Option<Integer>,
    /// Write the certificate to this file.
    #[arg(long)]
    cert: Option<PathBuf>,
    /// Write per-iteration CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    file: PathBuf,
    #[command(flatten)]
    flags: CertifyFlags,
}

#[derive(Args)]
struct RumpArgs {
    #[arg(long)]
    n: usize,
    /// Symmetry case; defaults to 2 for even n and 1 for odd n.
    #[arg(long)]
    k: Option<u8>,
    #[command(flatten)]
    flags: CertifyFlags,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 6)]
    max_n: usize,
    #[arg(long, default_value_t = 4)]
    min_n: usize,
    /// Rows certified concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the table as CSV to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct HullArgs {
    file: PathBuf,
    /// Point to test for membership, as space-separated rationals.
    #[arg(long)]
    query: Option<String>,
}

/// Error carrying the process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait ExitCodeExt<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitCodeExt<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s.trim()).ok_or_else(|| format!("`{s}` is not a rational number"))
}

fn integer(s: &str) -> Result<Integer, String> {
    match rational(s)? {
        r if *r.denom() == 1 && r.cmp0().is_gt() => Ok(r.into_numer_denom().0),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .code(EXIT_USAGE)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .code(EXIT_USAGE)
}

fn fmt_float(v: &Float, digits: u32) -> String {
    let shown = digits.saturating_sub(10).clamp(6, 40) as usize;
    format!("{v:.shown$e}")
}

fn precision(digits: u32) -> Result<PrecisionContext, Failure> {
    PrecisionContext::try_new(digits)
        .ok_or_else(|| anyhow!("--digits must be at least {}", sdpcert::linalg::MIN_DIGITS))
        .code(EXIT_USAGE)
}

fn solver_config(flags: &SolverFlags, digits: u32) -> Result<SolverConfig, Failure> {
    let ctx = precision(flags.digits.unwrap_or(digits))?;
    let mut cfg = SolverConfig::new(ctx.digits());
    if let Some(nu) = &flags.nu {
        cfg.nu = nu.clone();
    }
    cfg.eps = flags.eps.clone();
    cfg.validate().code(EXIT_USAGE)?;
    Ok(cfg)
}

fn run_solve(args: SolveArgs) -> Result<(), Failure> {
    let problem = SdProblem::parse(&read(&args.file)?).code(EXIT_PARSE)?;
    let mut cfg = solver_config(&args.solver, 60)?;
    cfg.max_iter = args.max_iter;
    let m = sdpcert::sdp::default_big_m(&problem);
    let m1 = args.solver.m1.clone().unwrap_or_else(|| m.clone());
    let m2 = args.solver.m2.clone().unwrap_or(m);
    let outcome = solve_with_big_m(&problem, &cfg, m1, m2);
    let (solution, converged) = match outcome {
        Ok(s) => (s, true),
        Err(SolverError::MaxIterations { best, .. }) => (*best, false),
        Err(e) => return Err(e).code(EXIT_SOLVER),
    };
    if let Some(path) = &args.trace {
        write(path, &solution.log.to_csv())?;
    }
    print_solution(&solution);
    if converged {
        Ok(())
    } else {
        Err(anyhow!("no convergence within {} iterations", cfg.max_iter)).code(EXIT_SOLVER)
    }
}

fn print_solution(s: &Solution) {
    let digits = s.ctx.digits();
    for (i, v) in s.x().iter().enumerate() {
        println!("x[{}] = {}", i + 1, fmt_float(v, digits));
    }
    let (primal, dual) = s.base_objectives();
    println!("primal objective = {}", fmt_float(&primal, digits));
    println!("dual objective   = {}", fmt_float(&dual, digits));
    println!("duality gap      = {}", fmt_float(s.gap(), digits));
    if let Some((t, z)) = s.slacks() {
        println!("embedding slacks t = {}, z = {}", fmt_float(&t, digits), fmt_float(&z, digits));
    }
    println!("iterations = {}, digits = {}, converged = {}", s.log.len(), digits, s.converged);
}

fn certify_config(flags: &CertifyFlags, base: CertifyConfig) -> Result<CertifyConfig, Failure> {
    let mut cfg = base;
    let s = &flags.solver;
    if let Some(d) = s.digits {
        cfg.solver.ctx = precision(d)?;
    }
    if let Some(nu) = &s.nu {
        cfg.solver.nu = nu.clone();
    }
    if s.eps.is_some() {
        cfg.solver.eps = s.eps.clone();
    }
    cfg.solver.validate().code(EXIT_USAGE)?;
    if let Some(i) = flags.iters {
        cfg.iters = i;
    }
    cfg.den_bound = flags.den_bound.clone().or(cfg.den_bound);
    cfg.m1 = s.m1.clone().or(cfg.m1);
    cfg.m2 = s.m2.clone().or(cfg.m2);
    Ok(cfg)
}

fn run_certify(prog: &RationalProgram, cfg: &CertifyConfig, flags: &CertifyFlags) -> Result<(), Failure> {
    let report = match certify(prog, cfg) {
        Ok(r) => r,
        Err(e @ (SosError::NoCertificateFound { .. } | SosError::Solver(_))) => return Err(e).code(EXIT_SOLVER),
        Err(e) => return Err(e).code(EXIT_PARSE),
    };
    if let Some(path) = &flags.trace {
        write(path, &report.log.to_csv())?;
    }
    print_report(&report);
    let text = report.best.to_text();
    match &flags.cert {
        Some(path) => {
            write(path, &text)?;
            info!("certificate written to {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn print_report(r: &CertifyReport) {
    println!("basis size = {}, constraints = {}", r.basis_size, r.constraints);
    println!(
        "iterations = {}, digits = {}, secs/iter = {:.3}",
        r.iterations, r.digits, r.seconds_per_iter
    );
    println!("certified lower bound r = {}", sdpcert::rump::decimal_floor(&r.best.r, 25));
    println!("upper bound = {}", fmt_float(&r.upper, r.digits));
}

fn run() -> Result<(), Failure> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return Err(Failure {
                code,
                error: anyhow!(""),
            });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Certify(args) => {
            let prog = RationalProgram::parse(&read(&args.file)?).code(EXIT_PARSE)?;
            let cfg = certify_config(&args.flags, CertifyConfig::new(60, 50))?;
            run_certify(&prog, &cfg, &args.flags)
        }
        Command::Verify { program, certificate } => {
            let prog = RationalProgram::parse(&read(&program)?).code(EXIT_PARSE)?;
            let cert = SosCertificate::parse(&read(&certificate)?).code(EXIT_PARSE)?;
            if verify_certificate(&prog, &cert) {
                println!("valid: f - r g is a sum of squares with r = {}", cert.r);
                Ok(())
            } else {
                Err(anyhow!("certificate is invalid")).code(EXIT_INVALID)
            }
        }
        Command::Rump(args) => {
            let k = args.k.unwrap_or_else(|| default_case(args.n));
            let inst = rump_generate(args.n, k).code(EXIT_USAGE)?;
            let cfg = certify_config(&args.flags, default_config(args.n))?;
            println!("n = {}, k = {}, variables {}", inst.n, inst.k, inst.prog.vars.join(" "));
            run_certify(&inst.prog, &cfg, &args.flags)
        }
        Command::Bench(args) => {
            if args.min_n < 2 || args.min_n > args.max_n {
                return Err(anyhow!("need 2 <= min-n <= max-n")).code(EXIT_USAGE);
            }
            let cases: Vec<(usize, u8)> = (args.min_n..=args.max_n).map(|n| (n, default_case(n))).collect();
            let rows = run_benchmark(&cases, default_config, args.jobs);
            print!("{}", format_table(&rows));
            if let Some(path) = &args.csv {
                write(path, &format_csv(&rows))?;
            }
            if rows.iter().any(Result::is_err) {
                return Err(anyhow!("some rows failed")).code(EXIT_SOLVER);
            }
            Ok(())
        }
        Command::Hull(args) => run_hull(args),
    }
}

fn run_hull(args: HullArgs) -> Result<(), Failure> {
    let points = PointSet::parse(&read(&args.file)?).code(EXIT_PARSE)?;
    let hull = convex_hull(&points);
    println!("dimension {} (ambient {})", hull.affine_dim, hull.ambient_dim());
    println!("vertices {}", hull.vertices.len());
    for v in &hull.vertices {
        println!("  {}", join(v));
    }
    println!("facets {}", hull.facets.len());
    for f in &hull.facets {
        println!("  [{}] . x <= {}", join(&f.normal), f.offset);
    }
    if let Some(q) = &args.query {
        let p: Vec<Rational> = q.split_whitespace().map(rational).collect::<Result<_, _>>().map_err(|e| Failure {
            code: EXIT_PARSE,
            error: anyhow!(e),
        })?;
        if p.len() != hull.ambient_dim() {
            return Err(anyhow!("query has {} coordinates, expected {}", p.len(), hull.ambient_dim())).code(EXIT_USAGE);
        }
        println!("{}", if in_convex_hull(&hull, &p) { "inside" } else { "outside" });
    }
    Ok(())
}

fn join(v: &[Rational]) -> String {
    v.iter().map(Rational::to_string).collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            let msg = format!("{error:#}");
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}
