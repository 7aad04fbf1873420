//! The `atlb` command line.
//!
//! Exit codes: 0 success (for `verify`: valid with a contradiction), 10 valid
//! certificate without a contradiction, 1 invalid certificate or a failed
//! run, 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use atlb_core::analytics::{curve_csv, emit_curve};
use atlb_core::grover::{random_iteration_count, random_iteration_success, simulate_grover, success_probability, SearchInstance};
use atlb_core::kernel::{format_rational, int, parse_rational, rat, Mode, Rational};
use atlb_core::rules::{verify_text, ProofReport};
use atlb_core::search::{bpts_grover_proof, bpts_proof, good_proof, optimality_scan, search_best, SearchOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CONTRADICTION: i32 = 10;

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "atlb", version, about = "Exact alternation-trading proofs: verify, construct and search")]
struct Cli {
    /// key=value file with defaults (tol, max_len, k, workers, out_dir).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for `search` and `optimality`.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Ts,
    Bpts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a proof certificate.
    Verify { file: PathBuf },
    /// Best exponent over all annotations up to a length.
    Search(SearchArgs),
    /// Good proof of height k.
    GoodProof(GoodArgs),
    /// BPTS proof 1^k0^{k+2}, or the Grover contraction with --grover.
    BptsProof(BptsArgs),
    /// Largest root of P_alpha on an alpha grid, as CSV.
    Curve(CurveArgs),
    /// Feasibility of every annotation up to a length at fixed c.
    Optimality(OptimalityArgs),
    /// Grover success probabilities.
    Grover(GroverArgs),
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, value_parser = rational)]
    alpha: Rational,
    #[arg(long, value_enum, default_value = "ts")]
    mode: ModeArg,
    #[arg(long)]
    max_len: Option<usize>,
    /// Replace the generic slowdown by the Grover collapse.
    #[arg(long)]
    grover: bool,
    #[arg(long, value_parser = rational)]
    tol: Option<Rational>,
    /// Also write the winning certificate here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GoodArgs {
    #[arg(long, value_parser = rational)]
    alpha: Rational,
    #[arg(long, value_parser = rational)]
    c: Rational,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_parser = rational, default_value = "100")]
    d: Rational,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BptsArgs {
    #[arg(long, value_parser = rational)]
    c: Rational,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_parser = rational, default_value = "100")]
    d: Rational,
    #[arg(long)]
    grover: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long, value_parser = rational)]
    min: Rational,
    #[arg(long, value_parser = rational)]
    max: Rational,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct OptimalityArgs {
    #[arg(long, value_parser = rational)]
    alpha: Rational,
    #[arg(long, value_parser = rational)]
    c: Rational,
    #[arg(long)]
    max_len: Option<usize>,
}

#[derive(Debug, Args)]
struct GroverArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    marked: u64,
    /// Iteration count; defaults to round(π/(4θ) − 1/2).
    #[arg(long)]
    j: Option<u64>,
}

/// Defaults read from a `--config` file; command-line flags win.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub tol: Rational,
    pub max_len: usize,
    pub k: usize,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config { tol: rat(1, 1_000_000), max_len: 9, k: 20, workers: None, out_dir: None }
    }
}

impl Config {
    /// `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Config, String> {
        let mut cfg = Config::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| format!("config line {}: {key} must be {what}", n + 1);
            let count = |v: &str| v.parse::<usize>().ok().filter(|&x| x > 0);
            match key {
                "tol" => cfg.tol = rational(value).ok().filter(|t| *t > int(0)).ok_or_else(|| bad("a positive rational"))?,
                "max_len" => cfg.max_len = count(value).ok_or_else(|| bad("a positive integer"))?,
                "k" => cfg.k = count(value).ok_or_else(|| bad("a positive integer"))?,
                "workers" => cfg.workers = Some(count(value).ok_or_else(|| bad("a positive integer"))?),
                "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
                _ => return Err(format!("config line {}: unknown key {key}", n + 1)),
            }
        }
        Ok(cfg)
    }

    fn output(&self, path: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }
}

enum Failure {
    Usage(String),
    Run(String),
}

fn run_err(e: impl ToString) -> Failure {
    Failure::Run(e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(run_err)?;
            Ok(pool.install(job))
        }
    }
}

fn report_line(r: &ProofReport) -> String {
    match &r.first_error {
        Some((line, msg)) => format!("invalid: line {line}: {msg}"),
        None => format!(
            "valid contradiction={} speedups={} final_d={}",
            r.contradiction,
            r.speedups,
            format_rational(&r.final_exponent)
        ),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Config::parse(&text).map_err(Failure::Usage)?
        }
        None => Config::default(),
    };
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    if cfg.workers == Some(0) {
        return Err(Failure::Usage("--workers must be positive".into()));
    }
    let w = |out: &mut dyn Write, text: &str| write!(out, "{text}").map_err(run_err);
    match cli.command {
        Command::Verify { file } => {
            let text = fs::read_to_string(&file).map_err(|e| Failure::Run(format!("{}: {e}", file.display())))?;
            let report = verify_text(&text);
            w(out, &format!("{}\n", report_line(&report)))?;
            Ok(match (report.valid, report.contradiction) {
                (true, true) => EXIT_OK,
                (true, false) => EXIT_NO_CONTRADICTION,
                _ => EXIT_FAILURE,
            })
        }
        Command::Search(a) => {
            let mode = match a.mode {
                ModeArg::Ts => Mode::Ts,
                ModeArg::Bpts => Mode::Bpts,
            };
            let max_len = a.max_len.unwrap_or(cfg.max_len);
            if max_len < 3 {
                return Err(Failure::Usage("--max-len must be at least 3".into()));
            }
            let tol = a.tol.unwrap_or_else(|| cfg.tol.clone());
            let opts = if a.grover { SearchOptions::grover() } else { SearchOptions::default() };
            let result = in_pool(cfg.workers, || search_best(max_len, &a.alpha, mode, &tol, &opts))?.map_err(run_err)?;
            match result {
                Some(r) => {
                    w(out, &r.to_string())?;
                    if let Some(path) = &a.out {
                        write_file(&cfg.output(path), &r.certificate.to_string())?;
                    }
                    Ok(EXIT_OK)
                }
                None => {
                    w(out, "no feasible annotation\n")?;
                    Ok(EXIT_NO_CONTRADICTION)
                }
            }
        }
        Command::GoodProof(a) => {
            let k = a.k.unwrap_or(cfg.k);
            let g = good_proof(&a.alpha, &a.c, k, &a.d).map_err(|e| Failure::Usage(e.to_string()))?;
            write_file(&cfg.output(&a.out), &g.certificate.to_string())?;
            w(out, &format!("{}\n", report_line(&g.report)))?;
            for f in &g.failures {
                w(out, &format!("constraint: {f}\n"))?;
            }
            Ok(EXIT_OK)
        }
        Command::BptsProof(a) => {
            let p = if a.grover {
                bpts_grover_proof(&a.c, &a.d)
            } else {
                bpts_proof(a.k.unwrap_or(cfg.k), &a.c, &a.d)
            }
            .map_err(|e| Failure::Usage(e.to_string()))?;
            write_file(&cfg.output(&a.out), &p.certificate.to_string())?;
            w(out, &format!("{}\n", report_line(&p.report)))?;
            if a.grover {
                w(out, &format!("grover rounds={}\n", p.rounds))?;
            }
            Ok(EXIT_OK)
        }
        Command::Curve(a) => {
            let pts = emit_curve(&a.min, &a.max, a.steps).map_err(|e| Failure::Usage(e.to_string()))?;
            let csv = curve_csv(&pts);
            write_file(&cfg.output(&a.out), &csv)?;
            w(out, &format!("wrote {} rows\n", pts.len()))?;
            Ok(EXIT_OK)
        }
        Command::Optimality(a) => {
            let max_len = a.max_len.unwrap_or(cfg.max_len);
            let report = in_pool(cfg.workers, || optimality_scan(&a.alpha, &a.c, max_len, &SearchOptions::default()))?
                .map_err(|e| Failure::Usage(e.to_string()))?;
            w(out, &report.to_string())?;
            Ok(EXIT_OK)
        }
        Command::Grover(a) => {
            let inst = SearchInstance::new(a.n, a.marked).map_err(|e| Failure::Usage(e.to_string()))?;
            let j = a.j.unwrap_or_else(|| (std::f64::consts::FRAC_PI_4 / inst.theta - 0.5).round().max(0.0) as u64);
            w(
                out,
                &format!(
                    "n={} marked={} theta={:.12}\nj={j} success={:.12} simulated={:.12}\nrandom iterations up to {}: average success={:.12}\n",
                    inst.n,
                    inst.marked,
                    inst.theta,
                    success_probability(&inst, j),
                    simulate_grover(&inst, j),
                    random_iteration_count(inst.n),
                    random_iteration_success(&inst)
                ),
            )?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs one invocation (`argv[0]` is the program name) and returns the exit code.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
