//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytic::{buchstab_omega, phi0_estimate, phi_estimate, PhiResult};
use crate::arith::{build_spf_sieve, factorize};
use crate::classify::Classification;
use crate::enumerate::{
    b_m, build_count_table, list_b_m, list_class, verify_bm_identity, GrowthFunction, NumberClass,
};
use crate::error::{Error, Result};
use crate::fit::{build_ratio_series, default_starts, fit_report, RatioSeries};
use crate::starters::{
    enumerate_starters, starter_of, verify_lemma_apq_all, verify_lemma_npnu_all,
    verify_starters_up_to, verify_sumset_grid, StarterRecord, SuiteReport,
};

pub const THREADS_ENV: &str = "PHIPRACTICAL_THREADS";

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

/// Largest range for `classify`.
pub const MAX_CLASSIFY_RANGE: u64 = 10_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "phipractical",
    version,
    about = "Counting and verifying φ-practical numbers"
)]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = THREADS_ENV, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class flags for n, or for every integer in n..=to.
    Classify {
        n: u64,
        #[arg(long)]
        to: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Members of a class up to a limit.
    List {
        class: NumberClass,
        #[arg(long)]
        limit: u64,
    },
    /// Exact counts and ratios at several thresholds.
    Table(TableArgs),
    /// Starters up to a limit.
    Starters {
        #[arg(long)]
        limit: u64,
        /// Keep only starters with this squarefull part.
        #[arg(long)]
        squarefull: Option<u64>,
    },
    /// The starter of a φ-practical n.
    StarterOf { n: u64 },
    /// B_m(x), optionally with its members.
    Bm {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        x: u64,
        #[arg(long, value_enum, default_value_t = Theta::Phi)]
        theta: Theta,
        #[arg(long)]
        list: bool,
    },
    /// Φ(x, y): exact count and estimate.
    Phi(PhiArgs),
    /// Φ₀(x, y): exact count and estimate.
    Phi0(PhiArgs),
    /// Buchstab's ω(u).
    Omega {
        #[arg(required = true)]
        u: Vec<f64>,
    },
    /// Fits the ratio model to a `v,count,ratio` series.
    Fit {
        series: PathBuf,
        #[arg(long, value_enum, default_value_t = Starts::Grid)]
        starts: Starts,
    },
    /// Runs a verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theta {
    Phi,
    Practical,
    Dense,
}

impl Theta {
    fn growth(self) -> GrowthFunction {
        match self {
            Theta::Phi => GrowthFunction::PhiPractical,
            Theta::Practical => GrowthFunction::Practical,
            Theta::Dense => GrowthFunction::Dense,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Starts {
    Grid,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    pub class: NumberClass,
    /// Thresholds 10^a..=10^b, written `a..b`.
    #[arg(long, value_parser = parse_range, group = "xs")]
    pub pow10: Option<(u32, u32)>,
    /// Thresholds 2^a..=2^b as a `v,count,ratio` series (φ-practical only).
    #[arg(long, value_parser = parse_range, group = "xs")]
    pub pow2: Option<(u32, u32)>,
    /// Explicit ascending thresholds.
    #[arg(long, value_delimiter = ',', group = "xs")]
    pub thresholds: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct PhiArgs {
    /// One or more x values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<u64>,
    /// One or more y values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub y: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    BmIdentity,
    Startercond,
    Lemma51,
    Lemma52,
    Lemma53,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: Suite,
    #[arg(long, default_value_t = 1)]
    pub m: u64,
    #[arg(long, default_value_t = 100_000)]
    pub x: u64,
    /// Starter bound for `startercond`.
    #[arg(long, default_value_t = 1_000_000)]
    pub limit: u64,
    /// Bound on n for `lemma52` and `lemma53`.
    #[arg(long, default_value_t = 1_000_000)]
    pub nmax: u64,
    /// Exhaustive base scan bound for `lemma53`.
    #[arg(long, default_value_t = 500)]
    pub scan: u64,
}

fn parse_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected a..b, got '{s}'"))?;
    let a: u32 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u32 = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

/// Result of a command that completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    VerificationFailed,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) => EXIT_CAPACITY,
        Error::Invariant(_) => EXIT_FAILED,
        Error::Domain(_) | Error::Parse(_) | Error::Io(_) => EXIT_USAGE,
    }
}

fn pow_thresholds(base: u64, (a, b): (u32, u32)) -> Result<Vec<u64>> {
    (a..=b)
        .map(|k| {
            base.checked_pow(k)
                .ok_or_else(|| Error::Capacity(format!("{base}^{k} overflows")))
        })
        .collect()
}

fn classify_line(c: &Classification) -> String {
    format!(
        "{},{},{},{},{},{}",
        c.n, c.phi_practical, c.weakly_phi_practical, c.practical, c.two_dense, c.squarefree
    )
}

fn write_classify(out: &mut dyn Write, n: u64, to: Option<u64>, format: Format) -> Result<()> {
    let hi = to.unwrap_or(n);
    if n == 0 || hi < n {
        return Err(Error::Domain(format!("bad range {n}..={hi}")));
    }
    if hi - n >= MAX_CLASSIFY_RANGE {
        return Err(Error::Capacity(format!(
            "range longer than {MAX_CLASSIFY_RANGE}"
        )));
    }
    let sieve = if to.is_some() && hi <= crate::arith::MAX_SIEVE_LIMIT {
        Some(build_spf_sieve(hi.max(2))?)
    } else {
        None
    };
    if format == Format::Csv {
        writeln!(
            out,
            "n,phi_practical,weakly_phi_practical,practical,two_dense,squarefree"
        )?;
    }
    let mut records = Vec::new();
    for k in n..=hi {
        let c = Classification::of(&factorize(k, sieve.as_ref())?);
        match format {
            Format::Csv => writeln!(out, "{}", classify_line(&c))?,
            Format::Json => records.push(c),
        }
    }
    if format == Format::Json {
        let json = if to.is_none() {
            serde_json::to_string_pretty(&records[0])
        } else {
            serde_json::to_string_pretty(&records)
        };
        writeln!(out, "{}", json.expect("plain data serializes"))?;
    }
    Ok(())
}

fn write_table(out: &mut dyn Write, args: &TableArgs) -> Result<()> {
    if let Some(range) = args.pow2 {
        if args.class != NumberClass::PhiPractical {
            return Err(Error::Domain("--pow2 series are for the phi class".into()));
        }
        let series = build_ratio_series(range.0, range.1)?;
        out.write_all(series.to_csv().as_bytes())?;
        return Ok(());
    }
    let thresholds = match (&args.pow10, &args.thresholds) {
        (Some(r), _) => pow_thresholds(10, *r)?,
        (None, Some(t)) => t.clone(),
        (None, None) => Vec::new(),
    };
    let table = build_count_table(args.class, &thresholds)?;
    out.write_all(table.to_csv().as_bytes())?;
    Ok(())
}

fn write_phi(out: &mut dyn Write, args: &PhiArgs, squarefree: bool) -> Result<()> {
    writeln!(out, "{}", PhiResult::CSV_HEADER)?;
    for &x in &args.x {
        for &y in &args.y {
            let r = if squarefree {
                phi0_estimate(x, y)?
            } else {
                phi_estimate(x, y)?
            };
            writeln!(out, "{}", r.csv_row())?;
        }
    }
    Ok(())
}

fn write_suite(out: &mut dyn Write, report: &SuiteReport) -> Result<bool> {
    writeln!(out, "{}", report.summary())?;
    for f in report.failures.iter().take(20) {
        writeln!(out, "  {f}")?;
    }
    Ok(report.pass())
}

fn run_verify(out: &mut dyn Write, args: &VerifyArgs) -> Result<bool> {
    let mut all_pass = true;
    let want = |s: Suite| args.suite == s || args.suite == Suite::All;
    if want(Suite::BmIdentity) {
        let m = factorize(args.m, None)?;
        let r = verify_bm_identity(&m, args.x, GrowthFunction::PhiPractical)?;
        writeln!(
            out,
            "{} bm-identity: m={} x={} lhs={} rhs={} (head={} subtracted={} tail={} terms={})",
            if r.pass { "PASS" } else { "FAIL" },
            r.m,
            r.x,
            r.lhs,
            r.rhs,
            r.head,
            r.subtracted,
            r.tail,
            r.terms
        )?;
        all_pass &= r.pass;
    }
    if want(Suite::Startercond) {
        eprintln!("checking starters up to {}", args.limit);
        all_pass &= write_suite(out, &verify_starters_up_to(args.limit)?)?;
    }
    if want(Suite::Lemma51) {
        all_pass &= write_suite(out, &verify_sumset_grid(40, 40, 8))?;
    }
    if want(Suite::Lemma52) {
        all_pass &= write_suite(out, &verify_lemma_apq_all(args.nmax)?)?;
    }
    if want(Suite::Lemma53) {
        all_pass &= write_suite(out, &verify_lemma_npnu_all(args.nmax, args.scan)?)?;
    }
    Ok(all_pass)
}

/// Runs one parsed command, writing results to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    match &cli.command {
        Command::Classify { n, to, format } => write_classify(out, *n, *to, *format)?,
        Command::List { class, limit } => {
            for f in list_class(*limit, *class)? {
                writeln!(out, "{}", f.value())?;
            }
        }
        Command::Table(args) => write_table(out, args)?,
        Command::Starters { limit, squarefull } => {
            writeln!(out, "{}", StarterRecord::CSV_HEADER)?;
            for rec in enumerate_starters(*limit)? {
                if squarefull.is_none_or(|s| s == rec.squarefull_part) {
                    writeln!(out, "{}", rec.csv_row())?;
                }
            }
        }
        Command::StarterOf { n } => {
            let f = factorize(*n, None)?;
            writeln!(out, "{}", starter_of(&f)?)?;
        }
        Command::Bm { m, x, theta, list } => {
            let mf = factorize(*m, None)?;
            if *list {
                for member in list_b_m(&mf, *x, theta.growth())? {
                    writeln!(out, "{}", member.value())?;
                }
            } else {
                writeln!(out, "{}", b_m(&mf, *x, theta.growth())?)?;
            }
        }
        Command::Phi(args) => write_phi(out, args, false)?,
        Command::Phi0(args) => write_phi(out, args, true)?,
        Command::Omega { u } => {
            for &v in u {
                writeln!(out, "{:.12}", buchstab_omega(v)?)?;
            }
        }
        Command::Fit { series, starts } => {
            let file = File::open(series)
                .map_err(|e| Error::Parse(format!("{}: {e}", series.display())))?;
            let data = RatioSeries::read_csv(file)?;
            let starts = match starts {
                Starts::Grid => default_starts(),
            };
            let report = fit_report(&data, &starts)?;
            writeln!(out, "{}", report.to_json())?;
        }
        Command::Verify(args) => {
            if !run_verify(out, args)? {
                return Ok(Outcome::VerificationFailed);
            }
        }
    }
    Ok(Outcome::Ok)
}

fn with_threads<T: Send>(threads: Option<u64>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n as usize)
                .build()
                .map_err(|e| Error::Domain(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = with_threads(cli.threads, || -> Result<Outcome> {
        let mut sink: Box<dyn Write + Send> = match &cli.output {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let outcome = execute(&cli, &mut sink)?;
        sink.flush()?;
        Ok(outcome)
    })
    .and_then(|r| r);
    match result {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::VerificationFailed) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
