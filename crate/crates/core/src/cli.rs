//! The `wigner` command line.
//!
//! Exit codes: 0 pass, 1 verified failure, 2 usage or I/O error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{gen_instance, run_instance, thresholds, Corruption, Instance, InstanceKind, InstanceSpec, RunReport, Verdict};
use crate::selftest::{run_selftest, SelftestConfig, SelftestReport, DEFAULT_SEED};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable that overrides the selftest seed.
pub const SEED_ENV: &str = "WIGNER_SEED";

const DEFAULT_EPSILON: f64 = 1e-2;

#[derive(Parser, Debug)]
#[command(name = "wigner", version, about = "Factor maps that preserve the modulus of a module-valued inner product")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded instance.
    Gen(GenArgs),
    /// Verify and factor an instance, writing the factorization and a run report.
    Factorize(RunArgs),
    /// Check the modulus condition on sample pairs.
    Verify(RunArgs),
    /// Run the acceptance battery.
    Selftest(SelftestArgs),
    /// Print a saved run report or selftest report.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// module-unitary, module-antiunitary, cstar, real, or corrupted-<kind>.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corruption size; implies a corrupted instance.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Index of the corrupted canonical basis element.
    #[arg(long, default_value_t = 0)]
    target: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Fresh samples in addition to the canonical basis.
    #[arg(long, default_value_t = 16)]
    samples: usize,
    #[arg(long, default_value_t = thresholds::DEFAULT_TOL)]
    tol: f64,
    /// Factorization output (factorize only).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the run report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Record wall-clock time in the run report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Base seed; defaults to $WIGNER_SEED, then a fixed constant.
    #[arg(long)]
    seed: Option<u64>,
    /// Seeds per configuration.
    #[arg(long, default_value_t = 100)]
    seeds: usize,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn gen(args: GenArgs) -> Result<i32> {
    let (kind, corrupted) = InstanceKind::parse(&args.kind)?;
    let epsilon = match (corrupted, args.epsilon) {
        (_, Some(e)) => Some(e),
        (true, None) => Some(DEFAULT_EPSILON),
        (false, None) => None,
    };
    let spec = InstanceSpec {
        kind,
        d: args.d,
        m: args.m,
        n: args.n,
        seed: args.seed,
        corruption: epsilon.map(|epsilon| Corruption { epsilon, target: args.target }),
    };
    let json = gen_instance(&spec)?.to_json()?;
    match args.out {
        Some(p) => write(&p, &json)?,
        None => print!("{json}"),
    }
    Ok(EXIT_PASS)
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::from_json(&read(path)?)
}

fn run(args: RunArgs, factorize: bool) -> Result<i32> {
    let inst = load_instance(&args.input)?;
    if factorize {
        let start = Instant::now();
        let (mut report, fac) = run_instance(&inst, args.samples, args.tol)?;
        if args.timing {
            report.wall_clock_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        if let (Some(path), Some(fac)) = (&args.out, &fac) {
            write(path, &(serde_json::to_string_pretty(fac)? + "\n"))?;
        }
        let json = report.to_json()?;
        if let Some(path) = &args.report {
            write(path, &json)?;
        }
        if args.json {
            print!("{json}");
        } else {
            print!("{}", report.render());
        }
        Ok(if report.verdict == Verdict::Pass { EXIT_PASS } else { EXIT_FAIL })
    } else {
        let rep = inst.verify(args.samples, args.tol)?;
        let json = serde_json::to_string_pretty(&rep)? + "\n";
        if let Some(path) = &args.report {
            write(path, &json)?;
        }
        if args.json {
            print!("{json}");
        } else {
            println!(
                "verify {} ({} pairs, max residual {:.3e}, tol {:.1e}, {} offending)",
                if rep.pass { "pass" } else { "FAIL" },
                rep.pair_count,
                rep.max_condition_residual,
                args.tol,
                rep.offending_pairs.len()
            );
            for (i, j) in rep.offending_pairs.iter().take(10) {
                println!("  offending pair ({i}, {j})");
            }
        }
        Ok(if rep.pass { EXIT_PASS } else { EXIT_FAIL })
    }
}

fn selftest(args: SelftestArgs) -> Result<i32> {
    let seed = match args.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| Error::InvalidSpec(format!("{SEED_ENV} is not a u64: `{v}`")))?,
            Err(_) => DEFAULT_SEED,
        },
    };
    let cfg = SelftestConfig { seed, seeds_per_config: args.seeds.max(1), ..Default::default() };
    let report = run_selftest(&cfg);
    let json = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(path) = &args.out {
        write(path, &json)?;
    }
    if args.json {
        print!("{json}");
    } else {
        print!("{}", report.render());
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn report(args: ReportArgs) -> Result<i32> {
    let text = read(&args.input)?;
    if let Ok(r) = serde_json::from_str::<RunReport>(&text) {
        print!("{}", r.render());
        return Ok(if r.verdict == Verdict::Pass { EXIT_PASS } else { EXIT_FAIL });
    }
    let r: SelftestReport = serde_json::from_str(&text)?;
    print!("{}", r.render());
    Ok(if r.pass { EXIT_PASS } else { EXIT_FAIL })
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Factorize(a) => run(a, true),
        Command::Verify(a) => run(a, false),
        Command::Selftest(a) => selftest(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
