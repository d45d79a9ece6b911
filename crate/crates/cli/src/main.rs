use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use mms_cli::experiment::{run_bench, BenchParams};
use mms_cli::io::{
    format_rational, parse_rational, read_instance, write_allocation, write_instance, AllocationFile, LoadError,
};
use mms_cli::report::{aggregates, histogram, parse_tsv, sig6, to_tsv, trend, Mode};
use mms_core::gen::{generate, GenParams};
use mms_core::model::Value;
use mms_core::pipeline::{AnchorRule, Prepared, SolveOptions};
use mms_core::{batch, SolveError};
use num_traits::Zero;

/// Approximate maximin-share allocation under cardinality constraints.
#[derive(Parser)]
#[command(name = "mms", version)]
struct Cli {
    /// Worker threads for corpus runs (default: all cores).
    #[arg(long, global = true, env = "MMS_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file and write its allocation.
    Solve(SolveArgs),
    /// Write generated instances as JSON files.
    Gen(GenArgs),
    /// Generate a corpus, solve it and print a TSV report.
    Bench(BenchArgs),
    /// Turn an oracle-backed report into histogram or trend data.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Anchor {
    FirstInScan,
    Largest,
}

impl From<Anchor> for AnchorRule {
    fn from(a: Anchor) -> Self {
        match a {
            Anchor::FirstInScan => AnchorRule::FirstInScan,
            Anchor::Largest => AnchorRule::Largest,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// Threshold as `p/q` or a decimal.
    #[arg(long, conflicts_with = "bisect", default_value = "1/2")]
    alpha: String,
    /// Search for the largest workable threshold in [lo, hi].
    #[arg(long)]
    bisect: bool,
    #[arg(long, default_value = "1/2", requires = "bisect")]
    lo: String,
    #[arg(long, default_value = "2", requires = "bisect")]
    hi: String,
    #[arg(long, default_value_t = 40, requires = "bisect")]
    iters: usize,
    /// Allocation output (default: `<file stem>.alloc.json` beside the input).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "first-in-scan")]
    anchor: Anchor,
}

#[derive(Args)]
struct GenArgs {
    n: usize,
    count: usize,
    seed: u64,
    #[arg(long, default_value = ".")]
    dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Agent counts, `a..b` (inclusive) or a single value.
    #[arg(long, default_value = "2..10", value_parser = parse_range)]
    n: RangeInclusive<usize>,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Score each allocation against exact maximin shares (small n only).
    #[arg(long)]
    oracle: bool,
    /// Node budget per oracle search.
    #[arg(long, default_value_t = mms_core::exact::DEFAULT_NODE_BUDGET)]
    budget: u64,
    /// Report the bisection optimum instead of the fixed 1/2 threshold.
    #[arg(long)]
    bisect: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "first-in-scan")]
    anchor: Anchor,
}

#[derive(Args)]
#[command(group(ArgGroup::new("kind").required(true).args(["histogram", "trend"])))]
struct ReportArgs {
    file: PathBuf,
    /// Ratio counts per 0.1-wide bin from 0.5, plus [1, inf).
    #[arg(long)]
    histogram: bool,
    /// Mean ratio and full-MMS fraction per agent count.
    #[arg(long)]
    trend: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.trim_start_matches('=');
            let (a, b) = (parse(a)?, parse(b)?);
            if a > b {
                return Err(format!("empty range {s}"));
            }
            Ok(a..=b)
        }
        None => parse(s).map(|n| n..=n),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        batch::init_workers(w.max(1));
    }
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Exit status 2 for bad input, 1 when the solver gives up.
enum Failure {
    Input(anyhow::Error),
    Solver(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn positive(s: &str, what: &str) -> anyhow::Result<Value> {
    let v = parse_rational(s).with_context(|| format!("--{what}"))?;
    if v <= Value::zero() {
        bail!("--{what} must be positive");
    }
    Ok(v)
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let inst = read_instance(&a.file).map_err(|e| match e {
        LoadError::Invalid(v) => anyhow!("invalid instance:\n  {}", v.join("\n  ")),
        LoadError::Parse(e) => e,
    })?;
    let prepared = Prepared::new(&inst).map_err(|e| anyhow!(e))?;
    let opts = SolveOptions { anchor: a.anchor.into(), ..SolveOptions::default() };
    let solver = |e: SolveError| Failure::Solver(anyhow!(e));
    let solution = if a.bisect {
        let (lo, hi) = (positive(&a.lo, "lo")?, positive(&a.hi, "hi")?);
        if lo > hi {
            return Err(anyhow!("--lo exceeds --hi").into());
        }
        prepared.bisect_with(&lo, &hi, a.iters, opts).map_err(solver)?.solution
    } else {
        let alpha = positive(&a.alpha, "alpha")?;
        prepared.solve(&alpha, opts).map_err(solver)?
    };
    let out = a.out.unwrap_or_else(|| default_alloc_path(&a.file));
    let file = AllocationFile::new(solution.allocation.bundles.clone(), &solution.achieved_alpha);
    write_allocation(&out, &file)?;
    for (i, v) in solution.per_agent_value.iter().enumerate() {
        println!("agent {i}: value {} (certified unit {})", format_rational(v), format_rational(&solution.units[i]));
    }
    let alpha = &solution.achieved_alpha;
    println!("achieved alpha {} ({})", format_rational(alpha), sig6(alpha));
    println!("wrote {}", out.display());
    Ok(())
}

fn default_alloc_path(input: &Path) -> PathBuf {
    let stem = input.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
    input.with_file_name(format!("{stem}.alloc.json"))
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    if a.n < 2 {
        return Err(anyhow!("n must be at least 2 (got {})", a.n).into());
    }
    fs::create_dir_all(&a.dir).with_context(|| format!("creating {}", a.dir.display()))?;
    for i in 0..a.count as u64 {
        let seed = a.seed.wrapping_add(i);
        let inst = generate(&GenParams::new(a.n, seed)).map_err(|e| anyhow!(e))?;
        let path = a.dir.join(format!("n{}-seed{seed}.json", a.n));
        write_instance(&path, &inst)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    if *a.n.start() < 2 {
        return Err(anyhow!("agent counts start at 2").into());
    }
    let mut params = BenchParams::new(a.n, a.count, a.seed);
    params.mode = if a.bisect { Mode::Bisect } else { Mode::FixedHalf };
    params.oracle = a.oracle;
    params.node_budget = a.budget;
    params.opts.anchor = a.anchor.into();
    let rows = run_bench(&params).map_err(|e| anyhow!(e))?;
    emit(a.out.as_deref(), &to_tsv(&rows))?;
    eprint!("{}", aggregates(&rows));
    let failed = rows.iter().filter(|r| r.achieved_alpha.is_none()).count();
    if failed > 0 {
        return Err(Failure::Solver(anyhow!("{failed} instances failed at the lower threshold")));
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let rows = parse_tsv(&text)?;
    let data = if a.histogram { histogram(&rows)? } else { trend(&rows)? };
    emit(a.out.as_deref(), &data)?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
