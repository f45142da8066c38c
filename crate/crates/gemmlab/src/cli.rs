//! Command-line entry point: `gen`, `verify`, `bench`, and `report`
//! subcommands.
//!
//! Exit codes: 0 on success, 1 on runtime or verification failure, 2 on
//! usage errors (including invalid flag values; clap reports those itself).
//!
//! Environment variables: `GEMMLAB_OUT_DIR` prefixes relative output paths,
//! `GEMMLAB_SEED` replaces the built-in default seed. Explicit flags always
//! win over both.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{
    self, derive_seed, ExperimentPlan, PlanFile, Repetitions, SeedRole, TrialWriter,
};
use crate::kernels::{matmul_naive, KernelVariant, DEFAULT_TILE};
use crate::report::{fit_all, render, summarize_trials, ReportFormat};
use crate::rng::RandomStream;

/// Relative Frobenius tolerance for the tiled-vs-naive equivalence check.
pub const TILED_REL_TOL: f64 = 1e-10;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_SIZES: &str = "32,64,128,256,512,1024";
const DEFAULT_VERIFY_SIZES: &str = "1,2,3,4,5,6,7,8,32,64,100,128";
const DEFAULT_WORKERS: &str = "1,2,4,8,16";
const DEFAULT_VERIFY_WORKERS: &str = "1,2,4,8";

#[derive(Parser)]
#[command(
    name = "gemmlab",
    version,
    about = "Dense matrix-multiplication performance laboratory",
    disable_help_subcommand = true
)]
struct Cli {
    /// Print plan resolution and progress details to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded Gaussian matrix and write it as CSV.
    Gen(GenArgs),
    /// Check every kernel variant against the naive reference.
    Verify(VerifyArgs),
    /// Run a benchmark plan, streaming trial records to CSV.
    Bench(BenchArgs),
    /// Aggregate a trial CSV into a summary report.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of rows, at least 1.
    #[arg(long, value_parser = parse_positive)]
    rows: usize,
    /// Number of columns, at least 1.
    #[arg(long, value_parser = parse_positive)]
    cols: usize,
    /// Generator seed (default: GEMMLAB_SEED or 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma list of sizes: N for square or M:N:P.
    #[arg(long, default_value = DEFAULT_VERIFY_SIZES)]
    sizes: String,
    /// Comma list of variants to check against naive.
    #[arg(long, default_value = "prefetch,tiled,parallel")]
    variants: String,
    /// Seed for the shared input matrices (default: GEMMLAB_SEED or 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Tile edge for the tiled variant.
    #[arg(long, value_parser = parse_positive, default_value_t = DEFAULT_TILE)]
    tile: usize,
    /// Comma list of worker counts for the parallel variant.
    #[arg(long, default_value = DEFAULT_VERIFY_WORKERS)]
    workers: String,
}

#[derive(Args, Default)]
struct BenchArgs {
    /// Plan file with `key = value` lines; explicit flags override it.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Comma list of sizes: N for square or M:N:P [default: 32,64,128,256,512,1024].
    #[arg(long)]
    sizes: Option<String>,
    /// Comma list of variants: naive, prefetch, tiled, parallel [default: naive].
    #[arg(long)]
    variants: Option<String>,
    /// Repetitions per configuration: a count or `auto` [default: 15].
    #[arg(long)]
    reps: Option<String>,
    /// Pilot repetitions used when --reps auto [default: 5].
    #[arg(long)]
    pilot: Option<usize>,
    /// Base seed for input generation (default: GEMMLAB_SEED or 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Untimed warm-up executions per configuration [default: 1].
    #[arg(long)]
    warmup: Option<usize>,
    /// Tile edge for the tiled variant [default: 32].
    #[arg(long)]
    tile: Option<usize>,
    /// Comma list of worker counts the parallel variant sweeps [default: 1,2,4,8,16].
    #[arg(long)]
    workers: Option<String>,
    /// Generate fresh inputs for every repetition.
    #[arg(long)]
    regenerate_per_rep: bool,
    /// Significance level for auto repetition sizing [default: 0.05].
    #[arg(long)]
    alpha: Option<f64>,
    /// Target power for auto repetition sizing [default: 0.8].
    #[arg(long)]
    power: Option<f64>,
    /// Standardized effect size for auto repetition sizing [default: 0.5].
    #[arg(long)]
    effect_size: Option<f64>,
    /// Trial CSV output path [default: trials.csv].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Trial CSV produced by `bench`.
    #[arg(long)]
    input: PathBuf,
    /// Output format: csv, json, or md.
    #[arg(long, default_value = "md")]
    format: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(_) => Err(format!("{s:?} is not a positive integer")),
    }
}

/// Parses the CLI and runs the selected subcommand.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args, cli.verbose),
        Command::Verify(args) => cmd_verify(args, cli.verbose),
        Command::Bench(args) => cmd_bench(args, cli.verbose),
        Command::Report(args) => cmd_report(args, cli.verbose),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("GEMMLAB_SEED").ok()?.trim().parse().ok()
}

/// Relative output paths are resolved under GEMMLAB_OUT_DIR when it is set.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("GEMMLAB_OUT_DIR") {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

fn cmd_gen(args: GenArgs, verbose: bool) -> Result<ExitCode> {
    let seed = args.seed.or_else(env_seed).unwrap_or(DEFAULT_SEED);
    let out = resolve_out(&args.out);
    if verbose {
        eprintln!(
            "gen: {}x{} gaussian matrix, seed {seed}, writing {}",
            args.rows,
            args.cols,
            out.display()
        );
    }
    let matrix = RandomStream::<f64>::new(seed).random_matrix(args.rows, args.cols)?;
    matrix.save_csv(&out)?;
    Ok(ExitCode::SUCCESS)
}

/// Parses "N" or "M:N:P" entries from a comma list.
fn parse_sizes(spec: &str) -> Result<Vec<(usize, usize, usize)>> {
    let mut sizes = Vec::new();
    for entry in spec.split(',') {
        let entry = entry.trim();
        if entry.is_empty() {
            return Err(Error::InvalidSize(spec.to_string()));
        }
        let parts: Vec<&str> = entry.split(':').collect();
        let parse = |s: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(Error::InvalidSize(entry.to_string())),
            }
        };
        let size = match parts.as_slice() {
            [n] => {
                let n = parse(n)?;
                (n, n, n)
            }
            [m, n, p] => (parse(m)?, parse(n)?, parse(p)?),
            _ => return Err(Error::InvalidSize(entry.to_string())),
        };
        sizes.push(size);
    }
    Ok(sizes)
}

fn parse_worker_list(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|s| match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::InvalidPlan(format!("invalid worker count {s:?}"))),
        })
        .collect()
}

/// Expands a variant name list into concrete kernel variants; `parallel`
/// becomes one variant per worker count.
fn parse_variants(spec: &str, tile: usize, workers: &[usize]) -> Result<Vec<KernelVariant>> {
    let mut variants = Vec::new();
    for name in spec.split(',') {
        match name.trim() {
            "naive" => variants.push(KernelVariant::Naive),
            "prefetch" => variants.push(KernelVariant::Prefetch),
            "tiled" => variants.push(KernelVariant::Tiled { tile }),
            "parallel" => {
                for &w in workers {
                    variants.push(KernelVariant::Parallel { workers: w });
                }
            }
            other => return Err(Error::UnknownVariant(other.to_string())),
        }
    }
    Ok(variants)
}

fn cmd_verify(args: VerifyArgs, verbose: bool) -> Result<ExitCode> {
    let seed = args.seed.or_else(env_seed).unwrap_or(DEFAULT_SEED);
    let sizes = parse_sizes(&args.sizes)?;
    let worker_counts = parse_worker_list(&args.workers)?;
    let variants = parse_variants(&args.variants, args.tile, &worker_counts)?;
    if variants.contains(&KernelVariant::Naive) {
        return Err(Error::UnknownVariant(
            "naive is the reference and cannot be verified against itself".into(),
        ));
    }

    // Test-only hook: force a mismatch for the named variant so the failure
    // path is exercisable end to end.
    let inject = std::env::var("GEMMLAB_VERIFY_INJECT_FAULT").ok();

    if verbose {
        eprintln!("verify: seed {seed}, {} sizes, {} variants", sizes.len(), variants.len());
    }

    println!("{:<14} {:<24} {:<12} max error", "size", "variant", "status");
    let mut failures = 0usize;
    for &size in &sizes {
        let (m, n, p) = size;
        let seed_a = derive_seed(seed, size, &KernelVariant::Naive, SeedRole::A);
        let seed_b = derive_seed(seed, size, &KernelVariant::Naive, SeedRole::B);
        let a = RandomStream::<f64>::new(seed_a).random_matrix(m, n)?;
        let b = RandomStream::<f64>::new(seed_b).random_matrix(n, p)?;
        let reference = matmul_naive(&a, &b)?;

        for variant in &variants {
            let mut result = variant.run(&a, &b)?;
            if inject.as_deref() == Some(variant.name()) {
                let bumped = result.get(0, 0) + 1.0;
                result.set(0, 0, bumped);
            }

            let size_label = format!("{m}x{n}x{p}");
            let (ok, detail) = match variant {
                KernelVariant::Tiled { .. } => {
                    let err = result.relative_error(&reference).unwrap_or(f64::INFINITY);
                    (err <= TILED_REL_TOL, format!("{err:.3e} (rel frobenius)"))
                }
                _ => {
                    if result.bit_equal(&reference) {
                        (true, "bit-exact".to_string())
                    } else {
                        let max_abs = result
                            .as_slice()
                            .iter()
                            .zip(reference.as_slice())
                            .map(|(x, y)| (x - y).abs())
                            .fold(0.0f64, f64::max);
                        (false, format!("{max_abs:.3e} (max abs diff)"))
                    }
                }
            };
            let status = if ok { "ok" } else { "FAIL" };
            println!("{size_label:<14} {:<24} {status:<12} {detail}", variant.to_string());
            if !ok {
                failures += 1;
                eprintln!("verify: mismatch for {variant} at {size_label}: {detail}");
            }
        }
    }

    if failures > 0 {
        eprintln!("verify: {failures} check(s) failed");
        return Ok(ExitCode::from(1));
    }
    println!("verify: all checks passed");
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs, verbose: bool) -> Result<ExitCode> {
    let file = match &args.plan {
        Some(path) => PlanFile::load(path)?,
        None => PlanFile::default(),
    };

    // Precedence: explicit flag, then plan file, then environment (seed
    // only), then built-in default.
    let sizes_spec = args
        .sizes
        .or(file.sizes)
        .unwrap_or_else(|| DEFAULT_SIZES.to_string());
    let variants_spec = args
        .variants
        .or(file.variants)
        .unwrap_or_else(|| "naive".to_string());
    let workers_spec = args
        .workers
        .or(file.workers)
        .unwrap_or_else(|| DEFAULT_WORKERS.to_string());
    let tile = args.tile.or(file.tile).unwrap_or(DEFAULT_TILE);
    let reps_spec = args.reps.or(file.reps).unwrap_or_else(|| "15".to_string());
    let pilot = args.pilot.or(file.pilot).unwrap_or(5);
    let seed = args
        .seed
        .or(file.seed)
        .or_else(env_seed)
        .unwrap_or(DEFAULT_SEED);
    let warmup = args.warmup.or(file.warmup).unwrap_or(1);
    let regenerate = args.regenerate_per_rep || file.regenerate_per_rep.unwrap_or(false);
    let alpha = args.alpha.or(file.alpha).unwrap_or(0.05);
    let power = args.power.or(file.power).unwrap_or(0.8);
    let effect_size = args.effect_size.or(file.effect_size).unwrap_or(0.5);
    let out = args
        .out
        .or(file.out.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("trials.csv"));
    let out = resolve_out(&out);

    let repetitions = match reps_spec.trim() {
        "auto" => Repetitions::Auto,
        other => Repetitions::Fixed(other.parse::<usize>().map_err(|_| {
            Error::InvalidPlan(format!("reps must be a count or `auto`, got {other:?}"))
        })?),
    };

    let plan = ExperimentPlan {
        sizes: parse_sizes(&sizes_spec)?,
        variants: parse_variants(&variants_spec, tile, &parse_worker_list(&workers_spec)?)?,
        repetitions,
        seed,
        warmup,
        regenerate_per_rep: regenerate,
        pilot_reps: pilot,
        alpha,
        power,
        effect_size,
    };
    plan.validate()?;

    if verbose {
        eprintln!(
            "bench: {} sizes x {} variants, {:?}, seed {seed}, streaming to {}",
            plan.sizes.len(),
            plan.variants.len(),
            plan.repetitions,
            out.display()
        );
    }

    let mut writer = TrialWriter::create(&out)?;
    let mut count = 0usize;
    harness::run_plan_with(&plan, |record| {
        count += 1;
        if verbose {
            eprintln!(
                "bench: {} {} rep {} -> {:.6}s",
                record.variant,
                format_args!("{}x{}x{}", record.size.0, record.size.1, record.size.2),
                record.rep,
                record.wall_seconds
            );
        }
        writer.write_record(record)
    })?;

    println!("bench: wrote {count} trial(s) to {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(args: ReportArgs, verbose: bool) -> Result<ExitCode> {
    let format: ReportFormat = args.format.parse()?;
    let records = harness::read_trials(&args.input)?;
    if verbose {
        eprintln!("report: {} records from {}", records.len(), args.input.display());
    }
    let (rows, warnings) = summarize_trials(&records)?;
    let fits = fit_all(&rows);
    let document = render(&rows, &fits, &warnings, format)?;

    match &args.out {
        Some(path) => {
            let path = resolve_out(path);
            std::fs::write(&path, document)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            println!("report: wrote {}", path.display());
        }
        None => print!("{document}"),
    }
    Ok(ExitCode::SUCCESS)
}
