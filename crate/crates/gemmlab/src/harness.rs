//! Experiment execution: input generation, warm-up control, wall-clock
//! timing, and the repetition policy (fixed count or pilot-then-size).
//!
//! Configurations run strictly sequentially; the only concurrency lives
//! inside `matmul_parallel` calls. Timed regions cover exactly one kernel
//! invocation — input generation is excluded, prefetch's internal transpose
//! is included.

use std::fs::File;
use std::io::{BufWriter, Read as _, Write as _};
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::kernels::KernelVariant;
use crate::rng::{mix64, RandomStream};
use crate::stats::{required_sample_size, summarize, PowerParams};

/// Repetition policy for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repetitions {
    /// Run exactly this many timed repetitions (at least 2).
    Fixed(usize),
    /// Run a pilot, then size the run from the measured variance.
    Auto,
}

/// A declarative sweep: sizes x variants x repetitions, plus seeding and
/// warm-up policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    /// (m, n, p) triples: A is m x n, B is n x p.
    pub sizes: Vec<(usize, usize, usize)>,
    pub variants: Vec<KernelVariant>,
    pub repetitions: Repetitions,
    pub seed: u64,
    /// Untimed executions before measurement starts.
    pub warmup: usize,
    /// Generate fresh inputs for every repetition instead of once per
    /// configuration.
    pub regenerate_per_rep: bool,
    /// Timed repetitions in the pilot phase when `repetitions` is `Auto`.
    pub pilot_reps: usize,
    /// Significance level fed to the sample-size formula in auto mode.
    pub alpha: f64,
    /// Target power fed to the sample-size formula in auto mode.
    pub power: f64,
    /// Standardized effect size fed to the sample-size formula in auto mode.
    pub effect_size: f64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            sizes: vec![
                (32, 32, 32),
                (64, 64, 64),
                (128, 128, 128),
                (256, 256, 256),
                (512, 512, 512),
                (1024, 1024, 1024),
            ],
            variants: vec![KernelVariant::Naive],
            repetitions: Repetitions::Fixed(15),
            seed: 42,
            warmup: 1,
            regenerate_per_rep: false,
            pilot_reps: 5,
            alpha: 0.05,
            power: 0.8,
            effect_size: 0.5,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidPlan("no sizes given".into()));
        }
        for &(m, n, p) in &self.sizes {
            if m == 0 || n == 0 || p == 0 {
                return Err(Error::InvalidPlan(format!(
                    "size {m}:{n}:{p} has a zero dimension"
                )));
            }
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidPlan("no kernel variants given".into()));
        }
        for v in &self.variants {
            match *v {
                KernelVariant::Tiled { tile: 0 } => {
                    return Err(Error::InvalidPlan("tile must be at least 1".into()))
                }
                KernelVariant::Parallel { workers: 0 } => {
                    return Err(Error::InvalidPlan("workers must be at least 1".into()))
                }
                _ => {}
            }
        }
        if let Repetitions::Fixed(n) = self.repetitions {
            if n < 2 {
                return Err(Error::InvalidPlan(format!(
                    "fixed repetitions must be at least 2, got {n}"
                )));
            }
        }
        if self.pilot_reps < 2 {
            return Err(Error::InvalidPlan(format!(
                "pilot repetitions must be at least 2, got {}",
                self.pilot_reps
            )));
        }
        // Surfaces bad alpha/power/effect values before any timing starts.
        PowerParams::new(self.alpha, self.power, self.effect_size, 0.0)
            .map_err(|e| Error::InvalidPlan(e.to_string()))?;
        Ok(())
    }
}

/// Which operand a derived seed feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedRole {
    A,
    B,
}

/// Stable mixing of (base seed, size, variant, role) into an input seed.
///
/// Each component is absorbed into a splitmix64 chain, so any change to any
/// component yields an unrelated seed.
pub fn derive_seed(
    base: u64,
    size: (usize, usize, usize),
    variant: &KernelVariant,
    role: SeedRole,
) -> u64 {
    let fields = [
        size.0 as u64,
        size.1 as u64,
        size.2 as u64,
        match variant {
            KernelVariant::Naive => 1,
            KernelVariant::Prefetch => 2,
            KernelVariant::Tiled { .. } => 3,
            KernelVariant::Parallel { .. } => 4,
        },
        variant.tile().unwrap_or(0) as u64,
        variant.workers().unwrap_or(0) as u64,
        match role {
            SeedRole::A => 1,
            SeedRole::B => 2,
        },
    ];
    let mut h = mix64(base ^ 0x9E37_79B9_7F4A_7C15);
    for field in fields {
        h = mix64(h.wrapping_add(0x9E37_79B9_7F4A_7C15) ^ field);
    }
    h
}

/// Per-repetition seed used when inputs are regenerated for every rep.
pub fn rep_seed(config_seed: u64, rep: usize) -> u64 {
    mix64(config_seed ^ mix64(rep as u64 + 1))
}

/// One timed kernel execution.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub size: (usize, usize, usize),
    pub variant: KernelVariant,
    pub rep: usize,
    pub wall_seconds: f64,
    pub seed_a: u64,
    pub seed_b: u64,
    /// UTC instant the repetition finished, RFC 3339 with milliseconds.
    pub timestamp: String,
}

/// Runs the plan and collects every trial record.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    run_plan_with(plan, |rec| {
        out.push(rec.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Runs the plan, handing each record to `sink` as soon as it is measured so
/// callers can stream results to disk.
///
/// Records are emitted in deterministic plan order: sizes outer, variants
/// inner, repetitions innermost.
pub fn run_plan_with(
    plan: &ExperimentPlan,
    mut sink: impl FnMut(&TrialRecord) -> Result<()>,
) -> Result<()> {
    plan.validate()?;
    for &size in &plan.sizes {
        for variant in &plan.variants {
            run_configuration(plan, size, variant, &mut sink)?;
        }
    }
    Ok(())
}

fn run_configuration(
    plan: &ExperimentPlan,
    size: (usize, usize, usize),
    variant: &KernelVariant,
    sink: &mut impl FnMut(&TrialRecord) -> Result<()>,
) -> Result<()> {
    let (m, n, p) = size;
    let base_seed_a = derive_seed(plan.seed, size, variant, SeedRole::A);
    let base_seed_b = derive_seed(plan.seed, size, variant, SeedRole::B);
    let a = RandomStream::<f64>::new(base_seed_a).random_matrix(m, n)?;
    let b = RandomStream::<f64>::new(base_seed_b).random_matrix(n, p)?;

    for _ in 0..plan.warmup {
        let c = variant.run(&a, &b)?;
        std::hint::black_box(&c);
    }

    let run_one = |rep: usize, sink: &mut dyn FnMut(&TrialRecord) -> Result<()>| -> Result<f64> {
        let (seed_a, seed_b);
        let fresh;
        let (a_ref, b_ref) = if plan.regenerate_per_rep {
            seed_a = rep_seed(base_seed_a, rep);
            seed_b = rep_seed(base_seed_b, rep);
            fresh = (
                RandomStream::<f64>::new(seed_a).random_matrix(m, n)?,
                RandomStream::<f64>::new(seed_b).random_matrix(n, p)?,
            );
            (&fresh.0, &fresh.1)
        } else {
            seed_a = base_seed_a;
            seed_b = base_seed_b;
            (&a, &b)
        };

        let start = Instant::now();
        let c = variant.run(a_ref, b_ref)?;
        let wall_seconds = start.elapsed().as_secs_f64();
        std::hint::black_box(&c);
        if wall_seconds <= 0.0 {
            return Err(Error::ClockFailure);
        }

        let record = TrialRecord {
            size,
            variant: *variant,
            rep,
            wall_seconds,
            seed_a,
            seed_b,
            timestamp: utc_timestamp(),
        };
        sink(&record)?;
        Ok(wall_seconds)
    };

    match plan.repetitions {
        Repetitions::Fixed(count) => {
            for rep in 0..count {
                run_one(rep, sink)?;
            }
        }
        Repetitions::Auto => {
            let mut pilot_times = Vec::with_capacity(plan.pilot_reps);
            for rep in 0..plan.pilot_reps {
                pilot_times.push(run_one(rep, sink)?);
            }
            let pilot_variance = summarize(&pilot_times)?.variance;
            let params = PowerParams::new(plan.alpha, plan.power, plan.effect_size, pilot_variance)
                .map_err(|e| Error::InvalidPlan(e.to_string()))?;
            let total = required_sample_size(&params).max(plan.pilot_reps);
            for rep in plan.pilot_reps..total {
                run_one(rep, sink)?;
            }
        }
    }
    Ok(())
}

/// Header line of the trial CSV stream.
pub const TRIAL_CSV_HEADER: &str =
    "size_m,size_n,size_p,variant,tile,workers,rep,wall_seconds,seed_a,seed_b,timestamp";

/// Formats one record as a trial CSV line (no trailing newline). Seconds use
/// the shortest decimal that round-trips exactly.
pub fn trial_csv_line(r: &TrialRecord) -> String {
    let tile = r.variant.tile().map(|t| t.to_string()).unwrap_or_default();
    let workers = r.variant.workers().map(|w| w.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.size.0,
        r.size.1,
        r.size.2,
        r.variant.name(),
        tile,
        workers,
        r.rep,
        r.wall_seconds,
        r.seed_a,
        r.seed_b,
        r.timestamp
    )
}

/// Line-buffered trial CSV writer: every record is flushed as one complete
/// line, so an interrupted run leaves a loadable prefix.
pub struct TrialWriter {
    out: BufWriter<File>,
    path: String,
}

impl TrialWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let display = path.as_ref().display().to_string();
        let file = File::create(path.as_ref()).map_err(|e| Error::io(&display, e))?;
        let mut w = TrialWriter {
            out: BufWriter::new(file),
            path: display,
        };
        w.write_line(TRIAL_CSV_HEADER)?;
        Ok(w)
    }

    fn write_line(&mut self, line: &str) -> Result<()> {
        self.out
            .write_all(line.as_bytes())
            .and_then(|_| self.out.write_all(b"\n"))
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn write_record(&mut self, r: &TrialRecord) -> Result<()> {
        self.write_line(&trial_csv_line(r))
    }
}

/// Parses a trial CSV stream written by [`TrialWriter`].
pub fn read_trials(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let display = path.as_ref().display().to_string();
    let mut text = String::new();
    File::open(path.as_ref())
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(&display, e))?;

    let mut lines = text.split('\n').enumerate();
    match lines.next() {
        Some((_, header)) if header == TRIAL_CSV_HEADER => {}
        _ => {
            return Err(Error::TrialParse {
                path: display,
                line: 1,
                message: format!("missing header {TRIAL_CSV_HEADER:?}"),
            })
        }
    }

    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        records.push(parse_trial_line(&display, idx + 1, line)?);
    }
    Ok(records)
}

fn parse_trial_line(path: &str, line_no: usize, line: &str) -> Result<TrialRecord> {
    let err = |message: String| Error::TrialParse {
        path: path.to_string(),
        line: line_no,
        message,
    };
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 11 {
        return Err(err(format!("expected 11 fields, found {}", fields.len())));
    }
    let parse_usize = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| err(format!("invalid {what} {s:?}")))
    };
    let parse_u64 = |s: &str, what: &str| {
        s.parse::<u64>()
            .map_err(|_| err(format!("invalid {what} {s:?}")))
    };

    let size = (
        parse_usize(fields[0], "size_m")?,
        parse_usize(fields[1], "size_n")?,
        parse_usize(fields[2], "size_p")?,
    );
    let variant = match fields[3] {
        "naive" => KernelVariant::Naive,
        "prefetch" => KernelVariant::Prefetch,
        "tiled" => KernelVariant::Tiled {
            tile: parse_usize(fields[4], "tile")?,
        },
        "parallel" => KernelVariant::Parallel {
            workers: parse_usize(fields[5], "workers")?,
        },
        other => return Err(err(format!("unknown variant {other:?}"))),
    };
    let rep = parse_usize(fields[6], "rep")?;
    let wall_seconds = fields[7]
        .parse::<f64>()
        .map_err(|_| err(format!("invalid wall_seconds {:?}", fields[7])))?;
    let seed_a = parse_u64(fields[8], "seed_a")?;
    let seed_b = parse_u64(fields[9], "seed_b")?;
    Ok(TrialRecord {
        size,
        variant,
        rep,
        wall_seconds,
        seed_a,
        seed_b,
        timestamp: fields[10].to_string(),
    })
}

/// Current UTC time as RFC 3339 with millisecond precision.
pub fn utc_timestamp() -> String {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .unwrap_or_default();
    format_rfc3339(now.as_secs(), now.subsec_millis())
}

fn format_rfc3339(unix_secs: u64, millis: u32) -> String {
    let days = (unix_secs / 86_400) as i64;
    let secs_of_day = unix_secs % 86_400;
    let (year, month, day) = civil_from_days(days);
    format!(
        "{year:04}-{month:02}-{day:02}T{:02}:{:02}:{:02}.{millis:03}Z",
        secs_of_day / 3600,
        (secs_of_day % 3600) / 60,
        secs_of_day % 60,
    )
}

/// Days since 1970-01-01 to (year, month, day), proleptic Gregorian.
fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = (z - era * 146_097) as u64;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let year = yoe as i64 + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if month <= 2 { year + 1 } else { year }, month, day)
}

/// Plan-file keys, all optional; unknown keys are rejected.
///
/// The format is one `key = value` pair per line, `#` starts a comment.
/// Values use the same syntax as the matching CLI flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanFile {
    pub sizes: Option<String>,
    pub variants: Option<String>,
    pub workers: Option<String>,
    pub tile: Option<usize>,
    pub reps: Option<String>,
    pub pilot: Option<usize>,
    pub seed: Option<u64>,
    pub warmup: Option<usize>,
    pub regenerate_per_rep: Option<bool>,
    pub alpha: Option<f64>,
    pub power: Option<f64>,
    pub effect_size: Option<f64>,
    pub out: Option<String>,
}

impl PlanFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let display = path.as_ref().display().to_string();
        let mut text = String::new();
        File::open(path.as_ref())
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::io(&display, e))?;
        Self::parse(&display, &text)
    }

    pub fn parse(path: &str, text: &str) -> Result<Self> {
        let mut plan = PlanFile::default();
        for (idx, raw) in text.split('\n').enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::PlanParse {
                path: path.to_string(),
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(err(format!("empty value for {key:?}")));
            }
            match key {
                "sizes" => plan.sizes = Some(value.to_string()),
                "variants" => plan.variants = Some(value.to_string()),
                "workers" => plan.workers = Some(value.to_string()),
                "tile" => {
                    plan.tile =
                        Some(value.parse().map_err(|_| err(format!("invalid tile {value:?}")))?)
                }
                "reps" => plan.reps = Some(value.to_string()),
                "pilot" => {
                    plan.pilot =
                        Some(value.parse().map_err(|_| err(format!("invalid pilot {value:?}")))?)
                }
                "seed" => {
                    plan.seed =
                        Some(value.parse().map_err(|_| err(format!("invalid seed {value:?}")))?)
                }
                "warmup" => {
                    plan.warmup = Some(
                        value
                            .parse()
                            .map_err(|_| err(format!("invalid warmup {value:?}")))?,
                    )
                }
                "regenerate_per_rep" => {
                    plan.regenerate_per_rep = Some(
                        value
                            .parse()
                            .map_err(|_| err(format!("invalid boolean {value:?}")))?,
                    )
                }
                "alpha" => {
                    plan.alpha =
                        Some(value.parse().map_err(|_| err(format!("invalid alpha {value:?}")))?)
                }
                "power" => {
                    plan.power =
                        Some(value.parse().map_err(|_| err(format!("invalid power {value:?}")))?)
                }
                "effect_size" => {
                    plan.effect_size = Some(
                        value
                            .parse()
                            .map_err(|_| err(format!("invalid effect_size {value:?}")))?,
                    )
                }
                "out" => plan.out = Some(value.to_string()),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        Ok(plan)
    }
}
