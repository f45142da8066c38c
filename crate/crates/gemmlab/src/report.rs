//! Aggregation of trial records into summary tables, speedup/efficiency
//! columns, and the log-log complexity fit, rendered as CSV, JSON, or
//! Markdown.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::TrialRecord;
use crate::kernels::KernelVariant;
use crate::stats::{summarize, Summary};

/// Square sizes below this are excluded from the complexity fit; they sit in
/// cache-resident territory where timer noise bends the power law.
pub const MIN_FIT_SIZE: usize = 128;

type ConfigKey = ((usize, usize, usize), KernelVariant);

/// Aggregated statistics for one (size, variant) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub size: (usize, usize, usize),
    pub variant: KernelVariant,
    pub stats: Summary,
    /// Baseline mean divided by this configuration's mean; `None` when the
    /// size has no baseline configuration.
    pub speedup: Option<f64>,
    /// speedup / workers, parallel variants only.
    pub efficiency: Option<f64>,
}

/// Least-squares fit of log2(mean seconds) against log2(n) over square sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityFit {
    pub variant: KernelVariant,
    pub slope: f64,
    pub r_squared: f64,
    /// Square edge lengths that entered the fit.
    pub sizes: Vec<usize>,
}

/// Output formats for [`render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Groups records by configuration and attaches speedup and efficiency
/// against the per-size baseline.
///
/// The baseline at a size is the naive variant when present, otherwise the
/// workers = 1 parallel variant (thread sweeps). Sizes without either get
/// rows with no speedup plus a warning. Rows are ordered by size, then
/// variant.
pub fn summarize_trials(records: &[TrialRecord]) -> Result<(Vec<SummaryRow>, Vec<String>)> {
    if records.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }

    let mut groups: BTreeMap<ConfigKey, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.size, r.variant))
            .or_default()
            .push(r.wall_seconds);
    }

    let mut baselines: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for (&(size, variant), samples) in &groups {
        let is_baseline = match variant {
            KernelVariant::Naive => true,
            KernelVariant::Parallel { workers: 1 } => !groups
                .keys()
                .any(|&(s, v)| s == size && v == KernelVariant::Naive),
            _ => false,
        };
        if is_baseline {
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            baselines.insert(size, mean);
        }
    }

    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(groups.len());
    for ((size, variant), samples) in groups {
        let stats = summarize(&samples)?;
        let speedup = baselines.get(&size).map(|base| base / stats.mean);
        if speedup.is_none() {
            warnings.push(format!(
                "no baseline configuration for size {}x{}x{}; speedup omitted",
                size.0, size.1, size.2
            ));
        }
        let efficiency = match (variant, speedup) {
            (KernelVariant::Parallel { workers }, Some(s)) => Some(s / workers as f64),
            _ => None,
        };
        rows.push(SummaryRow {
            size,
            variant,
            stats,
            speedup,
            efficiency,
        });
    }
    warnings.dedup();
    Ok((rows, warnings))
}

/// Fits log2(mean seconds) = slope * log2(n) + intercept over the variant's
/// square sizes at or above [`MIN_FIT_SIZE`]. Requires at least three such
/// sizes.
pub fn fit_complexity(rows: &[SummaryRow], variant: &KernelVariant) -> Result<ComplexityFit> {
    let mut points: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| {
            r.variant == *variant
                && r.size.0 == r.size.1
                && r.size.1 == r.size.2
                && r.size.0 >= MIN_FIT_SIZE
        })
        .map(|r| (r.size.0, r.stats.mean))
        .collect();
    points.sort_by_key(|&(n, _)| n);
    points.dedup_by_key(|&mut (n, _)| n);

    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }

    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, t)| t.log2()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let syy: f64 = ys.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };

    Ok(ComplexityFit {
        variant: *variant,
        slope,
        r_squared,
        sizes: points.into_iter().map(|(n, _)| n).collect(),
    })
}

/// Fits every variant that has enough square sizes; variants without enough
/// data are simply absent.
pub fn fit_all(rows: &[SummaryRow]) -> Vec<ComplexityFit> {
    let mut variants: Vec<KernelVariant> = rows.iter().map(|r| r.variant).collect();
    variants.sort();
    variants.dedup();
    variants
        .into_iter()
        .filter_map(|v| fit_complexity(rows, &v).ok())
        .collect()
}

/// Formats `x` with the given number of significant digits, plain decimal.
fn fmt_sig(x: f64, digits: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mut magnitude = x.abs().log10().floor() as i32;
    // Rounding can carry into the next magnitude (0.999999 -> 1.00000).
    let scale = 10f64.powi(digits - 1 - magnitude);
    if (x.abs() * scale).round() / scale >= 10f64.powi(magnitude + 1) {
        magnitude += 1;
    }
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Rounds to six significant digits, for JSON fields carrying ratios.
fn round_sig6(x: f64) -> f64 {
    fmt_sig(x, 6).parse().unwrap_or(x)
}

fn size_label(size: (usize, usize, usize)) -> String {
    let (m, n, p) = size;
    if m == n && n == p {
        format!("{m}x{m}")
    } else {
        format!("{m}x{n}x{p}")
    }
}

/// Column order of the summary CSV.
pub const SUMMARY_CSV_HEADER: &str = "size_m,size_n,size_p,variant,tile,workers,n,\
mean_seconds,variance,std_dev,min_seconds,max_seconds,ci95_half_width,speedup,efficiency";

/// Renders rows and fits in the requested format, with any aggregation
/// warnings carried in the document header (comment lines for csv, a
/// metadata array for json, a blockquote for markdown).
///
/// Seconds-valued columns keep full round-trip precision in csv and json;
/// ratios are reported at six significant digits; markdown rounds everything
/// to six significant digits.
pub fn render(
    rows: &[SummaryRow],
    fits: &[ComplexityFit],
    warnings: &[String],
    format: ReportFormat,
) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(match format {
        ReportFormat::Csv => render_csv(rows, warnings),
        ReportFormat::Json => render_json(rows, fits, warnings),
        ReportFormat::Markdown => render_markdown(rows, fits, warnings),
    })
}

fn render_csv(rows: &[SummaryRow], warnings: &[String]) -> String {
    let mut out = String::new();
    for w in warnings {
        out.push_str(&format!("# warning: {w}\n"));
    }
    out.push_str(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let tile = r.variant.tile().map(|t| t.to_string()).unwrap_or_default();
        let workers = r.variant.workers().map(|w| w.to_string()).unwrap_or_default();
        let speedup = r.speedup.map(|s| fmt_sig(s, 6)).unwrap_or_default();
        let efficiency = r.efficiency.map(|e| fmt_sig(e, 6)).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.size.0,
            r.size.1,
            r.size.2,
            r.variant.name(),
            tile,
            workers,
            r.stats.n,
            r.stats.mean,
            r.stats.variance,
            r.stats.std_dev,
            r.stats.min,
            r.stats.max,
            r.stats.ci95_half_width,
            speedup,
            efficiency,
        ));
    }
    out
}

/// Parses a summary CSV produced by [`render`] back into rows. Leading
/// `#`-comment lines (warnings) are skipped.
pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let err = |line: usize, message: String| Error::TrialParse {
        path: "<summary csv>".into(),
        line,
        message,
    };
    let mut lines = text.split('\n').enumerate().peekable();
    while lines.peek().is_some_and(|(_, l)| l.starts_with('#')) {
        lines.next();
    }
    match lines.next() {
        Some((_, header)) if header == SUMMARY_CSV_HEADER => {}
        _ => return Err(err(1, "missing summary header".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 15 {
            return Err(err(line_no, format!("expected 15 fields, found {}", f.len())));
        }
        let pu = |s: &str| s.parse::<usize>().map_err(|_| err(line_no, format!("bad count {s:?}")));
        let pf = |s: &str| s.parse::<f64>().map_err(|_| err(line_no, format!("bad real {s:?}")));
        let size = (pu(f[0])?, pu(f[1])?, pu(f[2])?);
        let variant = match f[3] {
            "naive" => KernelVariant::Naive,
            "prefetch" => KernelVariant::Prefetch,
            "tiled" => KernelVariant::Tiled { tile: pu(f[4])? },
            "parallel" => KernelVariant::Parallel { workers: pu(f[5])? },
            other => return Err(err(line_no, format!("unknown variant {other:?}"))),
        };
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() { Ok(None) } else { pf(s).map(Some) }
        };
        rows.push(SummaryRow {
            size,
            variant,
            stats: Summary {
                n: pu(f[6])?,
                mean: pf(f[7])?,
                variance: pf(f[8])?,
                std_dev: pf(f[9])?,
                min: pf(f[10])?,
                max: pf(f[11])?,
                ci95_half_width: pf(f[12])?,
            },
            speedup: opt(f[13])?,
            efficiency: opt(f[14])?,
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct JsonReport<'a> {
    metadata: JsonMetadata,
    rows: Vec<JsonRow<'a>>,
    complexity_fits: Vec<JsonFit>,
}

#[derive(Serialize)]
struct JsonMetadata {
    tool: String,
    version: String,
    host_os: String,
    host_arch: String,
    host_parallelism: usize,
    generated_utc: String,
    configurations: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    size: (usize, usize, usize),
    #[serde(flatten)]
    variant: &'a KernelVariant,
    stats: &'a Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    speedup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    efficiency: Option<f64>,
}

#[derive(Serialize)]
struct JsonFit {
    #[serde(flatten)]
    variant: KernelVariant,
    slope: f64,
    r_squared: f64,
    sizes: Vec<usize>,
}

fn render_json(rows: &[SummaryRow], fits: &[ComplexityFit], warnings: &[String]) -> String {
    let report = JsonReport {
        metadata: JsonMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            host_os: std::env::consts::OS.to_string(),
            host_arch: std::env::consts::ARCH.to_string(),
            host_parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            generated_utc: crate::harness::utc_timestamp(),
            configurations: rows.len(),
            warnings: warnings.to_vec(),
        },
        rows: rows
            .iter()
            .map(|r| JsonRow {
                size: r.size,
                variant: &r.variant,
                stats: &r.stats,
                speedup: r.speedup.map(round_sig6),
                efficiency: r.efficiency.map(round_sig6),
            })
            .collect(),
        complexity_fits: fits
            .iter()
            .map(|f| JsonFit {
                variant: f.variant,
                slope: round_sig6(f.slope),
                r_squared: round_sig6(f.r_squared),
                sizes: f.sizes.clone(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serialization");
    s.push('\n');
    s
}

fn render_markdown(rows: &[SummaryRow], fits: &[ComplexityFit], warnings: &[String]) -> String {
    let mut out = String::from("# Benchmark Report\n");
    if !warnings.is_empty() {
        out.push('\n');
        for w in warnings {
            out.push_str(&format!("> warning: {w}\n"));
        }
    }

    let serial: Vec<&SummaryRow> = rows
        .iter()
        .filter(|r| !matches!(r.variant, KernelVariant::Parallel { .. }))
        .collect();
    let threaded: Vec<&SummaryRow> = rows
        .iter()
        .filter(|r| matches!(r.variant, KernelVariant::Parallel { .. }))
        .collect();

    if !serial.is_empty() {
        out.push_str("\n## Size Sweep\n\n");
        out.push_str("| Matrix Size | Variant | Avg Time (sec) | Speedup |\n");
        out.push_str("|---|---|---|---|\n");
        for r in &serial {
            let speedup = r.speedup.map(|s| fmt_sig(s, 6)).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                size_label(r.size),
                r.variant,
                fmt_sig(r.stats.mean, 6),
                speedup,
            ));
        }
    }

    if !threaded.is_empty() {
        out.push_str("\n## Thread Sweep\n\n");
        out.push_str("| Matrix Size | Threads | Avg Time (sec) | Speedup | Efficiency |\n");
        out.push_str("|---|---|---|---|---|\n");
        for r in &threaded {
            let speedup = r.speedup.map(|s| fmt_sig(s, 6)).unwrap_or_else(|| "-".into());
            let efficiency = r.efficiency.map(|e| fmt_sig(e, 6)).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                size_label(r.size),
                r.variant.workers().unwrap_or(1),
                fmt_sig(r.stats.mean, 6),
                speedup,
                efficiency,
            ));
        }
    }

    if !fits.is_empty() {
        out.push_str("\n## Complexity Fit\n\n");
        out.push_str("| Variant | Log-Log Slope | R^2 | Sizes |\n");
        out.push_str("|---|---|---|---|\n");
        for f in fits {
            let sizes: Vec<String> = f.sizes.iter().map(|n| n.to_string()).collect();
            out.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                f.variant,
                fmt_sig(f.slope, 6),
                fmt_sig(f.r_squared, 6),
                sizes.join(", "),
            ));
        }
    }

    out.push_str("\n## Notes\n\n");
    out.push_str(
        "- Timed regions cover exactly one kernel invocation: input generation \
         is excluded, and the prefetch variant's internal transpose is included.\n",
    );
    out.push_str(
        "- Avg Time is the arithmetic mean over repetitions; min and the 95% \
         confidence half-width are carried in the csv and json outputs.\n",
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(
        size: (usize, usize, usize),
        variant: KernelVariant,
        rep: usize,
        wall_seconds: f64,
    ) -> TrialRecord {
        TrialRecord {
            size,
            variant,
            rep,
            wall_seconds,
            seed_a: 1,
            seed_b: 2,
            timestamp: "2025-08-08T00:00:00.000Z".into(),
        }
    }

    fn synthetic_records(
        configs: &[((usize, usize, usize), KernelVariant, f64)],
        reps: usize,
    ) -> Vec<TrialRecord> {
        let mut out = Vec::new();
        for &(size, variant, mean) in configs {
            for rep in 0..reps {
                out.push(record(size, variant, rep, mean));
            }
        }
        out
    }

    #[test]
    fn speedup_against_serial_baseline() {
        // Reference thread-sweep shape: 9.67 s serial, 0.88 s with 16
        // threads at 1024x1024.
        let size = (1024, 1024, 1024);
        let records = synthetic_records(
            &[
                (size, KernelVariant::Naive, 9.67),
                (size, KernelVariant::Parallel { workers: 16 }, 0.88),
            ],
            3,
        );
        let (rows, warnings) = summarize_trials(&records).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(rows.len(), 2);

        let naive = rows.iter().find(|r| r.variant == KernelVariant::Naive).unwrap();
        assert_eq!(naive.speedup, Some(1.0));
        assert_eq!(naive.efficiency, None);

        let par = rows
            .iter()
            .find(|r| r.variant == KernelVariant::Parallel { workers: 16 })
            .unwrap();
        let speedup = par.speedup.unwrap();
        assert!((speedup - 10.9886).abs() < 1e-3, "speedup {speedup}");
        let efficiency = par.efficiency.unwrap();
        assert!((efficiency - 0.6868).abs() < 1e-3, "efficiency {efficiency}");
    }

    #[test]
    fn workers_one_is_baseline_for_pure_thread_sweeps() {
        let size = (64, 64, 64);
        let records = synthetic_records(
            &[
                (size, KernelVariant::Parallel { workers: 1 }, 4.0),
                (size, KernelVariant::Parallel { workers: 4 }, 1.0),
            ],
            2,
        );
        let (rows, warnings) = summarize_trials(&records).unwrap();
        assert!(warnings.is_empty());
        let base = rows
            .iter()
            .find(|r| r.variant == KernelVariant::Parallel { workers: 1 })
            .unwrap();
        assert_eq!(base.speedup, Some(1.0));
        assert_eq!(base.efficiency, Some(1.0));
        let par4 = rows
            .iter()
            .find(|r| r.variant == KernelVariant::Parallel { workers: 4 })
            .unwrap();
        assert_eq!(par4.speedup, Some(4.0));
        assert_eq!(par4.efficiency, Some(1.0));
    }

    #[test]
    fn missing_baseline_warns_and_omits_speedup() {
        let records = synthetic_records(&[((8, 8, 8), KernelVariant::Prefetch, 1.0)], 2);
        let (rows, warnings) = summarize_trials(&records).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].speedup, None);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("8x8x8"));
    }

    #[test]
    fn identical_timings_give_identical_summaries() {
        let records = synthetic_records(
            &[
                ((32, 32, 32), KernelVariant::Naive, 0.5),
                ((64, 64, 64), KernelVariant::Naive, 0.5),
            ],
            4,
        );
        let (rows, _) = summarize_trials(&records).unwrap();
        assert_eq!(rows[0].stats, rows[1].stats);
    }

    #[test]
    fn scale_invariance_of_speedup_and_slope() {
        let build = |scale: f64| {
            let mut configs = vec![
                ((256, 256, 256), KernelVariant::Parallel { workers: 2 }, 1.0 * scale),
            ];
            for n in [128usize, 256, 512, 1024] {
                configs.push(((n, n, n), KernelVariant::Naive, scale * 1e-9 * (n as f64).powi(3)));
            }
            synthetic_records(&configs, 3)
        };
        let (rows_a, _) = summarize_trials(&build(1.0)).unwrap();
        let (rows_b, _) = summarize_trials(&build(1000.0)).unwrap();
        for (a, b) in rows_a.iter().zip(&rows_b) {
            match (a.speedup, b.speedup) {
                (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-12 * x.abs()),
                (None, None) => {}
                other => panic!("speedup mismatch {other:?}"),
            }
        }
        // Uniform time scaling shifts the log-log intercept, not the slope.
        let fit_a = fit_complexity(&rows_a, &KernelVariant::Naive).unwrap();
        let fit_b = fit_complexity(&rows_b, &KernelVariant::Naive).unwrap();
        assert!((fit_a.slope - fit_b.slope).abs() <= 1e-12);
    }

    #[test]
    fn complexity_fit_recovers_exact_power_laws() {
        let sizes = [128usize, 256, 512, 1024];
        let cubic: Vec<_> = sizes
            .iter()
            .map(|&n| {
                let t = 1e-9 * (n as f64).powi(3);
                ((n, n, n), KernelVariant::Naive, t)
            })
            .collect();
        let records = synthetic_records(&cubic, 2);
        let (rows, _) = summarize_trials(&records).unwrap();
        let fit = fit_complexity(&rows, &KernelVariant::Naive).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-9, "slope {}", fit.slope);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.sizes, vec![128, 256, 512, 1024]);

        let quadratic: Vec<_> = sizes
            .iter()
            .map(|&n| {
                let t = 1e-9 * (n as f64).powi(2);
                ((n, n, n), KernelVariant::Prefetch, t)
            })
            .collect();
        let records = synthetic_records(&quadratic, 2);
        let (rows, _) = summarize_trials(&records).unwrap();
        let fit = fit_complexity(&rows, &KernelVariant::Prefetch).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);
    }

    #[test]
    fn complexity_fit_matches_endpoint_slope_on_three_points() {
        // Reference mean times at 256, 512, 1024; the endpoint slope is
        // log2(t3/t1) / 2 and OLS over three equally spaced points
        // coincides with it.
        let data = [(256usize, 0.02028), (512, 0.17037), (1024, 1.69891)];
        let configs: Vec<_> = data
            .iter()
            .map(|&(n, t)| ((n, n, n), KernelVariant::Naive, t))
            .collect();
        let records = synthetic_records(&configs, 2);
        let (rows, _) = summarize_trials(&records).unwrap();
        let fit = fit_complexity(&rows, &KernelVariant::Naive).unwrap();

        let endpoint = (1.69891f64 / 0.02028).log2() / 2.0;
        assert!((fit.slope - endpoint).abs() < 1e-12);
        assert!((fit.slope - 3.19).abs() < 0.01, "slope {}", fit.slope);
        assert!(fit.r_squared > 0.99);
    }

    #[test]
    fn complexity_fit_ignores_small_and_rectangular_sizes() {
        let configs = vec![
            ((32, 32, 32), KernelVariant::Naive, 1e-5),
            ((64, 64, 64), KernelVariant::Naive, 1e-4),
            ((128, 128, 128), KernelVariant::Naive, 1e-3),
            ((256, 256, 256), KernelVariant::Naive, 8e-3),
            ((512, 512, 512), KernelVariant::Naive, 6.4e-2),
            ((512, 256, 128), KernelVariant::Naive, 1.0),
        ];
        let records = synthetic_records(&configs, 2);
        let (rows, _) = summarize_trials(&records).unwrap();
        let fit = fit_complexity(&rows, &KernelVariant::Naive).unwrap();
        assert_eq!(fit.sizes, vec![128, 256, 512]);

        // Two qualifying sizes is insufficient.
        let records = synthetic_records(&configs[2..4], 2);
        let (rows, _) = summarize_trials(&records).unwrap();
        assert!(matches!(
            fit_complexity(&rows, &KernelVariant::Naive),
            Err(Error::InsufficientData { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn csv_render_shape_and_round_trip() {
        let records = synthetic_records(&[((2, 2, 2), KernelVariant::Naive, 0.25)], 2);
        let (rows, _) = summarize_trials(&records).unwrap();
        let csv = render(&rows, &[], &[], ReportFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 2);

        let parsed = parse_summary_csv(&csv).unwrap();
        assert_eq!(parsed, rows);
    }

    #[test]
    fn csv_json_csv_round_trip_is_lossless() {
        let records = synthetic_records(
            &[
                ((128, 128, 128), KernelVariant::Naive, 0.0123456789),
                ((128, 128, 128), KernelVariant::Tiled { tile: 32 }, 0.0098765432),
                ((128, 128, 128), KernelVariant::Parallel { workers: 4 }, 0.0041234567),
            ],
            3,
        );
        let (rows, _) = summarize_trials(&records).unwrap();
        let csv_once = render(&rows, &[], &[], ReportFormat::Csv).unwrap();

        let parsed = parse_summary_csv(&csv_once).unwrap();
        let json = render(&parsed, &[], &[], ReportFormat::Json).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let back: Vec<SummaryRow> = value["rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|row| SummaryRow {
                size: serde_json::from_value(row["size"].clone()).unwrap(),
                variant: serde_json::from_value(row.clone()).unwrap(),
                stats: serde_json::from_value(row["stats"].clone()).unwrap(),
                speedup: row.get("speedup").and_then(|v| v.as_f64()),
                efficiency: row.get("efficiency").and_then(|v| v.as_f64()),
            })
            .collect();
        let csv_twice = render(&back, &[], &[], ReportFormat::Csv).unwrap();
        assert_eq!(csv_once, csv_twice);
    }

    #[test]
    fn json_reparses_field_for_field() {
        let records = synthetic_records(
            &[
                ((64, 64, 64), KernelVariant::Naive, 0.5),
                ((64, 64, 64), KernelVariant::Prefetch, 0.4),
            ],
            2,
        );
        let (rows, _) = summarize_trials(&records).unwrap();
        let json = render(&rows, &[], &[], ReportFormat::Json).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["rows"].as_array().unwrap().len(), rows.len());
        for (row_json, row) in value["rows"].as_array().unwrap().iter().zip(&rows) {
            let stats: Summary = serde_json::from_value(row_json["stats"].clone()).unwrap();
            assert_eq!(stats, row.stats);
            assert_eq!(row_json["kind"].as_str().unwrap(), row.variant.name());
        }
        assert_eq!(value["metadata"]["tool"].as_str().unwrap(), "gemmlab");
    }

    #[test]
    fn markdown_has_fixed_table_headers() {
        let size = (1024, 1024, 1024);
        let records = synthetic_records(
            &[
                (size, KernelVariant::Naive, 9.67),
                (size, KernelVariant::Parallel { workers: 16 }, 0.88),
            ],
            2,
        );
        let (rows, _) = summarize_trials(&records).unwrap();
        let fits = fit_all(&rows);
        let md = render(&rows, &fits, &[], ReportFormat::Markdown).unwrap();
        assert!(md.contains("| Matrix Size | Variant | Avg Time (sec) | Speedup |"));
        assert!(md.contains("| Matrix Size | Threads | Avg Time (sec) | Speedup | Efficiency |"));
        assert!(md.contains("| 1024x1024 | naive | 9.67000 | 1.00000 |"));
    }

    #[test]
    fn unknown_format_is_usage_error() {
        assert!(matches!(
            "xml".parse::<ReportFormat>(),
            Err(Error::UnknownFormat(_))
        ));
    }

    #[test]
    fn fmt_sig_covers_magnitudes() {
        assert_eq!(fmt_sig(1.69891, 6), "1.69891");
        assert_eq!(fmt_sig(0.0000284, 6), "0.0000284000");
        assert_eq!(fmt_sig(123.4567891, 6), "123.457");
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(-0.5, 6), "-0.500000");
    }
}
