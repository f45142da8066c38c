//! Statistical machinery: inverse-normal quantiles, power-analysis sample
//! sizing, and per-configuration summary statistics.

use crate::error::{Error, Result};

/// z-quantile at 0.975, i.e. the two-sided 95% critical value.
pub const Z_975: f64 = 1.959963984540054;

/// Inverse standard-normal CDF via Wichura's PPND16 rational approximation
/// (Applied Statistics algorithm AS 241), accurate to well below 1e-8 over
/// the full open interval.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) || p.is_nan() {
        return Err(Error::QuantileDomain(p));
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return Ok(q * poly(&CENTRAL_NUM, r) / poly(&CENTRAL_DEN, r));
    }

    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let value = if r <= 5.0 {
        let r = r - 1.6;
        poly(&TAIL_NUM, r) / poly(&TAIL_DEN, r)
    } else {
        let r = r - 5.0;
        poly(&FAR_TAIL_NUM, r) / poly(&FAR_TAIL_DEN, r)
    };
    Ok(if q < 0.0 { -value } else { value })
}

#[inline]
fn poly(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

// PPND16 coefficient sets, lowest order first, transcribed verbatim from the
// published algorithm (hence digits beyond f64 resolution).
#[allow(clippy::excessive_precision)]
const CENTRAL_NUM: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
#[allow(clippy::excessive_precision)]
const CENTRAL_DEN: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
#[allow(clippy::excessive_precision)]
const TAIL_NUM: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
#[allow(clippy::excessive_precision)]
const TAIL_DEN: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
#[allow(clippy::excessive_precision)]
const FAR_TAIL_NUM: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
#[allow(clippy::excessive_precision)]
const FAR_TAIL_DEN: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// Inputs to the repetition-count formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerParams {
    pub alpha: f64,
    pub power: f64,
    pub effect_size: f64,
    pub variance: f64,
}

impl PowerParams {
    pub fn new(alpha: f64, power: f64, effect_size: f64, variance: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidPowerParams(format!(
                "alpha must be in (0, 1), got {alpha}"
            )));
        }
        if !(power > 0.0 && power < 1.0) {
            return Err(Error::InvalidPowerParams(format!(
                "power must be in (0, 1), got {power}"
            )));
        }
        // NaN must fail these checks, so the comparisons are kept positive.
        if effect_size.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidPowerParams(format!(
                "effect size must be positive, got {effect_size}"
            )));
        }
        if variance.is_nan() || variance < 0.0 {
            return Err(Error::InvalidPowerParams(format!(
                "variance must be non-negative, got {variance}"
            )));
        }
        Ok(PowerParams {
            alpha,
            power,
            effect_size,
            variance,
        })
    }
}

/// The sample-size formula before rounding:
///
///   n = 2 * ((z_{1-alpha/2} + z_{power}) / effect)^2 * variance
pub fn required_sample_size_raw(p: &PowerParams) -> f64 {
    let z_alpha = normal_quantile(1.0 - p.alpha / 2.0).expect("alpha validated");
    let z_beta = normal_quantile(p.power).expect("power validated");
    let ratio = (z_alpha + z_beta) / p.effect_size;
    2.0 * ratio * ratio * p.variance
}

/// Number of repetitions needed to detect `effect_size` at the requested
/// significance and power: the formula value rounded up, floored at 2 so a
/// variance is always estimable.
pub fn required_sample_size(p: &PowerParams) -> usize {
    let raw = required_sample_size_raw(p);
    (raw.ceil() as usize).max(2)
}

/// Aggregate statistics over one configuration's repetitions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub ci95_half_width: f64,
}

/// Mean, unbiased sample variance, extrema, and the normal-approximation 95%
/// confidence half-width. Requires at least two samples.
pub fn summarize(samples: &[f64]) -> Result<Summary> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sum_sq: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let variance = sum_sq / (n - 1.0);
    let std_dev = variance.sqrt();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in samples {
        min = min.min(x);
        max = max.max(x);
    }
    Ok(Summary {
        n: samples.len(),
        mean,
        variance,
        std_dev,
        min,
        max,
        ci95_half_width: Z_975 * std_dev / n.sqrt(),
    })
}
