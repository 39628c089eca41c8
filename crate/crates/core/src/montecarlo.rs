//! Monte-Carlo validation pipeline: ECDF, kernel density estimation, and the
//! model-agnostic empirical ODO estimators with bootstrap confidence bands.
//!
//! Two estimator routes are provided, mirroring how the analytic slope can be
//! read off data:
//!
//! - `LogCdfDiff`: a central difference of the empirical log₁₀-CDF over a
//!   ±stencil in Ω^dB, re-thresholding one shared sample set at both stencil
//!   points (common random numbers keep the slope variance down).
//! - `PlugIn`: the slope quotient x·f̂(x)/F̂(x) with a Gaussian KDE density
//!   (Silverman bandwidth on log-gains, back-transformed) and the ECDF.
//!
//! Everything is deterministic for a fixed seed: sampling splits a
//! counter-based stream per partition, and each bootstrap resample owns its
//! own substream, so results are bit-identical regardless of thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{sample_seeded, FadingModel};
use crate::engine::OperatingPoint;
use crate::{OdoError, Result};

/// Below this sample count the estimators refuse to run.
pub const MIN_SAMPLES: usize = 10_000;
/// Minimum number of samples below the shallow stencil threshold.
pub const MIN_TAIL_COUNT: usize = 100;
/// Minimum number of samples between the two stencil thresholds: these are
/// the only draws that carry slope information, and with fewer the log-count
/// ratio is noise (a saturated CDF yields zero of them).
pub const MIN_SLOPE_COUNT: u64 = 100;
/// Minimum neighbors within five bandwidths for the KDE to be usable.
pub const MIN_KDE_NEIGHBORS: usize = 30;

/// Bootstrap substreams start here so they can never collide with the
/// sampling partitions of `sample_seeded`.
const BOOTSTRAP_STREAM_BASE: u64 = 1 << 32;

/// Which empirical route produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorMethod {
    /// KDE density and ECDF plugged into the slope quotient x·f̂/F̂.
    #[serde(rename = "plugin")]
    PlugIn,
    /// Finite difference of the empirical log₁₀-CDF over Ω^dB.
    #[serde(rename = "diff")]
    LogCdfDiff,
}

/// Estimator tunables; the defaults are the documented standard choices.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorConfig {
    /// Half-width of the central stencil in dB.
    pub stencil_db: f64,
    /// Number of bootstrap resamples behind the confidence interval.
    pub bootstrap_resamples: usize,
    /// KDE bandwidth override (log domain); None selects Silverman's rule.
    pub bandwidth: Option<f64>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            stencil_db: 0.25,
            bootstrap_resamples: 200,
            bandwidth: None,
        }
    }
}

/// An empirical ODO estimate with its 95% bootstrap percentile interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalEstimate {
    pub delta_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(rename = "n")]
    pub n_samples: usize,
    pub method: EstimatorMethod,
    pub seed: u64,
}

/// Right-continuous empirical CDF of an ascending-sorted sample list.
pub fn ecdf(sorted_samples: &[f64], t: f64) -> Result<f64> {
    if sorted_samples.is_empty() {
        return Err(OdoError::InsufficientSamples(
            "ecdf requires a non-empty sample list".into(),
        ));
    }
    let below = sorted_samples.partition_point(|&s| s <= t);
    Ok(below as f64 / sorted_samples.len() as f64)
}

/// Gaussian-kernel density estimate at gain `t`, with the kernel applied to
/// log-gains and the Jacobian restored (the gain support is (0, ∞)).
pub fn kde_pdf(samples: &[f64], t: f64, bandwidth: Option<f64>) -> Result<f64> {
    if samples.len() < MIN_SAMPLES {
        return Err(OdoError::InsufficientSamples(format!(
            "kde_pdf needs at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if !t.is_finite() || t <= 0.0 {
        return Err(OdoError::Domain(format!(
            "kde_pdf evaluation point must be > 0, got {t}"
        )));
    }
    let log_samples = log_gains(samples)?;
    let h = match bandwidth {
        Some(h) => h,
        None => silverman_bandwidth(&log_samples),
    };
    if !h.is_finite() || h <= 0.0 {
        return Err(OdoError::Domain(format!("bandwidth must be > 0, got {h}")));
    }
    let y0 = t.ln();
    let neighbors = log_samples
        .iter()
        .filter(|&&y| (y - y0).abs() <= 5.0 * h)
        .count();
    if neighbors < MIN_KDE_NEIGHBORS {
        return Err(OdoError::Starved(format!(
            "only {neighbors} samples within 5 bandwidths of t={t}; the KDE \
             is degenerate there (need {MIN_KDE_NEIGHBORS})"
        )));
    }
    let sum: f64 = log_samples
        .iter()
        .map(|&y| gaussian_kernel((y0 - y) / h))
        .sum();
    Ok(sum / (samples.len() as f64 * h * t))
}

/// Silverman's rule on the (log-domain) samples:
/// h = 0.9 · min(σ̂, IQR/1.34) · n^{-1/5}.
pub fn silverman_bandwidth(log_samples: &[f64]) -> f64 {
    let n = log_samples.len() as f64;
    let mean = log_samples.iter().sum::<f64>() / n;
    let var = log_samples
        .iter()
        .map(|y| (y - mean) * (y - mean))
        .sum::<f64>()
        / (n - 1.0);
    let mut sorted = log_samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    0.9 * var.sqrt().min(iqr / 1.34) * n.powf(-0.2)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn gaussian_kernel(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn log_gains(samples: &[f64]) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|&s| {
            if s > 0.0 && s.is_finite() {
                Ok(s.ln())
            } else {
                Err(OdoError::Domain(format!(
                    "gain samples must be positive and finite, got {s}"
                )))
            }
        })
        .collect()
}

/// Estimate the ODO empirically with the default configuration.
pub fn estimate_odo(
    model: &FadingModel,
    op: &OperatingPoint,
    n: usize,
    method: EstimatorMethod,
    seed: u64,
) -> Result<EmpiricalEstimate> {
    estimate_odo_with(model, op, n, method, seed, &EstimatorConfig::default())
}

/// Estimate the ODO empirically from `n` fresh samples of the model.
pub fn estimate_odo_with(
    model: &FadingModel,
    op: &OperatingPoint,
    n: usize,
    method: EstimatorMethod,
    seed: u64,
    config: &EstimatorConfig,
) -> Result<EmpiricalEstimate> {
    if n < MIN_SAMPLES {
        return Err(OdoError::InsufficientSamples(format!(
            "estimate_odo needs at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    if !(config.stencil_db > 0.0 && config.stencil_db <= 0.5) {
        return Err(OdoError::Domain(format!(
            "stencil must lie in (0, 0.5] dB, got {}",
            config.stencil_db
        )));
    }
    if config.bootstrap_resamples < 40 {
        return Err(OdoError::Domain(
            "need at least 40 bootstrap resamples for a 95% interval".into(),
        ));
    }
    let samples = sample_seeded(model, seed, n)?;
    // the shallow threshold (lower Ω has more outages) guards starvation
    let x_minus = op.w_th / 10f64.powf((op.omega0_db - config.stencil_db) / 10.0);
    let tail_count = samples.iter().filter(|&&s| s <= x_minus).count();
    if tail_count < MIN_TAIL_COUNT {
        return Err(OdoError::Starved(format!(
            "only {tail_count} of {n} samples fall below the stencil threshold \
             (need {MIN_TAIL_COUNT}); raise n or lower omega0"
        )));
    }
    let (delta_hat, mut boots) = match method {
        EstimatorMethod::LogCdfDiff => diff_estimate(&samples, op, seed, config)?,
        EstimatorMethod::PlugIn => plugin_estimate(&samples, op, seed, config)?,
    };
    boots.sort_unstable_by(f64::total_cmp);
    let b = boots.len();
    let lo_idx = (0.025 * b as f64) as usize;
    let hi_idx = ((0.975 * b as f64) as usize).min(b - 1);
    Ok(EmpiricalEstimate {
        delta_hat,
        ci_low: boots[lo_idx].min(delta_hat),
        ci_high: boots[hi_idx].max(delta_hat),
        n_samples: n,
        method,
        seed,
    })
}

/// δ̂ from two tail counts of the same sample set.
fn diff_statistic(count_deep: u64, count_shallow: u64, span_db: f64) -> f64 {
    if count_deep == 0 {
        return f64::INFINITY;
    }
    10.0 * (count_shallow as f64 / count_deep as f64).log10() / span_db
}

fn diff_estimate(
    samples: &[f64],
    op: &OperatingPoint,
    seed: u64,
    config: &EstimatorConfig,
) -> Result<(f64, Vec<f64>)> {
    let st = config.stencil_db;
    let x_plus = op.w_th / 10f64.powf((op.omega0_db + st) / 10.0);
    let x_minus = op.w_th / 10f64.powf((op.omega0_db - st) / 10.0);
    let n = samples.len() as u64;
    let mut c_plus = 0u64;
    let mut c_minus = 0u64;
    for &s in samples {
        if s <= x_plus {
            c_plus += 1;
        }
        if s <= x_minus {
            c_minus += 1;
        }
    }
    if c_plus == 0 {
        return Err(OdoError::Starved(
            "no samples below the deep stencil threshold; raise n".into(),
        ));
    }
    if c_minus - c_plus < MIN_SLOPE_COUNT {
        return Err(OdoError::Starved(format!(
            "only {} samples fall between the stencil thresholds (need \
             {MIN_SLOPE_COUNT}); the slope signal is too thin at this \
             operating point; raise n",
            c_minus - c_plus
        )));
    }
    let delta_hat = diff_statistic(c_plus, c_minus, 2.0 * st);

    // The statistic depends on the sample only through the two counts, so a
    // bootstrap resample reduces to one trinomial draw: the distribution is
    // identical to resampling all n gains, at a millionth of the cost.
    let p_deep = c_plus as f64 / n as f64;
    let p_mid_given_rest = if n == c_plus {
        0.0 // every sample is below both thresholds
    } else {
        (c_minus - c_plus) as f64 / (n - c_plus) as f64
    };
    let boots: Vec<f64> = (0..config.bootstrap_resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(BOOTSTRAP_STREAM_BASE + b);
            let m_deep = Binomial::new(n, p_deep).expect("valid p").sample(&mut rng);
            let rest = n - m_deep;
            let m_mid = if rest == 0 || p_mid_given_rest == 0.0 {
                0
            } else {
                Binomial::new(rest, p_mid_given_rest)
                    .expect("valid p")
                    .sample(&mut rng)
            };
            diff_statistic(m_deep, m_deep + m_mid, 2.0 * st)
        })
        .collect();
    Ok((delta_hat, boots))
}

fn plugin_estimate(
    samples: &[f64],
    op: &OperatingPoint,
    seed: u64,
    config: &EstimatorConfig,
) -> Result<(f64, Vec<f64>)> {
    let x0 = op.threshold_gain();
    let n = samples.len();
    let log_samples = log_gains(samples)?;
    let h = match config.bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => {
            return Err(OdoError::Domain(format!("bandwidth must be > 0, got {h}")));
        }
        None => silverman_bandwidth(&log_samples),
    };
    let y0 = x0.ln();
    // Precompute per-sample kernel values and tail membership once; both the
    // point estimate and every bootstrap resample are then table lookups.
    // δ̂ = x₀ f̂(x₀) / F̂(x₀) = Σφ_i / (h · #{g ≤ x₀}).
    let kernel: Vec<f64> = log_samples
        .iter()
        .map(|&y| gaussian_kernel((y0 - y) / h))
        .collect();
    let below: Vec<bool> = samples.iter().map(|&s| s <= x0).collect();
    let neighbors = log_samples
        .iter()
        .filter(|&&y| (y - y0).abs() <= 5.0 * h)
        .count();
    if neighbors < MIN_KDE_NEIGHBORS {
        return Err(OdoError::Starved(format!(
            "only {neighbors} samples within 5 bandwidths of the operating \
             gain; the KDE is degenerate (need {MIN_KDE_NEIGHBORS})"
        )));
    }
    let kernel_sum: f64 = kernel.iter().sum();
    let count0 = below.iter().filter(|&&b| b).count();
    if count0 == 0 {
        return Err(OdoError::Starved(
            "no samples below the operating threshold; raise n".into(),
        ));
    }
    let delta_hat = kernel_sum / (h * count0 as f64);

    let boots: Vec<f64> = (0..config.bootstrap_resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(BOOTSTRAP_STREAM_BASE + b);
            let mut sum = 0.0;
            let mut cnt = 0usize;
            for _ in 0..n {
                let idx = rng.random_range(0..n);
                sum += kernel[idx];
                cnt += usize::from(below[idx]);
            }
            if cnt == 0 {
                f64::INFINITY
            } else {
                sum / (h * cnt as f64)
            }
        })
        .collect();
    Ok((delta_hat, boots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::FadingModel;

    fn op_for_gain(x: f64) -> OperatingPoint {
        let w_th = 2f64.powf(1.7) - 1.0;
        OperatingPoint::new(1.7, 10.0 * (w_th / x).log10()).unwrap()
    }

    #[test]
    fn ecdf_basics() {
        assert!(ecdf(&[], 1.0).is_err());
        let sorted = [0.5, 1.0, 2.0, 4.0];
        assert_eq!(ecdf(&sorted, 0.1).unwrap(), 0.0);
        assert_eq!(ecdf(&sorted, 1.0).unwrap(), 0.5); // right-continuous
        assert_eq!(ecdf(&sorted, 9.0).unwrap(), 1.0);
    }

    #[test]
    fn ecdf_exponential_median() {
        // Rayleigh power gain is unit-mean exponential; median ln 2
        let mut s = sample_seeded(&FadingModel::rayleigh(), 11, 1_000_000).unwrap();
        s.sort_unstable_by(f64::total_cmp);
        let p = ecdf(&s, std::f64::consts::LN_2).unwrap();
        assert!((p - 0.5).abs() < 3.0 * 0.0005, "p = {p}");
    }

    #[test]
    fn kde_matches_exponential_density() {
        let s = sample_seeded(&FadingModel::rayleigh(), 12, 1_000_000).unwrap();
        let got = kde_pdf(&s, 0.5, None).unwrap();
        let want = (-0.5f64).exp();
        assert!((got / want - 1.0).abs() < 0.05, "kde {got}, exact {want}");
    }

    #[test]
    fn kde_guards() {
        let s = sample_seeded(&FadingModel::rayleigh(), 13, 20_000).unwrap();
        // insufficient samples
        assert!(matches!(
            kde_pdf(&s[..100], 0.5, None),
            Err(OdoError::InsufficientSamples(_))
        ));
        // starvation: nothing within five (tiny) bandwidths of a far point
        assert!(matches!(
            kde_pdf(&s, 5000.0, Some(0.001)),
            Err(OdoError::Starved(_))
        ));
        assert!(kde_pdf(&s, -1.0, None).is_err());
    }

    #[test]
    fn diff_estimate_recovers_rayleigh_slope() {
        // x = 1: analytic δ = e⁻¹/(1-e⁻¹) ≈ 0.58198
        let est = estimate_odo(
            &FadingModel::rayleigh(),
            &op_for_gain(1.0),
            1_000_000,
            EstimatorMethod::LogCdfDiff,
            42,
        )
        .unwrap();
        assert!(
            est.ci_low <= 0.5819767068693264 && 0.5819767068693264 <= est.ci_high,
            "CI [{}, {}] misses the analytic value",
            est.ci_low,
            est.ci_high
        );
        assert!((est.delta_hat - 0.582).abs() < 0.02);
    }

    #[test]
    fn plugin_estimate_recovers_rayleigh_slope() {
        let est = estimate_odo(
            &FadingModel::rayleigh(),
            &op_for_gain(1.0),
            200_000,
            EstimatorMethod::PlugIn,
            43,
        )
        .unwrap();
        assert!(
            est.ci_low <= 0.5819767068693264 && 0.5819767068693264 <= est.ci_high,
            "CI [{}, {}] misses the analytic value",
            est.ci_low,
            est.ci_high
        );
    }

    #[test]
    fn estimates_are_deterministic() {
        let model = FadingModel::rician(5.0).unwrap();
        let op = OperatingPoint::new(1.7, 8.0).unwrap();
        let a = estimate_odo(&model, &op, 50_000, EstimatorMethod::LogCdfDiff, 7).unwrap();
        let b = estimate_odo(&model, &op, 50_000, EstimatorMethod::LogCdfDiff, 7).unwrap();
        assert_eq!(a, b);
        let c = estimate_odo(&model, &op, 50_000, EstimatorMethod::PlugIn, 7).unwrap();
        let d = estimate_odo(&model, &op, 50_000, EstimatorMethod::PlugIn, 7).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn starvation_is_reported() {
        // Rician K=15 at 50 dB: outage ~1e-10, hopeless at n = 10⁴
        let model = FadingModel::rician(15.0).unwrap();
        let op = OperatingPoint::new(1.7, 50.0).unwrap();
        match estimate_odo(&model, &op, 10_000, EstimatorMethod::LogCdfDiff, 3) {
            Err(OdoError::Starved(_)) => {}
            other => panic!("expected starvation, got {other:?}"),
        }
    }

    #[test]
    fn sample_count_floor_is_enforced() {
        let model = FadingModel::rayleigh();
        let op = OperatingPoint::new(1.7, 0.0).unwrap();
        assert!(matches!(
            estimate_odo(&model, &op, 9_999, EstimatorMethod::LogCdfDiff, 3),
            Err(OdoError::InsufficientSamples(_))
        ));
    }

    #[test]
    fn ci_always_brackets_the_estimate() {
        for seed in 0..5 {
            let est = estimate_odo(
                &FadingModel::cascaded(),
                &OperatingPoint::new(1.7, 8.0).unwrap(),
                50_000,
                EstimatorMethod::LogCdfDiff,
                seed,
            )
            .unwrap();
            assert!(est.ci_low <= est.delta_hat && est.delta_hat <= est.ci_high);
        }
    }
}
