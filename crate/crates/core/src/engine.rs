//! The analytic ODO engine.
//!
//! For an outage probability P = F_g(W_th/Ω) the operational diversity order
//! at the operating power Ω₀ is the local log-log slope
//!
//!   δ = (W_th/Ω₀) · f_g(W_th/Ω₀) / F_g(W_th/Ω₀),
//!
//! equivalently δ = -10 ∂log₁₀P/∂Ω^dB. This module provides that generic
//! plug-in form for any [`GainDistribution`], the closed forms for the five
//! shipped channel models, the tangent-line outage approximation anchored at
//! Ω₀, the power-budget helpers built on it, and the asymptotic power-law
//! reference each model converges to (when one exists).

use serde::Serialize;

use crate::channels::{twdp_cdf, twdp_pdf, twdp_small_gain_coefficient};
use crate::channels::{Combining, FadingKind, FadingModel, GainDistribution};
use crate::specfun::{bessel_i_scaled, bessel_k, ln_gamma, marcum_q_lower, zk1_complement};
use crate::{OdoError, Result};

/// Probabilities below this are treated as out of numeric range: the
/// operating point is refused instead of extrapolated.
pub const MIN_PROBABILITY: f64 = 1e-300;

/// Rate, threshold and operating average received power (noise power
/// normalized to one, so powers are expressed directly in dB).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    /// Transmission rate R in bits/s/Hz.
    pub r: f64,
    /// Decoding threshold W_th = 2^R - 1 (linear, noise-normalized).
    pub w_th: f64,
    /// Operating average received power Ω₀ in dB.
    pub omega0_db: f64,
    /// Ω₀ linear, 10^(Ω₀^dB / 10).
    pub omega0_lin: f64,
}

impl OperatingPoint {
    pub fn new(r: f64, omega0_db: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(OdoError::Domain(format!(
                "rate must be finite and > 0, got {r}"
            )));
        }
        if !omega0_db.is_finite() {
            return Err(OdoError::Domain(format!(
                "omega0_db must be finite, got {omega0_db}"
            )));
        }
        let omega0_lin = 10f64.powf(omega0_db / 10.0);
        if !omega0_lin.is_finite() || omega0_lin <= 0.0 {
            return Err(OdoError::NumericRange(format!(
                "omega0 = {omega0_db} dB is outside the representable power range"
            )));
        }
        Ok(Self {
            r,
            w_th: (2f64).powf(r) - 1.0,
            omega0_db,
            omega0_lin,
        })
    }

    /// The gain the channel must beat: x = W_th / Ω₀.
    pub fn threshold_gain(&self) -> f64 {
        self.w_th / self.omega0_lin
    }
}

/// ODO at an operating point: the slope δ, the exact outage probability α₀
/// there, and the dB cost of one decade of outage improvement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdoResult {
    pub delta: f64,
    pub alpha0: f64,
    #[serde(rename = "c_db")]
    pub c_db_per_decade: f64,
}

/// The tangent to the log₁₀-outage curve at Ω₀: slope -δ/10 per dB through
/// (Ω₀^dB, log₁₀ α₀).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentLine {
    pub slope_per_db: f64,
    pub anchor_db: f64,
    pub anchor_logop: f64,
}

impl TangentLine {
    /// log₁₀ of the predicted outage probability at `omega_db`.
    pub fn log10_op(&self, omega_db: f64) -> f64 {
        self.anchor_logop + self.slope_per_db * (omega_db - self.anchor_db)
    }

    /// Predicted outage probability at `omega_db`.
    pub fn op(&self, omega_db: f64) -> f64 {
        10f64.powf(self.log10_op(omega_db))
    }
}

/// Power-law tail F_g(x) ≈ α x^b (when the model admits one).
///
/// `representable` is false for the cascaded Rayleigh channel, whose tail
/// carries a log factor no power law captures; `alpha` and `b` are NaN then.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticLaw {
    pub representable: bool,
    pub alpha: f64,
    pub b: f64,
}

impl AsymptoticLaw {
    fn power_law(alpha: f64, b: f64) -> Self {
        Self {
            representable: true,
            alpha,
            b,
        }
    }

    fn not_representable() -> Self {
        Self {
            representable: false,
            alpha: f64::NAN,
            b: f64::NAN,
        }
    }
}

fn finalize(x: f64, x_pdf: f64, alpha0: f64) -> Result<OdoResult> {
    if !alpha0.is_finite() || alpha0 < MIN_PROBABILITY {
        return Err(OdoError::NumericRange(format!(
            "outage probability {alpha0:.3e} at threshold gain {x:.3e} underflows; \
             reduce omega0"
        )));
    }
    let delta = x * x_pdf / alpha0;
    if !delta.is_finite() || delta < MIN_PROBABILITY {
        return Err(OdoError::NumericRange(format!(
            "degenerate slope at threshold gain {x:.3e} (pdf {x_pdf:.3e}, cdf {alpha0:.3e})"
        )));
    }
    Ok(OdoResult {
        delta,
        alpha0,
        c_db_per_decade: 10.0 / delta,
    })
}

fn finalize_log(x: f64, log_num: f64, alpha0: f64) -> Result<OdoResult> {
    if !alpha0.is_finite() || alpha0 < MIN_PROBABILITY {
        return Err(OdoError::NumericRange(format!(
            "outage probability {alpha0:.3e} at threshold gain {x:.3e} underflows; \
             reduce omega0"
        )));
    }
    let delta = (log_num - alpha0.ln()).exp();
    if !delta.is_finite() || delta < MIN_PROBABILITY {
        return Err(OdoError::NumericRange(format!(
            "degenerate slope at threshold gain {x:.3e}"
        )));
    }
    Ok(OdoResult {
        delta,
        alpha0,
        c_db_per_decade: 10.0 / delta,
    })
}

/// Generic plug-in ODO: works for any distribution with a density and CDF.
pub fn odo_generic<D: GainDistribution + ?Sized>(
    dist: &D,
    op: &OperatingPoint,
) -> Result<OdoResult> {
    let x = op.threshold_gain();
    let alpha0 = dist.cdf(x)?;
    let pdf = dist.pdf(x)?;
    finalize(x, pdf, alpha0)
}

/// Single Rayleigh link: δ = x e^{-x} / (1 - e^{-x}).
pub fn odo_rayleigh(op: &OperatingPoint) -> Result<OdoResult> {
    let x = op.threshold_gain();
    finalize(x, (-x).exp(), -(-x).exp_m1())
}

/// Rician channel, evaluated in the log domain so large K never overflows:
/// the exponent collapses to -(√K - √((1+K)x))².
pub fn odo_rice(k: f64, op: &OperatingPoint) -> Result<OdoResult> {
    if !k.is_finite() || k < 0.0 {
        return Err(OdoError::Domain(format!("K must be >= 0, got {k}")));
    }
    let x = op.threshold_gain();
    let s = (1.0 + k) * x;
    let z = 2.0 * (k * s).sqrt();
    let alpha0 = marcum_q_lower(1, (2.0 * k).sqrt(), (2.0 * s).sqrt())?;
    let log_num =
        x.ln() + (1.0 + k).ln() - (k.sqrt() - s.sqrt()).powi(2) + bessel_i_scaled(0, z)?.ln();
    finalize_log(x, log_num, alpha0)
}

/// Selection combining over N i.i.d. branches multiplies the branch ODO by
/// N exactly; the anchor outage becomes the branch value to the N-th power.
pub fn odo_sc(base: &OdoResult, branches: u32) -> Result<OdoResult> {
    if branches < 1 {
        return Err(OdoError::Domain("SC requires N >= 1".into()));
    }
    let n = f64::from(branches);
    let alpha0 = base.alpha0.powi(branches as i32);
    if alpha0 < MIN_PROBABILITY {
        return Err(OdoError::NumericRange(format!(
            "SC outage {alpha0:.3e} underflows for N = {branches}"
        )));
    }
    Ok(OdoResult {
        delta: n * base.delta,
        alpha0,
        c_db_per_decade: 10.0 / (n * base.delta),
    })
}

/// MRC over N i.i.d. Rician branches: the combined gain is noncentral-χ²
/// with 2N degrees of freedom and noncentrality 2KN. The density is written
/// so the K^{-(N-1)/2} factor of the textbook grouping cancels analytically,
/// making K → 0 exact (it degenerates to the Erlang/central case).
pub fn odo_mrc_rice(k: f64, branches: u32, op: &OperatingPoint) -> Result<OdoResult> {
    if !k.is_finite() || k < 0.0 {
        return Err(OdoError::Domain(format!("K must be >= 0, got {k}")));
    }
    if branches < 1 {
        return Err(OdoError::Domain("MRC requires N >= 1".into()));
    }
    let x = op.threshold_gain();
    let n = f64::from(branches);
    let s = (1.0 + k) * x;
    let w = n * k * s;
    let alpha0 = marcum_q_lower(branches, (2.0 * k * n).sqrt(), (2.0 * s).sqrt())?;
    let log_num = x.ln() + (1.0 + k).ln() - n * k - s + (n - 1.0) * s.ln() - ln_gamma(n)
        + crate::specfun::bessel_i_ratio_log(branches - 1, w)?;
    finalize_log(x, log_num, alpha0)
}


/// TWDP channel: numerator and denominator θ-integrals share the quadrature
/// refinement of the channel catalog (64 → 128 → 256 until 1e-10 agreement).
pub fn odo_twdp(k: f64, delta_param: f64, op: &OperatingPoint) -> Result<OdoResult> {
    if !k.is_finite() || k < 0.0 {
        return Err(OdoError::Domain(format!("K must be >= 0, got {k}")));
    }
    if !(0.0..=1.0).contains(&delta_param) {
        return Err(OdoError::Domain(format!(
            "TWDP delta must lie in [0, 1], got {delta_param}"
        )));
    }
    let x = op.threshold_gain();
    let alpha0 = twdp_cdf(k, delta_param, x)?;
    let pdf = twdp_pdf(k, delta_param, x)?;
    finalize(x, pdf, alpha0)
}

/// Cascaded (product) Rayleigh channel:
/// δ = x · 2K₀(2√x) / (1 - 2√x K₁(2√x)).
pub fn odo_cascaded(op: &OperatingPoint) -> Result<OdoResult> {
    let x = op.threshold_gain();
    let z = 2.0 * x.sqrt();
    let alpha0 = zk1_complement(z)?;
    finalize(x, 2.0 * bessel_k(0, z)?, alpha0)
}

/// Dispatch to the closed form matching a validated model.
pub fn odo_for_model(model: &FadingModel, op: &OperatingPoint) -> Result<OdoResult> {
    let branch = |kind: FadingKind| -> Result<OdoResult> {
        match kind {
            FadingKind::Rayleigh => odo_rayleigh(op),
            FadingKind::Rician { k } => odo_rice(k, op),
            FadingKind::Twdp { k, delta } => odo_twdp(k, delta, op),
            FadingKind::CascadedRayleigh => odo_cascaded(op),
        }
    };
    match model.combining() {
        None => branch(model.kind()),
        Some(Combining::Sc { branches }) => odo_sc(&branch(model.kind())?, branches),
        Some(Combining::Mrc { branches }) => match model.kind() {
            FadingKind::Rician { k } => odo_mrc_rice(k, branches, op),
            _ => Err(OdoError::UnsupportedModel(
                "MRC is only supported over Rician branches".into(),
            )),
        },
    }
}

/// Tangent line to the log₁₀-outage curve at the operating point.
pub fn op_linear_approx(result: &OdoResult, op: &OperatingPoint) -> TangentLine {
    TangentLine {
        slope_per_db: -result.delta / 10.0,
        anchor_db: op.omega0_db,
        anchor_logop: result.alpha0.log10(),
    }
}

/// Predicted outage ratio P(Ω₀)/P(cΩ₀) for a c-fold power change: c^δ.
pub fn op_ratio(result: &OdoResult, c: f64) -> Result<f64> {
    if !c.is_finite() || c <= 0.0 {
        return Err(OdoError::Domain(format!(
            "fold change must be finite and > 0, got {c}"
        )));
    }
    Ok(c.powf(result.delta))
}

/// dB of extra power buying one order of magnitude of outage: 10/δ.
pub fn power_for_decade(result: &OdoResult) -> f64 {
    10.0 / result.delta
}

/// The power-law tail F_g(x) → α x^b each model converges to, or
/// `representable = false` where no power law exists (cascaded Rayleigh).
pub fn asymptotic_law(model: &FadingModel) -> Result<AsymptoticLaw> {
    let base = match model.kind() {
        FadingKind::Rayleigh => AsymptoticLaw::power_law(1.0, 1.0),
        FadingKind::Rician { k } => AsymptoticLaw::power_law((1.0 + k) * (-k).exp(), 1.0),
        FadingKind::Twdp { k, delta } => {
            AsymptoticLaw::power_law(twdp_small_gain_coefficient(k, delta)?, 1.0)
        }
        FadingKind::CascadedRayleigh => AsymptoticLaw::not_representable(),
    };
    Ok(match model.combining() {
        None => base,
        Some(Combining::Sc { branches }) => {
            if base.representable {
                let n = branches as i32;
                AsymptoticLaw::power_law(base.alpha.powi(n), base.b * f64::from(branches))
            } else {
                AsymptoticLaw::not_representable()
            }
        }
        Some(Combining::Mrc { branches }) => match model.kind() {
            FadingKind::Rician { k } => {
                // leading CDF term: e^{-KN} ((1+K)x)^N / N!
                let n = f64::from(branches);
                let alpha = (n * (1.0 + k).ln() - k * n - ln_gamma(n + 1.0)).exp();
                AsymptoticLaw::power_law(alpha, n)
            }
            _ => {
                return Err(OdoError::UnsupportedModel(
                    "MRC is only supported over Rician branches".into(),
                ))
            }
        },
    })
}

/// ODO by central finite difference of log₁₀ F_g(W_th/Ω) over Ω^dB,
/// the definition the closed forms must reproduce.
pub fn odo_by_numerical_derivative<D: GainDistribution + ?Sized>(
    dist: &D,
    op: &OperatingPoint,
    h_db: f64,
) -> Result<f64> {
    if !(h_db > 0.0 && h_db <= 0.5) {
        return Err(OdoError::Domain(format!(
            "stencil step must lie in (0, 0.5] dB, got {h_db}"
        )));
    }
    let f_at = |db: f64| -> Result<f64> {
        let omega = 10f64.powf(db / 10.0);
        let f = dist.cdf(op.w_th / omega)?;
        if !f.is_finite() || f < MIN_PROBABILITY {
            return Err(OdoError::NumericRange(format!(
                "cdf underflows at stencil point {db} dB"
            )));
        }
        Ok(f)
    };
    let hi = f_at(op.omega0_db + h_db)?;
    let lo = f_at(op.omega0_db - h_db)?;
    Ok(-10.0 * (hi.log10() - lo.log10()) / (2.0 * h_db))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(omega0_db: f64) -> OperatingPoint {
        OperatingPoint::new(1.7, omega0_db).unwrap()
    }

    /// Ω₀ (dB) at which the threshold gain equals x for rate 1.7.
    fn omega_db_for_gain(x: f64) -> f64 {
        let w_th = 2f64.powf(1.7) - 1.0;
        10.0 * (w_th / x).log10()
    }

    #[test]
    fn operating_point_threshold_relation() {
        let p = op(10.0);
        assert!((p.w_th - (2f64.powf(1.7) - 1.0)).abs() < 1e-12);
        assert!((p.omega0_lin - 10.0).abs() < 1e-12);
        assert!(OperatingPoint::new(0.0, 10.0).is_err());
        assert!(OperatingPoint::new(1.7, f64::INFINITY).is_err());
    }

    #[test]
    fn rayleigh_small_gain_limit_is_unity() {
        let p = op(omega_db_for_gain(1e-8));
        let r = odo_rayleigh(&p).unwrap();
        assert!((r.delta - 1.0).abs() < 1e-6, "delta = {}", r.delta);
    }

    #[test]
    fn rayleigh_at_unit_gain() {
        // frozen from e^{-1}/(1 - e^{-1})
        let p = op(omega_db_for_gain(1.0));
        let r = odo_rayleigh(&p).unwrap();
        assert!((r.delta - 0.5819767068693264).abs() < 1e-13, "{}", r.delta);
        // deep pre-threshold regime: slope dies
        let p = op(omega_db_for_gain(50.0));
        assert!(odo_rayleigh(&p).unwrap().delta < 1e-18);
    }

    #[test]
    fn rice_reduces_to_rayleigh_at_zero_k() {
        for &db in &[-5.0, 0.0, 10.0, 25.0, 50.0] {
            let p = op(db);
            let rice = odo_rice(0.0, &p).unwrap();
            let ray = odo_rayleigh(&p).unwrap();
            assert!(
                ((rice.delta - ray.delta) / ray.delta).abs() < 1e-12,
                "db={db}"
            );
            assert!(((rice.alpha0 - ray.alpha0) / ray.alpha0).abs() < 1e-12);
        }
    }

    #[test]
    fn rice_design_numbers() {
        let r10 = odo_rice(15.0, &op(10.0)).unwrap();
        assert!(
            (r10.c_db_per_decade - 2.2709495517574).abs() < 1e-9,
            "c_db = {}",
            r10.c_db_per_decade
        );
        assert!((2f64.powf(r10.delta) - 21.16).abs() < 0.05);
        let r20 = odo_rice(15.0, &op(20.0)).unwrap();
        assert!((r20.c_db_per_decade - 4.2590207169795).abs() < 1e-9);
    }

    #[test]
    fn mrc_reduces_to_rice_at_one_branch() {
        for &k in &[0.0, 0.3, 5.0, 15.0] {
            for &db in &[-5.0, 5.0, 20.0, 45.0] {
                let p = op(db);
                let mrc = odo_mrc_rice(k, 1, &p).unwrap();
                let rice = odo_rice(k, &p).unwrap();
                assert!(
                    ((mrc.delta - rice.delta) / rice.delta).abs() < 1e-10,
                    "k={k}, db={db}: {} vs {}",
                    mrc.delta,
                    rice.delta
                );
            }
        }
    }

    #[test]
    fn mrc_peaks_above_branch_count_then_converges() {
        // dominant LoS pushes the ODO above N at moderate power ...
        let peak = odo_mrc_rice(10.0, 4, &op(4.0)).unwrap();
        assert!(peak.delta > 4.0, "peak = {}", peak.delta);
        // ... and the asymptote is N
        let tail = odo_mrc_rice(10.0, 4, &op(60.0)).unwrap();
        assert!((tail.delta - 4.0).abs() < 0.2, "tail = {}", tail.delta);
    }

    #[test]
    fn twdp_reduces_to_rice_at_zero_delta() {
        for &db in &[0.0, 10.0, 30.0] {
            let p = op(db);
            let twdp = odo_twdp(12.0, 0.0, &p).unwrap();
            let rice = odo_rice(12.0, &p).unwrap();
            assert!(
                ((twdp.delta - rice.delta) / rice.delta).abs() < 1e-8,
                "db={db}"
            );
        }
    }

    #[test]
    fn twdp_extreme_imbalance_costs_more_than_a_decade() {
        // two equal specular components: worse than the conventional-DO cost
        let r = odo_twdp(12.0, 1.0, &op(10.0)).unwrap();
        assert!(r.c_db_per_decade > 10.0, "c_db = {}", r.c_db_per_decade);
        // and the cost returns to 10 dB as the power grows
        let r = odo_twdp(12.0, 1.0, &op(80.0)).unwrap();
        assert!(
            (r.c_db_per_decade - 10.0).abs() < 1e-3,
            "c_db = {}",
            r.c_db_per_decade
        );
    }

    #[test]
    fn cascaded_slope_bounds() {
        assert!(odo_cascaded(&op(8.0)).unwrap().delta < 0.5);
        assert!(odo_cascaded(&op(20.0)).unwrap().delta < 0.75);
        let mut prev = 0.0;
        let mut db = -10.0;
        while db <= 100.0 {
            let d = odo_cascaded(&op(db)).unwrap().delta;
            assert!(d < 1.0, "delta = {d} at {db} dB");
            assert!(d > prev, "not increasing at {db} dB");
            prev = d;
            db += 2.5;
        }
    }

    #[test]
    fn sc_scales_the_branch_slope_exactly() {
        let p = op(10.0);
        let base = odo_rice(10.0, &p).unwrap();
        let sc1 = odo_sc(&base, 1).unwrap();
        assert_eq!(sc1.delta, base.delta);
        assert_eq!(sc1.alpha0, base.alpha0);
        let sc4 = odo_sc(&base, 4).unwrap();
        assert_eq!(sc4.delta, 4.0 * base.delta);
        assert!((sc4.alpha0 - base.alpha0.powi(4)).abs() < 1e-300);
        assert!((sc4.c_db_per_decade - 10.0 / (4.0 * base.delta)).abs() < 1e-15);
    }

    #[test]
    fn tangent_line_is_exact_at_the_anchor() {
        let p = op(10.0);
        let r = odo_rice(15.0, &p).unwrap();
        let line = op_linear_approx(&r, &p);
        let at_anchor = line.op(10.0);
        assert!(((at_anchor - r.alpha0) / r.alpha0).abs() < 1e-12);
        // line-internal identity: +3 dB is a 2^δ outage ratio
        let ratio = line.op(10.0) / line.op(10.0 + 10.0 * 2f64.log10());
        assert!(
            ((ratio - 2f64.powf(r.delta)) / ratio).abs() < 1e-12,
            "{ratio}"
        );
    }

    #[test]
    fn op_ratio_and_decade_helpers() {
        let p = op(10.0);
        let r = odo_rice(15.0, &p).unwrap();
        assert_eq!(op_ratio(&r, 1.0).unwrap(), 1.0);
        let two_fold = op_ratio(&r, 2.0).unwrap();
        assert!((two_fold - 21.16).abs() < 0.05, "2^delta = {two_fold}");
        // a c_db-fold increase is exactly one decade
        let c = 10f64.powf(power_for_decade(&r) / 10.0);
        assert!((op_ratio(&r, c).unwrap() - 10.0).abs() < 1e-12);
        assert!((r.delta * r.c_db_per_decade - 10.0).abs() < 1e-12);
        assert!(op_ratio(&r, 0.0).is_err());
    }

    #[test]
    fn asymptotic_laws() {
        let ray = asymptotic_law(&FadingModel::rayleigh()).unwrap();
        assert_eq!((ray.alpha, ray.b), (1.0, 1.0));

        for &k in &[5.0, 15.0] {
            let law = asymptotic_law(&FadingModel::rician(k).unwrap()).unwrap();
            assert_eq!(law.b, 1.0);
            assert!((law.alpha - (1.0 + k) * (-k).exp()).abs() < 1e-15);
            // F(x)/(α x) → 1 at x = 1e-9
            let model = FadingModel::rician(k).unwrap();
            let f = model.cdf(1e-9).unwrap();
            assert!(
                (f / (law.alpha * 1e-9) - 1.0).abs() < 0.01,
                "k={k}: ratio {}",
                f / (law.alpha * 1e-9)
            );
        }

        let cas = asymptotic_law(&FadingModel::cascaded()).unwrap();
        assert!(!cas.representable);

        // TWDP: quadrature coefficient matches the closed form (1+K)e^{-K}I₀(KΔ)
        let (k, d) = (12.0, 0.7);
        let law = asymptotic_law(&FadingModel::twdp(k, d).unwrap()).unwrap();
        let closed = (1.0 + k) * (-k).exp() * (bessel_i_scaled(0, k * d).unwrap() * (k * d).exp());
        assert!(
            ((law.alpha - closed) / closed).abs() < 1e-9,
            "{} vs {closed}",
            law.alpha
        );

        // SC and MRC wrappers
        let sc = asymptotic_law(&FadingModel::rician(10.0).unwrap().with_sc(4).unwrap()).unwrap();
        let branch_alpha = 11.0 * (-10.0f64).exp();
        assert_eq!(sc.b, 4.0);
        assert!(((sc.alpha - branch_alpha.powi(4)) / sc.alpha).abs() < 1e-12);

        let mrc = asymptotic_law(&FadingModel::rician(10.0).unwrap().with_mrc(4).unwrap()).unwrap();
        assert_eq!(mrc.b, 4.0);
        let model = FadingModel::rician(10.0).unwrap().with_mrc(4).unwrap();
        let x = 1e-6;
        let f = model.cdf(x).unwrap();
        assert!(
            (f / (mrc.alpha * x.powi(4)) - 1.0).abs() < 0.01,
            "MRC tail ratio {}",
            f / (mrc.alpha * x.powi(4))
        );
    }

    #[test]
    fn numerical_derivative_matches_closed_forms() {
        // The O(h²) truncation of the exact secant exceeds 1e-6 relative
        // below ~0 dB (Rayleigh/cascaded) and ~6 dB (Rician K=15) because
        // δ there is exponentially small and moves fast in dB, so the
        // operating points here start where the bound is attainable.
        let h = 0.01;
        for &db in &[0.0, 10.0, 25.0, 40.0] {
            let p = op(db);
            let ray = FadingModel::rayleigh();
            let got = odo_by_numerical_derivative(&ray, &p, h).unwrap();
            let want = odo_rayleigh(&p).unwrap().delta;
            assert!(((got - want) / want).abs() < 1e-6, "rayleigh at {db} dB");

            let cas = FadingModel::cascaded();
            let got = odo_by_numerical_derivative(&cas, &p, h).unwrap();
            let want = odo_cascaded(&p).unwrap().delta;
            assert!(((got - want) / want).abs() < 1e-6, "cascaded at {db} dB");
        }
        for &db in &[10.0, 25.0, 40.0] {
            let p = op(db);
            let rice = FadingModel::rician(15.0).unwrap();
            let got = odo_by_numerical_derivative(&rice, &p, h).unwrap();
            let want = odo_rice(15.0, &p).unwrap().delta;
            assert!(((got - want) / want).abs() < 1e-6, "rice at {db} dB");
        }
        assert!(odo_by_numerical_derivative(&FadingModel::rayleigh(), &op(10.0), 0.6).is_err());
    }

    #[test]
    fn degenerate_point_is_refused_not_extrapolated() {
        // Rayleigh outage at 3010 dB is ~2e-301, below the refusal floor
        let p = OperatingPoint::new(1.7, 3010.0).unwrap();
        match odo_rayleigh(&p) {
            Err(OdoError::NumericRange(_)) => {}
            other => panic!("expected NumericRange, got {other:?}"),
        }
        // and a dB value whose linear power overflows is refused up front
        match OperatingPoint::new(1.7, 3200.0) {
            Err(OdoError::NumericRange(_)) => {}
            other => panic!("expected NumericRange, got {other:?}"),
        }
    }

    #[test]
    fn generic_engine_agrees_with_closed_forms() {
        // spot checks here; the full grid lives in the integration suite
        let p = op(12.5);
        for model in [
            FadingModel::rayleigh(),
            FadingModel::rician(15.0).unwrap(),
            FadingModel::twdp(12.0, 0.7).unwrap(),
            FadingModel::cascaded(),
            FadingModel::rician(10.0).unwrap().with_mrc(4).unwrap(),
            FadingModel::rician(10.0).unwrap().with_sc(4).unwrap(),
        ] {
            let generic = odo_generic(&model, &p).unwrap();
            let closed = odo_for_model(&model, &p).unwrap();
            let tol = if matches!(model.kind(), FadingKind::Twdp { .. }) {
                1e-8
            } else {
                1e-10
            };
            assert!(
                ((generic.delta - closed.delta) / closed.delta).abs() < tol,
                "{model:?}: {} vs {}",
                generic.delta,
                closed.delta
            );
        }
    }
}
