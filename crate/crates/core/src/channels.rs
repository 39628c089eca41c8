//! Fading-model catalog: normalized channel-gain distributions and samplers.
//!
//! Every base model is normalized to unit mean gain per branch, E(g) = 1, so
//! the average received power enters only through the operating point. The
//! catalog covers Rayleigh, Rician(K), TWDP(K, Δ) and cascaded (product)
//! Rayleigh, plus selection-combining and maximal-ratio-combining wrappers
//! over i.i.d. branches.
//!
//! CDFs are assembled from lower-tail primitives (`marcum_q_lower`,
//! `zk1_complement`, `exp_m1`) rather than `1 - survival`, so outage
//! probabilities keep full relative accuracy deep into the tail; the
//! log-domain slope computations in [`crate::engine`] depend on it.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::specfun::{bessel_i_scaled, bessel_k, gauss_legendre, marcum_q_lower, zk1_complement};
use crate::{OdoError, Result};

/// A normalized gain distribution the ODO engine can consume: density, CDF
/// and the lower support edge (zero for every model shipped here).
pub trait GainDistribution {
    fn pdf(&self, t: f64) -> Result<f64>;
    fn cdf(&self, t: f64) -> Result<f64>;
    fn support_min(&self) -> f64 {
        0.0
    }
}

impl GainDistribution for FadingModel {
    fn pdf(&self, t: f64) -> Result<f64> {
        FadingModel::pdf(self, t)
    }

    fn cdf(&self, t: f64) -> Result<f64> {
        FadingModel::cdf(self, t)
    }
}

/// Base fading distribution of the per-branch normalized power gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingKind {
    /// Pure diffuse scattering: g is unit-mean exponential.
    Rayleigh,
    /// One dominant specular component with LoS-to-diffuse power ratio K.
    Rician { k: f64 },
    /// Two specular components (amplitude imbalance Δ ∈ [0, 1]) plus diffuse
    /// power; Δ = 0 recovers Rician.
    Twdp { k: f64, delta: f64 },
    /// Product of two independent unit-mean exponential gains (keyhole /
    /// double-scattering baseline).
    CascadedRayleigh,
}

/// Diversity combining over N i.i.d. branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combining {
    /// Selection combining: the best branch gain.
    Sc { branches: u32 },
    /// Maximal-ratio combining: the sum of branch gains.
    Mrc { branches: u32 },
}

impl Combining {
    pub fn branches(&self) -> u32 {
        match *self {
            Combining::Sc { branches } | Combining::Mrc { branches } => branches,
        }
    }
}

/// A validated fading model: base distribution plus optional combining.
///
/// MRC is only available for Rician branches (that is the case with a
/// closed-form combined distribution); SC composes with any base model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct FadingModel {
    kind: FadingKind,
    combining: Option<Combining>,
}

impl FadingModel {
    pub fn new(kind: FadingKind, combining: Option<Combining>) -> Result<Self> {
        match kind {
            FadingKind::Rician { k } | FadingKind::Twdp { k, .. } if !k.is_finite() || k < 0.0 => {
                return Err(OdoError::Domain(format!(
                    "K must be finite and >= 0, got {k}"
                )));
            }
            _ => {}
        }
        if let FadingKind::Twdp { delta, .. } = kind {
            if !(0.0..=1.0).contains(&delta) {
                return Err(OdoError::Domain(format!(
                    "TWDP delta must lie in [0, 1], got {delta}"
                )));
            }
        }
        if let Some(c) = combining {
            if c.branches() < 1 {
                return Err(OdoError::Domain("combining requires N >= 1".into()));
            }
            if matches!(c, Combining::Mrc { .. }) && !matches!(kind, FadingKind::Rician { .. }) {
                return Err(OdoError::UnsupportedModel(
                    "MRC is only supported over Rician branches".into(),
                ));
            }
        }
        Ok(Self { kind, combining })
    }

    pub fn rayleigh() -> Self {
        Self {
            kind: FadingKind::Rayleigh,
            combining: None,
        }
    }

    pub fn rician(k: f64) -> Result<Self> {
        Self::new(FadingKind::Rician { k }, None)
    }

    pub fn twdp(k: f64, delta: f64) -> Result<Self> {
        Self::new(FadingKind::Twdp { k, delta }, None)
    }

    pub fn cascaded() -> Self {
        Self {
            kind: FadingKind::CascadedRayleigh,
            combining: None,
        }
    }

    pub fn with_sc(self, branches: u32) -> Result<Self> {
        Self::new(self.kind, Some(Combining::Sc { branches }))
    }

    pub fn with_mrc(self, branches: u32) -> Result<Self> {
        Self::new(self.kind, Some(Combining::Mrc { branches }))
    }

    pub fn kind(&self) -> FadingKind {
        self.kind
    }

    pub fn combining(&self) -> Option<Combining> {
        self.combining
    }

    pub fn branches(&self) -> u32 {
        self.combining.map_or(1, |c| c.branches())
    }

    /// Lower edge of the gain support (zero for every implemented model).
    pub fn support_min(&self) -> f64 {
        0.0
    }

    /// Probability density of the combined gain at `t`.
    pub fn pdf(&self, t: f64) -> Result<f64> {
        check_gain(t)?;
        match self.combining {
            None => base_pdf(self.kind, t),
            Some(Combining::Sc { branches }) => {
                let n = f64::from(branches);
                let f = base_pdf(self.kind, t)?;
                let cdf = base_cdf(self.kind, t)?;
                Ok(n * f * cdf.powi(branches as i32 - 1))
            }
            Some(Combining::Mrc { branches }) => match self.kind {
                FadingKind::Rician { k } => mrc_rician_pdf(k, branches, t),
                _ => unreachable!("validated at construction"),
            },
        }
    }

    /// CDF of the combined gain at `t` (the outage probability when
    /// `t = W_th / Ω₀`).
    pub fn cdf(&self, t: f64) -> Result<f64> {
        check_gain(t)?;
        match self.combining {
            None => base_cdf(self.kind, t),
            Some(Combining::Sc { branches }) => Ok(base_cdf(self.kind, t)?.powi(branches as i32)),
            Some(Combining::Mrc { branches }) => match self.kind {
                FadingKind::Rician { k } => marcum_q_lower(
                    branches,
                    (2.0 * k * f64::from(branches)).sqrt(),
                    (2.0 * (1.0 + k) * t).sqrt(),
                ),
                _ => unreachable!("validated at construction"),
            },
        }
    }

    /// Draw one combined gain from the stream.
    pub fn draw(&self, stream: &mut SampleStream) -> f64 {
        match self.combining {
            None => draw_base(self.kind, stream),
            Some(Combining::Sc { branches }) => (0..branches)
                .map(|_| draw_base(self.kind, stream))
                .fold(0.0, f64::max),
            Some(Combining::Mrc { branches }) => {
                (0..branches).map(|_| draw_base(self.kind, stream)).sum()
            }
        }
    }
}

fn check_gain(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(OdoError::Domain(format!(
            "gain must be finite and >= 0, got {t}"
        )));
    }
    Ok(())
}

fn base_pdf(kind: FadingKind, t: f64) -> Result<f64> {
    match kind {
        FadingKind::Rayleigh => Ok((-t).exp()),
        FadingKind::Rician { k } => rician_pdf(k, t),
        FadingKind::Twdp { k, delta } => twdp_pdf(k, delta, t),
        FadingKind::CascadedRayleigh => {
            if t == 0.0 {
                // log-singular (integrable) at the origin
                Ok(f64::INFINITY)
            } else {
                Ok(2.0 * bessel_k(0, 2.0 * t.sqrt())?)
            }
        }
    }
}

fn base_cdf(kind: FadingKind, t: f64) -> Result<f64> {
    match kind {
        FadingKind::Rayleigh => Ok(-(-t).exp_m1()),
        FadingKind::Rician { k } => {
            marcum_q_lower(1, (2.0 * k).sqrt(), (2.0 * (1.0 + k) * t).sqrt())
        }
        FadingKind::Twdp { k, delta } => twdp_cdf(k, delta, t),
        FadingKind::CascadedRayleigh => zk1_complement(2.0 * t.sqrt()),
    }
}

/// Rician pdf (1+K) e^{-K-(1+K)t} I₀(2√(K(1+K)t)), assembled in the log
/// domain: the exponent collapses to -(√K - √((1+K)t))², which never
/// overflows however large K or t get.
fn rician_pdf(k: f64, t: f64) -> Result<f64> {
    let s = (1.0 + k) * t;
    let z = 2.0 * (k * s).sqrt();
    let log_pdf = (1.0 + k).ln() - (k.sqrt() - s.sqrt()).powi(2) + bessel_i_scaled(0, z)?.ln();
    Ok(log_pdf.exp())
}

/// TWDP pdf: the θ-average of Rician-style conditional densities with
/// κ(θ) = K(1 + Δ cos θ), quadrature-refined until two successive orders
/// agree to 1e-10 relative.
pub(crate) fn twdp_pdf(k: f64, delta: f64, t: f64) -> Result<f64> {
    twdp_theta_average(k, delta, |kappa| {
        let s = (1.0 + k) * t;
        let z = 2.0 * (kappa * s).sqrt();
        let log_f =
            (1.0 + k).ln() - (kappa.sqrt() - s.sqrt()).powi(2) + bessel_i_scaled(0, z)?.ln();
        Ok(log_f.exp())
    })
}

/// TWDP CDF: θ-average of the conditional lower Marcum tails.
pub(crate) fn twdp_cdf(k: f64, delta: f64, t: f64) -> Result<f64> {
    twdp_theta_average(k, delta, |kappa| {
        marcum_q_lower(1, (2.0 * kappa).sqrt(), (2.0 * (1.0 + k) * t).sqrt())
    })
}

/// Small-gain density limit of the TWDP model, (1+K)·(1/π)∫₀^π e^{-κθ} dθ:
/// the coding-gain coefficient of its power-law tail.
pub(crate) fn twdp_small_gain_coefficient(k: f64, delta: f64) -> Result<f64> {
    Ok((1.0 + k) * twdp_theta_average(k, delta, |kappa| Ok((-kappa).exp()))?)
}

/// (1/π) ∫₀^π f(κθ) dθ with κθ = K(1 + Δ cos θ), auto-refining the
/// Gauss-Legendre order 64 → 128 → 256 until two successive results agree
/// to 1e-10 relative.
fn twdp_theta_average<F>(k: f64, delta: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut prev: Option<f64> = None;
    for order in [64usize, 128, 256] {
        let rule = gauss_legendre(order)?;
        let mut err = None;
        let value = rule.integrate(0.0, std::f64::consts::PI, |theta| {
            let kappa = k * (1.0 + delta * theta.cos());
            match f(kappa.max(0.0)) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        }) / std::f64::consts::PI;
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(p) = prev {
            if (value - p).abs() <= 1e-10 * value.abs().max(f64::MIN_POSITIVE) {
                return Ok(value);
            }
        }
        prev = Some(value);
    }
    Err(OdoError::QuadratureNonConvergence(format!(
        "TWDP theta integral (K={k}, delta={delta}) did not stabilize by order 256"
    )))
}

/// MRC-Rician pdf over N branches: the noncentral-χ² form with 2N degrees of
/// freedom, noncentrality 2KN and scale (1+K), written as
///
///   f(t) = (1+K) e^{-KN-(1+K)t} ((1+K)t)^{N-1} / (N-1)! · S(w),
///   S(w) = Γ(N) I_{N-1}(2√w) / w^{(N-1)/2},  w = NK(1+K)t,
///
/// so the K^{-(N-1)/2} singularity of the textbook grouping cancels
/// analytically and K → 0 is exact (Erlang limit).
fn mrc_rician_pdf(k: f64, branches: u32, t: f64) -> Result<f64> {
    let n = f64::from(branches);
    let s = (1.0 + k) * t;
    let w = n * k * s;
    let log_s_of_w = crate::specfun::bessel_i_ratio_log(branches - 1, w)?;
    let log_pdf = (1.0 + k).ln() - n * k - s + (n - 1.0) * safe_ln(s) - crate::specfun::ln_gamma(n)
        + log_s_of_w;
    Ok(log_pdf.exp())
}


fn safe_ln(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// A seeded, splittable uniform stream (counter-based ChaCha8 generator).
///
/// `split(seed, index)` yields statistically independent substreams for the
/// same seed, which is how samplers parallelize: partition the draw count,
/// one substream per partition, and the result is bit-identical regardless
/// of how many workers actually ran.
pub struct SampleStream {
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn from_seed(seed: u64) -> Self {
        Self::split(seed, 0)
    }

    pub fn split(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        Self { rng }
    }

    /// Uniform draw in the open-closed interval (0, 1].
    #[inline]
    fn uniform(&mut self) -> f64 {
        // 53 random bits; maps to (0, 1] so logarithms are always finite
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 1.0) * (1.0 / 9007199254740992.0)
    }

    /// One standard-normal pair by Box-Muller (consumes two uniforms).
    #[inline]
    fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        (r * phi.cos(), r * phi.sin())
    }
}

/// Per-draw uniform consumption: Rayleigh and Rician 2, TWDP 4, cascaded 2,
/// multiplied by the branch count under SC/MRC.
fn draw_base(kind: FadingKind, stream: &mut SampleStream) -> f64 {
    match kind {
        FadingKind::Rayleigh => {
            // g = |h|², h standard complex Gaussian with E|h|² = 1
            let (x, y) = stream.normal_pair();
            0.5 * (x * x + y * y)
        }
        FadingKind::Rician { k } => {
            let los = (k / (k + 1.0)).sqrt();
            let sigma = (0.5 / (k + 1.0)).sqrt();
            let (x, y) = stream.normal_pair();
            let re = los + sigma * x;
            let im = sigma * y;
            re * re + im * im
        }
        FadingKind::Twdp { k, delta } => {
            // specular amplitudes solving V₁²+V₂² = K/(K+1), 2V₁V₂/(V₁²+V₂²) = Δ
            let scale = 0.5 * (k / (k + 1.0)).sqrt();
            let v1 = scale * ((1.0 + delta).sqrt() + (1.0 - delta).sqrt());
            let v2 = scale * ((1.0 + delta).sqrt() - (1.0 - delta).sqrt());
            let phi1 = 2.0 * std::f64::consts::PI * stream.uniform();
            let phi2 = 2.0 * std::f64::consts::PI * stream.uniform();
            let sigma = (0.5 / (k + 1.0)).sqrt();
            let (x, y) = stream.normal_pair();
            let re = v1 * phi1.cos() + v2 * phi2.cos() + sigma * x;
            let im = v1 * phi1.sin() + v2 * phi2.sin() + sigma * y;
            re * re + im * im
        }
        FadingKind::CascadedRayleigh => {
            let g1 = -stream.uniform().ln();
            let g2 = -stream.uniform().ln();
            g1 * g2
        }
    }
}

/// Draw `n` i.i.d. combined gains sequentially from one stream.
pub fn sample(model: &FadingModel, stream: &mut SampleStream, n: usize) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(OdoError::Domain("sample requires n >= 1".into()));
    }
    Ok((0..n).map(|_| model.draw(stream)).collect())
}

/// Draw `n` gains for `seed`, partitioned across worker threads by stream
/// splitting. Output is identical to the sequential per-chunk order no
/// matter how many threads run.
pub fn sample_seeded(model: &FadingModel, seed: u64, n: usize) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(OdoError::Domain("sample requires n >= 1".into()));
    }
    const CHUNK: usize = 1 << 16;
    let chunks = n.div_ceil(CHUNK);
    let out: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = SampleStream::split(seed, c as u64 + 1);
            let take = CHUNK.min(n - c * CHUNK);
            (0..take).map(|_| model.draw(&mut stream)).collect()
        })
        .collect();
    Ok(out.concat())
}

// ---------------------------------------------------------------------------
// Serialization schema
// ---------------------------------------------------------------------------

/// Wire form: {"kind": "rician", "K": 15.0, "delta": null,
/// "combining": {"type": "mrc", "N": 4}}.
#[derive(Serialize, Deserialize)]
struct ModelRepr {
    kind: String,
    #[serde(rename = "K")]
    k: Option<f64>,
    delta: Option<f64>,
    combining: Option<CombiningRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum CombiningRepr {
    #[serde(rename = "sc")]
    Sc {
        #[serde(rename = "N")]
        n: u32,
    },
    #[serde(rename = "mrc")]
    Mrc {
        #[serde(rename = "N")]
        n: u32,
    },
}

impl From<FadingModel> for ModelRepr {
    fn from(m: FadingModel) -> Self {
        let (kind, k, delta) = match m.kind {
            FadingKind::Rayleigh => ("rayleigh", None, None),
            FadingKind::Rician { k } => ("rician", Some(k), None),
            FadingKind::Twdp { k, delta } => ("twdp", Some(k), Some(delta)),
            FadingKind::CascadedRayleigh => ("cascaded", None, None),
        };
        let combining = m.combining.map(|c| match c {
            Combining::Sc { branches } => CombiningRepr::Sc { n: branches },
            Combining::Mrc { branches } => CombiningRepr::Mrc { n: branches },
        });
        ModelRepr {
            kind: kind.to_string(),
            k,
            delta,
            combining,
        }
    }
}

impl TryFrom<ModelRepr> for FadingModel {
    type Error = OdoError;

    fn try_from(r: ModelRepr) -> Result<Self> {
        let kind = match r.kind.as_str() {
            "rayleigh" => FadingKind::Rayleigh,
            "rician" => FadingKind::Rician {
                k: r.k
                    .ok_or_else(|| OdoError::Domain("rician requires K".into()))?,
            },
            "twdp" => FadingKind::Twdp {
                k: r.k
                    .ok_or_else(|| OdoError::Domain("twdp requires K".into()))?,
                delta: r
                    .delta
                    .ok_or_else(|| OdoError::Domain("twdp requires delta".into()))?,
            },
            "cascaded" => FadingKind::CascadedRayleigh,
            other => {
                return Err(OdoError::UnsupportedModel(format!(
                    "unknown fading kind '{other}'"
                )))
            }
        };
        let combining = r.combining.map(|c| match c {
            CombiningRepr::Sc { n } => Combining::Sc { branches: n },
            CombiningRepr::Mrc { n } => Combining::Mrc { branches: n },
        });
        FadingModel::new(kind, combining)
    }
}
