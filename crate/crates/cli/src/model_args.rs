//! Flag grammar and the flag → domain-object conversions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use odo_core::channels::FadingModel;
use odo_core::montecarlo::{EstimatorConfig, EstimatorMethod};

use crate::CliError;

#[derive(Parser)]
#[command(
    name = "odo-kit",
    version,
    about = "Operational diversity order of fading channels: analytic engine, \
             Monte-Carlo estimators and figure-data reproduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Report δ, α₀, c_dB and the tangent line at one operating point
    Odo(OdoArgs),
    /// Sweep an Ω₀ grid and write the selected outputs as CSV
    Sweep(SweepArgs),
    /// Emit the CSV bundle and manifest behind one reference figure
    Figure(FigureArgs),
    /// Run the built-in cross-validation checks
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Rayleigh,
    Rician,
    Twdp,
    Cascaded,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CombiningName {
    None,
    Sc,
    Mrc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Plugin,
    Diff,
}

impl From<MethodName> for EstimatorMethod {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Plugin => EstimatorMethod::PlugIn,
            MethodName::Diff => EstimatorMethod::LogCdfDiff,
        }
    }
}

/// The fading-model flag group shared by `odo` and `sweep`.
#[derive(Args, Clone)]
pub struct ModelFlags {
    /// Base fading distribution
    #[arg(long, value_enum)]
    pub model: ModelName,

    /// Rician/TWDP K factor (LoS-to-diffuse power ratio, linear)
    #[arg(long = "K", value_name = "K")]
    pub k: Option<f64>,

    /// TWDP amplitude imbalance Δ in [0, 1]
    #[arg(long)]
    pub delta: Option<f64>,

    /// Diversity combining over i.i.d. branches
    #[arg(long, value_enum, default_value = "none")]
    pub combining: CombiningName,

    /// Number of branches N (required when combining is sc or mrc)
    #[arg(long = "N", value_name = "N")]
    pub branches: Option<u32>,
}

impl ModelFlags {
    pub fn build(&self) -> Result<FadingModel, CliError> {
        let base = match self.model {
            ModelName::Rayleigh => FadingModel::rayleigh(),
            ModelName::Rician => {
                let k = self
                    .k
                    .ok_or_else(|| CliError::Usage("--model rician requires --K".into()))?;
                FadingModel::rician(k)?
            }
            ModelName::Twdp => {
                let k = self
                    .k
                    .ok_or_else(|| CliError::Usage("--model twdp requires --K".into()))?;
                let delta = self
                    .delta
                    .ok_or_else(|| CliError::Usage("--model twdp requires --delta".into()))?;
                FadingModel::twdp(k, delta)?
            }
            ModelName::Cascaded => FadingModel::cascaded(),
        };
        match self.combining {
            CombiningName::None => Ok(base),
            CombiningName::Sc => {
                let n = self
                    .branches
                    .ok_or_else(|| CliError::Usage("--combining sc requires --N".into()))?;
                Ok(base.with_sc(n)?)
            }
            CombiningName::Mrc => {
                let n = self
                    .branches
                    .ok_or_else(|| CliError::Usage("--combining mrc requires --N".into()))?;
                Ok(base.with_mrc(n)?)
            }
        }
    }
}

/// Monte-Carlo knobs shared by `odo` and `sweep`.
#[derive(Args, Clone)]
pub struct McFlags {
    /// Draw this many samples and attach an empirical estimate
    #[arg(long)]
    pub mc_samples: Option<usize>,

    /// Base RNG seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Empirical estimator route
    #[arg(long, value_enum, default_value = "diff")]
    pub method: MethodName,

    /// Half-width of the log-CDF difference stencil in dB
    #[arg(long, default_value_t = 0.25)]
    pub stencil_db: f64,

    /// Bootstrap resample count behind the 95% interval
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,

    /// KDE bandwidth override (log domain) for the plugin method
    #[arg(long)]
    pub bandwidth: Option<f64>,
}

impl McFlags {
    pub fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            stencil_db: self.stencil_db,
            bootstrap_resamples: self.bootstrap,
            bandwidth: self.bandwidth,
        }
    }
}

#[derive(Args)]
pub struct OdoArgs {
    #[command(flatten)]
    pub model: ModelFlags,

    /// Transmission rate R in bits/s/Hz
    #[arg(long = "R", value_name = "R", default_value_t = 1.7)]
    pub rate: f64,

    /// Operating average received power Ω₀ in dB (noise-normalized)
    #[arg(long, allow_negative_numbers = true)]
    pub omega0_db: f64,

    #[command(flatten)]
    pub mc: McFlags,

    /// Emit a JSON report instead of text
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelFlags,

    /// Transmission rate R in bits/s/Hz
    #[arg(long = "R", value_name = "R", default_value_t = 1.7)]
    pub rate: f64,

    /// Ω₀ grid as start:step:stop in dB
    #[arg(long, default_value = "-10:0.5:50", allow_hyphen_values = true)]
    pub grid: String,

    /// Comma-separated outputs
    /// (delta, alpha0, c_db, op_exact, op_tangent, delta_mc)
    #[arg(long, default_value = "delta,alpha0,c_db")]
    pub outputs: String,

    /// Tangent anchor points in dB, required when outputs include op_tangent
    #[arg(long, allow_hyphen_values = true)]
    pub anchors: Option<String>,

    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,

    #[command(flatten)]
    pub mc: McFlags,
}

#[derive(Args)]
pub struct FigureArgs {
    /// Figure identifier: fig1 .. fig6
    #[arg(value_name = "ID", required_unless_present = "from_manifest")]
    pub id: Option<String>,

    /// Directory for the CSV bundle and manifest
    #[arg(long)]
    pub outdir: PathBuf,

    /// Re-run a previous figure exactly as recorded in its manifest
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,

    /// Base RNG seed for the Monte-Carlo markers
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Samples per Monte-Carlo marker
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_samples: usize,

    /// Ω₀ grid as start:step:stop in dB
    #[arg(long, default_value = "-10:0.5:50", allow_hyphen_values = true)]
    pub grid: String,

    /// Transmission rate R in bits/s/Hz
    #[arg(long = "R", value_name = "R", default_value_t = 1.7)]
    pub rate: f64,

    /// Tangent anchors in dB for fig2/fig6 (comma-separated)
    #[arg(long, allow_hyphen_values = true)]
    pub anchors: Option<String>,
}

#[derive(Args)]
pub struct ValidateArgs {
    /// Restrict to one module's checks
    #[arg(long, default_value = "all")]
    pub scope: String,

    /// Seed for the statistical checks
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// Parse "start:step:stop" (dB) into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "grid must be start:step:stop, got '{spec}'"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad grid component '{p}'")))
        })
        .collect::<Result<_, _>>()?;
    let (start, step, stop) = (nums[0], nums[1], nums[2]);
    let well_formed =
        start.is_finite() && step.is_finite() && stop.is_finite() && step > 0.0 && start < stop;
    if !well_formed {
        return Err(CliError::Usage(format!(
            "grid requires start < stop and step > 0, got '{spec}'"
        )));
    }
    let count = ((stop - start) / step).round() as usize + 1;
    Ok((0..count)
        .map(|i| start + step * i as f64)
        .filter(|&v| v <= stop + 1e-9)
        .collect())
}

/// Parse a comma-separated list of dB anchors.
pub fn parse_anchors(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad anchor '{p}'")))
        })
        .collect()
}

/// Stable per-task seed derivation (splitmix64 finalizer over base and tag).
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
