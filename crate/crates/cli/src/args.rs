use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "gainsense",
    version,
    about = "Gain sensing of quantum-limited amplifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fisher information of optimal, coherent, homodyne, heterodyne and counting strategies over a gain grid
    QfiCurve,
    /// Monte Carlo check of the photon-counting estimator against its analytic MSE
    McValidate,
    /// Threshold gain above which single-photon probes beat the coherent-state bound, per detector efficiency
    ThresholdCurve,
    /// Energy-constrained minimum fidelities and Bures distance between two gains
    Bures,
    /// Built-in consistency checks; exits with code 4 if any fails
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::QfiCurve => "qfi-curve",
            Self::McValidate => "mc-validate",
            Self::ThresholdCurve => "threshold-curve",
            Self::Bures => "bures",
            Self::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// Linear in G
    Gain,
    /// Linear in τ = asinh √(G − 1)
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Number,
    Coherent,
    /// Entangled number-diagonal probe; cannot be simulated
    Nds,
    Both,
}

/// Options shared by every subcommand. Unset values fall back to
/// per-command defaults.
#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Lower end of the gain grid
    #[arg(long, global = true)]
    pub gain_min: Option<f64>,
    /// Upper end of the gain grid
    #[arg(long, global = true)]
    pub gain_max: Option<f64>,
    /// Number of grid points (at least 2)
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Grid spacing
    #[arg(long, global = true, value_enum, default_value_t = GridKind::Gain)]
    pub grid: GridKind,
    /// Explicit gains, overriding the grid (mc-validate, bures)
    #[arg(long, global = true, value_delimiter = ',')]
    pub gains: Option<Vec<f64>>,
    /// Second gain of each pair (bures)
    #[arg(long, global = true, value_delimiter = ',')]
    pub gain_prime: Option<Vec<f64>>,
    /// Total probe photon number N
    #[arg(long, global = true)]
    pub photons: Option<f64>,
    /// Number of signal modes M
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    /// Per-mode photon numbers of a Fock probe, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_vec: Option<Vec<u64>>,
    /// Per-mode mean photon numbers of a coherent probe, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub energy_vec: Option<Vec<f64>>,
    /// Detector quantum efficiency
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Detector efficiencies for threshold-curve, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    /// Probe simulated by mc-validate
    #[arg(long, global = true, value_enum)]
    pub probe: Option<ProbeKind>,
    /// Monte Carlo trials
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Monte Carlo seed
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output file; a PATH.meta.json sidecar is written next to it
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads (results do not depend on it)
    #[arg(long, global = true)]
    #[serde(skip)]
    pub workers: Option<usize>,
    /// Relative perturbation of the optimal QFI inside selftest (negative control)
    #[arg(long, global = true, hide = true, default_value_t = 0.0)]
    pub perturb: f64,
}

impl Default for RunArgs {
    fn default() -> Self {
        Self {
            gain_min: None,
            gain_max: None,
            steps: None,
            grid: GridKind::Gain,
            gains: None,
            gain_prime: None,
            photons: None,
            modes: None,
            n_vec: None,
            energy_vec: None,
            eta: None,
            etas: None,
            probe: None,
            trials: None,
            seed: 1,
            out: None,
            format: Format::Csv,
            workers: None,
            perturb: 0.0,
        }
    }
}
