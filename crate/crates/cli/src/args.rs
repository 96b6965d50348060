use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use garouter_core::analysis::sweep::{Asymmetry, Axis, Solver};
use garouter_core::{Context, ModelParams};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "garouter", version, about = "Single-photon routing between two waveguides bridged by an atom chain")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Channel probabilities along an energy grid.
    Spectrum(SpectrumArgs),
    /// Channel probabilities on an energy × parameter grid.
    Map(MapArgs),
    /// Closed form against the direct solver on random parameter draws.
    Verify(VerifyArgs),
    /// Effective phase, analytic periods and the numeric period of a pinned-k spectrum.
    Period(PeriodArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Waveguide sites between (and including) the two coupling points.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Atoms in the chain; defaults to N.
    #[arg(long)]
    pub m: Option<usize>,
    /// Inter-atom hopping J.
    #[arg(long, default_value_t = 0.01)]
    pub j: f64,
    /// Atom-waveguide coupling g.
    #[arg(long, default_value_t = 1.5)]
    pub g: f64,
    /// Waveguide hopping ξ.
    #[arg(long, default_value_t = 1.0)]
    pub xi: f64,
    /// Waveguide cavity frequency ω0.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub omega_0: f64,
    /// Atomic excited-state frequency ω_e.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub omega_e: f64,
    /// Third-state frequency in the rotating frame ω's.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub omega_s_prime: f64,
    /// Control-field Rabi frequency Ω.
    #[arg(long, default_value_t = 0.0)]
    pub rabi: f64,
    /// Coupling to waveguide B (direct solver only).
    #[arg(long)]
    pub g_b: Option<f64>,
    /// Hopping of waveguide B (direct solver only).
    #[arg(long)]
    pub xi_b: Option<f64>,
    /// Cavity frequency of waveguide B (direct solver only).
    #[arg(long, allow_negative_numbers = true)]
    pub omega_b: Option<f64>,
}

impl ModelArgs {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            omega_0: self.omega_0,
            xi: self.xi,
            omega_e: self.omega_e,
            omega_s_prime: self.omega_s_prime,
            omega_big: self.rabi,
            j_coupling: self.j,
            g: self.g,
            n_sites: self.n,
            m_atoms: self.m.unwrap_or(self.n),
        }
    }

    pub fn asymmetry(&self) -> Option<Asymmetry> {
        if self.g_b.is_none() && self.xi_b.is_none() && self.omega_b.is_none() {
            return None;
        }
        Some(Asymmetry {
            omega_b: self.omega_b.unwrap_or(self.omega_0),
            xi_b: self.xi_b.unwrap_or(self.xi),
            g_b: self.g_b.unwrap_or(self.g),
        })
    }

    /// Validated parameters for the chosen solver.
    pub fn resolve(&self, solver: Solver) -> Result<ModelParams> {
        let params = self.params();
        if solver == Solver::Oracle {
            let mut asym = garouter_core::AsymmetricParams::from(&params);
            if let Some(a) = self.asymmetry() {
                asym.omega_b = a.omega_b;
                asym.xi_b = a.xi_b;
                asym.g_b = a.g_b;
            }
            asym.validate()?;
        } else {
            if self.asymmetry().is_some() {
                return Err(CliError::Config(
                    "--g-b, --xi-b and --omega-b need --solver oracle".into(),
                ));
            }
            params.validate(Context::ClosedForm)?;
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverArg {
    ClosedForm,
    Oracle,
    Both,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::ClosedForm => Solver::ClosedForm,
            SolverArg::Oracle => Solver::Oracle,
            SolverArg::Both => Solver::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; standard output when omitted (no metadata sidecar).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub e_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub e_max: f64,
    #[arg(long, default_value_t = 801)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::ClosedForm)]
    pub solver: SolverArg,
    /// Pin the incident wavenumber (diagnostic mode, closed form only).
    #[arg(long)]
    pub fixed_k: Option<f64>,
    /// Largest accepted closed-form vs direct deviation with `--solver both`.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum YAxis {
    N,
    J,
    Rabi,
    G,
}

impl From<YAxis> for Axis {
    fn from(a: YAxis) -> Self {
        match a {
            YAxis::N => Axis::Sites,
            YAxis::J => Axis::Hopping,
            YAxis::Rabi => Axis::ControlField,
            YAxis::G => Axis::Coupling,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MapArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub e_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub e_max: f64,
    #[arg(long, default_value_t = 401)]
    pub e_steps: usize,
    /// Second axis.
    #[arg(long, value_enum, default_value_t = YAxis::N)]
    pub y_axis: YAxis,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub y_min: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub y_max: f64,
    #[arg(long, default_value_t = 19)]
    pub y_steps: usize,
    /// Explicit second-axis values; overrides the range.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub y_list: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = SolverArg::ClosedForm)]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Largest accepted closed-form vs direct amplitude deviation.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Largest accepted flow-conservation residual.
    #[arg(long, default_value_t = 1e-10)]
    pub residual_tolerance: f64,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    #[arg(long, default_value_t = 0.5)]
    pub j_max: f64,
    #[arg(long, default_value_t = 3.0)]
    pub g_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rabi_max: f64,
    /// Report file (JSON); summary on standard output either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PeriodArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = -1.999, allow_negative_numbers = true)]
    pub e_min: f64,
    #[arg(long, default_value_t = 1.999, allow_negative_numbers = true)]
    pub e_max: f64,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Pinned incident wavenumber.
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub fixed_k: f64,
    /// Report file (JSON); summary on standard output either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
