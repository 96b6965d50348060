//! Effective phase between the coupling sites and the spectral period it
//! implies.
//!
//! A phase shift of 2π in `φ = k₊ (N - 1)` moves `k₊` by `2π/N` (the
//! large-N separation), which on the cosine band is an energy shift
//!
//! ```text
//! ΔE = -2 [cos(k₊ + 2π/N) - cos k₊]                 (exact)
//!    ≈ (4π/N) sin k₊ + (4π²/N²) cos k₊              (second order)
//!    → 4π/N                                         (band centre)
//! ```
//!
//! All three are in units of ξ. The numeric estimate of the diagnostic
//! spectrum's period is reported next to them, together with the `4/N` and
//! `4N` figures quoted for the same quantity, without ranking any of them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analysis::sweep::{run_sweep_with, Axis, AxisValues, Solver, SweepSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::green::ChainResolvent;
use crate::model::{self, Branch, ModelParams};

/// Autocorrelation peaks below this are treated as noise.
pub const MIN_AUTOCORRELATION_PEAK: f64 = 0.1;
/// Smallest grid accepted for period estimation.
pub const MIN_GRID_POINTS: usize = 128;
/// Smallest number of grid points per detected period.
pub const MIN_POINTS_PER_PERIOD: f64 = 64.0;

/// Renormalised wavenumber `k₊(E)` on the shifted band `ε⁺ = ω0 + ε̄(E)`.
/// Band edges are included (k₊ = 0 or π).
pub fn renormalized_wavenumber(energy: f64, params: &ModelParams) -> Result<f64> {
    let eps_bar = if params.g == 0.0 {
        0.0
    } else {
        ChainResolvent::new(energy, params)?.evaluation(params.g).self_energy
    };
    let centre = params.omega_0 + eps_bar;
    if (energy - centre).abs() > 2.0 * params.xi {
        return Err(model::out_of_band(energy, centre, params.xi));
    }
    Ok(model::wavenumber_from_energy(energy, centre, params.xi, Branch::RealBand)?.re)
}

/// `φ = k₊(E) (N - 1)`.
pub fn effective_phase(energy: f64, n_sites: usize, params: &ModelParams) -> Result<f64> {
    let k_plus = renormalized_wavenumber(energy, params)?;
    Ok(k_plus * n_sites.saturating_sub(1) as f64)
}

fn check_k(k_plus: f64) -> Result<()> {
    if (0.0..=PI).contains(&k_plus) {
        Ok(())
    } else {
        Err(Error::InvalidWavenumber(k_plus))
    }
}

/// `-2 [cos(k₊ + 2π/N) - cos k₊]`, requiring the shifted wavenumber to stay
/// on the branch.
pub fn spectral_period_exact(k_plus: f64, n_sites: usize) -> Result<f64> {
    check_k(k_plus)?;
    let shifted = k_plus + 2.0 * PI / n_sites as f64;
    if shifted > PI {
        return Err(Error::BranchOverflow { k_shifted: shifted });
    }
    Ok(-2.0 * (shifted.cos() - k_plus.cos()))
}

/// `(4π/N) sin k₊ + (4π²/N²) cos k₊`.
pub fn spectral_period_taylor(k_plus: f64, n_sites: usize) -> Result<f64> {
    check_k(k_plus)?;
    let n = n_sites as f64;
    Ok(4.0 * PI / n * k_plus.sin() + 4.0 * PI * PI / (n * n) * k_plus.cos())
}

/// `4π/N`.
pub fn spectral_period_leading(n_sites: usize) -> f64 {
    4.0 * PI / n_sites as f64
}

/// Period formulas evaluated at the energy's renormalised wavenumber, scaled by ξ.
pub fn spectral_period_at_energy(energy: f64, params: &ModelParams) -> Result<(f64, f64)> {
    let k_plus = renormalized_wavenumber(energy, params)?;
    let n = params.n_sites;
    Ok((
        params.xi * spectral_period_exact(k_plus, n)?,
        params.xi * spectral_period_taylor(k_plus, n)?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseAnalysis {
    pub n_sites: usize,
    /// Wavenumber at which the analytic periods are evaluated (the pinned k).
    pub k_plus: f64,
    /// `k₊ (N - 1)`.
    pub phi: f64,
    /// `k₊ N`, the other separation in use for the same phase.
    pub phi_n: f64,
    /// `None` when `k₊ + 2π/N` leaves the branch.
    pub delta_e_exact: Option<f64>,
    pub delta_e_taylor: f64,
    pub delta_e_leading: f64,
    pub four_over_n: f64,
    pub four_n: f64,
    /// Numeric period of the diagnostic spectrum; `None` when it has none.
    pub tau_estimate: Option<f64>,
    pub autocorrelation_peak: Option<f64>,
    pub grid_points: usize,
    pub grid_spacing: f64,
    /// Grid points that failed to evaluate and were interpolated.
    pub interpolated_points: usize,
}

/// Numeric period of `T_B→(E)` over a fixed-k energy sweep.
pub fn estimate_period_numeric(spec: &SweepSpec) -> Result<PhaseAnalysis> {
    estimate_period_numeric_with(spec, Execution::default())
}

pub fn estimate_period_numeric_with(spec: &SweepSpec, exec: Execution) -> Result<PhaseAnalysis> {
    let k_plus = spec
        .fixed_k
        .ok_or_else(|| Error::InvalidSweep("period estimation needs a pinned wavenumber".into()))?;
    if spec.axis1.axis != Axis::Energy || spec.axis2.is_some() {
        return Err(Error::InvalidSweep("period estimation needs a 1D energy sweep".into()));
    }
    let (e_min, e_max, steps) = match spec.axis1.values {
        AxisValues::Range { min, max, steps } => (min, max, steps),
        AxisValues::List(_) => {
            return Err(Error::InvalidSweep("period estimation needs a uniform energy range".into()))
        }
    };
    if steps < MIN_GRID_POINTS {
        return Err(Error::InsufficientResolution(format!(
            "{steps} grid points, at least {MIN_GRID_POINTS} required"
        )));
    }
    let closed = SweepSpec { solver: Solver::ClosedForm, ..spec.clone() };
    let result = run_sweep_with(&closed, exec)?;
    let raw: Vec<Option<f64>> = result
        .points
        .iter()
        .map(|p| p.probabilities.map(|pr| pr.transfer_fwd))
        .collect();
    let interpolated_points = raw.iter().filter(|v| v.is_none()).count();
    let series = fill_gaps(&raw).ok_or_else(|| {
        Error::InsufficientResolution("no grid point could be evaluated".into())
    })?;
    let spacing = (e_max - e_min) / (steps - 1) as f64;

    let n = spec.base.n_sites;
    let (tau_estimate, autocorrelation_peak) = match autocorrelation_period(&series) {
        Some((lag, peak)) => {
            if lag < MIN_POINTS_PER_PERIOD {
                return Err(Error::InsufficientResolution(format!(
                    "period spans {lag:.1} grid points, at least {MIN_POINTS_PER_PERIOD} required"
                )));
            }
            (Some(lag * spacing), Some(peak))
        }
        None => (None, None),
    };

    Ok(PhaseAnalysis {
        n_sites: n,
        k_plus,
        phi: k_plus * n.saturating_sub(1) as f64,
        phi_n: k_plus * n as f64,
        delta_e_exact: spectral_period_exact(k_plus, n).ok().map(|d| d * spec.base.xi),
        delta_e_taylor: spectral_period_taylor(k_plus, n)? * spec.base.xi,
        delta_e_leading: spectral_period_leading(n) * spec.base.xi,
        four_over_n: 4.0 / n as f64,
        four_n: 4.0 * n as f64,
        tau_estimate,
        autocorrelation_peak,
        grid_points: steps,
        grid_spacing: spacing,
        interpolated_points,
    })
}

/// Linear interpolation over missing samples; edges take the nearest value.
fn fill_gaps(raw: &[Option<f64>]) -> Option<Vec<f64>> {
    let known: Vec<(usize, f64)> = raw
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .collect();
    let (first, last) = (*known.first()?, *known.last()?);
    let mut out = vec![0.0; raw.len()];
    out[..=first.0].fill(first.1);
    out[last.0..].fill(last.1);
    for pair in known.windows(2) {
        let ((i0, v0), (i1, v1)) = (pair[0], pair[1]);
        for (i, slot) in out.iter_mut().enumerate().take(i1 + 1).skip(i0) {
            let t = (i - i0) as f64 / (i1 - i0) as f64;
            *slot = v0 + t * (v1 - v0);
        }
    }
    Some(out)
}

/// Lag (in samples, parabolically refined) and height of the highest
/// normalised autocorrelation peak past the first negative lag.
pub(crate) fn autocorrelation_period(series: &[f64]) -> Option<(f64, f64)> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let acf = |lag: usize| x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum::<f64>();
    let zero = acf(0);
    if !(zero > 1e-24 * n as f64) {
        return None;
    }
    let ac: Vec<f64> = (0..n / 2).map(|l| acf(l) / zero).collect();
    let first_negative = ac.iter().position(|&v| v < 0.0)?;
    let (offset, &peak) = ac[first_negative..]
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, (i, v)| if *v > *best.1 { (i, v) } else { best });
    let i = first_negative + offset;
    if peak < MIN_AUTOCORRELATION_PEAK || i + 1 >= ac.len() {
        return None;
    }
    let (y0, y1, y2) = (ac[i - 1], ac[i], ac[i + 1]);
    let curvature = y0 - 2.0 * y1 + y2;
    let shift = if curvature != 0.0 { 0.5 * (y0 - y2) / curvature } else { 0.0 };
    Some((i as f64 + shift, peak))
}
