//! Closed-form single-photon scattering for the mirror-symmetric router.
//!
//! # Reduction
//!
//! Eliminating the atoms with the chain resolvent leaves each waveguide with
//! a perturbation on sites 1 and N only. For `g_A = g_B = g` the combinations
//! `ψ± = α ± β` decouple:
//!
//! * the antisymmetric channel `ψ-` is a free chain, so `r- = 0`, `t- = 1`;
//! * the symmetric channel `ψ+` sees an on-site shift `2g²⟨1|G|1⟩` at sites
//!   1 and N and a link `2g²⟨1|G|M⟩` between them.
//!
//! # Closed form for the symmetric channel
//!
//! The two-site perturbation commutes with the mirror `j → N+1-j`, so it is
//! diagonal in the even/odd combinations of sites 1 and N with self-energies
//!
//! ```text
//! σe = 2g²(G11 + G1M) = 2 ε̄        σo = 2g²(G11 - G1M)
//! ```
//!
//! With the free-chain propagator `g0 = 1/(2iξ sin k)` and the phase
//! `P = e^{ik(N-1)}` accumulated between the coupling sites, the parity
//! T-matrix elements are
//!
//! ```text
//! Te = σe / (1 - g0 (1 + P) σe)      To = σo / (1 - g0 (1 - P) σo)
//! ```
//!
//! and matching `ψ+ = e^{ikj} + r+ e^{-ikj}` (j < 1), `t+ e^{ikj}` (j > N)
//! gives
//!
//! ```text
//! r+ = g0 e^{2ik} [Te (1 + P)² + To (1 - P)²] / 2
//! t+ = 1 + g0 [Te (1 + cos k(N-1)) + To (1 - cos k(N-1))]
//! ```
//!
//! The expressions in χ/λ/Δ/Λ form are kept in [`printed`] for comparison.
//! They do not satisfy flux conservation and disagree with the direct solver.
//!
//! # Unitarity and flow conservation
//!
//! Using `r_A = t_B← = r+/2`, `t_A = (t+ + 1)/2`, `t_B→ = (t+ - 1)/2`,
//!
//! ```text
//! R_A + T_A + T_B← + T_B→ = |r+|²/2 + (|t+ + 1|² + |t+ - 1|²)/4
//!                         = (|r+|² + |t+|² + 1) / 2
//! ```
//!
//! so the four probabilities sum to one exactly when `|r+|² + |t+|² = 1`.
//! Both identities are tested independently.

pub mod printed;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{ChainResolvent, GreenEvaluation, DEFAULT_POLE_GUARD};
use crate::model::{self, Branch, Context, ModelParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Amplitudes of the virtual symmetric (+) and antisymmetric (-) channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SAAmplitudes {
    pub energy: f64,
    /// Wavenumber of the asymptotic plane waves (the pinned value in
    /// diagnostic mode).
    pub k: f64,
    /// Wavenumber of the free chain between the coupling sites at this
    /// energy; complex (evanescent) only in diagnostic mode beyond the band.
    pub k_internal: Complex64,
    /// Wavenumber of a chain whose site energy is renormalised to
    /// `ε+ = ω0 + ε̄`; used by the effective-phase analysis.
    pub k_plus: Complex64,
    pub r_plus: Complex64,
    pub t_plus: Complex64,
    pub r_minus: Complex64,
    pub t_minus: Complex64,
    pub sigma_even: f64,
    pub sigma_odd: f64,
    pub t_even: Complex64,
    pub t_odd: Complex64,
    pub green: GreenEvaluation,
    /// True when the asymptotic wavenumber was pinned instead of following E.
    pub diagnostic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalAmplitudes {
    pub r_a: Complex64,
    pub t_a: Complex64,
    pub t_b_back: Complex64,
    pub t_b_fwd: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelProbabilities {
    pub reflect_a: f64,
    pub transmit_a: f64,
    pub transfer_back: f64,
    pub transfer_fwd: f64,
    /// `|R_A + T_A + T_B← + T_B→ - 1|`.
    pub conservation_residual: f64,
}

impl ChannelProbabilities {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.reflect_a,
            self.transmit_a,
            self.transfer_back,
            self.transfer_fwd,
        ]
    }

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

pub fn sa_amplitudes(energy: f64, params: &ModelParams, fixed_k: Option<f64>) -> Result<SAAmplitudes> {
    sa_amplitudes_with_guard(energy, params, fixed_k, DEFAULT_POLE_GUARD)
}

pub fn sa_amplitudes_with_guard(
    energy: f64,
    params: &ModelParams,
    fixed_k: Option<f64>,
    pole_guard: f64,
) -> Result<SAAmplitudes> {
    params.validate(Context::ClosedForm)?;
    let (omega_0, xi) = (params.omega_0, params.xi);

    let k_internal = match fixed_k {
        None => {
            if !model::strictly_in_band(energy, omega_0, xi) {
                return Err(model::out_of_band(energy, omega_0, xi));
            }
            model::wavenumber_from_energy(energy, omega_0, xi, Branch::RealBand)?
        }
        Some(k) => {
            if !(k > 0.0 && k < std::f64::consts::PI) {
                return Err(Error::InvalidWavenumber(k));
            }
            // The band edge has no propagating or decaying solution to expand in.
            if (energy - omega_0).abs() == 2.0 * xi {
                return Err(model::out_of_band(energy, omega_0, xi));
            }
            model::wavenumber_from_energy(energy, omega_0, xi, Branch::Evanescent)?
        }
    };
    let k = fixed_k.unwrap_or(k_internal.re);

    let green = match ChainResolvent::with_pole_guard(energy, params, pole_guard) {
        Ok(resolvent) => resolvent.evaluation(params.g),
        // Without coupling the chain is invisible to the photon, poles included.
        Err(_) if params.g == 0.0 => GreenEvaluation::detached(energy),
        Err(e) => return Err(e),
    };
    let g2 = params.g * params.g;
    let (sigma_even, sigma_odd) = if params.g == 0.0 {
        (0.0, 0.0)
    } else {
        (2.0 * g2 * (green.g11 + green.g1m), 2.0 * g2 * (green.g11 - green.g1m))
    };

    let span = (params.n_sites - 1) as f64;
    let g0_int = (2.0 * I * xi * k_internal.sin()).inv();
    let phase_int = (I * k_internal * span).exp();
    let t_even = sigma_even / (1.0 - g0_int * (1.0 + phase_int) * sigma_even);
    let t_odd = sigma_odd / (1.0 - g0_int * (1.0 - phase_int) * sigma_odd);

    let g0 = (2.0 * I * xi * k.sin()).inv();
    let phase = (I * k * span).exp();
    let cos_span = (k * span).cos();
    let r_plus = g0 * (2.0 * I * k).exp() * (t_even * (1.0 + phase).powi(2) + t_odd * (1.0 - phase).powi(2)) / 2.0;
    let t_plus = 1.0 + g0 * (t_even * (1.0 + cos_span) + t_odd * (1.0 - cos_span));

    let eps_plus = omega_0 + green.self_energy;
    let k_plus = model::wavenumber_from_energy(energy, eps_plus, xi, Branch::Evanescent)?;

    Ok(SAAmplitudes {
        energy,
        k,
        k_internal,
        k_plus,
        r_plus,
        t_plus,
        r_minus: Complex64::new(0.0, 0.0),
        t_minus: Complex64::new(1.0, 0.0),
        sigma_even,
        sigma_odd,
        t_even,
        t_odd,
        green,
        diagnostic: fixed_k.is_some(),
    })
}

/// Back to the physical waveguides: `(α, β) = ½ [[1, 1], [1, -1]] (ψ+, ψ-)`.
pub fn physical_amplitudes(sa: &SAAmplitudes) -> PhysicalAmplitudes {
    from_channel_amplitudes(sa.r_plus, sa.t_plus, sa.r_minus, sa.t_minus)
}

pub(crate) fn from_channel_amplitudes(
    r_plus: Complex64,
    t_plus: Complex64,
    r_minus: Complex64,
    t_minus: Complex64,
) -> PhysicalAmplitudes {
    PhysicalAmplitudes {
        r_a: 0.5 * (r_plus + r_minus),
        t_a: 0.5 * (t_plus + t_minus),
        t_b_back: 0.5 * (r_plus - r_minus),
        t_b_fwd: 0.5 * (t_plus - t_minus),
    }
}

pub fn probabilities(pa: &PhysicalAmplitudes) -> ChannelProbabilities {
    probabilities_from(pa.r_a, pa.t_a, pa.t_b_back, pa.t_b_fwd)
}

pub(crate) fn probabilities_from(
    r_a: Complex64,
    t_a: Complex64,
    t_b_back: Complex64,
    t_b_fwd: Complex64,
) -> ChannelProbabilities {
    let reflect_a = r_a.norm_sqr();
    let transmit_a = t_a.norm_sqr();
    let transfer_back = t_b_back.norm_sqr();
    let transfer_fwd = t_b_fwd.norm_sqr();
    ChannelProbabilities {
        reflect_a,
        transmit_a,
        transfer_back,
        transfer_fwd,
        conservation_residual: (reflect_a + transmit_a + transfer_back + transfer_fwd - 1.0).abs(),
    }
}

pub fn scatter(energy: f64, params: &ModelParams) -> Result<ChannelProbabilities> {
    let sa = sa_amplitudes(energy, params, None)?;
    Ok(probabilities(&physical_amplitudes(&sa)))
}

/// Physical amplitudes straight from energy and parameters.
pub fn amplitudes(energy: f64, params: &ModelParams) -> Result<PhysicalAmplitudes> {
    Ok(physical_amplitudes(&sa_amplitudes(energy, params, None)?))
}
