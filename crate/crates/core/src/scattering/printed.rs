//! Symmetric-channel amplitudes in the χ/λ/Δ/Λ form.
//!
//! These expressions assume a symmetric channel whose whole scattering
//! region is shifted to `ε+ = ω0 + ε̄` with wavenumber
//! `k+ = arccos(-(E - ε+)/2ξ)`. Two places in the typeset form are
//! ambiguous (the grouping of the trailing `ξ² cos(k+(N-1))` term in Δ and
//! the wavenumber inside λ), so both readings are selectable.
//!
//! None of the four readings conserves flux, and none agrees with
//! [`crate::oracle::solve_direct`]. The module exists so that the comparison
//! can be reproduced; [`super::sa_amplitudes`] is the closed form used
//! everywhere else.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::green::ChainResolvent;
use crate::model::{self, Branch, Context, ModelParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeltaGrouping {
    /// `[..] sin(k+(N-1)) + sin(2k+(N-1)) 2ξ(ε̄-ξ) cos k+ + ξ² cos(k+(N-1))`
    TrailingOutside,
    /// `[..] sin(k+(N-1)) + sin(2k+(N-1)) [2ξ(ε̄-ξ) cos k+ + ξ² cos(k+(N-1))]`
    TrailingInside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LambdaWavenumber {
    /// `e^{ik+}` inside λ.
    Renormalized,
    /// `e^{ik}` inside λ.
    Incident,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrintedReading {
    pub delta: DeltaGrouping,
    pub lambda: LambdaWavenumber,
}

impl PrintedReading {
    pub const ALL: [PrintedReading; 4] = [
        PrintedReading { delta: DeltaGrouping::TrailingOutside, lambda: LambdaWavenumber::Renormalized },
        PrintedReading { delta: DeltaGrouping::TrailingInside, lambda: LambdaWavenumber::Renormalized },
        PrintedReading { delta: DeltaGrouping::TrailingOutside, lambda: LambdaWavenumber::Incident },
        PrintedReading { delta: DeltaGrouping::TrailingInside, lambda: LambdaWavenumber::Incident },
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrintedAmplitudes {
    pub reading: PrintedReading,
    pub k: f64,
    pub k_plus: Complex64,
    pub self_energy: f64,
    pub chi: Complex64,
    pub lambda: Complex64,
    pub delta: Complex64,
    pub big_lambda: Complex64,
    pub r_plus: Complex64,
    pub t_plus: Complex64,
}

pub fn printed_sa_amplitudes(
    energy: f64,
    params: &ModelParams,
    fixed_k: Option<f64>,
    reading: PrintedReading,
) -> Result<PrintedAmplitudes> {
    params.validate(Context::ClosedForm)?;
    let (omega_0, xi) = (params.omega_0, params.xi);
    let k = match fixed_k {
        Some(k) => k,
        None => {
            if !model::strictly_in_band(energy, omega_0, xi) {
                return Err(model::out_of_band(energy, omega_0, xi));
            }
            model::wavenumber_from_energy(energy, omega_0, xi, Branch::RealBand)?.re
        }
    };
    let eps_bar = ChainResolvent::new(energy, params)?.evaluation(params.g).self_energy;
    let kp = model::wavenumber_from_energy(energy, omega_0 + eps_bar, xi, Branch::Evanescent)?;

    let n = params.n_sites as f64;
    let s1 = (kp * (n - 1.0)).sin();
    let chi = xi * (kp * (n - 2.0)).sin() - 2.0 * xi * kp.cos() * s1;
    let lambda_k = match reading.lambda {
        LambdaWavenumber::Renormalized => kp,
        LambdaWavenumber::Incident => Complex64::new(k, 0.0),
    };
    let lambda = 2.0 * I * xi * xi * (energy - omega_0 + xi * (I * lambda_k).exp()) * chi;

    let lead = (4.0 * xi * xi * kp.cos().powi(2) - (eps_bar + xi).powi(2)) * s1;
    let s2 = (2.0 * kp * (n - 1.0)).sin();
    let mixed = 2.0 * xi * (eps_bar - xi) * kp.cos();
    let trailing = xi * xi * (kp * (n - 1.0)).cos();
    let delta = match reading.delta {
        DeltaGrouping::TrailingOutside => lead + s2 * mixed + trailing,
        DeltaGrouping::TrailingInside => lead + s2 * (mixed + trailing),
    };
    let big_lambda = -delta - 2.0 * I * xi.powi(4) * s1 + lambda;

    let r_plus = 4.0 * xi * k.sin() / big_lambda * (delta - chi);
    let t_plus = 4.0 * xi.powi(3) * k.sin() * (-I * k * (n + 1.0)).exp() / big_lambda
        * (eps_bar * (kp * (n + 1.0)).sin() - xi * kp.sin());

    Ok(PrintedAmplitudes {
        reading,
        k,
        k_plus: kp,
        self_energy: eps_bar,
        chi,
        lambda,
        delta,
        big_lambda,
        r_plus,
        t_plus,
    })
}
