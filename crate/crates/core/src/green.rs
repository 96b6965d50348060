//! Resolvent of the finite atom chain.
//!
//! With the third states eliminated, the excited-state amplitudes obey
//! `(E - ω̄e) u_j - J (u_{j+1} + u_{j-1}) = S_j` on an open chain of `M`
//! sites, so `u = G(E) S` with `G(E) = [(E - ω̄e) I - J H_TB]^{-1}`. The
//! chain Hamiltonian `H_TB` (unit hopping, zero diagonal) has the analytic
//! eigenpairs of [`ChainEigensystem`], and every element of `G` is a short
//! spectral sum over them.
//!
//! No broadening is added to the denominators. Evaluations closer than a
//! pole guard to any pole are refused instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Default distance (in units of ξ) below which an energy counts as sitting
/// on a resolvent pole.
pub const DEFAULT_POLE_GUARD: f64 = 1e-9;

/// Analytic spectrum of the open `M`-site chain with unit hopping.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainEigensystem {
    m_atoms: usize,
    eigenvalues: Vec<f64>,
}

impl ChainEigensystem {
    pub fn new(m_atoms: usize) -> Self {
        let denom = (m_atoms + 1) as f64;
        let eigenvalues = (1..=m_atoms)
            .map(|n| 2.0 * (n as f64 * PI / denom).cos())
            .collect();
        Self {
            m_atoms,
            eigenvalues,
        }
    }

    pub fn m_atoms(&self) -> usize {
        self.m_atoms
    }

    /// `E_n = 2 cos(nπ/(M+1))`, ordered by `n = 1..=M` (strictly decreasing).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `⟨j|ψ_n⟩ = sqrt(2/(M+1)) sin(njπ/(M+1))`, both indices 1-based.
    pub fn amplitude(&self, n: usize, j: usize) -> f64 {
        let denom = (self.m_atoms + 1) as f64;
        (2.0 / denom).sqrt() * ((n * j) as f64 * PI / denom).sin()
    }
}

pub fn chain_eigensystem(m_atoms: usize) -> ChainEigensystem {
    ChainEigensystem::new(m_atoms)
}

/// `ω̄e = ω_e + Ω²/(E - ω's)`; exactly `ω_e` when the control field is off.
pub fn effective_excited_frequency(energy: f64, params: &ModelParams) -> Result<f64> {
    effective_excited_frequency_guarded(energy, params, DEFAULT_POLE_GUARD)
}

pub(crate) fn effective_excited_frequency_guarded(
    energy: f64,
    params: &ModelParams,
    pole_guard: f64,
) -> Result<f64> {
    dressed_excited_frequency(
        energy,
        params.omega_e,
        params.omega_s_prime,
        params.omega_big,
        pole_guard,
    )
}

pub(crate) fn dressed_excited_frequency(
    energy: f64,
    omega_e: f64,
    omega_s_prime: f64,
    omega_big: f64,
    pole_guard: f64,
) -> Result<f64> {
    if omega_big == 0.0 {
        return Ok(omega_e);
    }
    let detuning = energy - omega_s_prime;
    if detuning.abs() <= pole_guard {
        return Err(Error::PoleAtThirdState {
            energy,
            omega_s_prime,
        });
    }
    Ok(omega_e + omega_big * omega_big / detuning)
}

/// `G(E)` of the chain at one energy, ready for element queries.
#[derive(Debug, Clone)]
pub struct ChainResolvent {
    eig: ChainEigensystem,
    energy: f64,
    omega_e_bar: f64,
    /// `1 / (E - ω̄e - J E_n)` for each mode.
    inverse_denominators: Vec<f64>,
    min_pole_distance: f64,
}

impl ChainResolvent {
    pub fn new(energy: f64, params: &ModelParams) -> Result<Self> {
        Self::with_pole_guard(energy, params, DEFAULT_POLE_GUARD)
    }

    pub fn with_pole_guard(energy: f64, params: &ModelParams, pole_guard: f64) -> Result<Self> {
        let omega_e_bar = effective_excited_frequency_guarded(energy, params, pole_guard)?;
        let eig = ChainEigensystem::new(params.m_atoms);
        let denominators: Vec<f64> = eig
            .eigenvalues()
            .iter()
            .map(|e_n| energy - omega_e_bar - params.j_coupling * e_n)
            .collect();
        let min_pole_distance = denominators
            .iter()
            .map(|d| d.abs())
            .fold(f64::INFINITY, f64::min);
        if min_pole_distance <= pole_guard {
            return Err(Error::AtResolventPole {
                energy,
                distance: min_pole_distance,
                guard: pole_guard,
            });
        }
        Ok(Self {
            eig,
            energy,
            omega_e_bar,
            inverse_denominators: denominators.iter().map(|d| d.recip()).collect(),
            min_pole_distance,
        })
    }

    pub fn omega_e_bar(&self) -> f64 {
        self.omega_e_bar
    }

    pub fn min_pole_distance(&self) -> f64 {
        self.min_pole_distance
    }

    /// `⟨j|G(E)|j2⟩`, sites 1-based.
    pub fn element(&self, j: usize, j2: usize) -> Result<f64> {
        let m = self.eig.m_atoms();
        if j == 0 || j2 == 0 || j > m || j2 > m {
            return Err(Error::SiteOutOfRange { j, j2, m_atoms: m });
        }
        Ok(self
            .inverse_denominators
            .iter()
            .enumerate()
            .map(|(i, inv)| self.eig.amplitude(i + 1, j) * self.eig.amplitude(i + 1, j2) * inv)
            .sum())
    }

    pub fn evaluation(&self, g: f64) -> GreenEvaluation {
        let m = self.eig.m_atoms();
        // indices are in range by construction
        let g11 = self.element(1, 1).unwrap_or(f64::NAN);
        let g1m = self.element(1, m).unwrap_or(f64::NAN);
        let gamma = g11 + g1m;
        GreenEvaluation {
            energy: self.energy,
            omega_e_bar: self.omega_e_bar,
            g11,
            g1m,
            gamma,
            self_energy: g * g * gamma,
            min_pole_distance: self.min_pole_distance,
        }
    }
}

/// Chain resolvent data needed by the scattering closed form at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenEvaluation {
    pub energy: f64,
    pub omega_e_bar: f64,
    /// End-site diagonal element `⟨1|G|1⟩ = ⟨M|G|M⟩`.
    pub g11: f64,
    /// End-to-end element `⟨1|G|M⟩ = ⟨M|G|1⟩`.
    pub g1m: f64,
    /// `Γ(E) = ⟨1|G|1⟩ + ⟨1|G|M⟩`.
    pub gamma: f64,
    /// `ε̄ = g² Γ(E)`.
    pub self_energy: f64,
    pub min_pole_distance: f64,
}

impl GreenEvaluation {
    /// Placeholder for an uncoupled chain sitting on one of its poles: the
    /// elements are undefined and the self-energy is zero.
    pub fn detached(energy: f64) -> Self {
        Self {
            energy,
            omega_e_bar: f64::NAN,
            g11: f64::NAN,
            g1m: f64::NAN,
            gamma: f64::NAN,
            self_energy: 0.0,
            min_pole_distance: 0.0,
        }
    }
}

pub fn green_element(energy: f64, params: &ModelParams, j: usize, j2: usize) -> Result<f64> {
    ChainResolvent::new(energy, params)?.element(j, j2)
}

pub fn gamma(energy: f64, params: &ModelParams) -> Result<GreenEvaluation> {
    Ok(ChainResolvent::new(energy, params)?.evaluation(params.g))
}
