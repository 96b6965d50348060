use thiserror::Error;

use crate::model::ModelViolation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {}", join_violations(.0))]
    InvalidModel(Vec<ModelViolation>),

    #[error("energy {energy} lies outside the band [{lower}, {upper}]")]
    OutOfBand { energy: f64, lower: f64, upper: f64 },

    #[error("energy {energy} coincides with the third-state frequency {omega_s_prime} while the control field is on")]
    PoleAtThirdState { energy: f64, omega_s_prime: f64 },

    #[error("energy {energy} is within {distance:e} of a resolvent pole (guard {guard:e})")]
    AtResolventPole { energy: f64, distance: f64, guard: f64 },

    #[error("site index ({j}, {j2}) outside the chain of {m_atoms} atoms")]
    SiteOutOfRange { j: usize, j2: usize, m_atoms: usize },

    #[error("scattering system is singular at energy {energy}")]
    SingularSystem { energy: f64 },

    #[error("pinned wavenumber {0} must lie strictly inside (0, π)")]
    InvalidWavenumber(f64),

    #[error("phase shift pushes k = {k_shifted} past π")]
    BranchOverflow { k_shifted: f64 },

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

fn join_violations(v: &[ModelViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
