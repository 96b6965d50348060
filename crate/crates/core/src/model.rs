//! Physical parameters and waveguide dispersion.
//!
//! Every energy is expressed in units of the waveguide hopping `xi`, which is
//! carried explicitly (default 1) so that waveguides with different hoppings
//! stay expressible in [`AsymmetricParams`].
//!
//! Sign conventions used throughout the crate:
//!
//! * waveguide sites obey `(E - ω) α_i = -ξ (α_{i+1} + α_{i-1}) + coupling`,
//!   so a plane wave `e^{ikj}` has energy `ω - 2ξ cos k`;
//! * atoms obey `(E - ω_e) u_j = J (u_{j+1} + u_{j-1}) + Ω u_{s,j} + source`,
//!   an open chain with `u_0 = u_{M+1} = 0`;
//! * the control field couples `(E - ω's) u_{s,j} = Ω u_{e,j}` with real `Ω ≥ 0`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the mirror-symmetric router: identical waveguides and
/// identical couplings `g_A = g_B = g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Cavity frequency shared by both waveguides.
    pub omega_0: f64,
    /// Nearest-neighbour hopping of the waveguides.
    pub xi: f64,
    pub omega_e: f64,
    /// Third-state frequency in the rotating frame, `ω_s + ν`.
    pub omega_s_prime: f64,
    /// Rabi frequency of the control field.
    pub omega_big: f64,
    /// Inter-atom hopping.
    pub j_coupling: f64,
    pub g: f64,
    /// Number of waveguide sites spanned by the array (coupling at 1 and N).
    pub n_sites: usize,
    pub m_atoms: usize,
}

impl Default for ModelParams {
    /// Router regime used for the reference spectra: strong atom-waveguide
    /// coupling, weak inter-atom hopping, all frequencies at band centre.
    fn default() -> Self {
        Self {
            omega_0: 0.0,
            xi: 1.0,
            omega_e: 0.0,
            omega_s_prime: 0.0,
            omega_big: 0.0,
            j_coupling: 0.01,
            g: 1.5,
            n_sites: 8,
            m_atoms: 8,
        }
    }
}

impl ModelParams {
    /// Same parameters with `n_sites = m_atoms = n`.
    pub fn with_size(mut self, n: usize) -> Self {
        self.n_sites = n;
        self.m_atoms = n;
        self
    }

    pub fn validate(&self, context: Context) -> Result<ValidatedModel> {
        let mut violations = Vec::new();
        check_common(
            &mut violations,
            &[("xi", self.xi)],
            &[("g", self.g)],
            self.omega_big,
            self.j_coupling,
            self.n_sites,
            self.m_atoms,
        );
        for (name, v) in [
            ("omega_0", self.omega_0),
            ("omega_e", self.omega_e),
            ("omega_s_prime", self.omega_s_prime),
        ] {
            if !v.is_finite() {
                violations.push(ModelViolation::NonFinite(name));
            }
        }
        if context == Context::ClosedForm && self.m_atoms != self.n_sites {
            violations.push(ModelViolation::MismatchedAtomCount {
                n_sites: self.n_sites,
                m_atoms: self.m_atoms,
            });
        }
        if violations.is_empty() {
            Ok(ValidatedModel {
                params: *self,
                context,
            })
        } else {
            Err(Error::InvalidModel(violations))
        }
    }

    /// Lower and upper edge of the propagating band.
    pub fn band(&self) -> (f64, f64) {
        (self.omega_0 - 2.0 * self.xi, self.omega_0 + 2.0 * self.xi)
    }

    pub fn is_in_band(&self, energy: f64) -> bool {
        strictly_in_band(energy, self.omega_0, self.xi)
    }
}

/// What the parameters are going to be used for; the closed form needs
/// `m_atoms == n_sites`, the direct solver does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    ClosedForm,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedModel {
    params: ModelParams,
    context: Context,
}

impl ValidatedModel {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn context(&self) -> Context {
        self.context
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelViolation {
    NonPositiveHopping { name: &'static str, value: f64 },
    NegativeCoupling { name: &'static str, value: f64 },
    TooFewSites(usize),
    TooFewAtoms(usize),
    MismatchedAtomCount { n_sites: usize, m_atoms: usize },
    NonFinite(&'static str),
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositiveHopping { name, value } => {
                write!(f, "NonPositiveHopping: {name} = {value} must be > 0")
            }
            Self::NegativeCoupling { name, value } => {
                write!(f, "NegativeCoupling: {name} = {value} must be >= 0")
            }
            Self::TooFewSites(n) => write!(f, "TooFewSites: n_sites = {n} must be >= 2"),
            Self::TooFewAtoms(m) => write!(f, "TooFewAtoms: m_atoms = {m} must be >= 2"),
            Self::MismatchedAtomCount { n_sites, m_atoms } => write!(
                f,
                "MismatchedAtomCount: closed form requires m_atoms = n_sites, got m_atoms = {m_atoms}, n_sites = {n_sites}"
            ),
            Self::NonFinite(name) => write!(f, "NonFinite: {name} must be finite"),
        }
    }
}

fn check_common(
    out: &mut Vec<ModelViolation>,
    hoppings: &[(&'static str, f64)],
    couplings: &[(&'static str, f64)],
    omega_big: f64,
    j_coupling: f64,
    n_sites: usize,
    m_atoms: usize,
) {
    for &(name, value) in hoppings {
        if !(value > 0.0) || !value.is_finite() {
            out.push(ModelViolation::NonPositiveHopping { name, value });
        }
    }
    for &(name, value) in couplings
        .iter()
        .chain([("omega_big", omega_big), ("j_coupling", j_coupling)].iter())
    {
        if !(value >= 0.0) || !value.is_finite() {
            out.push(ModelViolation::NegativeCoupling { name, value });
        }
    }
    // N = 1 would put both coupling points on the same site.
    if n_sites < 2 {
        out.push(ModelViolation::TooFewSites(n_sites));
    }
    if m_atoms < 2 {
        out.push(ModelViolation::TooFewAtoms(m_atoms));
    }
}

/// General two-waveguide parameters. Only the direct solver accepts these;
/// unequal couplings break the symmetric/antisymmetric decoupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub xi_a: f64,
    pub xi_b: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub omega_e: f64,
    pub omega_s_prime: f64,
    pub omega_big: f64,
    pub j_coupling: f64,
    pub n_sites: usize,
    pub m_atoms: usize,
}

impl From<&ModelParams> for AsymmetricParams {
    fn from(p: &ModelParams) -> Self {
        Self {
            omega_a: p.omega_0,
            omega_b: p.omega_0,
            xi_a: p.xi,
            xi_b: p.xi,
            g_a: p.g,
            g_b: p.g,
            omega_e: p.omega_e,
            omega_s_prime: p.omega_s_prime,
            omega_big: p.omega_big,
            j_coupling: p.j_coupling,
            n_sites: p.n_sites,
            m_atoms: p.m_atoms,
        }
    }
}

impl From<ModelParams> for AsymmetricParams {
    fn from(p: ModelParams) -> Self {
        Self::from(&p)
    }
}

impl AsymmetricParams {
    /// The symmetric parameter set, if the two waveguides and couplings coincide.
    pub fn to_symmetric(&self) -> Option<ModelParams> {
        let same = self.omega_a == self.omega_b && self.xi_a == self.xi_b && self.g_a == self.g_b;
        same.then_some(ModelParams {
            omega_0: self.omega_a,
            xi: self.xi_a,
            omega_e: self.omega_e,
            omega_s_prime: self.omega_s_prime,
            omega_big: self.omega_big,
            j_coupling: self.j_coupling,
            g: self.g_a,
            n_sites: self.n_sites,
            m_atoms: self.m_atoms,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        check_common(
            &mut violations,
            &[("xi_a", self.xi_a), ("xi_b", self.xi_b)],
            &[("g_a", self.g_a), ("g_b", self.g_b)],
            self.omega_big,
            self.j_coupling,
            self.n_sites,
            self.m_atoms,
        );
        for (name, v) in [
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("omega_e", self.omega_e),
            ("omega_s_prime", self.omega_s_prime),
        ] {
            if !v.is_finite() {
                violations.push(ModelViolation::NonFinite(name));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(violations))
        }
    }
}

/// `E = ω - 2ξ cos k`.
pub fn dispersion_energy(k: f64, omega: f64, xi: f64) -> f64 {
    omega - 2.0 * xi * k.cos()
}

/// Complex counterpart of [`dispersion_energy`]; real for real `k` and for
/// the evanescent wavenumbers returned by [`wavenumber_from_energy`].
pub fn dispersion_energy_complex(k: Complex64, omega: f64, xi: f64) -> Complex64 {
    omega - 2.0 * xi * k.cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Propagating solution, `k ∈ [0, π]`; fails outside the band.
    RealBand,
    /// Principal complex arccos continued so that `Im k ≥ 0`.
    Evanescent,
}

/// Inverts the dispersion: `cos k = -(E - ω) / 2ξ`.
pub fn wavenumber_from_energy(energy: f64, omega: f64, xi: f64, branch: Branch) -> Result<Complex64> {
    let z = -(energy - omega) / (2.0 * xi);
    match branch {
        Branch::RealBand => {
            if z.abs() > 1.0 {
                return Err(Error::OutOfBand {
                    energy,
                    lower: omega - 2.0 * xi,
                    upper: omega + 2.0 * xi,
                });
            }
            Ok(Complex64::new(z.acos(), 0.0))
        }
        Branch::Evanescent => Ok(evanescent_arccos(Complex64::new(z, 0.0))),
    }
}

/// `arccos` with the sign of the imaginary part fixed to `Im ≥ 0`, so that
/// `e^{ikj}` stays bounded for `j → +∞`.
pub(crate) fn evanescent_arccos(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re.abs() <= 1.0 {
        return Complex64::new(z.re.acos(), 0.0);
    }
    let k = z.acos();
    if k.im < 0.0 {
        // cos(-k) = cos(k): pick the root in the upper half plane
        -k
    } else {
        k
    }
}

/// Open interior of the band; band edges carry zero group velocity and are
/// excluded from scattering.
pub(crate) fn strictly_in_band(energy: f64, omega: f64, xi: f64) -> bool {
    (energy - omega).abs() < 2.0 * xi
}

pub(crate) fn out_of_band(energy: f64, omega: f64, xi: f64) -> Error {
    Error::OutOfBand {
        energy,
        lower: omega - 2.0 * xi,
        upper: omega + 2.0 * xi,
    }
}
