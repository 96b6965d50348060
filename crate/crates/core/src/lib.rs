//! Single-photon routing between two tight-binding waveguides bridged by a
//! chain of coupled atoms, each atom touching the waveguides at two sites.
//!
//! * [`model`]: parameters, validation and the waveguide dispersion.
//! * [`green`]: the atom-chain resolvent and the induced self-energy.
//! * [`scattering`]: closed-form amplitudes and channel probabilities.
//! * [`oracle`]: direct solution of the stationary equations.
//! * [`analysis`]: sweeps, phase-period analysis and peak search.

// `!(x < tol)` is used on purpose throughout so that NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod exec;
pub mod green;
pub mod model;
pub mod oracle;
pub mod scattering;

pub use error::{Error, Result};
pub use model::{AsymmetricParams, Context, ModelParams};
pub use scattering::{ChannelProbabilities, PhysicalAmplitudes, SAAmplitudes};
