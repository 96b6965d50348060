//! Sweeps, phase and period analysis, and the routing-peak search.

pub mod phase;
pub mod routing;
pub mod sweep;

pub use phase::{
    effective_phase, estimate_period_numeric, spectral_period_exact, spectral_period_leading,
    spectral_period_taylor, PhaseAnalysis,
};
pub use routing::{find_perfect_routing, routing_maxima, transfer_maximum, RoutingPeak};
pub use sweep::{run_sweep, run_sweep_with, Axis, AxisSpec, AxisValues, Solver, SweepPoint, SweepResult, SweepSpec};
