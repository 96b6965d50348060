//! One- and two-dimensional parameter grids evaluated point by point.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{AsymmetricParams, ModelParams};
use crate::oracle::{self, DEFAULT_DEVIATION_TOLERANCE};
use crate::scattering::{self, ChannelProbabilities, PhysicalAmplitudes};

/// Conservation residual above which an in-band point is flagged.
pub const CONSERVATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Energy,
    /// N, with M kept equal.
    Sites,
    Hopping,
    ControlField,
    Coupling,
}

impl Axis {
    pub fn is_integer(self) -> bool {
        self == Axis::Sites
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::Energy => "E",
            Axis::Sites => "N",
            Axis::Hopping => "J",
            Axis::ControlField => "Omega",
            Axis::Coupling => "g",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AxisValues {
    /// `steps` evenly spaced values including both ends.
    Range { min: f64, max: f64, steps: usize },
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub axis: Axis,
    pub values: AxisValues,
}

impl AxisSpec {
    pub fn range(axis: Axis, min: f64, max: f64, steps: usize) -> Self {
        Self { axis, values: AxisValues::Range { min, max, steps } }
    }

    pub fn list(axis: Axis, values: Vec<f64>) -> Self {
        Self { axis, values: AxisValues::List(values) }
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        let values = match &self.values {
            AxisValues::Range { min, max, steps } => {
                let (min, max, steps) = (*min, *max, *steps);
                if !(min.is_finite() && max.is_finite()) || max < min {
                    return Err(Error::InvalidSweep(format!("{} range [{min}, {max}] is empty", self.axis.name())));
                }
                match steps {
                    0 => return Err(Error::InvalidSweep(format!("{} axis has no steps", self.axis.name()))),
                    1 if min == max => vec![min],
                    1 => {
                        return Err(Error::InvalidSweep(format!(
                            "{} range needs at least 2 steps",
                            self.axis.name()
                        )))
                    }
                    _ => {
                        let h = (max - min) / (steps - 1) as f64;
                        (0..steps)
                            .map(|i| if i + 1 == steps { max } else { min + h * i as f64 })
                            .collect()
                    }
                }
            }
            AxisValues::List(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidSweep(format!("{} list is empty", self.axis.name())));
                }
                v.clone()
            }
        };
        if self.axis.is_integer() {
            if let Some(bad) = values.iter().find(|v| v.fract() != 0.0 || **v < 1.0) {
                return Err(Error::InvalidSweep(format!("N axis value {bad} is not a positive integer")));
            }
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Solver {
    #[default]
    ClosedForm,
    Oracle,
    Both,
}

/// Waveguide B parameters that break the mirror symmetry between the guides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    pub omega_b: f64,
    pub xi_b: f64,
    pub g_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ModelParams,
    /// Used when energy is not a swept axis.
    pub energy: f64,
    pub axis1: AxisSpec,
    pub axis2: Option<AxisSpec>,
    /// Pinned incident wavenumber; makes the sweep diagnostic.
    pub fixed_k: Option<f64>,
    pub solver: Solver,
    pub deviation_tolerance: f64,
    /// Only honoured by the direct solver.
    pub asymmetry: Option<Asymmetry>,
}

impl SweepSpec {
    pub fn energy(base: ModelParams, axis1: AxisSpec) -> Self {
        Self {
            base,
            energy: 0.0,
            axis1,
            axis2: None,
            fixed_k: None,
            solver: Solver::ClosedForm,
            deviation_tolerance: DEFAULT_DEVIATION_TOLERANCE,
            asymmetry: None,
        }
    }

    pub fn is_diagnostic(&self) -> bool {
        self.fixed_k.is_some()
    }

    fn check(&self) -> Result<()> {
        if let Some(a2) = &self.axis2 {
            if a2.axis == self.axis1.axis {
                return Err(Error::InvalidSweep(format!("axis {} given twice", a2.axis.name())));
            }
        }
        if self.fixed_k.is_some() && self.solver != Solver::ClosedForm {
            return Err(Error::InvalidSweep("a pinned wavenumber is only available for the closed form".into()));
        }
        if self.asymmetry.is_some() && self.solver != Solver::Oracle {
            return Err(Error::InvalidSweep("unequal waveguides need the direct solver".into()));
        }
        if !(self.deviation_tolerance > 0.0) {
            return Err(Error::InvalidSweep("deviation tolerance must be positive".into()));
        }
        Ok(())
    }

    fn point(&self, a1: f64, a2: Option<f64>) -> (f64, ModelParams) {
        let mut energy = self.energy;
        let mut p = self.base;
        let axes = std::iter::once((self.axis1.axis, a1)).chain(self.axis2.as_ref().map(|s| s.axis).zip(a2));
        for (axis, v) in axes {
            match axis {
                Axis::Energy => energy = v,
                Axis::Sites => p = p.with_size(v as usize),
                Axis::Hopping => p.j_coupling = v,
                Axis::ControlField => p.omega_big = v,
                Axis::Coupling => p.g = v,
            }
        }
        (energy, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub energy: f64,
    pub probabilities: Option<ChannelProbabilities>,
    /// Max absolute amplitude deviation between the solvers.
    pub deviation: Option<f64>,
    /// Conservation or solver-agreement failure.
    pub flagged: bool,
    pub error: Option<PointError>,
}

/// Why a grid point has no values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointError {
    OutOfBand,
    Pole,
    InvalidModel,
    Singular,
    Other,
}

impl From<&Error> for PointError {
    fn from(e: &Error) -> Self {
        match e {
            Error::OutOfBand { .. } => PointError::OutOfBand,
            Error::PoleAtThirdState { .. } | Error::AtResolventPole { .. } => PointError::Pole,
            Error::InvalidModel(_) => PointError::InvalidModel,
            Error::SingularSystem { .. } => PointError::Singular,
            _ => PointError::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub params: ModelParams,
    pub solver: Solver,
    pub diagnostic: bool,
    pub code_version: String,
    /// Seconds since the Unix epoch when the sweep finished.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    /// Row-major over (axis1, axis2).
    pub points: Vec<SweepPoint>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn flagged(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| p.flagged)
    }

    pub fn errors(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| p.error.is_some())
    }

    pub fn max_deviation(&self) -> Option<f64> {
        self.points.iter().filter_map(|p| p.deviation).reduce(f64::max)
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, Execution::default())
}

pub fn run_sweep_with(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    spec.check()?;
    let g1 = spec.axis1.grid()?;
    let g2 = spec.axis2.as_ref().map(AxisSpec::grid).transpose()?;
    let coords: Vec<(f64, Option<f64>)> = match &g2 {
        None => g1.iter().map(|&a| (a, None)).collect(),
        Some(g2) => g1.iter().flat_map(|&a| g2.iter().map(move |&b| (a, Some(b)))).collect(),
    };
    let points = exec.map(&coords, |&(a1, a2)| evaluate(spec, a1, a2));
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Ok(SweepResult {
        axis1: spec.axis1.axis,
        axis2: spec.axis2.as_ref().map(|s| s.axis),
        points,
        metadata: SweepMetadata {
            params: spec.base,
            solver: spec.solver,
            diagnostic: spec.is_diagnostic(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        },
    })
}

fn evaluate(spec: &SweepSpec, a1: f64, a2: Option<f64>) -> SweepPoint {
    let (energy, params) = spec.point(a1, a2);
    let mut point = SweepPoint {
        axis1: a1,
        axis2: a2,
        energy,
        probabilities: None,
        deviation: None,
        flagged: false,
        error: None,
    };
    let outcome = match spec.solver {
        Solver::ClosedForm => scattering::sa_amplitudes(energy, &params, spec.fixed_k)
            .map(|sa| (scattering::probabilities(&scattering::physical_amplitudes(&sa)), None)),
        Solver::Oracle => {
            let mut asym = AsymmetricParams::from(&params);
            if let Some(a) = spec.asymmetry {
                asym.omega_b = a.omega_b;
                asym.xi_b = a.xi_b;
                asym.g_b = a.g_b;
            }
            oracle::solve_direct(energy, &asym).map(|s| (s.probabilities(), None))
        }
        Solver::Both => scattering::amplitudes(energy, &params).and_then(|closed| {
            let direct = oracle::solve_direct(energy, &AsymmetricParams::from(&params))?.amplitudes();
            Ok((scattering::probabilities(&closed), Some(max_deviation(&closed, &direct))))
        }),
    };
    match outcome {
        Ok((probs, deviation)) => {
            // Diagnostic points are not physical scattering states; no flux check.
            let leaks = !spec.is_diagnostic() && !(probs.conservation_residual < CONSERVATION_TOLERANCE);
            let disagrees = deviation.is_some_and(|d| !(d < spec.deviation_tolerance));
            point.probabilities = Some(probs);
            point.deviation = deviation;
            point.flagged = leaks || disagrees;
        }
        Err(e) => point.error = Some(PointError::from(&e)),
    }
    point
}

fn max_deviation(a: &PhysicalAmplitudes, b: &PhysicalAmplitudes) -> f64 {
    [
        (a.r_a - b.r_a).norm(),
        (a.t_a - b.t_a).norm(),
        (a.t_b_back - b.t_b_back).norm(),
        (a.t_b_fwd - b.t_b_fwd).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn router(n: usize) -> ModelParams {
        ModelParams::default().with_size(n)
    }

    #[test]
    fn grids() {
        let g = AxisSpec::range(Axis::Energy, -1.0, 1.0, 5).grid().unwrap();
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(AxisSpec::range(Axis::Energy, 0.3, 0.3, 1).grid().unwrap(), vec![0.3]);
        assert!(AxisSpec::range(Axis::Energy, 0.0, 1.0, 1).grid().is_err());
        assert!(AxisSpec::range(Axis::Energy, 1.0, 0.0, 3).grid().is_err());
        assert!(AxisSpec::list(Axis::Sites, vec![2.0, 4.5]).grid().is_err());
        assert!(AxisSpec::list(Axis::Sites, vec![]).grid().is_err());
    }

    #[test]
    fn single_point_grid() {
        let spec = SweepSpec::energy(router(8), AxisSpec::list(Axis::Energy, vec![0.3]));
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.points.len(), 1);
        assert!(res.points[0].probabilities.is_some());
    }

    #[test]
    fn band_edges_and_poles_are_recorded_in_grid() {
        let spec = SweepSpec::energy(router(5), AxisSpec::range(Axis::Energy, -2.0, 2.0, 5));
        let res = run_sweep(&spec).unwrap();
        let errs: Vec<_> = res.points.iter().map(|p| p.error).collect();
        assert_eq!(errs[0], Some(PointError::OutOfBand));
        assert_eq!(errs[2], Some(PointError::Pole));
        assert_eq!(errs[4], Some(PointError::OutOfBand));
        assert!(errs[1].is_none() && errs[3].is_none());
    }

    #[test]
    fn sites_axis_keeps_atom_count_equal() {
        let mut spec = SweepSpec::energy(router(8), AxisSpec::range(Axis::Energy, -1.5, 1.5, 7));
        spec.axis2 = Some(AxisSpec::list(Axis::Sites, vec![2.0, 3.0, 6.0]));
        spec.solver = Solver::Both;
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.points.len(), 21);
        assert_eq!(res.points[1].axis2, Some(3.0));
        for p in res.points.iter().filter(|p| p.error.is_none()) {
            assert!(!p.flagged, "{p:?}");
            assert!(p.deviation.unwrap() < 1e-8);
        }
        assert!(res.max_deviation().unwrap() < 1e-8);
    }

    #[test]
    fn tight_tolerance_flags_points() {
        let mut spec = SweepSpec::energy(router(6), AxisSpec::range(Axis::Energy, -1.5, 1.5, 9));
        spec.solver = Solver::Both;
        spec.deviation_tolerance = 1e-300;
        let res = run_sweep(&spec).unwrap();
        assert!(res.flagged().count() > 0);
    }

    #[test]
    fn sequential_and_parallel_rows_are_identical() {
        let mut spec = SweepSpec::energy(router(8), AxisSpec::range(Axis::Energy, -1.9, 1.9, 101));
        spec.axis2 = Some(AxisSpec::range(Axis::ControlField, 0.0, 0.5, 6));
        spec.base.omega_s_prime = 0.05;
        let a = run_sweep_with(&spec, Execution::Sequential).unwrap();
        let b = run_sweep_with(&spec, Execution::Parallel).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn invalid_combinations_are_rejected() {
        let base = SweepSpec::energy(router(4), AxisSpec::range(Axis::Energy, -1.0, 1.0, 3));
        let pinned_oracle = SweepSpec { fixed_k: Some(1.0), solver: Solver::Oracle, ..base.clone() };
        assert!(run_sweep(&pinned_oracle).is_err());
        let asym = Some(Asymmetry { omega_b: 0.0, xi_b: 1.2, g_b: 1.0 });
        assert!(run_sweep(&SweepSpec { asymmetry: asym, ..base.clone() }).is_err());
        let ok = run_sweep(&SweepSpec { asymmetry: asym, solver: Solver::Oracle, ..base.clone() }).unwrap();
        assert!(ok.points.iter().all(|p| !p.flagged && p.error.is_none()));
        let twice = SweepSpec { axis2: Some(AxisSpec::list(Axis::Energy, vec![0.0])), ..base };
        assert!(run_sweep(&twice).is_err());
    }

    #[test]
    fn mismatched_model_is_a_point_error() {
        let spec = SweepSpec::energy(ModelParams { m_atoms: 5, ..router(8) }, AxisSpec::list(Axis::Energy, vec![0.2]));
        assert_eq!(run_sweep(&spec).unwrap().points[0].error, Some(PointError::InvalidModel));
    }

    #[test]
    fn diagnostic_sweep_extends_past_the_band() {
        let spec = SweepSpec {
            fixed_k: Some(std::f64::consts::FRAC_PI_2),
            ..SweepSpec::energy(router(8), AxisSpec::range(Axis::Energy, 2.2, 3.0, 5))
        };
        let res = run_sweep(&spec).unwrap();
        assert!(res.metadata.diagnostic);
        assert!(res.points.iter().all(|p| p.probabilities.is_some() && !p.flagged));
    }
}
