use std::time::Instant;

use garouter_core::analysis::phase::{estimate_period_numeric, PhaseAnalysis};
use garouter_core::analysis::sweep::{run_sweep, Axis, AxisSpec, Solver, SweepResult, SweepSpec};
use garouter_core::exec::Execution;
use garouter_core::oracle::solve_direct;
use garouter_core::scattering::{self, sa_amplitudes_with_guard};
use garouter_core::{AsymmetricParams, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{Format, MapArgs, PeriodArgs, SpectrumArgs, VerifyArgs};
use crate::error::{CliError, Result};
use crate::output::{self, Metadata};

/// Random draws closer than this to a pole are redrawn.
const POLE_EXCLUSION: f64 = 1e-6;

fn flagged_failure(res: &SweepResult) -> Result<()> {
    let flagged = res.flagged().count();
    if flagged == 0 {
        return Ok(());
    }
    Err(CliError::Tolerance(format!(
        "{flagged} grid points exceed the conservation or solver-agreement tolerance (max deviation {:e})",
        res.max_deviation().unwrap_or(f64::NAN)
    )))
}

fn summarize(res: &SweepResult) {
    let best = res
        .points
        .iter()
        .filter_map(|p| p.probabilities.map(|pr| (p, pr.transfer_fwd)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    eprintln!(
        "{} points, {} errors, {} flagged{}",
        res.points.len(),
        res.errors().count(),
        res.flagged().count(),
        if res.metadata.diagnostic { ", diagnostic (pinned k)" } else { "" }
    );
    if let Some((p, t)) = best {
        eprintln!("max T_B_fwd = {t:.6} at {} = {}", res.axis1.name(), p.axis1);
    }
}

pub fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let solver = Solver::from(args.solver);
    let params = args.model.resolve(solver)?;
    let spec = SweepSpec {
        base: params,
        energy: 0.0,
        axis1: AxisSpec::range(Axis::Energy, args.e_min, args.e_max, args.steps),
        axis2: None,
        fixed_k: args.fixed_k,
        solver,
        deviation_tolerance: args.tolerance,
        asymmetry: args.model.asymmetry(),
    };
    let start = Instant::now();
    let res = run_sweep(&spec)?;
    let body = match args.output.format {
        Format::Csv => output::spectrum_csv(&res, solver == Solver::Both),
        Format::Json => output::json(&res),
    };
    write_with_sidecar("spectrum", args, &args.output.out, &body, &res, start)?;
    summarize(&res);
    flagged_failure(&res)
}

pub fn map(args: &MapArgs) -> Result<()> {
    let solver = Solver::from(args.solver);
    let params = args.model.resolve(solver)?;
    let y = match &args.y_list {
        Some(list) => AxisSpec::list(args.y_axis.into(), list.clone()),
        None => AxisSpec::range(args.y_axis.into(), args.y_min, args.y_max, args.y_steps),
    };
    let spec = SweepSpec {
        base: params,
        energy: 0.0,
        axis1: AxisSpec::range(Axis::Energy, args.e_min, args.e_max, args.e_steps),
        axis2: Some(y),
        fixed_k: None,
        solver,
        deviation_tolerance: args.tolerance,
        asymmetry: args.model.asymmetry(),
    };
    let start = Instant::now();
    let res = run_sweep(&spec)?;
    let body = match args.output.format {
        Format::Csv => output::map_csv(&res),
        Format::Json => output::json(&res),
    };
    write_with_sidecar("map", args, &args.output.out, &body, &res, start)?;
    summarize(&res);
    flagged_failure(&res)
}

fn write_with_sidecar<C: Serialize>(
    command: &'static str,
    config: &C,
    out: &Option<std::path::PathBuf>,
    body: &str,
    res: &SweepResult,
    start: Instant,
) -> Result<()> {
    output::emit(out.as_deref(), body)?;
    if let Some(path) = out {
        let meta = Metadata::new(command, config, res, start.elapsed());
        output::emit(Some(&output::sidecar_path(path)), &output::json(&meta))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Draw {
    pub index: usize,
    pub energy: f64,
    pub params: ModelParams,
}

#[derive(Debug, Clone, Serialize)]
pub struct DrawOutcome {
    #[serde(flatten)]
    pub draw: Draw,
    pub deviation: f64,
    pub residual_closed_form: f64,
    pub residual_direct: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a VerifyArgs,
    pub draws: usize,
    pub max_deviation: f64,
    pub worst: Option<DrawOutcome>,
    pub max_residual: f64,
    pub residual_p50: f64,
    pub residual_p99: f64,
    /// Counts of residuals in decades: `< 1e-16`, `[1e-16, 1e-15)`, ..., `>= 1e-10`.
    pub residual_histogram: Vec<usize>,
    pub failures: Vec<DrawOutcome>,
    pub wall_time_seconds: f64,
}

fn random_draws(args: &VerifyArgs) -> Result<Vec<Draw>> {
    if args.draws == 0 {
        return Err(CliError::Config("--draws must be at least 1".into()));
    }
    if args.n_max < 2 {
        return Err(CliError::Config("--n-max must be at least 2".into()));
    }
    for (name, v) in [("--j-max", args.j_max), ("--g-max", args.g_max), ("--rabi-max", args.rabi_max)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("{name} must be a finite non-negative number")));
        }
    }
    let upto = |rng: &mut ChaCha8Rng, max: f64| if max > 0.0 { rng.random_range(0.0..max) } else { 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut draws = Vec::with_capacity(args.draws);
    while draws.len() < args.draws {
        let n = rng.random_range(2..=args.n_max);
        let params = ModelParams {
            omega_e: rng.random_range(-0.5..0.5),
            omega_s_prime: rng.random_range(-0.5..0.5),
            omega_big: upto(&mut rng, args.rabi_max),
            j_coupling: upto(&mut rng, args.j_max),
            g: upto(&mut rng, args.g_max),
            ..ModelParams::default().with_size(n)
        };
        let energy = rng.random_range(-2.0..2.0);
        if params.is_in_band(energy) && sa_amplitudes_with_guard(energy, &params, None, POLE_EXCLUSION).is_ok() {
            draws.push(Draw { index: draws.len(), energy, params });
        }
    }
    Ok(draws)
}

fn check_draw(d: &Draw) -> std::result::Result<DrawOutcome, garouter_core::Error> {
    let closed = scattering::amplitudes(d.energy, &d.params)?;
    let direct = solve_direct(d.energy, &AsymmetricParams::from(&d.params))?;
    let da = direct.amplitudes();
    let deviation = [
        (closed.r_a - da.r_a).norm(),
        (closed.t_a - da.t_a).norm(),
        (closed.t_b_back - da.t_b_back).norm(),
        (closed.t_b_fwd - da.t_b_fwd).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(DrawOutcome {
        draw: d.clone(),
        deviation,
        residual_closed_form: scattering::probabilities(&closed).conservation_residual,
        residual_direct: direct.probabilities().conservation_residual,
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    sorted[((sorted.len() - 1) as f64 * q).round() as usize]
}

pub fn verify(args: &VerifyArgs) -> Result<()> {
    if !(args.tolerance > 0.0 && args.residual_tolerance > 0.0) {
        return Err(CliError::Config("tolerances must be positive".into()));
    }
    let start = Instant::now();
    let draws = random_draws(args)?;
    let outcomes: Vec<DrawOutcome> = Execution::default()
        .map(&draws, |d| {
            check_draw(d).unwrap_or_else(|_| DrawOutcome {
                draw: d.clone(),
                deviation: f64::INFINITY,
                residual_closed_form: f64::INFINITY,
                residual_direct: f64::INFINITY,
            })
        });

    let mut residuals: Vec<f64> = outcomes.iter().map(|o| o.residual_closed_form).collect();
    residuals.sort_by(f64::total_cmp);
    let mut histogram = vec![0usize; 8];
    for r in &residuals {
        let slot = if *r < 1e-16 { 0 } else { ((r.log10() + 17.0).floor() as usize).min(7) };
        histogram[slot] += 1;
    }
    let fails = |o: &&DrawOutcome| {
        !(o.deviation < args.tolerance)
            || !(o.residual_closed_form < args.residual_tolerance)
            || !(o.residual_direct < args.residual_tolerance)
    };
    let worst = outcomes.iter().max_by(|a, b| a.deviation.total_cmp(&b.deviation)).cloned();
    let report = VerifyReport {
        tool: "garouter",
        version: env!("CARGO_PKG_VERSION"),
        config: args,
        draws: outcomes.len(),
        max_deviation: worst.as_ref().map_or(0.0, |w| w.deviation),
        worst,
        max_residual: *residuals.last().unwrap_or(&0.0),
        residual_p50: quantile(&residuals, 0.5),
        residual_p99: quantile(&residuals, 0.99),
        residual_histogram: histogram,
        failures: outcomes.iter().filter(fails).cloned().collect(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };

    println!("draws: {}", report.draws);
    println!("seed: {}", args.seed);
    println!("max_deviation: {:e} (tolerance {:e})", report.max_deviation, args.tolerance);
    println!(
        "conservation_residual: max {:e}, p50 {:e}, p99 {:e} (tolerance {:e})",
        report.max_residual, report.residual_p50, report.residual_p99, args.residual_tolerance
    );
    println!("residual_decades: {:?}", report.residual_histogram);
    println!("failed_draws: {}", report.failures.len());
    if let Some(path) = &args.out {
        output::emit(Some(path), &output::json(&report))?;
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!(
            "{} of {} draws exceed tolerance",
            report.failures.len(),
            report.draws
        )))
    }
}

#[derive(Debug, Serialize)]
pub struct PeriodReport<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a PeriodArgs,
    pub diagnostic: bool,
    #[serde(flatten)]
    pub analysis: PhaseAnalysis,
    /// Estimate on a grid with twice as many points.
    pub tau_estimate_doubled: Option<f64>,
    /// Relative change of the estimate under grid doubling.
    pub grid_change: Option<f64>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |v| format!("{v:.10}"))
}

pub fn period(args: &PeriodArgs) -> Result<()> {
    let params = args.model.resolve(Solver::ClosedForm)?;
    let spec = |steps| SweepSpec {
        fixed_k: Some(args.fixed_k),
        ..SweepSpec::energy(params, AxisSpec::range(Axis::Energy, args.e_min, args.e_max, steps))
    };
    let analysis = estimate_period_numeric(&spec(args.steps))?;
    let doubled = estimate_period_numeric(&spec(2 * args.steps))?;
    let grid_change = analysis
        .tau_estimate
        .zip(doubled.tau_estimate)
        .map(|(a, b)| (a - b).abs() / b);
    let report = PeriodReport {
        tool: "garouter",
        version: env!("CARGO_PKG_VERSION"),
        config: args,
        diagnostic: true,
        tau_estimate_doubled: doubled.tau_estimate,
        grid_change,
        analysis,
    };

    let a = &report.analysis;
    println!("mode: diagnostic (pinned k = {})", a.k_plus);
    println!("N: {}", a.n_sites);
    println!("phi = k(N-1): {:.10}", a.phi);
    println!("phi = kN: {:.10}", a.phi_n);
    println!("delta_e_exact: {}", fmt_opt(a.delta_e_exact));
    println!("delta_e_taylor: {:.10}", a.delta_e_taylor);
    println!("delta_e_leading (4pi/N): {:.10}", a.delta_e_leading);
    println!("4/N: {:.10}", a.four_over_n);
    println!("4N: {:.10}", a.four_n);
    match a.tau_estimate {
        Some(_) => {
            println!("tau_estimate: {}", fmt_opt(a.tau_estimate));
            println!("tau_estimate_doubled_grid: {}", fmt_opt(report.tau_estimate_doubled));
            println!("grid_change: {}", fmt_opt(report.grid_change));
        }
        None => println!("tau_estimate: none (no finite period)"),
    }
    println!("grid: {} points, spacing {:e}, {} interpolated", a.grid_points, a.grid_spacing, a.interpolated_points);
    if let Some(path) = &args.out {
        output::emit(Some(path), &output::json(&report))?;
    }
    Ok(())
}
