//! Self-checks behind `otto-kiln verify`: the stepping integrator against the
//! dense propagator, closed-form thermal-balance thermodynamics, and the
//! invariant audit of a full run.

use std::fmt;

use crate::analysis::{cycle_efficiency, otto_limit, THERMAL_BALANCE_TAU};
use crate::bath::{bose_einstein, evolve_isochoric, rate_derivative, stationary_distribution, RateParams, StepControl};
use crate::config::{EngineConfig, Mode};
use crate::cycle::{run_engine, run_otto_cycle, run_pump_cycle, OttoParams, PumpParams, SimulationOptions};
use crate::error::Result;
use crate::fock::{BathSpec, FockDistribution, InitialStateSpec, OscillatorSpec};
use nalgebra::DVector;

use crate::oracle::{analytic_cycle_thermal_balance, expm, generator_matrix, propagate_matrix_exponential};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn push_result(&mut self, name: &str, outcome: Result<(bool, String)>) {
        match outcome {
            Ok((passed, detail)) => self.push(name, passed, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag}  {:<width$}  {}", c.name, c.detail)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn rate(omega: f64, temperature: f64, gamma0: f64) -> Result<RateParams> {
    Ok(RateParams::new(
        OscillatorSpec::new(omega)?,
        BathSpec::new(temperature, gamma0)?,
    ))
}

/// Deterministic (ω, T, Γ₀, t) grid covering cold and hot baths.
fn oracle_grid() -> Vec<(f64, f64, f64, f64)> {
    let mut grid = Vec::new();
    for &(omega, temperature) in &[(1.0, 0.4), (1.5, 1.2), (2.0, 0.8), (1.2, 2.0)] {
        for &(gamma0, t) in &[(0.5, 1.0), (0.25, 3.0), (1.0, 0.5)] {
            grid.push((omega, temperature, gamma0, t));
        }
    }
    grid
}

fn oracle_start(i: usize, n_max: usize) -> FockDistribution {
    match i % 3 {
        0 => FockDistribution::ground(n_max),
        1 => FockDistribution::fock_state(3, n_max),
        _ => InitialStateSpec::EqualLowest { levels: 4 }
            .distribution(n_max, 1.0)
            .expect("four levels fit"),
    }
}

/// Largest TV distance between RK4 and the dense propagator over the grid.
pub fn oracle_equivalence(n_max: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, (omega, temperature, gamma0, t)) in oracle_grid().into_iter().enumerate() {
        let params = rate(omega, temperature, gamma0)?;
        let start = oracle_start(i, n_max);
        let dt = crate::bath::default_dt(t, &params, n_max);
        let stepped = evolve_isochoric(&start, &params, t, &StepControl::new(dt).with_tail_tolerance(1.0))?;
        let dense = propagate_matrix_exponential(&start, &params, t)?;
        worst = worst.max(stepped.final_dist().total_variation(&dense));
    }
    Ok(worst)
}

/// Number of comparison points along a trajectory in [`rk4_error_ratio`].
pub const CONVERGENCE_WINDOWS: usize = 32;

/// Largest TV error against the dense propagator over
/// [`CONVERGENCE_WINDOWS`] evenly spaced times, for RK4 with
/// `CONVERGENCE_WINDOWS * steps_per_window` steps.
pub fn rk4_max_error(
    start: &FockDistribution,
    params: &RateParams,
    duration: f64,
    steps_per_window: usize,
) -> Result<f64> {
    let window = duration / CONVERGENCE_WINDOWS as f64;
    let propagator = expm(&(generator_matrix(params, start.n_max()) * window));
    let steps = CONVERGENCE_WINDOWS * steps_per_window.max(1);
    let control = StepControl::new(duration / steps as f64)
        .with_stride(steps_per_window.max(1))
        .with_tail_tolerance(1.0);
    let trajectory = evolve_isochoric(start, params, duration, &control)?;
    debug_assert_eq!(trajectory.samples.len(), CONVERGENCE_WINDOWS + 1);
    let mut exact = DVector::from_column_slice(start.probs());
    let mut worst: f64 = 0.0;
    for point in &trajectory.samples[1..] {
        exact = &propagator * exact;
        let tv = 0.5
            * point
                .dist
                .probs()
                .iter()
                .zip(exact.iter())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        worst = worst.max(tv);
    }
    Ok(worst)
}

/// Steps per window keeping h·λ ≤ 1/4 for every generator eigenvalue λ
/// (bounded by 4Γ(n_max + 1)), inside RK4's asymptotic regime.
pub fn convergence_steps_per_window(params: &RateParams, n_max: usize, duration: f64) -> usize {
    let rate_bound = 4.0 * params.gamma() * (n_max + 1) as f64;
    ((duration * rate_bound / 0.25) / CONVERGENCE_WINDOWS as f64)
        .ceil()
        .max(1.0) as usize
}

/// err(dt)/err(dt/2) for the trajectory-wide error of [`rk4_max_error`];
/// close to 16 for a fourth-order method.
pub fn rk4_error_ratio(
    start: &FockDistribution,
    params: &RateParams,
    duration: f64,
    steps_per_window: usize,
) -> Result<f64> {
    Ok(rk4_max_error(start, params, duration, steps_per_window)?
        / rk4_max_error(start, params, duration, 2 * steps_per_window)?)
}

fn detailed_balance() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for &omega in &[0.5, 1.0, 1.5, 3.0] {
        for &temperature in &[0.2, 0.4, 1.2, 2.0] {
            for &gamma0 in &[0.1, 0.5, 2.0] {
                let Ok(params) = rate(omega, temperature, gamma0) else {
                    return (false, "invalid grid parameters".into());
                };
                let pi = stationary_distribution(omega, temperature, 40);
                let d = rate_derivative(&pi, &params);
                worst = worst.max(d.iter().fold(0.0, |m, x| m.max(x.abs())));
            }
        }
    }
    (worst <= 1e-12, format!("max |dP/dt| at Boltzmann = {worst:.3e}"))
}

fn generator_columns() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &(omega, temperature, gamma0) in &[(1.0, 0.4, 0.5), (1.5, 1.2, 0.5), (2.0, 3.0, 1.5)] {
        let g = generator_matrix(&rate(omega, temperature, gamma0)?, 30);
        for (j, col) in g.column_iter().enumerate() {
            // off-diagonal outflow first, then the diagonal that cancels it
            let outflow: f64 = col.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, x)| x).sum();
            worst = worst.max((outflow + col[j]).abs());
        }
    }
    Ok((worst == 0.0, format!("max |column sum| = {worst:.3e}")))
}

fn semigroup() -> Result<(bool, String)> {
    let params = rate(1.5, 1.2, 0.5)?;
    let start = FockDistribution::fock_state(2, 30);
    let ctl = StepControl::new(1e-3).with_tail_tolerance(1.0);
    let whole = evolve_isochoric(&start, &params, 2.0, &ctl)?.into_final_dist();
    let half = evolve_isochoric(&start, &params, 1.0, &ctl)?.into_final_dist();
    let split = evolve_isochoric(&half, &params, 1.0, &ctl)?.into_final_dist();
    let tv = whole.total_variation(&split);
    Ok((tv <= 1e-10, format!("TV(P(2), P(1)∘P(1)) = {tv:.3e}")))
}

fn thermal_balance() -> Result<(bool, String)> {
    let (omega_c, omega_h, t_c, t_h) = (1.0, 1.5, 0.4, 1.2);
    let params = OttoParams {
        omega_c,
        omega_h,
        bath_c: BathSpec::new(t_c, 0.5)?,
        bath_h: BathSpec::new(t_h, 0.5)?,
        tau: THERMAL_BALANCE_TAU,
    };
    let opts = SimulationOptions::default();
    let start = stationary_distribution(omega_c, t_c, opts.n_max);
    let r = run_otto_cycle(&start, &params, &opts)?.record;
    let exact = analytic_cycle_thermal_balance(omega_c, omega_h, t_c, t_h)?;
    let ledger = [
        (r.q_in, exact.q_in),
        (r.w_out, exact.w_out),
        (r.q_out, exact.q_out),
        (r.w_in, exact.w_in),
        (r.w_eff, exact.w_eff),
    ];
    let worst = ledger.iter().fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let eta = cycle_efficiency(&r).unwrap_or(f64::NAN);
    let eta_err = (eta - otto_limit(omega_c, omega_h)).abs();
    Ok((
        worst <= 1e-5 && eta_err <= 1e-6,
        format!("ledger error {worst:.3e}, |η − η_O| = {eta_err:.3e}"),
    ))
}

fn ground_start_converges() -> Result<(bool, String)> {
    let cfg = EngineConfig {
        n_cycles: 12,
        ..EngineConfig::default()
    };
    let trace = run_engine(&cfg)?;
    let last = trace.records.last().and_then(cycle_efficiency).unwrap_or(f64::NAN);
    let err = (last - otto_limit(cfg.omega_c, cfg.omega_h)).abs();
    Ok((err <= 1e-3, format!("η after {} cycles = {last:.9}", cfg.n_cycles)))
}

fn pump_saturation() -> Result<(bool, String)> {
    let params = PumpParams {
        omega_c: 1.0,
        omega_h: 1.5,
        bath_c: BathSpec::new(0.4, 0.5)?,
        target: InitialStateSpec::Excited { level: 1 },
        tau_bc: 2.0,
        tau_cd: 25.0,
        tau_db: 2.0,
    };
    let opts = SimulationOptions::default();
    let r = run_pump_cycle(&FockDistribution::ground(opts.n_max), &params, &opts)?.record;
    let eta = cycle_efficiency(&r).unwrap_or(f64::NAN);
    let expected = (1.0 - bose_einstein(1.0, 0.4)) / 3.0;
    let err = (eta - expected).abs();
    Ok((
        err <= 1e-6,
        format!("η = {eta:.9}, expected (1 − n_c)/3 = {expected:.9}"),
    ))
}

/// Runs every suite. `config` selects the scenario whose full run is audited;
/// verify/sweep modes audit the default Otto scenario.
pub fn run_verification(config: &EngineConfig) -> VerifyReport {
    let mut report = VerifyReport::default();

    let (ok, detail) = detailed_balance();
    report.push("detailed balance", ok, detail);
    report.push_result("generator conserves probability", generator_columns());
    report.push_result(
        "RK4 vs matrix exponential (TV <= 1e-8)",
        oracle_equivalence(20).map(|tv| (tv <= 1e-8, format!("max TV = {tv:.3e}"))),
    );
    report.push_result(
        "RK4 fourth-order convergence",
        rate(1.5, 1.2, 0.5).and_then(|params| {
            let start = FockDistribution::fock_state(3, 20);
            let ratio = rk4_error_ratio(&start, &params, 2.0, convergence_steps_per_window(&params, 20, 2.0))?;
            Ok((
                (12.0..=20.0).contains(&ratio),
                format!("err(dt)/err(dt/2) = {ratio:.3}"),
            ))
        }),
    );
    report.push_result("semigroup property", semigroup());
    report.push_result("thermal-balance cycle vs closed form", thermal_balance());
    report.push_result("ground start converges to η_O", ground_start_converges());
    report.push_result("pump efficiency at saturation", pump_saturation());

    let scenario = match config.mode {
        Mode::Otto | Mode::Pump => config.clone(),
        Mode::Sweep | Mode::Verify => EngineConfig {
            mode: Mode::Otto,
            ..config.clone()
        },
    };
    match run_engine(&scenario) {
        Ok(trace) => {
            let audit = trace.audit();
            for (name, ok, value) in audit.checks() {
                report.push(format!("audit: {name}"), ok, format!("{value:.3e}"));
            }
        }
        Err(e) => report.push("audit: run", false, format!("error: {e}")),
    }
    report
}
