//! Efficiency, power, the Otto and Carnot limits, and the efficiency–power
//! sweep over hot-bath temperature and frequency ratio.

use rayon::prelude::*;

use crate::cycle::{run_otto_cycle, CycleKind, CycleRecord, OttoParams, SimulationOptions, CYCLOSTATIONARY_TOLERANCE};
use crate::error::{positive, Error, Result};
use crate::fock::{BathSpec, FockDistribution};

/// Stroke length used for thermal-balance sweeps: e^{−2Γ₀τ} ≈ 2e-9 at Γ₀ = 1/2.
pub const THERMAL_BALANCE_TAU: f64 = 20.0;
/// |denominator| at or below this makes the efficiency undefined.
pub const UNDEFINED_EFFICIENCY_THRESHOLD: f64 = 1e-12;

/// W_eff / Q_in in Otto mode and W_eff / (pump cost) in pump mode.
///
/// Transient cycles may legitimately give negative values or values above
/// the Otto limit. `None` when the denominator vanishes.
pub fn cycle_efficiency(record: &CycleRecord) -> Option<f64> {
    let input = record.energy_input();
    (input.abs() > UNDEFINED_EFFICIENCY_THRESHOLD).then(|| record.w_eff / input)
}

/// W_eff per unit time.
pub fn cycle_power(record: &CycleRecord, total_cycle_time: f64) -> f64 {
    record.w_eff / total_cycle_time
}

/// η_O = 1 − ω_c/ω_h.
pub fn otto_limit(omega_c: f64, omega_h: f64) -> f64 {
    1.0 - omega_c / omega_h
}

/// η_C = 1 − T_c/T_h.
pub fn carnot_limit(t_c: f64, t_h: f64) -> f64 {
    1.0 - t_c / t_h
}

/// Frequency ratios ω_c/ω_h visited for each hot temperature.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioGrid {
    /// `steps` evenly spaced ratios from `T_c/T_h + offset` to `max`, inclusive.
    Uniform {
        offset: f64,
        max: f64,
        steps: usize,
    },
    Explicit(Vec<f64>),
}

impl Default for RatioGrid {
    fn default() -> Self {
        Self::Uniform {
            offset: 0.01,
            max: 0.99,
            steps: 99,
        }
    }
}

impl RatioGrid {
    pub fn ratios(&self, t_c: f64, t_h: f64) -> Vec<f64> {
        match self {
            Self::Explicit(r) => r.clone(),
            Self::Uniform { offset, max, steps } => {
                let lo = t_c / t_h + offset;
                let n = (*steps).max(2);
                (0..n).map(|i| lo + (max - lo) * i as f64 / (n - 1) as f64).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub t_c: f64,
    pub t_h_list: Vec<f64>,
    pub ratios: RatioGrid,
    /// Fixed cold frequency; ω_h = ω_c / ratio.
    pub omega_c: f64,
    pub gamma0: f64,
    pub tau: f64,
    /// Cycles run from the ground state before the last one is recorded.
    pub n_cycles: usize,
    pub simulation: SimulationOptions,
    /// Worker cap; `None` uses rayon's default pool.
    pub threads: Option<usize>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            t_c: 0.4,
            t_h_list: vec![0.8, 1.2, 1.6, 2.0],
            ratios: RatioGrid::default(),
            omega_c: 1.0,
            gamma0: 0.5,
            tau: THERMAL_BALANCE_TAU,
            n_cycles: 2,
            simulation: SimulationOptions::default(),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub t_h: f64,
    /// ω_c/ω_h.
    pub ratio: f64,
    /// Efficiency of the final cycle. At a converged point whose heat intake
    /// vanishes (the Carnot ratio) this is the cyclostationary limit η_O and
    /// `degenerate` is set. `None` only for a non-converged degenerate point.
    pub efficiency: Option<f64>,
    pub power: f64,
    pub q_in: f64,
    pub w_eff: f64,
    pub converged: bool,
    pub degenerate: bool,
}

/// Runs `settings.n_cycles` Otto cycles from the ground state at one
/// `(T_h, ratio)` and summarizes the last.
pub fn sweep_point(settings: &SweepSettings, t_h: f64, ratio: f64) -> Result<SweepPoint> {
    positive("ratio", ratio)?;
    if ratio > 1.0 {
        return Err(Error::InvalidParameter {
            name: "ratio",
            reason: format!("ω_c/ω_h = {ratio} exceeds 1"),
        });
    }
    if settings.n_cycles == 0 {
        return Err(Error::InvalidParameter {
            name: "n_cycles",
            reason: "a sweep point needs at least one cycle".into(),
        });
    }
    let omega_c = settings.omega_c;
    let omega_h = omega_c / ratio;
    let params = OttoParams {
        omega_c,
        omega_h,
        bath_c: BathSpec::new(settings.t_c, settings.gamma0)?,
        bath_h: BathSpec::new(t_h, settings.gamma0)?,
        tau: settings.tau,
    };
    let opts = SimulationOptions {
        sample_stride: Some(usize::MAX),
        adiabatic_samples: 2,
        ..settings.simulation
    };
    let mut dist = FockDistribution::ground(opts.n_max);
    let mut last = None;
    for _ in 0..settings.n_cycles {
        let outcome = run_otto_cycle(&dist, &params, &opts)?;
        dist = outcome.end;
        last = Some(outcome.record);
    }
    let record = last.expect("at least one cycle");
    debug_assert_eq!(record.kind, CycleKind::Otto);
    let converged = record.cyclostationarity() < CYCLOSTATIONARY_TOLERANCE;
    let (efficiency, degenerate) = match cycle_efficiency(&record) {
        Some(eta) => (Some(eta), false),
        None if converged => (Some(otto_limit(omega_c, omega_h)), true),
        None => (None, true),
    };
    Ok(SweepPoint {
        t_h,
        ratio,
        efficiency,
        power: cycle_power(&record, 4.0 * settings.tau),
        q_in: record.q_in,
        w_eff: record.w_eff,
        converged,
        degenerate,
    })
}

/// Evaluates every `(T_h, ratio)` pair, in parallel, returning points ordered
/// by `t_h_list` and then by ratio grid order.
pub fn sweep_efficiency_power(settings: &SweepSettings) -> Result<Vec<SweepPoint>> {
    let jobs: Vec<(f64, f64)> = settings
        .t_h_list
        .iter()
        .flat_map(|&t_h| {
            settings
                .ratios
                .ratios(settings.t_c, t_h)
                .into_iter()
                .map(move |r| (t_h, r))
        })
        .collect();
    let run = || {
        jobs.par_iter()
            .map(|&(t_h, ratio)| sweep_point(settings, t_h, ratio))
            .collect::<Result<Vec<_>>>()
    };
    match settings.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter {
                name: "threads",
                reason: e.to_string(),
            })?
            .install(run),
        None => run(),
    }
}
