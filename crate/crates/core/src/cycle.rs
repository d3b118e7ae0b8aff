//! Otto and pump cycles: stroke composition, the per-cycle first-law ledger
//! and multi-cycle engine runs.
//!
//! Corner labels follow the four-stroke picture. In Otto mode the cycle is
//! `A →(hot isochore) B →(expansion) C →(cold isochore) D →(compression) A′`.
//! In pump mode the hot isochore is replaced by an instantaneous pump, so
//! `A` is the pre-pump state and `B` the pump target.

use crate::bath::{default_dt, evolve_isochoric, RateParams, StepControl, StepStats, Trajectory, TrajectoryPoint};
use crate::config::{EngineConfig, Mode};
use crate::error::{positive, Error, Result};
use crate::fock::{
    BathSpec, FockDistribution, InitialStateSpec, OscillatorSpec, DEFAULT_N_MAX, DEFAULT_TAIL_TOLERANCE,
};

/// Total-variation distance between consecutive A-point distributions below
/// which a run counts as cyclostationary.
pub const CYCLOSTATIONARY_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_ADIABATIC_SAMPLES: usize = 64;
/// Approximate number of retained samples per isochore when no stride is set.
const AUTO_ISOCHORE_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum Stroke {
    /// Bath contact at fixed frequency.
    Isochoric { bath: BathSpec, omega: f64, duration: f64 },
    /// Linear frequency ramp with frozen populations.
    Adiabatic {
        omega_from: f64,
        omega_to: f64,
        duration: f64,
    },
    /// Instantaneous re-preparation of the populations.
    Pump { target: InitialStateSpec, omega: f64 },
}

impl Stroke {
    pub fn duration(&self) -> f64 {
        match self {
            Self::Isochoric { duration, .. } | Self::Adiabatic { duration, .. } => *duration,
            Self::Pump { .. } => 0.0,
        }
    }

    pub fn omega_start(&self) -> f64 {
        match self {
            Self::Isochoric { omega, .. } | Self::Pump { omega, .. } => *omega,
            Self::Adiabatic { omega_from, .. } => *omega_from,
        }
    }

    pub fn omega_end(&self) -> f64 {
        match self {
            Self::Isochoric { omega, .. } | Self::Pump { omega, .. } => *omega,
            Self::Adiabatic { omega_to, .. } => *omega_to,
        }
    }

    pub fn kind(&self) -> StrokeKind {
        match self {
            Self::Isochoric { .. } => StrokeKind::Isochoric,
            Self::Adiabatic { .. } => StrokeKind::Adiabatic,
            Self::Pump { .. } => StrokeKind::Pump,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrokeKind {
    Isochoric,
    Adiabatic,
    Pump,
}

/// One cycle's strokes plus the number of repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeSchedule {
    strokes: Vec<Stroke>,
    labels: Vec<&'static str>,
    cycle_count: usize,
}

impl StrokeSchedule {
    /// Checks durations and that consecutive strokes (cyclically) meet at the
    /// same frequency.
    pub fn new(strokes: Vec<Stroke>, labels: Vec<&'static str>, cycle_count: usize) -> Result<Self> {
        if strokes.is_empty() || strokes.len() != labels.len() {
            return Err(Error::Schedule(
                "need one label per stroke and at least one stroke".into(),
            ));
        }
        for (i, stroke) in strokes.iter().enumerate() {
            match stroke {
                Stroke::Isochoric { omega, duration, .. } => {
                    positive("omega", *omega)?;
                    positive("duration", *duration)?;
                }
                Stroke::Adiabatic {
                    omega_from,
                    omega_to,
                    duration,
                } => {
                    positive("omega_from", *omega_from)?;
                    positive("omega_to", *omega_to)?;
                    positive("duration", *duration)?;
                }
                Stroke::Pump { omega, .. } => {
                    positive("omega", *omega)?;
                }
            }
            let next = &strokes[(i + 1) % strokes.len()];
            if stroke.omega_end() != next.omega_start() {
                return Err(Error::Schedule(format!(
                    "stroke {} ends at ω = {} but stroke {} starts at ω = {}",
                    labels[i],
                    stroke.omega_end(),
                    labels[(i + 1) % strokes.len()],
                    next.omega_start()
                )));
            }
        }
        Ok(Self {
            strokes,
            labels,
            cycle_count,
        })
    }

    pub fn otto(params: &OttoParams, cycle_count: usize) -> Result<Self> {
        let OttoParams {
            omega_c,
            omega_h,
            bath_c,
            bath_h,
            tau,
        } = *params;
        Self::new(
            vec![
                Stroke::Isochoric {
                    bath: bath_h,
                    omega: omega_h,
                    duration: tau,
                },
                Stroke::Adiabatic {
                    omega_from: omega_h,
                    omega_to: omega_c,
                    duration: tau,
                },
                Stroke::Isochoric {
                    bath: bath_c,
                    omega: omega_c,
                    duration: tau,
                },
                Stroke::Adiabatic {
                    omega_from: omega_c,
                    omega_to: omega_h,
                    duration: tau,
                },
            ],
            vec!["AB", "BC", "CD", "DA"],
            cycle_count,
        )
    }

    pub fn pump(params: &PumpParams, cycle_count: usize) -> Result<Self> {
        Self::new(
            vec![
                Stroke::Pump {
                    target: params.target.clone(),
                    omega: params.omega_h,
                },
                Stroke::Adiabatic {
                    omega_from: params.omega_h,
                    omega_to: params.omega_c,
                    duration: params.tau_bc,
                },
                Stroke::Isochoric {
                    bath: params.bath_c,
                    omega: params.omega_c,
                    duration: params.tau_cd,
                },
                Stroke::Adiabatic {
                    omega_from: params.omega_c,
                    omega_to: params.omega_h,
                    duration: params.tau_db,
                },
            ],
            vec!["pump", "BC", "CD", "DB"],
            cycle_count,
        )
    }

    pub fn strokes(&self) -> &[Stroke] {
        &self.strokes
    }

    pub fn labels(&self) -> &[&'static str] {
        &self.labels
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_count
    }

    /// Time for one pass through the strokes.
    pub fn period(&self) -> f64 {
        self.strokes.iter().map(Stroke::duration).sum()
    }
}

/// Two-bath Otto cycle with equal stroke durations `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OttoParams {
    pub omega_c: f64,
    pub omega_h: f64,
    pub bath_c: BathSpec,
    pub bath_h: BathSpec,
    pub tau: f64,
}

/// Single-bath engine driven by a pump at the start of each cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpParams {
    pub omega_c: f64,
    pub omega_h: f64,
    pub bath_c: BathSpec,
    pub target: InitialStateSpec,
    pub tau_bc: f64,
    pub tau_cd: f64,
    pub tau_db: f64,
}

/// Numerical settings shared by every stroke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub n_max: usize,
    /// Fixed RK4 step. `None` picks [`default_dt`] per isochore.
    pub dt: Option<f64>,
    pub tail_tolerance: f64,
    /// Isochore sampling stride. `None` keeps roughly 64 samples per stroke.
    pub sample_stride: Option<usize>,
    pub adiabatic_samples: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            dt: None,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            sample_stride: None,
            adiabatic_samples: DEFAULT_ADIABATIC_SAMPLES,
        }
    }
}

/// First-law bookkeeping for a single stroke, using the đQ = Σ E_n dP_n,
/// đW = Σ P_n dE_n split. `work` is work done on the oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeLedger {
    pub label: &'static str,
    pub kind: StrokeKind,
    pub heat: f64,
    pub work: f64,
    /// U(end) − U(start), evaluated independently of `heat` and `work`.
    pub energy_change: f64,
    pub entropy_start: f64,
    pub entropy_end: f64,
    pub stats: StepStats,
}

impl StrokeLedger {
    pub fn first_law_residual(&self) -> f64 {
        self.energy_change - self.heat - self.work
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeOutcome {
    pub ledger: StrokeLedger,
    pub trajectory: Trajectory,
}

/// Frozen-population frequency ramp. Returns the sampled ramp and the work
/// done on the oscillator, `Σ n (ω_to − ω_from) P_n` (positive for compression).
pub fn run_adiabatic(
    dist: &FockDistribution,
    omega_from: f64,
    omega_to: f64,
    duration: f64,
    samples: usize,
) -> Result<(Trajectory, f64)> {
    positive("omega_from", omega_from)?;
    positive("omega_to", omega_to)?;
    positive("duration", duration)?;
    let points = samples.max(2);
    let last = (points - 1) as f64;
    let samples = (0..points)
        .map(|i| {
            let s = i as f64 / last;
            TrajectoryPoint {
                time: if i + 1 == points { duration } else { s * duration },
                omega: if i + 1 == points {
                    omega_to
                } else {
                    omega_from + s * (omega_to - omega_from)
                },
                dist: dist.clone(),
            }
        })
        .collect();
    let work = (omega_to - omega_from) * dist.mean_occupation();
    Ok((
        Trajectory {
            samples,
            sample_stride: 1,
            stats: StepStats {
                steps: 0,
                max_drift: 0.0,
                min_probability: 0.0,
            },
        },
        work,
    ))
}

/// Replaces the populations with `target` at frequency `omega`. Returns the
/// new distribution and the injected energy `U(after) − U(before)`.
pub fn pump(
    dist: &FockDistribution,
    target: &InitialStateSpec,
    omega: f64,
    tail_tolerance: f64,
) -> Result<(FockDistribution, f64)> {
    let osc = OscillatorSpec::new(omega)?;
    let after = target.distribution(dist.n_max(), tail_tolerance)?;
    let q_pump = after.internal_energy(osc) - dist.internal_energy(osc);
    Ok((after, q_pump))
}

fn execute_stroke(
    dist: &FockDistribution,
    stroke: &Stroke,
    label: &'static str,
    opts: &SimulationOptions,
) -> Result<StrokeOutcome> {
    let (trajectory, heat, work) = match stroke {
        Stroke::Isochoric { bath, omega, duration } => {
            let params = RateParams::new(OscillatorSpec::new(*omega)?, *bath);
            let dt = opts.dt.unwrap_or_else(|| default_dt(*duration, &params, dist.n_max()));
            let stride = opts.sample_stride.unwrap_or_else(|| {
                let steps = (duration / dt).ceil() as usize;
                steps.div_ceil(AUTO_ISOCHORE_SAMPLES).max(1)
            });
            let control = StepControl::new(dt)
                .with_stride(stride)
                .with_tail_tolerance(opts.tail_tolerance);
            let trajectory = evolve_isochoric(dist, &params, *duration, &control)?;
            let dn = trajectory.final_dist().mean_occupation() - dist.mean_occupation();
            (trajectory, omega * dn, 0.0)
        }
        Stroke::Adiabatic {
            omega_from,
            omega_to,
            duration,
        } => {
            let (trajectory, work) = run_adiabatic(dist, *omega_from, *omega_to, *duration, opts.adiabatic_samples)?;
            (trajectory, 0.0, work)
        }
        Stroke::Pump { target, omega } => {
            let (after, q_pump) = pump(dist, target, *omega, opts.tail_tolerance)?;
            let trajectory = Trajectory {
                samples: vec![TrajectoryPoint {
                    time: 0.0,
                    omega: *omega,
                    dist: after,
                }],
                sample_stride: 1,
                stats: StepStats::default(),
            };
            (trajectory, q_pump, 0.0)
        }
    };
    let end = trajectory.final_dist();
    let energy_change = stroke.omega_end() * end.mean_occupation() - stroke.omega_start() * dist.mean_occupation();
    Ok(StrokeOutcome {
        ledger: StrokeLedger {
            label,
            kind: stroke.kind(),
            heat,
            work,
            energy_change,
            entropy_start: dist.entropy(),
            entropy_end: end.entropy(),
            stats: trajectory.stats,
        },
        trajectory,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleKind {
    Otto,
    Pump,
}

/// Per-cycle thermodynamic ledger. All quantities follow the usual Otto sign
/// conventions: each is positive in normal engine operation.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    /// 1-based.
    pub cycle_index: usize,
    pub kind: CycleKind,
    pub omega_c: f64,
    pub omega_h: f64,
    /// Duration of the cycle.
    pub period: f64,
    /// Time at which the cycle begins.
    pub start_time: f64,
    /// ω_h Σ n (P^B − P^A); zero in pump mode.
    pub q_in: f64,
    /// Σ n (ω_h P^B − ω_c P^C).
    pub w_out: f64,
    /// ω_c Σ n (P^C − P^D).
    pub q_out: f64,
    /// Σ n (ω_h P^{A′} − ω_c P^D).
    pub w_in: f64,
    pub w_eff: f64,
    /// ω_h Σ n (P^B − P^A) in pump mode: energy actually injected by the pump.
    pub q_pump: f64,
    /// Cost of preparing the pump target from the ground state, ω_h ⟨n⟩_target.
    pub pump_energy: f64,
    pub a: FockDistribution,
    pub b: FockDistribution,
    pub c: FockDistribution,
    pub d: FockDistribution,
    pub a_prime: FockDistribution,
    pub strokes: Vec<StrokeLedger>,
}

impl CycleRecord {
    #[allow(clippy::too_many_arguments)]
    fn from_corners(
        cycle_index: usize,
        kind: CycleKind,
        omega_c: f64,
        omega_h: f64,
        period: f64,
        start_time: f64,
        corners: [FockDistribution; 5],
        pump_energy: f64,
        strokes: Vec<StrokeLedger>,
    ) -> Self {
        let [a, b, c, d, a_prime] = corners;
        let n = |x: &FockDistribution| x.mean_occupation();
        let hot_intake = omega_h * (n(&b) - n(&a));
        let w_out = omega_h * n(&b) - omega_c * n(&c);
        let q_out = omega_c * (n(&c) - n(&d));
        let w_in = omega_h * n(&a_prime) - omega_c * n(&d);
        let (q_in, q_pump) = match kind {
            CycleKind::Otto => (hot_intake, 0.0),
            CycleKind::Pump => (0.0, hot_intake),
        };
        Self {
            cycle_index,
            kind,
            omega_c,
            omega_h,
            period,
            start_time,
            q_in,
            w_out,
            q_out,
            w_in,
            w_eff: w_out - w_in,
            q_pump,
            pump_energy,
            a,
            b,
            c,
            d,
            a_prime,
            strokes,
        }
    }

    /// (Q_in + Q_pump − Q_out − W_eff) − (U(A′) − U(A)), both energies at ω_h.
    pub fn first_law_residual(&self) -> f64 {
        let du = self.omega_h * (self.a_prime.mean_occupation() - self.a.mean_occupation());
        (self.q_in + self.q_pump - self.q_out - self.w_eff) - du
    }

    /// Denominator of the cycle efficiency: hot-bath heat in Otto mode, the
    /// pump preparation cost in pump mode.
    pub fn energy_input(&self) -> f64 {
        match self.kind {
            CycleKind::Otto => self.q_in,
            CycleKind::Pump => self.pump_energy,
        }
    }

    /// Total-variation distance between the start and end of the cycle.
    pub fn cyclostationarity(&self) -> f64 {
        self.a.total_variation(&self.a_prime)
    }
}

/// A cycle's ledger, the distribution it hands to the next cycle, and the
/// stroke trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleOutcome {
    pub record: CycleRecord,
    pub end: FockDistribution,
    pub strokes: Vec<StrokeOutcome>,
}

fn run_schedule_cycle(
    start: &FockDistribution,
    schedule: &StrokeSchedule,
    kind: CycleKind,
    cycle_index: usize,
    start_time: f64,
    opts: &SimulationOptions,
) -> Result<CycleOutcome> {
    let mut corners = Vec::with_capacity(5);
    corners.push(start.clone());
    let mut strokes = Vec::with_capacity(4);
    let mut current = start.clone();
    for (stroke, label) in schedule.strokes().iter().zip(schedule.labels()) {
        let outcome = execute_stroke(&current, stroke, label, opts)?;
        current = outcome.trajectory.final_dist().clone();
        corners.push(current.clone());
        strokes.push(outcome);
    }
    let corners: [FockDistribution; 5] = corners
        .try_into()
        .map_err(|_| Error::Schedule("a cycle needs exactly four strokes".into()))?;
    let (omega_h, omega_c) = (schedule.strokes()[0].omega_start(), schedule.strokes()[2].omega_start());
    let pump_energy = match &schedule.strokes()[0] {
        Stroke::Pump { target, omega } => {
            omega
                * target
                    .distribution(start.n_max(), opts.tail_tolerance)?
                    .mean_occupation()
        }
        _ => 0.0,
    };
    let record = CycleRecord::from_corners(
        cycle_index,
        kind,
        omega_c,
        omega_h,
        schedule.period(),
        start_time,
        corners,
        pump_energy,
        strokes.iter().map(|s| s.ledger.clone()).collect(),
    );
    Ok(CycleOutcome {
        record,
        end: current,
        strokes,
    })
}

/// One Otto cycle starting at point A (frequency ω_h, hot contact begins).
pub fn run_otto_cycle(
    dist_at_a: &FockDistribution,
    params: &OttoParams,
    opts: &SimulationOptions,
) -> Result<CycleOutcome> {
    let schedule = StrokeSchedule::otto(params, 1)?;
    run_schedule_cycle(dist_at_a, &schedule, CycleKind::Otto, 1, 0.0, opts)
}

/// One pump cycle: pump at ω_h, expansion, cold contact, compression.
pub fn run_pump_cycle(dist: &FockDistribution, params: &PumpParams, opts: &SimulationOptions) -> Result<CycleOutcome> {
    let schedule = StrokeSchedule::pump(params, 1)?;
    run_schedule_cycle(dist, &schedule, CycleKind::Pump, 1, 0.0, opts)
}

/// One row of the engine's time series.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub time: f64,
    pub omega: f64,
    pub energy: f64,
    pub entropy: f64,
    pub label: &'static str,
    pub cycle: usize,
    pub dist: FockDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineTrace {
    pub kind: CycleKind,
    pub samples: Vec<TraceSample>,
    pub records: Vec<CycleRecord>,
    /// Per cycle, TV distance between its A and A′ distributions.
    pub cyclostationarity: Vec<f64>,
    /// Final cyclostationarity below [`CYCLOSTATIONARY_TOLERANCE`].
    pub converged: bool,
}

impl EngineTrace {
    fn push_stroke(&mut self, trajectory: &Trajectory, label: &'static str, cycle: usize, offset: f64) {
        for point in &trajectory.samples {
            let sample = TraceSample {
                time: offset + point.time,
                omega: point.omega,
                energy: point.energy(),
                entropy: point.dist.entropy(),
                label,
                cycle,
                dist: point.dist.clone(),
            };
            match self.samples.last_mut() {
                // stroke joints (and the instantaneous pump) share a time stamp
                Some(last) if sample.time <= last.time => *last = sample,
                _ => self.samples.push(sample),
            }
        }
    }

    pub fn audit(&self) -> AuditReport {
        let mut report = AuditReport {
            times_increasing: self.samples.windows(2).all(|w| w[0].time < w[1].time),
            ..AuditReport::default()
        };
        for s in &self.samples {
            let total: f64 = s.dist.probs().iter().sum();
            report.max_normalization_error = report.max_normalization_error.max((total - 1.0).abs());
            let u = s.omega * s.dist.mean_occupation();
            report.max_energy_inconsistency = report.max_energy_inconsistency.max((u - s.energy).abs());
            report.max_tail_mass = report.max_tail_mass.max(s.dist.tail_mass());
        }
        for r in &self.records {
            report.max_cycle_first_law = report.max_cycle_first_law.max(r.first_law_residual().abs());
            for s in &r.strokes {
                report.max_stroke_first_law = report.max_stroke_first_law.max(s.first_law_residual().abs());
                report.max_drift = report.max_drift.max(s.stats.max_drift);
                report.min_probability = report.min_probability.min(s.stats.min_probability);
                match s.kind {
                    StrokeKind::Adiabatic => {
                        report.max_adiabatic_entropy_change = report
                            .max_adiabatic_entropy_change
                            .max((s.entropy_end - s.entropy_start).abs());
                        report.max_adiabatic_heat = report.max_adiabatic_heat.max(s.heat.abs());
                    }
                    StrokeKind::Isochoric => {
                        report.max_isochoric_work = report.max_isochoric_work.max(s.work.abs());
                    }
                    StrokeKind::Pump => {}
                }
            }
        }
        report
    }
}

/// Worst-case invariant residuals over a whole run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub times_increasing: bool,
    pub max_normalization_error: f64,
    pub max_energy_inconsistency: f64,
    pub max_tail_mass: f64,
    pub max_drift: f64,
    pub min_probability: f64,
    pub max_stroke_first_law: f64,
    pub max_cycle_first_law: f64,
    pub max_adiabatic_entropy_change: f64,
    pub max_adiabatic_heat: f64,
    pub max_isochoric_work: f64,
}

impl Default for AuditReport {
    fn default() -> Self {
        Self {
            times_increasing: true,
            max_normalization_error: 0.0,
            max_energy_inconsistency: 0.0,
            max_tail_mass: 0.0,
            max_drift: 0.0,
            min_probability: 0.0,
            max_stroke_first_law: 0.0,
            max_cycle_first_law: 0.0,
            max_adiabatic_entropy_change: 0.0,
            max_adiabatic_heat: 0.0,
            max_isochoric_work: 0.0,
        }
    }
}

impl AuditReport {
    /// Named pass/fail checks at the documented tolerances.
    pub fn checks(&self) -> Vec<(&'static str, bool, f64)> {
        vec![
            ("time strictly increasing", self.times_increasing, 0.0),
            (
                "sample normalization <= 1e-9",
                self.max_normalization_error <= 1e-9,
                self.max_normalization_error,
            ),
            (
                "sample energy consistency <= 1e-12",
                self.max_energy_inconsistency <= 1e-12,
                self.max_energy_inconsistency,
            ),
            (
                "probability drift per step <= 1e-10",
                self.max_drift <= 1e-10,
                self.max_drift,
            ),
            (
                "positivity >= -1e-12",
                self.min_probability >= -1e-12,
                self.min_probability,
            ),
            (
                "stroke first law <= 1e-9",
                self.max_stroke_first_law <= 1e-9,
                self.max_stroke_first_law,
            ),
            (
                "cycle first law <= 1e-9",
                self.max_cycle_first_law <= 1e-9,
                self.max_cycle_first_law,
            ),
            (
                "adiabatic entropy constant",
                self.max_adiabatic_entropy_change == 0.0,
                self.max_adiabatic_entropy_change,
            ),
            (
                "adiabatic heat == 0",
                self.max_adiabatic_heat == 0.0,
                self.max_adiabatic_heat,
            ),
            (
                "isochoric work == 0",
                self.max_isochoric_work == 0.0,
                self.max_isochoric_work,
            ),
        ]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.1)
    }
}

/// Runs `config.n_cycles` cycles in the configured mode, threading each
/// cycle's A′ into the next cycle's A.
pub fn run_engine(config: &EngineConfig) -> Result<EngineTrace> {
    let opts = config.simulation;
    let n_max = opts.n_max;
    let (schedule, kind) = match config.mode {
        Mode::Otto => (
            StrokeSchedule::otto(&config.otto_params()?, config.n_cycles)?,
            CycleKind::Otto,
        ),
        Mode::Pump => (
            StrokeSchedule::pump(&config.pump_params()?, config.n_cycles)?,
            CycleKind::Pump,
        ),
        other => {
            return Err(Error::InvalidParameter {
                name: "mode",
                reason: format!("{other:?} does not describe a single engine run"),
            })
        }
    };
    let mut trace = EngineTrace {
        kind,
        samples: Vec::new(),
        records: Vec::with_capacity(schedule.cycle_count()),
        cyclostationarity: Vec::with_capacity(schedule.cycle_count()),
        converged: false,
    };
    if schedule.cycle_count() == 0 {
        return Ok(trace);
    }

    let mut current = config.initial_state.distribution(n_max, opts.tail_tolerance)?;
    let mut offset = 0.0;
    for cycle in 1..=schedule.cycle_count() {
        let outcome = run_schedule_cycle(&current, &schedule, kind, cycle, offset, &opts)?;
        for (stroke, label) in outcome.strokes.iter().zip(schedule.labels()) {
            trace.push_stroke(&stroke.trajectory, label, cycle, offset);
            offset += stroke.trajectory.last().time;
        }
        trace.cyclostationarity.push(outcome.record.cyclostationarity());
        trace.records.push(outcome.record);
        current = outcome.end;
    }
    trace.converged = trace
        .cyclostationarity
        .last()
        .is_some_and(|tv| *tv < CYCLOSTATIONARY_TOLERANCE);
    Ok(trace)
}
