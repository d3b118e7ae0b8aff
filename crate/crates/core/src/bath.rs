//! Isochoric bath contact: population dynamics under the oscillator rate
//! equation at a frozen frequency.
//!
//! Level `n` decays to `n − 1` at rate `2nΓ` and is excited to `n + 1` at
//! rate `2(n + 1)Γ e^{−ω/T}`, with `Γ = Γ₀(n_BE + 1)`. The top level of the
//! truncated ladder does not excite further, so the generator conserves
//! probability exactly and its fixed point is the truncated Boltzmann
//! distribution.

use crate::error::{positive, Error, Result};
use crate::fock::{geometric_distribution, BathSpec, FockDistribution, OscillatorSpec};

/// Per-step bound on |Σ P_n − 1| before renormalization.
pub const DRIFT_TOLERANCE: f64 = 1e-10;
/// Most negative probability accepted (and clamped) after a step.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// Bose–Einstein occupation 1/(e^{ω/T} − 1).
pub fn bose_einstein(omega: f64, temperature: f64) -> f64 {
    1.0 / (omega / temperature).exp_m1()
}

/// Rates for one bath contact at a fixed oscillator frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    osc: OscillatorSpec,
    bath: BathSpec,
    gamma: f64,
    boltz_factor: f64,
}

impl RateParams {
    pub fn new(osc: OscillatorSpec, bath: BathSpec) -> Self {
        let n_be = bose_einstein(osc.omega(), bath.temperature());
        Self {
            osc,
            bath,
            gamma: bath.gamma0() * (n_be + 1.0),
            boltz_factor: (-osc.omega() / bath.temperature()).exp(),
        }
    }

    pub fn osc(&self) -> OscillatorSpec {
        self.osc
    }

    pub fn bath(&self) -> BathSpec {
        self.bath
    }

    /// Γ = Γ₀(n_BE + 1).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// e^{−ω/T}.
    pub fn boltz_factor(&self) -> f64 {
        self.boltz_factor
    }

    /// Rate of the `n → n − 1` transition.
    pub fn emission_rate(&self, n: usize) -> f64 {
        2.0 * n as f64 * self.gamma
    }

    /// Rate of the `n → n + 1` transition on an untruncated ladder.
    pub fn absorption_rate(&self, n: usize) -> f64 {
        2.0 * (n + 1) as f64 * self.gamma * self.boltz_factor
    }
}

/// dP/dt for the rate equation, written into `out`.
///
/// Computed bond by bond: `flow[n]` is the net downward flux across the
/// `n ↔ n + 1` bond, so every unit of probability leaving one level enters
/// its neighbour.
pub fn rate_derivative_into(probs: &[f64], params: &RateParams, out: &mut [f64]) {
    debug_assert_eq!(probs.len(), out.len());
    out.iter_mut().for_each(|d| *d = 0.0);
    for n in 0..probs.len() - 1 {
        let flow = params.emission_rate(n + 1) * probs[n + 1] - params.absorption_rate(n) * probs[n];
        out[n] += flow;
        out[n + 1] -= flow;
    }
}

pub fn rate_derivative(dist: &FockDistribution, params: &RateParams) -> Vec<f64> {
    let mut out = vec![0.0; dist.probs().len()];
    rate_derivative_into(dist.probs(), params, &mut out);
    out
}

/// Boltzmann populations on `0..=n_max`, the fixed point of [`rate_derivative`].
pub fn stationary_distribution(omega: f64, temperature: f64, n_max: usize) -> FockDistribution {
    geometric_distribution((-omega / temperature).exp(), n_max)
}

/// A point on a stroke: time since the stroke began, the frequency, and the populations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub omega: f64,
    pub dist: FockDistribution,
}

impl TrajectoryPoint {
    pub fn energy(&self) -> f64 {
        self.omega * self.dist.mean_occupation()
    }
}

/// Worst-case bookkeeping over all accepted integration steps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub steps: usize,
    pub max_drift: f64,
    pub min_probability: f64,
}

/// Sampled stroke. Always holds both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectoryPoint>,
    pub sample_stride: usize,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn first(&self) -> &TrajectoryPoint {
        &self.samples[0]
    }

    pub fn last(&self) -> &TrajectoryPoint {
        self.samples.last().expect("trajectory holds both endpoints")
    }

    pub fn final_dist(&self) -> &FockDistribution {
        &self.last().dist
    }

    pub fn into_final_dist(mut self) -> FockDistribution {
        self.samples.pop().expect("trajectory holds both endpoints").dist
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Requested step; the stroke is split into `ceil(duration / dt)` equal steps.
    pub dt: f64,
    /// Keep every `sample_stride`-th step (the final step is always kept).
    pub sample_stride: usize,
    pub tail_tolerance: f64,
}

impl StepControl {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            sample_stride: 1,
            tail_tolerance: crate::fock::DEFAULT_TAIL_TOLERANCE,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride.max(1);
        self
    }

    pub fn with_tail_tolerance(mut self, tolerance: f64) -> Self {
        self.tail_tolerance = tolerance;
        self
    }
}

/// Default step: `min(duration / 1000, 1 / (40 Γ (n_max + 1)))`.
pub fn default_dt(duration: f64, params: &RateParams, n_max: usize) -> f64 {
    (duration / 1000.0).min(1.0 / (40.0 * params.gamma() * (n_max + 1) as f64))
}

/// Integrates the rate equation over `duration` with fixed-step classical RK4.
pub fn evolve_isochoric(
    dist: &FockDistribution,
    params: &RateParams,
    duration: f64,
    control: &StepControl,
) -> Result<Trajectory> {
    positive("duration", duration)?;
    positive("dt", control.dt)?;
    let steps = ((duration / control.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let stride = control.sample_stride.max(1);
    let omega = params.osc().omega();
    let len = dist.probs().len();

    let mut p = dist.probs().to_vec();
    let mut k1 = vec![0.0; len];
    let mut k2 = vec![0.0; len];
    let mut k3 = vec![0.0; len];
    let mut k4 = vec![0.0; len];
    let mut tmp = vec![0.0; len];
    let mut stats = StepStats {
        steps,
        max_drift: 0.0,
        min_probability: p.iter().copied().fold(f64::INFINITY, f64::min),
    };
    let mut samples = Vec::with_capacity(steps / stride + 2);
    samples.push(TrajectoryPoint {
        time: 0.0,
        omega,
        dist: dist.clone(),
    });

    for step in 1..=steps {
        rate_derivative_into(&p, params, &mut k1);
        axpy(&p, 0.5 * h, &k1, &mut tmp);
        rate_derivative_into(&tmp, params, &mut k2);
        axpy(&p, 0.5 * h, &k2, &mut tmp);
        rate_derivative_into(&tmp, params, &mut k3);
        axpy(&p, h, &k3, &mut tmp);
        rate_derivative_into(&tmp, params, &mut k4);
        for i in 0..len {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        let total: f64 = p.iter().sum();
        let drift = (total - 1.0).abs();
        if drift > DRIFT_TOLERANCE {
            return Err(Error::NormalizationDrift { step, drift });
        }
        stats.max_drift = stats.max_drift.max(drift);
        let (level, &lowest) = p
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty ladder");
        if lowest < -NEGATIVITY_TOLERANCE || !lowest.is_finite() {
            return Err(Error::Instability {
                step,
                level,
                value: lowest,
            });
        }
        stats.min_probability = stats.min_probability.min(lowest);
        p.iter_mut().for_each(|x| *x = x.max(0.0));
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);

        if step % stride == 0 || step == steps {
            samples.push(TrajectoryPoint {
                time: if step == steps { duration } else { step as f64 * h },
                omega,
                dist: FockDistribution::from_probs_unchecked(p.clone()),
            });
        }
    }

    samples
        .last()
        .expect("trajectory holds both endpoints")
        .dist
        .check_tail(control.tail_tolerance)?;
    Ok(Trajectory {
        samples,
        sample_stride: stride,
        stats,
    })
}

fn axpy(base: &[f64], scale: f64, dir: &[f64], out: &mut [f64]) {
    for ((o, b), d) in out.iter_mut().zip(base).zip(dir) {
        *o = b + scale * d;
    }
}
