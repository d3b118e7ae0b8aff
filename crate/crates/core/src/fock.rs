//! Truncated Fock-ladder populations and the scalar functionals built on them.
//!
//! The ground level carries zero energy, so level `n` at frequency `ω` has
//! energy `n ω` (ħ = k_B = 1, energies in units of the cold frequency).

use crate::error::{positive, Error, Result};

pub const DEFAULT_N_MAX: usize = 50;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-9;
/// Allowed deviation of Σ P_n from one for a valid distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Populations `P_0..=P_{n_max}` over a truncated oscillator ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDistribution {
    probs: Vec<f64>,
}

impl FockDistribution {
    /// Validates and wraps a probability vector. Index `n` is level `n`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        if let Some((n, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("P_{n} = {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total:.15}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights. Callers guarantee a positive total.
    pub(crate) fn from_weights(mut weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        debug_assert!(total > 0.0);
        weights.iter_mut().for_each(|w| *w /= total);
        Self { probs: weights }
    }

    pub(crate) fn from_probs_unchecked(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn ground(n_max: usize) -> Self {
        Self::fock_state(0, n_max)
    }

    /// Full population on a single level. `level` must not exceed `n_max`.
    pub fn fock_state(level: usize, n_max: usize) -> Self {
        assert!(level <= n_max, "level {level} outside ladder 0..={n_max}");
        let mut probs = vec![0.0; n_max + 1];
        probs[level] = 1.0;
        Self { probs }
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    /// Population of the highest retained level.
    pub fn tail_mass(&self) -> f64 {
        self.probs[self.n_max()]
    }

    pub fn check_tail(&self, tolerance: f64) -> Result<()> {
        let tail_mass = self.tail_mass();
        if tail_mass > tolerance {
            return Err(Error::UnderTruncation {
                n_max: self.n_max(),
                tail_mass,
                tolerance,
            });
        }
        Ok(())
    }

    /// ⟨n⟩ = Σ n P_n.
    pub fn mean_occupation(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// U = Σ n ω P_n.
    pub fn internal_energy(&self, osc: OscillatorSpec) -> f64 {
        osc.omega() * self.mean_occupation()
    }

    /// Population (von Neumann) entropy −Σ P_n ln P_n, in units of k_B.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>()
    }

    /// Half the L1 distance. Ladders of different length are compared with
    /// the shorter one zero-padded.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let len = self.probs.len().max(other.probs.len());
        let at = |v: &[f64], n: usize| v.get(n).copied().unwrap_or(0.0);
        0.5 * (0..len)
            .map(|n| (at(&self.probs, n) - at(&other.probs, n)).abs())
            .sum::<f64>()
    }
}

/// Oscillator at a fixed angular frequency (units of ω_c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSpec {
    omega: f64,
}

impl OscillatorSpec {
    pub fn new(omega: f64) -> Result<Self> {
        Ok(Self {
            omega: positive("omega", omega)?,
        })
    }

    pub fn omega(self) -> f64 {
        self.omega
    }
}

/// Thermal reservoir: temperature `k_B T` and bare relaxation constant Γ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    temperature: f64,
    gamma0: f64,
}

impl BathSpec {
    pub fn new(temperature: f64, gamma0: f64) -> Result<Self> {
        Ok(Self {
            temperature: positive("temperature", temperature)?,
            gamma0: positive("gamma0", gamma0)?,
        })
    }

    /// Builds the bath from the relaxation time (2Γ₀)⁻¹.
    pub fn with_relaxation_time(temperature: f64, relaxation_time: f64) -> Result<Self> {
        let relaxation_time = positive("relaxation_time", relaxation_time)?;
        Self::new(temperature, 0.5 / relaxation_time)
    }

    pub fn temperature(self) -> f64 {
        self.temperature
    }

    pub fn gamma0(self) -> f64 {
        self.gamma0
    }

    pub fn relaxation_time(self) -> f64 {
        0.5 / self.gamma0
    }
}

/// Recipe for a prepared population distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialStateSpec {
    Ground,
    /// Equal weight on the lowest `levels` levels.
    EqualLowest {
        levels: usize,
    },
    /// All population on one level (the pump target `|1⟩` in the single-bath engine).
    Excited {
        level: usize,
    },
    /// P_n ∝ exp(−[(n − center) ω_ref / T_ref]²).
    Gaussian {
        center: usize,
        omega_ref: f64,
        temperature_ref: f64,
    },
    /// Thermal populations P_n ∝ exp(−n ω / T).
    Boltzmann {
        omega: f64,
        temperature: f64,
    },
}

impl InitialStateSpec {
    pub fn validate(&self, n_max: usize) -> Result<()> {
        match *self {
            Self::Ground => Ok(()),
            Self::EqualLowest { levels } => {
                if levels == 0 {
                    return Err(Error::InvalidParameter {
                        name: "levels",
                        reason: "need at least one level".into(),
                    });
                }
                Ok(())
            }
            Self::Excited { level } => {
                if level > n_max {
                    return Err(Error::InvalidParameter {
                        name: "level",
                        reason: format!("level {level} outside ladder 0..={n_max}"),
                    });
                }
                Ok(())
            }
            Self::Gaussian {
                center,
                omega_ref,
                temperature_ref,
            } => {
                if center >= n_max {
                    return Err(Error::InvalidParameter {
                        name: "center",
                        reason: format!("center {center} must be below n_max = {n_max}"),
                    });
                }
                positive("omega_ref", omega_ref)?;
                positive("temperature_ref", temperature_ref)?;
                Ok(())
            }
            Self::Boltzmann { omega, temperature } => {
                positive("omega", omega)?;
                positive("temperature", temperature)?;
                Ok(())
            }
        }
    }

    /// Builds the distribution on `0..=n_max`, rejecting it when the top
    /// level holds more than `tail_tolerance`.
    pub fn distribution(&self, n_max: usize, tail_tolerance: f64) -> Result<FockDistribution> {
        self.validate(n_max)?;
        let len = n_max + 1;
        let dist = match *self {
            Self::Ground => FockDistribution::ground(n_max),
            Self::EqualLowest { levels } => {
                if levels > len {
                    // Mass that would sit above the ladder is exactly the truncation error.
                    return Err(Error::UnderTruncation {
                        n_max,
                        tail_mass: 1.0 / levels as f64,
                        tolerance: tail_tolerance,
                    });
                }
                let weights = (0..len).map(|n| if n < levels { 1.0 } else { 0.0 }).collect();
                FockDistribution::from_weights(weights)
            }
            Self::Excited { level } => FockDistribution::fock_state(level, n_max),
            Self::Gaussian {
                center,
                omega_ref,
                temperature_ref,
            } => {
                let scale = omega_ref / temperature_ref;
                let weights = (0..len)
                    .map(|n| {
                        let x = (n as f64 - center as f64) * scale;
                        (-x * x).exp()
                    })
                    .collect();
                FockDistribution::from_weights(weights)
            }
            Self::Boltzmann { omega, temperature } => geometric_distribution((-omega / temperature).exp(), n_max),
        };
        dist.check_tail(tail_tolerance)?;
        Ok(dist)
    }
}

/// Builds a distribution from `spec` with the default tail tolerance.
pub fn make_distribution(spec: &InitialStateSpec, n_max: usize) -> Result<FockDistribution> {
    spec.distribution(n_max, DEFAULT_TAIL_TOLERANCE)
}

/// Normalized `P_n ∝ ratio^n` on `0..=n_max`, for `0 ≤ ratio < 1`.
pub(crate) fn geometric_distribution(ratio: f64, n_max: usize) -> FockDistribution {
    let mut weight = 1.0;
    let weights = (0..=n_max)
        .map(|_| {
            let w = weight;
            weight *= ratio;
            w
        })
        .collect();
    FockDistribution::from_weights(weights)
}
