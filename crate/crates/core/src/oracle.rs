//! Independent reference results: closed-form thermal-balance thermodynamics
//! and a dense matrix-exponential propagator for the bath generator.
//!
//! Nothing here calls the stepping integrator; the two paths are compared in
//! tests and by `otto-kiln verify`.

use nalgebra::{DMatrix, DVector};

use crate::bath::RateParams;
use crate::error::{positive, Error, Result};
use crate::fock::FockDistribution;

/// Largest ladder the dense propagator accepts (matrix side `n_max + 1`).
pub const DENSE_LIMIT: usize = 64;

fn occupation(omega: f64, temperature: f64) -> f64 {
    1.0 / (omega / temperature).exp_m1()
}

/// U = ω/(e^{ω/T} − 1) on the untruncated ladder.
pub fn analytic_equilibrium_energy(omega: f64, temperature: f64) -> f64 {
    omega * occupation(omega, temperature)
}

/// S = −ln(1 − q) − q ln q/(1 − q), q = e^{−ω/T}, on the untruncated ladder.
pub fn analytic_equilibrium_entropy(omega: f64, temperature: f64) -> f64 {
    let x = omega / temperature;
    let q = (-x).exp();
    if q == 0.0 {
        return 0.0;
    }
    -(-q).ln_1p() + q * x / (1.0 - q)
}

/// Energy and entropy at one corner of the cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePoint {
    pub energy: f64,
    pub entropy: f64,
}

/// Cycle ledger when every isochore runs to equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticCycleLedger {
    pub omega_c: f64,
    pub omega_h: f64,
    /// ⟨n⟩ after hot contact.
    pub n_hot: f64,
    /// ⟨n⟩ after cold contact.
    pub n_cold: f64,
    pub q_in: f64,
    pub w_out: f64,
    pub q_out: f64,
    pub w_in: f64,
    pub w_eff: f64,
    pub efficiency: f64,
    /// Set when ⟨n⟩_h < ⟨n⟩_c: the cycle pumps heat instead of producing work.
    pub refrigerator: bool,
    pub a: StatePoint,
    pub b: StatePoint,
    pub c: StatePoint,
    pub d: StatePoint,
}

pub fn analytic_cycle_thermal_balance(omega_c: f64, omega_h: f64, t_c: f64, t_h: f64) -> Result<AnalyticCycleLedger> {
    for (name, v) in [("omega_c", omega_c), ("omega_h", omega_h), ("t_c", t_c), ("t_h", t_h)] {
        positive(name, v)?;
    }
    if omega_c > omega_h {
        return Err(Error::InvalidParameter {
            name: "omega_c",
            reason: format!("cold frequency {omega_c} exceeds hot frequency {omega_h}"),
        });
    }
    if t_c > t_h {
        return Err(Error::InvalidParameter {
            name: "t_c",
            reason: format!("cold temperature {t_c} exceeds hot temperature {t_h}"),
        });
    }
    let n_hot = occupation(omega_h, t_h);
    let n_cold = occupation(omega_c, t_c);
    let s_hot = analytic_equilibrium_entropy(omega_h, t_h);
    let s_cold = analytic_equilibrium_entropy(omega_c, t_c);
    let w_out = (omega_h - omega_c) * n_hot;
    let w_in = (omega_h - omega_c) * n_cold;
    Ok(AnalyticCycleLedger {
        omega_c,
        omega_h,
        n_hot,
        n_cold,
        q_in: omega_h * (n_hot - n_cold),
        w_out,
        q_out: omega_c * (n_hot - n_cold),
        w_in,
        w_eff: w_out - w_in,
        efficiency: 1.0 - omega_c / omega_h,
        refrigerator: n_hot < n_cold,
        a: StatePoint {
            energy: omega_h * n_cold,
            entropy: s_cold,
        },
        b: StatePoint {
            energy: omega_h * n_hot,
            entropy: s_hot,
        },
        c: StatePoint {
            energy: omega_c * n_hot,
            entropy: s_hot,
        },
        d: StatePoint {
            energy: omega_c * n_cold,
            entropy: s_cold,
        },
    })
}

/// Dense generator `G` with `dP/dt = G P`, using the same reflecting top
/// level as the stepping integrator.
pub fn generator_matrix(params: &RateParams, n_max: usize) -> DMatrix<f64> {
    let size = n_max + 1;
    let gamma = params.gamma();
    let q = params.boltz_factor();
    let mut g = DMatrix::zeros(size, size);
    for n in 0..size {
        let down = 2.0 * n as f64 * gamma;
        let up = if n < n_max {
            2.0 * (n + 1) as f64 * gamma * q
        } else {
            0.0
        };
        if n > 0 {
            g[(n - 1, n)] = down;
        }
        if n < n_max {
            g[(n + 1, n)] = up;
        }
        g[(n, n)] = -(down + up);
    }
    g
}

/// e^{A} by scaling and squaring around a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square());
    let size = a.nrows();
    let norm = (0..size)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    // ‖A / 2^s‖₁ ≤ 1/2
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings);

    let mut result = DMatrix::identity(size, size);
    let mut term = DMatrix::identity(size, size);
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        result += &term;
        if term.abs().max() < 1e-18 * result.abs().max() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Propagates populations through a bath contact of length `duration` via
/// the exponential of the dense generator.
pub fn propagate_matrix_exponential(
    dist: &FockDistribution,
    params: &RateParams,
    duration: f64,
) -> Result<FockDistribution> {
    let n_max = dist.n_max();
    if n_max > DENSE_LIMIT {
        return Err(Error::TooLargeForDense {
            n_max,
            limit: DENSE_LIMIT,
        });
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "duration",
            reason: format!("must be finite and >= 0, got {duration}"),
        });
    }
    if duration == 0.0 {
        return Ok(dist.clone());
    }
    let propagator = expm(&(generator_matrix(params, n_max) * duration));
    let out = propagator * DVector::from_column_slice(dist.probs());
    let mut probs: Vec<f64> = out.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    FockDistribution::from_probs(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{BathSpec, OscillatorSpec};
    use approx::assert_abs_diff_eq;

    fn params(omega: f64, temperature: f64, gamma0: f64) -> RateParams {
        RateParams::new(
            OscillatorSpec::new(omega).unwrap(),
            BathSpec::new(temperature, gamma0).unwrap(),
        )
    }

    #[test]
    fn closed_forms_match_direct_summation() {
        for (omega, t) in [(1.0_f64, 0.4_f64), (1.5, 1.2), (2.0, 3.0)] {
            let q = (-omega / t).exp();
            let (mut u, mut s) = (0.0, 0.0);
            for n in 0..2000 {
                let p = (1.0 - q) * q.powi(n);
                if p > 0.0 {
                    u += n as f64 * omega * p;
                    s -= p * p.ln();
                }
            }
            assert_abs_diff_eq!(analytic_equilibrium_energy(omega, t), u, epsilon = 1e-12);
            assert_abs_diff_eq!(analytic_equilibrium_entropy(omega, t), s, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(
            analytic_equilibrium_energy(1.0, 0.4),
            0.089_425_489_833_852_01,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            analytic_equilibrium_energy(1.5, 1.2),
            0.602_326_677_739_519_3,
            epsilon = 1e-15
        );
        assert_eq!(analytic_equilibrium_energy(1.0, 1e-4), 0.0);
        assert_eq!(analytic_equilibrium_entropy(1.0, 1e-4), 0.0);
    }

    #[test]
    fn thermal_balance_ledger_at_default_parameters() {
        let l = analytic_cycle_thermal_balance(1.0, 1.5, 0.4, 1.2).unwrap();
        assert_abs_diff_eq!(l.q_in, 0.468_188_442_988_741_3, epsilon = 1e-14);
        assert_abs_diff_eq!(l.w_out, 0.200_775_559_246_506_44, epsilon = 1e-14);
        assert_abs_diff_eq!(l.q_out, 0.312_125_628_659_160_9, epsilon = 1e-14);
        assert_abs_diff_eq!(l.w_in, 0.044_712_744_916_926_007, epsilon = 1e-14);
        assert_abs_diff_eq!(l.w_eff, 0.156_062_814_329_580_43, epsilon = 1e-14);
        assert_abs_diff_eq!(l.efficiency, 1.0 / 3.0, epsilon = 1e-15);
        assert!(!l.refrigerator);
    }

    #[test]
    fn carnot_point_has_no_flow() {
        let l = analytic_cycle_thermal_balance(0.4, 1.2, 0.4, 1.2).unwrap();
        assert_abs_diff_eq!(l.q_in, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.w_eff, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn refrigerator_regime_is_flagged() {
        // ω_c/ω_h below T_c/T_h
        let l = analytic_cycle_thermal_balance(0.2, 1.0, 0.4, 1.2).unwrap();
        assert!(l.refrigerator);
        assert!(l.w_eff < 0.0);
    }

    #[test]
    fn generator_columns_sum_to_zero() {
        let g = generator_matrix(&params(1.2, 0.7, 0.4), 30);
        for j in 0..31 {
            let sum: f64 = g.column(j).iter().sum();
            assert!(sum.abs() <= 1e-14, "column {j}: {sum:e}");
        }
    }

    #[test]
    fn expm_of_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-3.0, 0.0, 1.5]));
        let e = expm(&(a * 2.0));
        assert_abs_diff_eq!(e[(0, 0)], (-6.0f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(e[(1, 1)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[(2, 2)], 3f64.exp(), epsilon = 1e-12);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn zero_duration_is_identity() {
        let d = FockDistribution::from_probs(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(
            propagate_matrix_exponential(&d, &params(1.0, 1.0, 0.5), 0.0).unwrap(),
            d
        );
    }

    #[test]
    fn boltzmann_is_stationary_under_propagator() {
        let p = params(1.5, 1.2, 0.5);
        let eq = crate::bath::stationary_distribution(1.5, 1.2, 40);
        let out = propagate_matrix_exponential(&eq, &p, 7.0).unwrap();
        assert!(out.total_variation(&eq) < 1e-12);
    }

    #[test]
    fn ground_state_relaxation_matches_scipy_reference() {
        // scipy.linalg.expm on the same 51-level generator
        let p = params(1.5, 1.2, 0.5);
        let out = propagate_matrix_exponential(&FockDistribution::ground(50), &p, 2.0).unwrap();
        assert_abs_diff_eq!(out.probs()[0], 0.742_276_38, epsilon = 1e-8);
        assert_abs_diff_eq!(out.probs()[1], 0.191_302_15, epsilon = 1e-8);
        assert_abs_diff_eq!(out.mean_occupation() * 1.5, 0.520_810_626_206_672_6, epsilon = 1e-12);
    }

    #[test]
    fn dense_limit_enforced() {
        let err = propagate_matrix_exponential(&FockDistribution::ground(65), &params(1.0, 1.0, 1.0), 1.0);
        assert!(matches!(err, Err(Error::TooLargeForDense { n_max: 65, .. })));
    }
}
