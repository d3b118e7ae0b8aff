use otto_kiln::bath::{default_dt, rate_derivative, stationary_distribution};
use otto_kiln::cycle::run_adiabatic;
use otto_kiln::output::format_number;
use otto_kiln::{
    evolve_isochoric, parse_config, run_otto_cycle, BathSpec, Error, FockDistribution, OscillatorSpec, OttoParams,
    RateParams, SimulationOptions, StepControl,
};
use proptest::prelude::*;

const N_MAX: usize = 24;

fn distribution() -> impl Strategy<Value = FockDistribution> {
    prop::collection::vec(0.0..1.0f64, N_MAX + 1)
        .prop_filter("non-zero weights", |w| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|w| {
            let total: f64 = w.iter().sum();
            FockDistribution::from_probs(w.iter().map(|x| x / total).collect()).unwrap()
        })
}

fn rate_params() -> impl Strategy<Value = RateParams> {
    (0.5..3.0f64, 0.2..2.0f64, 0.05..1.0f64)
        .prop_map(|(omega, t, g)| RateParams::new(OscillatorSpec::new(omega).unwrap(), BathSpec::new(t, g).unwrap()))
}

fn evolve(dist: &FockDistribution, params: &RateParams, duration: f64, dt: f64) -> FockDistribution {
    evolve_isochoric(dist, params, duration, &StepControl::new(dt).with_tail_tolerance(1.0))
        .unwrap()
        .into_final_dist()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_conserves_probability(dist in distribution(), params in rate_params()) {
        let d = rate_derivative(&dist, &params);
        let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        prop_assert!(d.iter().sum::<f64>().abs() <= 1e-14 * scale);
    }

    #[test]
    fn boltzmann_is_stationary(omega in 0.5..3.0f64, t in 0.2..2.0f64, g in 0.05..1.0f64) {
        let params = RateParams::new(OscillatorSpec::new(omega).unwrap(), BathSpec::new(t, g).unwrap());
        let d = rate_derivative(&stationary_distribution(omega, t, N_MAX), &params);
        prop_assert!(d.iter().all(|x| x.abs() <= 1e-12));
    }

    #[test]
    fn contact_contracts_towards_equilibrium(dist in distribution(), params in rate_params(), duration in 0.1..5.0f64) {
        let pi = stationary_distribution(params.osc().omega(), params.bath().temperature(), N_MAX);
        let control = StepControl::new(default_dt(duration, &params, N_MAX)).with_stride(50).with_tail_tolerance(1.0);
        let traj = evolve_isochoric(&dist, &params, duration, &control).unwrap();
        let mut previous = f64::INFINITY;
        for point in &traj.samples {
            let total: f64 = point.dist.probs().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(point.dist.probs().iter().all(|p| *p >= 0.0));
            let tv = point.dist.total_variation(&pi);
            prop_assert!(tv <= previous + 1e-12);
            previous = tv;
        }
        prop_assert!(traj.stats.max_drift <= 1e-10);
    }

    #[test]
    fn halving_the_step_shrinks_the_change_sixteenfold(
        dist in distribution(),
        params in rate_params(),
        duration in 0.2..2.0f64,
    ) {
        // coarse start: h·λ_max ≈ 1/4 with λ_max ≤ 4Γ(n_max + 1)
        let dt = 0.25 / (4.0 * params.gamma() * (N_MAX + 1) as f64);
        let steps = (duration / dt).ceil();
        let h = duration / steps;
        let p1 = evolve(&dist, &params, duration, h);
        let p2 = evolve(&dist, &params, duration, h / 2.0);
        let p3 = evolve(&dist, &params, duration, h / 4.0);
        let first = p1.total_variation(&p2);
        let second = p2.total_variation(&p3);
        prop_assert!(second <= first / 16.0 + 1e-14, "{first:e} → {second:e}");
    }

    #[test]
    fn adiabatic_ramp_freezes_populations(dist in distribution(), from in 0.5..3.0f64, to in 0.5..3.0f64) {
        let (traj, work) = run_adiabatic(&dist, from, to, 1.0, 8).unwrap();
        prop_assert!(traj.samples.iter().all(|p| p.dist == dist));
        prop_assert_eq!(traj.last().omega, to);
        prop_assert_eq!(traj.final_dist().entropy(), dist.entropy());
        prop_assert!((work - (to - from) * dist.mean_occupation()).abs() <= 1e-15);
    }

    #[test]
    fn cycle_first_law_closes(
        dist in distribution(),
        omega_c in 0.5..1.5f64,
        gap in 0.1..1.5f64,
        t_c in 0.2..0.8f64,
        t_gap in 0.1..1.2f64,
        tau in 0.2..3.0f64,
    ) {
        let params = OttoParams {
            omega_c,
            omega_h: omega_c + gap,
            bath_c: BathSpec::new(t_c, 0.5).unwrap(),
            bath_h: BathSpec::new(t_c + t_gap, 0.5).unwrap(),
            tau,
        };
        let opts = SimulationOptions { n_max: N_MAX, tail_tolerance: 1.0, ..SimulationOptions::default() };
        let outcome = run_otto_cycle(&dist, &params, &opts).unwrap();
        let r = &outcome.record;
        prop_assert!(r.first_law_residual().abs() <= 1e-9);
        for stroke in &outcome.strokes {
            prop_assert!(stroke.ledger.first_law_residual().abs() <= 1e-9);
        }
        prop_assert!((r.w_eff - (r.w_out - r.w_in)).abs() <= 1e-15);
    }

    #[test]
    fn numbers_round_trip(x in prop::num::f64::NORMAL) {
        let text = format_number(x);
        let back: f64 = text.parse().unwrap();
        prop_assert!(((back - x) / x).abs() <= 5e-12, "{x:e} → {text}");
    }

    #[test]
    fn unknown_keys_are_located(line in 0usize..6, key in "[a-z]{3,8}_x") {
        let mut lines = vec!["[engine]".to_owned()];
        lines.extend((0..6).map(|i| if i == line { format!("{key} = 1") } else { "# filler".to_owned() }));
        match parse_config(&lines.join("\n")) {
            Err(Error::Config { line: at, key: k, .. }) => {
                prop_assert_eq!(at, line + 2);
                prop_assert_eq!(k, format!("engine.{key}"));
            }
            other => prop_assert!(false, "{other:?}"),
        }
    }
}
