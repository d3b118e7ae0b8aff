//! Quantum Otto engine built on a harmonic oscillator whose Fock-level
//! populations relax under a thermal rate equation.
//!
//! Units: ħ = k_B = 1, energies in ω_c, times in 2π/ω_c.
//!
//! ```
//! use otto_kiln::{run_engine, EngineConfig};
//!
//! let trace = run_engine(&EngineConfig { n_cycles: 2, ..EngineConfig::default() }).unwrap();
//! assert_eq!(trace.records.len(), 2);
//! assert!(trace.audit().passed());
//! ```

pub mod analysis;
pub mod bath;
pub mod cli;
pub mod config;
pub mod cycle;
pub mod error;
pub mod fock;
pub mod oracle;
pub mod output;
pub mod verify;

pub use analysis::{
    carnot_limit, cycle_efficiency, cycle_power, otto_limit, sweep_efficiency_power, sweep_point, RatioGrid,
    SweepPoint, SweepSettings,
};
pub use bath::{
    bose_einstein, evolve_isochoric, rate_derivative, stationary_distribution, RateParams, StepControl, Trajectory,
};
pub use config::{parse_config, parse_config_with_mode, EngineConfig, Mode};
pub use cycle::{
    run_engine, run_otto_cycle, run_pump_cycle, CycleKind, CycleRecord, EngineTrace, OttoParams, PumpParams,
    SimulationOptions, Stroke, StrokeSchedule,
};
pub use error::{Error, Result};
pub use fock::{make_distribution, BathSpec, FockDistribution, InitialStateSpec, OscillatorSpec};
