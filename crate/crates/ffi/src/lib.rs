//! C ABI over `otto-kiln`.
//!
//! Every fallible function returns an [`OttoStatus`]; on failure a message is
//! available from [`otto_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use otto_kiln::analysis::{
    carnot_limit, cycle_efficiency, cycle_power, otto_limit, sweep_efficiency_power, SweepPoint,
};
use otto_kiln::bath::bose_einstein;
use otto_kiln::oracle::analytic_cycle_thermal_balance;
use otto_kiln::{parse_config, run_engine, EngineConfig, EngineTrace, Error, Mode};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OttoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    InvalidDistribution = 3,
    UnderTruncation = 4,
    Instability = 5,
    NormalizationDrift = 6,
    Config = 7,
    Io = 8,
    OutOfRange = 9,
    BufferTooSmall = 10,
    Panic = 255,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OttoMode {
    Otto = 0,
    Pump = 1,
}

/// One cycle's ledger. `efficiency` is NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OttoCycleSummary {
    pub cycle_index: usize,
    pub q_in: f64,
    pub w_out: f64,
    pub q_out: f64,
    pub w_in: f64,
    pub w_eff: f64,
    pub q_pump: f64,
    pub pump_energy: f64,
    pub efficiency: f64,
    pub power: f64,
    pub cyclostationarity: f64,
    pub first_law_residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OttoSample {
    pub time: f64,
    pub omega: f64,
    pub energy: f64,
    pub entropy: f64,
    pub cycle: usize,
}

/// `efficiency` is NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OttoSweepPoint {
    pub t_h: f64,
    pub ratio: f64,
    pub efficiency: f64,
    pub power: f64,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OttoAnalyticCycle {
    pub q_in: f64,
    pub w_out: f64,
    pub q_out: f64,
    pub w_in: f64,
    pub w_eff: f64,
    pub efficiency: f64,
}

/// Engine configuration handle.
pub struct OttoConfig {
    inner: EngineConfig,
}

/// Result of a full engine run.
pub struct OttoTrace {
    inner: EngineTrace,
}

/// Result of an efficiency–power sweep.
pub struct OttoSweep {
    points: Vec<SweepPoint>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> OttoStatus {
    match err {
        Error::InvalidParameter { .. } | Error::Schedule(_) | Error::TooLargeForDense { .. } => {
            OttoStatus::InvalidParameter
        }
        Error::InvalidDistribution(_) => OttoStatus::InvalidDistribution,
        Error::UnderTruncation { .. } => OttoStatus::UnderTruncation,
        Error::Instability { .. } => OttoStatus::Instability,
        Error::NormalizationDrift { .. } => OttoStatus::NormalizationDrift,
        Error::Config { .. } => OttoStatus::Config,
        Error::Io(_) | Error::Csv(_) => OttoStatus::Io,
    }
}

struct Failure(OttoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(OttoStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, mapping errors and panics to a status and the last-error slot.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> OttoStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => OttoStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {message}"));
            OttoStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn out_of_range(index: usize, len: usize) -> Failure {
    Failure(
        OttoStatus::OutOfRange,
        format!("index {index} out of range (len {len})"),
    )
}

fn nan_if_none(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn otto_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn otto_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a configuration with the standard defaults.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn otto_config_default(out: *mut *mut OttoConfig) -> OttoStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = Box::into_raw(Box::new(OttoConfig {
            inner: EngineConfig::default(),
        }));
        Ok(())
    })
}

/// Parses a configuration document.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otto_config_parse(text: *const c_char, out: *mut *mut OttoConfig) -> OttoStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Failure(OttoStatus::Config, format!("configuration is not UTF-8: {e}")))?;
        let inner = parse_config(text)?;
        *out = Box::into_raw(Box::new(OttoConfig { inner }));
        Ok(())
    })
}

/// Sets a numeric engine parameter by name: `omega_c`, `omega_h`, `t_c`,
/// `t_h`, `gamma0`, `tau`, `tau_bc`, `tau_cd` or `tau_db`.
///
/// # Safety
/// `config` must come from this library; `key` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn otto_config_set(config: *mut OttoConfig, key: *const c_char, value: f64) -> OttoStatus {
    guard(|| {
        let cfg = &mut deref_mut(config, "config")?.inner;
        if key.is_null() {
            return Err(null("key"));
        }
        let key = CStr::from_ptr(key).to_string_lossy();
        if !(value.is_finite() && value > 0.0) {
            return Err(Failure(
                OttoStatus::InvalidParameter,
                format!("`{key}` must be finite and > 0, got {value}"),
            ));
        }
        let field = match key.as_ref() {
            "omega_c" => &mut cfg.omega_c,
            "omega_h" => &mut cfg.omega_h,
            "t_c" => &mut cfg.t_c,
            "t_h" => &mut cfg.t_h,
            "gamma0" => &mut cfg.gamma0,
            "tau" => &mut cfg.tau,
            "tau_bc" => &mut cfg.tau_bc,
            "tau_cd" => &mut cfg.tau_cd,
            "tau_db" => &mut cfg.tau_db,
            other => {
                return Err(Failure(
                    OttoStatus::InvalidParameter,
                    format!("unknown parameter `{other}`"),
                ));
            }
        };
        *field = value;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn otto_config_set_cycles(config: *mut OttoConfig, n_cycles: usize) -> OttoStatus {
    guard(|| {
        deref_mut(config, "config")?.inner.n_cycles = n_cycles;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn otto_config_set_mode(config: *mut OttoConfig, mode: OttoMode) -> OttoStatus {
    guard(|| {
        deref_mut(config, "config")?.inner.mode = match mode {
            OttoMode::Otto => Mode::Otto,
            OttoMode::Pump => Mode::Pump,
        };
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn otto_config_free(config: *mut OttoConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the configured engine (Otto or pump mode).
///
/// # Safety
/// `config` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otto_run(config: *const OttoConfig, out: *mut *mut OttoTrace) -> OttoStatus {
    guard(|| {
        let cfg = &deref(config, "config")?.inner;
        let out = deref_mut(out, "out")?;
        let inner = run_engine(cfg)?;
        *out = Box::into_raw(Box::new(OttoTrace { inner }));
        Ok(())
    })
}

/// # Safety
/// `trace` must be NULL or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn otto_trace_free(trace: *mut OttoTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of cycles in the trace; 0 for NULL.
///
/// # Safety
/// `trace` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn otto_trace_cycle_count(trace: *const OttoTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.inner.records.len())
}

/// Number of time-series samples in the trace; 0 for NULL.
///
/// # Safety
/// `trace` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn otto_trace_sample_count(trace: *const OttoTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.inner.samples.len())
}

/// Whether the last cycle reached the cyclostationary tolerance.
///
/// # Safety
/// `trace` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otto_trace_converged(trace: *const OttoTrace, out: *mut bool) -> OttoStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(trace, "trace")?.inner.converged;
        Ok(())
    })
}

/// # Safety
/// `trace` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otto_trace_cycle(
    trace: *const OttoTrace,
    index: usize,
    out: *mut OttoCycleSummary,
) -> OttoStatus {
    guard(|| {
        let records = &deref(trace, "trace")?.inner.records;
        let out = deref_mut(out, "out")?;
        let r = records.get(index).ok_or_else(|| out_of_range(index, records.len()))?;
        *out = OttoCycleSummary {
            cycle_index: r.cycle_index,
            q_in: r.q_in,
            w_out: r.w_out,
            q_out: r.q_out,
            w_in: r.w_in,
            w_eff: r.w_eff,
            q_pump: r.q_pump,
            pump_energy: r.pump_energy,
            efficiency: nan_if_none(cycle_efficiency(r)),
            power: cycle_power(r, r.period),
            cyclostationarity: r.cyclostationarity(),
            first_law_residual: r.first_law_residual(),
        };
        Ok(())
    })
}

/// # Safety
/// `trace` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otto_trace_sample(trace: *const OttoTrace, index: usize, out: *mut OttoSample) -> OttoStatus {
    guard(|| {
        let samples = &deref(trace, "trace")?.inner.samples;
        let out = deref_mut(out, "out")?;
        let s = samples.get(index).ok_or_else(|| out_of_range(index, samples.len()))?;
        *out = OttoSample {
            time: s.time,
            omega: s.omega,
            energy: s.energy,
            entropy: s.entropy,
            cycle: s.cycle,
        };
        Ok(())
    })
}

/// Copies the populations of sample `index` into `buffer`. `len_out`
/// receives the ladder size; pass a NULL `buffer` to query it.
///
/// # Safety
/// `buffer` must be NULL or hold `capacity` writable doubles; `len_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otto_trace_populations(
    trace: *const OttoTrace,
    index: usize,
    buffer: *mut f64,
    capacity: usize,
    len_out: *mut usize,
) -> OttoStatus {
    guard(|| {
        let samples = &deref(trace, "trace")?.inner.samples;
        let len_out = deref_mut(len_out, "len_out")?;
        let probs = samples
            .get(index)
            .ok_or_else(|| out_of_range(index, samples.len()))?
            .dist
            .probs();
        *len_out = probs.len();
        if buffer.is_null() {
            return Ok(());
        }
        if capacity < probs.len() {
            return Err(Failure(
                OttoStatus::BufferTooSmall,
                format!("buffer holds {capacity} values, {} needed", probs.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buffer, probs.len()).copy_from_slice(probs);
        Ok(())
    })
}

/// Runs the efficiency–power sweep described by the configuration's sweep
/// settings, using at most `threads` workers (0 = library default).
///
/// # Safety
/// `config` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otto_sweep(config: *const OttoConfig, threads: usize, out: *mut *mut OttoSweep) -> OttoStatus {
    guard(|| {
        let cfg = &deref(config, "config")?.inner;
        let out = deref_mut(out, "out")?;
        let mut settings = cfg.sweep_settings();
        settings.threads = (threads > 0).then_some(threads);
        let points = sweep_efficiency_power(&settings)?;
        *out = Box::into_raw(Box::new(OttoSweep { points }));
        Ok(())
    })
}

/// # Safety
/// `sweep` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn otto_sweep_len(sweep: *const OttoSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.points.len())
}

/// # Safety
/// `sweep` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otto_sweep_point(
    sweep: *const OttoSweep,
    index: usize,
    out: *mut OttoSweepPoint,
) -> OttoStatus {
    guard(|| {
        let points = &deref(sweep, "sweep")?.points;
        let out = deref_mut(out, "out")?;
        let p = points.get(index).ok_or_else(|| out_of_range(index, points.len()))?;
        *out = OttoSweepPoint {
            t_h: p.t_h,
            ratio: p.ratio,
            efficiency: nan_if_none(p.efficiency),
            power: p.power,
            converged: p.converged,
        };
        Ok(())
    })
}

/// # Safety
/// `sweep` must be NULL or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn otto_sweep_free(sweep: *mut OttoSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// Mean thermal occupation 1/(e^{ω/T} − 1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otto_bose_einstein(omega: f64, temperature: f64, out: *mut f64) -> OttoStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        if !(omega > 0.0 && temperature > 0.0 && omega.is_finite() && temperature.is_finite()) {
            return Err(Failure(
                OttoStatus::InvalidParameter,
                format!("need finite ω > 0 and T > 0, got ω = {omega}, T = {temperature}"),
            ));
        }
        *out = bose_einstein(omega, temperature);
        Ok(())
    })
}

/// 1 − ω_c/ω_h.
#[no_mangle]
pub extern "C" fn otto_otto_limit(omega_c: f64, omega_h: f64) -> f64 {
    otto_limit(omega_c, omega_h)
}

/// 1 − T_c/T_h.
#[no_mangle]
pub extern "C" fn otto_carnot_limit(t_c: f64, t_h: f64) -> f64 {
    carnot_limit(t_c, t_h)
}

/// Closed-form ledger of a cycle whose isochores reach equilibrium.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otto_analytic_cycle(
    omega_c: f64,
    omega_h: f64,
    t_c: f64,
    t_h: f64,
    out: *mut OttoAnalyticCycle,
) -> OttoStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let l = analytic_cycle_thermal_balance(omega_c, omega_h, t_c, t_h)?;
        *out = OttoAnalyticCycle {
            q_in: l.q_in,
            w_out: l.w_out,
            q_out: l.q_out,
            w_in: l.w_in,
            w_eff: l.w_eff,
            efficiency: l.efficiency,
        };
        Ok(())
    })
}
