//! Experiment configuration: a small `key = value` format with `[section]`
//! headers and `#` comments.
//!
//! ```text
//! mode = otto
//!
//! [engine]
//! omega_c = 1.0
//! omega_h = 1.5
//! relaxation_time = 1.0   # (2Γ₀)⁻¹; alternatively gamma0 = 0.5
//!
//! [initial_state]
//! kind = equal_lowest
//! levels = 3
//! ```
//!
//! Keys before the first header (other than `mode`) belong to `[engine]`.
//! Unknown sections and keys are rejected, as are duplicates. Every error
//! names the key and the line it came from.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::analysis::{RatioGrid, SweepSettings, THERMAL_BALANCE_TAU};
use crate::cycle::{OttoParams, PumpParams, SimulationOptions};
use crate::error::{Error, Result};
use crate::fock::{BathSpec, InitialStateSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Otto,
    Pump,
    Sweep,
    Verify,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "otto" | "simulate" => Ok(Self::Otto),
            "pump" => Ok(Self::Pump),
            "sweep" => Ok(Self::Sweep),
            "verify" => Ok(Self::Verify),
            _ => Err(format!("unknown mode `{s}` (expected otto, pump, sweep or verify)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub t_h_list: Vec<f64>,
    pub ratios: RatioGrid,
    pub tau: f64,
    pub n_cycles: usize,
    /// Require every isochore to thermalize (e^{−2Γ₀τ} ≤ 1e-8).
    pub thermal_balance: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            t_h_list: vec![0.8, 1.2, 1.6, 2.0],
            ratios: RatioGrid::default(),
            tau: THERMAL_BALANCE_TAU,
            n_cycles: 2,
            thermal_balance: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    /// Number of P_n columns in `timeseries.csv`.
    pub csv_levels: usize,
    /// Also write `timeseries_full.csv` with every level.
    pub wide_csv: bool,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            csv_levels: 8,
            wide_csv: false,
            svg: false,
        }
    }
}

/// Everything needed to run one experiment. Defaults reproduce the standard
/// parameter set: ω_c = 1, ω_h = 1.5, T_c = 0.4, T_h = 1.2, (2Γ₀)⁻¹ = 1, τ = 2.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub mode: Mode,
    pub omega_c: f64,
    pub omega_h: f64,
    pub t_c: f64,
    pub t_h: f64,
    pub gamma0: f64,
    pub tau: f64,
    pub tau_bc: f64,
    pub tau_cd: f64,
    pub tau_db: f64,
    pub n_cycles: usize,
    pub initial_state: InitialStateSpec,
    pub pump_target: InitialStateSpec,
    pub simulation: SimulationOptions,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Otto,
            omega_c: 1.0,
            omega_h: 1.5,
            t_c: 0.4,
            t_h: 1.2,
            gamma0: 0.5,
            tau: 2.0,
            tau_bc: 2.0,
            tau_cd: 2.0,
            tau_db: 2.0,
            n_cycles: 20,
            initial_state: InitialStateSpec::Ground,
            pump_target: InitialStateSpec::Excited { level: 1 },
            simulation: SimulationOptions::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl EngineConfig {
    pub fn relaxation_time(&self) -> f64 {
        0.5 / self.gamma0
    }

    pub fn otto_params(&self) -> Result<OttoParams> {
        Ok(OttoParams {
            omega_c: self.omega_c,
            omega_h: self.omega_h,
            bath_c: BathSpec::new(self.t_c, self.gamma0)?,
            bath_h: BathSpec::new(self.t_h, self.gamma0)?,
            tau: self.tau,
        })
    }

    pub fn pump_params(&self) -> Result<PumpParams> {
        Ok(PumpParams {
            omega_c: self.omega_c,
            omega_h: self.omega_h,
            bath_c: BathSpec::new(self.t_c, self.gamma0)?,
            target: self.pump_target.clone(),
            tau_bc: self.tau_bc,
            tau_cd: self.tau_cd,
            tau_db: self.tau_db,
        })
    }

    /// Total duration of one cycle in the configured mode.
    pub fn period(&self) -> f64 {
        match self.mode {
            Mode::Pump => self.tau_bc + self.tau_cd + self.tau_db,
            _ => 4.0 * self.tau,
        }
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            t_c: self.t_c,
            t_h_list: self.sweep.t_h_list.clone(),
            ratios: self.sweep.ratios.clone(),
            omega_c: self.omega_c,
            gamma0: self.gamma0,
            tau: self.sweep.tau,
            n_cycles: self.sweep.n_cycles,
            simulation: self.simulation,
            threads: None,
        }
    }
}

/// Parses a configuration document, applying defaults for absent keys.
pub fn parse_config(text: &str) -> Result<EngineConfig> {
    parse_config_with_mode(text, None)
}

/// Like [`parse_config`], but forces `mode`; a conflicting `mode` key in the
/// document is an error.
pub fn parse_config_with_mode(text: &str, mode: Option<Mode>) -> Result<EngineConfig> {
    let mut doc = Document::parse(text)?;
    let mut cfg = EngineConfig::default();

    if let Some(entry) = doc.take("", "mode") {
        let parsed: Mode = entry.value.parse().map_err(|m| entry.error(m))?;
        if let Some(forced) = mode {
            if forced != parsed {
                return Err(entry.error(format!("document selects {parsed:?} but {forced:?} was requested")));
            }
        }
        cfg.mode = parsed;
    }
    if let Some(forced) = mode {
        cfg.mode = forced;
    }

    // [engine]
    let mut lines: BTreeMap<&'static str, usize> = BTreeMap::new();
    macro_rules! engine_f64 {
        ($key:literal, $field:expr) => {
            if let Some(e) = doc.take("engine", $key) {
                $field = e.positive_f64()?;
                lines.insert($key, e.line);
            }
        };
    }
    engine_f64!("omega_c", cfg.omega_c);
    engine_f64!("omega_h", cfg.omega_h);
    engine_f64!("t_c", cfg.t_c);
    engine_f64!("t_h", cfg.t_h);
    engine_f64!("tau", cfg.tau);
    let gamma0 = doc.take("engine", "gamma0");
    let relaxation = doc.take("engine", "relaxation_time");
    match (gamma0, relaxation) {
        (Some(_), Some(r)) => return Err(r.error("conflicts with `gamma0`; give only one")),
        (Some(g), None) => cfg.gamma0 = g.positive_f64()?,
        (None, Some(r)) => cfg.gamma0 = 0.5 / r.positive_f64()?,
        (None, None) => {}
    }
    cfg.tau_bc = cfg.tau;
    cfg.tau_cd = cfg.tau;
    cfg.tau_db = cfg.tau;
    engine_f64!("tau_bc", cfg.tau_bc);
    engine_f64!("tau_cd", cfg.tau_cd);
    engine_f64!("tau_db", cfg.tau_db);
    if let Some(e) = doc.take("engine", "n_cycles") {
        cfg.n_cycles = e.parse()?;
    }
    if let Some(e) = doc.take("engine", "n_max") {
        cfg.simulation.n_max = e.parse()?;
        if cfg.simulation.n_max < 2 {
            return Err(e.error("must be at least 2"));
        }
    }
    if let Some(e) = doc.take("engine", "dt") {
        cfg.simulation.dt = Some(e.positive_f64()?);
    }
    if let Some(e) = doc.take("engine", "tail_tolerance") {
        cfg.simulation.tail_tolerance = e.positive_f64()?;
    }
    if let Some(e) = doc.take("engine", "sample_stride") {
        let stride: usize = e.parse()?;
        if stride == 0 {
            return Err(e.error("must be at least 1"));
        }
        cfg.simulation.sample_stride = Some(stride);
    }
    if let Some(e) = doc.take("engine", "adiabatic_samples") {
        cfg.simulation.adiabatic_samples = e.parse()?;
        if cfg.simulation.adiabatic_samples < 2 {
            return Err(e.error("must be at least 2"));
        }
    }
    if cfg.omega_c >= cfg.omega_h {
        return Err(Error::Config {
            line: lines.get("omega_c").or(lines.get("omega_h")).copied().unwrap_or(0),
            key: "engine.omega_c".into(),
            message: format!("must be below omega_h ({} >= {})", cfg.omega_c, cfg.omega_h),
        });
    }
    if cfg.t_c >= cfg.t_h && cfg.mode != Mode::Pump {
        return Err(Error::Config {
            line: lines.get("t_c").or(lines.get("t_h")).copied().unwrap_or(0),
            key: "engine.t_c".into(),
            message: format!("must be below t_h ({} >= {})", cfg.t_c, cfg.t_h),
        });
    }

    // state recipes
    let gaussian_defaults = (cfg.omega_h, cfg.t_h);
    if let Some(spec) = doc.state_spec("initial_state", gaussian_defaults)? {
        cfg.initial_state = spec;
    }
    if let Some(spec) = doc.state_spec("pump_target", gaussian_defaults)? {
        cfg.pump_target = spec;
    }

    // [sweep]
    if let Some(e) = doc.take("sweep", "t_h_list") {
        cfg.sweep.t_h_list = e.positive_list()?;
        if cfg.sweep.t_h_list.iter().any(|t| *t <= cfg.t_c) {
            return Err(e.error(format!("every hot temperature must exceed t_c = {}", cfg.t_c)));
        }
    }
    let explicit = doc.take("sweep", "ratios");
    let grid_keys = [
        doc.take("sweep", "ratio_offset"),
        doc.take("sweep", "ratio_max"),
        doc.take("sweep", "ratio_steps"),
    ];
    if let Some(e) = explicit {
        if let Some(clash) = grid_keys.iter().flatten().next() {
            return Err(clash.error("cannot be combined with an explicit `ratios` list"));
        }
        let ratios = e.positive_list()?;
        if ratios.iter().any(|r| *r > 1.0) {
            return Err(e.error("ratios must lie in (0, 1]"));
        }
        cfg.sweep.ratios = RatioGrid::Explicit(ratios);
    } else {
        let [offset, max, steps] = grid_keys;
        if let RatioGrid::Uniform {
            offset: o,
            max: m,
            steps: s,
        } = &mut cfg.sweep.ratios
        {
            if let Some(e) = offset {
                *o = e.positive_f64()?;
            }
            if let Some(e) = max {
                *m = e.positive_f64()?;
                if *m > 1.0 {
                    return Err(e.error("must not exceed 1"));
                }
            }
            if let Some(e) = steps {
                *s = e.parse()?;
                if *s < 2 {
                    return Err(e.error("must be at least 2"));
                }
            }
        }
    }
    if let Some(e) = doc.take("sweep", "n_cycles") {
        cfg.sweep.n_cycles = e.parse()?;
        if cfg.sweep.n_cycles == 0 {
            return Err(e.error("must be at least 1"));
        }
    }
    if let Some(e) = doc.take("sweep", "thermal_balance") {
        cfg.sweep.thermal_balance = e.parse()?;
    }
    let sweep_tau = doc.take("sweep", "tau");
    if let Some(e) = &sweep_tau {
        cfg.sweep.tau = e.positive_f64()?;
    }
    if cfg.mode == Mode::Sweep && cfg.sweep.thermal_balance && (-2.0 * cfg.gamma0 * cfg.sweep.tau).exp() > 1e-8 {
        let message = format!(
            "tau = {} does not thermalize with gamma0 = {}; lengthen it or set thermal_balance = false",
            cfg.sweep.tau, cfg.gamma0
        );
        return Err(match &sweep_tau {
            Some(e) => e.error(message),
            None => Error::Config {
                line: 0,
                key: "sweep.tau".into(),
                message,
            },
        });
    }

    // [output]
    if let Some(e) = doc.take("output", "csv_levels") {
        cfg.output.csv_levels = e.parse()?;
    }
    if let Some(e) = doc.take("output", "wide_csv") {
        cfg.output.wide_csv = e.parse()?;
    }
    if let Some(e) = doc.take("output", "svg") {
        cfg.output.svg = e.parse()?;
    }

    if cfg.mode == Mode::Otto || cfg.mode == Mode::Pump {
        cfg.initial_state
            .validate(cfg.simulation.n_max)
            .map_err(|err| Error::Config {
                line: doc.header_line("initial_state"),
                key: "initial_state".into(),
                message: err.to_string(),
            })?;
    }
    if cfg.mode == Mode::Pump {
        cfg.pump_target
            .validate(cfg.simulation.n_max)
            .map_err(|err| Error::Config {
                line: doc.header_line("pump_target"),
                key: "pump_target".into(),
                message: err.to_string(),
            })?;
    }
    doc.finish()?;
    Ok(cfg)
}

#[derive(Debug, Clone)]
struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
}

impl Entry {
    fn qualified(&self) -> String {
        if self.section.is_empty() {
            self.key.clone()
        } else {
            format!("{}.{}", self.section, self.key)
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Config {
            line: self.line,
            key: self.qualified(),
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self) -> Result<T> {
        self.value.parse().map_err(|_| {
            self.error(format!(
                "cannot parse `{}` as {}",
                self.value,
                std::any::type_name::<T>()
            ))
        })
    }

    fn positive_f64(&self) -> Result<f64> {
        let v: f64 = self.parse()?;
        if !(v.is_finite() && v > 0.0) {
            return Err(self.error(format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn positive_list(&self) -> Result<Vec<f64>> {
        let items: Vec<&str> = self.value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if items.is_empty() {
            return Err(self.error("expected a comma-separated list of numbers"));
        }
        items
            .into_iter()
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
                _ => Err(self.error(format!("`{s}` is not a positive number"))),
            })
            .collect()
    }
}

const SECTIONS: [&str; 5] = ["engine", "initial_state", "pump_target", "sweep", "output"];

struct Document {
    entries: Vec<Entry>,
    headers: BTreeMap<String, usize>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut headers = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').map(str::trim).ok_or_else(|| Error::Config {
                    line,
                    key: content.into(),
                    message: "unterminated section header".into(),
                })?;
                if !SECTIONS.contains(&name) {
                    return Err(Error::Config {
                        line,
                        key: name.into(),
                        message: format!("unknown section (expected one of {})", SECTIONS.join(", ")),
                    });
                }
                if headers.insert(name.to_string(), line).is_some() {
                    return Err(Error::Config {
                        line,
                        key: name.into(),
                        message: "section appears twice".into(),
                    });
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                key: content.into(),
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            // keys before the first header, other than `mode`, belong to [engine]
            let section = if section.is_empty() && key != "mode" {
                "engine".to_string()
            } else {
                section.clone()
            };
            let entry = Entry {
                section,
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            };
            if entry.key.is_empty() {
                return Err(entry.error("empty key"));
            }
            if let Some(prev) = entries
                .iter()
                .find(|e| e.section == entry.section && e.key == entry.key)
            {
                return Err(entry.error(format!("duplicate key (first set on line {})", prev.line)));
            }
            entries.push(entry);
        }
        Ok(Self { entries, headers })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        let pos = self.entries.iter().position(|e| e.section == section && e.key == key)?;
        Some(self.entries.remove(pos))
    }

    fn header_line(&self, section: &str) -> usize {
        self.headers.get(section).copied().unwrap_or(0)
    }

    fn state_spec(&mut self, section: &str, gaussian_defaults: (f64, f64)) -> Result<Option<InitialStateSpec>> {
        let Some(kind) = self.take(section, "kind") else {
            if let Some(stray) = self.entries.iter().find(|e| e.section == section) {
                return Err(stray.error("state parameters given without `kind`"));
            }
            return Ok(None);
        };
        let missing = |key: &str| Error::Config {
            line: kind.line,
            key: format!("{section}.{key}"),
            message: format!("required for kind = {}", kind.value),
        };
        let spec = match kind.value.as_str() {
            "ground" => InitialStateSpec::Ground,
            "equal_lowest" => {
                let e = self.take(section, "levels").ok_or_else(|| missing("levels"))?;
                let levels: usize = e.parse()?;
                if levels == 0 {
                    return Err(e.error("must be at least 1"));
                }
                InitialStateSpec::EqualLowest { levels }
            }
            "excited" => {
                let e = self.take(section, "level").ok_or_else(|| missing("level"))?;
                InitialStateSpec::Excited { level: e.parse()? }
            }
            "gaussian" => {
                let center = match self.take(section, "center") {
                    Some(e) => e.parse()?,
                    None => 2,
                };
                let omega_ref = match self.take(section, "omega_ref") {
                    Some(e) => e.positive_f64()?,
                    None => gaussian_defaults.0,
                };
                let temperature_ref = match self.take(section, "temperature_ref") {
                    Some(e) => e.positive_f64()?,
                    None => gaussian_defaults.1,
                };
                InitialStateSpec::Gaussian {
                    center,
                    omega_ref,
                    temperature_ref,
                }
            }
            "boltzmann" => {
                let omega = self
                    .take(section, "omega")
                    .ok_or_else(|| missing("omega"))?
                    .positive_f64()?;
                let temperature = self
                    .take(section, "temperature")
                    .ok_or_else(|| missing("temperature"))?
                    .positive_f64()?;
                InitialStateSpec::Boltzmann { omega, temperature }
            }
            other => {
                return Err(kind.error(format!(
                    "unknown kind `{other}` (expected ground, equal_lowest, excited, gaussian or boltzmann)"
                )))
            }
        };
        Ok(Some(spec))
    }

    /// Anything not consumed is an unknown key.
    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            Some(e) => Err(e.error("unknown key")),
            None => Ok(()),
        }
    }
}
