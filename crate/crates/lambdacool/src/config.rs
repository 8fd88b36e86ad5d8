//! Run configuration.
//!
//! Configuration files are TOML with a mandatory `schema = 1` key. Every
//! frequency is given in Hz and multiplied by 2π on load; Rabi frequencies and
//! single-photon detunings may instead be given in units of γ_e with a
//! `_gamma_e` suffix (exactly one of the two spellings per quantity). Unknown
//! keys anywhere are errors.
//!
//! Overrides address keys by dotted path (`mech.omega_m_hz`) and are applied
//! to the TOML document before it is deserialized, so they obey the same
//! schema as the file itself.

use std::collections::BTreeMap;

use lambdacool_core::backaction::{CascadeSystem, EitMedium, FeedbackSystem, RirMedium};
use lambdacool_core::eit::{default_gamma_gm, EitMediumParams};
use lambdacool_core::model::{CouplingJ, MechanicalParams, OpticalCavityParams};
use lambdacool_core::rir::{thermal_distribution, thermal_sigma_p, GridSpec, RirMediumParams};
use lambdacool_core::units::{AngularFrequency, DEFAULT_WAVELENGTH, SPEED_OF_LIGHT};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{AppError, AppResult};

pub const SCHEMA_VERSION: i64 = 1;

/// Excited-state decay of the Rb D2 line, used when `gamma_e_hz` is omitted.
pub const DEFAULT_GAMMA_E_HZ: f64 = 6.07e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EitFeedback,
    RirCascade,
    Bare,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::EitFeedback => "eit_feedback",
            Scheme::RirCascade => "rir_cascade",
            Scheme::Bare => "bare",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: i64,
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    pub mech: Option<MechConfig>,
    pub cavity_m: Option<CavityConfig>,
    pub cavity_a: Option<CavityConfig>,
    pub eit: Option<EitConfig>,
    pub rir: Option<RirConfig>,
    #[serde(default)]
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub search: SearchConfig,
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechConfig {
    pub omega_m_hz: f64,
    pub quality_factor: f64,
    pub g0_hz: f64,
    pub bath_temperature_k: f64,
    pub mass_kg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub kappa_hz: f64,
    /// Input-mirror coupling; defaults to `kappa_hz / 2`.
    pub kappa_in_hz: Option<f64>,
    /// Drive minus cavity resonance. For the optomechanical cavity this is the
    /// shifted detuning `Δ̃_cm` swept by the cooling observables.
    #[serde(default)]
    pub detuning_hz: f64,
    /// Input power in watts; the drive is `sqrt(P κ_in / ħω)`.
    pub input_power_w: Option<f64>,
    /// Drive amplitude in sqrt(photons)/s, instead of a power.
    pub drive: Option<f64>,
    pub wavelength_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EitConfig {
    pub n_atoms: f64,
    /// Atoms in the metastable state; nonzero values need `general_populations`.
    #[serde(default)]
    pub n_meta: f64,
    #[serde(default)]
    pub general_populations: bool,
    pub rabi_control_hz: Option<f64>,
    pub rabi_control_gamma_e: Option<f64>,
    pub rabi_single_atom_hz: f64,
    pub gamma_e_hz: Option<f64>,
    pub gamma_gm_hz: Option<f64>,
    pub delta_a_hz: Option<f64>,
    pub delta_a_gamma_e: Option<f64>,
    /// Two-photon detuning `δ` at the reference carrier (offset from `Δ_ca` in locked scans).
    #[serde(default)]
    pub delta_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RirConfig {
    pub n_atoms: f64,
    pub rabi_control_hz: Option<f64>,
    pub rabi_control_gamma_e: Option<f64>,
    pub rabi_single_atom_hz: f64,
    pub delta_a_hz: Option<f64>,
    pub delta_a_gamma_e: Option<f64>,
    pub omega_r_hz: f64,
    pub gamma_coh_hz: f64,
    /// Population relaxation used by the oracle; defaults to `gamma_coh_hz / 10`.
    pub gamma_pop_hz: Option<f64>,
    pub temperature_k: f64,
    pub gamma_e_hz: Option<f64>,
    /// Free-space decay rate `c/L_a`; give this or `medium_length_m`.
    pub kappa_a_hz: Option<f64>,
    pub medium_length_m: Option<f64>,
    /// Input coupling of the medium mode; defaults to `kappa_a / 2`.
    pub kappa_in_hz: Option<f64>,
    /// Power sent through the medium.
    #[serde(default)]
    pub input_power_w: f64,
    pub wavelength_m: Option<f64>,
    /// Probe–control detuning `δ` at the reference carrier.
    #[serde(default)]
    pub delta_hz: f64,
    /// Detuning of the probe from the medium mode (`Δ_ca`, zero in free space).
    #[serde(default)]
    pub cavity_detuning_hz: f64,
    /// Quadrature grid half-width in thermal standard deviations.
    pub grid_sigmas: Option<f64>,
    pub grid_points_per_unit: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CascadeBaseline {
    /// The optomechanical cavity driven directly by the same power (`η_c`, `J = 0`).
    #[default]
    Direct,
    /// The same `J`-coupled path with the atoms removed.
    AtomFree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    /// Explicit inter-cavity coupling; defaults to the topology's formula.
    pub j_hz: Option<f64>,
    /// Scan the drive frequency (detunings and `δ` follow `Δ̃_cm`) rather than
    /// only the optomechanical cavity.
    #[serde(default = "yes")]
    pub locked: bool,
    #[serde(default)]
    pub baseline: CascadeBaseline,
    /// Points with more intracavity photons than this are flagged unstable.
    pub max_photons: Option<f64>,
}

fn yes() -> bool {
    true
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig { j_hz: None, locked: true, baseline: CascadeBaseline::Direct, max_photons: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    /// Half-width of the `Δ̃_cm` search window in units of ω_m.
    #[serde(default = "default_window")]
    pub window_omega_m: f64,
    #[serde(default = "default_search_points")]
    pub points: usize,
}

fn default_window() -> f64 {
    lambdacool_core::backaction::SEARCH_WINDOW
}

fn default_search_points() -> usize {
    601
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { window_omega_m: default_window(), points: default_search_points() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// EIT susceptibility versus `eit.delta_hz`.
    ChiEit,
    /// RIR susceptibility versus `rir.delta_hz`.
    ChiRir,
    /// Steady field of the atomic cavity (EIT) or medium (RIR).
    Field,
    /// Cooling figures of merit at each `cavity_m.detuning_hz`, hybrid and bare.
    Cooling,
    /// Optimum over `Δ̃_cm` of hybrid and bare system, with the improvement factor.
    Optimum,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::ChiEit => "chi_eit",
            Observable::ChiRir => "chi_rir",
            Observable::Field => "field",
            Observable::Cooling => "cooling",
            Observable::Optimum => "optimum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub path: String,
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Axis {
    pub fn validate(&self, name: &str) -> AppResult<()> {
        let at = |m: &str| AppError::validation(format!("sweep.{name}"), m);
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(at("start and stop must be finite"));
        }
        match self.n_points {
            0 => return Err(at("n_points must be at least 1")),
            1 if self.start != self.stop => return Err(at("a single-point axis needs start = stop")),
            1 => {}
            _ if self.start == self.stop => return Err(at("start and stop must differ")),
            _ => {}
        }
        if self.scale == Scale::Log && !(self.start * self.stop > 0.0) {
            return Err(at("a log axis needs start and stop of the same sign, both nonzero"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        if n == 1 {
            return vec![self.start];
        }
        let last = (n - 1) as f64;
        (0..n)
            .map(|k| {
                let t = k as f64 / last;
                let v = match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * t,
                    Scale::Log => {
                        let (a, b) = (self.start.abs().ln(), self.stop.abs().ln());
                        self.start.signum() * (a + (b - a) * t).exp()
                    }
                };
                // Pin the endpoints exactly.
                if k == 0 {
                    self.start
                } else if k == n - 1 {
                    self.stop
                } else {
                    v
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub observable: Observable,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    /// Extra dotted-path assignments applied to every point.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fixed: BTreeMap<String, Value>,
    /// Output CSV path used by `sweep` when `-o` is not given.
    pub output: Option<String>,
}

/// Parses configuration text into a TOML document.
pub fn parse_document(text: &str, source_name: &str) -> AppResult<Table> {
    text.parse::<Table>().map_err(|e| AppError::Parse { source_name: source_name.to_string(), message: e.to_string() })
}

/// Parses the value half of an override. Anything that is not a TOML value is
/// taken as a bare string, so `--sweep.observable cooling` works unquoted.
pub fn parse_override_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Sets `path` (dot separated) in `doc`, creating intermediate tables.
pub fn set_path(doc: &mut Table, path: &str, value: Value) -> AppResult<()> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(AppError::validation(path, "malformed parameter path"));
    }
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut table = doc;
    for (i, part) in parents.iter().enumerate() {
        let entry = table.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        table = match entry {
            Value::Table(t) => t,
            _ => return Err(AppError::validation(parts[..=i].join("."), "is a value, not a table")),
        };
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Reads a value by dotted path.
pub fn get_path<'a>(doc: &'a Table, path: &str) -> Option<&'a Value> {
    let mut parts = path.split('.');
    let mut v = doc.get(parts.next()?)?;
    for p in parts {
        v = v.as_table()?.get(p)?;
    }
    Some(v)
}

/// Removes a value by dotted path, returning it if present.
pub fn remove_path(doc: &mut Table, path: &str) -> Option<Value> {
    let (parents, last) = match path.rsplit_once('.') {
        Some((p, l)) => (Some(p), l),
        None => (None, path),
    };
    let table = match parents {
        None => doc,
        Some(p) => {
            let mut t = doc;
            for part in p.split('.') {
                t = t.get_mut(part)?.as_table_mut()?;
            }
            t
        }
    };
    table.remove(last)
}

/// Applies `path=value` override strings.
pub fn apply_overrides(doc: &mut Table, overrides: &[(String, String)]) -> AppResult<()> {
    for (path, raw) in overrides {
        set_path(doc, path, parse_override_value(raw))?;
    }
    Ok(())
}

/// Deserializes and validates a document.
pub fn resolve(doc: &Table) -> AppResult<RunConfig> {
    let cfg = RunConfig::deserialize(Value::Table(doc.clone()))
        .map_err(|e| AppError::validation("config", e.to_string().trim_end().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Loads a configuration file with overrides applied.
pub fn load_config(path: &std::path::Path, overrides: &[(String, String)]) -> AppResult<(RunConfig, Table)> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(format!("reading {}", path.display()), e))?;
    let mut doc = parse_document(&text, &path.display().to_string())?;
    apply_overrides(&mut doc, overrides)?;
    let cfg = resolve(&doc)?;
    Ok((cfg, doc))
}

fn core_err(block: &str) -> impl Fn(lambdacool_core::Error) -> AppError + '_ {
    move |e| AppError::validation(block, e.to_string())
}

fn hz(block: &str, field: &str, v: f64) -> AppResult<AngularFrequency> {
    AngularFrequency::from_hz(v).map_err(|_| AppError::validation(format!("{block}.{field}"), "value is not finite"))
}

/// Picks exactly one of the `_hz` / `_gamma_e` spellings of a quantity.
fn either(block: &str, name: &str, in_hz: Option<f64>, in_gamma_e: Option<f64>, gamma_e: AngularFrequency) -> AppResult<AngularFrequency> {
    match (in_hz, in_gamma_e) {
        (Some(v), None) => hz(block, &format!("{name}_hz"), v),
        (None, Some(k)) if k.is_finite() => Ok(gamma_e * k),
        (None, Some(_)) => Err(AppError::validation(format!("{block}.{name}_gamma_e"), "value is not finite")),
        (Some(_), Some(_)) => {
            Err(AppError::validation(format!("{block}.{name}"), format!("give only one of {name}_hz and {name}_gamma_e")))
        }
        (None, None) => Err(AppError::validation(format!("{block}.{name}"), format!("missing {name}_hz or {name}_gamma_e"))),
    }
}

impl CavityConfig {
    pub fn build(&self, block: &str) -> AppResult<OpticalCavityParams> {
        let kappa = hz(block, "kappa_hz", self.kappa_hz)?;
        let kappa_in = self.kappa_in_hz.map(|v| hz(block, "kappa_in_hz", v)).transpose()?;
        let detuning = hz(block, "detuning_hz", self.detuning_hz)?;
        let wavelength = self.wavelength_m.unwrap_or(DEFAULT_WAVELENGTH);
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(AppError::validation(format!("{block}.wavelength_m"), "must be > 0"));
        }
        let built = match (self.input_power_w, self.drive) {
            (Some(_), Some(_)) => {
                return Err(AppError::validation(block, "give only one of input_power_w and drive"));
            }
            (Some(p), None) => OpticalCavityParams::from_power(kappa, kappa_in, detuning, p, wavelength),
            (None, d) => OpticalCavityParams::with_drive(kappa, kappa_in, detuning, d.unwrap_or(0.0))
                .map(|c| OpticalCavityParams { drive_wavelength: wavelength, ..c }),
        };
        built.map_err(core_err(block))
    }
}

impl MechConfig {
    pub fn build(&self) -> AppResult<MechanicalParams> {
        MechanicalParams::new(
            hz("mech", "omega_m_hz", self.omega_m_hz)?,
            self.quality_factor,
            hz("mech", "g0_hz", self.g0_hz)?,
            self.bath_temperature_k,
            self.mass_kg,
        )
        .map_err(core_err("mech"))
    }
}

impl EitConfig {
    pub fn gamma_e(&self) -> AppResult<AngularFrequency> {
        hz("eit", "gamma_e_hz", self.gamma_e_hz.unwrap_or(DEFAULT_GAMMA_E_HZ))
    }

    pub fn build(&self) -> AppResult<EitMedium> {
        let ge = self.gamma_e()?;
        let params = EitMediumParams {
            n_atoms: self.n_atoms,
            n_ground: self.n_atoms - self.n_meta,
            n_meta: self.n_meta,
            rabi_control: either("eit", "rabi_control", self.rabi_control_hz, self.rabi_control_gamma_e, ge)?,
            rabi_single_atom: hz("eit", "rabi_single_atom_hz", self.rabi_single_atom_hz)?,
            gamma_e: ge,
            gamma_gm: match self.gamma_gm_hz {
                Some(v) => hz("eit", "gamma_gm_hz", v)?,
                None => default_gamma_gm(),
            },
            delta_a: either("eit", "delta_a", self.delta_a_hz, self.delta_a_gamma_e, ge)?,
            general_populations: self.general_populations,
        }
        .validate()
        .map_err(core_err("eit"))?;
        Ok(EitMedium { params, delta0: hz("eit", "delta_hz", self.delta_hz)?.get() })
    }
}

impl RirConfig {
    pub fn gamma_e(&self) -> AppResult<AngularFrequency> {
        hz("rir", "gamma_e_hz", self.gamma_e_hz.unwrap_or(DEFAULT_GAMMA_E_HZ))
    }

    pub fn kappa_a(&self) -> AppResult<AngularFrequency> {
        match (self.kappa_a_hz, self.medium_length_m) {
            (Some(k), None) => hz("rir", "kappa_a_hz", k),
            (None, Some(l)) if l > 0.0 && l.is_finite() => Ok(AngularFrequency::from_raw(SPEED_OF_LIGHT / l)),
            (None, Some(_)) => Err(AppError::validation("rir.medium_length_m", "must be > 0")),
            (Some(_), Some(_)) => Err(AppError::validation("rir", "give only one of kappa_a_hz and medium_length_m")),
            (None, None) => Err(AppError::validation("rir", "missing kappa_a_hz or medium_length_m")),
        }
    }

    pub fn params(&self) -> AppResult<RirMediumParams> {
        let ge = self.gamma_e()?;
        let gamma_coh = hz("rir", "gamma_coh_hz", self.gamma_coh_hz)?;
        RirMediumParams {
            n_atoms: self.n_atoms,
            rabi_control: either("rir", "rabi_control", self.rabi_control_hz, self.rabi_control_gamma_e, ge)?,
            rabi_single_atom: hz("rir", "rabi_single_atom_hz", self.rabi_single_atom_hz)?,
            delta_a: either("rir", "delta_a", self.delta_a_hz, self.delta_a_gamma_e, ge)?,
            omega_r: hz("rir", "omega_r_hz", self.omega_r_hz)?,
            gamma_coh,
            gamma_pop: match self.gamma_pop_hz {
                Some(v) => hz("rir", "gamma_pop_hz", v)?,
                None => gamma_coh / 10.0,
            },
            temperature: self.temperature_k,
            gamma_e: ge,
            kappa_a: self.kappa_a()?,
        }
        .validate()
        .map_err(core_err("rir"))
    }

    pub fn grid_spec(&self, params: &RirMediumParams) -> AppResult<GridSpec> {
        let mut spec = GridSpec::for_medium(params);
        if let Some(s) = self.grid_sigmas {
            if !(s > 0.0 && s.is_finite()) {
                return Err(AppError::validation("rir.grid_sigmas", "must be > 0"));
            }
            spec.p_max = s * thermal_sigma_p(params.temperature, params.omega_r);
        }
        if let Some(m) = self.grid_points_per_unit {
            if m == 0 {
                return Err(AppError::validation("rir.grid_points_per_unit", "must be >= 1"));
            }
            spec.points_per_unit = m;
        }
        Ok(spec)
    }

    pub fn build(&self) -> AppResult<RirMedium> {
        let params = self.params()?;
        let grid = thermal_distribution(params.temperature, params.omega_r, &self.grid_spec(&params)?).map_err(core_err("rir"))?;
        Ok(RirMedium { params, grid, delta0: hz("rir", "delta_hz", self.delta_hz)?.get() })
    }

    /// Drive amplitude into the medium mode, `η_a = sqrt(P κ_in / ħω)`.
    pub fn eta(&self) -> AppResult<f64> {
        let kappa_a = self.kappa_a()?;
        let kappa_in = match self.kappa_in_hz {
            Some(v) => hz("rir", "kappa_in_hz", v)?,
            None => kappa_a / 2.0,
        };
        lambdacool_core::model::drive_amplitude(self.input_power_w, kappa_in, self.wavelength_m.unwrap_or(DEFAULT_WAVELENGTH))
            .map_err(core_err("rir"))
    }
}

fn need<'a, T>(block: &'a Option<T>, name: &str, why: &str) -> AppResult<&'a T> {
    block.as_ref().ok_or_else(|| AppError::validation(name, format!("block [{name}] is required {why}")))
}

impl RunConfig {
    pub fn validate(&self) -> AppResult<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(AppError::validation("schema", format!("unsupported schema {}; expected {SCHEMA_VERSION}", self.schema)));
        }
        if let Some(s) = &self.sweep {
            s.axis1.validate("axis1")?;
            if let Some(a) = &s.axis2 {
                a.validate("axis2")?;
            }
        }
        if !(self.search.window_omega_m > 0.0) || self.search.points < 3 {
            return Err(AppError::validation("search", "window_omega_m must be > 0 and points >= 3"));
        }
        // Build every block that is present so physical violations surface at load time.
        if let Some(m) = &self.mech {
            m.build()?;
        }
        if let Some(c) = &self.cavity_m {
            c.build("cavity_m")?;
        }
        if let Some(c) = &self.cavity_a {
            c.build("cavity_a")?;
        }
        if let Some(e) = &self.eit {
            e.build()?;
        }
        if let Some(r) = &self.rir {
            r.params()?;
            r.eta()?;
        }
        Ok(())
    }

    pub fn mech(&self) -> AppResult<MechanicalParams> {
        need(&self.mech, "mech", "for cooling observables")?.build()
    }

    pub fn cavity_m(&self) -> AppResult<OpticalCavityParams> {
        need(&self.cavity_m, "cavity_m", "for cooling observables")?.build("cavity_m")
    }

    pub fn cavity_a(&self) -> AppResult<OpticalCavityParams> {
        need(&self.cavity_a, "cavity_a", "for the EIT cavity")?.build("cavity_a")
    }

    pub fn eit(&self) -> AppResult<EitMedium> {
        need(&self.eit, "eit", "for EIT observables")?.build()
    }

    pub fn rir_block(&self) -> AppResult<&RirConfig> {
        need(&self.rir, "rir", "for RIR observables")
    }

    pub fn rir(&self) -> AppResult<RirMedium> {
        self.rir_block()?.build()
    }

    fn max_photons(&self) -> Option<f64> {
        self.coupling.max_photons
    }

    /// Feedback system with the atomic cavity coupled (`hybrid`) or the
    /// optomechanical cavity alone.
    pub fn feedback_system(&self, hybrid: bool) -> AppResult<FeedbackSystem<EitMedium>> {
        let cavity_m = self.cavity_m()?;
        let mech = self.mech()?;
        let (cavity_a, medium, j) = if hybrid {
            let ca = self.cavity_a()?;
            let j = match self.coupling.j_hz {
                Some(v) => CouplingJ::new(hz("coupling", "j_hz", v)?),
                None => CouplingJ::feedback(ca.kappa_in, cavity_m.kappa_in),
            }
            .map_err(core_err("coupling"))?;
            (ca, Some(self.eit()?), j)
        } else {
            // The atomic cavity is irrelevant at J = 0; any valid one will do.
            (cavity_m, None, CouplingJ::ZERO)
        };
        let cavity_m = cavity_m.with_detuning(AngularFrequency::ZERO);
        Ok(FeedbackSystem { cavity_m, cavity_a, medium, j, mech, locked: self.coupling.locked, max_photons: self.max_photons() })
    }

    /// Cascade system. The hybrid routes the power of the `rir` block through
    /// the medium into the optomechanical cavity (`η_c = 0`); the baseline is
    /// chosen by `coupling.baseline`.
    pub fn cascade_system(&self, hybrid: bool) -> AppResult<CascadeSystem> {
        let cavity_m = self.cavity_m()?.with_detuning(AngularFrequency::ZERO);
        let mech = self.mech()?;
        let rir = self.rir_block()?;
        let kappa_a = rir.kappa_a()?;
        let coupled = || -> AppResult<CouplingJ> {
            match self.coupling.j_hz {
                Some(v) => CouplingJ::new(hz("coupling", "j_hz", v)?),
                None => CouplingJ::cascade(kappa_a, cavity_m.kappa),
            }
            .map_err(core_err("coupling"))
        };
        let base = CascadeSystem {
            cavity_m,
            medium: None,
            kappa_a,
            eta_a: rir.eta()?,
            eta_c: 0.0,
            j: CouplingJ::ZERO,
            mech,
            locked: self.coupling.locked,
            max_photons: self.max_photons(),
        };
        Ok(match (hybrid, self.coupling.baseline) {
            (true, _) => CascadeSystem { medium: Some(self.rir()?), j: coupled()?, ..base },
            (false, CascadeBaseline::AtomFree) => CascadeSystem { j: coupled()?, ..base },
            (false, CascadeBaseline::Direct) => CascadeSystem { eta_c: cavity_m.drive, ..base },
        })
    }
}

/// Flattens a document into sorted `path = value` pairs for metadata headers.
pub fn flatten(doc: &Table) -> Vec<(String, String)> {
    fn walk(prefix: &str, t: &Table, out: &mut Vec<(String, String)>) {
        for (k, v) in t {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                Value::Table(inner) => walk(&path, inner, out),
                Value::String(s) => out.push((path, s.clone())),
                other => out.push((path, other.to_string())),
            }
        }
    }
    let mut out = Vec::new();
    walk("", doc, &mut out);
    out.sort();
    out
}
