//! Observables evaluated at a single resolved configuration.
//!
//! Each observable has a fixed list of output columns; [`evaluate`] returns
//! one cell per column or the numerical error that prevented it.

use lambdacool_core::backaction::{minimize_n_min, CascadeSystem, CoolingResult, CoolingSystem, EitMedium, FeedbackSystem};
use lambdacool_core::eit::{chi_eit, locked_field, TwoPhotonDetuning};
use lambdacool_core::model::{effective_cavity_response, MechanicalParams, OpticalCavityParams};
use lambdacool_core::rir::chi_rir;
use lambdacool_core::scan::refine_maximum;
use lambdacool_core::units::{AngularFrequency, TWO_PI};
use lambdacool_core::{Complex64, Error};

use crate::config::{Observable, RunConfig, Scheme};
use crate::error::{AppError, AppResult};

/// One output value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Flag(bool),
    /// Not defined at this point (e.g. `n_min` of an unstable point).
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Failure at one point: a stable machine-readable kind plus the message.
#[derive(Debug, Clone, PartialEq)]
pub struct PointError {
    pub kind: &'static str,
    pub message: String,
}

impl From<Error> for PointError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::SingularResponse { .. } => "singular_response",
            Error::ParametricInstability { .. } => "parametric_instability",
            Error::DegenerateDenominator => "degenerate_denominator",
            Error::GridTooCoarse => "grid_too_coarse",
            Error::GridTooNarrow { .. } => "grid_too_narrow",
            Error::NoConvergence { .. } | Error::StepSizeUnderflow { .. } => "no_convergence",
            _ => "invalid_value",
        };
        PointError { kind, message: e.to_string() }
    }
}

const CHI: &[&str] = &["chi_re_hz", "chi_im_hz"];
const FIELD: &[&str] = &["field_re", "field_im", "field_abs", "field_norm", "bare_field_norm", "chi_re_hz", "chi_im_hz"];
const COOLING: &[&str] = &[
    "delta_over_omega_m",
    "delta_two_photon_hz",
    "field_re",
    "field_im",
    "field_abs",
    "intensity",
    "gamma_opt_hz",
    "gamma_stokes_hz",
    "gamma_anti_stokes_hz",
    "k_opt_per_mass",
    "k_opt_n_per_m",
    "n_min",
    "stable",
    "displacement_zpt",
    "bare_field_abs",
    "bare_intensity",
    "bare_gamma_opt_hz",
    "bare_n_min",
    "bare_stable",
];
const OPTIMUM: &[&str] = &[
    "xi",
    "n_min_hybrid",
    "delta_opt_hybrid_over_omega_m",
    "gamma_opt_at_opt_hz",
    "n_min_bare",
    "delta_opt_bare_over_omega_m",
    "gamma_opt_max_hz",
    "delta_gamma_max_over_omega_m",
    "ground_state",
];

pub fn columns(observable: Observable) -> &'static [&'static str] {
    match observable {
        Observable::ChiEit | Observable::ChiRir => CHI,
        Observable::Field => FIELD,
        Observable::Cooling => COOLING,
        Observable::Optimum => OPTIMUM,
    }
}

/// The configuration key each observable's natural variable lives at.
pub fn natural_axis(observable: Observable, scheme: Scheme) -> &'static str {
    match (observable, scheme) {
        (Observable::ChiEit, _) => "eit.delta_hz",
        (Observable::ChiRir, _) => "rir.delta_hz",
        (Observable::Field, Scheme::EitFeedback) => "cavity_a.detuning_hz",
        (Observable::Field, Scheme::RirCascade) => "rir.delta_hz",
        (Observable::Field, Scheme::Bare) | (Observable::Cooling, _) => "cavity_m.detuning_hz",
        (Observable::Optimum, _) => "cavity_m.kappa_hz",
    }
}

/// Checks that the blocks an observable needs are present and valid.
pub fn check_requirements(cfg: &RunConfig, observable: Observable) -> AppResult<()> {
    match observable {
        Observable::ChiEit => cfg.eit().map(drop),
        Observable::ChiRir => cfg.rir().map(drop),
        Observable::Field => match cfg.scheme {
            Scheme::EitFeedback => cfg.cavity_a().and(cfg.eit()).map(drop),
            Scheme::RirCascade => cfg.rir().map(drop),
            Scheme::Bare => cfg.cavity_m().map(drop),
        },
        Observable::Cooling | Observable::Optimum => systems(cfg).map(drop),
    }
}

/// Hybrid or bare system of either topology.
pub enum System {
    Feedback(FeedbackSystem<EitMedium>),
    Cascade(CascadeSystem),
}

impl CoolingSystem for System {
    fn evaluate(&self, delta_cm_tilde: f64) -> lambdacool_core::Result<CoolingResult> {
        match self {
            System::Feedback(s) => s.evaluate(delta_cm_tilde),
            System::Cascade(s) => s.evaluate(delta_cm_tilde),
        }
    }

    fn mechanics(&self) -> &MechanicalParams {
        match self {
            System::Feedback(s) => s.mechanics(),
            System::Cascade(s) => s.mechanics(),
        }
    }
}

impl System {
    /// Two-photon detuning of the medium at the carrier for a given `Δ̃_cm`.
    pub fn carrier_delta(&self, delta_cm_tilde: f64) -> lambdacool_core::Result<f64> {
        Ok(match self {
            System::Feedback(s) => s.operating_point(delta_cm_tilde)?.0.delta_two_photon.get(),
            System::Cascade(s) => s.operating_point(delta_cm_tilde)?.0.delta_two_photon.get(),
        })
    }
}

/// `(hybrid, bare)` systems for the configured scheme. For the bare scheme
/// both are the optomechanical cavity alone.
pub fn systems(cfg: &RunConfig) -> AppResult<(System, System)> {
    Ok(match cfg.scheme {
        Scheme::EitFeedback => (System::Feedback(cfg.feedback_system(true)?), System::Feedback(cfg.feedback_system(false)?)),
        Scheme::RirCascade => (System::Cascade(cfg.cascade_system(true)?), System::Cascade(cfg.cascade_system(false)?)),
        Scheme::Bare => (System::Feedback(cfg.feedback_system(false)?), System::Feedback(cfg.feedback_system(false)?)),
    })
}

fn to_hz(x: AngularFrequency) -> f64 {
    x.get() / TWO_PI
}

/// Evaluates `observable` at the configuration's current parameter values.
///
/// Configuration problems are returned as the outer error; numerical problems
/// at this point as the inner one.
pub fn evaluate(cfg: &RunConfig, observable: Observable) -> AppResult<Result<Vec<Cell>, PointError>> {
    let row = evaluate_raw(cfg, observable)?;
    Ok(row.and_then(|cells| match cells.iter().position(|c| matches!(c, Cell::Num(v) if !v.is_finite())) {
        None => Ok(cells),
        Some(k) => Err(PointError {
            kind: "non_finite",
            message: format!("{} is not finite (overflow or division by zero)", columns(observable)[k]),
        }),
    }))
}

fn evaluate_raw(cfg: &RunConfig, observable: Observable) -> AppResult<Result<Vec<Cell>, PointError>> {
    match observable {
        Observable::ChiEit => {
            let m = cfg.eit()?;
            Ok(TwoPhotonDetuning::new(m.delta0)
                .and_then(|d| chi_eit(&m.params, d))
                .map(|chi| vec![(chi.re / TWO_PI).into(), (chi.im / TWO_PI).into()])
                .map_err(PointError::from))
        }
        Observable::ChiRir => {
            let m = cfg.rir()?;
            Ok(AngularFrequency::new(m.delta0)
                .map(|d| {
                    let chi = chi_rir(&m.params, &m.grid, d);
                    vec![(chi.re / TWO_PI).into(), (chi.im / TWO_PI).into()]
                })
                .map_err(PointError::from))
        }
        Observable::Field => field(cfg),
        Observable::Cooling => cooling(cfg),
        Observable::Optimum => optimum(cfg),
    }
}

/// Field with unit drive, the actual drive, and the atom-free response.
fn field_row(unit: Complex64, drive: f64, kappa: f64, detuning: f64, chi: Complex64) -> Vec<Cell> {
    let a = unit * drive;
    let bare = (kappa / 2.0) / Complex64::new(kappa / 2.0, -detuning).norm();
    vec![
        a.re.into(),
        a.im.into(),
        a.norm().into(),
        (unit.norm() * kappa / 2.0).into(),
        bare.into(),
        (chi.re / TWO_PI).into(),
        (chi.im / TWO_PI).into(),
    ]
}

fn field(cfg: &RunConfig) -> AppResult<Result<Vec<Cell>, PointError>> {
    match cfg.scheme {
        Scheme::EitFeedback => {
            let cavity = cfg.cavity_a()?;
            let m = cfg.eit()?;
            let unit = OpticalCavityParams { drive: 1.0, ..cavity };
            let x = cavity.detuning.get();
            let run = || -> lambdacool_core::Result<Vec<Cell>> {
                let a = locked_field(&unit, &m.params, x, m.delta0)?;
                let chi = chi_eit(&m.params, TwoPhotonDetuning::new(x + m.delta0)?)?;
                Ok(field_row(a, cavity.drive, cavity.kappa.get(), x, chi.to_complex()))
            };
            Ok(run().map_err(PointError::from))
        }
        Scheme::RirCascade => {
            let block = cfg.rir_block()?;
            let m = cfg.rir()?;
            let eta = block.eta()?;
            let detuning = AngularFrequency::from_hz(block.cavity_detuning_hz)
                .map_err(|_| AppError::validation("rir.cavity_detuning_hz", "value is not finite"))?;
            let run = || -> lambdacool_core::Result<Vec<Cell>> {
                let chi = chi_rir(&m.params, &m.grid, AngularFrequency::new(m.delta0)?);
                let a = effective_cavity_response(detuning, m.params.kappa_a, chi, 1.0)?;
                Ok(field_row(a, eta, m.params.kappa_a.get(), detuning.get(), chi.to_complex()))
            };
            Ok(run().map_err(PointError::from))
        }
        Scheme::Bare => {
            let c = cfg.cavity_m()?;
            let zero = lambdacool_core::model::ComplexSusceptibility::ZERO;
            Ok(effective_cavity_response(c.detuning, c.kappa, zero, 1.0)
                .map(|a| field_row(a, c.drive, c.kappa.get(), c.detuning.get(), Complex64::new(0.0, 0.0)))
                .map_err(PointError::from))
        }
    }
}

fn cooling(cfg: &RunConfig) -> AppResult<Result<Vec<Cell>, PointError>> {
    let (hybrid, bare) = systems(cfg)?;
    let x = cfg.cavity_m()?.detuning.get();
    let w = hybrid.mechanics().omega_m.get();
    let run = || -> lambdacool_core::Result<Vec<Cell>> {
        let h = hybrid.evaluate(x)?;
        let b = bare.evaluate(x)?;
        Ok(vec![
            (x / w).into(),
            (hybrid.carrier_delta(x)? / TWO_PI).into(),
            h.field_c.re.into(),
            h.field_c.im.into(),
            h.field_c.norm().into(),
            h.field_c.norm_sqr().into(),
            to_hz(h.gamma_opt).into(),
            to_hz(h.gamma_stokes).into(),
            to_hz(h.gamma_anti_stokes).into(),
            h.k_opt.per_mass.into(),
            h.k_opt.absolute.into(),
            h.n_min.into(),
            h.stable.into(),
            h.displacement_zpt.into(),
            b.field_c.norm().into(),
            b.field_c.norm_sqr().into(),
            to_hz(b.gamma_opt).into(),
            b.n_min.into(),
            b.stable.into(),
        ])
    };
    Ok(run().map_err(PointError::from))
}

fn optimum(cfg: &RunConfig) -> AppResult<Result<Vec<Cell>, PointError>> {
    let (hybrid, bare) = systems(cfg)?;
    let window = cfg.search.window_omega_m;
    let n = cfg.search.points;
    let w = hybrid.mechanics().omega_m.get();
    let run = || -> lambdacool_core::Result<Vec<Cell>> {
        let h = minimize_n_min(&hybrid, window, n)?;
        let b = minimize_n_min(&bare, window, n)?;
        let nh = h.result.n_min.unwrap_or(f64::NAN);
        let nb = b.result.n_min.unwrap_or(f64::NAN);
        let xi = lambdacool_core::backaction::improvement_factor(nb, nh)?;
        let damping = |x: f64| hybrid.evaluate(x).map(|r| r.gamma_opt.get()).unwrap_or(f64::NAN);
        let x_max = refine_maximum(damping, -window * w, window * w, n, 1e-4 * w);
        let g_max = hybrid.evaluate(x_max)?.gamma_opt;
        Ok(vec![
            xi.into(),
            nh.into(),
            (h.delta_cm_tilde.get() / w).into(),
            to_hz(h.result.gamma_opt).into(),
            nb.into(),
            (b.delta_cm_tilde.get() / w).into(),
            to_hz(g_max).into(),
            (x_max / w).into(),
            (nh < 1.0).into(),
        ])
    };
    Ok(run().map_err(PointError::from))
}
