//! `oracle-check`: compares the closed-form steady states with time-domain
//! integration at random parameter points.
//!
//! EIT points draw the control Rabi frequency and the two-photon detuning
//! around the Stark-shifted resonance, with a weak drive; the integrated
//! cavity field must match the closed form. RIR points draw the control Rabi
//! frequency, the detuning and a weak field; the susceptibility contracted
//! from the integrated coherences must match the thermal sum on the same grid.

use std::io::Write;
use std::path::{Path, PathBuf};

use lambdacool_core::eit::{eit_cavity_field, EitMediumParams, TwoPhotonDetuning};
use lambdacool_core::model::OpticalCavityParams;
use lambdacool_core::oracle::{integrate_eit, integrate_rir, EitState, OracleSettings, RirState};
use lambdacool_core::rir::{chi_rir, MomentumGrid, RirMediumParams};
use lambdacool_core::units::{AngularFrequency, TWO_PI};
use lambdacool_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use toml::{Table, Value};

use crate::config;
use crate::error::{AppError, AppResult};
use crate::output::number;
use crate::presets;

/// Default relative agreement required between oracle and closed form.
pub const TOLERANCE: f64 = 1e-6;
pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_POINTS: usize = 20;
/// Drive amplitude of EIT points, weak enough for linear response.
const EIT_DRIVE: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub seed: u64,
    pub points: usize,
    /// Relative agreement required at every point.
    pub tolerance: f64,
    pub overrides: Vec<(String, String)>,
    pub dump_trajectory: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            seed: DEFAULT_SEED,
            points: DEFAULT_POINTS,
            tolerance: TOLERANCE,
            overrides: Vec::new(),
            dump_trajectory: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Eit,
    Rir,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Eit => "eit",
            Kind::Rir => "rir",
        }
    }
}

/// Outcome at one random point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCheck {
    pub kind: Kind,
    pub index: usize,
    /// Drawn parameters, for the report.
    pub params: Vec<(&'static str, f64)>,
    pub oracle: Complex64,
    pub closed_form: Complex64,
    /// Relative error, or the error message if either side failed.
    pub outcome: Result<f64, String>,
    pub tolerance: f64,
}

impl PointCheck {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Ok(e) if e <= self.tolerance)
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={}", short(*v))).collect();
        let detail = match &self.outcome {
            Ok(e) => format!("rel_err={e:.3e}"),
            Err(m) => format!("error: {m}"),
        };
        format!("{verdict} {} #{:02} {} {detail}", self.kind.name(), self.index, params.join(" "))
    }
}

fn short(v: f64) -> String {
    format!("{v:.6e}")
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub points: Vec<PointCheck>,
    pub seed: u64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn failed(&self) -> usize {
        self.points.iter().filter(|p| !p.passed()).count()
    }

    pub fn into_result(self) -> AppResult<Self> {
        match self.failed() {
            0 => Ok(self),
            failed => Err(AppError::OracleCheck { failed, total: self.points.len() }),
        }
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

type Overrides = Vec<(String, String)>;

fn split_overrides(overrides: &[(String, String)]) -> AppResult<(Overrides, Overrides)> {
    let (mut eit, mut rir) = (Vec::new(), Vec::new());
    for (path, value) in overrides {
        match path.split('.').next() {
            Some("eit") | Some("cavity_a") => eit.push((path.clone(), value.clone())),
            Some("rir") => rir.push((path.clone(), value.clone())),
            _ => return Err(AppError::validation(path, "oracle-check accepts only eit.*, cavity_a.* and rir.* overrides")),
        }
    }
    Ok((eit, rir))
}

fn base(preset: &str, fixed: &[(&str, Value)], overrides: &[(String, String)]) -> AppResult<config::RunConfig> {
    let mut doc: Table = presets::document(preset)?;
    config::remove_path(&mut doc, "sweep");
    for (path, value) in fixed {
        config::set_path(&mut doc, path, value.clone())?;
    }
    config::apply_overrides(&mut doc, overrides)?;
    config::resolve(&doc)
}

/// Parameters of one EIT check point.
#[derive(Debug, Clone, Copy)]
struct EitPoint {
    omega_over_gamma: f64,
    /// Two-photon detuning, equal to the cavity detuning (rad/s).
    x: f64,
}

/// Parameters of one RIR check point.
#[derive(Debug, Clone, Copy)]
struct RirPoint {
    omega_over_gamma: f64,
    delta: f64,
    a: Complex64,
}

fn eit_point(
    index: usize,
    p: EitPoint,
    medium: &EitMediumParams,
    kappa: AngularFrequency,
    tolerance: f64,
    dump: Option<&Path>,
) -> AppResult<PointCheck> {
    let m = medium.with_rabi_control(medium.gamma_e * p.omega_over_gamma);
    let params = vec![("omega_over_gamma_e", p.omega_over_gamma), ("delta_hz", p.x / TWO_PI)];
    let mut check = PointCheck {
        kind: Kind::Eit,
        index,
        params,
        oracle: Complex64::default(),
        closed_form: Complex64::default(),
        outcome: Err(String::new()),
        tolerance,
    };
    let mut trajectory = None;
    let outcome = (|| -> lambdacool_core::Result<f64> {
        let cavity = OpticalCavityParams::with_drive(kappa, None, AngularFrequency::new(p.x)?, EIT_DRIVE)?;
        let d = TwoPhotonDetuning::new(p.x)?;
        let run = integrate_eit(&cavity, &m, d, &EitState::empty(&m), &OracleSettings::eit_default(), dump.is_some())?;
        check.closed_form = eit_cavity_field(&cavity, &m, d)?;
        check.oracle = run.steady.a;
        if dump.is_some() {
            let mut s = String::from("t_s,a_re,a_im,sigma_ge_re,sigma_ge_im,sigma_gm_re,sigma_gm_im,sigma_em_re,sigma_em_im\n");
            for (t, y) in &run.trajectory {
                let v = [*t, y.a.re, y.a.im, y.sigma_ge.re, y.sigma_ge.im, y.sigma_gm.re, y.sigma_gm.im, y.sigma_em.re, y.sigma_em.im];
                s.push_str(&v.iter().map(|x| number(*x)).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            trajectory = Some(s);
        }
        Ok(rel(check.oracle, check.closed_form))
    })();
    check.outcome = outcome.map_err(|e| e.to_string());
    if let (Some(dir), Some(text)) = (dump, trajectory) {
        write_dump(dir, &format!("eit_{index:02}.csv"), &text)?;
    }
    Ok(check)
}

fn rir_point(
    index: usize,
    p: RirPoint,
    medium: &RirMediumParams,
    grid: &MomentumGrid,
    tolerance: f64,
    dump: Option<&Path>,
) -> AppResult<PointCheck> {
    let m = medium.with_rabi_control(medium.gamma_e * p.omega_over_gamma);
    let params = vec![("omega_over_gamma_e", p.omega_over_gamma), ("delta_hz", p.delta / TWO_PI), ("a_re", p.a.re), ("a_im", p.a.im)];
    let mut check = PointCheck {
        kind: Kind::Rir,
        index,
        params,
        oracle: Complex64::default(),
        closed_form: Complex64::default(),
        outcome: Err(String::new()),
        tolerance,
    };
    let mut trajectory = None;
    let outcome = (|| -> lambdacool_core::Result<f64> {
        let d = AngularFrequency::new(p.delta)?;
        let run = integrate_rir(&m, grid, d, &RirState::thermal(&m, grid, p.a), &OracleSettings::rir_default(), dump.is_some())?;
        check.oracle = run.chi.to_complex();
        check.closed_form = chi_rir(&m, grid, d).to_complex();
        if dump.is_some() {
            let mut s = String::from("t_s,chi_re_hz,chi_im_hz,total_population\n");
            for (t, chi, pop) in &run.trajectory {
                let v = [*t, chi.re / TWO_PI, chi.im / TWO_PI, *pop];
                s.push_str(&v.iter().map(|x| number(*x)).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            trajectory = Some(s);
        }
        Ok(rel(check.oracle, check.closed_form))
    })();
    check.outcome = outcome.map_err(|e| e.to_string());
    if let (Some(dir), Some(text)) = (dump, trajectory) {
        write_dump(dir, &format!("rir_{index:02}.csv"), &text)?;
    }
    Ok(check)
}

fn write_dump(dir: &Path, name: &str, text: &str) -> AppResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| AppError::io(format!("writing {}", path.display()), e))
}

/// Runs all check points. Points are drawn serially from the seed, then
/// integrated in parallel; the report is in draw order.
pub fn run(opts: &CheckOptions) -> AppResult<CheckReport> {
    if !(opts.tolerance > 0.0 && opts.tolerance.is_finite()) {
        return Err(AppError::validation("tolerance", "must be a positive number"));
    }
    let (eit_over, rir_over) = split_overrides(&opts.overrides)?;
    let eit_cfg = base("fig4", &[], &eit_over)?;
    let rir_cfg = base("fig5", &[("rir.grid_sigmas", Value::Float(6.0))], &rir_over)?;
    let eit_medium = eit_cfg.eit()?.params;
    let kappa = eit_cfg.cavity_a()?.kappa;
    let rir = rir_cfg.rir()?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let eit_points: Vec<EitPoint> = (0..opts.points)
        .map(|_| {
            let omega_over_gamma = rng.gen_range(3.0..7.0);
            let shift = (eit_medium.gamma_e.get() * omega_over_gamma).powi(2) / eit_medium.delta_a.get();
            EitPoint { omega_over_gamma, x: rng.gen_range(-2.0..2.0) * shift }
        })
        .collect();
    let rir_points: Vec<RirPoint> = (0..opts.points)
        .map(|_| RirPoint {
            omega_over_gamma: rng.gen_range(1.8..2.6),
            delta: TWO_PI * rng.gen_range(-900e3..900e3),
            a: Complex64::new(rng.gen_range(1e-7..1e-6), rng.gen_range(-1e-6..1e-6)),
        })
        .collect();

    if let Some(dir) = &opts.dump_trajectory {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(format!("creating {}", dir.display()), e))?;
    }
    let dump = opts.dump_trajectory.as_deref();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| AppError::validation(crate::sweep::THREADS_ENV, e.to_string()))?;
    let (eit, rir_checks) = pool.install(|| {
        let eit: AppResult<Vec<_>> =
            eit_points.par_iter().enumerate().map(|(i, p)| eit_point(i, *p, &eit_medium, kappa, opts.tolerance, dump)).collect();
        let rir_checks: AppResult<Vec<_>> =
            rir_points.par_iter().enumerate().map(|(i, p)| rir_point(i, *p, &rir.params, &rir.grid, opts.tolerance, dump)).collect();
        (eit, rir_checks)
    });
    let mut points = eit?;
    points.extend(rir_checks?);
    Ok(CheckReport { points, seed: opts.seed, tolerance: opts.tolerance })
}

/// Prints the report lines and a summary.
pub fn print<W: Write>(mut w: W, report: &CheckReport) -> std::io::Result<()> {
    writeln!(w, "# oracle-check seed={} tolerance={:e}", report.seed, report.tolerance)?;
    for p in &report.points {
        writeln!(w, "{}", p.line())?;
    }
    writeln!(w, "# {} of {} points passed", report.points.len() - report.failed(), report.points.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn few_points_pass_and_are_reproducible() {
        let opts = CheckOptions { points: 2, ..Default::default() };
        let a = run(&opts).unwrap();
        assert_eq!(a.points.len(), 4);
        assert_eq!(a.failed(), 0, "{:#?}", a.points);
        let b = run(&CheckOptions { threads: Some(1), ..opts }).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn foreign_override_is_rejected() {
        let opts = CheckOptions { points: 1, overrides: vec![("mech.omega_m_hz".into(), "1".into())], ..Default::default() };
        assert_eq!(run(&opts).unwrap_err().exit_code(), crate::error::exit::CONFIG);
    }

    #[test]
    fn trajectories_are_dumped() {
        let dir = tempfile::tempdir().unwrap();
        let opts = CheckOptions { points: 1, dump_trajectory: Some(dir.path().to_path_buf()), ..Default::default() };
        run(&opts).unwrap();
        let eit = std::fs::read_to_string(dir.path().join("eit_00.csv")).unwrap();
        assert!(eit.starts_with("t_s,a_re"));
        assert!(eit.lines().count() > 2);
        assert!(dir.path().join("rir_00.csv").exists());
    }
}
