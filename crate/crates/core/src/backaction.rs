//! Dynamical back-action on the mechanical mode with an atomic medium coupled
//! in feedback or cascade.
//!
//! All operating points are parameterized by the shifted optomechanical
//! detuning `Δ̃_cm`, swept directly rather than solved self-consistently; the
//! implied static displacement is reported so self-consistency can be checked.
//!
//! Frequency shifts of the coupling beam enter the media through [`Medium`]:
//! shifting the beam by `s` moves the EIT medium's `δ` and `Δ_a` by `s`, and
//! the RIR medium's `δ` by `s`. The sideband susceptibilities `χ^(±)` are the
//! carrier value shifted by `±ω_m`. In a *locked* sweep the drive frequency
//! itself is scanned, so `Δ_ca`, `δ` (and the EIT `Δ_a`) follow `Δ̃_cm`.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::eit::{chi_eit, EitMediumParams, TwoPhotonDetuning};
use crate::model::{ComplexSusceptibility, CouplingJ, MechanicalParams, OpticalCavityParams, DEFAULT_SINGULAR_EPS};
use crate::rir::{chi_rir, MomentumGrid, RirMediumParams};
use crate::scan::{golden_maximum, linspace};
use crate::units::AngularFrequency;
use crate::{Error, Result};

/// How the atomic system is connected to the optomechanical cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Feedback,
    Cascade,
    /// Optomechanical cavity alone (`J = 0`).
    Bare,
}

/// One point of a detuning sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Shifted detuning `Δ̃_cm = Δ_cm − g_0⟨x⟩`.
    pub delta_cm_tilde: AngularFrequency,
    /// Atomic-cavity detuning at the carrier.
    pub delta_ca: AngularFrequency,
    /// Medium two-photon detuning at the carrier.
    pub delta_two_photon: AngularFrequency,
    pub topology: Topology,
}

/// Sideband denominators `A^(±)` and the susceptibilities that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandResponse {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub chi_plus: ComplexSusceptibility,
    pub chi_minus: ComplexSusceptibility,
}

/// Optical spring: `k_opt/m` always; `k_opt` in N/m when the mass is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringShift {
    /// `k_opt / m` in rad²/s².
    pub per_mass: f64,
    pub absolute: Option<f64>,
}

/// Back-action rates and occupation at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingResult {
    pub gamma_opt: AngularFrequency,
    pub gamma_stokes: AngularFrequency,
    pub gamma_anti_stokes: AngularFrequency,
    pub k_opt: SpringShift,
    /// Minimum phonon number; `None` when unstable.
    pub n_min: Option<f64>,
    /// Improvement factor, filled in by sweeps that compare against a baseline.
    pub xi: Option<f64>,
    /// `Γ_opt + γ_m > 0` and the photon number is below the configured cap.
    pub stable: bool,
    /// Steady intracavity amplitude ⟨c⟩.
    pub field_c: Complex64,
    /// Linearized coupling `g = g_0 |⟨c⟩|`.
    pub g_linear: AngularFrequency,
    /// Static displacement implied by ⟨c⟩, in units of x_zpt:
    /// `⟨x⟩ = −2 g_0 |⟨c⟩|² ω_m / (ω_m² + γ_m²/4)`.
    pub displacement_zpt: f64,
}

fn checked_inverse(den: Complex64, scale: f64) -> Result<Complex64> {
    let modulus = den.norm();
    if !(modulus > DEFAULT_SINGULAR_EPS * scale) {
        return Err(Error::SingularResponse { modulus });
    }
    Ok(den.inv())
}

/// Feedback self-energy `F = −J² / (i(Δ_ca + χ) − κ_ca/2)`.
fn feedback_self_energy(kappa_ca: f64, delta_ca: f64, chi: ComplexSusceptibility, j: CouplingJ) -> Result<Complex64> {
    let i = Complex64::i();
    let den = i * (delta_ca + chi.to_complex()) - kappa_ca / 2.0;
    let scale = delta_ca.abs() + kappa_ca / 2.0 + chi.to_complex().norm();
    Ok(-j.get().powi(2) * checked_inverse(den, scale)?)
}

/// Steady optomechanical field with the atomic cavity in feedback:
/// `⟨c⟩ = η_c / (−iΔ̃_cm − J²/(i(Δ_ca + χ) − κ_ca/2) + κ_cm/2)`.
pub fn feedback_steady_field(
    cavity_m: &OpticalCavityParams,
    cavity_a: &OpticalCavityParams,
    chi: ComplexSusceptibility,
    j: CouplingJ,
    point: &OperatingPoint,
) -> Result<Complex64> {
    let j = if point.topology == Topology::Bare { CouplingJ::ZERO } else { j };
    let f = feedback_self_energy(cavity_a.kappa.get(), point.delta_ca.get(), chi, j)?;
    let dt = point.delta_cm_tilde.get();
    let den = -Complex64::i() * dt + f + cavity_m.kappa.get() / 2.0;
    let scale = dt.abs() + f.norm() + cavity_m.kappa.get() / 2.0;
    Ok(cavity_m.drive * checked_inverse(den, scale)?)
}

/// Sideband denominators
/// `A^(±) = −iΔ̃_cm − J²/(i(Δ_ca ± ω_m + χ^(±)) − κ_ca/2) + κ_cm/2`.
pub fn feedback_sidebands(
    cavity_m: &OpticalCavityParams,
    cavity_a: &OpticalCavityParams,
    chi_plus: ComplexSusceptibility,
    chi_minus: ComplexSusceptibility,
    j: CouplingJ,
    point: &OperatingPoint,
    omega_m: AngularFrequency,
) -> Result<SidebandResponse> {
    let j = if point.topology == Topology::Bare { CouplingJ::ZERO } else { j };
    let base = Complex64::new(cavity_m.kappa.get() / 2.0, -point.delta_cm_tilde.get());
    let kca = cavity_a.kappa.get();
    let dca = point.delta_ca.get();
    let w = omega_m.get();
    Ok(SidebandResponse {
        a_plus: base + feedback_self_energy(kca, dca + w, chi_plus, j)?,
        a_minus: base + feedback_self_energy(kca, dca - w, chi_minus, j)?,
        chi_plus,
        chi_minus,
    })
}

/// Static displacement (units of x_zpt) implied by an intracavity amplitude.
pub fn implied_displacement(mech: &MechanicalParams, field_c: Complex64) -> f64 {
    let w = mech.omega_m.get();
    let g = mech.gamma_mech.get();
    -2.0 * mech.g0.get() * field_c.norm_sqr() * w / (w * w + g * g / 4.0)
}

/// Assembles a result from the two sideband weights
/// `Γ_aS = 2g² Re w₊`, `Γ_S = 2g² Re w₋`, `k_opt/m = 2ω_m g² Im(w₊ − w₋)`.
fn assemble(mech: &MechanicalParams, field_c: Complex64, w_plus: Complex64, w_minus: Complex64) -> Result<CoolingResult> {
    let g2 = mech.g0.get().powi(2) * field_c.norm_sqr();
    let anti_stokes = 2.0 * g2 * w_plus.re;
    let stokes = 2.0 * g2 * w_minus.re;
    let gamma_opt = anti_stokes - stokes;
    let per_mass = 2.0 * mech.omega_m.get() * g2 * (w_plus - w_minus).im;
    let stable = gamma_opt + mech.gamma_mech.get() > 0.0;
    let n = if stable { Some(n_min(gamma_opt, stokes, mech)?) } else { None };
    Ok(CoolingResult {
        gamma_opt: AngularFrequency::new(gamma_opt)?,
        gamma_stokes: AngularFrequency::new(stokes)?,
        gamma_anti_stokes: AngularFrequency::new(anti_stokes)?,
        k_opt: SpringShift { per_mass, absolute: mech.mass.map(|m| m * per_mass) },
        n_min: n,
        xi: None,
        stable,
        field_c,
        g_linear: AngularFrequency::new(g2.sqrt())?,
        displacement_zpt: implied_displacement(mech, field_c),
    })
}

/// Feedback-topology rates:
/// `Γ_opt = 2g² Re[1/(A⁺ − iω_m) − 1/(A⁻* − iω_m)]`, split into anti-Stokes
/// and Stokes parts, with `g² = g_0²|⟨c⟩|²`.
pub fn feedback_cooling(mech: &MechanicalParams, sidebands: &SidebandResponse, field_c: Complex64) -> Result<CoolingResult> {
    let iw = Complex64::new(0.0, mech.omega_m.get());
    let w_plus = checked_inverse(sidebands.a_plus - iw, sidebands.a_plus.norm() + iw.im)?;
    let w_minus = checked_inverse(sidebands.a_minus.conj() - iw, sidebands.a_minus.norm() + iw.im)?;
    assemble(mech, field_c, w_plus, w_minus)
}

/// Effective cascade drive of the optomechanical cavity, `η_c − iJ⟨a_p⟩`.
pub fn cascade_drive(medium_field: Complex64, j: CouplingJ, eta_c: f64) -> Complex64 {
    Complex64::new(eta_c, 0.0) - Complex64::i() * j.get() * medium_field
}

/// Cascade-topology rates: `⟨c⟩ = drive/(−iΔ̃_cm + κ_cm/2)` and the bare
/// Lorentzian sideband weights at `Δ̃_cm ± ω_m`.
pub fn cascade_cooling(
    mech: &MechanicalParams,
    cavity_m: &OpticalCavityParams,
    drive: Complex64,
    point: &OperatingPoint,
) -> Result<CoolingResult> {
    let half = cavity_m.kappa.get() / 2.0;
    let dt = point.delta_cm_tilde.get();
    let w = mech.omega_m.get();
    let field_c = drive * checked_inverse(Complex64::new(half, -dt), dt.abs() + half)?;
    let w_plus = Complex64::new(half, -(dt + w)).inv();
    let w_minus = Complex64::new(half, dt - w).inv();
    assemble(mech, field_c, w_plus, w_minus)
}

/// Minimum phonon number `(Γ_S + γ_m n_bath)/(Γ_opt + γ_m)`.
pub fn n_min(gamma_opt: f64, gamma_stokes: f64, mech: &MechanicalParams) -> Result<f64> {
    let total = gamma_opt + mech.gamma_mech.get();
    if !(total > 0.0) {
        return Err(Error::ParametricInstability { total_damping: total });
    }
    Ok((gamma_stokes + mech.gamma_mech.get() * mech.n_bath) / total)
}

/// Improvement factor `ξ = n_min(bare) / n_min(hybrid)`.
pub fn improvement_factor(n_min_bare: f64, n_min_hybrid: f64) -> Result<f64> {
    if !(n_min_bare > 0.0 && n_min_hybrid > 0.0 && n_min_bare.is_finite() && n_min_hybrid.is_finite()) {
        return Err(Error::OutOfRange { field: "n_min", constraint: "both occupations > 0 and finite" });
    }
    Ok(n_min_bare / n_min_hybrid)
}

/// An atomic medium whose susceptibility depends on the coupling-beam frequency.
pub trait Medium {
    /// χ with the coupling beam shifted by `shift` from the reference setting.
    fn chi_shifted(&self, shift: f64) -> Result<ComplexSusceptibility>;
    /// Two-photon detuning with the beam shifted by `shift`.
    fn two_photon_detuning(&self, shift: f64) -> f64;
}

/// EIT ensemble at reference two-photon detuning `delta0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EitMedium {
    pub params: EitMediumParams,
    pub delta0: f64,
}

impl Medium for EitMedium {
    fn chi_shifted(&self, shift: f64) -> Result<ComplexSusceptibility> {
        let params = EitMediumParams { delta_a: self.params.delta_a + AngularFrequency::new(shift)?, ..self.params };
        chi_eit(&params, TwoPhotonDetuning::new(self.delta0 + shift)?)
    }

    fn two_photon_detuning(&self, shift: f64) -> f64 {
        self.delta0 + shift
    }
}

/// RIR gas (with its quadrature grid) at reference detuning `delta0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RirMedium {
    pub params: RirMediumParams,
    pub grid: MomentumGrid,
    pub delta0: f64,
}

impl Medium for RirMedium {
    fn chi_shifted(&self, shift: f64) -> Result<ComplexSusceptibility> {
        Ok(chi_rir(&self.params, &self.grid, AngularFrequency::new(self.delta0 + shift)?))
    }

    fn two_photon_detuning(&self, shift: f64) -> f64 {
        self.delta0 + shift
    }
}

/// A system whose cooling can be evaluated along `Δ̃_cm`.
pub trait CoolingSystem {
    fn evaluate(&self, delta_cm_tilde: f64) -> Result<CoolingResult>;
    fn mechanics(&self) -> &MechanicalParams;
}

/// Feedback topology: optomechanical cavity ↔ atomic cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackSystem<M> {
    pub cavity_m: OpticalCavityParams,
    pub cavity_a: OpticalCavityParams,
    /// `None` for an empty atomic cavity.
    pub medium: Option<M>,
    pub j: CouplingJ,
    pub mech: MechanicalParams,
    /// Scan the drive frequency (true) or only the optomechanical cavity (false).
    pub locked: bool,
    /// Points with `|⟨c⟩|²` above this are flagged unstable.
    pub max_photons: Option<f64>,
}

impl<M: Medium> FeedbackSystem<M> {
    fn topology(&self) -> Topology {
        if self.j.get() == 0.0 {
            Topology::Bare
        } else {
            Topology::Feedback
        }
    }

    /// Operating point and carrier shift at a given `Δ̃_cm`.
    pub fn operating_point(&self, delta_cm_tilde: f64) -> Result<(OperatingPoint, f64)> {
        let shift = if self.locked { delta_cm_tilde } else { 0.0 };
        let delta = self.medium.as_ref().map_or(shift, |m| m.two_photon_detuning(shift));
        Ok((
            OperatingPoint {
                delta_cm_tilde: AngularFrequency::new(delta_cm_tilde)?,
                delta_ca: AngularFrequency::new(self.cavity_a.detuning.get() + shift)?,
                delta_two_photon: AngularFrequency::new(delta)?,
                topology: self.topology(),
            },
            shift,
        ))
    }

    fn chi(&self, shift: f64) -> Result<ComplexSusceptibility> {
        self.medium.as_ref().map_or(Ok(ComplexSusceptibility::ZERO), |m| m.chi_shifted(shift))
    }

    /// Steady field ⟨c⟩ at `Δ̃_cm`.
    pub fn field(&self, delta_cm_tilde: f64) -> Result<Complex64> {
        let (point, shift) = self.operating_point(delta_cm_tilde)?;
        feedback_steady_field(&self.cavity_m, &self.cavity_a, self.chi(shift)?, self.j, &point)
    }

    pub fn sidebands(&self, delta_cm_tilde: f64) -> Result<SidebandResponse> {
        let (point, shift) = self.operating_point(delta_cm_tilde)?;
        let w = self.mech.omega_m.get();
        feedback_sidebands(&self.cavity_m, &self.cavity_a, self.chi(shift + w)?, self.chi(shift - w)?, self.j, &point, self.mech.omega_m)
    }
}

fn apply_cap(mut r: CoolingResult, cap: Option<f64>) -> CoolingResult {
    if let Some(cap) = cap {
        if r.field_c.norm_sqr() > cap {
            r.stable = false;
            r.n_min = None;
        }
    }
    r
}

impl<M: Medium> CoolingSystem for FeedbackSystem<M> {
    fn evaluate(&self, delta_cm_tilde: f64) -> Result<CoolingResult> {
        let c = self.field(delta_cm_tilde)?;
        let sb = self.sidebands(delta_cm_tilde)?;
        Ok(apply_cap(feedback_cooling(&self.mech, &sb, c)?, self.max_photons))
    }

    fn mechanics(&self) -> &MechanicalParams {
        &self.mech
    }
}

/// Cascade topology: drive → atomic medium → optomechanical cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSystem {
    pub cavity_m: OpticalCavityParams,
    /// Medium the beam passes first; `None` for a transparent (atom-free) path.
    pub medium: Option<RirMedium>,
    /// Free-space decay rate of the medium mode κ_a.
    pub kappa_a: AngularFrequency,
    /// Drive amplitude into the medium, η_a.
    pub eta_a: f64,
    /// Direct drive of the optomechanical cavity, η_c.
    pub eta_c: f64,
    pub j: CouplingJ,
    pub mech: MechanicalParams,
    /// Scan the drive frequency, so the medium δ follows `Δ̃_cm`.
    pub locked: bool,
    pub max_photons: Option<f64>,
}

impl CascadeSystem {
    pub fn operating_point(&self, delta_cm_tilde: f64) -> Result<(OperatingPoint, f64)> {
        let shift = if self.locked { delta_cm_tilde } else { 0.0 };
        let delta = self.medium.as_ref().map_or(shift, |m| m.two_photon_detuning(shift));
        let topology = if self.j.get() == 0.0 { Topology::Bare } else { Topology::Cascade };
        Ok((
            OperatingPoint {
                delta_cm_tilde: AngularFrequency::new(delta_cm_tilde)?,
                delta_ca: AngularFrequency::ZERO,
                delta_two_photon: AngularFrequency::new(delta)?,
                topology,
            },
            shift,
        ))
    }

    /// Medium output `⟨a_p⟩ = η_a / (−iχ + κ_a/2)`.
    pub fn medium_field(&self, shift: f64) -> Result<Complex64> {
        let chi = self.medium.as_ref().map_or(Ok(ComplexSusceptibility::ZERO), |m| m.chi_shifted(shift))?;
        crate::model::effective_cavity_response(AngularFrequency::ZERO, self.kappa_a, chi, self.eta_a)
    }

    pub fn drive(&self, delta_cm_tilde: f64) -> Result<Complex64> {
        let (_, shift) = self.operating_point(delta_cm_tilde)?;
        let a_p = if self.j.get() == 0.0 { Complex64::new(0.0, 0.0) } else { self.medium_field(shift)? };
        Ok(cascade_drive(a_p, self.j, self.eta_c))
    }
}

impl CoolingSystem for CascadeSystem {
    fn evaluate(&self, delta_cm_tilde: f64) -> Result<CoolingResult> {
        let (point, _) = self.operating_point(delta_cm_tilde)?;
        let drive = self.drive(delta_cm_tilde)?;
        Ok(apply_cap(cascade_cooling(&self.mech, &self.cavity_m, drive, &point)?, self.max_photons))
    }

    fn mechanics(&self) -> &MechanicalParams {
        &self.mech
    }
}

/// Best operating point found by [`minimize_n_min`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub delta_cm_tilde: AngularFrequency,
    pub result: CoolingResult,
}

/// Default search window half-width, in units of ω_m.
pub const SEARCH_WINDOW: f64 = 3.0;

/// Minimizes n_min over `|Δ̃_cm| ≤ window·ω_m`: a grid of `n` points, then
/// golden-section refinement to `1e-4 ω_m`. Unstable points never win.
pub fn minimize_n_min<S: CoolingSystem>(sys: &S, window: f64, n: usize) -> Result<Optimum> {
    let w = sys.mechanics().omega_m.get();
    let score = |x: f64| -> f64 {
        match sys.evaluate(x) {
            Ok(CoolingResult { n_min: Some(v), .. }) => -v,
            _ => f64::NEG_INFINITY,
        }
    };
    let xs = linspace(-window * w, window * w, n);
    let ys: alloc::vec::Vec<f64> = xs.iter().map(|&x| score(x)).collect();
    let k =
        crate::scan::argmax(&ys).filter(|&k| ys[k] > f64::NEG_INFINITY).ok_or(Error::ParametricInstability { total_damping: f64::NAN })?;
    let lo = xs[k.saturating_sub(1)];
    let hi = xs[(k + 1).min(n - 1)];
    let x = golden_maximum(score, lo, hi, 1e-4 * w);
    let best = if score(x) >= ys[k] { x } else { xs[k] };
    Ok(Optimum { delta_cm_tilde: AngularFrequency::new(best)?, result: sys.evaluate(best)? })
}

/// Improvement factor of `hybrid` over `bare`, each at its own optimum.
pub fn optimized_improvement<A: CoolingSystem, B: CoolingSystem>(bare: &A, hybrid: &B) -> Result<(f64, Optimum, Optimum)> {
    let b = minimize_n_min(bare, SEARCH_WINDOW, 601)?;
    let h = minimize_n_min(hybrid, SEARCH_WINDOW, 601)?;
    let xi = improvement_factor(b.result.n_min.unwrap_or(f64::NAN), h.result.n_min.unwrap_or(f64::NAN))?;
    Ok((xi, b, h))
}
