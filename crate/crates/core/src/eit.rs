//! Electromagnetically induced transparency in a three-level Λ ensemble.
//!
//! Detuning conventions: `Δ_a = ω_2 − ω_eg` (coupling field minus the g–e
//! transition), `Δ_c = ω_1 − ω_em` (control field), two-photon detuning
//! `δ = Δ_a − Δ_c`. The susceptibility enters the cavity field as
//! `⟨a⟩ = η / (−iΔ_ca + κ/2 − iχ)`, so `Im χ > 0` is absorption.
//!
//! With all atoms in |g⟩ the explicit real/imaginary forms are used. The
//! general form with a populated metastable level is available behind
//! [`EitMediumParams::general_populations`]; it is written with the overall
//! sign that makes it agree with the explicit forms when `N_m = 0` (and with
//! the steady state of the equations of motion in [`crate::oracle`]).

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::model::{effective_cavity_response, ComplexSusceptibility, OpticalCavityParams};
use crate::scan::{full_width_half_max, Fwhm};
use crate::units::AngularFrequency;
use crate::{Error, Result};

/// Atomic ensemble driven in the EIT configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EitMediumParams {
    pub n_atoms: f64,
    pub n_ground: f64,
    pub n_meta: f64,
    /// Control Rabi frequency Ω.
    pub rabi_control: AngularFrequency,
    /// Single-atom coupling ℰ_a of the cavity field.
    pub rabi_single_atom: AngularFrequency,
    /// Excited-state coherence decay γ_e.
    pub gamma_e: AngularFrequency,
    /// Ground–metastable coherence decay.
    pub gamma_gm: AngularFrequency,
    /// Single-photon detuning Δ_a.
    pub delta_a: AngularFrequency,
    /// Use the general expression valid for `N_m ≠ 0`.
    pub general_populations: bool,
}

/// Default ground–metastable coherence decay, 2π × 100 Hz.
pub fn default_gamma_gm() -> AngularFrequency {
    AngularFrequency::from_raw(crate::units::TWO_PI * 100.0)
}

impl EitMediumParams {
    /// All atoms in the ground state (`N_g = N`, `N_m = 0`).
    pub fn new(
        n_atoms: f64,
        rabi_control: AngularFrequency,
        rabi_single_atom: AngularFrequency,
        gamma_e: AngularFrequency,
        gamma_gm: AngularFrequency,
        delta_a: AngularFrequency,
    ) -> Result<Self> {
        EitMediumParams {
            n_atoms,
            n_ground: n_atoms,
            n_meta: 0.0,
            rabi_control,
            rabi_single_atom,
            gamma_e,
            gamma_gm,
            delta_a,
            general_populations: false,
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self> {
        for (field, v) in [("n_atoms", self.n_atoms), ("n_ground", self.n_ground), ("n_meta", self.n_meta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange { field, constraint: "population >= 0" });
            }
        }
        let total = self.n_ground + self.n_meta;
        if (total - self.n_atoms).abs() > 1e-12 * self.n_atoms.max(1.0) {
            return Err(Error::OutOfRange { field: "n_atoms", constraint: "N = N_g + N_m" });
        }
        if self.gamma_e.get() <= 0.0 {
            return Err(Error::OutOfRange { field: "gamma_e", constraint: "gamma_e > 0" });
        }
        if self.gamma_gm.get() < 0.0 {
            return Err(Error::OutOfRange { field: "gamma_gm", constraint: "gamma_gm >= 0" });
        }
        if self.n_meta != 0.0 && !self.general_populations {
            return Err(Error::OutOfRange { field: "n_meta", constraint: "n_meta = 0 unless general_populations is set" });
        }
        Ok(self)
    }

    pub fn with_rabi_control(self, rabi_control: AngularFrequency) -> Self {
        EitMediumParams { rabi_control, ..self }
    }

    pub fn with_atoms(self, n_atoms: f64) -> Self {
        EitMediumParams { n_atoms, n_ground: n_atoms - self.n_meta, ..self }
    }

    /// Control detuning `Δ_c = Δ_a − δ` at a given two-photon detuning.
    pub fn control_detuning(&self, delta: TwoPhotonDetuning) -> AngularFrequency {
        self.delta_a - delta.0
    }

    /// Position of the light-shifted atomic resonance, `δ = Ω²/Δ_a`.
    pub fn stark_shifted_resonance(&self) -> AngularFrequency {
        AngularFrequency::from_raw(self.rabi_control.get().powi(2) / self.delta_a.get())
    }
}

/// Two-photon detuning `δ = Δ_a − Δ_c`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TwoPhotonDetuning(pub AngularFrequency);

impl TwoPhotonDetuning {
    pub fn new(delta: f64) -> Result<Self> {
        Ok(TwoPhotonDetuning(AngularFrequency::new(delta)?))
    }
}

/// EIT susceptibility at two-photon detuning `delta`.
pub fn chi_eit(medium: &EitMediumParams, delta: TwoPhotonDetuning) -> Result<ComplexSusceptibility> {
    if medium.general_populations {
        return chi_eit_general(medium, delta);
    }
    let d = delta.0.get();
    let da = medium.delta_a.get();
    let om2 = medium.rabi_control.get().powi(2);
    let ge = medium.gamma_e.get();
    let gm = medium.gamma_gm.get();
    let strength = medium.rabi_single_atom.get().powi(2) * medium.n_ground;

    let two_photon = d * d + gm * gm / 4.0;
    let den = (da * da + ge * ge / 4.0) * two_photon + om2 * om2 - 2.0 * om2 * (da * d - ge * gm / 4.0);
    if !(den.abs() >= 1e-300) {
        return Err(Error::DegenerateDenominator);
    }
    let re = -strength * (da * two_photon - om2 * d) / den;
    let im = strength * (ge / 2.0 * two_photon + om2 * gm / 2.0) / den;
    Ok(ComplexSusceptibility::new(re, im))
}

fn chi_eit_general(medium: &EitMediumParams, delta: TwoPhotonDetuning) -> Result<ComplexSusceptibility> {
    let i = Complex64::i();
    let d = delta.0.get();
    let da = medium.delta_a.get();
    let dc = medium.control_detuning(delta).get();
    let om2 = medium.rabi_control.get().powi(2);
    let ge = medium.gamma_e.get();
    let gm = medium.gamma_gm.get();
    let e2 = medium.rabi_single_atom.get().powi(2);

    let raman = d + i * gm / 2.0;
    let control = dc - i * ge / 2.0;
    if raman.norm() < 1e-300 || control.norm() < 1e-300 {
        return Err(Error::DegenerateDenominator);
    }
    let populations = medium.n_ground - om2 * medium.n_meta / (control * raman);
    let den = da + i * ge / 2.0 - om2 / raman;
    if !(den.norm() >= 1e-300) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(ComplexSusceptibility::from_complex(-e2 * populations / den))
}

/// Steady intracavity field of the atomic cavity, `η / (−iΔ_ca + κ/2 − iχ_EIT)`.
pub fn eit_cavity_field(cavity: &OpticalCavityParams, medium: &EitMediumParams, delta: TwoPhotonDetuning) -> Result<Complex64> {
    let chi = chi_eit(medium, delta)?;
    effective_cavity_response(cavity.detuning, cavity.kappa, chi, cavity.drive)
}

/// Linewidth diagnostics of the atom-dressed cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EitLinewidth {
    /// Numerical FWHM of `|⟨a⟩|²` versus `Δ_ca` with `δ` locked to `Δ_ca`.
    pub fwhm: AngularFrequency,
    /// Centre of the transmission peak.
    pub peak_detuning: AngularFrequency,
    /// `κ + Im χ` at the peak (full-width convention).
    pub kappa_af_full: AngularFrequency,
    /// `κ/2 + Im χ` at the peak (half-width convention).
    pub kappa_af_half: AngularFrequency,
}

/// Locking of the two-photon detuning to the cavity detuning, `δ = Δ_ca + offset`.
pub fn locked_field(cavity: &OpticalCavityParams, medium: &EitMediumParams, delta_ca: f64, offset: f64) -> Result<Complex64> {
    let c = cavity.with_detuning(AngularFrequency::new(delta_ca)?);
    eit_cavity_field(&c, medium, TwoPhotonDetuning::new(delta_ca + offset)?)
}

/// Effective linewidth of the dressed cavity with `δ = Δ_ca` locking.
///
/// The scan covers `|Δ_ca| ≤ 2κ`; the grid is doubled until the width moves
/// by less than 0.1 %.
pub fn eit_effective_linewidth(cavity: &OpticalCavityParams, medium: &EitMediumParams) -> Result<EitLinewidth> {
    let kappa = cavity.kappa.get();
    let intensity = |x: f64| -> f64 {
        match locked_field(cavity, medium, x, 0.0) {
            Ok(a) => a.norm_sqr(),
            Err(_) => f64::NAN,
        }
    };
    let Fwhm { width, center } = full_width_half_max(intensity, -2.0 * kappa, 2.0 * kappa, 2001, 1e-3)?;
    let chi = chi_eit(medium, TwoPhotonDetuning::new(center)?)?;
    Ok(EitLinewidth {
        fwhm: AngularFrequency::new(width)?,
        peak_detuning: AngularFrequency::new(center)?,
        kappa_af_full: AngularFrequency::new(kappa + chi.im)?,
        kappa_af_half: AngularFrequency::new(kappa / 2.0 + chi.im)?,
    })
}
