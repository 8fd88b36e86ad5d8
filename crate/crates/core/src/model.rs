//! Shared parameter types for the optical cavities and the mechanical mode,
//! the inter-cavity coupling, and the atom-dressed cavity response.
//!
//! Two distinct coherence decay rates appear in the literature under the same
//! symbol: the ground–metastable coherence decay of the EIT medium lives in
//! [`crate::eit::EitMediumParams::gamma_gm`], while the mechanical damping
//! `γ_m = ω_m / Q` lives in [`MechanicalParams::gamma_mech`].

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::units::{photon_energy, AngularFrequency, BOLTZMANN, HBAR};
use crate::{Error, Result};

/// Complex susceptibility χ of an atomic medium, in rad/s.
///
/// `re` shifts the effective cavity detuning; `im > 0` is absorption and
/// `im < 0` is gain.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexSusceptibility {
    pub re: f64,
    pub im: f64,
}

impl ComplexSusceptibility {
    pub const ZERO: Self = ComplexSusceptibility { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        ComplexSusceptibility { re, im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn from_complex(z: Complex64) -> Self {
        ComplexSusceptibility { re: z.re, im: z.im }
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Field-wise comparison at relative tolerance `rel` (scaled by the larger modulus).
    pub fn approx_eq(self, other: Self, rel: f64) -> bool {
        let scale = self.to_complex().norm().max(other.to_complex().norm());
        (self.re - other.re).abs() <= rel * scale && (self.im - other.im).abs() <= rel * scale
    }
}

/// One optical cavity: linewidths, detuning and drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalCavityParams {
    /// Total energy decay rate κ.
    pub kappa: AngularFrequency,
    /// Input-mirror coupling κ_l (≤ κ).
    pub kappa_in: AngularFrequency,
    /// Drive frequency minus cavity resonance.
    pub detuning: AngularFrequency,
    /// Drive amplitude η in sqrt(photons)/s.
    pub drive: f64,
    /// Input power in watts (0 when the drive is set directly).
    pub input_power: f64,
    /// Drive wavelength in meters, used to form ħω.
    pub drive_wavelength: f64,
}

impl OpticalCavityParams {
    /// Builds a cavity whose drive is derived from an input power.
    ///
    /// `kappa_in` defaults to `kappa / 2` (symmetric two-mirror cavity).
    pub fn from_power(
        kappa: AngularFrequency,
        kappa_in: Option<AngularFrequency>,
        detuning: AngularFrequency,
        input_power: f64,
        drive_wavelength: f64,
    ) -> Result<Self> {
        let kappa_in = kappa_in.unwrap_or(kappa / 2.0);
        if kappa.get() <= 0.0 {
            return Err(Error::NonPositiveLinewidth { field: "kappa" });
        }
        if kappa_in.get() <= 0.0 {
            return Err(Error::NonPositiveLinewidth { field: "kappa_in" });
        }
        let drive = drive_amplitude(input_power, kappa_in, drive_wavelength)?;
        validate_cavity(OpticalCavityParams { kappa, kappa_in, detuning, drive, input_power, drive_wavelength })
    }

    /// Builds a cavity with a directly specified drive amplitude.
    pub fn with_drive(kappa: AngularFrequency, kappa_in: Option<AngularFrequency>, detuning: AngularFrequency, drive: f64) -> Result<Self> {
        validate_cavity(OpticalCavityParams {
            kappa,
            kappa_in: kappa_in.unwrap_or(kappa / 2.0),
            detuning,
            drive,
            input_power: 0.0,
            drive_wavelength: crate::units::DEFAULT_WAVELENGTH,
        })
    }

    pub fn with_detuning(self, detuning: AngularFrequency) -> Self {
        OpticalCavityParams { detuning, ..self }
    }
}

/// Checks the cavity invariants and hands the parameters back unchanged.
pub fn validate_cavity(params: OpticalCavityParams) -> Result<OpticalCavityParams> {
    if !params.drive.is_finite() {
        return Err(Error::NonFinite { field: "drive" });
    }
    if !(params.input_power.is_finite() && params.drive_wavelength.is_finite()) {
        return Err(Error::NonFinite { field: "input_power" });
    }
    if params.kappa.get() <= 0.0 {
        return Err(Error::NonPositiveLinewidth { field: "kappa" });
    }
    if params.kappa_in.get() <= 0.0 {
        return Err(Error::NonPositiveLinewidth { field: "kappa_in" });
    }
    if params.kappa_in.get() > params.kappa.get() {
        return Err(Error::InputCouplingExceedsTotal { field: "kappa_in" });
    }
    if params.input_power < 0.0 {
        return Err(Error::NegativePower { field: "input_power" });
    }
    if params.drive < 0.0 {
        return Err(Error::OutOfRange { field: "drive", constraint: "drive >= 0" });
    }
    if params.drive_wavelength <= 0.0 {
        return Err(Error::OutOfRange { field: "drive_wavelength", constraint: "wavelength > 0" });
    }
    Ok(params)
}

/// Cavity drive amplitude `η = sqrt(P κ_in / ħω)` with `ω = 2πc/λ`.
pub fn drive_amplitude(power: f64, kappa_in: AngularFrequency, wavelength: f64) -> Result<f64> {
    if !power.is_finite() {
        return Err(Error::NonFinite { field: "input_power" });
    }
    if power < 0.0 {
        return Err(Error::NegativePower { field: "input_power" });
    }
    if kappa_in.get() <= 0.0 {
        return Err(Error::NonPositiveLinewidth { field: "kappa_in" });
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::OutOfRange { field: "drive_wavelength", constraint: "wavelength > 0" });
    }
    Ok((power * kappa_in.get() / photon_energy(wavelength)).sqrt())
}

/// Relative threshold below which the dressed-cavity denominator counts as singular.
pub const DEFAULT_SINGULAR_EPS: f64 = 1e-12;

/// Steady cavity field `η / (−iΔ + κ/2 − iχ)`.
///
/// Shared by the EIT cavity and the RIR medium. Uses [`DEFAULT_SINGULAR_EPS`].
pub fn effective_cavity_response(
    detuning: AngularFrequency,
    kappa: AngularFrequency,
    chi: ComplexSusceptibility,
    drive: f64,
) -> Result<Complex64> {
    effective_cavity_response_eps(detuning, kappa, chi, drive, DEFAULT_SINGULAR_EPS)
}

/// As [`effective_cavity_response`] with an explicit singularity threshold.
///
/// The response is singular when `|−iΔ + κ/2 − iχ| ≤ eps · (|Δ| + κ/2 + |χ|)`.
pub fn effective_cavity_response_eps(
    detuning: AngularFrequency,
    kappa: AngularFrequency,
    chi: ComplexSusceptibility,
    drive: f64,
    eps: f64,
) -> Result<Complex64> {
    let i = Complex64::i();
    let den = -i * detuning.get() + kappa.get() / 2.0 - i * chi.to_complex();
    let scale = detuning.get().abs() + kappa.get().abs() / 2.0 + chi.to_complex().norm();
    let modulus = den.norm();
    if !(modulus > eps * scale) {
        return Err(Error::SingularResponse { modulus });
    }
    Ok(Complex64::new(drive, 0.0) / den)
}

/// Mechanical mode and its thermal bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalParams {
    pub omega_m: AngularFrequency,
    pub quality_factor: f64,
    /// Mechanical damping `γ_m = ω_m / Q`.
    pub gamma_mech: AngularFrequency,
    /// Single-photon optomechanical coupling.
    pub g0: AngularFrequency,
    pub bath_temperature: f64,
    /// Bath occupation `k_B T / ħ ω_m`.
    pub n_bath: f64,
    /// Effective mass in kg, if known. Only the spring shift needs it.
    pub mass: Option<f64>,
}

impl MechanicalParams {
    pub fn new(
        omega_m: AngularFrequency,
        quality_factor: f64,
        g0: AngularFrequency,
        bath_temperature: f64,
        mass: Option<f64>,
    ) -> Result<Self> {
        if omega_m.get() <= 0.0 {
            return Err(Error::OutOfRange { field: "omega_m", constraint: "omega_m > 0" });
        }
        if !(quality_factor > 0.0 && quality_factor.is_finite()) {
            return Err(Error::OutOfRange { field: "quality_factor", constraint: "Q > 0" });
        }
        if g0.get() < 0.0 {
            return Err(Error::OutOfRange { field: "g0", constraint: "g0 >= 0" });
        }
        if !(bath_temperature >= 0.0 && bath_temperature.is_finite()) {
            return Err(Error::OutOfRange { field: "bath_temperature", constraint: "T >= 0" });
        }
        if let Some(m) = mass {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::OutOfRange { field: "mass", constraint: "mass > 0" });
            }
        }
        Ok(MechanicalParams {
            omega_m,
            quality_factor,
            gamma_mech: AngularFrequency::from_raw(omega_m.get() / quality_factor),
            g0,
            bath_temperature,
            n_bath: BOLTZMANN * bath_temperature / (HBAR * omega_m.get()),
            mass,
        })
    }

    /// Zero-point motion `sqrt(ħ / 2 m ω_m)`, if the mass is known.
    pub fn x_zpt(&self) -> Option<f64> {
        self.mass.map(|m| (HBAR / (2.0 * m * self.omega_m.get())).sqrt())
    }
}

/// Inter-cavity coupling rate J.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CouplingJ(AngularFrequency);

impl CouplingJ {
    pub const ZERO: Self = CouplingJ(AngularFrequency::ZERO);

    /// Feedback topology, mode-matched and lossless: `J = sqrt(κ_l,ca κ_l,cm)`.
    pub fn feedback(kappa_in_a: AngularFrequency, kappa_in_m: AngularFrequency) -> Result<Self> {
        Self::from_product(kappa_in_a.get() * kappa_in_m.get())
    }

    /// Cascade topology with a running-wave medium: `J = sqrt(κ_a κ_cm / 2)`.
    pub fn cascade(kappa_a: AngularFrequency, kappa_cm: AngularFrequency) -> Result<Self> {
        Self::from_product(kappa_a.get() * kappa_cm.get() / 2.0)
    }

    /// A directly specified coupling.
    pub fn new(value: AngularFrequency) -> Result<Self> {
        if value.get() < 0.0 {
            return Err(Error::OutOfRange { field: "J", constraint: "J >= 0" });
        }
        Ok(CouplingJ(value))
    }

    fn from_product(p: f64) -> Result<Self> {
        if !(p >= 0.0) {
            return Err(Error::OutOfRange { field: "J", constraint: "rate product >= 0" });
        }
        Ok(CouplingJ(AngularFrequency::new(p.sqrt())?))
    }

    pub fn value(self) -> AngularFrequency {
        self.0
    }

    pub fn get(self) -> f64 {
        self.0.get()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::TWO_PI;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn hz(x: f64) -> AngularFrequency {
        AngularFrequency::from_hz(x).unwrap()
    }

    #[test]
    fn validate_accepts_caption_cavity() {
        let c = OpticalCavityParams::from_power(hz(240e3), Some(hz(120e3)), hz(0.0), 200e-9, 780e-9).unwrap();
        assert_eq!(validate_cavity(c).unwrap(), c);
    }

    #[test]
    fn validate_errors_name_field() {
        let ok = OpticalCavityParams::with_drive(hz(1e6), None, hz(0.0), 1.0).unwrap();
        let e = validate_cavity(OpticalCavityParams { kappa: hz(0.0), ..ok }).unwrap_err();
        assert_eq!(e, Error::NonPositiveLinewidth { field: "kappa" });
        let e = validate_cavity(OpticalCavityParams { kappa_in: hz(1.5e6), ..ok }).unwrap_err();
        assert_eq!(e, Error::InputCouplingExceedsTotal { field: "kappa_in" });
        let e = validate_cavity(OpticalCavityParams { input_power: -1.0, ..ok }).unwrap_err();
        assert_eq!(e, Error::NegativePower { field: "input_power" });
    }

    #[test]
    fn drive_amplitude_values() {
        assert_eq!(drive_amplitude(0.0, hz(120e3), 780e-9).unwrap(), 0.0);
        assert!(matches!(drive_amplitude(-1e-9, hz(120e3), 780e-9), Err(Error::NegativePower { .. })));
        // Hand evaluation: P κ_in / (h c / λ) with exact SI constants.
        // κ_in = 2π·120e3 = 753982.2368615503 s⁻¹; hc/λ = 2.546734…e-19 J.
        let eta = drive_amplitude(200e-9, hz(120e3), 780e-9).unwrap();
        assert_relative_eq!(eta, 769_492_675.308_837_6, max_relative = 1e-9);
        let eta2 = drive_amplitude(400e-9, hz(120e3), 780e-9).unwrap();
        assert_relative_eq!(eta2 / eta, 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn bare_cavity_response() {
        let kappa = hz(1e6);
        let on = effective_cavity_response(hz(0.0), kappa, ComplexSusceptibility::ZERO, 3.0).unwrap();
        assert_relative_eq!(on.re, 2.0 * 3.0 / kappa.get(), max_relative = 1e-14);
        assert_eq!(on.im, 0.0);
        let half = effective_cavity_response(kappa / 2.0, kappa, ComplexSusceptibility::ZERO, 3.0).unwrap();
        assert_relative_eq!(half.norm() / on.norm(), 0.5f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn singular_at_lasing_threshold() {
        let kappa = hz(1e6);
        let chi = ComplexSusceptibility::new(2.0e5, -kappa.get() / 2.0);
        let e = effective_cavity_response(AngularFrequency::new(-chi.re).unwrap(), kappa, chi, 1.0);
        assert!(matches!(e, Err(Error::SingularResponse { .. })));
    }

    #[test]
    fn lorentzian_matches_textbook() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let delta = rng.gen_range(-1e7..1e7);
            let kappa = rng.gen_range(1e3..1e7);
            let eta = rng.gen_range(0.0..1e9);
            let got = effective_cavity_response(
                AngularFrequency::new(delta).unwrap(),
                AngularFrequency::new(kappa).unwrap(),
                ComplexSusceptibility::ZERO,
                eta,
            )
            .unwrap();
            let den = kappa * kappa / 4.0 + delta * delta;
            let want = Complex64::new(eta * kappa / 2.0 / den, eta * delta / den);
            assert!((got - want).norm() <= 1e-13 * want.norm().max(1e-300));
        }
    }

    #[test]
    fn lorentzian_monotone_in_detuning() {
        let kappa = hz(1e6);
        let mut last = f64::INFINITY;
        for k in 0..1000 {
            let d = AngularFrequency::new(k as f64 * 0.01 * kappa.get()).unwrap();
            let a = effective_cavity_response(d, kappa, ComplexSusceptibility::ZERO, 1.0).unwrap().norm();
            let a_neg = effective_cavity_response(-d, kappa, ComplexSusceptibility::ZERO, 1.0).unwrap().norm();
            assert_eq!(a, a_neg);
            if k > 0 {
                assert!(a < last);
            }
            last = a;
        }
    }

    #[test]
    fn mechanical_threshold_arithmetic() {
        let m = MechanicalParams::new(hz(300e3), 5e7, hz(200.0), 300.0, None).unwrap();
        assert_eq!(m.gamma_mech.get(), m.omega_m.get() / 5e7);
        let rate = m.gamma_mech.get() * m.n_bath / TWO_PI;
        assert!((rate - 125e3).abs() < 0.02 * 125e3, "γ n_bath / 2π = {rate}");
    }

    #[test]
    fn coupling_forms() {
        let j = CouplingJ::feedback(hz(35e6), hz(120e3)).unwrap();
        assert_relative_eq!(j.get(), TWO_PI * (35e6f64 * 120e3).sqrt(), max_relative = 1e-14);
        let j = CouplingJ::cascade(hz(600e9), hz(240e3)).unwrap();
        assert_relative_eq!(j.get(), TWO_PI * (600e9f64 * 240e3 / 2.0).sqrt(), max_relative = 1e-14);
        assert!(CouplingJ::new(hz(-1.0)).is_err());
    }
}
