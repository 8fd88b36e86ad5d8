//! Physical constants and the angular-frequency newtype.
//!
//! Constants are the exact SI (2019) values; ħ is derived from the exact h.

use core::f64::consts::PI;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;
/// Planck constant h in J·s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant ħ = h/2π in J·s.
pub const HBAR: f64 = PLANCK / TWO_PI;
/// Boltzmann constant in J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Speed of light in vacuum in m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default optical wavelength (Rb D2 line) used to form ħω when only a power is given.
pub const DEFAULT_WAVELENGTH: f64 = 780e-9;

/// An angular frequency or rate in rad/s. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub const ZERO: Self = AngularFrequency(0.0);

    /// From a raw value in rad/s.
    pub fn new(rad_per_s: f64) -> Result<Self> {
        if rad_per_s.is_finite() {
            Ok(AngularFrequency(rad_per_s))
        } else {
            Err(Error::NonFinite { field: "angular frequency" })
        }
    }

    /// From an ordinary frequency in Hz, i.e. `2π × hz`.
    pub fn from_hz(hz: f64) -> Result<Self> {
        Self::new(TWO_PI * hz)
    }

    /// Unchecked constructor for values produced by arithmetic on finite inputs.
    ///
    /// Debug builds assert finiteness.
    pub fn from_raw(rad_per_s: f64) -> Self {
        debug_assert!(rad_per_s.is_finite());
        AngularFrequency(rad_per_s)
    }

    #[inline]
    pub const fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn hz(self) -> f64 {
        self.0 / TWO_PI
    }

    pub fn abs(self) -> Self {
        AngularFrequency(if self.0 < 0.0 { -self.0 } else { self.0 })
    }
}

impl Add for AngularFrequency {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        AngularFrequency(self.0 + rhs.0)
    }
}

impl Sub for AngularFrequency {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        AngularFrequency(self.0 - rhs.0)
    }
}

impl Neg for AngularFrequency {
    type Output = Self;
    fn neg(self) -> Self {
        AngularFrequency(-self.0)
    }
}

impl Mul<f64> for AngularFrequency {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        AngularFrequency(self.0 * rhs)
    }
}

impl Div<f64> for AngularFrequency {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        AngularFrequency(self.0 / rhs)
    }
}

/// Photon energy ħω for a vacuum wavelength in meters.
pub fn photon_energy(wavelength: f64) -> f64 {
    HBAR * TWO_PI * SPEED_OF_LIGHT / wavelength
}
