//! Recoil-induced resonances in a thermal one-dimensional gas.
//!
//! Conventions follow the RIR treatment: `Δ_a = ω_0 − ω_1` (atomic resonance
//! minus control frequency) and `δ = ω_2 − ω_1` (probe minus control). These
//! differ from the EIT module's conventions; the two are never mixed.
//!
//! The momentum index `p = k/(2k_0)` is treated as a continuous variable and
//! sums over `p` as trapezoidal quadrature on a uniform grid. The grid step is
//! `1/m` for an integer `m`, so the momentum kicks `p → p ± 1` land on grid
//! points (used by the oracle and the steady-state coherences).

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::model::{effective_cavity_response, ComplexSusceptibility};
use crate::units::{AngularFrequency, BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// Above this value of `|β|` the adiabatic elimination of the excited state is doubtful.
pub const BETA_WARN_THRESHOLD: f64 = 0.3;

/// Thermal gas driven by a strong control field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RirMediumParams {
    pub n_atoms: f64,
    /// Control Rabi frequency Ω.
    pub rabi_control: AngularFrequency,
    /// Single-atom coupling ℰ_a of the probe field.
    pub rabi_single_atom: AngularFrequency,
    /// `Δ_a = ω_0 − ω_1`.
    pub delta_a: AngularFrequency,
    /// Recoil frequency ω_r.
    pub omega_r: AngularFrequency,
    /// Decay of the momentum coherences.
    pub gamma_coh: AngularFrequency,
    /// Population relaxation toward the thermal distribution (oracle only).
    pub gamma_pop: AngularFrequency,
    /// Gas temperature in kelvin.
    pub temperature: f64,
    pub gamma_e: AngularFrequency,
    /// Free-space decay rate of the probe mode through the medium.
    pub kappa_a: AngularFrequency,
}

impl RirMediumParams {
    /// Builds and validates a medium; `gamma_pop` defaults to `gamma_coh / 10`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_atoms: f64,
        rabi_control: AngularFrequency,
        rabi_single_atom: AngularFrequency,
        delta_a: AngularFrequency,
        omega_r: AngularFrequency,
        gamma_coh: AngularFrequency,
        temperature: f64,
        gamma_e: AngularFrequency,
        kappa_a: AngularFrequency,
    ) -> Result<Self> {
        RirMediumParams {
            n_atoms,
            rabi_control,
            rabi_single_atom,
            delta_a,
            omega_r,
            gamma_coh,
            gamma_pop: gamma_coh / 10.0,
            temperature,
            gamma_e,
            kappa_a,
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.n_atoms >= 0.0 && self.n_atoms.is_finite()) {
            return Err(Error::OutOfRange { field: "n_atoms", constraint: "N >= 0" });
        }
        if self.delta_a.get() == 0.0 {
            return Err(Error::OutOfRange { field: "delta_a", constraint: "delta_a != 0" });
        }
        if self.omega_r.get() <= 0.0 {
            return Err(Error::OutOfRange { field: "omega_r", constraint: "omega_r > 0" });
        }
        if self.gamma_coh.get() <= 0.0 {
            return Err(Error::NonPositiveLinewidth { field: "gamma_coh" });
        }
        if self.gamma_pop.get() <= 0.0 {
            return Err(Error::NonPositiveLinewidth { field: "gamma_pop" });
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::OutOfRange { field: "temperature", constraint: "T_a > 0" });
        }
        if self.gamma_e.get() < 0.0 {
            return Err(Error::OutOfRange { field: "gamma_e", constraint: "gamma_e >= 0" });
        }
        if self.kappa_a.get() <= 0.0 {
            return Err(Error::NonPositiveLinewidth { field: "kappa_a" });
        }
        Ok(self)
    }

    /// Normalized control strength `β = Ω/Δ_a`.
    pub fn beta(&self) -> f64 {
        self.rabi_control.get() / self.delta_a.get()
    }

    /// Whether `|β|` is small enough for the adiabatic elimination to be trusted.
    pub fn beta_is_small(&self) -> bool {
        self.beta().abs() <= BETA_WARN_THRESHOLD
    }

    /// Medium length `L_a = c/κ_a`.
    pub fn medium_length(&self) -> f64 {
        SPEED_OF_LIGHT / self.kappa_a.get()
    }

    /// Dispersive background `ℰ_a² N / Δ_a` from the off-resonant excited state.
    pub fn background(&self) -> f64 {
        self.rabi_single_atom.get().powi(2) * self.n_atoms / self.delta_a.get()
    }

    /// Raman coupling strength `(βℰ_a)² N`.
    pub fn raman_strength(&self) -> f64 {
        (self.beta() * self.rabi_single_atom.get()).powi(2) * self.n_atoms
    }

    pub fn with_rabi_control(self, rabi_control: AngularFrequency) -> Self {
        RirMediumParams { rabi_control, ..self }
    }

    pub fn with_atoms(self, n_atoms: f64) -> Self {
        RirMediumParams { n_atoms, ..self }
    }

    /// Default quadrature grid for this medium (see [`GridSpec::for_medium`]).
    pub fn default_grid(&self) -> Result<MomentumGrid> {
        thermal_distribution(self.temperature, self.omega_r, &GridSpec::for_medium(self))
    }
}

/// Thermal standard deviation of `p`, `σ_p = sqrt(k_B T / 8ħω_r)`.
pub fn thermal_sigma_p(temperature: f64, omega_r: AngularFrequency) -> f64 {
    (BOLTZMANN * temperature / (8.0 * HBAR * omega_r.get())).sqrt()
}

/// Requested extent and resolution of a momentum grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Grid half-width in units of `p`.
    pub p_max: f64,
    /// Grid points per unit of `p` (the step is `1/points_per_unit`).
    pub points_per_unit: usize,
}

/// Minimum grid half-width in thermal standard deviations.
pub const MIN_SIGMAS: f64 = 6.0;
/// Default grid half-width in thermal standard deviations.
pub const DEFAULT_SIGMAS: f64 = 8.0;

impl GridSpec {
    /// Half-width `8σ_p`; step small enough that γ_coh spans at least four
    /// grid-induced frequency steps `8ω_r Δp` and that σ_p spans two steps.
    pub fn for_medium(medium: &RirMediumParams) -> Self {
        let sigma = thermal_sigma_p(medium.temperature, medium.omega_r);
        let by_linewidth = 4.0 * 8.0 * medium.omega_r.get() / medium.gamma_coh.get();
        let by_width = 2.0 / sigma;
        let m = by_linewidth.max(by_width).max(1.0).ceil();
        GridSpec { p_max: DEFAULT_SIGMAS * sigma, points_per_unit: m as usize }
    }

    /// The same extent at twice the resolution.
    pub fn refined(self) -> Self {
        GridSpec { points_per_unit: 2 * self.points_per_unit, ..self }
    }
}

/// Uniform momentum grid with normalized thermal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    pub p_values: Vec<f64>,
    /// Trapezoid-normalized thermal populations `Π_th,p`, summing to 1.
    pub weights: Vec<f64>,
    pub p_max: f64,
    pub n_points: usize,
    pub points_per_unit: usize,
    /// Thermal standard deviation σ_p the grid was built for.
    pub sigma_p: f64,
}

impl MomentumGrid {
    /// Index offset corresponding to a momentum kick of one unit.
    pub fn unit_shift(&self) -> usize {
        self.points_per_unit
    }

    pub fn step(&self) -> f64 {
        1.0 / self.points_per_unit as f64
    }
}

/// Thermal momentum distribution, weights ∝ `exp(−4ħω_r p² / k_B T_a)`.
pub fn thermal_distribution(temperature: f64, omega_r: AngularFrequency, spec: &GridSpec) -> Result<MomentumGrid> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::OutOfRange { field: "temperature", constraint: "T_a > 0" });
    }
    if omega_r.get() <= 0.0 {
        return Err(Error::OutOfRange { field: "omega_r", constraint: "omega_r > 0" });
    }
    if spec.points_per_unit == 0 {
        return Err(Error::OutOfRange { field: "points_per_unit", constraint: "points_per_unit >= 1" });
    }
    let sigma = thermal_sigma_p(temperature, omega_r);
    let required = MIN_SIGMAS * sigma;
    if !(spec.p_max >= required) {
        return Err(Error::GridTooNarrow { p_max: spec.p_max, required });
    }
    let m = spec.points_per_unit as f64;
    let half = (spec.p_max * m).ceil() as i64;
    let n = (2 * half + 1) as usize;
    let p_values: Vec<f64> = (-half..=half).map(|k| k as f64 / m).collect();
    let beta_e = 4.0 * HBAR * omega_r.get() / (BOLTZMANN * temperature);
    let mut weights: Vec<f64> = p_values.iter().map(|p| (-beta_e * p * p).exp()).collect();
    weights[0] *= 0.5;
    weights[n - 1] *= 0.5;
    // Sum pairwise from the tails inward so the result is exactly symmetric.
    let total: f64 = (0..half as usize).map(|k| weights[k] + weights[n - 1 - k]).sum::<f64>() + weights[half as usize];
    for w in &mut weights {
        *w /= total;
    }
    Ok(MomentumGrid { p_values, weights, p_max: half as f64 / m, n_points: n, points_per_unit: spec.points_per_unit, sigma_p: sigma })
}

/// Coherent (Raman) part of the susceptibility,
/// `(βℰ_a)²N Σ_p Π_p [1/(D₊ + iγ) − 1/(D₋ + iγ)]` with `D± = δ + 4ω_r(2p ± 1)`.
fn raman_sum(medium: &RirMediumParams, grid: &MomentumGrid, delta: f64) -> (f64, f64) {
    let wr4 = 4.0 * medium.omega_r.get();
    let g = medium.gamma_coh.get();
    let g2 = g * g;
    let (mut re, mut im) = (0.0, 0.0);
    for (&p, &w) in grid.p_values.iter().zip(&grid.weights) {
        let dp = delta + wr4 * (2.0 * p + 1.0);
        let dm = delta + wr4 * (2.0 * p - 1.0);
        let lp = 1.0 / (g2 + dp * dp);
        let lm = 1.0 / (g2 + dm * dm);
        re += w * (dp * lp - dm * lm);
        im += w * (lp - lm);
    }
    (re, -g * im)
}

/// RIR susceptibility at probe–control detuning `delta`.
pub fn chi_rir(medium: &RirMediumParams, grid: &MomentumGrid, delta: AngularFrequency) -> ComplexSusceptibility {
    let (re, im) = raman_sum(medium, grid, delta.get());
    let s = medium.raman_strength();
    ComplexSusceptibility::new(medium.background() + s * re, s * im)
}

/// Refines the grid (doubling the resolution) until χ at every probe detuning
/// changes by less than `rel_tol` relative to its modulus.
pub fn converged_grid(medium: &RirMediumParams, probes: &[f64], rel_tol: f64) -> Result<MomentumGrid> {
    let mut spec = GridSpec::for_medium(medium);
    let mut grid = thermal_distribution(medium.temperature, medium.omega_r, &spec)?;
    for _ in 0..12 {
        let next_spec = spec.refined();
        let next = thermal_distribution(medium.temperature, medium.omega_r, &next_spec)?;
        let mut worst: f64 = 0.0;
        for &d in probes {
            let d = AngularFrequency::new(d)?;
            let a = chi_rir(medium, &grid, d).to_complex();
            let b = chi_rir(medium, &next, d).to_complex();
            worst = worst.max((a - b).norm() / b.norm().max(f64::MIN_POSITIVE));
        }
        if worst < rel_tol {
            return Ok(grid);
        }
        spec = next_spec;
        grid = next;
    }
    Err(Error::GridTooCoarse)
}

/// Medium field `η / (−iΔ + κ_a/2 − iχ_RIR)`. With `cavity_detuning = 0` this
/// is the free-space form `⟨a_p⟩ = η/(−iχ + κ_a/2)`.
pub fn rir_medium_field(
    medium: &RirMediumParams,
    grid: &MomentumGrid,
    drive: f64,
    delta: AngularFrequency,
    cavity_detuning: AngularFrequency,
) -> Result<Complex64> {
    effective_cavity_response(cavity_detuning, medium.kappa_a, chi_rir(medium, grid, delta), drive)
}

/// Momentum coherences on the grid: `zeta_plus[k]` couples `p_k` to `p_k + 1`,
/// `zeta_minus[k]` couples `p_k` to `p_k − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coherences {
    pub zeta_plus: Vec<Complex64>,
    pub zeta_minus: Vec<Complex64>,
}

/// Population at grid index `k + shift`, zero off the grid.
pub(crate) fn shifted(pop: &[f64], k: usize, shift: isize) -> f64 {
    let j = k as isize + shift;
    if j < 0 || j as usize >= pop.len() {
        0.0
    } else {
        pop[j as usize]
    }
}

/// Closed-form steady-state coherences for a constant field `a` and
/// populations `pop` (absolute numbers of atoms per grid point):
///
/// `ζ₊,p = −iβℰ a* (Π_{p+1} − Π_p) / (γ + i(δ + 4ω_r(2p+1)))`
/// `ζ₋,p =  iβℰ a  (Π_p − Π_{p−1}) / (γ − i(δ + 4ω_r(2p−1)))`
pub fn steady_coherences(
    medium: &RirMediumParams,
    grid: &MomentumGrid,
    pop: &[f64],
    field: Complex64,
    delta: AngularFrequency,
) -> Coherences {
    let i = Complex64::i();
    let be = medium.beta() * medium.rabi_single_atom.get();
    let wr4 = 4.0 * medium.omega_r.get();
    let g = medium.gamma_coh.get();
    let d = delta.get();
    let s = grid.unit_shift() as isize;
    let mut zeta_plus = Vec::with_capacity(grid.n_points);
    let mut zeta_minus = Vec::with_capacity(grid.n_points);
    for (k, &p) in grid.p_values.iter().enumerate() {
        let dp = d + wr4 * (2.0 * p + 1.0);
        let dm = d + wr4 * (2.0 * p - 1.0);
        let up = shifted(pop, k, s) - pop[k];
        let down = pop[k] - shifted(pop, k, -s);
        zeta_plus.push(-i * be * field.conj() * up / (g + i * dp));
        zeta_minus.push(i * be * field * down / (g - i * dm));
    }
    Coherences { zeta_plus, zeta_minus }
}

/// Susceptibility implied by a set of coherences through the field equation,
/// `χ a = (ℰ²N/Δ_a) a + βℰ Σ_p ζ₋,p`.
pub fn contract_coherences(medium: &RirMediumParams, zeta_minus: &[Complex64], field: Complex64) -> Result<ComplexSusceptibility> {
    if field.norm() == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let be = medium.beta() * medium.rabi_single_atom.get();
    let sum: Complex64 = zeta_minus.iter().sum();
    Ok(ComplexSusceptibility::from_complex(medium.background() + be * sum / field))
}

/// Thermal populations `N Π_th,p` on the grid.
pub fn thermal_populations(medium: &RirMediumParams, grid: &MomentumGrid) -> Vec<f64> {
    grid.weights.iter().map(|w| w * medium.n_atoms).collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn hz(x: f64) -> AngularFrequency {
        AngularFrequency::from_hz(x).unwrap()
    }

    pub(crate) fn fig5(omega_over_gamma: f64) -> RirMediumParams {
        let ge = hz(6.07e6);
        RirMediumParams::new(1e8, ge * omega_over_gamma, hz(500e3), ge * -15.0, hz(3.77e3), hz(10e3), 21e-6, ge, hz(600e9)).unwrap()
    }

    #[test]
    fn sigma_p_fig5() {
        let s = thermal_sigma_p(21e-6, hz(3.77e3));
        assert_relative_eq!(s, 3.808_970_467, max_relative = 1e-8);
    }

    #[test]
    fn weights_normalized_and_symmetric() {
        let m = fig5(2.6);
        let g = m.default_grid().unwrap();
        let total: f64 = g.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let n = g.n_points;
        for k in 0..n {
            assert!((g.weights[k] - g.weights[n - 1 - k]).abs() <= 1e-12 * g.weights[n / 2]);
            assert_eq!(g.p_values[k], -g.p_values[n - 1 - k]);
        }
        assert!(g.p_max >= 6.0 * g.sigma_p);
    }

    #[test]
    fn gaussian_shape() {
        let m = fig5(2.6);
        let g = m.default_grid().unwrap();
        let c = g.n_points / 2;
        assert_eq!(crate::scan::argmax(&g.weights), Some(c));
        let be = 4.0 * HBAR * m.omega_r.get() / (BOLTZMANN * m.temperature);
        for k in [c + 5, c + 40, c + 200] {
            let p = g.p_values[k];
            assert_relative_eq!(g.weights[k] / g.weights[c], (-be * p * p).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn narrow_grid_rejected() {
        let spec = GridSpec { p_max: 5.0 * 3.81, points_per_unit: 12 };
        assert!(matches!(thermal_distribution(21e-6, hz(3.77e3), &spec), Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn cold_limit_concentrates_weight() {
        // At 1 nK σ_p ≈ 0.026, so |p| < 0.1 is ≈ 3.8σ_p: the captured weight is
        // erf(0.1/(σ_p√2)) ≈ 0.99986 in the continuum, slightly less on the discrete grid.
        let m = RirMediumParams { temperature: 1e-9, ..fig5(2.6) };
        let g = m.default_grid().unwrap();
        let inside: f64 = g.p_values.iter().zip(&g.weights).filter(|(p, _)| p.abs() < 0.1).map(|(_, w)| w).sum();
        assert!(inside > 0.9998, "{inside}");
        assert!((inside - 0.999_857).abs() < 1e-4, "{inside}");
    }

    #[test]
    fn no_control_is_pure_background() {
        let m = fig5(0.0);
        let g = m.default_grid().unwrap();
        let chi = chi_rir(&m, &g, hz(-300e3));
        assert_eq!(chi.im, 0.0);
        assert_relative_eq!(chi.re, m.background(), max_relative = 1e-15);
    }

    #[test]
    fn transparent_at_zero_detuning() {
        let m = fig5(2.6);
        let g = m.default_grid().unwrap();
        let chi = chi_rir(&m, &g, AngularFrequency::ZERO);
        assert!(chi.im.abs() < 1e-10 * m.raman_strength() / m.gamma_coh.get());
    }

    #[test]
    fn gain_band_below_and_absorption_above() {
        let m = fig5(2.6);
        let g = m.default_grid().unwrap();
        let wm = hz(300e3).get();
        let im = |d: f64| chi_rir(&m, &g, AngularFrequency::new(d).unwrap()).im;
        for k in 1..=50 {
            let d = k as f64 * 0.02 * wm;
            assert!(im(-d) < 0.0 && im(d) > 0.0, "δ = ±{}ω_m", k as f64 * 0.02);
        }
    }

    #[test]
    fn antisymmetric_imaginary_part() {
        let m = fig5(2.6);
        let g = m.default_grid().unwrap();
        let wm = hz(300e3).get();
        let ds = crate::scan::linspace(0.0, 3.0 * wm, 1000);
        let im = |d: f64| chi_rir(&m, &g, AngularFrequency::new(d).unwrap()).im;
        let peak = ds.iter().map(|&d| im(d).abs()).fold(0.0, f64::max);
        for &d in &ds {
            assert!((im(d) + im(-d)).abs() < 1e-9 * peak);
        }
    }

    #[test]
    fn pinned_value_at_minus_300_khz() {
        // Independent quadrature on a 10× finer grid, 40-digit arithmetic.
        let m = fig5(2.6);
        let g = m.default_grid().unwrap();
        let chi = chi_rir(&m, &g, hz(-300e3));
        assert_relative_eq!(chi.re, PINNED_RE, max_relative = 1e-6);
        assert_relative_eq!(chi.im, PINNED_IM, max_relative = 1e-6);
    }

    const PINNED_RE: f64 = -4.074_656_265_787_205e12;
    const PINNED_IM: f64 = -1.301_561_191_529_575_8e12;

    #[test]
    fn doubling_resolution_is_converged() {
        let m = fig5(2.6);
        let spec = GridSpec::for_medium(&m);
        let g1 = thermal_distribution(m.temperature, m.omega_r, &spec).unwrap();
        let g2 = thermal_distribution(m.temperature, m.omega_r, &spec.refined()).unwrap();
        let wm = hz(300e3).get();
        for k in -100..=100 {
            let d = AngularFrequency::new(k as f64 * 0.03 * wm).unwrap();
            let a = chi_rir(&m, &g1, d).to_complex();
            let b = chi_rir(&m, &g2, d).to_complex();
            assert!((a - b).norm() < 1e-6 * b.norm(), "k={k}");
        }
        let probes = [-wm, 0.0, wm];
        assert_eq!(converged_grid(&m, &probes, 1e-6).unwrap(), g1);
    }

    /// Two-Lorentzian limit for a gas at rest.
    fn cold_im(m: &RirMediumParams, d: f64) -> f64 {
        let (g, w) = (m.gamma_coh.get(), 4.0 * m.omega_r.get());
        -m.raman_strength() * g * (1.0 / (g * g + (d + w).powi(2)) - 1.0 / (g * g + (d - w).powi(2)))
    }

    fn cold_deviation(temperature: f64) -> f64 {
        let m = RirMediumParams { temperature, ..fig5(2.6) };
        let g = m.default_grid().unwrap();
        let peak = cold_im(&m, -4.0 * m.omega_r.get()).abs();
        let wm = hz(300e3).get();
        crate::scan::linspace(-wm, wm, 401)
            .into_iter()
            .map(|d| (chi_rir(&m, &g, AngularFrequency::new(d).unwrap()).im - cold_im(&m, d)).abs() / peak)
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_temperature_limit() {
        // The thermal correction is second order in the Doppler spread, i.e.
        // linear in T: at 1 nK it is a few 1e-3 of the peak with these
        // linewidths, and it reaches 1e-4 around 10 pK.
        let e1 = cold_deviation(1e-9);
        let e2 = cold_deviation(1e-10);
        assert!(e1 < 1e-2, "{e1}");
        assert_relative_eq!(e1 / e2, 10.0, max_relative = 0.05);
        assert!(cold_deviation(1e-11) < 1e-4);
    }

    #[test]
    fn appendix_coherences_reproduce_chi() {
        let m = fig5(2.6);
        let g = m.default_grid().unwrap();
        let pop = thermal_populations(&m, &g);
        let a = Complex64::new(0.3, -1.7);
        for k in -20..=20 {
            let d = hz(k as f64 * 37e3);
            let z = steady_coherences(&m, &g, &pop, a, d);
            let chi = contract_coherences(&m, &z.zeta_minus, a).unwrap();
            assert!(chi.approx_eq(chi_rir(&m, &g, d), 1e-10), "k={k}");
            // ζ₊,p and ζ₋,p+1 describe the same pair of momentum classes.
            let s = g.unit_shift();
            for j in 0..g.n_points - s {
                let lhs = z.zeta_plus[j];
                let rhs = z.zeta_minus[j + s].conj();
                assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn free_space_field_without_atoms() {
        let m = fig5(2.6).with_atoms(0.0);
        let g = m.default_grid().unwrap();
        let a = rir_medium_field(&m, &g, 1e6, hz(-100e3), AngularFrequency::ZERO).unwrap();
        assert_relative_eq!(a.re, 1e6 / (m.kappa_a.get() / 2.0), max_relative = 1e-14);
        assert_eq!(a.im, 0.0);
    }

    #[test]
    fn fig6_amplification_and_suppression() {
        let wm = hz(300e3).get();
        let m = fig5(1.8);
        let g = m.default_grid().unwrap();
        let base = 1.0 / (m.kappa_a.get() / 2.0);
        let ratio =
            |d: f64| rir_medium_field(&m, &g, 1.0, AngularFrequency::new(d).unwrap(), AngularFrequency::ZERO).unwrap().norm() / base;
        let best = crate::scan::refine_maximum(ratio, -3.0 * wm, 3.0 * wm, 601, 1e-6 * wm);
        assert!(best < 0.0 && ratio(best) > 1.0, "{} at {}", ratio(best), best / wm);
        assert!(ratio(-best) < 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn imaginary_part_odd(om in 0.5f64..3.0, t in 5e-6f64..50e-6, d in 0.0f64..2e6) {
            let m = RirMediumParams { temperature: t, ..fig5(om) };
            let g = m.default_grid().unwrap();
            let a = chi_rir(&m, &g, AngularFrequency::new(d).unwrap()).im;
            let b = chi_rir(&m, &g, AngularFrequency::new(-d).unwrap()).im;
            let scale = m.raman_strength() / m.gamma_coh.get();
            prop_assert!((a + b).abs() < 1e-9 * scale);
        }
    }
}
