//! Time-domain integration of the underlying equations of motion.
//!
//! The oracle integrates the atom–field equations directly and reports the
//! state it relaxes to; tests compare this against the closed-form steady
//! states of [`crate::eit`] and [`crate::rir`].
//!
//! **EIT.** Interaction-picture phases are removed by the rotating-frame
//! variables `S = σ_ge e^{iΔ_a t}`, `M = σ_gm e^{iδ t}`, `E = σ_em e^{−iΔ_c t}`,
//! which turns the system into an autonomous one with a true fixed point:
//!
//! ```text
//! ȧ = (iΔ_ca − κ/2) a + η − iℰ S
//! Ṡ = (iΔ_a − γ_e/2) S − iℰ N_g a − iΩ M
//! Ṁ = (iδ − γ_gm/2) M − iΩ S + iℰ a E
//! Ė = (−iΔ_c − γ_e/2) E + iℰ a* M + iΩ N_m
//! ```
//!
//! Populations are held at their configured values (weak-probe regime). The
//! system is stiff (`Δ_a` is GHz while `γ_gm` is Hz) and is integrated with the
//! L-stable Rosenbrock scheme.
//!
//! **RIR.** With the field held constant at `a`, momentum coherences and
//! populations obey
//!
//! ```text
//! ζ̇₊,p = −(i D₊ + γ) ζ₊,p − iβℰ a* (Π_{p+1} − Π_p)
//! ζ̇₋,p =  (i D₋ − γ) ζ₋,p + iβℰ a  (Π_p − Π_{p−1})
//! Π̇_p  = 2 Re[iβℰ a (ζ₊,p − ζ₋,p*)] − γ_pop (Π_p − N Π_th,p)
//! ```
//!
//! with `D± = δ + 4ω_r(2p ± 1)`. This is non-stiff and is integrated with
//! Dormand–Prince 5(4).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::eit::{EitMediumParams, TwoPhotonDetuning};
use crate::model::{ComplexSusceptibility, OpticalCavityParams};
use crate::ode::{integrate_to_steady, Dopri5, Lu, OdeSystem, Rosenbrock23, Solution, Tolerances};
use crate::rir::{contract_coherences, shifted, thermal_populations, MomentumGrid, RirMediumParams};
use crate::units::AngularFrequency;
use crate::{Error, Result};

/// Integration settings shared by both oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub tolerances: Tolerances,
    /// Relative distance to the fixed point at which the state counts as steady.
    pub steady_tol: f64,
    pub t_end: f64,
}

impl OracleSettings {
    /// Defaults for the EIT oracle: steady to 1e-10, up to 10 s of evolution.
    pub fn eit_default() -> Self {
        OracleSettings { tolerances: Tolerances::new(1e-6, 1e-30), steady_tol: 1e-10, t_end: 10.0 }
    }

    /// Defaults for the RIR oracle: steady to 1e-10, up to 1 s of evolution.
    ///
    /// The explicit integrator hovers at its stability limit once the fast
    /// coherences have decayed, leaving a residual of order `rtol`, so `rtol`
    /// must be comparable to the steady-state tolerance.
    pub fn rir_default() -> Self {
        OracleSettings { tolerances: Tolerances::new(1e-10, 1e-30), steady_tol: 1e-10, t_end: 1.0 }
    }
}

/// State of the EIT atom–cavity system in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EitState {
    pub a: Complex64,
    pub sigma_ge: Complex64,
    pub sigma_gm: Complex64,
    pub sigma_em: Complex64,
    pub n_ground: f64,
    pub n_meta: f64,
}

impl EitState {
    /// Empty cavity and no coherences, populations from the medium.
    pub fn empty(medium: &EitMediumParams) -> Self {
        let z = Complex64::new(0.0, 0.0);
        EitState { a: z, sigma_ge: z, sigma_gm: z, sigma_em: z, n_ground: medium.n_ground, n_meta: medium.n_meta }
    }

    fn to_vec(self) -> Vec<f64> {
        vec![
            self.a.re,
            self.a.im,
            self.sigma_ge.re,
            self.sigma_ge.im,
            self.sigma_gm.re,
            self.sigma_gm.im,
            self.sigma_em.re,
            self.sigma_em.im,
        ]
    }

    fn from_slice(y: &[f64], n_ground: f64, n_meta: f64) -> Self {
        EitState {
            a: Complex64::new(y[0], y[1]),
            sigma_ge: Complex64::new(y[2], y[3]),
            sigma_gm: Complex64::new(y[4], y[5]),
            sigma_em: Complex64::new(y[6], y[7]),
            n_ground,
            n_meta,
        }
    }
}

struct EitSystem {
    delta_ca: f64,
    half_kappa: f64,
    drive: f64,
    e: f64,
    omega: f64,
    delta_a: f64,
    delta: f64,
    delta_c: f64,
    half_ge: f64,
    half_gm: f64,
    n_g: f64,
    n_m: f64,
}

fn c(y: &[f64], k: usize) -> Complex64 {
    Complex64::new(y[2 * k], y[2 * k + 1])
}

impl EitSystem {
    /// Local linearization: `f ≈ Σ_j A_kj z_j + B_kj z_j*` (complex 4×4 blocks).
    fn linearization(&self, y: &[f64]) -> ([[Complex64; 4]; 4], [[Complex64; 4]; 4]) {
        let i = Complex64::i();
        let z = Complex64::new(0.0, 0.0);
        let (a, m, e) = (c(y, 0), c(y, 2), c(y, 3));
        let mut aa = [[z; 4]; 4];
        let mut bb = [[z; 4]; 4];
        aa[0][0] = i * self.delta_ca - self.half_kappa;
        aa[0][1] = -i * self.e;
        aa[1][1] = i * self.delta_a - self.half_ge;
        aa[1][0] = -i * self.e * self.n_g;
        aa[1][2] = -i * self.omega;
        aa[2][2] = i * self.delta - self.half_gm;
        aa[2][1] = -i * self.omega;
        aa[2][0] = i * self.e * e;
        aa[2][3] = i * self.e * a;
        aa[3][3] = -i * self.delta_c - self.half_ge;
        aa[3][2] = i * self.e * a.conj();
        bb[3][0] = i * self.e * m;
        (aa, bb)
    }
}

impl OdeSystem for EitSystem {
    fn dim(&self) -> usize {
        8
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let i = Complex64::i();
        let (a, s, m, e) = (c(y, 0), c(y, 1), c(y, 2), c(y, 3));
        let da = (i * self.delta_ca - self.half_kappa) * a + self.drive - i * self.e * s;
        let ds = (i * self.delta_a - self.half_ge) * s - i * self.e * self.n_g * a - i * self.omega * m;
        let dm = (i * self.delta - self.half_gm) * m - i * self.omega * s + i * self.e * a * e;
        let de = (-i * self.delta_c - self.half_ge) * e + i * self.e * a.conj() * m + i * self.omega * self.n_m;
        for (k, v) in [da, ds, dm, de].into_iter().enumerate() {
            dy[2 * k] = v.re;
            dy[2 * k + 1] = v.im;
        }
    }

    fn jacobian(&self, _t: f64, y: &[f64], jac: &mut [f64]) {
        let i = Complex64::i();
        let (aa, bb) = self.linearization(y);
        for k in 0..4 {
            for j in 0..4 {
                // ∂f/∂x = A + B, ∂f/∂y = i(A − B) for z = x + iy.
                let dx = aa[k][j] + bb[k][j];
                let dy = i * (aa[k][j] - bb[k][j]);
                jac[(2 * k) * 8 + 2 * j] = dx.re;
                jac[(2 * k + 1) * 8 + 2 * j] = dx.im;
                jac[(2 * k) * 8 + 2 * j + 1] = dy.re;
                jac[(2 * k + 1) * 8 + 2 * j + 1] = dy.im;
            }
        }
    }
}

/// Outcome of an EIT oracle run.
#[derive(Debug, Clone, PartialEq)]
pub struct EitOracleRun {
    pub steady: EitState,
    pub t: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// `(t, state)` after every accepted step, if recording was requested.
    pub trajectory: Vec<(f64, EitState)>,
}

/// Newton distance to the fixed point, `‖J⁻¹ f‖ / ‖y‖`.
fn newton_distance<S: OdeSystem>(sys: &S, y: &[f64], f: &[f64]) -> f64 {
    let n = sys.dim();
    let mut jac = vec![0.0; n * n];
    sys.jacobian(0.0, y, &mut jac);
    let Ok(lu) = Lu::factor(jac, n) else { return f64::INFINITY };
    let mut dx = f.to_vec();
    lu.solve(&mut dx);
    let num: f64 = dx.iter().map(|v| v * v).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Integrates the EIT system from `initial` until it is steady.
///
/// The state counts as steady when the Newton correction `J⁻¹ f` is below
/// `steady_tol` of the state norm; for this (locally linear) system that is
/// the relative distance to the fixed point.
pub fn integrate_eit(
    cavity: &OpticalCavityParams,
    medium: &EitMediumParams,
    delta: TwoPhotonDetuning,
    initial: &EitState,
    settings: &OracleSettings,
    record: bool,
) -> Result<EitOracleRun> {
    let sys = EitSystem {
        delta_ca: cavity.detuning.get(),
        half_kappa: cavity.kappa.get() / 2.0,
        drive: cavity.drive,
        e: medium.rabi_single_atom.get(),
        omega: medium.rabi_control.get(),
        delta_a: medium.delta_a.get(),
        delta: delta.0.get(),
        delta_c: medium.control_detuning(delta).get(),
        half_ge: medium.gamma_e.get() / 2.0,
        half_gm: medium.gamma_gm.get() / 2.0,
        n_g: initial.n_ground,
        n_m: initial.n_meta,
    };
    let (ng, nm) = (initial.n_ground, initial.n_meta);
    let mut trajectory = Vec::new();
    let mut push = |t: f64, y: &[f64]| trajectory.push((t, EitState::from_slice(y, ng, nm)));
    let tol = settings.steady_tol;
    let sol: Solution = integrate_to_steady::<_, Rosenbrock23, _>(
        &sys,
        &initial.to_vec(),
        settings.t_end,
        &settings.tolerances,
        |y, f| newton_distance(&sys, y, f) < tol,
        true,
        if record { Some(&mut push) } else { None },
    )?;
    Ok(EitOracleRun {
        steady: EitState::from_slice(&sol.y, ng, nm),
        t: sol.t,
        accepted_steps: sol.accepted_steps,
        rejected_steps: sol.rejected_steps,
        trajectory,
    })
}

/// RIR populations and coherences on a momentum grid, with the field held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct RirState {
    pub a: Complex64,
    pub populations: Vec<f64>,
    pub zeta_plus: Vec<Complex64>,
    pub zeta_minus: Vec<Complex64>,
}

impl RirState {
    /// Thermal populations, no coherences.
    pub fn thermal(medium: &RirMediumParams, grid: &MomentumGrid, a: Complex64) -> Self {
        let n = grid.n_points;
        let z = Complex64::new(0.0, 0.0);
        RirState { a, populations: thermal_populations(medium, grid), zeta_plus: vec![z; n], zeta_minus: vec![z; n] }
    }

    fn to_vec(&self) -> Vec<f64> {
        let n = self.populations.len();
        let mut y = Vec::with_capacity(5 * n);
        for z in self.zeta_plus.iter().chain(&self.zeta_minus) {
            y.push(z.re);
            y.push(z.im);
        }
        y.extend_from_slice(&self.populations);
        y
    }

    fn from_slice(y: &[f64], n: usize, a: Complex64) -> Self {
        RirState {
            a,
            zeta_plus: (0..n).map(|k| c(y, k)).collect(),
            zeta_minus: (0..n).map(|k| c(y, n + k)).collect(),
            populations: y[4 * n..5 * n].to_vec(),
        }
    }

    pub fn total_population(&self) -> f64 {
        self.populations.iter().sum()
    }
}

struct RirSystem {
    n: usize,
    shift: usize,
    d_plus: Vec<f64>,
    d_minus: Vec<f64>,
    gamma: f64,
    gamma_pop: f64,
    /// `iβℰ a`.
    coupling: Complex64,
    thermal: Vec<f64>,
}

impl OdeSystem for RirSystem {
    fn dim(&self) -> usize {
        5 * self.n
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let i = Complex64::i();
        let n = self.n;
        let s = self.shift as isize;
        let pop = &y[4 * n..5 * n];
        // iβℰa* = −conj(iβℰa)
        let coupling_conj = -self.coupling.conj();
        for k in 0..n {
            let zp = c(y, k);
            let zm = c(y, n + k);
            let dzp = -(i * self.d_plus[k] + self.gamma) * zp - coupling_conj * (shifted(pop, k, s) - pop[k]);
            let dzm = (i * self.d_minus[k] - self.gamma) * zm + self.coupling * (pop[k] - shifted(pop, k, -s));
            dy[2 * k] = dzp.re;
            dy[2 * k + 1] = dzp.im;
            dy[2 * (n + k)] = dzm.re;
            dy[2 * (n + k) + 1] = dzm.im;
            dy[4 * n + k] = 2.0 * (self.coupling * (zp - zm.conj())).re - self.gamma_pop * (pop[k] - self.thermal[k]);
        }
    }
}

/// Outcome of an RIR oracle run.
#[derive(Debug, Clone, PartialEq)]
pub struct RirOracleRun {
    pub steady: RirState,
    pub t: f64,
    pub accepted_steps: usize,
    /// Susceptibility from contracting the steady coherences with the field equation.
    pub chi: ComplexSusceptibility,
    /// `(t, χ, Σ Π)` after every accepted step, if recording was requested.
    pub trajectory: Vec<(f64, ComplexSusceptibility, f64)>,
}

fn block_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Integrates the RIR coherences and populations at fixed field until steady.
///
/// Steady means, separately for the ζ₊, ζ₋ and Π blocks, `‖ẏ‖ ≤ steady_tol·r·‖y‖`
/// with `r` the block's slowest relaxation rate (`γ_coh` for the coherences,
/// `γ_pop` for the populations).
pub fn integrate_rir(
    medium: &RirMediumParams,
    grid: &MomentumGrid,
    delta: AngularFrequency,
    initial: &RirState,
    settings: &OracleSettings,
    record: bool,
) -> Result<RirOracleRun> {
    let n = grid.n_points;
    if initial.populations.len() != n || initial.zeta_plus.len() != n || initial.zeta_minus.len() != n {
        return Err(Error::OutOfRange { field: "initial state", constraint: "sizes match the momentum grid" });
    }
    let wr4 = 4.0 * medium.omega_r.get();
    let d = delta.get();
    let be = medium.beta() * medium.rabi_single_atom.get();
    let sys = RirSystem {
        n,
        shift: grid.unit_shift(),
        d_plus: grid.p_values.iter().map(|p| d + wr4 * (2.0 * p + 1.0)).collect(),
        d_minus: grid.p_values.iter().map(|p| d + wr4 * (2.0 * p - 1.0)).collect(),
        gamma: medium.gamma_coh.get(),
        gamma_pop: medium.gamma_pop.get(),
        coupling: Complex64::i() * be * initial.a,
        thermal: thermal_populations(medium, grid),
    };
    let a = initial.a;
    let mut trajectory = Vec::new();
    let mut push = |t: f64, y: &[f64]| {
        let s = RirState::from_slice(y, n, a);
        let chi = contract_coherences(medium, &s.zeta_minus, a).unwrap_or(ComplexSusceptibility::ZERO);
        trajectory.push((t, chi, s.total_population()));
    };
    let (tol, g, gp) = (settings.steady_tol, sys.gamma, sys.gamma_pop);
    let steady = |y: &[f64], f: &[f64]| {
        let blocks = [(0..2 * n, g), (2 * n..4 * n, g), (4 * n..5 * n, gp)];
        blocks.into_iter().all(|(r, rate)| {
            let ny = block_norm(&y[r.clone()]);
            ny > 0.0 && block_norm(&f[r]) <= tol * rate * ny
        })
    };
    let sol = integrate_to_steady::<_, Dopri5, _>(
        &sys,
        &initial.to_vec(),
        settings.t_end,
        &settings.tolerances,
        steady,
        true,
        if record { Some(&mut push) } else { None },
    )?;
    let state = RirState::from_slice(&sol.y, n, a);
    let chi = contract_coherences(medium, &state.zeta_minus, a)?;
    Ok(RirOracleRun { steady: state, t: sol.t, accepted_steps: sol.accepted_steps, chi, trajectory })
}
