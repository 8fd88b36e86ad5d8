//! Adaptive ODE integrators for the oracle module.
//!
//! - [`Dopri5`]: explicit Dormand–Prince 5(4) with FSAL, for non-stiff systems.
//! - [`Rosenbrock23`]: the linearly implicit, L-stable 2(3) pair of Shampine &
//!   Reichelt (the `ode23s` scheme), for stiff systems of small dimension. It
//!   needs a Jacobian; [`OdeSystem::jacobian`] defaults to forward differences.
//!
//! Both run through [`integrate_to_steady`], which stops as soon as a
//! caller-supplied steady-state predicate holds.

// Dense linear algebra and Runge–Kutta stages read most clearly with index loops.
#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// An autonomous or non-autonomous first-order system `y' = f(t, y)` on real vectors.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Row-major Jacobian `∂f_i/∂y_j` into `jac` (length `dim²`).
    fn jacobian(&self, t: f64, y: &[f64], jac: &mut [f64]) {
        let n = self.dim();
        let mut f0 = vec![0.0; n];
        let mut f1 = vec![0.0; n];
        let mut yp = y.to_vec();
        self.rhs(t, y, &mut f0);
        for j in 0..n {
            let h = 1e-8 * y[j].abs().max(1.0);
            yp[j] = y[j] + h;
            self.rhs(t, &yp, &mut f1);
            yp[j] = y[j];
            for i in 0..n {
                jac[i * n + j] = (f1[i] - f0[i]) / h;
            }
        }
    }
}

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Abort after this many attempted steps.
    pub max_steps: usize,
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Tolerances { rtol, atol, h_init: None, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol >= 0.0 && self.h_max > 0.0) {
            return Err(Error::OutOfRange { field: "tolerances", constraint: "rtol > 0, atol >= 0, h_max > 0" });
        }
        Ok(())
    }
}

/// A one-step method with an embedded error estimate.
pub trait Stepper {
    /// Order used in the step-size update exponent `1/(q+1)`.
    const ERROR_ORDER: f64;

    fn new(dim: usize) -> Self;

    /// Attempts a step of size `h` from `(t, y)` with `f = f(t, y)`. On return
    /// `y_new` holds the proposal and `f_new` its derivative.
    fn attempt<S: OdeSystem>(
        &mut self,
        sys: &S,
        t: f64,
        y: &[f64],
        f: &[f64],
        h: f64,
        tol: &Tolerances,
        y_new: &mut [f64],
        f_new: &mut [f64],
    ) -> f64;

    /// Called after a rejected step or an accepted step so cached data can be invalidated.
    fn accepted(&mut self) {}
}

fn weighted_rms(err: &[f64], y: &[f64], y_new: &[f64], tol: &Tolerances) -> f64 {
    let n = err.len().max(1) as f64;
    let s: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let sc = tol.atol + tol.rtol * a.abs().max(b.abs());
            let r = if sc > 0.0 { e / sc } else { 0.0 };
            r * r
        })
        .sum();
    (s / n).sqrt()
}

/// Dormand–Prince 5(4).
pub struct Dopri5 {
    k: [Vec<f64>; 6],
    tmp: Vec<f64>,
    err: Vec<f64>,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl Stepper for Dopri5 {
    const ERROR_ORDER: f64 = 4.0;

    fn new(dim: usize) -> Self {
        Dopri5 { k: core::array::from_fn(|_| vec![0.0; dim]), tmp: vec![0.0; dim], err: vec![0.0; dim] }
    }

    fn attempt<S: OdeSystem>(
        &mut self,
        sys: &S,
        t: f64,
        y: &[f64],
        f: &[f64],
        h: f64,
        tol: &Tolerances,
        y_new: &mut [f64],
        f_new: &mut [f64],
    ) -> f64 {
        let n = y.len();
        let [k2, k3, k4, k5, k6, _] = &mut self.k;
        let tmp = &mut self.tmp;
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * f[i];
        }
        sys.rhs(t + h / 5.0, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * f[i] + A32 * k2[i]);
        }
        sys.rhs(t + 3.0 * h / 10.0, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * f[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + 4.0 * h / 5.0, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * f[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + 8.0 * h / 9.0, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * f[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.rhs(t + h, tmp, k6);
        for i in 0..n {
            y_new[i] = y[i] + h * (B1 * f[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        sys.rhs(t + h, y_new, f_new);
        for i in 0..n {
            self.err[i] = h * (E1 * f[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * f_new[i]);
        }
        weighted_rms(&self.err, y, y_new, tol)
    }
}

/// Dense LU factorization with partial pivoting, row-major.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl Lu {
    /// Factorizes `a` (row-major, `n × n`). Fails on an exactly singular pivot.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, max) = (k..n).map(|i| (i, a[i * n + k].abs())).fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if !(max > 0.0) {
                return Err(Error::DegenerateDenominator);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] / pivot;
                a[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= l * a[k * n + j];
                    }
                }
            }
        }
        Ok(Lu { n, a, piv })
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.a[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.a[i * n + j] * x[j];
            }
            x[i] = s / self.a[i * n + i];
        }
        b.copy_from_slice(&x);
    }
}

/// Shampine–Reichelt Rosenbrock 2(3) (`ode23s`).
pub struct Rosenbrock23 {
    jac: Vec<f64>,
    jac_valid: bool,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    f1: Vec<f64>,
    tmp: Vec<f64>,
}

impl Stepper for Rosenbrock23 {
    const ERROR_ORDER: f64 = 2.0;

    fn new(dim: usize) -> Self {
        Rosenbrock23 {
            jac: vec![0.0; dim * dim],
            jac_valid: false,
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            f1: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    fn attempt<S: OdeSystem>(
        &mut self,
        sys: &S,
        t: f64,
        y: &[f64],
        f: &[f64],
        h: f64,
        tol: &Tolerances,
        y_new: &mut [f64],
        f_new: &mut [f64],
    ) -> f64 {
        let n = y.len();
        let d = 1.0 / (2.0 + core::f64::consts::SQRT_2);
        let e32 = 6.0 + core::f64::consts::SQRT_2;
        if !self.jac_valid {
            sys.jacobian(t, y, &mut self.jac);
            self.jac_valid = true;
        }
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[i * n + j] = -h * d * self.jac[i * n + j];
            }
            w[i * n + i] += 1.0;
        }
        let lu = match Lu::factor(w, n) {
            Ok(lu) => lu,
            Err(_) => return f64::INFINITY,
        };
        self.k1.copy_from_slice(f);
        lu.solve(&mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k1[i];
        }
        sys.rhs(t + 0.5 * h, &self.tmp, &mut self.f1);
        for i in 0..n {
            self.k2[i] = self.f1[i] - self.k1[i];
        }
        lu.solve(&mut self.k2);
        for i in 0..n {
            self.k2[i] += self.k1[i];
            y_new[i] = y[i] + h * self.k2[i];
        }
        sys.rhs(t + h, y_new, f_new);
        for i in 0..n {
            self.k3[i] = f_new[i] - e32 * (self.k2[i] - self.f1[i]) - 2.0 * (self.k1[i] - f[i]);
        }
        lu.solve(&mut self.k3);
        for i in 0..n {
            self.tmp[i] = h / 6.0 * (self.k1[i] - 2.0 * self.k2[i] + self.k3[i]);
        }
        weighted_rms(&self.tmp, y, y_new, tol)
    }

    fn accepted(&mut self) {
        self.jac_valid = false;
    }
}

/// Final state of an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub t: f64,
    pub y: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Whether the steady-state predicate held at `t`.
    pub steady: bool,
}

/// Observer called with `(t, y)` at the initial point and after every accepted step.
pub type Observer<'a> = &'a mut dyn FnMut(f64, &[f64]);

/// Integrates from `(0, y0)` until `steady(y, f(y))` holds or `t_end` is reached.
///
/// Fails with [`Error::NoConvergence`] if `t_end` is reached without a steady
/// state and `require_steady` is set, and with [`Error::StepSizeUnderflow`]
/// when the step collapses. The optional `observer` sees every accepted step.
pub fn integrate_to_steady<S, M, P>(
    sys: &S,
    y0: &[f64],
    t_end: f64,
    tol: &Tolerances,
    mut steady: P,
    require_steady: bool,
    mut observer: Option<Observer<'_>>,
) -> Result<Solution>
where
    S: OdeSystem,
    M: Stepper,
    P: FnMut(&[f64], &[f64]) -> bool,
{
    tol.validate()?;
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::OutOfRange { field: "initial state", constraint: "length = system dimension" });
    }
    let mut stepper = M::new(n);
    let mut y = y0.to_vec();
    let mut f = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut f_new = vec![0.0; n];
    let mut t = 0.0;
    sys.rhs(t, &y, &mut f);
    if let Some(obs) = observer.as_mut() {
        obs(t, &y);
    }
    if steady(&y, &f) {
        return Ok(Solution { t, y, accepted_steps: 0, rejected_steps: 0, steady: true });
    }
    let mut h = tol.h_init.unwrap_or_else(|| initial_step(&y, &f, tol, M::ERROR_ORDER)).min(tol.h_max);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let exponent = 1.0 / (M::ERROR_ORDER + 1.0);
    for _ in 0..tol.max_steps {
        if t >= t_end {
            break;
        }
        h = h.min(t_end - t).min(tol.h_max);
        if !(h > 1e-14 * t.abs().max(1e-300)) || !h.is_finite() {
            return Err(Error::StepSizeUnderflow { t });
        }
        let err = stepper.attempt(sys, t, &y, &f, h, tol, &mut y_new, &mut f_new);
        let finite = err.is_finite() && y_new.iter().all(|v| v.is_finite());
        if finite && err <= 1.0 {
            t += h;
            core::mem::swap(&mut y, &mut y_new);
            core::mem::swap(&mut f, &mut f_new);
            stepper.accepted();
            accepted += 1;
            if let Some(obs) = observer.as_mut() {
                obs(t, &y);
            }
            if steady(&y, &f) {
                return Ok(Solution { t, y, accepted_steps: accepted, rejected_steps: rejected, steady: true });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-exponent)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            rejected += 1;
            let factor = if finite { (0.9 * err.powf(-exponent)).clamp(0.1, 0.5) } else { 0.1 };
            h *= factor;
        }
    }
    if require_steady || t < t_end {
        return Err(Error::NoConvergence { t_end });
    }
    Ok(Solution { t, y, accepted_steps: accepted, rejected_steps: rejected, steady: false })
}

fn initial_step(y: &[f64], f: &[f64], tol: &Tolerances, order: f64) -> f64 {
    let scale = |v: f64, yi: f64| v / (tol.atol + tol.rtol * yi.abs());
    let n = y.len().max(1) as f64;
    let d0 = (y.iter().map(|&v| scale(v, v).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f.iter().zip(y).map(|(&v, &yi)| scale(v, yi).powi(2)).sum::<f64>() / n).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let _ = order;
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Decay(f64);
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -self.0 * y[0];
        }
    }

    /// Damped oscillator relaxing toward a forced fixed point.
    struct Forced {
        k: f64,
        c: f64,
    }
    impl OdeSystem for Forced {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -self.k * y[0] - self.c * y[1] + 1.0;
        }
    }

    fn run<M: Stepper, S: OdeSystem>(sys: &S, y0: &[f64], t_end: f64, rtol: f64) -> Solution {
        integrate_to_steady::<S, M, _>(sys, y0, t_end, &Tolerances::new(rtol, 1e-14), |_, _| false, false, None).unwrap()
    }

    #[test]
    fn dopri_exponential() {
        let s = run::<Dopri5, _>(&Decay(2.0), &[1.0], 3.0, 1e-10);
        assert_relative_eq!(s.y[0], (-6.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn rosenbrock_exponential() {
        let s = run::<Rosenbrock23, _>(&Decay(2.0), &[1.0], 3.0, 1e-8);
        assert_relative_eq!(s.y[0], (-6.0f64).exp(), max_relative = 1e-5);
    }

    #[test]
    fn rosenbrock_handles_stiff_decay() {
        let s = run::<Rosenbrock23, _>(&Decay(1e9), &[1.0], 1.0, 1e-6);
        assert!(s.y[0].abs() < 1e-12);
        assert!(s.accepted_steps < 1000, "{}", s.accepted_steps);
    }

    #[test]
    fn steady_state_detection() {
        let sys = Forced { k: 4.0, c: 1.0 };
        for stiff in [false, true] {
            let tol = Tolerances::new(1e-9, 1e-14);
            let pred = |y: &[f64], f: &[f64]| f[0].abs().max(f[1].abs()) < 1e-12 * y[0].abs();
            let s = if stiff {
                integrate_to_steady::<_, Rosenbrock23, _>(&sys, &[0.0, 0.0], 1e3, &tol, pred, true, None)
            } else {
                integrate_to_steady::<_, Dopri5, _>(&sys, &[0.0, 0.0], 1e3, &tol, pred, true, None)
            }
            .unwrap();
            assert!(s.steady);
            assert_relative_eq!(s.y[0], 0.25, max_relative = 1e-10);
        }
    }

    #[test]
    fn no_convergence_reported() {
        let r = integrate_to_steady::<_, Dopri5, _>(
            &Decay(1.0),
            &[1.0],
            1.0,
            &Tolerances::new(1e-8, 0.0),
            |y, _| y[0].abs() < 1e-30,
            true,
            None,
        );
        assert_eq!(r, Err(Error::NoConvergence { t_end: 1.0 }));
    }

    #[test]
    fn trajectory_is_recorded() {
        let mut rec: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut push = |t: f64, y: &[f64]| rec.push((t, y.to_vec()));
        let s = integrate_to_steady::<_, Dopri5, _>(
            &Decay(1.0),
            &[1.0],
            1.0,
            &Tolerances::new(1e-6, 1e-12),
            |_, _| false,
            false,
            Some(&mut push),
        )
        .unwrap();
        assert_eq!(rec.len(), s.accepted_steps + 1);
        assert_eq!(rec[0], (0.0, vec![1.0]));
        assert!(rec.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn lu_solves_pivoted_system() {
        let lu = Lu::factor(vec![0.0, 2.0, 1.0, 1.0], 2).unwrap();
        let mut b = [4.0, 3.0];
        lu.solve(&mut b);
        assert_relative_eq!(b[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(b[1], 2.0, max_relative = 1e-15);
        assert!(Lu::factor(vec![1.0, 2.0, 2.0, 4.0], 2).is_err());
    }
}
