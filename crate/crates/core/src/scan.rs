//! One-dimensional scan helpers: bracketed maxima, golden-section refinement
//! and full width at half maximum.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Evenly spaced grid of `n ≥ 2` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| if k == n - 1 { hi } else { lo + step * k as f64 }).collect()
}

/// Golden-section search for a maximum of `f` on `[a, b]` down to width `tol`.
pub fn golden_maximum<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd || fd.is_nan() {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Index of the largest finite sample, if any.
pub fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Grid scan of `[lo, hi]` with `n` points followed by golden-section
/// refinement in the neighbouring cells of the best sample.
pub fn refine_maximum<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize, tol: f64) -> f64 {
    let xs = linspace(lo, hi, n);
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let Some(k) = argmax(&ys) else { return f64::NAN };
    let a = xs[k.saturating_sub(1)];
    let b = xs[(k + 1).min(xs.len() - 1)];
    let x = golden_maximum(&mut f, a, b, tol);
    if f(x) >= ys[k] {
        x
    } else {
        xs[k]
    }
}

/// Width and centre of a single peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fwhm {
    pub width: f64,
    pub center: f64,
}

/// Bisection for the half-maximum crossing between `inside` (above) and `outside` (below).
fn crossing<F: FnMut(f64) -> f64>(f: &mut F, mut inside: f64, mut outside: f64, level: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if f(mid) >= level {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

fn fwhm_once<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64, n: usize) -> Result<Fwhm> {
    let xs = linspace(lo, hi, n);
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let k = argmax(&ys).ok_or(Error::GridTooCoarse)?;
    let a = xs[k.saturating_sub(1)];
    let b = xs[(k + 1).min(n - 1)];
    let center = golden_maximum(&mut *f, a, b, 1e-12 * (hi - lo));
    let (center, peak) = if f(center) >= ys[k] { (center, f(center)) } else { (xs[k], ys[k]) };
    let level = 0.5 * peak;
    let left = (0..=k).rev().find(|&j| !(ys[j] >= level)).ok_or(Error::GridTooCoarse)?;
    let right = (k..n).find(|&j| !(ys[j] >= level)).ok_or(Error::GridTooCoarse)?;
    let xl = crossing(f, xs[left + 1], xs[left], level);
    let xr = crossing(f, xs[right - 1], xs[right], level);
    Ok(Fwhm { width: xr - xl, center })
}

/// FWHM of the dominant peak of `f` on `[lo, hi]`.
///
/// The grid starts at `n` points and doubles until the width changes by less
/// than `rel_tol` (relative). Fails with [`Error::GridTooCoarse`] if the half
/// maximum is not crossed inside the window on both sides.
pub fn full_width_half_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize, rel_tol: f64) -> Result<Fwhm> {
    let mut n = n.max(5);
    let mut prev = fwhm_once(&mut f, lo, hi, n)?;
    for _ in 0..8 {
        n = 2 * n - 1;
        let next = fwhm_once(&mut f, lo, hi, n)?;
        if (next.width - prev.width).abs() <= rel_tol * next.width.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}
