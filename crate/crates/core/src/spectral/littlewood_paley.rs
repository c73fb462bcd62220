//! Smooth step `theta` and the Littlewood-Paley projectors built from it.
//!
//! `theta(s) = 1` for `s <= 1`, `0` for `s >= 2`, and in between
//! `f(2 - s) / (f(2 - s) + f(s - 1))` with `f(x) = exp(-1/x)`.
//! The same profile is used for the spatial cutoffs `chi_R(x) = theta(|x|/R)`.

use num_complex::Complex64;

use super::calculus::apply_multiplier;
use super::field::Field2D;
use crate::error::{Error, Result};

fn bump(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / x).exp();
    let x2 = x * x;
    (f, f / x2, f * (1.0 / (x2 * x2) - 2.0 / (x2 * x)))
}

/// `(theta, theta', theta'')` at `s`.
pub fn smooth_step_jet(s: f64) -> (f64, f64, f64) {
    if s <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    let (a, fa1, fa2) = bump(2.0 - s);
    let (b, b1, b2) = bump(s - 1.0);
    let (a1, a2) = (-fa1, fa2);
    let d = a + b;
    let d1 = a1 + b1;
    let d2 = a2 + b2;
    let num1 = a1 * d - a * d1;
    let t0 = a / d;
    let t1 = num1 / (d * d);
    let t2 = (a2 * d - a * d2) / (d * d) - 2.0 * d1 * num1 / (d * d * d);
    (t0, t1, t2)
}

pub fn smooth_step(s: f64) -> f64 {
    smooth_step_jet(s).0
}

/// Smooth cutoff `chi_R(r) = theta(r / R)`.
pub fn cutoff(r: f64, radius: f64) -> f64 {
    smooth_step(r / radius)
}

/// Frequency band selector for [`lp_project`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    /// `P_{<=N}`
    Low,
    /// `P_N = P_{<=N} - P_{<=N/2}`
    Annulus,
    /// `P_{>N} = Id - P_{<=N}`
    High,
}

impl Band {
    pub fn symbol(self, xi: f64, n_freq: f64) -> f64 {
        match self {
            Band::Low => smooth_step(xi / n_freq),
            Band::Annulus => smooth_step(xi / n_freq) - smooth_step(2.0 * xi / n_freq),
            Band::High => 1.0 - smooth_step(xi / n_freq),
        }
    }
}

/// Checks that `n_freq` is dyadic and lies in `[dxi, pi/h]` for this grid.
pub fn check_frequency(grid: &super::GridSpec, n_freq: f64) -> Result<()> {
    let (min, max) = (grid.frequency_step(), grid.max_frequency());
    let dyadic = n_freq > 0.0 && n_freq.log2().fract() == 0.0;
    if !dyadic || n_freq < min || n_freq > max {
        return Err(Error::InadmissibleFrequency {
            value: n_freq,
            min,
            max,
        });
    }
    Ok(())
}

pub fn lp_project(u: &Field2D, band: Band, n_freq: f64) -> Result<Field2D> {
    check_frequency(u.grid(), n_freq)?;
    Ok(apply_multiplier(u, |kx, ky| {
        Complex64::new(band.symbol(kx.hypot(ky), n_freq), 0.0)
    }))
}
