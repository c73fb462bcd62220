//! Radial Morawetz weights `phi`, `psi = (1/s) int_0^s phi`, and the cutoff
//! `chi_R`, all built from the smooth step `theta`.

use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::spectral::{smooth_step_jet, GridSpec};

const TABLE_CELLS: usize = 2048;

/// Cumulative integral `I(s) = int_1^s theta` tabulated on `[1, 2]`.
struct StepIntegral {
    values: Vec<f64>,
}

static STEP_INTEGRAL: Lazy<StepIntegral> = Lazy::new(|| {
    let ds = 1.0 / TABLE_CELLS as f64;
    let mut values = Vec::with_capacity(TABLE_CELLS + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for k in 0..TABLE_CELLS {
        let a = 1.0 + k as f64 * ds;
        acc += integrate(|s| smooth_step_jet(s).0, a, a + ds, 1, 8);
        values.push(acc);
    }
    StepIntegral { values }
});

impl StepIntegral {
    /// Cubic Hermite interpolation using the exact derivative `theta`.
    fn eval(&self, s: f64) -> f64 {
        if s <= 1.0 {
            return 0.0;
        }
        if s >= 2.0 {
            return self.values[TABLE_CELLS];
        }
        let ds = 1.0 / TABLE_CELLS as f64;
        let x = (s - 1.0) / ds;
        let k = (x.floor() as usize).min(TABLE_CELLS - 1);
        let t = x - k as f64;
        let s0 = 1.0 + k as f64 * ds;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (smooth_step_jet(s0).0 * ds, smooth_step_jet(s0 + ds).0 * ds);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1
    }
}

/// `phi(s) = theta(s)`.
pub fn phi(s: f64) -> f64 {
    smooth_step_jet(s).0
}

/// `psi(s) = (1/s) int_0^s phi`.
pub fn psi(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else {
        (1.0 + STEP_INTEGRAL.eval(s)) / s
    }
}

/// `psi'(s) = (phi(s) - psi(s)) / s`.
pub fn psi_prime(s: f64) -> f64 {
    if s <= 1.0 {
        0.0
    } else {
        (phi(s) - psi(s)) / s
    }
}

/// `Delta_x [psi + phi](x/R)` for `|x| = s R`, from the radial formula
/// `R^{-2} (phi'' + (2 phi' - psi') / s)`.
pub fn weight_laplacian(s: f64, radius: f64) -> f64 {
    if s <= 1.0 {
        return 0.0;
    }
    let (_, d1, d2) = smooth_step_jet(s);
    (d2 + (2.0 * d1 - psi_prime(s)) / s) / (radius * radius)
}

/// Grid samples of the Morawetz weights at radius `R`.
#[derive(Debug, Clone)]
pub struct WeightPair {
    radius: f64,
    phi: Vec<f64>,
    psi: Vec<f64>,
    chi: Vec<f64>,
    laplacian: Vec<f64>,
}

impl WeightPair {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `phi(x/R)`
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `psi(x/R)`
    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    /// `chi_R(x)`
    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// `Delta [psi + phi](x/R)`
    pub fn laplacian(&self) -> &[f64] {
        &self.laplacian
    }
}

pub fn make_weights(grid: &GridSpec, radius: f64) -> Result<WeightPair> {
    if !(radius > 0.0 && radius <= grid.half_width() / 2.0) {
        return Err(Error::RadiusTooLarge {
            radius,
            half_width: grid.half_width(),
        });
    }
    let s: Vec<f64> = grid.radii().into_iter().map(|r| r / radius).collect();
    let phi_v: Vec<f64> = s.iter().map(|&s| phi(s)).collect();
    Ok(WeightPair {
        radius,
        chi: phi_v.clone(),
        psi: s.iter().map(|&s| psi(s)).collect(),
        laplacian: s.iter().map(|&s| weight_laplacian(s, radius)).collect(),
        phi: phi_v,
    })
}
