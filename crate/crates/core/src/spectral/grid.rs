use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on the box `[-L, L)^2` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    half_width: f64,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if n < 16 {
            return Err(Error::GridTooSmall(n));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::BadHalfWidth(half_width));
        }
        Ok(Self { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Grid spacing `h = 2L/n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Area element `h^2` used by every quadrature.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Lattice spacing of the frequency grid, `pi / L`.
    pub fn frequency_step(&self) -> f64 {
        PI / self.half_width
    }

    /// Largest frequency component `pi / h`.
    pub fn max_frequency(&self) -> f64 {
        PI / self.spacing()
    }

    /// `x_i = -L + i h`, written so that `x_{n-i} = -x_i` exactly.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing()
    }

    /// Frequency of FFT bin `k`, ordered `0, 1, .., n/2-1, -n/2, .., -1`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        let signed = if k < self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        };
        signed * self.frequency_step()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coordinate(i)).collect()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.wavenumber(k)).collect()
    }

    /// `|x|` at every grid point, row-major (`y` is the slow index).
    pub fn radii(&self) -> Vec<f64> {
        let xs = self.coordinates();
        let mut out = Vec::with_capacity(self.len());
        for &y in &xs {
            for &x in &xs {
                out.push(x.hypot(y));
            }
        }
        out
    }

    /// `|xi|` at every FFT bin, row-major.
    pub fn frequency_radii(&self) -> Vec<f64> {
        let ks = self.wavenumbers();
        let mut out = Vec::with_capacity(self.len());
        for &ky in &ks {
            for &kx in &ks {
                out.push(kx.hypot(ky));
            }
        }
        out
    }

    /// Applies `f(|x|)` at every grid point.
    pub fn radial_map(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.radii().into_iter().map(f).collect()
    }
}

pub fn make_grid(n: usize, half_width: f64) -> Result<GridSpec> {
    GridSpec::new(n, half_width)
}
