use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::forward_1d;
use super::field::Field2D;
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;

/// Samples of a radial function on the midpoint mesh `r_j = (j + 1/2) dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    r_values: Vec<f64>,
    samples: Vec<Complex64>,
    dr: f64,
}

impl RadialProfile {
    pub fn new(dr: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(dr.is_finite() && dr > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dr must be positive, got {dr}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empty radial profile".into()));
        }
        let r_values = (0..samples.len()).map(|j| (j as f64 + 0.5) * dr).collect();
        Ok(Self {
            r_values,
            samples,
            dr,
        })
    }

    pub fn from_fn(m: usize, dr: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = (0..m).map(|j| f((j as f64 + 0.5) * dr)).collect();
        Self::new(dr, samples)
    }

    pub fn from_real(dr: f64, samples: &[f64]) -> Result<Self> {
        Self::new(
            dr,
            samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Outer edge of the mesh, `m * dr`.
    pub fn r_max(&self) -> f64 {
        self.samples.len() as f64 * self.dr
    }

    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != self.samples.len() {
            return Err(Error::MeshMismatch);
        }
        Ok(Self {
            r_values: self.r_values.clone(),
            samples,
            dr: self.dr,
        })
    }

    /// `2 pi int |f|^2 r dr` by the midpoint rule with the Euler-Maclaurin
    /// end correction at the origin, where `(|f|^2 r)' = |f(0)|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        let terms: Vec<f64> = self
            .samples
            .iter()
            .zip(&self.r_values)
            .map(|(z, r)| z.norm_sqr() * r)
            .collect();
        let origin = self.interpolate(0.0).norm_sqr();
        2.0 * PI * (self.dr * pairwise_sum(&terms) - self.dr * self.dr * origin / 24.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Four-point Lagrange interpolation; zero beyond the mesh, even
    /// extension through the origin.
    pub fn interpolate(&self, r: f64) -> Complex64 {
        let m = self.samples.len();
        let s = r.abs() / self.dr - 0.5;
        if s > (m - 1) as f64 {
            return Complex64::default();
        }
        let base = s.floor() as isize - 1;
        let sample = |j: isize| -> Complex64 {
            let idx = if j < 0 { (-j - 1) as usize } else { j as usize };
            self.samples.get(idx).copied().unwrap_or_default()
        };
        let t = s - base as f64;
        let mut acc = Complex64::default();
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (t - b as f64) / (a as f64 - b as f64);
                }
            }
            acc += sample(base + a as isize) * w;
        }
        acc
    }
}

/// Exact trigonometric interpolant of one grid line.
struct LineInterpolant {
    coeffs: Vec<Complex64>,
    dxi: f64,
    origin: f64,
}

impl LineInterpolant {
    fn new(line: Vec<Complex64>, half_width: f64) -> Self {
        let n = line.len();
        let mut coeffs = line;
        forward_1d(&mut coeffs);
        for c in coeffs.iter_mut() {
            *c /= n as f64;
        }
        Self {
            coeffs,
            dxi: PI / half_width,
            origin: -half_width,
        }
    }

    fn eval(&self, x: f64) -> Complex64 {
        let n = self.coeffs.len();
        let s = x - self.origin;
        let w = Complex64::from_polar(1.0, self.dxi * s);
        let wc = w.conj();
        let mut pos = Complex64::new(1.0, 0.0);
        let mut neg = Complex64::new(1.0, 0.0);
        let mut acc = self.coeffs[0];
        for k in 1..n / 2 {
            pos *= w;
            neg *= wc;
            acc += self.coeffs[k] * pos + self.coeffs[n - k] * neg;
        }
        acc + self.coeffs[n / 2] * (self.dxi * (n / 2) as f64 * s).cos()
    }
}

/// Radial profile extracted from a grid field, with a measure of how far
/// the field is from radial symmetry.
#[derive(Debug, Clone)]
pub struct RadialExtraction {
    pub profile: RadialProfile,
    /// Largest relative discrepancy between the four axis rays, or under
    /// the exact symmetries of the grid, whichever is larger.
    pub angular_deviation: f64,
}

/// Samples `u` on the midpoint mesh with `m` cells over `[0, L]`.
///
/// Each radius is evaluated on the four axis rays by exact trigonometric
/// interpolation of the central row and column, then averaged.
pub fn radial_average(u: &Field2D, m: usize) -> Result<RadialExtraction> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    let grid = *u.grid();
    let n = grid.n();
    let c = n / 2;
    let row: Vec<Complex64> = (0..n).map(|ix| u.at(ix, c)).collect();
    let col: Vec<Complex64> = (0..n).map(|iy| u.at(c, iy)).collect();
    let row = LineInterpolant::new(row, grid.half_width());
    let col = LineInterpolant::new(col, grid.half_width());
    let dr = grid.half_width() / m as f64;
    let scale = u.linf();
    let mut samples = Vec::with_capacity(m);
    let mut ray_dev: f64 = 0.0;
    for j in 0..m {
        let r = (j as f64 + 0.5) * dr;
        let rays = [row.eval(r), row.eval(-r), col.eval(r), col.eval(-r)];
        let mean = rays.iter().sum::<Complex64>() / 4.0;
        for v in rays {
            ray_dev = ray_dev.max((v - mean).norm());
        }
        samples.push(mean);
    }
    let ray_dev = if scale > 0.0 { ray_dev / scale } else { 0.0 };
    Ok(RadialExtraction {
        profile: RadialProfile::new(dr, samples)?,
        angular_deviation: ray_dev.max(u.symmetry_defect()),
    })
}

/// Lifts a radial profile onto the grid by interpolation in `|x|`.
pub fn radial_lift(profile: &RadialProfile, grid: super::GridSpec) -> Field2D {
    Field2D::from_fn(grid, |x, y| profile.interpolate(x.hypot(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    #[test]
    fn gaussian_profile_is_recovered() {
        let grid = GridSpec::new(128, 10.0).unwrap();
        let u = Field2D::from_radial(grid, |r| (-0.5 * r * r).exp());
        let ext = radial_average(&u, 400).unwrap();
        for (r, z) in ext.profile.r_values().iter().zip(ext.profile.samples()) {
            assert!((z.re - (-0.5 * r * r).exp()).abs() <= 1e-6, "r={r}");
            assert!(z.im.abs() <= 1e-12);
        }
        assert!(ext.angular_deviation < 1e-12);
        let e = ext.profile.l2_norm_sq() - PI;
        assert!(e.abs() < 1e-7, "{e}");
    }

    #[test]
    fn angular_mode_is_flagged() {
        let grid = GridSpec::new(64, 8.0).unwrap();
        let u = Field2D::from_fn(grid, |x, y| Complex64::new(x, y) * (-(x * x + y * y)).exp());
        let ext = radial_average(&u, 50).unwrap();
        assert!(ext.angular_deviation > 0.1);
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let p = RadialProfile::from_fn(50, 0.1, |r| {
            Complex64::new(1.0 + r * r - 0.3 * r * r * r, 0.0)
        })
        .unwrap();
        for r in [0.37, 1.01, 2.5, 4.2] {
            let exact = 1.0 + r * r - 0.3 * r * r * r;
            assert!((p.interpolate(r).re - exact).abs() < 1e-12, "r={r}");
        }
        assert_eq!(p.interpolate(6.0), Complex64::default());
        assert_eq!(p.r_max(), 5.0);
        assert!(RadialProfile::new(0.0, vec![Complex64::default()]).is_err());
    }
}
