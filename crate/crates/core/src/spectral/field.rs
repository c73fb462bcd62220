use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft;
use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;

/// Complex samples of a function on a [`GridSpec`], row-major with `y`
/// as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Field2D {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { t: f64::NAN });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_raw(grid, vec![Complex64::default(); grid.len()])
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let xs = grid.coordinates();
        let mut values = Vec::with_capacity(grid.len());
        for &y in &xs {
            for &x in &xs {
                values.push(f(x, y));
            }
        }
        Self::from_raw(grid, values)
    }

    pub fn from_radial(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x, y| Complex64::new(f(x.hypot(y)), 0.0))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.grid.n() + ix]
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&z| f(z)).collect())
    }

    /// Pointwise product with a real weight sampled on the same grid.
    pub fn weighted(&self, weight: &[f64]) -> Self {
        debug_assert_eq!(weight.len(), self.values.len());
        Self::from_raw(
            self.grid,
            self.values.iter().zip(weight).map(|(z, w)| z * w).collect(),
        )
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|z| z * a)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// `h^2 * sum f(u)` in pairwise order.
    pub fn integrate(&self, f: impl Fn(Complex64) -> f64) -> f64 {
        let terms: Vec<f64> = self.values.iter().map(|&z| f(z)).collect();
        self.grid.cell_area() * pairwise_sum(&terms)
    }

    /// `h^2 * sum w(x) f(u(x))` in pairwise order.
    pub fn integrate_weighted(&self, weight: &[f64], f: impl Fn(Complex64) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .values
            .iter()
            .zip(weight)
            .map(|(&z, &w)| w * f(z))
            .collect();
        self.grid.cell_area() * pairwise_sum(&terms)
    }

    /// `int |u|^p dx`.
    pub fn lp_pow(&self, p: i32) -> f64 {
        self.integrate(|z| z.norm_sqr().powf(p as f64 / 2.0))
    }

    pub fn l2_norm(&self) -> f64 {
        self.integrate(|z| z.norm_sqr()).sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Unnormalized DFT in FFT bin order.
    pub(crate) fn dft(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        fft::forward(&mut data, self.grid.n());
        data
    }

    pub(crate) fn from_dft(grid: GridSpec, mut data: Vec<Complex64>) -> Self {
        fft::inverse(&mut data, grid.n());
        Self::from_raw(grid, data)
    }

    /// Samples of the unitary Fourier transform on the frequency lattice
    /// (FFT bin order), scaled so that `sum |u_hat|^2 dxi^2 = sum |u|^2 h^2`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let scale = self.grid.cell_area() / (2.0 * PI);
        self.dft().into_iter().map(|z| z * scale).collect()
    }

    /// `||u_hat||_2` on the frequency lattice.
    pub fn spectral_l2_norm(&self) -> f64 {
        let dxi = self.grid.frequency_step();
        let terms: Vec<f64> = self.spectrum().iter().map(|z| z.norm_sqr()).collect();
        (pairwise_sum(&terms) * dxi * dxi).sqrt()
    }

    /// Relative size of the spectral content with `|xi| > cutoff`.
    pub fn spectral_tail(&self, cutoff: f64) -> f64 {
        let hat = self.dft();
        let radii = self.grid.frequency_radii();
        let total: Vec<f64> = hat.iter().map(|z| z.norm_sqr()).collect();
        let tail: Vec<f64> = hat
            .iter()
            .zip(&radii)
            .map(|(z, &k)| if k > cutoff { z.norm_sqr() } else { 0.0 })
            .collect();
        let total = pairwise_sum(&total);
        if total == 0.0 {
            return 0.0;
        }
        (pairwise_sum(&tail) / total).sqrt()
    }

    /// Images of the field under the exact symmetries of the grid
    /// (reflections in each axis and the diagonal swap).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.grid.n();
        let scale = self.linf();
        if scale == 0.0 {
            return 0.0;
        }
        let reflect = |i: usize| (n - i) % n;
        let mut worst: f64 = 0.0;
        for iy in 0..n {
            for ix in 0..n {
                let u = self.at(ix, iy);
                worst = worst
                    .max((u - self.at(reflect(ix), iy)).norm())
                    .max((u - self.at(ix, reflect(iy))).norm())
                    .max((u - self.at(iy, ix)).norm());
            }
        }
        worst / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridSpec, seed: u64) -> Field2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field2D::new(grid, values).unwrap()
    }

    #[test]
    fn plancherel_on_random_fields() {
        let grid = GridSpec::new(64, 7.5).unwrap();
        for seed in 0..5 {
            let u = random_field(grid, seed);
            let a = u.l2_norm();
            let b = u.spectral_l2_norm();
            assert!((a - b).abs() / a <= 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_non_finite_samples() {
        let grid = GridSpec::new(16, 1.0).unwrap();
        let mut v = vec![Complex64::default(); 256];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(Field2D::new(grid, v).is_err());
        assert!(Field2D::new(grid, vec![Complex64::default(); 10]).is_err());
    }

    #[test]
    fn radial_field_has_no_symmetry_defect() {
        let grid = GridSpec::new(32, 4.0).unwrap();
        let u = Field2D::from_radial(grid, |r| (-r * r).exp());
        assert_eq!(u.symmetry_defect(), 0.0);
        let v = Field2D::from_fn(grid, |x, y| Complex64::new(x, y) * (-(x * x + y * y)).exp());
        assert!(v.symmetry_defect() > 0.1);
    }
}
