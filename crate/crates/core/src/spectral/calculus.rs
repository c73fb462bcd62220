//! Fourier multipliers: free Schrödinger flow, derivatives, radial weights.

use num_complex::Complex64;

use super::field::Field2D;
use super::grid::GridSpec;

/// Applies the Fourier multiplier `m(xi_x, xi_y)` to `u`.
pub fn apply_multiplier(u: &Field2D, m: impl Fn(f64, f64) -> Complex64) -> Field2D {
    let grid = *u.grid();
    let mut hat = u.dft();
    multiply_in_place(&grid, &mut hat, m);
    Field2D::from_dft(grid, hat)
}

pub(crate) fn multiply_in_place(
    grid: &GridSpec,
    hat: &mut [Complex64],
    m: impl Fn(f64, f64) -> Complex64,
) {
    let ks = grid.wavenumbers();
    let n = grid.n();
    for (iy, &ky) in ks.iter().enumerate() {
        for (ix, &kx) in ks.iter().enumerate() {
            hat[iy * n + ix] *= m(kx, ky);
        }
    }
}

/// Precomputed free propagator `exp(-i t |xi|^2)` for a fixed time step.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    grid: GridSpec,
    phases: Vec<Complex64>,
}

impl LinearPropagator {
    pub fn new(grid: GridSpec, t: f64) -> Self {
        let phases = grid
            .frequency_radii()
            .into_iter()
            .map(|k| Complex64::from_polar(1.0, -t * k * k))
            .collect();
        Self { grid, phases }
    }

    pub fn apply(&self, u: &Field2D) -> Field2D {
        let mut v = u.clone();
        self.apply_in_place(&mut v);
        v
    }

    pub(crate) fn apply_in_place(&self, u: &mut Field2D) {
        debug_assert_eq!(u.grid(), &self.grid);
        let n = self.grid.n();
        let values = u.values_mut();
        // The phase depends on |xi| only, so the transposed spectrum will do.
        super::fft::forward_transposed(values, n);
        for (z, p) in values.iter_mut().zip(&self.phases) {
            *z *= p;
        }
        super::fft::inverse_transposed(values, n);
    }
}

/// Free Schrödinger evolution `e^{it Delta} u`.
pub fn linear_flow(u: &Field2D, t: f64) -> Field2D {
    if t == 0.0 {
        return u.clone();
    }
    LinearPropagator::new(*u.grid(), t).apply(u)
}

/// Spectral gradient `(d_x u, d_y u)`.
pub fn gradient(u: &Field2D) -> (Field2D, Field2D) {
    let grid = *u.grid();
    let hat = u.dft();
    let mut dx = hat.clone();
    let mut dy = hat;
    multiply_in_place(&grid, &mut dx, |kx, _| Complex64::new(0.0, kx));
    multiply_in_place(&grid, &mut dy, |_, ky| Complex64::new(0.0, ky));
    (Field2D::from_dft(grid, dx), Field2D::from_dft(grid, dy))
}

pub fn laplacian(u: &Field2D) -> Field2D {
    apply_multiplier(u, |kx, ky| Complex64::new(-(kx * kx + ky * ky), 0.0))
}

/// `||grad u||_2^2` evaluated on the spectrum.
pub fn gradient_norm_sq(u: &Field2D) -> f64 {
    let grid = u.grid();
    let hat = u.dft();
    let radii = grid.frequency_radii();
    let terms: Vec<f64> = hat
        .iter()
        .zip(&radii)
        .map(|(z, k)| k * k * z.norm_sqr())
        .collect();
    let n2 = grid.len() as f64;
    grid.cell_area() * crate::numerics::pairwise_sum(&terms) / n2
}

/// `|grad u|^2` at every grid point.
pub fn gradient_density(u: &Field2D) -> Vec<f64> {
    let (dx, dy) = gradient(u);
    dx.values()
        .iter()
        .zip(dy.values())
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .collect()
}

/// `sup_x |x|^{1/2} |u(x)|`.
pub fn weighted_radial_sup(u: &Field2D) -> f64 {
    u.grid()
        .radii()
        .iter()
        .zip(u.values())
        .map(|(r, z)| r.sqrt() * z.norm())
        .fold(0.0, f64::max)
}
