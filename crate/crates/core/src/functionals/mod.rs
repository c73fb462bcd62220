//! Conserved quantities, the sharp Gagliardo-Nirenberg ratio, virial and
//! Morawetz quantities, and localization measures.

mod diagnostics;
mod weights;

pub use diagnostics::{DiagnosticsRecord, Monitor, MonitorConfig, CSV_HEADER};
pub use weights::{make_weights, phi, psi, psi_prime, weight_laplacian, WeightPair};

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::spectral::{cutoff, gradient, gradient_density, gradient_norm_sq, Field2D};

/// `M(u) = int |u|^2`.
pub fn mass(u: &Field2D) -> f64 {
    u.integrate(|z| z.norm_sqr())
}

/// `(1/2) ||grad u||_2^2`.
pub fn kinetic(u: &Field2D) -> f64 {
    0.5 * gradient_norm_sq(u)
}

/// `E(u) = int (1/2)|grad u|^2 - (1/4)|u|^4 + (1/6)|u|^6`.
pub fn energy(u: &Field2D) -> f64 {
    kinetic(u) - 0.25 * u.lp_pow(4) + u.lp_pow(6) / 6.0
}

/// Ratio of the two sides of the sharp Gagliardo-Nirenberg inequality,
/// `||u||_4^4 M(Q) / (2 M(u) ||grad u||_2^2)`; equals one at `Q`.
pub fn gn_ratio(u: &Field2D, mass_q: f64) -> Result<f64> {
    let m = mass(u);
    if m == 0.0 {
        return Err(Error::Degenerate("gn_ratio of the zero field"));
    }
    let g = gradient_norm_sq(u);
    if g == 0.0 {
        return Err(Error::Degenerate("gn_ratio of a field with zero gradient"));
    }
    Ok(u.lp_pow(4) * mass_q / (2.0 * m * g))
}

/// `A = int psi(x/R) x . Im(conj(u) grad u)`.
pub fn virial_a(u: &Field2D, w: &WeightPair) -> f64 {
    let (dx, dy) = gradient(u);
    virial_a_from(u, &dx, &dy, w)
}

pub(crate) fn virial_a_from(u: &Field2D, dx: &Field2D, dy: &Field2D, w: &WeightPair) -> f64 {
    let grid = u.grid();
    let xs = grid.coordinates();
    let n = grid.n();
    let terms: Vec<f64> = (0..grid.len())
        .map(|i| {
            let (x, y) = (xs[i % n], xs[i / n]);
            let z = u.values()[i].conj();
            w.psi()[i] * (x * (z * dx.values()[i]).im + y * (z * dy.values()[i]).im)
        })
        .collect();
    grid.cell_area() * crate::numerics::pairwise_sum(&terms)
}

/// `dA/dt` from the Morawetz identity:
///
/// ```text
/// -1/2 int Delta[psi+phi] |u|^2 + 2 int psi |grad u|^2 + (phi - psi) |d_r u|^2
///   - 1/2 int (psi+phi) |u|^4 + 2/3 int (psi+phi) |u|^6
/// ```
///
/// For radial `u` the middle term is `2 int phi |d_r u|^2`.
pub fn virial_rate(u: &Field2D, w: &WeightPair) -> f64 {
    let (dx, dy) = gradient(u);
    virial_rate_from(u, &dx, &dy, w)
}

pub(crate) fn virial_rate_from(u: &Field2D, dx: &Field2D, dy: &Field2D, w: &WeightPair) -> f64 {
    let grid = u.grid();
    let xs = grid.coordinates();
    let n = grid.n();
    let terms: Vec<f64> = (0..grid.len())
        .map(|i| {
            let (x, y) = (xs[i % n], xs[i / n]);
            let (ux, uy) = (dx.values()[i], dy.values()[i]);
            let rho = u.values()[i].norm_sqr();
            let (phi, psi) = (w.phi()[i], w.psi()[i]);
            let grad2 = ux.norm_sqr() + uy.norm_sqr();
            let r2 = x * x + y * y;
            let radial2 = if r2 > 0.0 {
                (ux * x + uy * y).norm_sqr() / r2
            } else {
                0.0
            };
            -0.5 * w.laplacian()[i] * rho
                + 2.0 * (psi * grad2 + (phi - psi) * radial2)
                + (psi + phi) * (-0.5 * rho * rho + 2.0 / 3.0 * rho * rho * rho)
        })
        .collect();
    grid.cell_area() * crate::numerics::pairwise_sum(&terms)
}

type CutoffKey = (usize, u64, u64);

static CUTOFFS: Lazy<Mutex<HashMap<CutoffKey, Arc<Vec<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));
const CUTOFF_CACHE_LIMIT: usize = 32;

/// `chi_R` on the grid of `u`, memoized per grid and radius.
fn chi_weights(u: &Field2D, radius: f64) -> Arc<Vec<f64>> {
    let grid = u.grid();
    let key = (grid.n(), grid.half_width().to_bits(), radius.to_bits());
    let mut cache = CUTOFFS.lock().expect("cutoff cache poisoned");
    if let Some(w) = cache.get(&key) {
        return Arc::clone(w);
    }
    if cache.len() >= CUTOFF_CACHE_LIMIT {
        cache.clear();
    }
    let w = Arc::new(grid.radial_map(|r| cutoff(r, radius)));
    cache.insert(key, Arc::clone(&w));
    w
}

/// `int (1/2) chi_R |grad u|^2 - (1/4)|u|^4 + (1/6)|u|^6`.
pub fn local_energy(u: &Field2D, radius: f64) -> f64 {
    local_energy_from(u, &gradient_density(u), radius)
}

pub(crate) fn local_energy_from(u: &Field2D, grad2: &[f64], radius: f64) -> f64 {
    let chi = chi_weights(u, radius);
    let terms: Vec<f64> = u
        .values()
        .iter()
        .zip(grad2)
        .zip(chi.iter())
        .map(|((z, g), c)| {
            let rho = z.norm_sqr();
            0.5 * c * g - 0.25 * rho * rho + rho * rho * rho / 6.0
        })
        .collect();
    u.grid().cell_area() * crate::numerics::pairwise_sum(&terms)
}

/// Morawetz integrand `int chi_R |grad u|^2 - (1/2)|u|^4 + (2/3)|u|^6`.
pub fn morawetz_integrand(u: &Field2D, radius: f64) -> f64 {
    morawetz_integrand_from(u, &gradient_density(u), radius)
}

pub(crate) fn morawetz_integrand_from(u: &Field2D, grad2: &[f64], radius: f64) -> f64 {
    let chi = chi_weights(u, radius);
    let terms: Vec<f64> = u
        .values()
        .iter()
        .zip(grad2)
        .zip(chi.iter())
        .map(|((z, g), c)| {
            let rho = z.norm_sqr();
            c * g - 0.5 * rho * rho + 2.0 * rho * rho * rho / 3.0
        })
        .collect();
    u.grid().cell_area() * crate::numerics::pairwise_sum(&terms)
}

/// Localization measures at several radii sharing one gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMeasures {
    pub kinetic: f64,
    pub l6_6: f64,
    /// `exterior_kinetic` at each radius.
    pub exterior_kinetic: Vec<f64>,
    /// `local_energy` at each radius.
    pub local_energy: Vec<f64>,
    /// `morawetz_integrand` at each radius.
    pub morawetz: Vec<f64>,
}

pub fn local_measures(u: &Field2D, radii: &[f64]) -> LocalMeasures {
    let grad2 = gradient_density(u);
    let area = u.grid().cell_area();
    let quartic: Vec<f64> = u.values().iter().map(|z| z.norm_sqr().powi(2)).collect();
    let sextic: Vec<f64> = u.values().iter().map(|z| z.norm_sqr().powi(3)).collect();
    let l4_4 = area * crate::numerics::pairwise_sum(&quartic);
    let l6_6 = area * crate::numerics::pairwise_sum(&sextic);
    let grad_total = area * crate::numerics::pairwise_sum(&grad2);
    let mut out = LocalMeasures {
        kinetic: 0.5 * grad_total,
        l6_6,
        exterior_kinetic: Vec::with_capacity(radii.len()),
        local_energy: Vec::with_capacity(radii.len()),
        morawetz: Vec::with_capacity(radii.len()),
    };
    for &r in radii {
        let chi = chi_weights(u, r);
        let inner: Vec<f64> = grad2.iter().zip(chi.iter()).map(|(g, c)| c * g).collect();
        let inner = area * crate::numerics::pairwise_sum(&inner);
        out.exterior_kinetic.push(grad_total - inner);
        out.local_energy
            .push(0.5 * inner - 0.25 * l4_4 + l6_6 / 6.0);
        out.morawetz.push(inner - 0.5 * l4_4 + 2.0 * l6_6 / 3.0);
    }
    out
}

/// `int (1 - chi_R) |grad u|^2`.
pub fn exterior_kinetic(u: &Field2D, radius: f64) -> f64 {
    exterior_kinetic_from(u, &gradient_density(u), radius)
}

pub(crate) fn exterior_kinetic_from(u: &Field2D, grad2: &[f64], radius: f64) -> f64 {
    let chi = chi_weights(u, radius);
    let terms: Vec<f64> = grad2
        .iter()
        .zip(chi.iter())
        .map(|(g, c)| (1.0 - c) * g)
        .collect();
    u.grid().cell_area() * crate::numerics::pairwise_sum(&terms)
}

/// Dyadic concentration scale of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationScale {
    pub lambda: f64,
    /// Set when no dyadic radius inside the box captures enough mass;
    /// `lambda` is then the box half width.
    pub mass_at_boundary: bool,
}

/// Smallest dyadic `lambda >= 1` with `int_{|x| > lambda} |u|^2 < eps M(u)`.
pub fn concentration_scale(u: &Field2D, eps: f64) -> Result<ConcentrationScale> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1/2), got {eps}"
        )));
    }
    let total = mass(u);
    if total == 0.0 {
        return Err(Error::Degenerate("concentration scale of the zero field"));
    }
    let radii = u.grid().radii();
    let half_width = u.grid().half_width();
    let mut lambda = 1.0;
    while lambda < half_width {
        let outside = u.integrate_weighted(
            &radii
                .iter()
                .map(|&r| if r > lambda { 1.0 } else { 0.0 })
                .collect::<Vec<_>>(),
            |z| z.norm_sqr(),
        );
        if outside < eps * total {
            return Ok(ConcentrationScale {
                lambda,
                mass_at_boundary: false,
            });
        }
        lambda *= 2.0;
    }
    Ok(ConcentrationScale {
        lambda: half_width,
        mass_at_boundary: true,
    })
}
