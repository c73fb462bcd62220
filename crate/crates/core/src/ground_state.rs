//! The cubic ground state `Q`: the positive radial decaying solution of
//! `-Q + Delta Q + Q^3 = 0`.
//!
//! [`petviashvili`] solves on the periodic grid; [`shooting_oracle`] is an
//! independent radial ODE solve used to validate it.

use log::warn;
use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::functionals::{energy, mass};
use crate::spectral::gradient_norm_sq;
use crate::spectral::{radial_average, Field2D, GridSpec, RadialProfile};

/// Converged ground state on a grid.
#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub q: Field2D,
    /// `M(Q)` by grid quadrature.
    pub mass_q: f64,
    /// `sup |-Q + Delta Q + Q^3|` on the grid.
    pub residual: f64,
    pub iterations: usize,
    /// Last Petviashvili stabilizing factor.
    pub stabilizer: f64,
    pub warnings: Vec<String>,
}

const SEED_AMPLITUDE: f64 = 2.2;
const BOX_TOLERANCE: f64 = 1e-8;

pub fn gaussian_seed(grid: GridSpec) -> Field2D {
    Field2D::from_radial(grid, |r| SEED_AMPLITUDE * (-0.5 * r * r).exp())
}

/// Petviashvili iteration from the Gaussian seed `2.2 exp(-|x|^2/2)`.
pub fn petviashvili(grid: GridSpec, tol: f64, max_iter: usize) -> Result<GroundStateResult> {
    petviashvili_from(gaussian_seed(grid), tol, max_iter)
}

/// Petviashvili iteration
/// `Q <- S^{3/2} (1 - Delta)^{-1} Q^3`, `S = <Q, (1-Delta)Q> / <Q, Q^3>`,
/// stopped once the equation residual drops to `tol`.
pub fn petviashvili_from(seed: Field2D, tol: f64, max_iter: usize) -> Result<GroundStateResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let grid = *seed.grid();
    let n = grid.n();
    let xi2: Vec<f64> = grid.frequency_radii().iter().map(|k| k * k).collect();
    let mut q: Vec<f64> = seed.values().iter().map(|z| z.re).collect();
    let mut residual = f64::INFINITY;
    for iteration in 0..=max_iter {
        let field = real_field(grid, &q);
        let q_hat = field.dft();
        let cube: Vec<f64> = q.iter().map(|x| x * x * x).collect();
        let cube_hat = real_field(grid, &cube).dft();

        let lap = Field2D::from_dft(grid, q_hat.iter().zip(&xi2).map(|(z, k)| -z * k).collect());
        residual = q
            .iter()
            .zip(lap.values())
            .zip(&cube)
            .map(|((q, l), c)| (-q + l.re + c).abs())
            .fold(0.0, f64::max);
        let numer: Vec<f64> = q_hat
            .iter()
            .zip(&xi2)
            .map(|(z, k)| (1.0 + k) * z.norm_sqr())
            .collect();
        let denom: Vec<f64> = q_hat
            .iter()
            .zip(&cube_hat)
            .map(|(a, b)| (a.conj() * b).re)
            .collect();
        let denom = crate::numerics::pairwise_sum(&denom);
        if denom <= 0.0 {
            return Err(Error::Degenerate("Petviashvili iterate collapsed to zero"));
        }
        let stabilizer = crate::numerics::pairwise_sum(&numer) / denom;
        if residual <= tol {
            return Ok(finish(grid, q, residual, iteration, stabilizer));
        }
        if iteration == max_iter {
            break;
        }
        let factor = stabilizer.powf(1.5);
        let next_hat: Vec<Complex64> = cube_hat
            .iter()
            .zip(&xi2)
            .map(|(z, k)| z * (factor / (1.0 + k)))
            .collect();
        let next = Field2D::from_dft(grid, next_hat);
        q = next.values().iter().map(|z| z.re).collect();
        debug_assert_eq!(q.len(), n * n);
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual,
    })
}

fn real_field(grid: GridSpec, values: &[f64]) -> Field2D {
    Field2D::from_raw(
        grid,
        values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    )
}

fn finish(
    grid: GridSpec,
    q: Vec<f64>,
    residual: f64,
    iterations: usize,
    stabilizer: f64,
) -> GroundStateResult {
    let q = real_field(grid, &q);
    let n = grid.n();
    let boundary = (0..n)
        .map(|i| q.at(i, 0).norm().max(q.at(0, i).norm()))
        .fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if boundary > BOX_TOLERANCE {
        let msg = format!("box too small: |Q| = {boundary:e} on the boundary");
        warn!("{msg}");
        warnings.push(msg);
    }
    GroundStateResult {
        mass_q: mass(&q),
        q,
        residual,
        iterations,
        stabilizer,
        warnings,
    }
}

/// Classification of one shot of the radial ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `Q` crossed zero: initial value too large.
    Overshoot,
    /// `Q'` turned positive before crossing zero: initial value too small.
    Undershoot,
    /// Reached `r_max` decreasing and positive.
    Decayed,
}

struct Trajectory {
    shot: Shot,
    /// Samples on the midpoint mesh up to the failure point.
    values: Vec<f64>,
}

fn rhs(r: f64, q: f64, p: f64) -> (f64, f64) {
    (p, -p / r + q - q * q * q)
}

/// RK4 from the series start `Q(r) = Q0 + (Q0 - Q0^3) r^2 / 4` at `r = dr/2`.
fn shoot(q0: f64, dr: f64, steps: usize) -> Trajectory {
    let r0 = 0.5 * dr;
    let c = q0 - q0 * q0 * q0;
    let (mut q, mut p) = (q0 + c * r0 * r0 / 4.0, c * r0 / 2.0);
    let mut values = Vec::with_capacity(steps);
    values.push(q);
    let mut r = r0;
    for _ in 1..steps {
        let (k1q, k1p) = rhs(r, q, p);
        let (k2q, k2p) = rhs(r + 0.5 * dr, q + 0.5 * dr * k1q, p + 0.5 * dr * k1p);
        let (k3q, k3p) = rhs(r + 0.5 * dr, q + 0.5 * dr * k2q, p + 0.5 * dr * k2p);
        let (k4q, k4p) = rhs(r + dr, q + dr * k3q, p + dr * k3p);
        q += dr / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += dr / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r += dr;
        if q < 0.0 {
            return Trajectory {
                shot: Shot::Overshoot,
                values,
            };
        }
        if p > 0.0 {
            return Trajectory {
                shot: Shot::Undershoot,
                values,
            };
        }
        values.push(q);
    }
    Trajectory {
        shot: Shot::Decayed,
        values,
    }
}

/// Radial shooting solve of `Q'' + Q'/r - Q + Q^3 = 0`, `Q'(0) = 0`, by
/// bisection on `Q(0)` in `[2, 2.5]`.
///
/// The accepted profile follows the last undershooting trajectory up to
/// where it turns; beyond that point (at most a few units before `r_max`,
/// where double precision runs out) it is continued by the decaying
/// asymptote `c exp(-r) / sqrt(r)`.
pub fn shooting_oracle(r_max: f64, dr: f64, tol: f64) -> Result<RadialProfile> {
    if r_max < 15.0 || !(dr > 0.0 && dr <= 1e-3) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "shooting oracle needs r_max >= 15, 0 < dr <= 1e-3, tol > 0 (got {r_max}, {dr}, {tol})"
        )));
    }
    let steps = (r_max / dr).round() as usize;
    let (mut lo, mut hi) = (2.0_f64, 2.5_f64);
    if shoot(lo, dr, steps).shot != Shot::Undershoot {
        return Err(Error::Bracket(format!("Q(0) = {lo} does not undershoot")));
    }
    if shoot(hi, dr, steps).shot != Shot::Overshoot {
        return Err(Error::Bracket(format!("Q(0) = {hi} does not overshoot")));
    }
    let mut best = shoot(lo, dr, steps);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let t = shoot(mid, dr, steps);
        match t.shot {
            Shot::Overshoot => hi = mid,
            Shot::Undershoot => {
                lo = mid;
                best = t;
            }
            Shot::Decayed => {
                best = t;
                break;
            }
        }
    }
    let mut values = best.values;
    let reached = values.len();
    let tail_start = values[reached - 1];
    if reached < steps {
        // Match the asymptote to the last trusted sample, a little before the turn.
        let keep = reached.saturating_sub((1.0 / dr) as usize).max(1);
        values.truncate(keep);
        let r_k = (keep as f64 - 0.5) * dr;
        let c = values[keep - 1] * r_k.sqrt() * r_k.exp();
        for j in keep..steps {
            let r = (j as f64 + 0.5) * dr;
            values.push(c * (-r).exp() / r.sqrt());
        }
    }
    let last = *values.last().expect("non-empty profile");
    if !(last < tol) || tail_start.is_nan() {
        return Err(Error::Bracket(format!(
            "accepted profile ends at {last:e}, above tol {tol:e}"
        )));
    }
    RadialProfile::from_real(dr, &values)
}

/// Relative residuals of the identities forced by the ground-state equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PohozaevReport {
    /// `| ||grad Q||^2 - ||Q||^2 | / ||Q||^2`
    pub kinetic: f64,
    /// `| ||Q||_4^4 - 2 ||Q||^2 | / ||Q||_4^4`
    pub quartic: f64,
    /// `| E(Q) - ||Q||_6^6 / 6 | / E(Q)`
    pub energy: f64,
    /// `M(Q)` from the extracted radial profile.
    pub mass_radial: f64,
    /// Relative gap between radial and grid quadrature of `M(Q)`.
    pub mass_crosscheck: f64,
    pub angular_deviation: f64,
}

/// Radial cells used by [`pohozaev_check`] per unit of box half width.
const RADIAL_CELLS_PER_UNIT: usize = 200;

pub fn pohozaev_check(gs: &GroundStateResult) -> Result<PohozaevReport> {
    let q = &gs.q;
    let m = mass(q);
    let grad2 = gradient_norm_sq(q);
    let l4 = q.lp_pow(4);
    let l6 = q.lp_pow(6);
    let e = energy(q);
    let cells = (q.grid().half_width() * RADIAL_CELLS_PER_UNIT as f64).ceil() as usize;
    let extraction = radial_average(q, cells)?;
    let mass_radial = extraction.profile.l2_norm_sq();
    Ok(PohozaevReport {
        kinetic: (grad2 - m).abs() / m,
        quartic: (l4 - 2.0 * m).abs() / l4,
        energy: (e - l6 / 6.0).abs() / e,
        mass_radial,
        mass_crosscheck: (mass_radial - m).abs() / m,
        angular_deviation: extraction.angular_deviation,
    })
}

/// `M(Q)` on a reference grid `(256, L = 20)`, computed once per process.
pub fn reference_mass() -> f64 {
    static MASS: Lazy<f64> = Lazy::new(|| {
        let grid = GridSpec::new(256, 20.0).expect("valid reference grid");
        petviashvili(grid, 1e-10, 1000)
            .expect("reference ground state converges")
            .mass_q
    });
    *MASS
}
