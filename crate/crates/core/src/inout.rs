//! Incoming/outgoing decomposition of radial profiles, the mismatch
//! operators built from spatial cutoffs and Littlewood-Paley projections,
//! and the frequency-decay measurement.
//!
//! `[P^+- f](r) = f(r)/2 +- (i/pi) PV int_0^inf f(rho) rho / (r^2 - rho^2) drho`,
//! truncated to the profile mesh with `f = 0` beyond it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    apply_multiplier, check_frequency, cutoff, lp_project, radial_average, radial_lift,
    smooth_step, Band, Field2D, GridSpec, RadialProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Principal-value quadrature on a midpoint mesh `r_i = (i + 1/2) dr` over
/// `[0, a]`, `a = m dr`.
///
/// The singular integrand is handled by subtraction:
/// `PV int g(rho)/(r^2 - rho^2) = int [g(rho) - g(r)]/(r^2 - rho^2) + g(r) K(r)`
/// with `g = f rho` and `K(r) = PV int_0^a drho/(r^2 - rho^2) = ln((a+r)/(a-r)) / (2r)`.
#[derive(Debug, Clone)]
pub struct PvKernelPlan {
    dr: f64,
    r: Vec<f64>,
    log_term: Vec<f64>,
}

impl PvKernelPlan {
    pub fn new(m: usize, dr: f64) -> Result<Self> {
        if m < 4 || !(dr > 0.0 && dr.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bad radial mesh: m = {m}, dr = {dr}"
            )));
        }
        let a = m as f64 * dr;
        let r: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * dr).collect();
        let log_term = r
            .iter()
            .map(|&r| ((a + r) / (a - r)).ln() / (2.0 * r))
            .collect();
        Ok(Self { dr, r, log_term })
    }

    pub fn for_profile(f: &RadialProfile) -> Result<Self> {
        Self::new(f.len(), f.dr())
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    fn check(&self, f: &RadialProfile) -> Result<()> {
        if f.len() != self.len() || (f.dr() - self.dr).abs() > 1e-12 * self.dr {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    /// `PV int_0^a f(rho) rho / (r_i^2 - rho^2) drho` at every mesh point.
    pub fn principal_value(&self, f: &RadialProfile) -> Result<Vec<Complex64>> {
        self.check(f)?;
        let m = self.len();
        let dr = self.dr;
        let g: Vec<Complex64> = f
            .samples()
            .iter()
            .zip(&self.r)
            .map(|(v, r)| v * r)
            .collect();
        let dg = derivative(&g, dr);
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let ri = self.r[i];
            let gi = g[i];
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                if j == i {
                    acc += -dg[i] / (2.0 * ri);
                } else {
                    let rj = self.r[j];
                    acc += (g[j] - gi) / ((ri - rj) * (ri + rj));
                }
            }
            out.push(acc * dr + gi * self.log_term[i]);
        }
        Ok(out)
    }
}

/// Second-order finite difference on a uniform mesh.
fn derivative(g: &[Complex64], dr: f64) -> Vec<Complex64> {
    let m = g.len();
    (0..m)
        .map(|i| {
            if i == 0 {
                (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * dr)
            } else if i + 1 == m {
                (3.0 * g[m - 1] - 4.0 * g[m - 2] + g[m - 3]) / (2.0 * dr)
            } else {
                (g[i + 1] - g[i - 1]) / (2.0 * dr)
            }
        })
        .collect()
}

/// `P^+ f` or `P^- f` on the profile mesh.
pub fn inout_apply(plan: &PvKernelPlan, f: &RadialProfile, sign: Sign) -> Result<RadialProfile> {
    let pv = plan.principal_value(f)?;
    let coeff = Complex64::new(0.0, sign.value() / std::f64::consts::PI);
    let out = f
        .samples()
        .iter()
        .zip(&pv)
        .map(|(v, p)| 0.5 * v + coeff * p)
        .collect();
    f.with_samples(out)
}

/// `P^+- P_N f`: `P_N` acts on the radial lift to `grid`, and the result is
/// re-extracted on the mesh of `f` (which must be `dr = L/m`).
pub fn inout_band(
    f: &RadialProfile,
    grid: GridSpec,
    n_freq: f64,
    sign: Sign,
) -> Result<RadialProfile> {
    let band = band_project(f, grid, n_freq)?;
    let plan = PvKernelPlan::for_profile(&band)?;
    inout_apply(&plan, &band, sign)
}

/// `P_N f` through the grid.
pub fn band_project(f: &RadialProfile, grid: GridSpec, n_freq: f64) -> Result<RadialProfile> {
    let m = f.len();
    if (grid.half_width() / m as f64 - f.dr()).abs() > 1e-12 * f.dr() {
        return Err(Error::MeshMismatch);
    }
    let lifted = radial_lift(f, grid);
    let projected = lp_project(&lifted, Band::Annulus, n_freq)?;
    Ok(radial_average(&projected, m)?.profile)
}

/// Radial profile `sum_k c_k cos(k r + p_k) exp(-(r / w)^2)` with random
/// coefficients and frequencies `k <= k_max`; deterministic in `seed`.
pub fn random_radial_profile(m: usize, dr: f64, k_max: f64, seed: u64) -> Result<RadialProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(Complex64, f64, f64)> = (0..6)
        .map(|_| {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (
                c,
                rng.gen_range(0.0..k_max),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let width = 0.25 * m as f64 * dr;
    RadialProfile::from_fn(m, dr, |r| {
        let env = (-(r / width).powi(2)).exp();
        terms
            .iter()
            .map(|(c, k, p)| c * (k * r + p).cos())
            .sum::<Complex64>()
            * env
    })
}

/// Largest `||P^+- f|| / ||f||` over `trials` random profiles.
pub fn inout_norm_estimate(
    m: usize,
    dr: f64,
    k_max: f64,
    trials: usize,
    seed: u64,
    sign: Sign,
) -> Result<f64> {
    let plan = PvKernelPlan::new(m, dr)?;
    let mut best: f64 = 0.0;
    for trial in 0..trials {
        let f = random_radial_profile(m, dr, k_max, seed.wrapping_add(trial as u64))?;
        let pf = inout_apply(&plan, &f, sign)?;
        best = best.max(pf.l2_norm() / f.l2_norm());
    }
    Ok(best)
}

/// Composite operators whose norms are estimated by [`mismatch_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MismatchKind {
    /// `chi_R^c grad P_{<=N} chi_{R/2}`.
    GradientLow,
    /// `P_{<=N} chi_R^c P_{>4N}`.
    LowHigh,
    /// `grad P_{<=N} chi_{R/2}`: the exterior cutoff replaced by the identity.
    IdentityCutoff,
    /// The zero operator.
    Zero,
}

impl MismatchKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "1" | "gradient-low" => Some(Self::GradientLow),
            "2" | "low-high" => Some(Self::LowHigh),
            "identity" => Some(Self::IdentityCutoff),
            "zero" => Some(Self::Zero),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// Largest converged estimate over the restarts.
    pub norm: f64,
    /// `(max - min) / max` over the restarts.
    pub spread: f64,
    pub sweeps: usize,
}

pub const POWER_SWEEPS: usize = 200;
pub const POWER_TOL: f64 = 1e-3;

struct Operator {
    kind: MismatchKind,
    grid: GridSpec,
    exterior: Vec<f64>,
    interior: Vec<f64>,
    n_freq: f64,
}

impl Operator {
    fn low(&self) -> impl Fn(f64) -> f64 + '_ {
        move |xi| smooth_step(xi / self.n_freq)
    }

    fn high(&self) -> impl Fn(f64) -> f64 + '_ {
        move |xi| 1.0 - smooth_step(xi / (4.0 * self.n_freq))
    }

    /// `T u` as one or two components.
    fn forward(&self, u: &Field2D) -> Vec<Field2D> {
        match self.kind {
            MismatchKind::Zero => vec![Field2D::zeros(self.grid)],
            MismatchKind::GradientLow | MismatchKind::IdentityCutoff => {
                let v = u.weighted(&self.interior);
                let low = self.low();
                let dx = apply_multiplier(&v, |kx, ky| Complex64::new(0.0, kx * low(kx.hypot(ky))));
                let dy = apply_multiplier(&v, |kx, ky| Complex64::new(0.0, ky * low(kx.hypot(ky))));
                if self.kind == MismatchKind::GradientLow {
                    vec![dx.weighted(&self.exterior), dy.weighted(&self.exterior)]
                } else {
                    vec![dx, dy]
                }
            }
            MismatchKind::LowHigh => {
                let high = self.high();
                let low = self.low();
                let v = apply_multiplier(u, |kx, ky| high(kx.hypot(ky)).into())
                    .weighted(&self.exterior);
                vec![apply_multiplier(&v, |kx, ky| low(kx.hypot(ky)).into())]
            }
        }
    }

    /// `T^* w`.
    fn adjoint(&self, w: &[Field2D]) -> Field2D {
        match self.kind {
            MismatchKind::Zero => Field2D::zeros(self.grid),
            MismatchKind::GradientLow | MismatchKind::IdentityCutoff => {
                let (wx, wy) = if self.kind == MismatchKind::GradientLow {
                    (w[0].weighted(&self.exterior), w[1].weighted(&self.exterior))
                } else {
                    (w[0].clone(), w[1].clone())
                };
                let low = self.low();
                let ax =
                    apply_multiplier(&wx, |kx, ky| Complex64::new(0.0, -kx * low(kx.hypot(ky))));
                let ay =
                    apply_multiplier(&wy, |kx, ky| Complex64::new(0.0, -ky * low(kx.hypot(ky))));
                ax.add(&ay).expect("same grid").weighted(&self.interior)
            }
            MismatchKind::LowHigh => {
                let high = self.high();
                let low = self.low();
                let v = apply_multiplier(&w[0], |kx, ky| low(kx.hypot(ky)).into())
                    .weighted(&self.exterior);
                apply_multiplier(&v, |kx, ky| high(kx.hypot(ky)).into())
            }
        }
    }
}

fn random_field(grid: GridSpec, rng: &mut ChaCha8Rng) -> Field2D {
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    Field2D::new(grid, values).expect("finite")
}

/// Estimates `||T||_{L^2 -> L^2}` by power iteration on `T^* T` from
/// `restarts` seeded random starts.
///
/// A restart converges once successive estimates agree to [`POWER_TOL`]
/// relative; all restarts failing within [`POWER_SWEEPS`] is an error.
pub fn mismatch_norm(
    grid: GridSpec,
    kind: MismatchKind,
    radius: f64,
    n_freq: f64,
    restarts: usize,
    seed: u64,
) -> Result<NormEstimate> {
    if !(radius >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "R must be at least 1, got {radius}"
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    check_frequency(&grid, n_freq)?;
    let op = Operator {
        kind,
        grid,
        exterior: grid.radial_map(|r| 1.0 - cutoff(r, radius)),
        interior: grid.radial_map(|r| cutoff(r, 0.5 * radius)),
        n_freq,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut estimates = Vec::with_capacity(restarts);
    let mut sweeps_total = 0;
    for _ in 0..restarts {
        let mut u = random_field(grid, &mut rng);
        let norm = u.l2_norm();
        u = u.scale(1.0 / norm);
        let mut previous: f64 = 0.0;
        let mut converged = None;
        for sweep in 1..=POWER_SWEEPS {
            let w = op.adjoint(&op.forward(&u));
            let growth = w.l2_norm();
            sweeps_total += 1;
            if growth == 0.0 {
                converged = Some(0.0);
                break;
            }
            let estimate = growth.sqrt();
            if sweep > 1 && (estimate - previous).abs() <= POWER_TOL * estimate {
                converged = Some(estimate);
                break;
            }
            previous = estimate;
            u = w.scale(1.0 / growth);
        }
        if let Some(e) = converged {
            estimates.push(e);
        }
    }
    if estimates.is_empty() {
        return Err(Error::NotConverged {
            iterations: POWER_SWEEPS,
            residual: f64::NAN,
        });
    }
    let max = estimates.iter().cloned().fold(f64::MIN, f64::max);
    let min = estimates.iter().cloned().fold(f64::MAX, f64::min);
    Ok(NormEstimate {
        norm: max,
        spread: if max > 0.0 { (max - min) / max } else { 0.0 },
        sweeps: sweeps_total,
    })
}

/// `sup_s s theta(s)`, so that `N` times it is the norm of `grad P_{<=N}`.
pub fn gradient_low_symbol_max() -> f64 {
    let mut best: f64 = 0.0;
    for k in 0..=20000 {
        let s = 1.0 + k as f64 * 1e-4;
        best = best.max(s * smooth_step(s));
    }
    best
}

/// One row of the frequency-decay table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqDecayRow {
    pub n_freq: f64,
    /// `sup_t ||chi_1^c P_N u(t)||_2` over the observed times.
    pub exterior_sup: f64,
    /// `||P_N u_0||_2`.
    pub initial_band: f64,
}

/// Accumulates `sup_t ||chi_rho^c P_N u(t)||_2` over observed fields.
#[derive(Debug, Clone)]
pub struct FreqDecayScan {
    n_list: Vec<f64>,
    exterior: Vec<f64>,
    rows: Vec<FreqDecayRow>,
}

impl FreqDecayScan {
    /// Scan with the unit exterior `|x| > 1`; `u0` fixes the grid.
    pub fn new(u0: &Field2D, n_list: &[f64]) -> Result<Self> {
        Self::with_radius(u0, n_list, 1.0)
    }

    /// Exterior of radius `rho >= 1`.
    pub fn with_radius(u0: &Field2D, n_list: &[f64], rho: f64) -> Result<Self> {
        if !(rho >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "exterior radius must be at least 1, got {rho}"
            )));
        }
        let grid = *u0.grid();
        let mut rows = Vec::with_capacity(n_list.len());
        for &n in n_list {
            if !(n >= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "N must be at least 1, got {n}"
                )));
            }
            check_frequency(&grid, n)?;
            rows.push(FreqDecayRow {
                n_freq: n,
                exterior_sup: 0.0,
                initial_band: lp_project(u0, Band::Annulus, n)?.l2_norm(),
            });
        }
        Ok(Self {
            n_list: n_list.to_vec(),
            exterior: grid.radial_map(|r| 1.0 - cutoff(r, rho)),
            rows,
        })
    }

    pub fn observe(&mut self, u: &Field2D) -> Result<()> {
        for (row, &n) in self.rows.iter_mut().zip(&self.n_list) {
            let value = lp_project(u, Band::Annulus, n)?
                .weighted(&self.exterior)
                .l2_norm();
            row.exterior_sup = row.exterior_sup.max(value);
        }
        Ok(())
    }

    pub fn rows(&self) -> &[FreqDecayRow] {
        &self.rows
    }
}

/// [`FreqDecayScan`] over a list of stored fields, the first being `u_0`.
pub fn freq_decay_scan(fields: &[&Field2D], n_list: &[f64]) -> Result<Vec<FreqDecayRow>> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidArgument("no fields to scan".into()))?;
    let mut scan = FreqDecayScan::new(first, n_list)?;
    for u in fields {
        scan.observe(u)?;
    }
    Ok(scan.rows().to_vec())
}

/// Smallest `C` with `sup <= C (||P_N u_0|| + N^{-6/5})` at the first row,
/// and whether every other row obeys the bound with that `C`.
pub fn freq_decay_fit(rows: &[FreqDecayRow]) -> Option<(f64, bool)> {
    let bound = |r: &FreqDecayRow| r.initial_band + r.n_freq.powf(-1.2);
    let first = rows.first()?;
    let c = first.exterior_sup / bound(first);
    let ok = rows
        .iter()
        .all(|r| r.exterior_sup <= c * bound(r) * (1.0 + 1e-12));
    Some((c, ok))
}
