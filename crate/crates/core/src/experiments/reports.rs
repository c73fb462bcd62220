use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    concentration_scale, local_measures, make_weights, virial_a, virial_rate,
};
use crate::propagator::{NlsModel, RunState};
use crate::spectral::Field2D;

/// A named pass/fail check in a scenario summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Localization measures at `C lambda(t)` for each `C` of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSample {
    pub t: f64,
    pub lambda: f64,
    pub mass_at_boundary: bool,
    pub kinetic: f64,
    pub l6_6: f64,
    /// `exterior_kinetic(u, C lambda)` per `C`.
    pub exterior_kinetic: Vec<f64>,
    /// `local_energy(u, C lambda)` per `C`.
    pub local_energy: Vec<f64>,
}

impl ScaleSample {
    pub fn measure(u: &Field2D, t: f64, eps: f64, c_grid: &[f64]) -> Self {
        let (lambda, mass_at_boundary) = match concentration_scale(u, eps) {
            Ok(cs) => (cs.lambda, cs.mass_at_boundary),
            Err(_) => (1.0, false),
        };
        let radii: Vec<f64> = c_grid.iter().map(|c| c * lambda).collect();
        let m = local_measures(u, &radii);
        Self {
            t,
            lambda,
            mass_at_boundary,
            kinetic: m.kinetic,
            l6_6: m.l6_6,
            exterior_kinetic: m.exterior_kinetic,
            local_energy: m.local_energy,
        }
    }

    /// The energy floor `(1/6) ||u||_6^6`.
    pub fn floor(&self) -> f64 {
        self.l6_6 / 6.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRow {
    pub c: f64,
    /// `sup_t exterior_kinetic(u(t), C lambda(t)) / kinetic(u(t))`.
    pub sup_ratio: f64,
    pub worst_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub rows: Vec<LocalizationRow>,
    pub threshold: f64,
    /// Smallest `C` whose ratio stays below the threshold at every sample.
    pub localizing_c: Option<f64>,
    /// Samples whose concentration scale hit the box.
    pub boundary_samples: usize,
}

pub fn localization_report(
    samples: &[ScaleSample],
    c_grid: &[f64],
    threshold: f64,
) -> LocalizationReport {
    let rows: Vec<LocalizationRow> = c_grid
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let mut row = LocalizationRow {
                c,
                sup_ratio: 0.0,
                worst_t: 0.0,
            };
            for s in samples {
                let ratio = if s.kinetic > 0.0 {
                    s.exterior_kinetic[k] / s.kinetic
                } else {
                    0.0
                };
                if ratio > row.sup_ratio {
                    row.sup_ratio = ratio;
                    row.worst_t = s.t;
                }
            }
            row
        })
        .collect();
    let localizing_c = rows
        .iter()
        .filter(|r| r.sup_ratio < threshold)
        .map(|r| r.c)
        .fold(None, |acc: Option<f64>, c| {
            Some(acc.map_or(c, |a| a.min(c)))
        });
    LocalizationReport {
        rows,
        threshold,
        localizing_c,
        boundary_samples: samples.iter().filter(|s| s.mass_at_boundary).count(),
    }
}

/// Minimum of the local energy over `[T/2, T]` for one `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvacuationWindow {
    pub c: f64,
    pub t_window: f64,
    /// Time of the minimum.
    pub t_n: f64,
    pub local_energy: f64,
    /// `(1/6) ||u(t_n)||_6^6`.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvacuationReport {
    pub windows: Vec<EvacuationWindow>,
    /// Per `C`: window minima nonincreasing and their excess over the floor
    /// nonincreasing.
    pub decreasing: Vec<(f64, bool)>,
}

impl EvacuationReport {
    pub fn all_decreasing(&self) -> bool {
        self.decreasing.iter().all(|(_, ok)| *ok)
    }
}

/// Evacuation minima on the windows `[T_n/2, T_n]` for each `T_n` in
/// `window_ends`.
pub fn evacuation_report(
    samples: &[ScaleSample],
    c_grid: &[f64],
    window_ends: &[f64],
) -> Result<EvacuationReport> {
    let mut windows = Vec::new();
    let mut decreasing = Vec::new();
    for (k, &c) in c_grid.iter().enumerate() {
        let mut per_c = Vec::new();
        for &t_end in window_ends {
            let lo = 0.5 * t_end;
            let best = samples
                .iter()
                .filter(|s| s.t >= lo - 1e-9 && s.t <= t_end + 1e-9)
                .min_by(|a, b| a.local_energy[k].total_cmp(&b.local_energy[k]))
                .ok_or_else(|| Error::InvalidArgument(format!("no samples in [{lo}, {t_end}]")))?;
            per_c.push(EvacuationWindow {
                c,
                t_window: t_end,
                t_n: best.t,
                local_energy: best.local_energy[k],
                floor: best.floor(),
            });
        }
        let ok = per_c.windows(2).all(|w| {
            w[1].local_energy <= w[0].local_energy
                && w[1].local_energy - w[1].floor <= w[0].local_energy - w[0].floor
        });
        decreasing.push((c, ok));
        windows.extend(per_c);
    }
    Ok(EvacuationReport {
        windows,
        decreasing,
    })
}

/// One entry of the Morawetz table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorawetzRow {
    pub t: f64,
    pub radius: f64,
    /// `int_0^T int chi_R |grad u|^2 - (1/2)|u|^4 + (2/3)|u|^6 dx dt`.
    pub lhs: f64,
    /// `lhs / (R + T/R)`.
    pub ratio: f64,
}

/// Trapezoid accumulation of the Morawetz integrand at several radii,
/// tabulated at checkpoint times.
#[derive(Debug, Clone)]
pub struct MorawetzScan {
    radii: Vec<f64>,
    checkpoints: Vec<f64>,
    integral: Vec<f64>,
    last: Option<(f64, Vec<f64>)>,
    rows: Vec<MorawetzRow>,
}

impl MorawetzScan {
    pub fn new(radii: &[f64], checkpoints: &[f64]) -> Self {
        Self {
            radii: radii.to_vec(),
            checkpoints: checkpoints.to_vec(),
            integral: vec![0.0; radii.len()],
            last: None,
            rows: Vec::new(),
        }
    }

    pub fn observe(&mut self, t: f64, u: &Field2D) {
        let values = local_measures(u, &self.radii).morawetz;
        if let Some((t0, prev)) = &self.last {
            for ((acc, a), b) in self.integral.iter_mut().zip(prev).zip(&values) {
                *acc += 0.5 * (a + b) * (t - t0);
            }
        }
        if self
            .checkpoints
            .iter()
            .any(|c| (c - t).abs() <= 1e-9 * c.max(1.0))
        {
            for (&radius, &lhs) in self.radii.iter().zip(&self.integral) {
                self.rows.push(MorawetzRow {
                    t,
                    radius,
                    lhs,
                    ratio: lhs / (radius + t / radius),
                });
            }
        }
        self.last = Some((t, values));
    }

    pub fn rows(&self) -> &[MorawetzRow] {
        &self.rows
    }

    /// `max_R lhs / (R + T/R)` at each checkpoint reached.
    pub fn max_ratios(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for row in &self.rows {
            match out.last_mut() {
                Some((t, best)) if *t == row.t => *best = best.max(row.ratio),
                _ => out.push((row.t, row.ratio)),
            }
        }
        out
    }
}

/// `T, T/2, T/4, ...` down to `lowest`, ascending.
pub fn halving_times(t_final: f64, lowest: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = t_final;
    while t >= lowest * (1.0 - 1e-12) {
        out.push(t);
        t *= 0.5;
    }
    out.reverse();
    out
}

/// Finite-difference `dA/dt` against [`virial_rate`] at one time and radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialSample {
    pub t: f64,
    pub radius: f64,
    /// Five-point difference of `A`, Richardson-extrapolated in `dt`.
    pub finite_difference: f64,
    pub rate: f64,
    pub relative_error: f64,
}

fn virial_differences(
    u0: &Field2D,
    dt: f64,
    radii: &[f64],
    times: &[f64],
    delta: f64,
) -> Result<Vec<Vec<(f64, f64)>>> {
    let weights = radii
        .iter()
        .map(|&r| make_weights(u0.grid(), r))
        .collect::<Result<Vec<_>>>()?;
    let mut state = RunState::new(u0.clone(), dt, NlsModel::default(), None)?;
    let stride = (delta / dt).round() as usize;
    if stride == 0 || (stride as f64 * dt - delta).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "delta must be a multiple of dt".into(),
        ));
    }
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let centre = (t / dt).round() as usize;
        if centre < 2 * stride || centre - 2 * stride < state.step_count() {
            return Err(Error::InvalidArgument(
                "sample times must increase and start after 2 delta".into(),
            ));
        }
        state.advance(centre - 2 * stride - state.step_count());
        let mut a = vec![[0.0; 5]; radii.len()];
        let mut rate = vec![0.0; radii.len()];
        for j in 0..5 {
            for (k, w) in weights.iter().enumerate() {
                a[k][j] = virial_a(state.field(), w);
                if j == 2 {
                    rate[k] = virial_rate(state.field(), w);
                }
            }
            if j < 4 {
                state.advance(stride);
            }
        }
        out.push(
            a.iter()
                .zip(&rate)
                .map(|(a, r)| ((a[0] - 8.0 * a[1] + 8.0 * a[3] - a[4]) / (12.0 * delta), *r))
                .collect(),
        );
    }
    Ok(out)
}

/// Compares `dA/dt` along the trajectory from `u0` with the Morawetz
/// identity at each of `times` and `radii`. The difference quotient uses
/// spacing `delta` and is extrapolated from steps `dt` and `dt/2`.
pub fn virial_identity_check(
    u0: &Field2D,
    dt: f64,
    radii: &[f64],
    times: &[f64],
    delta: f64,
) -> Result<Vec<VirialSample>> {
    let coarse = virial_differences(u0, dt, radii, times, delta)?;
    let fine = virial_differences(u0, 0.5 * dt, radii, times, delta)?;
    let mut out = Vec::new();
    for ((t, c), f) in times.iter().zip(&coarse).zip(&fine) {
        for ((radius, (dc, _)), (df, rate)) in radii.iter().zip(c).zip(f) {
            let fd = (4.0 * df - dc) / 3.0;
            out.push(VirialSample {
                t: *t,
                radius: *radius,
                finite_difference: fd,
                rate: *rate,
                relative_error: (fd - rate).abs() / rate.abs().max(f64::MIN_POSITIVE),
            });
        }
    }
    Ok(out)
}
