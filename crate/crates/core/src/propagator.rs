//! Strang-split spectral integration of
//! `(i d_t + Delta) u = -cubic |u|^2 u + quintic |u|^4 u`.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::functionals::{DiagnosticsRecord, Monitor, MonitorConfig};
use crate::spectral::{
    gradient_norm_sq, linear_flow, smooth_step, Field2D, GridSpec, LinearPropagator,
};

/// Nonlinearity `F(u) = -cubic |u|^2 u + quintic |u|^4 u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlsModel {
    pub cubic: f64,
    pub quintic: f64,
}

impl Default for NlsModel {
    fn default() -> Self {
        Self {
            cubic: 1.0,
            quintic: 1.0,
        }
    }
}

impl NlsModel {
    /// The free equation, for testing the propagation machinery.
    pub fn linear() -> Self {
        Self {
            cubic: 0.0,
            quintic: 0.0,
        }
    }

    fn phase_rate(&self, rho: f64) -> f64 {
        self.cubic * rho - self.quintic * rho * rho
    }
}

/// Exact flow of `i u_t = F(u)` over `dt`: `u exp(i dt (|u|^2 - |u|^4))`.
pub fn nonlinear_phase(u: &Field2D, dt: f64) -> Field2D {
    nonlinear_phase_with(&NlsModel::default(), u, dt)
}

pub fn nonlinear_phase_with(model: &NlsModel, u: &Field2D, dt: f64) -> Field2D {
    let mut v = u.clone();
    rotate(model, v.values_mut(), dt, None);
    v
}

fn rotate(model: &NlsModel, values: &mut [Complex64], dt: f64, mask: Option<&[f64]>) {
    match mask {
        None => {
            for z in values.iter_mut() {
                *z *= Complex64::from_polar(1.0, dt * model.phase_rate(z.norm_sqr()));
            }
        }
        Some(mask) => {
            for (z, m) in values.iter_mut().zip(mask) {
                *z *= Complex64::from_polar(*m, dt * model.phase_rate(z.norm_sqr()));
            }
        }
    }
}

/// One Strang step `N(dt/2) L(dt) N(dt/2)` of the cubic-quintic equation.
pub fn strang_step(u: &Field2D, dt: f64) -> crate::Result<Field2D> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let state = Stepper::new(*u.grid(), dt, NlsModel::default(), None);
    let mut v = u.clone();
    state.advance(&mut v, None, 1);
    Ok(v)
}

/// Smooth multiplicative damping supported in the outer annulus of the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorberConfig {
    /// Width of the damping annulus as a fraction of the half width.
    pub width_fraction: f64,
    /// Damping rate at full strength, per unit time.
    pub strength: f64,
}

impl Default for AbsorberConfig {
    fn default() -> Self {
        Self {
            width_fraction: 0.1,
            strength: 10.0,
        }
    }
}

impl AbsorberConfig {
    /// Damping profile in `[0, 1]`: zero inside `(1 - width) L`, one beyond `L`.
    pub fn profile(&self, grid: &GridSpec) -> Vec<f64> {
        let l = grid.half_width();
        let inner = (1.0 - self.width_fraction) * l;
        let width = self.width_fraction * l;
        grid.radial_map(|r| 1.0 - smooth_step(1.0 + (r - inner) / width))
    }
}

/// Fused Strang stepper: consecutive half steps of the nonlinear phase are
/// merged, since `|u|` is invariant under them.
struct Stepper {
    model: NlsModel,
    dt: f64,
    linear: LinearPropagator,
    full_mask: Option<Vec<f64>>,
    half_mask: Option<Vec<f64>>,
}

impl Stepper {
    fn new(grid: GridSpec, dt: f64, model: NlsModel, absorber: Option<&AbsorberConfig>) -> Self {
        let (full_mask, half_mask) = match absorber {
            Some(cfg) => {
                let ramp = cfg.profile(&grid);
                let full = ramp
                    .iter()
                    .map(|a| (-cfg.strength * dt * a).exp())
                    .collect();
                let half = ramp
                    .iter()
                    .map(|a| (-0.5 * cfg.strength * dt * a).exp())
                    .collect();
                (Some(full), Some(half))
            }
            None => (None, None),
        };
        Self {
            model,
            dt,
            linear: LinearPropagator::new(grid, dt),
            full_mask,
            half_mask,
        }
    }

    fn advance(&self, u: &mut Field2D, ghost: Option<&mut Field2D>, steps: usize) {
        if steps == 0 {
            return;
        }
        let mut ghost = ghost;
        self.nonlinear(
            u,
            ghost.as_deref_mut(),
            0.5 * self.dt,
            self.half_mask.as_deref(),
        );
        for k in 0..steps {
            self.linear.apply_in_place(u);
            if let Some(g) = ghost.as_deref_mut() {
                self.linear.apply_in_place(g);
            }
            let (dt, mask) = if k + 1 == steps {
                (0.5 * self.dt, self.half_mask.as_deref())
            } else {
                (self.dt, self.full_mask.as_deref())
            };
            self.nonlinear(u, ghost.as_deref_mut(), dt, mask);
        }
    }

    fn nonlinear(
        &self,
        u: &mut Field2D,
        ghost: Option<&mut Field2D>,
        dt: f64,
        mask: Option<&[f64]>,
    ) {
        if let (Some(g), Some(mask)) = (ghost, mask) {
            for ((z, m), gz) in u.values().iter().zip(mask).zip(g.values_mut().iter_mut()) {
                *gz += z * (1.0 - m);
            }
        }
        rotate(&self.model, u.values_mut(), dt, mask);
    }
}

/// Options for [`evolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Steps between diagnostics records.
    pub cadence: usize,
    pub monitor: MonitorConfig,
    #[serde(default)]
    pub absorber: Option<AbsorberConfig>,
    #[serde(default)]
    pub model: Option<NlsModel>,
    /// Keep a copy of the field at every record.
    #[serde(default)]
    pub keep_fields: bool,
    /// Carry the absorbed waves forward freely (see [`RunState::absorbed`]).
    #[serde(default)]
    pub track_absorbed: bool,
}

/// Relative spectral tail above `2 pi / (3h)` that triggers a warning.
pub const ALIASING_WARN: f64 = 1e-6;

/// Single-owner integration state.
pub struct RunState {
    field: Field2D,
    dt: f64,
    step_count: usize,
    l4tx_accum: f64,
    last_l4: f64,
    warnings: Vec<String>,
    stepper: Stepper,
    absorbed: Option<Field2D>,
    aliasing_events: usize,
    worst_tail: f64,
}

impl RunState {
    pub fn new(
        u0: Field2D,
        dt: f64,
        model: NlsModel,
        absorber: Option<&AbsorberConfig>,
    ) -> crate::Result<Self> {
        Self::with_tracking(u0, dt, model, absorber, false)
    }

    pub fn with_tracking(
        u0: Field2D,
        dt: f64,
        model: NlsModel,
        absorber: Option<&AbsorberConfig>,
        track_absorbed: bool,
    ) -> crate::Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if !u0.is_finite() {
            return Err(Error::NonFinite { t: 0.0 });
        }
        let stepper = Stepper::new(*u0.grid(), dt, model, absorber);
        let last_l4 = u0.lp_pow(4);
        let absorbed = absorber
            .filter(|_| track_absorbed)
            .map(|_| Field2D::zeros(*u0.grid()));
        Ok(Self {
            field: u0,
            dt,
            step_count: 0,
            l4tx_accum: 0.0,
            last_l4,
            warnings: Vec::new(),
            stepper,
            absorbed,
            aliasing_events: 0,
            worst_tail: 0.0,
        })
    }

    pub fn field(&self) -> &Field2D {
        &self.field
    }

    pub fn t(&self) -> f64 {
        self.step_count as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn l4tx_accum(&self) -> f64 {
        self.l4tx_accum
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// With an absorber, the removed part of the solution continued by the
    /// free flow, so that `field + absorbed` is what the absorber took away
    /// put back as outgoing free waves.
    pub fn absorbed(&self) -> Option<&Field2D> {
        self.absorbed.as_ref()
    }

    /// Advances `steps` Strang steps and folds `||u||_4^4` into the
    /// spacetime accumulator by the trapezoid rule over the block.
    pub fn advance(&mut self, steps: usize) {
        let t0 = self.t();
        self.stepper
            .advance(&mut self.field, self.absorbed.as_mut(), steps);
        self.step_count += steps;
        let l4 = self.field.lp_pow(4);
        self.l4tx_accum += 0.5 * (self.last_l4 + l4) * (self.t() - t0);
        self.last_l4 = l4;
        let h = self.field.grid().spacing();
        let tail = self
            .field
            .spectral_tail(2.0 * std::f64::consts::PI / (3.0 * h));
        if tail > ALIASING_WARN {
            if self.aliasing_events == 0 {
                let msg = format!("spectral tail {tail:e} above 2pi/(3h) at t = {}", self.t());
                warn!("{msg}");
                self.warnings.push(msg);
            }
            self.aliasing_events += 1;
            self.worst_tail = self.worst_tail.max(tail);
        }
    }

    /// Number of checks at which the aliasing monitor fired.
    pub fn aliasing_events(&self) -> usize {
        self.aliasing_events
    }

    /// Accumulated warnings, with a closing count of aliasing events.
    pub fn all_warnings(&self) -> Vec<String> {
        let mut out = self.warnings.clone();
        if self.aliasing_events > 1 {
            out.push(format!(
                "aliasing monitor fired at {} checks (worst tail {:e})",
                self.aliasing_events, self.worst_tail
            ));
        }
        out
    }
}

/// Field at one monitored time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field2D,
    /// See [`RunState::absorbed`].
    pub absorbed: Option<Field2D>,
}

impl Snapshot {
    /// `field + absorbed`, the state whose free pullback is compared across
    /// windows.
    pub fn unabsorbed(&self) -> Field2D {
        match &self.absorbed {
            Some(g) => self.field.add(g).expect("same grid"),
            None => self.field.clone(),
        }
    }
}

/// Output of [`evolve`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub final_field: Field2D,
    pub warnings: Vec<String>,
    pub dt: f64,
}

impl Trajectory {
    pub fn record_at(&self, t: f64) -> Option<&DiagnosticsRecord> {
        let tol = 0.5 * self.dt;
        self.records.iter().find(|r| (r.t - t).abs() <= tol)
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        let tol = 0.5 * self.dt;
        self.snapshots.iter().find(|s| (s.t - t).abs() <= tol)
    }
}

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Setup(#[from] Error),
    #[error("non-finite field at t = {t}; {} good records kept", partial.records.len())]
    NonFinite { t: f64, partial: Box<Trajectory> },
}

/// Integrates to `t_final`, emitting a record every `cadence` steps (and at
/// the final time).
pub fn evolve(u0: &Field2D, opts: &EvolveOptions) -> Result<Trajectory, EvolveError> {
    evolve_observed(u0, opts, |_| {})
}

/// [`evolve`], handing the state to `observe` at every record time,
/// starting with `t = 0`.
pub fn evolve_observed(
    u0: &Field2D,
    opts: &EvolveOptions,
    mut observe: impl FnMut(&RunState),
) -> Result<Trajectory, EvolveError> {
    if !(opts.t_final > 0.0 && opts.t_final.is_finite()) {
        return Err(
            Error::InvalidArgument(format!("T must be positive, got {}", opts.t_final)).into(),
        );
    }
    if opts.cadence == 0 {
        return Err(Error::InvalidArgument("cadence must be at least 1".into()).into());
    }
    let monitor = Monitor::new(u0.grid(), opts.monitor.clone())?;
    let model = opts.model.unwrap_or_default();
    let mut state = RunState::with_tracking(
        u0.clone(),
        opts.dt,
        model,
        opts.absorber.as_ref(),
        opts.track_absorbed,
    )?;
    let total_steps = (opts.t_final / opts.dt).round() as usize;

    let mut records = vec![monitor.record(0.0, u0, 0.0)];
    observe(&state);
    let mut snapshots = Vec::new();
    if opts.keep_fields {
        snapshots.push(Snapshot {
            t: 0.0,
            field: u0.clone(),
            absorbed: state.absorbed().cloned(),
        });
    }
    while state.step_count() < total_steps {
        let steps = opts.cadence.min(total_steps - state.step_count());
        state.advance(steps);
        let t = state.t();
        if !state.field().is_finite() {
            return Err(EvolveError::NonFinite {
                t,
                partial: Box::new(Trajectory {
                    records,
                    snapshots,
                    final_field: state.field().clone(),
                    warnings: state.all_warnings(),
                    dt: opts.dt,
                }),
            });
        }
        records.push(monitor.record(t, state.field(), state.l4tx_accum()));
        observe(&state);
        if opts.keep_fields {
            snapshots.push(Snapshot {
                t,
                field: state.field().clone(),
                absorbed: state.absorbed().cloned(),
            });
        }
    }
    Ok(Trajectory {
        records,
        snapshots,
        final_field: state.field().clone(),
        warnings: state.all_warnings(),
        dt: opts.dt,
    })
}

/// Time reversal `u -> conj(u)`: evolving the conjugate forward and
/// conjugating back runs the scheme with `-dt`.
pub fn time_reverse(u: &Field2D) -> Field2D {
    u.conj()
}

/// Interaction-picture Cauchy difference and spacetime increment on one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowMetrics {
    pub t_start: f64,
    pub t_end: f64,
    /// `|| v(t_end) - v(t_start) ||_{H^1}` with `v(t) = e^{-it Delta} u(t)`.
    pub cauchy_h1: f64,
    /// Growth of `int ||u||_4^4 dt` over the window.
    pub l4tx_increment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub windows: Vec<WindowMetrics>,
}

impl ScatteringReport {
    pub fn cauchy_decreasing(&self) -> bool {
        self.windows
            .windows(2)
            .all(|w| w[1].cauchy_h1 < w[0].cauchy_h1)
    }

    pub fn l4tx_decreasing(&self) -> bool {
        self.windows
            .windows(2)
            .all(|w| w[1].l4tx_increment < w[0].l4tx_increment)
    }
}

/// `t0, 2 t0, 4 t0, ...` up to `t_final`.
pub fn dyadic_edges(t0: f64, t_final: f64) -> Vec<f64> {
    let mut edges = Vec::new();
    let mut t = t0;
    while t <= t_final * (1.0 + 1e-12) {
        edges.push(t);
        t *= 2.0;
    }
    edges
}

fn h1_norm(u: &Field2D) -> f64 {
    (u.l2_norm().powi(2) + gradient_norm_sq(u)).sqrt()
}

/// Free pullback `v(t) = e^{-it Delta} u(t)` with the spacetime accumulator
/// at the same time.
#[derive(Debug, Clone)]
pub struct ScatteringSample {
    pub t: f64,
    pub pulled: Field2D,
    pub l4tx_accum: f64,
}

impl ScatteringSample {
    /// Absorbed waves, when tracked, are added back before pulling back.
    pub fn from_state(state: &RunState) -> Self {
        let u = match state.absorbed() {
            Some(g) => state.field().add(g).expect("same grid"),
            None => state.field().clone(),
        };
        Self {
            t: state.t(),
            pulled: linear_flow(&u, -state.t()),
            l4tx_accum: state.l4tx_accum(),
        }
    }
}

/// Window metrics between consecutive samples.
pub fn scattering_windows(samples: &[ScatteringSample]) -> crate::Result<ScatteringReport> {
    if samples.len() < 3 {
        return Err(Error::InvalidArgument(
            "need at least three monitored times".into(),
        ));
    }
    let windows = samples
        .windows(2)
        .map(|w| {
            Ok(WindowMetrics {
                t_start: w[0].t,
                t_end: w[1].t,
                cauchy_h1: h1_norm(&w[1].pulled.sub(&w[0].pulled)?),
                l4tx_increment: w[1].l4tx_accum - w[0].l4tx_accum,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(ScatteringReport { windows })
}

/// Scattering diagnostics on the windows between consecutive `edges`; every
/// edge must be a monitored time with a stored field. Absorbed waves are
/// added back before the free pullback.
pub fn scattering_metrics(traj: &Trajectory, edges: &[f64]) -> crate::Result<ScatteringReport> {
    if edges.len() < 3 {
        return Err(Error::InvalidArgument(
            "need at least three monitored times".into(),
        ));
    }
    let mut samples = Vec::with_capacity(edges.len());
    for &t in edges {
        let snap = traj
            .snapshot_at(t)
            .ok_or_else(|| Error::InvalidArgument(format!("no stored field at t = {t}")))?;
        let rec = traj
            .record_at(t)
            .ok_or_else(|| Error::InvalidArgument(format!("no record at t = {t}")))?;
        samples.push(ScatteringSample {
            t: snap.t,
            pulled: linear_flow(&snap.unabsorbed(), -snap.t),
            l4tx_accum: rec.l4tx_accum,
        });
    }
    scattering_windows(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(64, 10.0).unwrap()
    }

    fn bump(grid: GridSpec) -> Field2D {
        Field2D::from_fn(grid, |x, y| {
            Complex64::new(1.0 + 0.3 * x, 0.2 * y) * (-(x * x + y * y) / 4.0).exp()
        })
    }

    #[test]
    fn phase_rotation_properties() {
        let u = bump(grid());
        assert_eq!(nonlinear_phase(&u, 0.0), u);
        let v = nonlinear_phase(&u, 0.37);
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a.norm() - b.norm()).abs() <= 1e-15);
        }
        let c = Complex64::new(0.6, -0.9);
        let k = Field2D::from_fn(grid(), |_, _| c);
        let out = nonlinear_phase(&k, 0.2);
        let rho = c.norm_sqr();
        let expected = c * Complex64::from_polar(1.0, 0.2 * (rho - rho * rho));
        assert!(out.values().iter().all(|z| (z - expected).norm() < 1e-15));
    }

    #[test]
    fn strang_step_is_unitary_and_rejects_bad_dt() {
        let u = bump(grid());
        let m0 = u.l2_norm().powi(2);
        let v = strang_step(&u, 0.01).unwrap();
        assert!((v.l2_norm().powi(2) - m0).abs() / m0 <= 1e-13);
        assert!(strang_step(&u, 0.0).is_err());
        assert!(strang_step(&u, -0.1).is_err());
    }

    #[test]
    fn fused_steps_match_repeated_single_steps() {
        let u = bump(grid());
        let mut single = u.clone();
        for _ in 0..5 {
            single = strang_step(&single, 0.02).unwrap();
        }
        let mut state = RunState::new(u, 0.02, NlsModel::default(), None).unwrap();
        state.advance(5);
        assert!(state.field().sub(&single).unwrap().linf() < 1e-13);
        assert_eq!(state.step_count(), 5);
        assert!((state.t() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn absorber_profile_is_confined_to_outer_annulus() {
        let g = grid();
        let p = AbsorberConfig::default().profile(&g);
        for (r, a) in g.radii().iter().zip(&p) {
            if *r <= 9.0 {
                assert_eq!(*a, 0.0);
            }
            if *r >= 10.0 {
                assert_eq!(*a, 1.0);
            }
        }
    }

    #[test]
    fn dyadic_edges_double() {
        assert_eq!(dyadic_edges(5.0, 40.0), vec![5.0, 10.0, 20.0, 40.0]);
        assert_eq!(dyadic_edges(5.0, 39.0), vec![5.0, 10.0, 20.0]);
    }
}
