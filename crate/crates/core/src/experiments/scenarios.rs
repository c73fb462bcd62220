use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::config::{Scenario, ScenarioConfig};
use super::initial::generate;
use super::reports::{
    evacuation_report, halving_times, localization_report, Check, MorawetzScan, ScaleSample,
};
use crate::error::{Error, Result};
use crate::functionals::{energy, DiagnosticsRecord, MonitorConfig};
use crate::inout::{
    freq_decay_fit, inout_apply, inout_band, inout_norm_estimate, mismatch_norm,
    random_radial_profile, FreqDecayScan, MismatchKind, PvKernelPlan, Sign,
};
use crate::propagator::{
    dyadic_edges, evolve_observed, scattering_windows, EvolveError, EvolveOptions, ScatteringSample,
};
use crate::spectral::{linear_flow, radial_average, write_field, Field2D, RadialProfile};

pub const VERSION: &str = concat!("cqnls ", env!("CARGO_PKG_VERSION"));

/// Machine-readable result of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub name: String,
    pub config_hash: String,
    pub version: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub metrics: Map<String, Value>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// SHA-256 of the canonical JSON form of the config.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

struct Builder {
    summary: Summary,
}

impl Builder {
    fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            summary: Summary {
                scenario: cfg.scenario.name().into(),
                name: cfg.stem(),
                config_hash: config_hash(cfg),
                version: VERSION.into(),
                passed: true,
                checks: Vec::new(),
                metrics: Map::new(),
                warnings: Vec::new(),
                artifacts: Vec::new(),
                failure: None,
            },
        }
    }

    fn check(&mut self, check: Check) {
        self.summary.checks.push(check);
    }

    fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.summary.metrics.insert(key.into(), v);
    }

    fn artifact(&mut self, path: &Path) {
        self.summary.artifacts.push(path.to_path_buf());
    }

    fn finish(mut self) -> Summary {
        self.summary.passed =
            self.summary.failure.is_none() && self.summary.checks.iter().all(|c| c.passed);
        self.summary
    }
}

/// Writes a CSV table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_records(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "{}", DiagnosticsRecord::csv_header())?;
    for r in records {
        writeln!(f, "{}", r.to_csv_row())?;
    }
    f.flush()?;
    Ok(())
}

/// Runs one scenario, writing its artifacts and JSON summary.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Summary> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut b = Builder::new(cfg);
    match cfg.scenario {
        Scenario::Inout => run_inout(cfg, &mut b)?,
        Scenario::Mismatch => run_mismatch(cfg, &mut b)?,
        _ => run_evolution(cfg, &mut b)?,
    }
    let summary_path = cfg.summary_path();
    b.artifact(&summary_path);
    let summary = b.finish();
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(summary)
}

fn matches_time(t: f64, targets: &[f64], dt: f64) -> bool {
    targets.iter().any(|s| (s - t).abs() <= 0.5 * dt)
}

fn run_evolution(cfg: &ScenarioConfig, b: &mut Builder) -> Result<()> {
    let grid = cfg.grid()?;
    let init = generate(cfg.initial.as_ref().expect("validated"), grid)?;
    b.summary.warnings.extend(init.warnings.iter().cloned());
    let u0 = init.field;
    let (dt, t_final) = (cfg.dt(), cfg.t_final());
    let absorber = cfg.absorber.config();
    let scenario = cfg.scenario;

    let scattering = matches!(
        scenario,
        Scenario::Threshold | Scenario::Subthreshold | Scenario::Supermass
    );
    let scaling = matches!(
        scenario,
        Scenario::Threshold | Scenario::Evacuation | Scenario::Localization
    );
    let edges = if scattering {
        dyadic_edges(cfg.window_start, t_final)
    } else {
        Vec::new()
    };
    if scattering && edges.len() < 3 {
        return Err(Error::Config {
            path: "window_start".into(),
            message: "fewer than three dyadic window edges before T".into(),
        });
    }
    let checkpoints = halving_times(t_final, 0.5 * t_final);
    let mut morawetz = (scenario == Scenario::VirialScan)
        .then(|| MorawetzScan::new(&cfg.morawetz_radii, &checkpoints));
    let mut freq = if scenario == Scenario::FreqDecay {
        Some(FreqDecayScan::with_radius(
            &u0,
            &cfg.n_list,
            cfg.exterior_radius,
        )?)
    } else {
        None
    };
    let mut pulled = Vec::new();
    let mut scales = Vec::new();
    let mut observe_error = None;

    let opts = EvolveOptions {
        dt,
        t_final,
        cadence: cfg.cadence(),
        monitor: MonitorConfig {
            radii: cfg.radii,
            mass_q: init.mass_q,
            eps: cfg.eps,
        },
        absorber,
        model: None,
        keep_fields: false,
        track_absorbed: scattering && absorber.is_some(),
    };
    let result = evolve_observed(&u0, &opts, |state| {
        let t = state.t();
        if scattering && matches_time(t, &edges, dt) {
            pulled.push(ScatteringSample::from_state(state));
        }
        if scaling {
            scales.push(ScaleSample::measure(state.field(), t, cfg.eps, &cfg.c_grid));
        }
        if let Some(m) = morawetz.as_mut() {
            m.observe(t, state.field());
        }
        if let Some(f) = freq.as_mut() {
            if let Err(e) = f.observe(state.field()) {
                observe_error.get_or_insert(e);
            }
        }
    });
    if let Some(e) = observe_error {
        return Err(e);
    }

    let csv = cfg.csv_path();
    let traj = match result {
        Ok(traj) => traj,
        Err(EvolveError::Setup(e)) => return Err(e),
        Err(EvolveError::NonFinite { t, partial }) => {
            write_records(&csv, &partial.records)?;
            b.artifact(&csv);
            b.summary.warnings.extend(partial.warnings.iter().cloned());
            b.summary.failure = Some(format!("non-finite field at t = {t}"));
            b.check(Check::new("finite", false, format!("aborted at t = {t}")));
            return Ok(());
        }
    };
    b.summary.warnings.extend(traj.warnings.iter().cloned());
    write_records(&csv, &traj.records)?;
    b.artifact(&csv);
    let field_path = cfg.field_path();
    write_field(&traj.final_field, &field_path)?;
    b.artifact(&field_path);

    let first = traj.records.first().expect("initial record");
    let last = traj.records.last().expect("final record");
    let drift = |f: fn(&DiagnosticsRecord) -> f64| {
        let v0 = f(first);
        traj.records
            .iter()
            .map(|r| (f(r) - v0).abs() / v0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };
    b.metric("mass_q", init.mass_q);
    b.metric("initial_mass", first.mass);
    b.metric("initial_energy", first.energy);
    b.metric("max_relative_mass_drift", drift(|r| r.mass));
    b.metric("max_relative_energy_drift", drift(|r| r.energy));
    b.metric("absorber", absorber.is_some());
    b.metric("linf_initial", first.linf);
    b.metric("linf_final", last.linf);
    b.metric("records", traj.records.len());
    let dispersed = last.linf <= 0.5 * first.linf;
    b.metric("dispersed", dispersed);

    if scattering {
        let report = scattering_windows(&pulled)?;
        let rows: Vec<Vec<f64>> = report
            .windows
            .iter()
            .map(|w| vec![w.t_start, w.t_end, w.cauchy_h1, w.l4tx_increment])
            .collect();
        let path = cfg.table_path("scattering");
        write_table(
            &path,
            &["t_start", "t_end", "cauchy_h1", "l4tx_increment"],
            &rows,
        )?;
        b.artifact(&path);
        b.metric("scattering_windows", &report.windows);
        if scenario != Scenario::Supermass {
            b.check(Check::new(
                "dispersed",
                dispersed,
                format!("linf {} -> {}", first.linf, last.linf),
            ));
            b.check(Check::new(
                "cauchy_decreasing",
                report.cauchy_decreasing(),
                "interaction-picture H1 differences shrink window over window",
            ));
            b.check(Check::new(
                "l4tx_decreasing",
                report.l4tx_decreasing(),
                "L4 spacetime increments shrink window over window",
            ));
        }
    }

    if scaling {
        let loc = localization_report(&scales, &cfg.c_grid, cfg.localization_threshold);
        let rows: Vec<Vec<f64>> = loc
            .rows
            .iter()
            .map(|r| vec![r.c, r.sup_ratio, r.worst_t])
            .collect();
        let path = cfg.table_path("localization");
        write_table(&path, &["C", "sup_ratio", "worst_t"], &rows)?;
        b.artifact(&path);
        b.metric("localization", &loc);
        if loc.boundary_samples > 0 {
            b.summary.warnings.push(format!(
                "concentration scale reached the box at {} of {} samples",
                loc.boundary_samples,
                scales.len()
            ));
        }
        if matches!(scenario, Scenario::Threshold | Scenario::Localization) {
            b.check(Check::new(
                "localized",
                loc.localizing_c.is_some(),
                format!("smallest C below {}: {:?}", loc.threshold, loc.localizing_c),
            ));
        }

        let ends: Vec<f64> = halving_times(t_final, 2.0 * cfg.window_start);
        let evac = evacuation_report(&scales, &cfg.c_grid, &ends)?;
        let rows: Vec<Vec<f64>> = evac
            .windows
            .iter()
            .map(|w| vec![w.c, w.t_window, w.t_n, w.local_energy, w.floor])
            .collect();
        let path = cfg.table_path("evacuation");
        write_table(&path, &["C", "T_n", "t_n", "local_energy", "floor"], &rows)?;
        b.artifact(&path);
        b.metric("evacuation", &evac);
        if matches!(scenario, Scenario::Threshold | Scenario::Evacuation) {
            b.check(Check::new(
                "evacuating",
                evac.all_decreasing(),
                "window minima of the local energy and their excess over the floor decrease",
            ));
        }
        let e0 = energy(&u0);
        let floor0 = u0.lp_pow(6) / 6.0;
        let floor_defect = (e0 - floor0).abs() / e0.abs().max(f64::MIN_POSITIVE);
        b.metric("initial_floor", floor0);
        b.metric("initial_floor_defect", floor_defect);
        if scenario == Scenario::Threshold {
            b.check(Check::new(
                "energy_floor",
                floor_defect <= 1e-6,
                format!("|E(u0) - |u0|_6^6/6| / E(u0) = {floor_defect:e}"),
            ));
        }
    }

    if let Some(m) = morawetz {
        let rows: Vec<Vec<f64>> = m
            .rows()
            .iter()
            .map(|r| vec![r.t, r.radius, r.lhs, r.ratio])
            .collect();
        let path = cfg.table_path("virial");
        write_table(&path, &["T", "R", "lhs", "ratio"], &rows)?;
        b.artifact(&path);
        let maxima = m.max_ratios();
        b.metric("morawetz_rows", m.rows());
        b.metric("morawetz_max_ratio", &maxima);
        let finite = !maxima.is_empty() && maxima.iter().all(|(_, r)| r.is_finite());
        b.check(Check::new("morawetz_finite", finite, format!("{maxima:?}")));
        let stable = maxima.len() >= 2
            && maxima
                .windows(2)
                .all(|w| w[1].1 <= (1.0 + cfg.stabilize_tolerance) * w[0].1);
        b.check(Check::new(
            "morawetz_stable",
            stable,
            format!(
                "max ratio may grow by at most {} when T doubles",
                cfg.stabilize_tolerance
            ),
        ));
    }

    if let Some(f) = freq {
        let rows: Vec<Vec<f64>> = f
            .rows()
            .iter()
            .map(|r| {
                vec![
                    r.n_freq,
                    r.exterior_sup,
                    r.initial_band,
                    r.initial_band + r.n_freq.powf(-1.2),
                ]
            })
            .collect();
        let path = cfg.table_path("freq");
        write_table(
            &path,
            &["N", "exterior_sup", "initial_band", "bound"],
            &rows,
        )?;
        b.artifact(&path);
        b.metric("freq_decay", f.rows());
        let (c, ok) = freq_decay_fit(f.rows()).unwrap_or((f64::NAN, false));
        b.metric("freq_decay_constant", c);
        b.check(Check::new(
            "freq_decay_bound",
            ok,
            format!("C fitted at the first N: {c}"),
        ));
    }
    Ok(())
}

/// Outgoing chirp `exp(i r^2/4)` on a bump at `0.3 L` of width `0.075 L`,
/// flowed for unit time; returns `||P^- P_8 v|| / ||P^+ P_8 v||`.
pub fn chirp_incoming_fraction(grid: crate::spectral::GridSpec, n_freq: f64) -> Result<f64> {
    let l = grid.half_width();
    let (center, width) = (0.3 * l, 0.075 * l);
    let u = Field2D::from_fn(grid, |x, y| {
        let r = x.hypot(y);
        Complex64::from_polar((-((r - center) / width).powi(2)).exp(), r * r / 4.0)
    });
    let v = linear_flow(&u, 1.0);
    let profile = radial_average(&v, 2 * grid.n())?.profile;
    let plus = inout_band(&profile, grid, n_freq, Sign::Plus)?;
    let minus = inout_band(&profile, grid, n_freq, Sign::Minus)?;
    Ok(minus.l2_norm() / plus.l2_norm())
}

/// Largest `||P+ f + P- f - f|| / ||f||` and conjugation defect over random
/// profiles.
pub fn inout_identity_defects(m: usize, dr: f64, trials: usize, seed: u64) -> Result<(f64, f64)> {
    let plan = PvKernelPlan::new(m, dr)?;
    let mut recon: f64 = 0.0;
    let mut conj: f64 = 0.0;
    for k in 0..trials {
        let f = random_radial_profile(m, dr, 4.0, seed.wrapping_add(k as u64))?;
        let p = inout_apply(&plan, &f, Sign::Plus)?;
        let q = inout_apply(&plan, &f, Sign::Minus)?;
        let sum: Vec<Complex64> = p
            .samples()
            .iter()
            .zip(q.samples())
            .zip(f.samples())
            .map(|((a, b), c)| a + b - c)
            .collect();
        recon = recon.max(f.with_samples(sum)?.l2_norm() / f.l2_norm());

        let real = RadialProfile::new(
            dr,
            f.samples()
                .iter()
                .map(|z| Complex64::new(z.re, 0.0))
                .collect(),
        )?;
        let p = inout_apply(&plan, &real, Sign::Plus)?;
        let q = inout_apply(&plan, &real, Sign::Minus)?;
        let scale = p
            .samples()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for (a, b) in p.samples().iter().zip(q.samples()) {
            conj = conj.max((a - b.conj()).norm() / scale);
        }
    }
    Ok((recon, conj))
}

fn run_inout(cfg: &ScenarioConfig, b: &mut Builder) -> Result<()> {
    let (m, rmax, trials, seed) = (cfg.m, cfg.rmax, cfg.trials, cfg.seed);
    let dr = rmax / m as f64;
    let (recon, conj) = inout_identity_defects(m, dr, trials, seed)?;
    b.metric("reconstruction_defect", recon);
    b.metric("conjugation_defect", conj);
    b.check(Check::new(
        "reconstruction",
        recon <= 1e-13,
        format!("{recon:e}"),
    ));
    b.check(Check::new(
        "conjugation",
        conj <= 1e-13,
        format!("{conj:e}"),
    ));

    let mut rows = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        let coarse = inout_norm_estimate(m, dr, 4.0, trials, seed, sign)?;
        let fine = inout_norm_estimate(2 * m, 0.5 * dr, 4.0, trials, seed, sign)?;
        let change = (fine - coarse).abs() / coarse;
        let label = if sign == Sign::Plus { "plus" } else { "minus" };
        b.metric(&format!("norm_{label}"), [coarse, fine]);
        b.check(Check::new(
            format!("norm_{label}_refinement"),
            change <= 0.1,
            format!("{coarse} -> {fine}"),
        ));
        rows.push(vec![
            m as f64,
            if sign == Sign::Plus { 1.0 } else { -1.0 },
            coarse,
        ]);
        rows.push(vec![
            2.0 * m as f64,
            if sign == Sign::Plus { 1.0 } else { -1.0 },
            fine,
        ]);
    }
    let path = cfg.csv_path();
    write_table(&path, &["m", "sign", "norm_estimate"], &rows)?;
    b.artifact(&path);

    let grid = cfg.grid()?;
    match chirp_incoming_fraction(grid, 8.0) {
        Ok(ratio) => {
            b.metric("chirp_incoming_fraction", ratio);
            b.check(Check::new(
                "outgoing_chirp",
                ratio <= 0.2,
                format!("{ratio}"),
            ));
        }
        Err(e) => b.summary.warnings.push(format!("chirp test skipped: {e}")),
    }
    Ok(())
}

fn run_mismatch(cfg: &ScenarioConfig, b: &mut Builder) -> Result<()> {
    let grid = cfg.grid()?;
    let kind = cfg.mismatch_kind();
    let mut estimates = Vec::new();
    for &r in &cfg.r_list {
        estimates.push((
            r,
            mismatch_norm(grid, kind, r, cfg.mismatch_n, cfg.trials, cfg.seed)?,
        ));
    }
    let rows: Vec<Vec<f64>> = estimates
        .iter()
        .map(|(r, e)| vec![*r, e.norm, e.spread, e.sweeps as f64])
        .collect();
    let path = cfg.csv_path();
    write_table(&path, &["R", "norm", "spread", "sweeps"], &rows)?;
    b.artifact(&path);
    b.metric("kind", format!("{kind:?}"));
    b.metric("N", cfg.mismatch_n);
    b.metric(
        "estimates",
        estimates.iter().map(|(r, e)| (r, e)).collect::<Vec<_>>(),
    );
    let monotone = estimates.windows(2).all(|w| {
        w[1].0 < w[0].0 || w[1].1.norm <= w[0].1.norm * (1.0 + w[0].1.spread.max(w[1].1.spread))
    });
    b.check(Check::new(
        "monotone_in_R",
        monotone,
        "estimates nonincreasing in R within trial spread",
    ));
    if kind == MismatchKind::GradientLow {
        let factors: Vec<f64> = estimates
            .windows(2)
            .filter(|w| (w[1].0 / w[0].0 - 2.0).abs() < 1e-12)
            .map(|w| w[0].1.norm / w[1].1.norm)
            .collect();
        b.metric("decay_factors", &factors);
        if !factors.is_empty() {
            let ok = factors.iter().all(|f| *f >= 4.0);
            b.check(Check::new("decay_per_doubling", ok, format!("{factors:?}")));
        }
    }
    Ok(())
}
