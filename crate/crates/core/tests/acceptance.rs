//! Acceptance gate: runs every criterion at full tolerance and prints one
//! line per criterion. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use cqnls::experiments::{
    chirp_incoming_fraction, evacuation_report, inout_identity_defects, localization_report,
    virial_identity_check, MorawetzScan, ScaleSample,
};
use cqnls::functionals::{energy, gn_ratio, mass, MonitorConfig};
use cqnls::ground_state::{
    petviashvili, pohozaev_check, reference_mass, shooting_oracle, GroundStateResult,
};
use cqnls::inout::{
    freq_decay_fit, inout_norm_estimate, mismatch_norm, FreqDecayScan, MismatchKind, Sign,
};
use cqnls::propagator::{
    evolve_observed, scattering_windows, time_reverse, AbsorberConfig, EvolveOptions, NlsModel,
    RunState, ScatteringReport, ScatteringSample,
};
use cqnls::spectral::{Field2D, GridSpec};
use cqnls::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ground_state(n: usize, l: f64) -> GroundStateResult {
    petviashvili(GridSpec::new(n, l).unwrap(), 1e-10, 500).expect("ground state converges")
}

fn criterion_1(gs: &GroundStateResult, elapsed: f64) -> Outcome {
    let oracle = shooting_oracle(30.0, 1e-3, 1e-8).expect("oracle");
    let mass_gap = rel(gs.mass_q, oracle.l2_norm_sq());
    let grid = *gs.q.grid();
    let mut sup: f64 = 0.0;
    for (z, r) in gs.q.values().iter().zip(grid.radii()) {
        sup = sup.max((z.re - oracle.interpolate(r).re).abs());
    }
    outcome(
        gs.iterations < 500 && mass_gap <= 1e-3 && sup <= 1e-4 && elapsed < 30.0,
        format!(
            "iterations {}, mass gap {mass_gap:.2e}, sup diff {sup:.2e}, {elapsed:.1} s",
            gs.iterations
        ),
    )
}

fn criterion_2(gs: &GroundStateResult) -> Outcome {
    let p = pohozaev_check(gs).expect("pohozaev");
    let worst = p.kinetic.max(p.quartic).max(p.energy);
    outcome(
        worst <= 1e-6,
        format!(
            "kinetic {:.1e}, quartic {:.1e}, energy {:.1e}",
            p.kinetic, p.quartic, p.energy
        ),
    )
}

fn random_smooth_field(grid: GridSpec, rng: &mut ChaCha8Rng) -> Field2D {
    let bumps: Vec<(f64, f64, f64, Complex64)> = (0..rng.gen_range(1..5))
        .map(|_| {
            (
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.5..2.0),
                Complex64::from_polar(
                    rng.gen_range(0.1..3.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ),
            )
        })
        .collect();
    let (kx, ky) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    Field2D::from_fn(grid, |x, y| {
        let phase = Complex64::from_polar(1.0, kx * x + ky * y);
        bumps
            .iter()
            .map(|&(cx, cy, s, a)| {
                a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * s * s)).exp()
            })
            .sum::<Complex64>()
            * phase
    })
}

fn criterion_3(gs: &GroundStateResult) -> Outcome {
    let mass_q = reference_mass();
    let at_q = gn_ratio(&gs.q, mass_q).expect("gn ratio");
    let grid = GridSpec::new(128, 12.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let worst = (0..100)
        .map(|_| gn_ratio(&random_smooth_field(grid, &mut rng), mass_q).expect("gn ratio"))
        .fold(0.0, f64::max);
    outcome(
        (at_q - 1.0).abs() <= 1e-4 && worst <= 1.0 + 1e-6,
        format!("gn(Q) = {at_q:.8}, max over 100 fields {worst:.6}"),
    )
}

fn energy_error(u0: &Field2D, dt: f64, t: f64) -> f64 {
    let mut state = RunState::new(u0.clone(), dt, NlsModel::default(), None).unwrap();
    state.advance((t / dt).round() as usize);
    (energy(state.field()) - energy(u0)).abs()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::new(128, 16.0).unwrap();
    let u0 = Field2D::from_radial(grid, |r| 1.5 * (-r * r / 4.0).exp());
    let coarse = energy_error(&u0, 0.02, 1.0);
    let fine = energy_error(&u0, 0.01, 1.0);
    let ratio = coarse / fine;

    let m0 = mass(&u0);
    let mut state = RunState::new(u0.clone(), 0.01, NlsModel::default(), None).unwrap();
    state.advance(10_000);
    let drift = rel(mass(state.field()), m0);

    let mut forward = RunState::new(u0.clone(), 0.01, NlsModel::default(), None).unwrap();
    forward.advance(200);
    let mut back = RunState::new(
        time_reverse(forward.field()),
        0.01,
        NlsModel::default(),
        None,
    )
    .unwrap();
    back.advance(200);
    let recovered = time_reverse(back.field());
    let reversal = recovered.sub(&u0).unwrap().l2_norm() / u0.l2_norm();
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        (3.5..=4.5).contains(&ratio) && drift <= 1e-10 && reversal <= 1e-8 && elapsed < 120.0,
        format!("richardson {ratio:.3}, mass drift {drift:.1e}, reversal {reversal:.1e}, {elapsed:.1} s"),
    )
}

fn criterion_5() -> Outcome {
    let grid = GridSpec::new(256, 32.0).unwrap();
    let u0 = Field2D::from_radial(grid, |r| (-r * r / 8.0).exp());
    let times: Vec<f64> = (1..=20).map(|k| 0.2 * k as f64).collect();
    let samples =
        virial_identity_check(&u0, 0.002, &[5.0, 10.0], &times, 0.02).expect("virial check");
    let worst = samples.iter().map(|s| s.relative_error).fold(0.0, f64::max);
    outcome(
        worst <= 1e-4,
        format!(
            "{} samples, worst relative error {worst:.1e}",
            samples.len()
        ),
    )
}

fn absorbing_options(dt: f64, t_final: f64, cadence: f64, mass_q: f64) -> EvolveOptions {
    EvolveOptions {
        dt,
        t_final,
        cadence: (cadence / dt).round() as usize,
        monitor: MonitorConfig {
            radii: [5.0, 10.0],
            mass_q,
            eps: 0.01,
        },
        absorber: Some(AbsorberConfig::default()),
        model: None,
        keep_fields: false,
        track_absorbed: true,
    }
}

fn criterion_6(gs: &GroundStateResult) -> Outcome {
    let u0 = gs.q.scale(0.9_f64.sqrt());
    let opts = absorbing_options(0.01, 80.0, 0.1, gs.mass_q);
    let mut scan = MorawetzScan::new(&[5.0, 10.0, 20.0], &[40.0, 80.0]);
    evolve_observed(&u0, &opts, |s| scan.observe(s.t(), s.field())).expect("subthreshold run");
    let ratios = scan.max_ratios();
    if ratios.len() != 2 {
        return outcome(false, format!("missing checkpoints: {ratios:?}"));
    }
    let (r40, r80) = (ratios[0].1, ratios[1].1);
    outcome(
        r40.is_finite() && r80.is_finite() && r80 <= 1.1 * r40,
        format!("max ratio {r40:.4} at T = 40, {r80:.4} at T = 80"),
    )
}

struct ThresholdRun {
    linf0: f64,
    linf_end: f64,
    report: ScatteringReport,
    samples: Vec<ScaleSample>,
    floor_gap: f64,
}

const EDGES: [f64; 5] = [2.5, 5.0, 10.0, 20.0, 40.0];
const C_GRID: [f64; 3] = [1.0, 2.0, 4.0];

fn threshold_run(gs: &GroundStateResult, dt: f64, with_samples: bool) -> ThresholdRun {
    let u0 = &gs.q;
    let opts = absorbing_options(dt, 40.0, 0.5, gs.mass_q);
    let mut pulled = Vec::new();
    let mut samples = Vec::new();
    let mut linf_end = 0.0;
    evolve_observed(u0, &opts, |s| {
        let t = s.t();
        if EDGES.iter().any(|e| (e - t).abs() < 0.5 * dt) {
            pulled.push(ScatteringSample::from_state(s));
        }
        if with_samples {
            samples.push(ScaleSample::measure(s.field(), t, 0.01, &C_GRID));
        }
        linf_end = s.field().linf();
    })
    .expect("threshold run");
    ThresholdRun {
        linf0: u0.linf(),
        linf_end,
        report: scattering_windows(&pulled).expect("windows"),
        samples,
        floor_gap: rel(u0.lp_pow(6) / 6.0, energy(u0)),
    }
}

fn criterion_7(coarse: &ThresholdRun, fine: &ThresholdRun) -> Outcome {
    let stable = coarse
        .report
        .windows
        .iter()
        .zip(&fine.report.windows)
        .all(|(a, b)| {
            rel(a.cauchy_h1, b.cauchy_h1) <= 0.05 && rel(a.l4tx_increment, b.l4tx_increment) <= 0.05
        })
        && rel(coarse.linf_end, fine.linf_end) <= 0.05;
    let each = |r: &ThresholdRun| {
        r.linf_end <= 0.5 * r.linf0 && r.report.cauchy_decreasing() && r.report.l4tx_decreasing()
    };
    let cauchy: Vec<String> = coarse
        .report
        .windows
        .iter()
        .map(|w| format!("{:.3}", w.cauchy_h1))
        .collect();
    let l4: Vec<String> = coarse
        .report
        .windows
        .iter()
        .map(|w| format!("{:.3}", w.l4tx_increment))
        .collect();
    outcome(
        each(coarse) && each(fine) && stable,
        format!(
            "linf {:.3} -> {:.3}, cauchy [{}], l4tx [{}], dt/2 stable {stable}",
            coarse.linf0,
            coarse.linf_end,
            cauchy.join(" "),
            l4.join(" ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let gs = ground_state(512, 20.0);
    let grid = *gs.q.grid();
    let bumped =
        gs.q.add(&Field2D::from_radial(grid, |r| 0.1 * (-r * r / 32.0).exp()))
            .unwrap();
    let u0 = bumped.scale((gs.mass_q / mass(&bumped)).sqrt());
    let n_list = [8.0, 16.0, 32.0];
    let mut scan = FreqDecayScan::new(&u0, &n_list).unwrap();
    let mut opts = absorbing_options(0.005, 10.0, 0.1, gs.mass_q);
    opts.monitor.radii = [2.0, 4.0];
    opts.track_absorbed = false;
    evolve_observed(&u0, &opts, |s| {
        scan.observe(s.field()).expect("band projection")
    })
    .expect("perturbed run");
    let rows = scan.rows();
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("N={} sup {:.2e}", r.n_freq, r.exterior_sup))
        .collect();
    match freq_decay_fit(rows) {
        Some((c, ok)) => outcome(ok, format!("C = {c:.3}; {}", table.join(", "))),
        None => outcome(false, "empty table"),
    }
}

fn criterion_9() -> Outcome {
    let (recon, _) = inout_identity_defects(400, 0.1, 200, 11).expect("identity");
    let coarse = inout_norm_estimate(400, 0.1, 4.0, 200, 1, Sign::Plus).expect("norm");
    let fine = inout_norm_estimate(800, 0.05, 4.0, 200, 1, Sign::Plus).expect("norm");
    let chirp = chirp_incoming_fraction(GridSpec::new(512, 40.0).unwrap(), 8.0).expect("chirp");
    outcome(
        recon <= 1e-13 && rel(fine, coarse) <= 0.1 && chirp <= 0.2,
        format!("reconstruction {recon:.1e}, norm {coarse:.4} -> {fine:.4}, incoming fraction {chirp:.4}"),
    )
}

fn criterion_10() -> Outcome {
    let grid = GridSpec::new(256, 40.0).unwrap();
    let norms: Vec<f64> = [4.0, 8.0, 16.0]
        .iter()
        .map(|&r| {
            mismatch_norm(grid, MismatchKind::GradientLow, r, 4.0, 8, 3)
                .expect("mismatch")
                .norm
        })
        .collect();
    let factors = [norms[0] / norms[1], norms[1] / norms[2]];
    outcome(
        factors.iter().all(|f| *f >= 4.0),
        format!(
            "norms {:.3e} {:.3e} {:.3e}, factors {:.1} {:.1}",
            norms[0], norms[1], norms[2], factors[0], factors[1]
        ),
    )
}

fn criterion_11(run: &ThresholdRun) -> Outcome {
    let loc = localization_report(&run.samples, &C_GRID, 0.05);
    let evac =
        evacuation_report(&run.samples, &C_GRID, &[5.0, 10.0, 20.0, 40.0]).expect("evacuation");
    let c = loc.localizing_c;
    let evacuating = c.map_or(false, |c| {
        evac.decreasing.iter().any(|(k, ok)| *k == c && *ok)
    });
    let excess: Vec<String> = evac
        .windows
        .iter()
        .filter(|w| Some(w.c) == c)
        .map(|w| format!("{:.3}", w.local_energy - w.floor))
        .collect();
    outcome(
        c.is_some() && evacuating && run.floor_gap <= 1e-6,
        format!(
            "localizing C {c:?}, excess over floor [{}], floor identity {:.1e}",
            excess.join(" "),
            run.floor_gap
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut report = |k: usize, o: Outcome| {
        println!(
            "criterion {k}: {} ({})",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((k, o));
    };

    let start = Instant::now();
    let gs20 = ground_state(512, 20.0);
    let elapsed = start.elapsed().as_secs_f64();
    report(1, criterion_1(&gs20, elapsed));
    report(2, criterion_2(&gs20));
    report(3, criterion_3(&gs20));
    report(4, criterion_4());
    report(5, criterion_5());
    report(9, criterion_9());
    report(10, criterion_10());
    report(8, criterion_8());

    let gs40 = ground_state(512, 40.0);
    report(6, criterion_6(&gs40));
    let coarse = threshold_run(&gs40, 0.01, true);
    let fine = threshold_run(&gs40, 0.005, false);
    report(7, criterion_7(&coarse, &fine));
    report(11, criterion_11(&coarse));

    let failed: Vec<usize> = results
        .iter()
        .filter(|(_, o)| !o.passed)
        .map(|(k, _)| *k)
        .collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {failed:?}");
        ExitCode::FAILURE
    }
}
