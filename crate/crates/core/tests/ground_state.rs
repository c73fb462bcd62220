use cqnls::functionals::gn_ratio;
use cqnls::ground_state::{petviashvili, petviashvili_from, reference_mass, shooting_oracle};
use cqnls::spectral::{radial_average, GridSpec};

#[test]
fn townes_amplitude_and_mass() {
    let gs = petviashvili(GridSpec::new(512, 20.0).unwrap(), 1e-10, 500).unwrap();
    let oracle = shooting_oracle(30.0, 1e-3, 1e-10).unwrap();
    let q0 = gs.q.linf();
    assert!((q0 - 2.20620).abs() < 5e-5, "{q0}");
    assert!((q0 - oracle.interpolate(0.0).re).abs() < 1e-6);
    assert!((gs.mass_q - 11.7009).abs() < 1e-3, "{}", gs.mass_q);
    assert!((oracle.l2_norm_sq() - gs.mass_q).abs() / gs.mass_q < 1e-6);
    assert!(gs.residual <= 1e-10);

    let imag = gs.q.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    assert!(imag <= 1e-13 * q0);
    let c = gs.q.grid().n() / 2;
    assert_eq!(gs.q.at(c, c).re, q0);
    assert!(radial_average(&gs.q, 400).unwrap().angular_deviation <= 1e-10);
}

#[test]
fn converged_seed_is_a_fixed_point() {
    let grid = GridSpec::new(128, 16.0).unwrap();
    let gs = petviashvili(grid, 1e-10, 500).unwrap();
    let again = petviashvili_from(gs.q.clone(), 1e-10, 500).unwrap();
    assert!(again.iterations <= 2, "{}", again.iterations);
    assert!((again.stabilizer - 1.0).abs() <= 1e-8);
}

#[test]
fn mass_is_box_independent() {
    let small = petviashvili(GridSpec::new(512, 20.0).unwrap(), 1e-10, 500).unwrap();
    let large = petviashvili(GridSpec::new(512, 40.0).unwrap(), 1e-10, 500).unwrap();
    assert!((small.mass_q - large.mass_q).abs() / small.mass_q <= 1e-6);
    assert!((reference_mass() - small.mass_q).abs() / small.mass_q <= 1e-6);
}

#[test]
fn ground_state_is_the_gagliardo_nirenberg_optimizer() {
    let gs = petviashvili(GridSpec::new(256, 20.0).unwrap(), 1e-10, 500).unwrap();
    let r = gn_ratio(&gs.q, gs.mass_q).unwrap();
    assert!((r - 1.0).abs() <= 1e-4, "{r}");
}

#[test]
fn oracle_profile_is_monotone() {
    let p = shooting_oracle(20.0, 1e-3, 1e-8).unwrap();
    let s: Vec<f64> = p.samples().iter().map(|z| z.re).collect();
    assert!(s.windows(2).all(|w| w[1] < w[0]));
    assert!(s[0] > 2.2 && *s.last().unwrap() < 1e-8);
}
