use cqnls::inout::{
    band_project, freq_decay_fit, freq_decay_scan, gradient_low_symbol_max, inout_apply,
    inout_band, mismatch_norm, random_radial_profile, FreqDecayRow, FreqDecayScan, MismatchKind,
    PvKernelPlan, Sign,
};
use cqnls::spectral::{Field2D, GridSpec, RadialProfile};
use cqnls::{Complex64, Error};
use proptest::prelude::*;

fn sum_profiles(a: &RadialProfile, b: &RadialProfile) -> RadialProfile {
    a.with_samples(
        a.samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| x + y)
            .collect(),
    )
    .unwrap()
}

fn distance(a: &RadialProfile, b: &RadialProfile) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn bands_split_by_sign() {
    let grid = GridSpec::new(128, 20.0).unwrap();
    let f = random_radial_profile(128, 20.0 / 128.0, 3.0, 4).unwrap();
    let plus = inout_band(&f, grid, 2.0, Sign::Plus).unwrap();
    let minus = inout_band(&f, grid, 2.0, Sign::Minus).unwrap();
    let band = band_project(&f, grid, 2.0).unwrap();
    assert!(distance(&sum_profiles(&plus, &minus), &band) <= 1e-13 * band.l2_norm());
    assert!(matches!(
        inout_band(&f, grid, 1024.0, Sign::Plus),
        Err(Error::InadmissibleFrequency { .. })
    ));
    assert!(inout_band(&f, grid, 3.0, Sign::Plus).is_err());
}

#[test]
fn plan_must_match_the_mesh() {
    let plan = PvKernelPlan::new(100, 0.1).unwrap();
    let f = random_radial_profile(100, 0.2, 2.0, 1).unwrap();
    assert!(matches!(
        inout_apply(&plan, &f, Sign::Plus),
        Err(Error::MeshMismatch)
    ));
    let g = random_radial_profile(50, 0.1, 2.0, 1).unwrap();
    assert!(matches!(
        inout_apply(&plan, &g, Sign::Plus),
        Err(Error::MeshMismatch)
    ));
}

#[test]
fn mismatch_hooks() {
    let grid = GridSpec::new(128, 40.0).unwrap();
    let zero = mismatch_norm(grid, MismatchKind::Zero, 4.0, 4.0, 2, 0).unwrap();
    assert_eq!(zero.norm, 0.0);
    // With the exterior cutoff removed the operator is grad P_{<=N} chi_{R/2},
    // whose norm approaches the symbol maximum sup_s s theta(s) N.
    let id = mismatch_norm(grid, MismatchKind::IdentityCutoff, 16.0, 4.0, 4, 0).unwrap();
    let ceiling = gradient_low_symbol_max() * 4.0;
    assert!(
        id.norm <= ceiling * (1.0 + 1e-3) && id.norm >= 0.95 * ceiling,
        "{} vs {ceiling}",
        id.norm
    );
    assert!((gradient_low_symbol_max() - 1.17505).abs() < 1e-4);
    assert!(mismatch_norm(grid, MismatchKind::GradientLow, 0.5, 4.0, 2, 0).is_err());
    assert!(mismatch_norm(grid, MismatchKind::GradientLow, 4.0, 3.0, 2, 0).is_err());
    assert_eq!(MismatchKind::parse("1"), Some(MismatchKind::GradientLow));
    assert_eq!(MismatchKind::parse("2"), Some(MismatchKind::LowHigh));
    assert_eq!(MismatchKind::parse("bogus"), None);
}

#[test]
fn mismatch_norms_decrease_in_radius() {
    let grid = GridSpec::new(128, 40.0).unwrap();
    for (kind, n) in [
        (MismatchKind::GradientLow, 4.0),
        (MismatchKind::LowHigh, 1.0),
    ] {
        let est: Vec<_> = [4.0, 8.0, 16.0]
            .iter()
            .map(|&r| mismatch_norm(grid, kind, r, n, 4, 2).unwrap())
            .collect();
        for w in est.windows(2) {
            assert!(w[1].norm <= w[0].norm + w[0].spread, "{kind:?}: {est:?}");
        }
    }
}

#[test]
fn frequency_decay_scan_examples() {
    let grid = GridSpec::new(128, 16.0).unwrap();
    let u0 = Field2D::from_radial(grid, |r| (-r * r / 32.0).exp());
    let n_list = [2.0, 4.0, 8.0];
    let rows = freq_decay_scan(&[&u0], &n_list).unwrap();
    let mut scan = FreqDecayScan::new(&u0, &n_list).unwrap();
    scan.observe(&u0).unwrap();
    assert_eq!(rows, scan.rows());
    assert!(rows.iter().all(|r| r.exterior_sup <= r.initial_band));

    let mut wide = FreqDecayScan::with_radius(&u0, &n_list, 3.0).unwrap();
    wide.observe(&u0).unwrap();
    for (a, b) in wide.rows().iter().zip(&rows) {
        assert!(a.exterior_sup <= b.exterior_sup);
    }
    assert!(FreqDecayScan::new(&u0, &[0.5]).is_err());
    assert!(FreqDecayScan::with_radius(&u0, &n_list, 0.5).is_err());
    assert!(freq_decay_scan(&[], &n_list).is_err());
}

#[test]
fn frequency_decay_fit_uses_the_first_row() {
    let row = |n: f64, sup: f64, band: f64| FreqDecayRow {
        n_freq: n,
        exterior_sup: sup,
        initial_band: band,
    };
    let rows = [
        row(8.0, 0.1, 0.0),
        row(16.0, 0.04, 0.0),
        row(32.0, 0.01, 0.0),
    ];
    let (c, ok) = freq_decay_fit(&rows).unwrap();
    assert!((c - 0.1 * 8f64.powf(1.2)).abs() < 1e-12);
    assert!(ok);
    let (_, ok) = freq_decay_fit(&[row(8.0, 0.1, 0.0), row(16.0, 0.09, 0.0)]).unwrap();
    assert!(!ok);
    assert!(freq_decay_fit(&[]).is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projections_reconstruct(seed in any::<u64>(), m in 50usize..400, dr in 0.02f64..0.2) {
        let plan = PvKernelPlan::new(m, dr).unwrap();
        let f = random_radial_profile(m, dr, 4.0, seed).unwrap();
        let p = inout_apply(&plan, &f, Sign::Plus).unwrap();
        let q = inout_apply(&plan, &f, Sign::Minus).unwrap();
        let defect = f.with_samples(
            sum_profiles(&p, &q).samples().iter().zip(f.samples()).map(|(a, b)| a - b).collect(),
        ).unwrap();
        prop_assert!(defect.l2_norm() <= 1e-13 * f.l2_norm());
    }

    #[test]
    fn real_profiles_give_conjugate_pieces(seed in any::<u64>(), m in 50usize..300) {
        let dr = 0.1;
        let plan = PvKernelPlan::new(m, dr).unwrap();
        let f = random_radial_profile(m, dr, 4.0, seed).unwrap();
        let real = RadialProfile::new(dr, f.samples().iter().map(|z| Complex64::new(z.re, 0.0)).collect()).unwrap();
        let p = inout_apply(&plan, &real, Sign::Plus).unwrap();
        let q = inout_apply(&plan, &real, Sign::Minus).unwrap();
        for (a, b) in p.samples().iter().zip(q.samples()) {
            prop_assert!((a - b.conj()).norm() <= 1e-14 * (1.0 + a.norm()));
        }
    }
}
