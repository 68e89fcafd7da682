use angcorr::peaks::{
    analyze, envelope_decay_exponent, find_peaks, oscillation_score, quasi_period, PeakOptions,
};
use angcorr::{
    ft_1d, legendre_coefficients, spherical_box_ft, CorrelationModel, GridKind, ModelKind,
    PowerSpectrum, Profile1D,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn frequency_spectrum(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> PowerSpectrum<f64> {
    let values = grid.iter().map(|&k| f(k)).collect();
    PowerSpectrum::new(GridKind::Frequency, grid, values).unwrap()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

// J1 from its integral representation; the trapezoid rule is spectrally
// accurate for this periodic integrand.
fn j1_integral(x: f64) -> f64 {
    let n = 400;
    let h = PI / n as f64;
    let s: f64 = (0..=n)
        .map(|i| {
            let t = i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * (t - x * t.sin()).cos()
        })
        .sum();
    s * h / PI
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-10 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

#[test]
fn airy_pattern_secondary_maxima() {
    let r = 0.5;
    let airy = |x: f64| (2.0 * j1_integral(x) / x).powi(2);
    let expected: Vec<f64> = [(4.0, 6.5), (7.5, 9.5), (10.5, 13.0)]
        .iter()
        .map(|&(a, b)| golden_max(airy, a, b))
        .collect();
    let spec = frequency_spectrum(linspace(1.0, 40.0 / r, 8000), |k| {
        spherical_box_ft(2, r, k).unwrap().powi(2)
    });
    let peaks = find_peaks(&spec, &PeakOptions::default()).unwrap();
    assert!(peaks.len() >= 3);
    for (p, x) in peaks.iter().zip(&expected) {
        assert!(
            (p.location * r - x).abs() < 1e-3,
            "{} vs {x}",
            p.location * r
        );
    }
}

fn decay_slope(profile: Profile1D<f64>, k_max: f64) -> f64 {
    let grid = linspace(0.2, k_max, 30_000);
    let ft = ft_1d(&profile, &grid);
    let spec = PowerSpectrum::new(
        GridKind::Frequency,
        grid,
        ft.iter().map(|c| c.norm()).collect(),
    )
    .unwrap();
    envelope_decay_exponent(&spec, &PeakOptions::default())
        .unwrap()
        .slope
}

#[test]
fn envelope_exponent_follows_discontinuity_order() {
    let box_slope = decay_slope(Profile1D::box_profile(1.0).unwrap(), 300.0);
    let tri_slope = decay_slope(Profile1D::triangle(1.0).unwrap(), 300.0);
    let spline_slope = decay_slope(Profile1D::quadratic_spline(1.0).unwrap(), 300.0);
    assert!((box_slope + 1.0).abs() < 0.15, "{box_slope}");
    assert!((tri_slope + 2.0).abs() < 0.15, "{tri_slope}");
    assert!((spline_slope + 3.0).abs() < 0.15, "{spline_slope}");
}

#[test]
fn disk_power_envelope() {
    let spec = frequency_spectrum(linspace(0.1, 300.0, 30_000), |k| {
        spherical_box_ft(2, 1.0, k).unwrap().powi(2)
    });
    let fit = envelope_decay_exponent(&spec, &PeakOptions::default()).unwrap();
    assert!((fit.slope + 3.0).abs() < 0.2, "{fit:?}");
}

#[test]
fn double_exponential_has_no_peaks_broken_exponential_does() {
    let c1 = legendre_coefficients(
        &CorrelationModel::<f64>::paper_default(ModelKind::DoubleExp),
        2000,
    )
    .unwrap();
    let c2 = legendre_coefficients(
        &CorrelationModel::<f64>::paper_default(ModelKind::BrokenExp),
        2000,
    )
    .unwrap();
    let opts = PeakOptions::default();
    assert!(find_peaks(&c1, &opts).unwrap().is_empty());
    assert!(!oscillation_score(&c1, &opts).detected);
    let peaks = find_peaks(&c2, &opts).unwrap();
    assert!(peaks.len() >= 3);
    assert!(oscillation_score(&c2, &opts).detected);
    // The recovered spacing is the full period 2 pi / theta* of the
    // breakpoint term.
    let spacing = quasi_period(&peaks).unwrap().mean;
    let theta_star = 1.03f64.to_radians();
    let expected = 2.0 * PI / theta_star;
    assert!(
        (spacing - expected).abs() < 0.15 * expected,
        "{spacing} vs {expected}"
    );
}

#[test]
fn grid_refinement_stability() {
    let f = |k: f64| (k * 0.9).sin().powi(2) / k + 1e-3;
    let coarse_grid = linspace(1.0, 60.0, 1500);
    let step = coarse_grid[1] - coarse_grid[0];
    let coarse = find_peaks(&frequency_spectrum(coarse_grid, f), &PeakOptions::default()).unwrap();
    let fine = find_peaks(
        &frequency_spectrum(linspace(1.0, 60.0, 2999), f),
        &PeakOptions::default(),
    )
    .unwrap();
    assert_eq!(coarse.len(), fine.len());
    for (c, f) in coarse.iter().zip(&fine) {
        assert!((c.location - f.location).abs() < step);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn scale_equivariance(c in 1e-6f64..1e6, x0 in 0.2f64..2.0) {
        let spec = frequency_spectrum(linspace(0.5, 150.0, 20_000), |k| (k * x0).sin().powi(2) / (k * k) + 1e-9);
        let opts = PeakOptions::default();
        let a = analyze(&spec, &opts).unwrap();
        let b = analyze(&spec.scaled(c), &opts).unwrap();
        prop_assert_eq!(a.peaks.len(), b.peaks.len());
        for (p, q) in a.peaks.iter().zip(&b.peaks) {
            prop_assert!((p.location - q.location).abs() <= 1e-9 * p.location);
        }
        prop_assert_eq!(a.oscillation.detected, b.oscillation.detected);
        let (qa, qb) = (a.quasi_period.unwrap(), b.quasi_period.unwrap());
        prop_assert!((qa.mean - qb.mean).abs() <= 1e-9 * qa.mean);
        let (ea, eb) = (a.envelope.unwrap(), b.envelope.unwrap());
        prop_assert!((ea.slope - eb.slope).abs() < 1e-6);
    }
}
