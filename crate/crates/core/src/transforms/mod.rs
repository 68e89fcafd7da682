//! Exact (Legendre) and small-angle (Hankel) transforms between angular
//! correlation functions and power spectra, and the one-dimensional Fourier
//! transform used to study how breakpoints decay in frequency space.

mod profile;
mod spectrum;
mod tabulated;

pub use profile::{Discontinuity, Profile1D};
pub use spectrum::{GridKind, PowerSpectrum, TOL_NEG};
pub use tabulated::{TabulatedCorrelation, DEFAULT_STENCIL};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{split_points, GaussLegendre, TRANSFORM_NODES};
use crate::scalar::Real;
use crate::special::{bessel_j0, bessel_j1, LegendreSeq};

/// Anything that can be evaluated as an isotropic angular correlation `C(theta)`.
pub trait AngularCorrelation<T: Real>: Sync {
    /// `C(theta)` at `theta` radians.
    fn correlation(&self, theta: T) -> Result<T>;

    /// Angles where some derivative of `C` is discontinuous.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }

    /// Closed interval (radians) on which [`correlation`](Self::correlation) is defined.
    fn angular_range(&self) -> (T, T);
}

/// Quadrature settings shared by the correlation/spectrum transforms.
#[derive(Clone, Copy, Debug)]
pub struct TransformOptions<T> {
    /// Gauss–Legendre nodes per breakpoint-free subinterval of `[0, pi]`;
    /// Legendre transforms use at least `2 l_max + 2`.
    pub nodes: usize,
    /// Angle beyond which the small-angle transform expects `C` to be negligible.
    pub small_angle_cut: T,
}

impl<T: Real> Default for TransformOptions<T> {
    fn default() -> Self {
        Self {
            nodes: TRANSFORM_NODES,
            small_angle_cut: T::lit(0.2),
        }
    }
}

const CHUNK: usize = 256;

/// (theta, C(theta), C(theta) sin(theta) w) at every quadrature node on [0, pi].
fn weighted_samples<T: Real, C: AngularCorrelation<T> + ?Sized>(
    corr: &C,
    opts: &TransformOptions<T>,
) -> Result<Vec<(T, T, T)>> {
    let pi = T::PI();
    let (lo, hi) = corr.angular_range();
    let slack = T::lit(1e-12);
    if lo > slack {
        return Err(Error::Extrapolation {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
            at: 0.0,
        });
    }
    if hi < pi * (T::one() - slack) {
        return Err(Error::Extrapolation {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
            at: pi.to_f64_lossy(),
        });
    }
    let rule = GaussLegendre::<T>::new(opts.nodes);
    let edges = split_points(T::zero(), pi, corr.breakpoints());
    let nodes: Vec<(T, T)> = edges
        .windows(2)
        .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
        .collect();
    nodes
        .into_par_iter()
        .map(|(theta, w)| {
            let c = corr.correlation(theta.max(lo).min(hi))?;
            if !c.is_finite() {
                return Err(Error::NonFinite {
                    what: "correlation",
                    at: theta.to_f64_lossy(),
                });
            }
            Ok((theta, c, c * theta.sin() * w))
        })
        .collect()
}

/// `C_l = 2 pi int_0^pi C(theta) P_l(cos theta) sin(theta) dtheta` for `l = 0..=ell_max`.
pub fn legendre_coefficients<T: Real, C: AngularCorrelation<T> + ?Sized>(
    corr: &C,
    ell_max: usize,
) -> Result<PowerSpectrum<T>> {
    legendre_coefficients_with(corr, ell_max, &TransformOptions::default())
}

pub fn legendre_coefficients_with<T: Real, C: AngularCorrelation<T> + ?Sized>(
    corr: &C,
    ell_max: usize,
    opts: &TransformOptions<T>,
) -> Result<PowerSpectrum<T>> {
    // P_l needs about two nodes per oscillation; below that the rule aliases.
    let opts = TransformOptions {
        nodes: opts.nodes.max(2 * ell_max + 2),
        ..*opts
    };
    let samples = weighted_samples(corr, &opts)?;
    // Fixed chunking with an in-order reduction keeps results independent of
    // the thread count.
    let partials: Vec<Vec<T>> = samples
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![T::zero(); ell_max + 1];
            for &(theta, _, g) in chunk {
                for (a, p) in acc.iter_mut().zip(LegendreSeq::new(theta.cos())) {
                    *a = *a + g * p;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![T::zero(); ell_max + 1];
    for part in &partials {
        for (t, &p) in total.iter_mut().zip(part) {
            *t = *t + p;
        }
    }
    let two_pi = T::lit(2.0) * T::PI();
    PowerSpectrum::from_multipoles(total.into_iter().map(|v| v * two_pi).collect())
}

/// `C(theta) = (1/4pi) sum_l (2l+1) C_l P_l(cos theta)` on `theta_grid` (radians).
pub fn correlation_from_spectrum<T: Real>(
    spec: &PowerSpectrum<T>,
    theta_grid: &[T],
) -> Result<TabulatedCorrelation<T>> {
    if spec.is_empty() {
        return Err(Error::Invalid("empty spectrum".into()));
    }
    if !spec.is_contiguous_multipoles() {
        return Err(Error::Invalid(
            "Legendre synthesis needs a contiguous multipole grid 0..l_max".into(),
        ));
    }
    let coeffs: Vec<T> = spec
        .values()
        .iter()
        .enumerate()
        .map(|(l, &c)| T::from_usize_lossy(2 * l + 1) * c)
        .collect();
    let four_pi = T::lit(4.0) * T::PI();
    let values: Vec<T> = theta_grid
        .par_iter()
        .map(|&theta| {
            let sum: T = coeffs
                .iter()
                .zip(LegendreSeq::new(theta.cos()))
                .map(|(&c, p)| c * p)
                .sum();
            sum / four_pi
        })
        .collect();
    TabulatedCorrelation::new(theta_grid.to_vec(), values, None)
}

/// Small-angle spectrum `P(k) = 2 pi int_0^pi C(theta) J0(k theta) sin(theta) dtheta`.
pub fn small_angle_spectrum<T: Real, C: AngularCorrelation<T> + ?Sized>(
    corr: &C,
    k_grid: &[T],
) -> Result<PowerSpectrum<T>> {
    small_angle_spectrum_with(corr, k_grid, &TransformOptions::default())
}

pub fn small_angle_spectrum_with<T: Real, C: AngularCorrelation<T> + ?Sized>(
    corr: &C,
    k_grid: &[T],
    opts: &TransformOptions<T>,
) -> Result<PowerSpectrum<T>> {
    if k_grid.iter().any(|&k| k < T::zero()) {
        return Err(Error::Domain("frequencies must be non-negative".into()));
    }
    let samples = weighted_samples(corr, opts)?;
    let peak = samples.iter().fold(T::zero(), |m, s| m.max(s.1.abs()));
    let beyond = samples
        .iter()
        .filter(|s| s.0 > opts.small_angle_cut)
        .fold(T::zero(), |m, s| m.max(s.1.abs()));
    if beyond > T::lit(1e-3) * peak {
        log::warn!(
            "correlation is not negligible beyond {} rad (|C| reaches {:e} of its maximum); \
             small-angle spectrum is only approximate",
            opts.small_angle_cut,
            (beyond / peak).to_f64_lossy()
        );
    }
    let two_pi = T::lit(2.0) * T::PI();
    let values: Vec<T> = k_grid
        .par_iter()
        .map(|&k| {
            let s: T = samples.iter().map(|&(t, _, g)| g * bessel_j0(k * t)).sum();
            s * two_pi
        })
        .collect();
    PowerSpectrum::new(GridKind::Frequency, k_grid.to_vec(), values)
}

const FT_PANEL_NODES: usize = 16;

/// `f~(k) = int f(x) e^{-ikx} dx` by composite Gauss–Legendre quadrature with
/// at least one panel per wavelength, split at the profile's breakpoints.
pub fn ft_1d<T: Real>(profile: &Profile1D<T>, k_grid: &[T]) -> Vec<Complex<T>> {
    let rule = GaussLegendre::<T>::new(FT_PANEL_NODES);
    let (a, b) = profile.support();
    let edges = split_points(a, b, profile.breakpoints().iter().copied());
    let two_pi = T::lit(2.0) * T::PI();
    k_grid
        .par_iter()
        .map(|&k| {
            let mut re = T::zero();
            let mut im = T::zero();
            for w in edges.windows(2) {
                let width = w[1] - w[0];
                let panels = (k.abs() * width / two_pi).ceil().to_usize().unwrap_or(0) + 1;
                let step = width / T::from_usize_lossy(panels);
                for p in 0..panels {
                    let lo = w[0] + step * T::from_usize_lossy(p);
                    let hi = if p + 1 == panels { w[1] } else { lo + step };
                    for (x, wt) in rule.mapped(lo, hi) {
                        let fx = profile.eval(x) * wt;
                        let (s, c) = (k * x).sin_cos();
                        re = re + fx * c;
                        im = im - fx * s;
                    }
                }
            }
            Complex::new(re, im)
        })
        .collect()
}

/// Fourier transform of the unit-integral uniform ball of radius `radius` in
/// `d` = 1, 2 or 3 dimensions, normalised to 1 at `k = 0`:
/// `sin(x)/x`, `2 J1(x)/x`, `3 (sin x - x cos x)/x^3` with `x = k R`.
pub fn spherical_box_ft<T: Real>(d: u32, radius: T, k: T) -> Result<T> {
    if !(radius > T::zero()) {
        return Err(Error::Domain(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if !(k >= T::zero()) {
        return Err(Error::Domain(format!(
            "frequency must be non-negative, got {k}"
        )));
    }
    let x = k * radius;
    let x2 = x * x;
    let v = match d {
        1 if x < T::lit(1e-4) => T::one() - x2 / T::lit(6.0),
        1 => x.sin() / x,
        2 if x < T::lit(1e-4) => T::one() - x2 / T::lit(8.0),
        2 => T::lit(2.0) * bessel_j1(x) / x,
        3 if x < T::lit(0.1) => {
            T::one() - x2 / T::lit(10.0) + x2 * x2 / T::lit(280.0) - x2 * x2 * x2 / T::lit(15120.0)
                + x2 * x2 * x2 * x2 / T::lit(1_330_560.0)
        }
        3 => T::lit(3.0) * (x.sin() - x * x.cos()) / (x2 * x),
        _ => {
            return Err(Error::Domain(format!(
                "ball dimension must be 1, 2 or 3, got {d}"
            )))
        }
    };
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::legendre_p;

    struct Func<F>(F);

    impl<F: Fn(f64) -> f64 + Sync> AngularCorrelation<f64> for Func<F> {
        fn correlation(&self, theta: f64) -> Result<f64> {
            Ok((self.0)(theta))
        }
        fn angular_range(&self) -> (f64, f64) {
            (0.0, std::f64::consts::PI)
        }
    }

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn constant_correlation_projects_onto_monopole() {
        let s = legendre_coefficients(&Func(|_| 1.0), 2).unwrap();
        assert!((s.values()[0] - 4.0 * PI).abs() < 1e-12);
        assert!(s.values()[1].abs() < 1e-12);
        assert!(s.values()[2].abs() < 1e-12);
    }

    #[test]
    fn third_legendre_polynomial_projects_onto_l3() {
        let s = legendre_coefficients(&Func(|t: f64| legendre_p(3, t.cos())), 5).unwrap();
        for (l, &v) in s.values().iter().enumerate() {
            let expect = if l == 3 { 4.0 * PI / 7.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12, "l={l}: {v}");
        }
    }

    #[test]
    fn monopole_spectrum_synthesises_unit_correlation() {
        let mut c = vec![0.0; 10];
        c[0] = 4.0 * PI;
        let spec = PowerSpectrum::from_multipoles(c).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| PI * i as f64 / 49.0).collect();
        let corr = correlation_from_spectrum(&spec, &grid).unwrap();
        assert!(corr.values().iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn synthesis_rejects_bad_spectra() {
        let freq = PowerSpectrum::new(GridKind::Frequency, vec![0.5, 1.5], vec![1.0, 1.0]).unwrap();
        assert!(correlation_from_spectrum(&freq, &[0.1]).is_err());
        let gappy =
            PowerSpectrum::new(GridKind::Multipole, vec![0.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert!(correlation_from_spectrum(&gappy, &[0.1]).is_err());
    }

    #[test]
    fn tabulation_not_covering_sphere_is_rejected() {
        let tab =
            TabulatedCorrelation::new(vec![0.0, 0.5, 1.0], vec![1.0, 0.5, 0.0], None).unwrap();
        assert!(matches!(
            legendre_coefficients(&tab, 4),
            Err(Error::Extrapolation { .. })
        ));
    }

    #[test]
    fn non_finite_correlation_is_reported() {
        let bad = Func(|t: f64| if t > 1.0 { f64::NAN } else { 1.0 });
        assert!(matches!(
            legendre_coefficients(&bad, 4),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn zero_correlation_has_zero_small_angle_spectrum() {
        let s = small_angle_spectrum(&Func(|_| 0.0), &[0.0, 10.0, 100.0]).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
        assert_eq!(s.kind(), GridKind::Frequency);
    }

    #[test]
    fn box_transform_is_sinc() {
        let r: f64 = 0.7;
        let prof = Profile1D::box_profile(r).unwrap();
        let ks = [0.0, 1.0, PI / r, 13.3, 250.0];
        let ft = ft_1d(&prof, &ks);
        assert!((ft[0].re - 2.0 * r).abs() < 1e-13);
        for (k, v) in ks.iter().zip(&ft).skip(1) {
            let expect = 2.0 * (k * r).sin() / k;
            assert!((v.re - expect).abs() < 1e-12, "k={k}");
            assert!(v.im.abs() < 1e-12);
        }
        assert!(ft[2].norm() < 1e-12);
    }

    #[test]
    fn triangle_and_spline_transforms_match_closed_forms() {
        let r: f64 = 1.3;
        let tri = Profile1D::triangle(r).unwrap();
        let spl = Profile1D::quadratic_spline(r).unwrap();
        let h = 2.0 * r / 3.0;
        for k in [0.3f64, 7.0, 42.0, 180.0] {
            let t = ft_1d(&tri, &[k])[0].re;
            let expect_t = 4.0 * (k * r / 2.0).sin().powi(2) / (k * k * r);
            assert!((t - expect_t).abs() < 1e-13, "tri k={k}");
            let s = ft_1d(&spl, &[k])[0].re;
            let u = k * h / 2.0;
            let expect_s = h * (u.sin() / u).powi(3);
            assert!((s - expect_s).abs() < 1e-13, "spline k={k}");
        }
    }

    #[test]
    fn spherical_box_limits_and_zeros() {
        for d in 1..=3 {
            assert_eq!(spherical_box_ft::<f64>(d, 1.0, 0.0).unwrap(), 1.0);
        }
        assert!(spherical_box_ft::<f64>(1, 1.0, PI).unwrap().abs() < 1e-15);
        assert!(
            spherical_box_ft::<f64>(2, 1.0, 3.831_705_970_207_512)
                .unwrap()
                .abs()
                < 1e-14
        );
        assert!(matches!(
            spherical_box_ft::<f64>(4, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(spherical_box_ft::<f64>(1, 0.0, 1.0).is_err());
        assert!(spherical_box_ft::<f64>(1, 1.0, -1.0).is_err());
    }

    #[test]
    fn spherical_box_d3_series_joins_closed_form() {
        let below = spherical_box_ft::<f64>(3, 1.0, 0.1 - 1e-12).unwrap();
        let above = spherical_box_ft::<f64>(3, 1.0, 0.1).unwrap();
        assert!((below - above).abs() < 1e-12);
    }
}
