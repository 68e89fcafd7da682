//! Detection of quasi-periodic peak sequences in spectra.
//!
//! Peaks are local maxima of a moving-average-smoothed spectrum whose
//! prominence, measured on an `asinh`-compressed amplitude scale, exceeds a
//! fraction of the compressed dynamic range. The compression keeps peaks that
//! sit many decades below the spectrum maximum detectable while staying linear
//! (and sign-aware) near zero.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::transforms::PowerSpectrum;

/// Minimum number of grid points accepted by [`find_peaks`].
pub const MIN_SPECTRUM_LEN: usize = 16;

/// Tunable parameters of the detector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakOptions<T> {
    /// Moving-average window in samples (1 disables smoothing).
    pub smoothing_window: usize,
    /// Prominence threshold as a fraction of the compressed dynamic range.
    pub prominence_frac: T,
    /// Linear-to-logarithmic transition of the compression, relative to `max|s|`.
    pub compression_floor: T,
    /// Minimum regularity `1 - std/mean` of the spacings for a positive verdict.
    pub regularity_threshold: T,
    /// Minimum number of peaks for a positive verdict.
    pub min_peaks: usize,
    /// Envelope fit window; `None` selects `k >= fit_start_factor * k_first`.
    pub fit_range: Option<(T, T)>,
    pub fit_start_factor: T,
}

impl<T: Real> Default for PeakOptions<T> {
    fn default() -> Self {
        Self {
            smoothing_window: 5,
            prominence_frac: T::lit(0.01),
            compression_floor: T::lit(1e-9),
            regularity_threshold: T::lit(0.5),
            min_peaks: 3,
            fit_range: None,
            fit_start_factor: T::lit(3.0),
        }
    }
}

/// A detected spectral peak.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak<T> {
    pub location: T,
    pub height: T,
    /// Prominence on the compressed scale.
    pub prominence: T,
}

/// Mean and standard deviation of consecutive peak spacings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiPeriod<T> {
    pub mean: T,
    pub dispersion: T,
}

impl<T: Real> QuasiPeriod<T> {
    /// `1 - dispersion/mean`, floored at zero.
    pub fn regularity(&self) -> T {
        if self.mean <= T::zero() {
            return T::zero();
        }
        (T::one() - self.dispersion / self.mean).max(T::zero())
    }
}

/// Least-squares slope of `ln(height)` against `ln(k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeFit<T> {
    pub slope: T,
    pub stderr: T,
    pub n_peaks: usize,
}

/// Oscillation verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Oscillation<T> {
    pub detected: bool,
    pub score: T,
    pub regularity: T,
}

/// Full analysis of one spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakReport<T> {
    pub peaks: Vec<Peak<T>>,
    pub quasi_period: Option<QuasiPeriod<T>>,
    pub envelope: Option<EnvelopeFit<T>>,
    pub oscillation: Oscillation<T>,
}

fn smooth<T: Real>(v: &[T], window: usize) -> Vec<T> {
    if window <= 1 {
        return v.to_vec();
    }
    let h = window / 2;
    (0..v.len())
        .map(|i| {
            let a = i.saturating_sub(h);
            let b = (i + h + 1).min(v.len());
            v[a..b].iter().copied().sum::<T>() / T::from_usize_lossy(b - a)
        })
        .collect()
}

fn prominence<T: Real>(y: &[T], i: usize) -> T {
    let mut left = y[i];
    let mut j = i;
    while j > 0 && y[j - 1] <= y[i] {
        j -= 1;
        left = left.min(y[j]);
    }
    let mut right = y[i];
    let mut j = i;
    while j + 1 < y.len() && y[j + 1] <= y[i] {
        j += 1;
        right = right.min(y[j]);
    }
    y[i] - left.max(right)
}

/// Location and height of the raw maximum near `i`, refined by a parabola.
fn refine<T: Real>(grid: &[T], v: &[T], i: usize, half: usize) -> (T, T) {
    let a = i.saturating_sub(half).max(1);
    let b = (i + half).min(v.len() - 2);
    let m = (a..=b).fold(i.clamp(a, b), |m, j| if v[j] > v[m] { j } else { m });
    let (x0, x1, x2) = (grid[m - 1], grid[m], grid[m + 1]);
    let (y0, y1, y2) = (v[m - 1], v[m], v[m + 1]);
    if y1 < y0 || y1 < y2 {
        return (x1, y1);
    }
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if curv >= T::zero() {
        return (x1, y1);
    }
    // Vertex of the parabola through the three samples (Newton form).
    let slope_at_x1 = d01 + curv * (x1 - x0);
    let dx = -slope_at_x1 / (T::lit(2.0) * curv);
    let dx = dx.max(x0 - x1).min(x2 - x1);
    let x = x1 + dx;
    let y = y1 + slope_at_x1 * dx + curv * dx * dx;
    (x, y.max(y1))
}

/// Prominence-qualified local maxima of the smoothed spectrum, in increasing
/// location. Endpoints are never reported and every height is positive.
pub fn find_peaks<T: Real>(spec: &PowerSpectrum<T>, opts: &PeakOptions<T>) -> Result<Vec<Peak<T>>> {
    let n = spec.len();
    if n < MIN_SPECTRUM_LEN {
        return Err(Error::Invalid(format!(
            "spectrum has {n} points, peak detection needs at least {MIN_SPECTRUM_LEN}"
        )));
    }
    let grid = spec.grid();
    let raw = spec.values();
    let s = smooth(raw, opts.smoothing_window);
    let max = s.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if max == T::zero() {
        return Ok(Vec::new());
    }
    let scale = opts.compression_floor * max;
    let y: Vec<T> = s.iter().map(|&v| (v / scale).asinh()).collect();
    let (lo, hi) = y
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let threshold = opts.prominence_frac * (hi - lo);
    let mut peaks: Vec<Peak<T>> = Vec::new();
    for i in 1..n - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) || s[i] <= T::zero() {
            continue;
        }
        let p = prominence(&y, i);
        if p < threshold {
            continue;
        }
        let (location, height) = refine(grid, raw, i, opts.smoothing_window / 2);
        if height <= T::zero() {
            continue;
        }
        if peaks.last().is_some_and(|q| location <= q.location) {
            continue;
        }
        peaks.push(Peak {
            location,
            height,
            prominence: p,
        });
    }
    Ok(peaks)
}

/// Mean and standard deviation of consecutive spacings (at least 3 peaks).
pub fn quasi_period<T: Real>(peaks: &[Peak<T>]) -> Result<QuasiPeriod<T>> {
    if peaks.len() < 3 {
        return Err(Error::InsufficientPeaks {
            needed: 3,
            found: peaks.len(),
        });
    }
    let gaps: Vec<T> = peaks
        .windows(2)
        .map(|w| w[1].location - w[0].location)
        .collect();
    let n = T::from_usize_lossy(gaps.len());
    let mean = gaps.iter().copied().sum::<T>() / n;
    let var = gaps.iter().map(|&g| (g - mean) * (g - mean)).sum::<T>() / n;
    Ok(QuasiPeriod {
        mean,
        dispersion: var.sqrt(),
    })
}

/// Log-log envelope slope of the peaks inside the fit window (at least 4).
pub fn envelope_fit<T: Real>(peaks: &[Peak<T>], opts: &PeakOptions<T>) -> Result<EnvelopeFit<T>> {
    let (lo, hi) = match (opts.fit_range, peaks.first()) {
        (Some(r), _) => r,
        (None, Some(p)) => (opts.fit_start_factor * p.location, T::infinity()),
        (None, None) => (T::zero(), T::zero()),
    };
    let pts: Vec<(T, T)> = peaks
        .iter()
        .filter(|p| p.location >= lo && p.location <= hi && p.location > T::zero())
        .map(|p| (p.location.ln(), p.height.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientPeaks {
            needed: 4,
            found: pts.len(),
        });
    }
    let n = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let slope = sxy / sxx;
    let resid = pts
        .iter()
        .map(|p| {
            let r = p.1 - my - slope * (p.0 - mx);
            r * r
        })
        .sum::<T>();
    let stderr = (resid / (n - T::lit(2.0)) / sxx).sqrt();
    Ok(EnvelopeFit {
        slope,
        stderr,
        n_peaks: pts.len(),
    })
}

/// Envelope exponent of a magnitude spectrum such as `|f̃(k)|` or `P(k)`.
pub fn envelope_decay_exponent<T: Real>(
    spec: &PowerSpectrum<T>,
    opts: &PeakOptions<T>,
) -> Result<EnvelopeFit<T>> {
    envelope_fit(&find_peaks(spec, opts)?, opts)
}

/// Verdict from a peak list: score = count × regularity.
pub fn oscillation_from_peaks<T: Real>(peaks: &[Peak<T>], opts: &PeakOptions<T>) -> Oscillation<T> {
    let regularity = quasi_period(peaks)
        .map(|q| q.regularity())
        .unwrap_or(T::zero());
    Oscillation {
        detected: peaks.len() >= opts.min_peaks.max(3) && regularity >= opts.regularity_threshold,
        score: T::from_usize_lossy(peaks.len()) * regularity,
        regularity,
    }
}

/// Oscillation verdict of a spectrum. Spectra too short to analyze are not
/// oscillating.
pub fn oscillation_score<T: Real>(
    spec: &PowerSpectrum<T>,
    opts: &PeakOptions<T>,
) -> Oscillation<T> {
    match find_peaks(spec, opts) {
        Ok(peaks) => oscillation_from_peaks(&peaks, opts),
        Err(_) => Oscillation {
            detected: false,
            score: T::zero(),
            regularity: T::zero(),
        },
    }
}

/// Peaks, quasi-period, envelope and verdict in one pass. Statistics that
/// need more peaks than were found are `None`.
pub fn analyze<T: Real>(spec: &PowerSpectrum<T>, opts: &PeakOptions<T>) -> Result<PeakReport<T>> {
    let peaks = find_peaks(spec, opts)?;
    Ok(PeakReport {
        quasi_period: quasi_period(&peaks).ok(),
        envelope: envelope_fit(&peaks, opts).ok(),
        oscillation: oscillation_from_peaks(&peaks, opts),
        peaks,
    })
}
