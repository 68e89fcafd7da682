//! Seeded Monte Carlo disk fields on a flat square patch and their pair-count
//! correlation estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{deg, Real};
use crate::transforms::TabulatedCorrelation;

/// Random sequential addition of equal disks jams at a covered fraction of
/// about 0.547; hard-core requests above it cannot be met by dart throwing.
pub const RSA_JAMMING_COVERAGE: f64 = 0.547;

/// Feasibility bound `N_c pi (2R)^2 < PACKING_LIMIT L^2` for hard-core centres.
pub const PACKING_LIMIT: f64 = 4.0 * RSA_JAMMING_COVERAGE;

/// Dart-throwing attempts allowed per requested centre.
pub const ATTEMPTS_PER_CENTER: u64 = 1_000_000;

/// Disk radius: fixed, or drawn independently per disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadiusSpec<T> {
    Fixed(T),
    Uniform { min: T, max: T },
}

impl<T: Real> RadiusSpec<T> {
    pub fn max(&self) -> T {
        match *self {
            Self::Fixed(r) => r,
            Self::Uniform { max, .. } => max,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> T {
        match *self {
            Self::Fixed(r) => r,
            Self::Uniform { min, max } => min + (max - min) * T::lit(rng.gen::<f64>()),
        }
    }
}

/// Edges of the angular separation bins (radians).
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaBins<T> {
    edges: Vec<T>,
}

impl<T: Real> ThetaBins<T> {
    pub fn new(edges: Vec<T>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::Invalid("need at least one bin".into()));
        }
        if !(edges[0] >= T::zero()) || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid(
                "bin edges must be non-negative and increasing".into(),
            ));
        }
        Ok(Self { edges })
    }

    /// `n` equal bins over `(0, max]`.
    pub fn linear(n: usize, max: T) -> Result<Self> {
        if n == 0 || !(max > T::zero()) {
            return Err(Error::Invalid(format!("cannot build {n} bins up to {max}")));
        }
        let step = max / T::from_usize_lossy(n);
        Self::new((0..=n).map(|i| step * T::from_usize_lossy(i)).collect())
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn centers(&self) -> Vec<T> {
        self.edges
            .windows(2)
            .map(|w| (w[0] + w[1]) / T::lit(2.0))
            .collect()
    }

    pub fn max(&self) -> T {
        self.edges[self.edges.len() - 1]
    }
}

/// Parameters of a disk-field ensemble. Angles in radians.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskEnsembleConfig<T> {
    pub n_c: usize,
    pub radius: RadiusSpec<T>,
    pub n_p: usize,
    pub patch: T,
    pub hard_core: bool,
    pub n_realizations: usize,
    pub seed: u64,
    pub bins: ThetaBins<T>,
}

impl<T: Real> Default for DiskEnsembleConfig<T> {
    /// `R = 1 deg`, 80 disks of 100 points on a 1 rad patch, Poisson centres,
    /// 50 realizations, 64 bins over `(0, 4R]`.
    fn default() -> Self {
        let r: T = deg(1.0);
        Self {
            n_c: 80,
            radius: RadiusSpec::Fixed(r),
            n_p: 100,
            patch: T::one(),
            hard_core: false,
            n_realizations: 50,
            seed: 1,
            bins: ThetaBins::linear(64, T::lit(4.0) * r).expect("valid default bins"),
        }
    }
}

impl<T: Real> DiskEnsembleConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_c == 0 || self.n_p == 0 || self.n_realizations == 0 {
            return Err(Error::Invalid(
                "N_c, N_p and the number of realizations must be at least 1".into(),
            ));
        }
        if !(self.patch > T::zero() && self.patch.is_finite()) {
            return Err(Error::Invalid(format!(
                "patch side must be positive, got {}",
                self.patch
            )));
        }
        match self.radius {
            RadiusSpec::Fixed(r) if !(r > T::zero()) => {
                return Err(Error::Invalid(format!(
                    "disk radius must be positive, got {r}"
                )));
            }
            RadiusSpec::Uniform { min, max } if !(min > T::zero() && min < max) => {
                return Err(Error::Invalid(format!(
                    "need 0 < R_min < R_max, got {min}, {max}"
                )));
            }
            _ => {}
        }
        if self.bins.max() >= self.patch / T::lit(2.0) {
            return Err(Error::Invalid(
                "separation bins must stay below half the patch side".into(),
            ));
        }
        if self.hard_core {
            let r = self.radius.max();
            let need = T::from_usize_lossy(self.n_c) * T::PI() * (T::lit(2.0) * r).powi(2);
            let limit = T::lit(PACKING_LIMIT) * self.patch * self.patch;
            if !(need < limit) {
                return Err(Error::PackingInfeasible {
                    placed: 0,
                    requested: self.n_c,
                    attempts: 0,
                });
            }
        }
        Ok(())
    }

    /// Centre count per `4 pi` steradian at the same surface density, for
    /// comparison with the full-sky analytic model.
    pub fn full_sky_equivalent_n_c(&self) -> T {
        T::lit(4.0) * T::PI() * T::from_usize_lossy(self.n_c) / (self.patch * self.patch)
    }

    /// Random stream of realization `index`.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ index as u64)
    }
}

/// A placed disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk<T> {
    pub center: [T; 2],
    pub radius: T,
}

/// Uniform grid of square cells over `[0, side)^2` holding point indices.
struct CellGrid {
    n: usize,
    cells: Vec<Vec<u32>>,
}

impl CellGrid {
    fn new<T: Real>(side: T, min_cell: T) -> Self {
        let n = (side / min_cell)
            .floor()
            .to_usize()
            .unwrap_or(1)
            .clamp(1, 4096);
        Self {
            n,
            cells: vec![Vec::new(); n * n],
        }
    }

    fn coords<T: Real>(&self, p: [T; 2], side: T) -> (usize, usize) {
        let scale = T::from_usize_lossy(self.n) / side;
        let c = |x: T| (x * scale).floor().to_usize().unwrap_or(0).min(self.n - 1);
        (c(p[0]), c(p[1]))
    }

    fn insert<T: Real>(&mut self, p: [T; 2], side: T, id: u32) {
        let (i, j) = self.coords(p, side);
        self.cells[j * self.n + i].push(id);
    }

    /// Ids in the 3x3 block of cells around `p`.
    fn neighbours<T: Real>(&self, p: [T; 2], side: T) -> impl Iterator<Item = u32> + '_ {
        let (i, j) = self.coords(p, side);
        let n = self.n as isize;
        (-1isize..=1)
            .flat_map(move |dj| (-1isize..=1).map(move |di| (i as isize + di, j as isize + dj)))
            .filter(move |&(a, b)| a >= 0 && b >= 0 && a < n && b < n)
            .flat_map(move |(a, b)| self.cells[b as usize * self.n + a as usize].iter().copied())
    }
}

fn dist2<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Disk centres uniform in `[0, L)^2`. With `hard_core`, darts closer than
/// the sum of the two radii to an accepted centre are rejected.
pub fn sample_centers<T: Real, R: Rng>(
    config: &DiskEnsembleConfig<T>,
    rng: &mut R,
) -> Result<Vec<Disk<T>>> {
    config.validate()?;
    let side = config.patch;
    let draw = |rng: &mut R| {
        let x = T::lit(rng.gen::<f64>()) * side;
        let y = T::lit(rng.gen::<f64>()) * side;
        // guard against rounding up to the open edge in single precision
        [
            x.min(side * T::lit(1.0 - 1e-7)),
            y.min(side * T::lit(1.0 - 1e-7)),
        ]
    };
    if !config.hard_core {
        return Ok((0..config.n_c)
            .map(|_| {
                let center = draw(rng);
                Disk {
                    center,
                    radius: config.radius.sample(rng),
                }
            })
            .collect());
    }
    let max_attempts = ATTEMPTS_PER_CENTER.saturating_mul(config.n_c as u64);
    let mut grid = CellGrid::new(side, T::lit(2.0) * config.radius.max());
    let mut disks: Vec<Disk<T>> = Vec::with_capacity(config.n_c);
    let mut attempts = 0u64;
    let mut radius = config.radius.sample(rng);
    while disks.len() < config.n_c {
        if attempts >= max_attempts {
            return Err(Error::PackingInfeasible {
                placed: disks.len(),
                requested: config.n_c,
                attempts,
            });
        }
        attempts += 1;
        let c = draw(rng);
        let clash = grid.neighbours(c, side).any(|id| {
            let other = &disks[id as usize];
            let min = radius + other.radius;
            dist2(c, other.center) <= min * min
        });
        if !clash {
            grid.insert(c, side, disks.len() as u32);
            disks.push(Disk { center: c, radius });
            radius = config.radius.sample(rng);
        }
    }
    Ok(disks)
}

/// `n_p` points uniform in each disk (radius `R sqrt(u)`), disk by disk.
pub fn sample_disk_points<T: Real, R: Rng>(
    disks: &[Disk<T>],
    n_p: usize,
    rng: &mut R,
) -> Vec<[T; 2]> {
    let mut out = Vec::with_capacity(disks.len() * n_p);
    for d in disks {
        for _ in 0..n_p {
            let r = d.radius * T::lit(rng.gen::<f64>()).sqrt();
            let phi = T::lit(2.0) * T::PI() * T::lit(rng.gen::<f64>());
            let (s, c) = phi.sin_cos();
            out.push([d.center[0] + r * c, d.center[1] + r * s]);
        }
    }
    out
}

/// Fraction of uniform random pairs in a square of side `side` separated by
/// less than `r` (valid for `r <= side`).
pub fn square_pair_cdf<T: Real>(r: T, side: T) -> T {
    let x = (r / side).min(T::one()).max(T::zero());
    let x2 = x * x;
    T::PI() * x2 - T::lit(8.0 / 3.0) * x2 * x + x2 * x2 / T::lit(2.0)
}

/// Binned pair counts and the estimator `DD/RR - 1` with `RR` the analytic
/// expectation for uniform points in the square.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCountEstimate<T> {
    pub bins: ThetaBins<T>,
    pub dd: Vec<u64>,
    pub rr: Vec<T>,
    /// `None` where no pair fell in the bin.
    pub xi: Vec<Option<T>>,
    /// Poisson uncertainty `sqrt(DD)/RR`.
    pub sigma: Vec<Option<T>>,
}

impl<T: Real> PairCountEstimate<T> {
    /// Bins with an estimate, as a table on the bin centres.
    pub fn to_tabulated(&self) -> Result<TabulatedCorrelation<T>> {
        let mut theta = Vec::new();
        let mut values = Vec::new();
        let mut sigma = Vec::new();
        for ((c, x), s) in self
            .bins
            .centers()
            .into_iter()
            .zip(&self.xi)
            .zip(&self.sigma)
        {
            if let (Some(x), Some(s)) = (x, s) {
                theta.push(c);
                values.push(*x);
                sigma.push(*s);
            }
        }
        TabulatedCorrelation::new(theta, values, Some(sigma))
    }
}

/// Pair-count correlation estimate of points in `[0, L)^2`; pairs are found
/// exactly with a cell list.
pub fn estimate_correlation<T: Real>(
    points: &[[T; 2]],
    bins: &ThetaBins<T>,
    patch: T,
) -> Result<PairCountEstimate<T>> {
    if points.len() < 2 {
        return Err(Error::Invalid("need at least two points".into()));
    }
    if bins.max() >= patch / T::lit(2.0) {
        return Err(Error::Invalid(
            "separation bins must stay below half the patch side".into(),
        ));
    }
    let edges2: Vec<T> = bins.edges().iter().map(|&e| e * e).collect();
    let (lo2, hi2) = (edges2[0], edges2[edges2.len() - 1]);
    let mut grid = CellGrid::new(patch, bins.max());
    for (i, &p) in points.iter().enumerate() {
        grid.insert(p, patch, i as u32);
    }
    let mut dd = vec![0u64; bins.len()];
    for (i, &p) in points.iter().enumerate() {
        for j in grid.neighbours(p, patch) {
            if (j as usize) <= i {
                continue;
            }
            let r2 = dist2(p, points[j as usize]);
            if r2 > lo2 && r2 <= hi2 {
                let k = edges2.partition_point(|&e| e < r2) - 1;
                dd[k] += 1;
            }
        }
    }
    let n = T::from_usize_lossy(points.len());
    let pairs = n * (n - T::one()) / T::lit(2.0);
    let rr: Vec<T> = bins
        .edges()
        .windows(2)
        .map(|w| pairs * (square_pair_cdf(w[1], patch) - square_pair_cdf(w[0], patch)))
        .collect();
    let xi = dd
        .iter()
        .zip(&rr)
        .map(|(&d, &r)| (d > 0).then(|| T::from_u64(d).unwrap() / r - T::one()))
        .collect();
    let sigma = dd
        .iter()
        .zip(&rr)
        .map(|(&d, &r)| (d > 0).then(|| T::from_u64(d).unwrap().sqrt() / r))
        .collect();
    Ok(PairCountEstimate {
        bins: bins.clone(),
        dd,
        rr,
        xi,
        sigma,
    })
}

/// One disk field: centres, points (those outside the patch discarded), and
/// its correlation estimate.
pub fn run_realization<T: Real>(
    config: &DiskEnsembleConfig<T>,
    index: usize,
) -> Result<PairCountEstimate<T>> {
    let mut rng = config.rng(index);
    let disks = sample_centers(config, &mut rng)?;
    let side = config.patch;
    let points: Vec<[T; 2]> = sample_disk_points(&disks, config.n_p, &mut rng)
        .into_iter()
        .filter(|p| p.iter().all(|&x| x >= T::zero() && x < side))
        .collect();
    estimate_correlation(&points, &config.bins, side)
}

/// Ensemble summary of per-realization estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationStats<T> {
    pub bins: ThetaBins<T>,
    /// `per_realization[r][b]`: estimate of realization `r` in bin `b`.
    pub per_realization: Vec<Vec<Option<T>>>,
    pub mean: Vec<Option<T>>,
    /// Sample standard deviation across realizations (`None` with fewer than two).
    pub rms: Vec<Option<T>>,
    /// Pair counts summed over realizations.
    pub n_pairs: Vec<u64>,
}

impl<T: Real> RealizationStats<T> {
    /// Combines estimates in the given order; the result does not depend on
    /// how the estimates were produced.
    pub fn from_estimates(estimates: Vec<PairCountEstimate<T>>) -> Result<Self> {
        let first = estimates
            .first()
            .ok_or_else(|| Error::Invalid("no realizations".into()))?;
        let bins = first.bins.clone();
        let nb = bins.len();
        let mut n_pairs = vec![0u64; nb];
        for e in &estimates {
            for (t, &d) in n_pairs.iter_mut().zip(&e.dd) {
                *t += d;
            }
        }
        let per_realization: Vec<Vec<Option<T>>> = estimates.into_iter().map(|e| e.xi).collect();
        let mut mean = Vec::with_capacity(nb);
        let mut rms = Vec::with_capacity(nb);
        for b in 0..nb {
            let vals: Vec<T> = per_realization.iter().filter_map(|r| r[b]).collect();
            let n = vals.len();
            if n == 0 {
                mean.push(None);
                rms.push(None);
                continue;
            }
            let m = vals.iter().copied().sum::<T>() / T::from_usize_lossy(n);
            mean.push(Some(m));
            rms.push((n >= 2).then(|| {
                let ss: T = vals.iter().map(|&v| (v - m) * (v - m)).sum();
                (ss / T::from_usize_lossy(n - 1)).sqrt()
            }));
        }
        Ok(Self {
            bins,
            per_realization,
            mean,
            rms,
            n_pairs,
        })
    }

    pub fn n_realizations(&self) -> usize {
        self.per_realization.len()
    }

    /// Standard error of the mean, `rms / sqrt(n)` with `n` the realizations
    /// contributing to the bin.
    pub fn sem(&self) -> Vec<Option<T>> {
        (0..self.bins.len())
            .map(|b| {
                let n = self
                    .per_realization
                    .iter()
                    .filter(|r| r[b].is_some())
                    .count();
                self.rms[b].map(|s| s / T::from_usize_lossy(n).sqrt())
            })
            .collect()
    }
}

/// Runs realizations `0..n_realizations` (in parallel) and summarises them.
pub fn run_ensemble<T: Real>(config: &DiskEnsembleConfig<T>) -> Result<RealizationStats<T>> {
    config.validate()?;
    let estimates: Vec<PairCountEstimate<T>> = (0..config.n_realizations)
        .into_par_iter()
        .map(|i| run_realization(config, i))
        .collect::<Result<_>>()?;
    RealizationStats::from_estimates(estimates)
}

/// The factor `s` with `s * model[k] = target[k]` at the first bin `k` where
/// both are available and nonzero.
pub fn match_normalization<T: Real>(model: &[T], target: &[Option<T>]) -> Option<T> {
    model.iter().zip(target).find_map(|(&m, t)| match t {
        Some(t) if m != T::zero() => Some(*t / m),
        _ => None,
    })
}
