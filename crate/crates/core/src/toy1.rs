//! Toy model 1: the correlation function of a field of equal-radius disks,
//! evaluated in the flat-sky approximation from the same-disk (`I_s`) and
//! other-disk (`I_o`) ring integrals.
//!
//! Geometry: point `i` sits at distance `theta_i` from the centre of its disk;
//! point `j` lies on the ring of radius `theta` around `i`, at polar
//! coordinates `(theta_j, phi_j)` about the centre of the disk containing it
//! (the same disk, or one centred at `(theta_o, phi_o)`).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{
    gauss_kronrod_15, integrate_adaptive, split_points, AdaptiveOptions, GaussLegendre,
};
use crate::scalar::Real;
use crate::transforms::TabulatedCorrelation;

/// Radial shape of the temperature excess inside a disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialShape {
    /// `f = 1`.
    Uniform,
    /// `f = exp(-theta_r / R)`.
    Exponential,
}

/// Temperature profile `f(theta_r)` of a disk of radius `radius`, zero outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskProfile<T> {
    pub shape: RadialShape,
    pub radius: T,
}

impl<T: Real> DiskProfile<T> {
    pub fn new(shape: RadialShape, radius: T) -> Result<Self> {
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(Error::Domain(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Ok(Self { shape, radius })
    }

    pub fn eval(&self, r: T) -> T {
        if r < T::zero() || r > self.radius {
            return T::zero();
        }
        match self.shape {
            RadialShape::Uniform => T::one(),
            RadialShape::Exponential => (-r / self.radius).exp(),
        }
    }

    /// `int f dA` over the disk.
    pub fn area_integral(&self) -> T {
        let r2 = self.radius * self.radius;
        match self.shape {
            RadialShape::Uniform => T::PI() * r2,
            RadialShape::Exponential => {
                T::lit(2.0) * T::PI() * r2 * (T::one() - T::lit(2.0) * (-T::one()).exp())
            }
        }
    }
}

/// Two-point correlation `omega(theta)` of the disk centres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CenterCorrelation<T> {
    /// Uncorrelated (Poisson) centres: `omega = 0`.
    Poisson,
    /// No pairs closer than `min_separation`: `omega = -1` below it, `0` above.
    HardCore { min_separation: T },
    /// `omega = 2 exp(-theta/scale) - 1`.
    Exponential { scale: T },
    /// `omega = -1` everywhere: no other disk is ever present.
    Empty,
}

impl<T: Real> CenterCorrelation<T> {
    pub fn omega(&self, theta: T) -> T {
        match *self {
            Self::Poisson => T::zero(),
            Self::HardCore { min_separation } => {
                if theta < min_separation {
                    -T::one()
                } else {
                    T::zero()
                }
            }
            Self::Exponential { scale } => T::lit(2.0) * (-theta / scale).exp() - T::one(),
            Self::Empty => -T::one(),
        }
    }

    pub fn breakpoints(&self) -> Vec<T> {
        match *self {
            Self::HardCore { min_separation } => vec![min_separation],
            _ => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::HardCore { min_separation: s } | Self::Exponential { scale: s }
                if !(s > T::zero()) =>
            {
                Err(Error::Domain(format!(
                    "centre correlation scale must be positive, got {s}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// The four published configurations of toy model 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Toy1Case {
    /// Uniform disks, Poisson centres.
    A,
    /// Uniform disks, hard-core centres (no overlaps).
    B,
    /// Uniform disks, exponentially clustered centres.
    C,
    /// Exponential disks, exponentially clustered centres.
    D,
}

impl Toy1Case {
    pub const ALL: [Toy1Case; 4] = [Toy1Case::A, Toy1Case::B, Toy1Case::C, Toy1Case::D];

    pub fn profile<T: Real>(self, radius: T) -> Result<DiskProfile<T>> {
        let shape = match self {
            Toy1Case::D => RadialShape::Exponential,
            _ => RadialShape::Uniform,
        };
        DiskProfile::new(shape, radius)
    }

    pub fn center_correlation<T: Real>(self, radius: T) -> CenterCorrelation<T> {
        match self {
            Toy1Case::A => CenterCorrelation::Poisson,
            Toy1Case::B => CenterCorrelation::HardCore {
                min_separation: T::lit(2.0) * radius,
            },
            Toy1Case::C | Toy1Case::D => CenterCorrelation::Exponential { scale: radius },
        }
    }
}

impl fmt::Display for Toy1Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Toy1Case::A => "a",
            Toy1Case::B => "b",
            Toy1Case::C => "c",
            Toy1Case::D => "d",
        };
        f.write_str(s)
    }
}

impl FromStr for Toy1Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Toy1Case::A),
            "b" => Ok(Toy1Case::B),
            "c" => Ok(Toy1Case::C),
            "d" => Ok(Toy1Case::D),
            other => Err(Error::Invalid(format!(
                "unknown toy-1 case '{other}' (expected a, b, c or d)"
            ))),
        }
    }
}

/// Up to two radial positions `theta_j` on a disk at distance `theta` from
/// point `i`, sharing the Jacobian `|d theta_j / d theta| = theta / sqrt(Delta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Roots<T> {
    vals: [T; 2],
    len: usize,
    pub jacobian: T,
}

impl<T: Real> Roots<T> {
    fn empty() -> Self {
        Self {
            vals: [T::zero(); 2],
            len: 0,
            jacobian: T::zero(),
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.vals[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Roots of `theta_j^2 + 2 (c.e) theta_j + d^2 - theta^2 = 0` for
/// `c = x_o - x_i`, `d = |c|`, given `Delta = theta^2 - (c x e)^2` and
/// `d^2 - theta^2`. The smaller root is taken from the product of the roots to
/// avoid cancellation.
fn roots_from_delta<T: Real>(
    theta: T,
    c_dot_e: T,
    delta: T,
    d2_minus_theta2: T,
    radius: T,
) -> Roots<T> {
    let mut out = Roots::empty();
    if !(delta >= T::zero()) {
        return out;
    }
    let sq = delta.sqrt();
    let big = if c_dot_e > T::zero() {
        -c_dot_e - sq
    } else {
        -c_dot_e + sq
    };
    let small = if big != T::zero() {
        d2_minus_theta2 / big
    } else {
        T::zero()
    };
    for cand in [big, small] {
        if cand >= T::zero() && cand <= radius && (out.len == 0 || sq > T::zero()) {
            out.vals[out.len] = cand;
            out.len += 1;
        }
    }
    if out.len == 2 && out.vals[0] > out.vals[1] {
        out.vals.swap(0, 1);
    }
    out.jacobian = if sq > T::zero() {
        theta / sq
    } else {
        T::infinity()
    };
    out
}

/// `theta_j = -theta_o cos(phi_o - phi_j) + theta_i cos(phi_j) +- sqrt(Delta)`,
/// keeping real roots with `0 <= theta_j <= radius`. With `theta_o = 0` this is
/// the same-disk case.
pub fn theta_j_roots<T: Real>(
    theta: T,
    theta_i: T,
    phi_j: T,
    theta_o: T,
    phi_o: T,
    radius: T,
) -> Roots<T> {
    let cx = theta_o * phi_o.cos() - theta_i;
    let cy = theta_o * phi_o.sin();
    let (sin_j, cos_j) = phi_j.sin_cos();
    let cross = cx * sin_j - cy * cos_j;
    let d = cx.hypot(cy);
    roots_from_delta(
        theta,
        cx * cos_j + cy * sin_j,
        (theta - cross) * (theta + cross),
        (d - theta) * (d + theta),
        radius,
    )
}

/// Quadrature settings for the toy-model-1 integrals.
#[derive(Clone, Copy, Debug)]
pub struct Toy1Options<T> {
    /// Gauss–Legendre nodes per piece of the `theta_i` integral.
    pub theta_i_nodes: usize,
    /// Nodes per piece of the `theta_o` integral.
    pub theta_o_nodes: usize,
    /// Nodes per piece of the `phi_o` integral.
    pub phi_o_nodes: usize,
    /// Adaptive tolerance for the innermost `phi_j` integral.
    pub phi_j: AdaptiveOptions<T>,
}

impl<T: Real> Default for Toy1Options<T> {
    fn default() -> Self {
        Self {
            theta_i_nodes: 16,
            theta_o_nodes: 16,
            phi_o_nodes: 16,
            phi_j: AdaptiveOptions {
                rel_tol: T::lit(1e-6),
                abs_tol: T::lit(1e-300),
                max_intervals: 1000,
            },
        }
    }
}

/// `int_0^{2pi} dphi_j sum_roots theta_j f(theta_j) |d theta_j / d theta|` for a
/// disk whose centre is at distance `d` from point `i`.
///
/// With `u` the angle between `e(phi_j)` and the direction from `i` to the
/// centre, the integrand is even in `u`; it is split at the tangency angle
/// (`Delta = 0`, where the Jacobian has an inverse-square-root singularity) and
/// where a root crosses the rim, and each piece is integrated adaptively.
fn ring_integral<T: Real>(
    theta: T,
    d: T,
    profile: &DiskProfile<T>,
    opts: &AdaptiveOptions<T>,
) -> Result<T> {
    let radius = profile.radius;
    let pi = T::PI();
    let d2 = d * d;
    if d > theta + radius || (d < theta - radius) || theta <= T::zero() {
        return Ok(T::zero());
    }
    let tangent = d > theta;
    let lo = if tangent {
        pi - (theta / d).asin()
    } else {
        T::zero()
    };
    let mut cuts = Vec::with_capacity(2);
    if d > T::zero() {
        let q = (theta * theta - d2 - radius * radius) / (T::lit(2.0) * radius * d);
        if q.abs() <= T::one() {
            cuts.push(q.acos());
        }
    }
    if !tangent {
        // Delta is smallest (Jacobian largest) at u = pi/2
        cuts.push(pi / T::lit(2.0));
    }
    let edges = split_points(lo, pi, cuts);
    // Integrand at u = base + w. For the tangent case (base = lo, where
    // d sin(lo) = theta) the factor theta - d sin(u) is expanded about lo to
    // avoid cancellation close to the singular endpoint.
    let prod = (d - theta) * (d + theta);
    let cos_lo_abs = if tangent {
        (d2 - theta * theta).max(T::zero()).sqrt()
    } else {
        T::zero()
    };
    let integrand = |base: T, w: T| {
        let u = base + w;
        let (sin_u, cos_u) = u.sin_cos();
        let near = if tangent {
            let h = (w / T::lit(2.0)).sin();
            T::lit(2.0) * theta * h * h + cos_lo_abs * w.sin()
        } else {
            let h = (pi / T::lit(4.0) - u / T::lit(2.0)).sin();
            (theta - d) + T::lit(2.0) * d * h * h
        };
        let roots = roots_from_delta(theta, d * cos_u, near * (theta + d * sin_u), prod, radius);
        if roots.is_empty() || !roots.jacobian.is_finite() {
            return T::zero();
        }
        let s: T = roots
            .as_slice()
            .iter()
            .map(|&tj| tj * profile.eval(tj))
            .sum();
        s * roots.jacobian
    };
    // Pieces in the integration variable: v with u = lo + v^2 in the tangent
    // case (absorbing the inverse square root at the tangency angle, also for
    // pieces that only come close to it), u itself otherwise.
    let pieces: Vec<(T, T)> = edges
        .windows(2)
        .map(|w| {
            if tangent {
                ((w[0] - lo).sqrt(), (w[1] - lo).sqrt())
            } else {
                (w[0], w[1])
            }
        })
        .collect();
    let g = |x: T| {
        if tangent {
            T::lit(2.0) * x * integrand(lo, x * x)
        } else {
            integrand(T::zero(), x)
        }
    };
    // The tolerance applies to the whole ring, so slivers next to nearly
    // coincident breakpoints need not be resolved to full relative accuracy;
    // rings that barely graze the disk are resolved relative to the largest
    // possible value 2 pi theta f(0).
    let rough: T = pieces
        .iter()
        .map(|&(a, b)| gauss_kronrod_15(a, b, &mut |x| g(x)).0.abs())
        .sum();
    let full_ring = T::lit(2.0) * pi * theta * profile.eval(T::zero());
    let scale = rough.max(T::lit(1e-4) * full_ring);
    let piece_opts = AdaptiveOptions {
        abs_tol: opts
            .abs_tol
            .max(opts.rel_tol * scale / T::from_usize_lossy(pieces.len().max(1))),
        ..*opts
    };
    let mut total = T::zero();
    for &(a, b) in &pieces {
        total = total + integrate_adaptive(g, a, b, &piece_opts)?;
    }
    Ok(T::lit(2.0) * total)
}

/// Same-disk contribution `I_s(theta, theta_i)`.
pub fn integrate_is<T: Real>(theta: T, theta_i: T, profile: &DiskProfile<T>) -> Result<T> {
    integrate_is_with(theta, theta_i, profile, &Toy1Options::default())
}

pub fn integrate_is_with<T: Real>(
    theta: T,
    theta_i: T,
    profile: &DiskProfile<T>,
    opts: &Toy1Options<T>,
) -> Result<T> {
    check_point(theta, theta_i, profile)?;
    ring_integral(theta, theta_i, profile, &opts.phi_j)
}

fn check_point<T: Real>(theta: T, theta_i: T, profile: &DiskProfile<T>) -> Result<()> {
    if !(theta >= T::zero()) {
        return Err(Error::Domain(format!(
            "theta must be non-negative, got {theta}"
        )));
    }
    if !(theta_i >= T::zero() && theta_i <= profile.radius) {
        return Err(Error::Domain(format!(
            "theta_i = {theta_i} outside the disk [0, {}]",
            profile.radius
        )));
    }
    Ok(())
}

/// Other-disk contribution `I_o(theta, theta_i)`: the ring integral weighted by
/// the density of other centres `P(theta_o) = N_c/(4 pi) (1 + omega(theta_o))`
/// and integrated over their position `(theta_o, phi_o)`.
pub fn integrate_io<T: Real>(
    theta: T,
    theta_i: T,
    profile: &DiskProfile<T>,
    omega: &CenterCorrelation<T>,
    n_c: T,
) -> Result<T> {
    integrate_io_with(theta, theta_i, profile, omega, n_c, &Toy1Options::default())
}

pub fn integrate_io_with<T: Real>(
    theta: T,
    theta_i: T,
    profile: &DiskProfile<T>,
    omega: &CenterCorrelation<T>,
    n_c: T,
    opts: &Toy1Options<T>,
) -> Result<T> {
    check_point(theta, theta_i, profile)?;
    omega.validate()?;
    if !(n_c > T::zero()) {
        return Err(Error::Domain(format!("N_c must be positive, got {n_c}")));
    }
    if matches!(omega, CenterCorrelation::Empty) {
        return Ok(T::zero());
    }
    let radius = profile.radius;
    let density = n_c / (T::lit(4.0) * T::PI());
    // The ring around i meets a disk centred at distance d only for
    // d <= theta + R and d >= theta - R.
    let d_near = (theta - radius).abs();
    let d_far = theta + radius;
    // Distances where the (theta_o, phi_o) integrand has kinks: the ring touches
    // the rim, or passes through the centre of a peaked profile.
    let kinks = [d_near, d_far, theta];
    let lo = (theta - radius - theta_i).max(T::zero());
    let hi = theta + theta_i + radius;
    let mut cuts = omega.breakpoints();
    for dstar in kinks {
        cuts.push(theta_i + dstar);
        cuts.push(dstar - theta_i);
        cuts.push(theta_i - dstar);
    }
    cuts.push(theta_i);
    let edges = split_points(lo, hi, cuts);
    let rule_o = GaussLegendre::<T>::new(opts.theta_o_nodes);
    let rule_phi = GaussLegendre::<T>::new(opts.phi_o_nodes);
    let pi = T::PI();
    let mut total = T::zero();
    for w in edges.windows(2) {
        let mut err = None;
        let piece = rule_o.integrate_cos_mapped(w[0], w[1], |theta_o| {
            let weight = density * (T::one() + omega.omega(theta_o));
            if weight == T::zero() || err.is_some() {
                return T::zero();
            }
            // the (theta_o, phi_o) integrand is even in phi_o
            let mut phi_cuts = Vec::with_capacity(2);
            if theta_o > T::zero() && theta_i > T::zero() {
                for dstar in kinks {
                    let c = (theta_o * theta_o + theta_i * theta_i - dstar * dstar)
                        / (T::lit(2.0) * theta_o * theta_i);
                    if c.abs() < T::one() {
                        phi_cuts.push(c.acos());
                    }
                }
            }
            let phi_edges = split_points(T::zero(), pi, phi_cuts);
            let mut inner = T::zero();
            for pw in phi_edges.windows(2) {
                inner = inner
                    + rule_phi.integrate_cos_mapped(pw[0], pw[1], |phi_o| {
                        let d2 = theta_o * theta_o + theta_i * theta_i
                            - T::lit(2.0) * theta_o * theta_i * phi_o.cos();
                        match ring_integral(theta, d2.max(T::zero()).sqrt(), profile, &opts.phi_j) {
                            Ok(v) => v,
                            Err(e) => {
                                err.get_or_insert(e);
                                T::zero()
                            }
                        }
                    });
            }
            T::lit(2.0) * weight * theta_o * inner
        });
        if let Some(e) = err {
            return Err(e);
        }
        total = total + piece;
    }
    Ok(total)
}

/// Self- and other-disk parts of `C(theta)` on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Toy1Terms<T> {
    pub theta: Vec<T>,
    pub self_part: Vec<T>,
    pub other_part: Vec<T>,
}

impl<T: Real> Toy1Terms<T> {
    pub fn total(&self) -> Vec<T> {
        self.self_part
            .iter()
            .zip(&self.other_part)
            .map(|(&a, &b)| a + b)
            .collect()
    }
}

/// `C(theta) = N_c / (4 pi theta) int_0^R dtheta_i theta_i f(theta_i) [I_s + I_o]`
/// (the `phi_i` integral contributes `2 pi`, cancelling the `2 pi` of the
/// normalisation).
pub fn correlation_toy1<T: Real>(
    theta_grid: &[T],
    profile: &DiskProfile<T>,
    omega: &CenterCorrelation<T>,
    n_c: T,
) -> Result<TabulatedCorrelation<T>> {
    let terms = correlation_toy1_terms(theta_grid, profile, omega, n_c, &Toy1Options::default())?;
    TabulatedCorrelation::new(terms.theta.clone(), terms.total(), None)
}

pub fn correlation_toy1_terms<T: Real>(
    theta_grid: &[T],
    profile: &DiskProfile<T>,
    omega: &CenterCorrelation<T>,
    n_c: T,
    opts: &Toy1Options<T>,
) -> Result<Toy1Terms<T>> {
    omega.validate()?;
    if !(n_c > T::zero()) {
        return Err(Error::Domain(format!("N_c must be positive, got {n_c}")));
    }
    if let Some(&t) = theta_grid.iter().find(|&&t| !(t > T::zero())) {
        return Err(Error::Domain(format!(
            "toy-1 angles must be positive, got {t}"
        )));
    }
    let radius = profile.radius;
    let rule = GaussLegendre::<T>::new(opts.theta_i_nodes);
    let prefactor = n_c / (T::lit(4.0) * T::PI());
    let parts: Vec<(T, T)> = theta_grid
        .par_iter()
        .map(|&theta| {
            let cuts = [theta, radius - theta, theta - radius];
            let edges = split_points(T::zero(), radius, cuts);
            let mut s_acc = T::zero();
            let mut o_acc = T::zero();
            for w in edges.windows(2) {
                for (s, ws) in rule.mapped(T::zero(), T::PI()) {
                    let half = (w[1] - w[0]) / T::lit(2.0);
                    let theta_i = (w[0] + w[1]) / T::lit(2.0) - half * s.cos();
                    let weight = ws * half * s.sin() * theta_i * profile.eval(theta_i);
                    if weight == T::zero() {
                        continue;
                    }
                    s_acc = s_acc + weight * ring_integral(theta, theta_i, profile, &opts.phi_j)?;
                    o_acc = o_acc
                        + weight * integrate_io_with(theta, theta_i, profile, omega, n_c, opts)?;
                }
            }
            Ok((prefactor * s_acc / theta, prefactor * o_acc / theta))
        })
        .collect::<Result<_>>()?;
    Ok(Toy1Terms {
        theta: theta_grid.to_vec(),
        self_part: parts.iter().map(|p| p.0).collect(),
        other_part: parts.iter().map(|p| p.1).collect(),
    })
}

/// Large-separation limit `(N_c/4pi)^2 (int f dA)^2` for uncorrelated centres.
pub fn uncorrelated_baseline<T: Real>(profile: &DiskProfile<T>, n_c: T) -> T {
    let nbar = n_c / (T::lit(4.0) * T::PI());
    let a = profile.area_integral();
    nbar * nbar * a * a
}
