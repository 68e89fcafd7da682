use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Location and order of the single derivative discontinuity that controls the
/// asymptotic decay of a profile's Fourier transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Discontinuity<T> {
    /// `n` such that the `n`-th derivative jumps (0 = the function itself).
    pub order: u32,
    pub location: T,
}

/// A one-dimensional profile `f(x)`, zero outside `support`, analytic except at
/// the listed breakpoints.
#[derive(Clone)]
pub struct Profile1D<T> {
    f: Arc<dyn Fn(T) -> T + Send + Sync>,
    support: (T, T),
    breakpoints: Vec<T>,
    discontinuity: Option<Discontinuity<T>>,
}

impl<T> fmt::Debug for Profile1D<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile1D")
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .field("discontinuity", &self.discontinuity)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Profile1D<T> {
    pub fn new(f: impl Fn(T) -> T + Send + Sync + 'static, support: (T, T)) -> Result<Self> {
        if !(support.0 < support.1) || !support.0.is_finite() || !support.1.is_finite() {
            return Err(Error::Invalid(
                "profile support must be a finite interval".into(),
            ));
        }
        Ok(Self {
            f: Arc::new(f),
            support,
            breakpoints: Vec::new(),
            discontinuity: None,
        })
    }

    /// Points inside the support where the profile is not analytic; quadrature
    /// panels never straddle them.
    pub fn with_breakpoints(mut self, pts: impl IntoIterator<Item = T>) -> Self {
        self.breakpoints = pts.into_iter().collect();
        self
    }

    pub fn with_discontinuity(mut self, order: u32, location: T) -> Self {
        self.discontinuity = Some(Discontinuity { order, location });
        self
    }

    /// Unit box on `[-half_width, half_width]`: the function itself jumps.
    pub fn box_profile(half_width: T) -> Result<Self> {
        check_width(half_width)?;
        Ok(Self::new(|_| T::one(), (-half_width, half_width))?.with_discontinuity(0, half_width))
    }

    /// Tent `1 - |x|/R`: continuous, first derivative jumps at `0` and `±R`.
    pub fn triangle(half_width: T) -> Result<Self> {
        check_width(half_width)?;
        Ok(Self::new(
            move |x: T| T::one() - x.abs() / half_width,
            (-half_width, half_width),
        )?
        .with_breakpoints([T::zero()])
        .with_discontinuity(1, half_width))
    }

    /// Centred quadratic B-spline with outer knots at `±R` (inner knots at
    /// `±R/3`): C¹, second derivative jumps at every knot.
    pub fn quadratic_spline(half_width: T) -> Result<Self> {
        check_width(half_width)?;
        let h = half_width * T::lit(2.0) / T::lit(3.0);
        let f = move |x: T| {
            let t = (x / h).abs();
            if t <= T::lit(0.5) {
                T::lit(0.75) - t * t
            } else if t <= T::lit(1.5) {
                let u = t - T::lit(1.5);
                u * u / T::lit(2.0)
            } else {
                T::zero()
            }
        };
        Ok(Self::new(f, (-half_width, half_width))?
            .with_breakpoints([-h / T::lit(2.0), h / T::lit(2.0)])
            .with_discontinuity(2, half_width))
    }

    pub fn eval(&self, x: T) -> T {
        if x < self.support.0 || x > self.support.1 {
            T::zero()
        } else {
            (self.f)(x)
        }
    }

    pub fn support(&self) -> (T, T) {
        self.support
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn discontinuity(&self) -> Option<Discontinuity<T>> {
        self.discontinuity
    }
}

fn check_width<T: Real>(w: T) -> Result<()> {
    if w > T::zero() && w.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "profile half-width must be positive, got {w}"
        )))
    }
}
