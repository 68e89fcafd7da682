use crate::error::{Error, Result};
use crate::scalar::Real;

use super::AngularCorrelation;

/// Default number of nodes in the local Lagrange interpolation stencil (quintic).
pub const DEFAULT_STENCIL: usize = 6;

/// A correlation function sampled on a strictly increasing angle grid in
/// `[0, pi]` (radians), with optional per-node r.m.s. uncertainty.
///
/// Between nodes the function is evaluated by local Lagrange interpolation on
/// the `stencil` nearest nodes; outside the grid evaluation is an error.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedCorrelation<T> {
    theta: Vec<T>,
    values: Vec<T>,
    sigma: Option<Vec<T>>,
    stencil: usize,
}

impl<T: Real> TabulatedCorrelation<T> {
    pub fn new(theta: Vec<T>, values: Vec<T>, sigma: Option<Vec<T>>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::Invalid("empty correlation table".into()));
        }
        if theta.len() != values.len() {
            return Err(Error::Invalid(format!(
                "theta has {} nodes but values has {}",
                theta.len(),
                values.len()
            )));
        }
        if theta[0] < T::zero() || theta[theta.len() - 1] > T::PI() * T::lit(1.0 + 1e-15) {
            return Err(Error::Invalid("theta grid must lie within [0, pi]".into()));
        }
        if theta.iter().any(|t| !t.is_finite()) || theta.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(
                "theta grid must be strictly increasing".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "tabulated correlation",
                at: theta[i].to_f64_lossy(),
            });
        }
        if let Some(s) = &sigma {
            if s.len() != theta.len() {
                return Err(Error::Invalid("sigma length differs from theta".into()));
            }
            if s.iter().any(|&v| !(v >= T::zero())) {
                return Err(Error::Invalid("sigma must be non-negative".into()));
            }
        }
        Ok(Self {
            theta,
            values,
            sigma,
            stencil: DEFAULT_STENCIL,
        })
    }

    /// Builds a table from angles in degrees.
    pub fn from_degrees(theta_deg: &[T], values: Vec<T>, sigma: Option<Vec<T>>) -> Result<Self> {
        Self::new(theta_deg.iter().map(|t| t.rad()).collect(), values, sigma)
    }

    /// Sets the interpolation stencil size (2 = piecewise linear).
    pub fn with_stencil(mut self, points: usize) -> Self {
        self.stencil = points.clamp(2, 12);
        self
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn sigma(&self) -> Option<&[T]> {
        self.sigma.as_deref()
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Interpolated value at `theta` (radians).
    pub fn eval(&self, theta: T) -> Result<T> {
        let n = self.theta.len();
        let (lo, hi) = (self.theta[0], self.theta[n - 1]);
        if !(theta >= lo && theta <= hi) {
            return Err(Error::Extrapolation {
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
                at: theta.to_f64_lossy(),
            });
        }
        let upper = self.theta.partition_point(|&t| t < theta);
        if upper < n && self.theta[upper] == theta {
            return Ok(self.values[upper]);
        }
        let m = self.stencil.min(n);
        if m == 1 {
            return Ok(self.values[0]);
        }
        // Stencil roughly centred on the bracketing interval [upper-1, upper].
        let start = (upper as isize - (m as isize) / 2).clamp(0, (n - m) as isize) as usize;
        let xs = &self.theta[start..start + m];
        let ys = &self.values[start..start + m];
        let mut acc = T::zero();
        for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
            let mut basis = T::one();
            for (j, &xj) in xs.iter().enumerate() {
                if i != j {
                    basis = basis * (theta - xj) / (xi - xj);
                }
            }
            acc = acc + basis * yi;
        }
        Ok(acc)
    }
}

impl<T: Real> AngularCorrelation<T> for TabulatedCorrelation<T> {
    fn correlation(&self, theta: T) -> Result<T> {
        self.eval(theta)
    }

    fn angular_range(&self) -> (T, T) {
        (self.theta[0], self.theta[self.theta.len() - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(TabulatedCorrelation::new(vec![0.0, 0.0], vec![1.0, 1.0], None).is_err());
        assert!(TabulatedCorrelation::new(vec![-0.1, 0.1], vec![1.0, 1.0], None).is_err());
        assert!(TabulatedCorrelation::new(vec![0.0, 4.0], vec![1.0, 1.0], None).is_err());
        assert!(TabulatedCorrelation::new(vec![0.0, 1.0], vec![1.0, f64::NAN], None).is_err());
        assert!(
            TabulatedCorrelation::new(vec![0.0, 1.0], vec![1.0, 1.0], Some(vec![0.1, -0.1]))
                .is_err()
        );
        assert!(TabulatedCorrelation::new(vec![0.0, 1.0], vec![1.0], None).is_err());
    }

    #[test]
    fn reproduces_polynomials_up_to_stencil_degree() {
        let theta: Vec<f64> = (0..40).map(|i| 0.07 * i as f64).collect();
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3) - 0.1 * t.powi(5);
        let tab =
            TabulatedCorrelation::new(theta.clone(), theta.iter().map(|&t| f(t)).collect(), None)
                .unwrap();
        for t in [0.0, 0.01, 0.5, 1.234, 2.6, 2.73] {
            assert!((tab.eval(t).unwrap() - f(t)).abs() < 1e-12, "{t}");
        }
        let linear = tab.clone().with_stencil(2);
        let mid = 0.5 * (theta[3] + theta[4]);
        let expect = 0.5 * (f(theta[3]) + f(theta[4]));
        assert!((linear.eval(mid).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn extrapolation_is_an_error() {
        let tab =
            TabulatedCorrelation::new(vec![0.1, 0.2, 0.3], vec![1.0, 2.0, 3.0], None).unwrap();
        assert!(matches!(tab.eval(0.05), Err(Error::Extrapolation { .. })));
        assert!(matches!(tab.eval(0.31), Err(Error::Extrapolation { .. })));
        assert_eq!(tab.eval(0.2).unwrap(), 2.0);
    }
}
