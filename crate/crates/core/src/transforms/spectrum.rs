use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative tolerance for negative spectral values attributable to quadrature
/// noise: values down to `-TOL_NEG * max|value|` are considered zero.
pub const TOL_NEG: f64 = 1e-9;

/// What the spectrum grid measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    /// Integer multipoles `l = 0, 1, ...`.
    Multipole,
    /// Continuous frequency `k` (identified with `l + 1/2` at small angles).
    Frequency,
}

/// Spectral amplitudes `C_l` or `P(k)` on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSpectrum<T> {
    kind: GridKind,
    grid: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> PowerSpectrum<T> {
    pub fn new(kind: GridKind, grid: Vec<T>, values: Vec<T>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Invalid("empty spectrum".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::Invalid(format!(
                "grid has {} points but values has {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(
                "spectrum grid must be strictly increasing".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "spectrum value",
                at: grid[i].to_f64_lossy(),
            });
        }
        if kind == GridKind::Multipole
            && grid
                .iter()
                .any(|&g| g < T::zero() || g.fract() != T::zero())
        {
            return Err(Error::Invalid(
                "multipoles must be non-negative integers".into(),
            ));
        }
        Ok(Self { kind, grid, values })
    }

    /// Spectrum on the contiguous multipole grid `0..values.len()`.
    pub fn from_multipoles(values: Vec<T>) -> Result<Self> {
        let grid = (0..values.len()).map(T::from_usize_lossy).collect();
        Self::new(GridKind::Multipole, grid, values)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// True when the grid is exactly `0, 1, ..., len-1`.
    pub fn is_contiguous_multipoles(&self) -> bool {
        self.kind == GridKind::Multipole
            && self
                .grid
                .iter()
                .enumerate()
                .all(|(i, &g)| g == T::from_usize_lossy(i))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Most negative value relative to `max|value|` (zero if none negative).
    pub fn negative_excess(&self) -> T {
        let max = self.max_abs();
        if max == T::zero() {
            return T::zero();
        }
        let min = self.values.iter().fold(T::zero(), |m, &v| m.min(v));
        -min / max
    }

    /// Whether every value is at least `-TOL_NEG * max|value|`.
    pub fn within_negative_tolerance(&self) -> bool {
        self.negative_excess() <= T::lit(TOL_NEG)
    }

    /// Values with tolerated quadrature negatives set to zero. For plotting
    /// only; analysis routines always use [`values`](Self::values).
    pub fn clamped_for_plot(&self) -> Vec<T> {
        let floor = -T::lit(TOL_NEG) * self.max_abs();
        self.values
            .iter()
            .map(|&v| {
                if v < T::zero() && v >= floor {
                    T::zero()
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            kind: self.kind,
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| v * factor).collect(),
        }
    }

    /// Relabels a multipole spectrum on the frequency grid `k = l + 1/2`.
    pub fn to_frequency(&self) -> Self {
        match self.kind {
            GridKind::Frequency => self.clone(),
            GridKind::Multipole => Self {
                kind: GridKind::Frequency,
                grid: self.grid.iter().map(|&l| l + T::lit(0.5)).collect(),
                values: self.values.clone(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PowerSpectrum::<f64>::from_multipoles(vec![]).is_err());
        assert!(PowerSpectrum::new(GridKind::Frequency, vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(PowerSpectrum::new(GridKind::Multipole, vec![0.5, 1.0], vec![0.0, 0.0]).is_err());
        assert!(PowerSpectrum::new(
            GridKind::Frequency,
            vec![0.5, 1.0],
            vec![0.0, f64::INFINITY]
        )
        .is_err());
        let s = PowerSpectrum::from_multipoles(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(s.is_contiguous_multipoles());
        assert_eq!(s.to_frequency().grid(), &[0.5, 1.5, 2.5]);
    }

    #[test]
    fn negative_tolerance_and_plot_clamp() {
        let s = PowerSpectrum::from_multipoles(vec![1.0, -5e-10, -0.5]).unwrap();
        assert!(!s.within_negative_tolerance());
        assert_eq!(s.negative_excess(), 0.5);
        assert_eq!(s.clamped_for_plot(), vec![1.0, 0.0, -0.5]);
        // analysis values untouched
        assert_eq!(s.values()[1], -5e-10);
    }
}
