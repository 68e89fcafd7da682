//! Analytic correlation models with exactly known breakpoints.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{deg, Real};
use crate::transforms::AngularCorrelation;

/// Which family a [`CorrelationModel`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    DoubleExp,
    BrokenExp,
    Toy2Uniform,
    Toy2Distance,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::DoubleExp,
        ModelKind::BrokenExp,
        ModelKind::Toy2Uniform,
        ModelKind::Toy2Distance,
    ];

    /// Short name used on the command line and in file headers.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::DoubleExp => "c1",
            ModelKind::BrokenExp => "c2",
            ModelKind::Toy2Uniform => "toy2-uniform",
            ModelKind::Toy2Distance => "toy2-distance",
        }
    }

    /// Parameter keys in the order [`CorrelationModel::params`] reports them.
    pub fn param_keys(self) -> &'static [&'static str] {
        match self {
            ModelKind::DoubleExp => &["A11", "A12", "theta11_deg", "theta12_deg"],
            ModelKind::BrokenExp => &["A21", "A22", "theta21_deg", "theta22_deg", "theta_star_deg"],
            ModelKind::Toy2Uniform => &["Rmin_deg", "Rmax_deg"],
            ModelKind::Toy2Distance => &["A0", "L", "r_min", "r_max"],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c1" | "double-exp" | "doubleexp" => Ok(ModelKind::DoubleExp),
            "c2" | "broken-exp" | "brokenexp" => Ok(ModelKind::BrokenExp),
            "toy2-uniform" | "toy2uniform" | "uniform" => Ok(ModelKind::Toy2Uniform),
            "toy2-distance" | "toy2distance" | "distance" => Ok(ModelKind::Toy2Distance),
            other => Err(Error::Invalid(format!("unknown model '{other}'"))),
        }
    }
}

/// Analytic `C(theta)`; angles in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CorrelationModel<T> {
    /// `a1 exp(-theta/theta1) + a2 exp(-theta/theta2)`.
    DoubleExp { a1: T, a2: T, theta1: T, theta2: T },
    /// `a1 exp(-theta/theta1)` up to `theta_star`, `a2 exp(-theta/theta2)` beyond.
    BrokenExp {
        a1: T,
        a2: T,
        theta1: T,
        theta2: T,
        theta_star: T,
    },
    /// Disks with radii uniform in `[r_min, r_max]`, profile `h(x) = 1 - x/2`.
    Toy2Uniform { r_min: T, r_max: T },
    /// Disks of physical size `l` at distances uniform in `[r_min, r_max]`,
    /// amplitude `(a0/R)^2`.
    Toy2Distance { a0: T, l: T, r_min: T, r_max: T },
}

fn positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn finite<T: Real>(name: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} must be finite, got {v}")))
    }
}

impl<T: Real> CorrelationModel<T> {
    pub fn double_exp(a1: T, a2: T, theta1: T, theta2: T) -> Result<Self> {
        finite("A11", a1)?;
        finite("A12", a2)?;
        positive("theta11", theta1)?;
        positive("theta12", theta2)?;
        Ok(Self::DoubleExp {
            a1,
            a2,
            theta1,
            theta2,
        })
    }

    pub fn broken_exp(a1: T, a2: T, theta1: T, theta2: T, theta_star: T) -> Result<Self> {
        finite("A21", a1)?;
        finite("A22", a2)?;
        positive("theta21", theta1)?;
        positive("theta22", theta2)?;
        positive("theta_star", theta_star)?;
        Ok(Self::BrokenExp {
            a1,
            a2,
            theta1,
            theta2,
            theta_star,
        })
    }

    pub fn toy2_uniform(r_min: T, r_max: T) -> Result<Self> {
        positive("Rmin", r_min)?;
        positive("Rmax", r_max)?;
        if r_min >= r_max {
            return Err(Error::Invalid(format!(
                "need Rmin < Rmax, got {r_min} >= {r_max}"
            )));
        }
        Ok(Self::Toy2Uniform { r_min, r_max })
    }

    pub fn toy2_distance(a0: T, l: T, r_min: T, r_max: T) -> Result<Self> {
        positive("A0", a0)?;
        positive("L", l)?;
        positive("r_min", r_min)?;
        positive("r_max", r_max)?;
        if r_min >= r_max {
            return Err(Error::Invalid(format!(
                "need r_min < r_max, got {r_min} >= {r_max}"
            )));
        }
        Ok(Self::Toy2Distance {
            a0,
            l,
            r_min,
            r_max,
        })
    }

    /// The parameter set used for the published figures.
    pub fn paper_default(kind: ModelKind) -> Self {
        match kind {
            ModelKind::DoubleExp => Self::DoubleExp {
                a1: T::lit(9744.0),
                a2: T::lit(3000.0),
                theta1: deg(0.45),
                theta2: deg(13.0),
            },
            ModelKind::BrokenExp => Self::BrokenExp {
                a1: T::lit(12000.0),
                a2: T::lit(3600.0),
                theta1: deg(0.79),
                theta2: deg(11.45),
                theta_star: deg(1.03),
            },
            ModelKind::Toy2Uniform => Self::Toy2Uniform {
                r_min: deg(1.0),
                r_max: deg(2.0),
            },
            ModelKind::Toy2Distance => Self::Toy2Distance {
                a0: T::lit(0.02),
                l: T::one(),
                r_min: T::lit(3.0),
                r_max: T::lit(50.0),
            },
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Self::DoubleExp { .. } => ModelKind::DoubleExp,
            Self::BrokenExp { .. } => ModelKind::BrokenExp,
            Self::Toy2Uniform { .. } => ModelKind::Toy2Uniform,
            Self::Toy2Distance { .. } => ModelKind::Toy2Distance,
        }
    }

    /// Parameters as (key, value) pairs with angles in degrees, keys as in
    /// [`ModelKind::param_keys`].
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        let keys = self.kind().param_keys();
        let vals: Vec<f64> = match *self {
            Self::DoubleExp {
                a1,
                a2,
                theta1,
                theta2,
            } => vec![
                a1.to_f64_lossy(),
                a2.to_f64_lossy(),
                theta1.deg().to_f64_lossy(),
                theta2.deg().to_f64_lossy(),
            ],
            Self::BrokenExp {
                a1,
                a2,
                theta1,
                theta2,
                theta_star,
            } => vec![
                a1.to_f64_lossy(),
                a2.to_f64_lossy(),
                theta1.deg().to_f64_lossy(),
                theta2.deg().to_f64_lossy(),
                theta_star.deg().to_f64_lossy(),
            ],
            Self::Toy2Uniform { r_min, r_max } => {
                vec![r_min.deg().to_f64_lossy(), r_max.deg().to_f64_lossy()]
            }
            Self::Toy2Distance {
                a0,
                l,
                r_min,
                r_max,
            } => vec![
                a0.to_f64_lossy(),
                l.to_f64_lossy(),
                r_min.to_f64_lossy(),
                r_max.to_f64_lossy(),
            ],
        };
        keys.iter().copied().zip(vals).collect()
    }

    /// Builds a model from key/value parameters; missing keys take the
    /// published defaults, unknown keys are rejected.
    pub fn from_params<'a>(
        kind: ModelKind,
        params: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self> {
        let keys = kind.param_keys();
        let mut vals: Vec<f64> = Self::paper_default(kind)
            .params()
            .iter()
            .map(|p| p.1)
            .collect();
        for (k, v) in params {
            let i = keys.iter().position(|&key| key == k).ok_or_else(|| {
                Error::Config(format!("unknown parameter '{k}' for model {kind}"))
            })?;
            vals[i] = v;
        }
        let v = |i: usize| T::lit(vals[i]);
        let r = |i: usize| T::lit(vals[i].to_radians());
        match kind {
            ModelKind::DoubleExp => Self::double_exp(v(0), v(1), r(2), r(3)),
            ModelKind::BrokenExp => Self::broken_exp(v(0), v(1), r(2), r(3), r(4)),
            ModelKind::Toy2Uniform => Self::toy2_uniform(r(0), r(1)),
            ModelKind::Toy2Distance => Self::toy2_distance(v(0), v(1), v(2), v(3)),
        }
    }

    /// `C(theta)`; `theta` in radians.
    pub fn eval(&self, theta: T) -> Result<T> {
        if !(theta >= T::zero()) {
            return Err(Error::Domain(format!(
                "theta must be non-negative, got {theta}"
            )));
        }
        let segment = self.segment(theta);
        Ok(self.branch(segment, theta))
    }

    /// Angles where some derivative (or the value) is discontinuous.
    pub fn breakpoints(&self) -> Vec<T> {
        let two = T::lit(2.0);
        match *self {
            Self::DoubleExp { .. } => Vec::new(),
            Self::BrokenExp { theta_star, .. } => vec![theta_star],
            Self::Toy2Uniform { r_min, r_max } => vec![two * r_min, two * r_max],
            Self::Toy2Distance {
                l, r_min, r_max, ..
            } => vec![two * l / r_max, two * l / r_min],
        }
    }

    /// Index of the branch that applies at `theta`.
    fn segment(&self, theta: T) -> usize {
        let bps = self.breakpoints();
        match self {
            // theta <= theta_*  |  theta > theta_*
            Self::BrokenExp { .. } => usize::from(theta > bps[0]),
            // theta <= lower  |  lower < theta < upper  |  theta >= upper
            Self::Toy2Uniform { .. } | Self::Toy2Distance { .. } => {
                if theta <= bps[0] {
                    0
                } else if theta < bps[1] {
                    1
                } else {
                    2
                }
            }
            Self::DoubleExp { .. } => 0,
        }
    }

    /// Closed-form expression of branch `segment`, evaluated at any `theta`
    /// (also outside the branch's own interval).
    fn branch(&self, segment: usize, theta: T) -> T {
        let half = T::lit(0.5);
        let four = T::lit(4.0);
        match *self {
            Self::DoubleExp {
                a1,
                a2,
                theta1,
                theta2,
            } => a1 * (-theta / theta1).exp() + a2 * (-theta / theta2).exp(),
            Self::BrokenExp {
                a1,
                a2,
                theta1,
                theta2,
                ..
            } => match segment {
                0 => a1 * (-theta / theta1).exp(),
                _ => a2 * (-theta / theta2).exp(),
            },
            Self::Toy2Uniform { r_min, r_max } => match segment {
                0 => (r_max - r_min) - half * (r_max / r_min).ln() * theta,
                1 => {
                    r_max - half * (T::one() + T::LN_2()) * theta
                        + half * theta * (theta / r_max).ln()
                }
                _ => T::zero(),
            },
            Self::Toy2Distance {
                a0,
                l,
                r_min,
                r_max,
            } => {
                let a2 = a0 * a0;
                match segment {
                    0 => {
                        a2 * ((r_max - r_min) / l
                            - (r_max * r_max - r_min * r_min) * theta / (four * l * l))
                    }
                    1 => a2 * (-r_min / l + theta.recip() + r_min * r_min * theta / (four * l * l)),
                    _ => T::zero(),
                }
            }
        }
    }

    /// First derivative of branch `segment` at `theta`.
    fn branch_derivative(&self, segment: usize, theta: T) -> T {
        let half = T::lit(0.5);
        let four = T::lit(4.0);
        match *self {
            Self::DoubleExp {
                a1,
                a2,
                theta1,
                theta2,
            } => -a1 / theta1 * (-theta / theta1).exp() - a2 / theta2 * (-theta / theta2).exp(),
            Self::BrokenExp {
                a1,
                a2,
                theta1,
                theta2,
                ..
            } => match segment {
                0 => -a1 / theta1 * (-theta / theta1).exp(),
                _ => -a2 / theta2 * (-theta / theta2).exp(),
            },
            Self::Toy2Uniform { r_min, r_max } => match segment {
                0 => -half * (r_max / r_min).ln(),
                1 => -half * T::LN_2() + half * (theta / r_max).ln(),
                _ => T::zero(),
            },
            Self::Toy2Distance {
                a0,
                l,
                r_min,
                r_max,
            } => {
                let a2 = a0 * a0;
                match segment {
                    0 => -a2 * (r_max * r_max - r_min * r_min) / (four * l * l),
                    1 => a2 * (-(theta * theta).recip() + r_min * r_min / (four * l * l)),
                    _ => T::zero(),
                }
            }
        }
    }

    /// (left limit, right limit) of `C` at `theta`, from the closed-form
    /// branch expressions on either side.
    pub fn one_sided_values(&self, theta: T) -> (T, T) {
        let (lo, hi) = self.sides(theta);
        (self.branch(lo, theta), self.branch(hi, theta))
    }

    /// (left, right) first derivatives of `C` at `theta`, in closed form.
    pub fn one_sided_derivatives(&self, theta: T) -> (T, T) {
        let (lo, hi) = self.sides(theta);
        (
            self.branch_derivative(lo, theta),
            self.branch_derivative(hi, theta),
        )
    }

    fn sides(&self, theta: T) -> (usize, usize) {
        match self.breakpoints().iter().position(|&b| b == theta) {
            Some(i) => (i, i + 1),
            None => {
                let s = self.segment(theta);
                (s, s)
            }
        }
    }
}

impl<T: Real> AngularCorrelation<T> for CorrelationModel<T> {
    fn correlation(&self, theta: T) -> Result<T> {
        self.eval(theta)
    }

    fn breakpoints(&self) -> Vec<T> {
        CorrelationModel::breakpoints(self)
    }

    fn angular_range(&self) -> (T, T) {
        (T::zero(), T::PI())
    }
}
