//! Angular two-point correlation functions and their power spectra.
//!
//! Numerical routines are generic over [`Real`] (`f32` or `f64`); the type
//! aliases at the bottom of this file name the common instantiations.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod mc;
pub mod models;
pub mod peaks;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod toy1;
pub mod transforms;

pub use error::{Error, Result};
pub use models::{CorrelationModel, ModelKind};
pub use scalar::{deg, Real};
pub use transforms::{
    correlation_from_spectrum, ft_1d, legendre_coefficients, small_angle_spectrum,
    spherical_box_ft, AngularCorrelation, GridKind, PowerSpectrum, Profile1D, TabulatedCorrelation,
};

pub use peaks::{analyze, find_peaks, PeakOptions, PeakReport};

pub type CorrelationModel64 = CorrelationModel<f64>;
pub type CorrelationModel32 = CorrelationModel<f32>;
pub type TabulatedCorrelation64 = TabulatedCorrelation<f64>;
pub type TabulatedCorrelation32 = TabulatedCorrelation<f32>;
pub type PowerSpectrum64 = PowerSpectrum<f64>;
pub type PowerSpectrum32 = PowerSpectrum<f32>;
pub type DiskEnsembleConfig64 = mc::DiskEnsembleConfig<f64>;
pub type RealizationStats64 = mc::RealizationStats<f64>;
pub type PeakReport64 = PeakReport<f64>;
