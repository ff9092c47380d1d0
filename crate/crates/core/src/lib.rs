//! Accumulated spectrograms of translation-invariant projection kernels
//! restricted to bounded regions, with the number-variance machinery that
//! controls their convergence.

pub mod bessel;
pub mod discretize;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod quadrature;
pub mod spectrogram;
pub mod variance;

pub use error::{Error, Result};
pub use geometry::{Ball, BoxRegion, LensSpec, Region};
pub use kernels::Kernel;
pub use spectrogram::{accumulated_spectrogram, analyze, inequality_report, l1_convergence_study};
pub use variance::{variance_radial, variance_spectral};
