//! Translation-invariant projection kernels: Ginibre (Bargmann–Fock) on
//! `R^{2n}` and Paley–Wiener on `R^d`, with the sine kernel as `d = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::bessel::{bessel_j, bessel_j_scaled_series};
use crate::error::{Error, Result};
use crate::geometry::ball_volume_coeff;
use crate::quadrature::{integrate, QuadOptions};

/// Ratio `φ(r)/φ(0)` below which the kernel is considered decorrelated.
const DECORRELATION: f64 = 1e-4;
/// Upper cap on the correlation length (slowly decaying kernels).
pub const MAX_CORRELATION_LENGTH: f64 = 20.0;
/// Below this radius the Paley–Wiener kernel uses the scaled power series.
const SERIES_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// `K(z,w) = exp(π(z·w̄ - |z|²/2 - |w|²/2))`, with `z_k = x_k + i x_{n+k}`.
    Ginibre { complex_dim: usize },
    /// `S_d(x,y) = (2π)^{-d/2} J_{d/2}(‖x-y‖) / ‖x-y‖^{d/2}`.
    PaleyWiener { dim: usize },
}

impl Kernel {
    pub fn ginibre(complex_dim: usize) -> Result<Self> {
        if !(1..=2).contains(&complex_dim) {
            return Err(Error::UnsupportedKernel(format!("ginibre complex dimension {complex_dim} (supported: 1, 2)")));
        }
        Ok(Kernel::Ginibre { complex_dim })
    }

    pub fn paley_wiener(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedKernel(format!("paley-wiener dimension {dim} (supported: 1, 2, 3)")));
        }
        Ok(Kernel::PaleyWiener { dim })
    }

    /// `sin(x-y) / (π(x-y))` on the line.
    pub fn sine() -> Self {
        Kernel::PaleyWiener { dim: 1 }
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Ginibre { complex_dim } => format!("ginibre({complex_dim})"),
            Kernel::PaleyWiener { dim: 1 } => "sine".to_string(),
            Kernel::PaleyWiener { dim } => format!("paley-wiener({dim})"),
        }
    }

    /// Real dimension of the state space.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            Kernel::Ginibre { complex_dim } => 2 * complex_dim,
            Kernel::PaleyWiener { dim } => dim,
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Kernel::PaleyWiener { .. })
    }

    /// `K(x, x)`, the same for every `x`.
    pub fn diagonal(&self) -> f64 {
        match *self {
            Kernel::Ginibre { .. } => 1.0,
            Kernel::PaleyWiener { dim } => ball_volume_coeff(dim) / (2.0 * PI).powi(dim as i32),
        }
    }

    fn check_dims(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let d = self.ambient_dim();
        for p in [x, y] {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Complex64> {
        self.check_dims(x, y)?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Complex64 {
        match *self {
            Kernel::Ginibre { complex_dim: n } => {
                let mut cross = Complex64::new(0.0, 0.0);
                let mut norms = 0.0;
                for k in 0..n {
                    let z = Complex64::new(x[k], x[n + k]);
                    let w = Complex64::new(y[k], y[n + k]);
                    cross += z * w.conj();
                    norms += z.norm_sqr() + w.norm_sqr();
                }
                (PI * (cross - 0.5 * norms)).exp()
            }
            Kernel::PaleyWiener { dim } => {
                let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                Complex64::new(paley_wiener_value(dim, r2.sqrt()), 0.0)
            }
        }
    }

    /// Real part of `K(x, y)` for real kernels; panics on dimension mismatch
    /// in debug builds only.
    pub(crate) fn eval_real_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::PaleyWiener { dim } => {
                let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                paley_wiener_value(dim, r2.sqrt())
            }
            Kernel::Ginibre { .. } => self.eval_unchecked(x, y).re,
        }
    }

    /// `|K(x,y)|²` for the unchecked point slices.
    pub(crate) fn modulus_sq_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        self.profile_from_r2(r2)
    }

    fn profile_from_r2(&self, r2: f64) -> f64 {
        match *self {
            Kernel::Ginibre { .. } => (-PI * r2).exp(),
            Kernel::PaleyWiener { dim } => paley_wiener_value(dim, r2.sqrt()).powi(2),
        }
    }

    /// `φ(r) = |K(x,y)|²` at `‖x-y‖ = r`.
    pub fn radial_profile(&self, r: f64) -> f64 {
        self.profile_from_r2(r * r)
    }

    /// Smallest `r` past which `φ` (or, for oscillating kernels, its
    /// envelope) stays below `1e-4·φ(0)`, capped at [`MAX_CORRELATION_LENGTH`].
    pub fn correlation_length(&self) -> f64 {
        let len = match *self {
            Kernel::Ginibre { .. } => (-DECORRELATION.ln() / PI).sqrt(),
            Kernel::PaleyWiener { dim } => {
                // |J_ν(r)| ≤ sqrt(2/(π r)) asymptotically
                let d = dim as f64;
                let c = ball_volume_coeff(dim);
                ((2.0 * PI).powi(dim as i32) * 2.0 / (PI * c * c * DECORRELATION)).powf(1.0 / (d + 1.0))
            }
        };
        len.min(MAX_CORRELATION_LENGTH)
    }

    /// `d·c_d ∫_0^{r_max} r^{d-1} φ(r) dr - √φ(0)`; close to zero for a
    /// projection kernel once `r_max` captures the tail.
    pub fn radial_normalization_check(&self, r_max: f64) -> Result<f64> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidArgument(format!("r_max must be finite and > 0, got {r_max}")));
        }
        let d = self.ambient_dim();
        let area = d as f64 * ball_volume_coeff(d);
        let opts = self.radial_quad_options();
        let res = integrate(|r| r.powi(d as i32 - 1) * self.radial_profile(r), 0.0, r_max, &opts)?;
        Ok(area * res.value - self.radial_profile(0.0).sqrt())
    }

    /// Panel layout suited to `φ`: quarter periods for Bessel profiles, and
    /// panels well below the Gaussian width otherwise.
    pub(crate) fn radial_quad_options(&self) -> QuadOptions {
        let width = match self {
            Kernel::Ginibre { .. } => 0.25,
            Kernel::PaleyWiener { .. } => PI / 2.0,
        };
        QuadOptions::default().with_panel_width(width).with_tolerances(1e-15, 1e-13)
    }
}

fn paley_wiener_value(dim: usize, r: f64) -> f64 {
    let nu = 0.5 * dim as f64;
    // (2π)^{-d/2} and r^{d/2} without powf
    let (pref, half_power) = match dim {
        1 => (1.0 / (2.0 * PI).sqrt(), r.sqrt()),
        2 => (1.0 / (2.0 * PI), r),
        _ => ((2.0 * PI).powf(-nu), r.powf(nu)),
    };
    if r == 0.0 {
        return ball_volume_coeff(dim) / (2.0 * PI).powi(dim as i32);
    }
    if r < SERIES_RADIUS {
        return pref * bessel_j_scaled_series(nu, r);
    }
    // order d/2 is always supported and r is finite and positive here
    pref * bessel_j(nu, r).unwrap_or(f64::NAN) / half_power
}
