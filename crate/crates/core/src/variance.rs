//! Expected counts and number variances of projection DPPs on bounded
//! windows: the spectral route `Σμ(1-μ)`, the radial route through lens
//! volumes, the disjoint-union upper bound, hyperuniformity curves and the
//! `R^{d-1} log R` asymptotics of the Paley–Wiener family.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bessel::gamma_half;
use crate::discretize::{assemble_operator, build_grid_with_cap, spectral_eigenvalues, SpectralData, DEFAULT_NODE_CAP};
use crate::error::{Error, Result};
use crate::geometry::{ball_volume_coeff, lens_volume_closed_form, LensSpec, Region};
use crate::kernels::Kernel;
use crate::quadrature::integrate;

/// Outer radius of the radial integrals for Paley–Wiener profiles.
pub const PALEY_WIENER_R_MAX: f64 = 1e4;
/// Outer radius for Gaussian profiles (`e^{-π·144}` underflows).
pub const GINIBRE_R_MAX: f64 = 12.0;
/// Relative error above which a radial variance is flagged.
pub const ACCURACY_WARNING: f64 = 0.01;

/// `E[Ξ(Λ)] = K(x,x)·volume(Λ)` for the constant-diagonal kernels here.
pub fn expected_count(kernel: &Kernel, region: &Region) -> f64 {
    kernel.diagonal() * region.volume()
}

/// `Σ μ_j (1 - μ_j)` on clamped eigenvalues.
pub fn variance_spectral(spectral: &SpectralData) -> f64 {
    spectral.eigenvalues().iter().map(|m| m * (1.0 - m)).sum()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RadialVariance {
    pub value: f64,
    /// Quadrature error estimate plus the bound on the neglected tail.
    pub error: f64,
    pub r_max: f64,
    /// Error estimate above 1% of the value.
    pub accuracy_warning: bool,
}

/// `σ_{d-1}[∫_0^{2R} r^{d-1}φ(r) lens(r,R) dr + c_d R^d ∫_{2R}^{r_max} r^{d-1}φ(r) dr]`
/// plus, for Paley–Wiener, the mean of the oscillating tail beyond `r_max`.
pub fn variance_radial(kernel: &Kernel, radius: f64) -> Result<RadialVariance> {
    let r_max = match kernel {
        Kernel::Ginibre { .. } => GINIBRE_R_MAX.max(2.0 * radius),
        Kernel::PaleyWiener { .. } => PALEY_WIENER_R_MAX.max(4.0 * radius),
    };
    variance_radial_with(kernel, radius, r_max)
}

pub fn variance_radial_with(kernel: &Kernel, radius: f64, r_max: f64) -> Result<RadialVariance> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be finite and > 0, got {radius}")));
    }
    if !(r_max >= 2.0 * radius) || !r_max.is_finite() {
        return Err(Error::InvalidArgument(format!("r_max must be at least 2R = {}, got {r_max}", 2.0 * radius)));
    }
    let d = kernel.ambient_dim();
    let sphere = d as f64 * ball_volume_coeff(d);
    let ball = ball_volume_coeff(d) * radius.powi(d as i32);
    let opts = kernel.radial_quad_options();
    let pw = |r: f64| r.powi(d as i32 - 1) * kernel.radial_profile(r);

    let inner = integrate(
        |r| {
            let lens = LensSpec::new(d, r, radius).map(lens_volume_closed_form).unwrap_or(f64::NAN);
            pw(r) * lens
        },
        0.0,
        2.0 * radius,
        &opts,
    )?;
    let outer = integrate(pw, 2.0 * radius, r_max, &opts)?;
    let (tail_mean, tail_bound) = match *kernel {
        Kernel::Ginibre { .. } => (0.0, 0.0),
        Kernel::PaleyWiener { dim } => {
            // φ(r) r^{d-1} = (2π)^{-d} (2/(π r²)) cos²(χ) (1 + O(1/r))
            let scale = (2.0 * PI).powi(-(dim as i32));
            let nu = 0.5 * dim as f64;
            (scale / (PI * r_max), scale * (1.0 + (4.0 * nu * nu - 1.0).abs()) / (PI * r_max * r_max))
        }
    };
    let value = sphere * (inner.value + ball * (outer.value + tail_mean));
    let error = sphere * (inner.error + ball * (outer.error + tail_bound));
    Ok(RadialVariance { value, error, r_max, accuracy_warning: error > ACCURACY_WARNING * value.abs() })
}

/// `Σ_k var_radial(R·r_k)`, an upper bound for the variance on the dilated
/// union by negative correlation and translation invariance.
pub fn variance_subadditive_upper(kernel: &Kernel, union: &Region, dilation: f64) -> Result<f64> {
    let balls = union
        .balls()
        .ok_or_else(|| Error::InvalidRegion("subadditive bound needs a ball or a union of balls".into()))?;
    if !(dilation > 0.0) {
        return Err(Error::InvalidDilation(dilation));
    }
    balls.iter().map(|b| variance_radial(kernel, dilation * b.radius()).map(|v| v.value)).sum()
}

/// How the variance along a hyperuniformity curve is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarianceRoute {
    /// Radial lens-volume integral; balls only.
    Radial,
    /// Sum of radial variances over the balls of a disjoint union.
    SubadditiveUpper,
    /// Eigenvalues of the discretized operator on `n_per_axis` cells per axis.
    Spectral { n_per_axis: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub r: f64,
    pub e_count: f64,
    pub variance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HyperuniformityCurve {
    pub route: VarianceRoute,
    pub points: Vec<CurvePoint>,
    /// `var/E` decreases along the supplied dilations.
    pub decreasing: bool,
}

fn variance_by_route(kernel: &Kernel, region: &Region, route: VarianceRoute) -> Result<f64> {
    match route {
        VarianceRoute::Radial => match region {
            Region::Ball(b) => variance_radial(kernel, b.radius()).map(|v| v.value),
            _ => Err(Error::InvalidRegion("radial variance needs a ball".into())),
        },
        VarianceRoute::SubadditiveUpper => variance_subadditive_upper(kernel, region, 1.0),
        VarianceRoute::Spectral { n_per_axis } => {
            let grid = build_grid_with_cap(region, n_per_axis, DEFAULT_NODE_CAP)?;
            let a = assemble_operator(kernel, &grid)?;
            Ok(variance_spectral(&spectral_eigenvalues(&a)?))
        }
    }
}

pub fn hyperuniformity_curve(kernel: &Kernel, region: &Region, r_list: &[f64], route: VarianceRoute) -> Result<HyperuniformityCurve> {
    if region.dim() != kernel.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: kernel.ambient_dim(), got: region.dim() });
    }
    let points: Vec<CurvePoint> = r_list
        .par_iter()
        .map(|&r| {
            let dilated = region.dilate(r)?;
            let e_count = expected_count(kernel, &dilated);
            let variance = variance_by_route(kernel, &dilated, route)?;
            Ok(CurvePoint { r, e_count, variance, ratio: variance / e_count })
        })
        .collect::<Result<_>>()?;
    let decreasing = points.windows(2).all(|w| w[1].ratio < w[0].ratio);
    Ok(HyperuniformityCurve { route, points, decreasing })
}

/// `1 / (2^{d-1} π^{3/2} Γ((d+1)/2) Γ(d/2))`, the coefficient of
/// `R^{d-1} log R` in the Paley–Wiener number variance on balls.
pub fn asymptotic_constant(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(1.0 / (2f64.powi(d as i32 - 1) * PI.powf(1.5) * gamma_half(d as u32 + 1) * gamma_half(d as u32)))
}

/// The same constant before simplification, `c_{d-1} σ_{d-1} / (2^d π^{d+1})`.
pub fn asymptotic_constant_unsimplified(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    let sphere = d as f64 * ball_volume_coeff(d);
    Ok(ball_volume_coeff(d - 1) * sphere / (2f64.powi(d as i32) * PI.powi(d as i32 + 1)))
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticFit {
    pub dim: usize,
    pub r_values: Vec<f64>,
    pub var_values: Vec<f64>,
    /// Number of leading-largest `R` values used in the regression.
    pub window: usize,
    pub slope: f64,
    pub intercept: f64,
    pub asymptotic_constant: f64,
    pub relative_deviation: f64,
}

/// Least-squares slope of `var/R^{d-1}` against `log R` over the largest
/// half-decade of `R`. The `R` values must span at least one decade.
pub fn fit_asymptotics(dim: usize, r_values: &[f64], var_values: &[f64]) -> Result<AsymptoticFit> {
    if r_values.len() != var_values.len() {
        return Err(Error::DimensionMismatch { expected: r_values.len(), got: var_values.len() });
    }
    let constant = asymptotic_constant(dim)?;
    let r_min = r_values.iter().copied().fold(f64::INFINITY, f64::min);
    let r_top = r_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(r_min > 0.0) || !(r_top >= 10.0 * r_min * (1.0 - 1e-12)) {
        return Err(Error::FitRange(format!("R must span at least one decade, got [{r_min}, {r_top}]")));
    }
    let cut = r_top / 10f64.sqrt() * (1.0 - 1e-12);
    let (xs, ys): (Vec<f64>, Vec<f64>) = r_values
        .iter()
        .zip(var_values)
        .filter(|(r, _)| **r >= cut)
        .map(|(r, v)| (r.ln(), v / r.powi(dim as i32 - 1)))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::FitRange(format!("only {} points in the top half-decade, need 3", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(AsymptoticFit {
        dim,
        r_values: r_values.to_vec(),
        var_values: var_values.to_vec(),
        window: xs.len(),
        slope,
        intercept: my - slope * mx,
        asymptotic_constant: constant,
        relative_deviation: (slope - constant) / constant,
    })
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(Error::InvalidArgument(format!("log spacing needs 0 < lo < hi and n >= 2, got {lo}, {hi}, {n}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|k| match k {
            0 => lo,
            _ if k == n - 1 => hi,
            _ => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceReport {
    pub region: Region,
    pub e_count: f64,
    pub var_spectral: Option<f64>,
    pub var_radial: Option<RadialVariance>,
    pub var_upper_subadditive: Option<f64>,
    /// `var/E` by the best available variance (radial, then spectral, then
    /// the upper bound).
    pub ratio: f64,
}

impl VarianceReport {
    pub fn best_variance(&self) -> f64 {
        self.var_radial.map(|v| v.value).or(self.var_spectral).or(self.var_upper_subadditive).unwrap_or(f64::NAN)
    }
}

/// Every variance route applicable to `region`; the spectral route runs when
/// `spectral_n` is given.
pub fn variance_report(kernel: &Kernel, region: &Region, spectral_n: Option<usize>) -> Result<VarianceReport> {
    let e_count = expected_count(kernel, region);
    let var_spectral = spectral_n.map(|n| variance_by_route(kernel, region, VarianceRoute::Spectral { n_per_axis: n })).transpose()?;
    let var_radial = match region {
        Region::Ball(b) => Some(variance_radial(kernel, b.radius())?),
        _ => None,
    };
    let var_upper_subadditive = match region {
        Region::DisjointBallUnion(_) => Some(variance_subadditive_upper(kernel, region, 1.0)?),
        _ => None,
    };
    let mut report = VarianceReport { region: region.clone(), e_count, var_spectral, var_radial, var_upper_subadditive, ratio: 0.0 };
    report.ratio = report.best_variance() / e_count;
    Ok(report)
}
