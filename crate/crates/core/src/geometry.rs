//! Balls, boxes and finite unions of disjoint balls in R^d, together with the
//! volume of the part of a shifted ball lying outside the centered one
//! ("lens" volume `Leb(B(0,R)^c ∩ B(x,R))`).
//!
//! The lens volume is available by three routes:
//! - [`lens_volume_series`]: the Pochhammer series in `‖x‖/2R`,
//! - [`lens_volume_exact`]: ball volume minus two spherical caps, the caps
//!   integrated numerically,
//! - [`lens_volume_closed_form`]: the cap integral in closed form through a
//!   recurrence on the exponent, used where many evaluations are needed.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Default cap on the number of series terms.
pub const DEFAULT_MAX_TERMS: usize = 1_000_000;

/// `c_d` for `d >= 0` (`c_0 = 1`), by the recurrence `c_d = 2π/d · c_{d-2}`.
pub(crate) fn ball_volume_coeff(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * ball_volume_coeff(d - 2),
    }
}

/// Volume of the unit ball of R^d, `π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(ball_volume_coeff(d))
}

/// Surface measure of the unit sphere `S^{d-1}`, `d · c_d`.
pub fn unit_sphere_area(d: usize) -> Result<f64> {
    Ok(d as f64 * unit_ball_volume(d)?)
}

/// Rising factorial `(α)_k = α(α+1)…(α+k-1)`.
pub fn pochhammer(alpha: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (alpha + i as f64))
}

/// Two balls of common radius `radius` whose centers are `offset` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LensSpec {
    dim: usize,
    offset: f64,
    radius: f64,
}

impl LensSpec {
    pub fn new(dim: usize, offset: f64, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(offset >= 0.0) || !offset.is_finite() {
            return Err(Error::InvalidArgument(format!("lens offset must be >= 0, got {offset}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("lens radius must be > 0, got {radius}")));
        }
        Ok(LensSpec { dim, offset, radius })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn ball_volume(&self) -> f64 {
        ball_volume_coeff(self.dim) * self.radius.powi(self.dim as i32)
    }
}

/// Lens volume from the Pochhammer series, truncated once the remaining tail
/// is provably below `tol`.
pub fn lens_volume_series(spec: LensSpec, tol: f64) -> Result<f64> {
    lens_volume_series_capped(spec, tol, DEFAULT_MAX_TERMS)
}

/// As [`lens_volume_series`] with an explicit term cap.
pub fn lens_volume_series_capped(spec: LensSpec, tol: f64, max_terms: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("series tolerance must be > 0, got {tol}")));
    }
    let LensSpec { dim, offset, radius } = spec;
    if offset >= 2.0 * radius {
        return Ok(spec.ball_volume());
    }
    let prefactor = 2.0 * ball_volume_coeff(dim - 1) * radius.powi(dim as i32);
    let x = offset / (2.0 * radius);
    if x == 0.0 {
        return Ok(0.0);
    }
    let m = 0.5 * (dim as f64 - 1.0);
    let x2 = x * x;
    let scaled_tol = tol / prefactor;

    // a_k = (-m)_k / k!, term_k = a_k x^{2k+1} / (2k+1)
    let mut a = 1.0;
    let mut xpow = x;
    let mut sum = 0.0;
    for k in 0..max_terms {
        let term = a * xpow / (2 * k + 1) as f64;
        sum += term;
        let kf = k as f64;
        a *= (kf - m) / (kf + 1.0);
        if a == 0.0 {
            // odd d: the Pochhammer factor hits zero and the series terminates
            return Ok(prefactor * sum);
        }
        xpow *= x2;
        if kf > m {
            // terms have constant sign and ratio below min(x^2, 1 - (m+1)/(k+1))
            let geometric = x2 / (1.0 - x2);
            let power = if m > 0.0 { (kf + 1.0) / m } else { f64::INFINITY };
            let tail = term.abs() * geometric.min(power);
            if tail < scaled_tol {
                return Ok(prefactor * sum);
            }
        }
    }
    Err(Error::SeriesDivergence { terms: max_terms })
}

/// Lens volume as `c_d R^d` minus twice the cap `{y ∈ B(0,R) : y_1 ≥ r/2}`,
/// the cap volume `∫_{r/2}^R c_{d-1}(R²-s²)^{(d-1)/2} ds` integrated by
/// adaptive Gauss–Legendre after the substitution `s = R cos θ`.
pub fn lens_volume_exact(spec: LensSpec) -> f64 {
    let LensSpec { dim, offset, radius } = spec;
    if offset >= 2.0 * radius {
        return spec.ball_volume();
    }
    let theta_max = (offset / (2.0 * radius)).clamp(0.0, 1.0).acos();
    let slice = ball_volume_coeff(dim - 1);
    let opts = QuadOptions::default().with_tolerances(1e-15, 1e-14);
    let cap = integrate(|t: f64| t.sin().powi(dim as i32), 0.0, theta_max, &opts)
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
    let cap = slice * radius.powi(dim as i32) * cap;
    (spec.ball_volume() - 2.0 * cap).max(0.0)
}

/// `∫_a^1 (1-u²)^m du` for `m = (d-1)/2`, `d >= 1`.
fn cap_integral(d: usize, a: f64) -> f64 {
    let one_minus = (1.0 - a * a).max(0.0);
    let (mut m, mut value) = if d % 2 == 1 {
        (0.0, 1.0 - a)
    } else {
        (0.5, 0.5 * (a.acos() - a * one_minus.sqrt()))
    };
    let target = 0.5 * (d as f64 - 1.0);
    while m < target {
        m += 1.0;
        value = (-a * one_minus.powf(m) + 2.0 * m * value) / (2.0 * m + 1.0);
    }
    value
}

/// Lens volume in closed form. Values for `r > 2R` are clamped to `c_d R^d`.
pub fn lens_volume_closed_form(spec: LensSpec) -> f64 {
    let LensSpec { dim, offset, radius } = spec;
    let ball = spec.ball_volume();
    if offset >= 2.0 * radius {
        return ball;
    }
    let a = offset / (2.0 * radius);
    let overlap = 2.0 * ball_volume_coeff(dim - 1) * radius.powi(dim as i32) * cap_integral(dim, a);
    (ball - overlap).clamp(0.0, ball)
}

/// Closed ball `{x : ‖x - center‖ ≤ radius}` (boundaries are null sets).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidRegion(format!("ball radius must be > 0, got {radius}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidRegion("ball center must be finite".into()));
        }
        Ok(Ball { center, radius })
    }

    pub fn centered(dim: usize, radius: f64) -> Result<Self> {
        Ball::new(vec![0.0; dim], radius)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn volume(&self) -> f64 {
        ball_volume_coeff(self.dim()) * self.radius.powi(self.dim() as i32)
    }

    fn contains(&self, x: &[f64]) -> bool {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 < self.radius * self.radius
    }

    fn dilate(&self, factor: f64) -> Ball {
        Ball {
            center: self.center.iter().map(|c| c * factor).collect(),
            radius: self.radius * factor,
        }
    }
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if lower.iter().chain(&upper).any(|v| !v.is_finite()) {
            return Err(Error::InvalidRegion("box corners must be finite".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidRegion("box requires lower < upper in every coordinate".into()));
        }
        Ok(BoxRegion { lower, upper })
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        BoxRegion::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    fn dilate(&self, factor: f64) -> BoxRegion {
        BoxRegion {
            lower: self.lower.iter().map(|v| v * factor).collect(),
            upper: self.upper.iter().map(|v| v * factor).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Region {
    Ball(Ball),
    Box(BoxRegion),
    DisjointBallUnion(Vec<Ball>),
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ok(Region::Ball(Ball::new(center, radius)?))
    }

    pub fn cuboid(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Ok(Region::Box(BoxRegion::new(lower, upper)?))
    }

    /// Union of balls that must be pairwise disjoint: center distance at least
    /// the sum of radii (tangency allowed).
    pub fn disjoint_balls(balls: Vec<Ball>) -> Result<Self> {
        let Some(first) = balls.first() else {
            return Err(Error::InvalidRegion("union: at least one ball required".into()));
        };
        let dim = first.dim();
        if let Some(b) = balls.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: b.dim() });
        }
        for (i, a) in balls.iter().enumerate() {
            for b in &balls[i + 1..] {
                let dist = a.center.iter().zip(&b.center).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                // relative slack so that exactly tangent balls given in decimal pass
                if dist < (a.radius + b.radius) * (1.0 - 1e-12) {
                    return Err(Error::InvalidRegion("union: balls overlap".into()));
                }
            }
        }
        Ok(Region::DisjointBallUnion(balls))
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball(b) => b.dim(),
            Region::Box(b) => b.dim(),
            Region::DisjointBallUnion(bs) => bs[0].dim(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Region::Ball(b) => b.volume(),
            Region::Box(b) => b.volume(),
            Region::DisjointBallUnion(bs) => bs.iter().map(Ball::volume).sum(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball(b) => b.contains(x),
            Region::Box(b) => b.contains(x),
            Region::DisjointBallUnion(bs) => bs.iter().any(|b| b.contains(x)),
        }
    }

    /// The dilation `R·Λ` (all centers, corners and radii scaled by `factor`).
    pub fn dilate(&self, factor: f64) -> Result<Region> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidDilation(factor));
        }
        Ok(match self {
            Region::Ball(b) => Region::Ball(b.dilate(factor)),
            Region::Box(b) => Region::Box(b.dilate(factor)),
            Region::DisjointBallUnion(bs) => Region::DisjointBallUnion(bs.iter().map(|b| b.dilate(factor)).collect()),
        })
    }

    pub fn bbox(&self) -> BoxRegion {
        let ball_box = |b: &Ball| BoxRegion {
            lower: b.center.iter().map(|c| c - b.radius).collect(),
            upper: b.center.iter().map(|c| c + b.radius).collect(),
        };
        match self {
            Region::Ball(b) => ball_box(b),
            Region::Box(b) => b.clone(),
            Region::DisjointBallUnion(bs) => {
                let mut acc = ball_box(&bs[0]);
                for b in &bs[1..] {
                    let bb = ball_box(b);
                    for i in 0..acc.dim() {
                        acc.lower[i] = acc.lower[i].min(bb.lower[i]);
                        acc.upper[i] = acc.upper[i].max(bb.upper[i]);
                    }
                }
                acc
            }
        }
    }

    /// Balls making up the region, if it is a ball or a union of balls.
    pub fn balls(&self) -> Option<&[Ball]> {
        match self {
            Region::Ball(b) => Some(std::slice::from_ref(b)),
            Region::DisjointBallUnion(bs) => Some(bs),
            Region::Box(_) => None,
        }
    }
}
