//! Bessel functions of the first kind for orders that are non-negative
//! multiples of 1/2.
//!
//! Regimes:
//! - half-integer orders: power series for `x <= ν + 2`, otherwise the Hankel
//!   expansion, which terminates and is exact for these orders;
//! - integer orders: power series for `x <= max(5, ν)`, the Bessel integral
//!   `(1/π)∫_0^π cos(nτ - x sin τ) dτ` by the trapezoidal rule (spectrally
//!   accurate for periodic integrands) up to `max(25, 2ν²)`, and the Hankel
//!   asymptotic expansion beyond.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Order {
    Integer(u32),
    /// `n + 1/2`
    HalfInteger(u32),
}

fn classify(nu: f64) -> Result<Order> {
    let twice = 2.0 * nu;
    if !nu.is_finite() || nu < 0.0 || twice.fract() != 0.0 || twice > 1e6 {
        return Err(Error::UnsupportedOrder(nu));
    }
    let twice = twice as u32;
    Ok(if twice.is_multiple_of(2) {
        Order::Integer(twice / 2)
    } else {
        Order::HalfInteger(twice / 2)
    })
}

/// `Γ(n/2)` for `n >= 1`, exact up to rounding.
pub fn gamma_half(n: u32) -> f64 {
    assert!(n >= 1, "gamma_half needs n >= 1");
    let (mut value, mut arg) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while arg < target {
        value *= arg;
        arg += 1.0;
    }
    value
}

/// `J_ν(x) / x^ν`, from the power series. Regular at `x = 0` with value
/// `1 / (2^ν Γ(ν+1))`. Accurate for moderate `x` only.
pub fn bessel_j_scaled_series(nu: f64, x: f64) -> f64 {
    let mut term = 1.0 / (2f64.powf(nu) * gamma_half((2.0 * nu) as u32 + 2));
    let q = 0.25 * x * x;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > x {
            return sum;
        }
        if k > 10_000.0 {
            return sum;
        }
    }
}

/// The power series `Σ (-1)^k (x/2)^{2k+ν} / (k! Γ(k+ν+1))`.
pub fn bessel_j_series(nu: f64, x: f64) -> Result<f64> {
    classify(nu)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("bessel argument must be finite and >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(bessel_j_scaled_series(nu, x) * x.powf(nu))
}

/// Hankel expansion. For half-integer orders the coefficients vanish after
/// finitely many terms and every term is kept (`terminating`); otherwise the
/// sum stops at the smallest term.
fn hankel(nu: f64, x: f64, terminating: bool) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (0.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    let mut k = 0u32;
    loop {
        let t = a / x.powi(k as i32);
        if t == 0.0 || (!terminating && (t.abs() > prev || t.abs() < 1e-17)) {
            break;
        }
        prev = t.abs();
        let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        if k.is_multiple_of(2) {
            p += sign * t;
        } else {
            q += sign * t;
        }
        k += 1;
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (8.0 * k as f64);
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn trapezoid_integral(n: u32, x: f64) -> f64 {
    let m = (x + n as f64 + 40.0) as usize;
    let nf = n as f64;
    let mut acc = 0.0;
    for k in 0..m {
        let tau = PI * (k as f64 + 0.5) / m as f64;
        acc += (nf * tau - x * tau.sin()).cos();
    }
    acc / m as f64
}

/// `J_ν(x)` for `ν ∈ {0, 1/2, 1, 3/2, …}` and `x >= 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    let order = classify(nu)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("bessel argument must be finite and >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(match order {
        Order::HalfInteger(_) if x <= nu + 2.0 => bessel_j_scaled_series(nu, x) * x.powf(nu),
        Order::HalfInteger(_) => hankel(nu, x, true),
        Order::Integer(n) => {
            if x <= nu.max(5.0) {
                bessel_j_scaled_series(nu, x) * x.powf(nu)
            } else if x <= 25f64.max(2.0 * nu * nu) {
                trapezoid_integral(n, x)
            } else {
                hankel(nu, x, false)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gamma_half_values() {
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(1), PI.sqrt());
        assert!((gamma_half(3) - 0.5 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(8), 6.0);
    }

    #[test]
    fn closed_half_integer_examples() {
        let v = bessel_j(0.5, PI / 2.0).unwrap();
        assert!((v - 2.0 / PI).abs() < 1e-14);
        let s = bessel_j_series(0.5, PI / 2.0).unwrap();
        assert!((v - s).abs() < 1e-14);
        for &x in &[0.1, 1.0, 2.5, 7.0, 40.0] {
            let sin_form = (2.0 / (PI * x)).sqrt() * x.sin();
            assert!((bessel_j(0.5, x).unwrap() - sin_form).abs() < 1e-13);
            let j32 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((bessel_j(1.5, x).unwrap() - j32).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn zero_argument() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        for nu in [0.5, 1.0, 1.5, 3.0] {
            assert_eq!(bessel_j(nu, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn reference_values() {
        // high-precision reference values
        let cases: &[(f64, f64, f64)] = &[
            (0.0, 1.0, 0.76519768655796655145),
            (1.0, 1.0, 0.44005058574493351596),
            (0.5, 3.0, 0.065008182877375778114),
            (1.5, 0.3, 0.043309881918378320896),
            (2.0, 7.5, -0.23027341052579026215),
            (1.0, 30.0, -0.11875106261662293652),
            (1.0, 250.5, -0.050371040190527661183),
            (0.0, 1999.0, 0.0176131598064800853),
            (2.5, 600.0, -0.0012764565622538990613),
            (3.0, 12.0, 0.19513693953109267725),
            (1.5, 2000.0, 0.0065642309621581829682),
            (4.0, 40.0, -0.017856747643515080881),
        ];
        for &(nu, x, want) in cases {
            let got = bessel_j(nu, x).unwrap();
            assert!((got - want).abs() <= 1e-10 * want.abs(), "J_{nu}({x}) = {got}, want {want}");
        }
        let near_zero = bessel_j(1.5, 17.2).unwrap();
        assert!((near_zero - 0.0039860458751416987106).abs() < 1e-13);
    }

    #[test]
    fn unsupported_orders() {
        assert_eq!(bessel_j(0.3, 1.0), Err(Error::UnsupportedOrder(0.3)));
        assert_eq!(bessel_j(-1.0, 1.0), Err(Error::UnsupportedOrder(-1.0)));
        assert!(bessel_j(1.0, -1.0).is_err());
    }

    #[test]
    fn scaled_series_at_origin() {
        // J_{d/2}(x)/x^{d/2} -> 1/(2^{d/2} Γ(d/2+1))
        assert!((bessel_j_scaled_series(0.5, 0.0) - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!((bessel_j_scaled_series(1.0, 0.0) - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn matches_power_series_below_ten(twice_nu in 0u32..=8, x in 0.0f64..10.0) {
            let nu = twice_nu as f64 / 2.0;
            let a = bessel_j(nu, x).unwrap();
            let b = bessel_j_series(nu, x).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-3));
        }

        #[test]
        fn three_term_recurrence(n in 1u32..=6, x in 0.5f64..800.0) {
            // J_{ν-1} + J_{ν+1} = (2ν/x) J_ν
            let nu = n as f64 / 2.0 + 0.5;
            let lhs = bessel_j(nu - 1.0, x).unwrap() + bessel_j(nu + 1.0, x).unwrap();
            let rhs = 2.0 * nu / x * bessel_j(nu, x).unwrap();
            let scale = (2.0 / (PI * x)).sqrt().min(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }
    }
}
