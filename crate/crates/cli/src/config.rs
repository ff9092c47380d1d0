//! Command-line values parsed into validated library types.

use std::fmt;

use acc_specgram::geometry::Ball;
use acc_specgram::variance::log_spaced;
use acc_specgram::{Kernel, Region};
use serde::Serialize;

/// A configuration problem, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(field: &str, msg: impl fmt::Display) -> anyhow::Error {
    UsageError(format!("{field}: {msg}")).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub fn parse_kernel(name: Option<&str>, dim: Option<usize>, cdim: Option<usize>) -> anyhow::Result<Kernel> {
    let name = name.ok_or_else(|| usage("kernel", "required"))?;
    match name {
        "sine" => {
            if dim.is_some_and(|d| d != 1) || cdim.is_some() {
                return Err(usage("kernel", "sine is the one-dimensional paley-wiener kernel; drop --dim/--cdim"));
            }
            Ok(Kernel::sine())
        }
        "paley-wiener" | "pw" => {
            if cdim.is_some() {
                return Err(usage("cdim", "only used by ginibre"));
            }
            Kernel::paley_wiener(dim.unwrap_or(1)).map_err(|e| usage("dim", e))
        }
        "ginibre" => {
            if dim.is_some() {
                return Err(usage("dim", "ginibre takes its complex dimension via --cdim"));
            }
            Kernel::ginibre(cdim.unwrap_or(1)).map_err(|e| usage("cdim", e))
        }
        other => Err(usage("kernel", format!("unknown kernel '{other}' (expected sine, paley-wiener or ginibre)"))),
    }
}

fn numbers(field: &str, s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|_| usage(field, format!("'{t}' is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(usage(field, format!("'{t}' is not finite")))
            }
        })
        .collect()
}

fn ball_from(field: &str, values: &[f64], dim: usize) -> anyhow::Result<Ball> {
    match values.len() {
        1 => Ball::centered(dim, values[0]),
        n if n == dim + 1 => Ball::new(values[..dim].to_vec(), values[dim]),
        n => return Err(usage(field, format!("a ball in dimension {dim} takes 1 or {} numbers, got {n}", dim + 1))),
    }
    .map_err(|e| usage(field, e))
}

/// `interval:a,b`, `cube:lo,hi`, `box:lo1,hi1,...`, `ball:[c1,...,cd,]r` or
/// `union:ball/ball/...`, in the ambient dimension of the kernel.
pub fn parse_region(spec: &str, dim: usize) -> anyhow::Result<Region> {
    let (kind, body) = spec.split_once(':').ok_or_else(|| usage("region", format!("'{spec}' has no 'kind:' prefix")))?;
    let region = match kind {
        "interval" => {
            if dim != 1 {
                return Err(usage("region", format!("interval needs a one-dimensional kernel, got dimension {dim}")));
            }
            let v = numbers("region", body)?;
            if v.len() != 2 {
                return Err(usage("region", "interval takes two numbers"));
            }
            Region::cuboid(vec![v[0]], vec![v[1]])
        }
        "cube" => {
            let v = numbers("region", body)?;
            if v.len() != 2 {
                return Err(usage("region", "cube takes two numbers"));
            }
            Region::cuboid(vec![v[0]; dim], vec![v[1]; dim])
        }
        "box" => {
            let v = numbers("region", body)?;
            if v.len() != 2 * dim {
                return Err(usage("region", format!("box in dimension {dim} takes {} numbers", 2 * dim)));
            }
            Region::cuboid(v.iter().step_by(2).copied().collect(), v.iter().skip(1).step_by(2).copied().collect())
        }
        "ball" => return Ok(Region::Ball(ball_from("region", &numbers("region", body)?, dim)?)),
        "union" => {
            let balls = body.split('/').map(|b| ball_from("region", &numbers("region", b)?, dim)).collect::<anyhow::Result<Vec<_>>>()?;
            Region::disjoint_balls(balls)
        }
        other => return Err(usage("region", format!("unknown region kind '{other}'"))),
    };
    region.map_err(|e| match e {
        acc_specgram::Error::InvalidRegion(msg) => usage("region", msg),
        other => usage("region", other),
    })
}

/// `a,b,c` or `lo:hi:logN`.
pub fn parse_r_list(spec: &str) -> anyhow::Result<Vec<f64>> {
    let values = if let Some((lo, rest)) = spec.split_once(':') {
        let (hi, count) = rest.split_once(':').ok_or_else(|| usage("R", "range syntax is lo:hi:logN"))?;
        let count = count.strip_prefix("log").ok_or_else(|| usage("R", "range syntax is lo:hi:logN"))?;
        let n: usize = count.parse().map_err(|_| usage("R", format!("'{count}' is not a point count")))?;
        let lo = numbers("R", lo)?;
        let hi = numbers("R", hi)?;
        if lo.len() != 1 || hi.len() != 1 {
            return Err(usage("R", "range syntax is lo:hi:logN"));
        }
        log_spaced(lo[0], hi[0], n).map_err(|e| usage("R", e))?
    } else {
        numbers("R", spec)?
    };
    if values.iter().any(|&r| r <= 0.0) {
        return Err(usage("R", "values must be positive"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("R", "values must be strictly increasing"));
    }
    Ok(values)
}

pub fn positive(field: &str, v: Option<f64>) -> anyhow::Result<Option<f64>> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(usage(field, format!("must be finite and > 0, got {x}"))),
        _ => Ok(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_lists() {
        assert_eq!(parse_r_list("2,4,8").unwrap(), vec![2.0, 4.0, 8.0]);
        let v = parse_r_list("10:200:log20").unwrap();
        assert_eq!(v.len(), 20);
        assert_eq!((v[0], v[19]), (10.0, 200.0));
        assert!(parse_r_list("4,2").is_err());
        assert!(parse_r_list("-1,2").is_err());
        assert!(parse_r_list("1:10:20").is_err());
        assert!(parse_r_list("1,x").is_err());
    }

    #[test]
    fn regions() {
        assert_eq!(parse_region("interval:-1,1", 1).unwrap().volume(), 2.0);
        assert_eq!(parse_region("cube:0,2", 2).unwrap().volume(), 4.0);
        assert_eq!(parse_region("box:0,1,0,3", 2).unwrap().volume(), 3.0);
        assert!((parse_region("ball:1", 2).unwrap().volume() - std::f64::consts::PI).abs() < 1e-15);
        assert!(matches!(parse_region("ball:3,4,1", 2).unwrap(), Region::Ball(_)));
        assert_eq!(parse_region("union:-2,1/2,1", 1).unwrap().volume(), 4.0);
        let err = parse_region("union:-1,1/1,1.5", 1).unwrap_err().to_string();
        assert!(err.contains("union: balls overlap"), "{err}");
        assert!(parse_region("interval:0,1", 2).is_err());
        assert!(parse_region("box:0,1", 2).is_err());
        assert!(parse_region("blob:1", 1).is_err());
    }

    #[test]
    fn kernels() {
        let err = parse_kernel(None, None, None).unwrap_err().to_string();
        assert_eq!(err, "kernel: required");
        assert_eq!(parse_kernel(Some("paley-wiener"), Some(2), None).unwrap().ambient_dim(), 2);
        assert_eq!(parse_kernel(Some("ginibre"), None, Some(2)).unwrap().ambient_dim(), 4);
        assert!(parse_kernel(Some("ginibre"), Some(2), None).is_err());
        assert!(parse_kernel(Some("paley-wiener"), Some(9), None).is_err());
    }
}
