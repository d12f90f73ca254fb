//! Quasi-distances defined by a unit-ball membership oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shipped unit balls in the plane (or a Euclidean ball in any dimension).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallOracle {
    /// Closed Euclidean ball of radius r.
    Euclidean { radius: f64 },
    /// Closed unit disk together with the segment [−2, 2] × {0}.
    DiskWithSegment,
    /// Closed unit disk minus [−1, −1/2) × {0} and (1/2, 1] × {0}.
    DiskMinusSegments,
}

impl BallOracle {
    pub fn contains(&self, x: &[f64]) -> bool {
        let n2: f64 = x.iter().map(|v| v * v).sum();
        match *self {
            BallOracle::Euclidean { radius } => n2 <= radius * radius,
            BallOracle::DiskWithSegment => n2 <= 1.0 || (x[1] == 0.0 && x[0].abs() <= 2.0),
            BallOracle::DiskMinusSegments => n2 <= 1.0 && !(x[1] == 0.0 && x[0].abs() > 0.5),
        }
    }

    /// A radius containing the whole ball.
    pub fn euclidean_bound(&self) -> f64 {
        match *self {
            BallOracle::Euclidean { radius } => radius,
            BallOracle::DiskWithSegment => 2.0,
            BallOracle::DiskMinusSegments => 1.0,
        }
    }
}

/// inf{λ > 0 : δ_{1/λ}(x) ∈ K} by bracketing and bisection (relative width 1e−12).
///
/// K must contain a neighbourhood of 0 and satisfy the closed-interval property along dilation
/// orbits; an inconsistent oracle shows up as a bracketing failure.
pub fn unit_ball_norm(k: &dyn Fn(&[f64]) -> bool, x: &[f64], weights: &[f64]) -> Result<f64> {
    if x.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let inside = |l: f64| {
        let y: Vec<f64> = x.iter().zip(weights).map(|(v, w)| v * l.powf(-w)).collect();
        k(&y)
    };
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    if inside(1.0) {
        let mut n = 0;
        while inside(lo) {
            lo *= 0.5;
            n += 1;
            if n > 2000 {
                return Err(Error::Oracle("ball oracle is unbounded along the orbit".into()));
            }
        }
    } else {
        let mut n = 0;
        while !inside(hi) {
            hi *= 2.0;
            n += 1;
            if n > 2000 {
                return Err(Error::Oracle("ball oracle misses a neighbourhood of the identity".into()));
            }
        }
    }
    if hi == lo {
        hi = lo * 2.0;
        if !inside(hi) {
            return Err(Error::Oracle("bracketing failed".into()));
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
