//! Sub-Riemannian distance on the first Heisenberg group (law z + z' + ½(xy' − yx')).
//!
//! Geodesics from the identity project to circular arcs; an arc of central angle φ over a chord of
//! length r encloses area r²(φ − sin φ)/(8 sin²(φ/2)) and has length rφ/(2 sin(φ/2)).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Area-to-chord ratio μ(φ) = (φ − sin φ) / (8 sin²(φ/2)), increasing on (0, 2π).
fn mu(phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    phi_minus_sin(phi) / (8.0 * s * s)
}

/// μ(2π − ε), written so that ε keeps full relative precision near 2π.
fn mu_reflected(eps: f64) -> f64 {
    let s = (0.5 * eps).sin();
    (2.0 * PI - eps + eps.sin()) / (8.0 * s * s)
}

fn phi_minus_sin(phi: f64) -> f64 {
    if phi < 1e-2 {
        let p2 = phi * phi;
        phi * p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0 * (1.0 - p2 / 72.0)))
    } else {
        phi - phi.sin()
    }
}

/// Root of the monotone `f(s) = target` on (0, π]: Newton with a bisection fallback.
fn solve_monotone(f: &dyn Fn(f64) -> f64, increasing: bool, target: f64, guess: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, PI);
    let mut s = guess.clamp(f64::MIN_POSITIVE, PI);
    for _ in 0..300 {
        let v = f(s) - target;
        if (v > 0.0) == increasing {
            hi = s;
        } else {
            lo = s;
        }
        if hi - lo <= 1e-15 * hi {
            return Ok(s);
        }
        let h = 1e-7 * s;
        let d = (f(s + h) - f(s - h)) / (2.0 * h);
        let mut next = s - v / d;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-16 * s {
            return Ok(next);
        }
        s = next;
    }
    if hi - lo <= 1e-10 * hi {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::Solver(format!("arc angle equation did not converge for ratio {target}")))
    }
}

/// Arc angle φ for μ(φ) = target, returned as (φ, sin(φ/2)).
fn solve_angle(target: f64) -> Result<(f64, f64)> {
    if target <= PI / 8.0 {
        let phi = solve_monotone(&mu, true, target, 12.0 * target)?;
        Ok((phi, (0.5 * phi).sin()))
    } else {
        let eps = solve_monotone(&mu_reflected, false, target, (PI / target).sqrt())?;
        Ok((2.0 * PI - eps, (0.5 * eps).sin()))
    }
}

/// Distance from the identity to (x, y, z) when (aX, aY) is orthonormal.
pub fn cc_norm_h1(p: &[f64], a: f64) -> Result<f64> {
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (x, y, z) = (p[0], p[1], p[2]);
    let r2 = x * x + y * y;
    let r = r2.sqrt();
    let az = z.abs();
    let d1 = if r == 0.0 {
        2.0 * (PI * az).sqrt()
    } else if az < 1e-14 * r2 {
        r
    } else {
        let (phi, half_sin) = solve_angle(az / r2)?;
        r * phi / (2.0 * half_sin)
    };
    Ok(d1 / a)
}

/// `p⁻¹ q` in H¹.
pub fn h1_difference(p: &[f64], q: &[f64]) -> [f64; 3] {
    [q[0] - p[0], q[1] - p[1], q[2] - p[2] - 0.5 * (p[0] * q[1] - p[1] * q[0])]
}

pub fn cc_distance_h1(p: &[f64], q: &[f64], a: f64) -> Result<f64> {
    cc_norm_h1(&h1_difference(p, q), a)
}
