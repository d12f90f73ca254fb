//! Distances whose unit ball at the identity is a Euclidean ball of radius R.

use num_traits::{Signed, Zero};

use crate::algebra::GradedGroup;
use crate::error::{Error, Result};
use crate::scalar::{exact_root, Rational, Scalar};

use super::Membership;

/// The λ > 0 with Σ x_i² λ^{-2 w_i} = R², or 0 for x = 0.
///
/// Newton on u = ln λ for g(u) = ln Σ x_i² e^{-2 w_i u} − 2 ln R. g is convex and decreasing,
/// so Newton started left of the root increases monotonically to it.
pub fn hs_norm(x: &[f64], weights: &[f64], r: f64) -> Result<f64> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let ln_r = r.ln();
    let terms: Vec<(f64, f64)> =
        x.iter().zip(weights).filter(|(v, _)| **v != 0.0).map(|(v, w)| (2.0 * v.abs().ln(), 2.0 * w)).collect();
    if terms.is_empty() {
        return Ok(0.0);
    }
    // Each single term reaches R² here, so g(lo) >= 0.
    let mut u = terms.iter().map(|(la, b)| (la - 2.0 * ln_r) / b).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..100 {
        let (g, slope) = log_sum(&terms, u);
        let g = g - 2.0 * ln_r;
        if g <= 0.0 {
            break;
        }
        let step = g / slope;
        u += step;
        if step <= 1e-16 * (1.0 + u.abs()) {
            break;
        }
    }
    Ok(u.exp())
}

/// `(ln Σ e^{la - b u}, Σ b e^{..} / Σ e^{..})`, stabilized.
fn log_sum(terms: &[(f64, f64)], u: f64) -> (f64, f64) {
    let m = terms.iter().map(|(la, b)| la - b * u).fold(f64::NEG_INFINITY, f64::max);
    let (mut s, mut sb) = (0.0, 0.0);
    for (la, b) in terms {
        let e = (la - b * u - m).exp();
        s += e;
        sb += b * e;
    }
    (m + s.ln(), sb / s)
}

/// Reference solver by plain bisection on λ; used as an independent oracle in tests.
pub fn hs_norm_bisection(x: &[f64], weights: &[f64], r: f64) -> f64 {
    if x.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let n = x.len() as f64;
    let f = |l: f64| x.iter().zip(weights).map(|(v, w)| v * v * l.powf(-2.0 * w)).sum::<f64>() - r * r;
    let mut hi = x
        .iter()
        .zip(weights)
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, w)| (v.abs() * n.sqrt() / r).powf(1.0 / w))
        .fold(0.0, f64::max);
    let mut lo =
        x.iter().zip(weights).filter(|(v, _)| **v != 0.0).map(|(v, w)| (v.abs() / r).powf(1.0 / w)).fold(0.0, f64::max);
    if f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Closed form on Hⁿ (weights 1,…,1,2): d² = (A + √(A² + 4R²z²)) / (2R²).
pub fn heisenberg_closed_form(x: &[f64], r: f64) -> f64 {
    let (z, h) = x.split_last().expect("nonempty");
    let a: f64 = h.iter().map(|v| v * v).sum();
    let disc = (a * a + 4.0 * r * r * z * z).sqrt();
    ((a + disc) / (2.0 * r * r)).sqrt()
}

pub fn hs_distance<S: Scalar>(p: &[S], q: &[S], r: &Rational, group: &GradedGroup) -> Result<f64> {
    let x = group.mul_slices(&neg(p), q);
    let xf: Vec<f64> = x.iter().map(Scalar::as_f64).collect();
    hs_norm(&xf, group.algebra().weights_f64(), r.as_f64())
}

fn neg<S: Scalar>(p: &[S]) -> Vec<S> {
    p.iter().map(|c| -c.clone()).collect()
}

/// Exact comparison of ‖δ_{1/ρ}(x)‖² with R² for x = p⁻¹q.
pub fn hs_membership_exact(
    center: &[Rational],
    radius: &Rational,
    q: &[Rational],
    r: &Rational,
    group: &GradedGroup,
) -> Result<Membership> {
    let x = group.mul_slices(&neg(center), q);
    hs_norm_membership_exact(&x, radius, r, group)
}

/// Exact comparison for the identity-centered ball: is d(e, x) < ρ, = ρ or > ρ?
pub fn hs_norm_membership_exact(
    x: &[Rational],
    radius: &Rational,
    r: &Rational,
    group: &GradedGroup,
) -> Result<Membership> {
    if !radius.is_positive() {
        return Ok(if x.iter().all(Zero::is_zero) { Membership::Boundary } else { Membership::Outside });
    }
    let factors = group.dilation_factors(&radius.recip())?;
    let s = x.iter().zip(&factors).fold(Rational::zero(), |acc, (v, f)| {
        let y = v * f;
        acc + &y * &y
    });
    Ok(Membership::from_cmp(s.cmp(&(r * r))))
}

/// d(e, x) when it is rational: x has one nonzero coordinate whose weight-root is rational.
pub fn hs_exact_norm(x: &[Rational], r: &Rational, group: &GradedGroup) -> Option<Rational> {
    let nz: Vec<usize> = (0..x.len()).filter(|&i| !x[i].is_zero()).collect();
    match nz.as_slice() {
        [] => Some(Rational::zero()),
        [i] => {
            let w = &group.algebra().weights()[*i];
            let base = x[*i].abs() / r;
            // base^{1/w} with w = a/b: (base^b)^{1/a}
            let a: u64 = w.numer().try_into().ok()?;
            let b: u64 = w.denom().try_into().ok()?;
            exact_root(&crate::scalar::pow_rational(&base, b), a)
        }
        _ => None,
    }
}
