//! Membership form, parabolic regions, and containment-lemma sweeps on free step-2 groups.
//!
//! Coordinates follow the built-in `free_step2(r)` basis: v = (p_1..p_r), then w = (p_ij) for
//! i < j in lexicographic order. The unit ball of d at the origin is {‖p‖ ≤ R}.

mod admissible;
mod packing;
mod sweep;

pub use admissible::{admissible_epsilon, lemma_margins, EpsilonChoice, Interval};
pub use packing::{sphere_packing_estimate, PackingEstimate};
pub use sweep::{
    aq_exact_check, calibrate_delta, lemma_sweep, AqExactReport, DeltaCalibration, Lemma, SweepReport, Violation,
    AQ_EXCLUSION, SWEEP_TOLERANCE,
};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{rat, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    #[serde(with = "crate::io::rational")]
    pub a: Rational,
    #[serde(with = "crate::io::rational")]
    pub a_prime: Rational,
    #[serde(rename = "R", with = "crate::io::rational")]
    pub radius: Rational,
    pub rank: usize,
}

impl RegionParams {
    /// a = 9/10, a′ = 19/10.
    pub fn new(rank: usize, radius: Rational) -> Result<Self> {
        let p = RegionParams { a: rat(9, 10), a_prime: rat(19, 10), radius, rank };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank < 2 {
            return Err(Error::Input("rank must be at least 2".into()));
        }
        if !self.radius.is_positive() {
            return Err(Error::Input("R must be positive".into()));
        }
        if !(self.a.is_positive() && self.a < self.a_prime) {
            return Err(Error::Input("need 0 < a < a_prime".into()));
        }
        Ok(())
    }

    /// r + r(r−1)/2.
    pub fn dim(&self) -> usize {
        self.rank + self.rank * (self.rank - 1) / 2
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.rank).flat_map(|i| (i + 1..self.rank).map(move |j| (i, j))).collect()
    }

    fn check(&self, x: &[impl Sized]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }
}

/// A_p(q) = ‖q‖² − 2⟨p,q⟩ + Σ_{i<j} (p_ij − q_ij)(p_i q_j − q_i p_j) + ¼(p_i q_j − q_i p_j)².
pub fn a_form<S: Scalar>(p: &[S], q: &[S], params: &RegionParams) -> Result<S> {
    params.check(p)?;
    params.check(q)?;
    let quarter = rat(1, 4);
    let mut acc = S::additive_zero();
    for (pk, qk) in p.iter().zip(q) {
        let pq = pk.clone() * qk.clone();
        acc = acc + qk.clone() * qk.clone() - pq.clone() - pq;
    }
    for (k, (i, j)) in params.pairs().into_iter().enumerate() {
        let idx = params.rank + k;
        let c = p[i].clone() * q[j].clone() - q[i].clone() * p[j].clone();
        acc = acc + (p[idx].clone() - q[idx].clone()) * c.clone() + (c.clone() * c).scale(&quarter, 0.25);
    }
    Ok(acc)
}

fn split_sq<S: Scalar>(x: &[S], rank: usize) -> (S, S) {
    let sq = |s: &[S]| s.iter().fold(S::additive_zero(), |acc, c| acc + c.clone() * c.clone());
    (sq(&x[..rank]), sq(&x[rank..]))
}

/// ‖v‖² and ‖w‖².
pub fn layer_norms_sq<S: Scalar>(x: &[S], params: &RegionParams) -> Result<(S, S)> {
    params.check(x)?;
    Ok(split_sq(x, params.rank))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// R‖w‖ > a′‖v‖².
    PaPrime,
    /// a′‖v‖² ≥ R‖w‖ > a‖v‖².
    PaMinusPaPrime,
    /// R‖w‖ ≤ a‖v‖².
    Complement,
}

/// R‖w‖ > c‖v‖², compared as R²‖w‖² > c²‖v‖⁴ (both sides are non-negative).
fn in_parabolic(v2: &Rational, w2: &Rational, c: &Rational, radius: &Rational) -> bool {
    radius * radius * w2 > c * c * v2 * v2
}

/// Exact classification into P_a′, P_a ∖ P_a′, or the complement of P_a.
pub fn region_classify(p: &[Rational], params: &RegionParams) -> Result<Region> {
    let (v2, w2) = layer_norms_sq(p, params)?;
    Ok(if in_parabolic(&v2, &w2, &params.a_prime, &params.radius) {
        Region::PaPrime
    } else if in_parabolic(&v2, &w2, &params.a, &params.radius) {
        Region::PaMinusPaPrime
    } else {
        Region::Complement
    })
}

/// Float classification, for sampling.
pub fn region_classify_f64(p: &[f64], rank: usize, radius: f64, a: f64, a_prime: f64) -> Region {
    let (v2, w2) = split_sq(p, rank);
    let lhs = radius * w2.sqrt();
    if lhs > a_prime * v2 {
        Region::PaPrime
    } else if lhs > a * v2 {
        Region::PaMinusPaPrime
    } else {
        Region::Complement
    }
}

/// Angles in [0, π] between v-parts and between w-parts. A zero projection gives angle 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerAngles {
    pub v: f64,
    pub w: f64,
    /// Some projection was zero and the convention was applied.
    pub degenerate: bool,
}

pub fn angle(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (a.iter().map(|x| x * x).sum::<f64>().sqrt(), b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    // atan2 of (|a∧b|, a·b) stays accurate near 0 and π.
    let cross2: f64 = (0..a.len())
        .flat_map(|i| (i + 1..a.len()).map(move |j| (i, j)))
        .fold(0.0, |acc, (i, j)| acc + (a[i] * b[j] - a[j] * b[i]).powi(2));
    Some(cross2.sqrt().atan2(dot))
}

pub fn layer_angle(p: &[f64], q: &[f64], params: &RegionParams) -> Result<LayerAngles> {
    params.check(p)?;
    params.check(q)?;
    let r = params.rank;
    let v = angle(&p[..r], &q[..r]);
    let w = angle(&p[r..], &q[r..]);
    Ok(LayerAngles { v: v.unwrap_or(0.0), w: w.unwrap_or(0.0), degenerate: v.is_none() || w.is_none() })
}

/// Outcome of the three norm bounds at one point; `None` when the hypothesis does not apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// p ∈ B ∖ P_a ⇒ ‖w‖ ≤ (R/2a)(√(1+4a²) − 1).
    pub w_upper: Option<bool>,
    /// p ∈ ∂B ∩ P_a ⇒ ‖w‖ ≥ (R/2a)(√(1+4a²) − 1).
    pub w_lower: Option<bool>,
    /// p ∈ ∂B ∖ P_a ⇒ ‖v‖ ≥ (R/a)√((√(1+4a²) − 1)/2).
    pub v_lower: Option<bool>,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        [self.w_upper, self.w_lower, self.v_lower].iter().all(|b| b.unwrap_or(true))
    }
}

/// Checks the bounds exactly for the parameter `a` (pass `a_prime` in `a` to test P_a′).
///
/// Each bound is a root of a quadratic, so it is decided by rational comparisons: with W = ‖w‖²,
/// V = ‖v‖², t the positive root of a t² + R t − aR², ‖w‖ ≥ t ⇔ R√W ≥ a(R² − W), and
/// ‖v‖² ≥ R²(√(1+4a²) − 1)/(2a²) ⇔ a²V² + R²V − R⁴ ≥ 0.
pub fn check_bounds(p: &[Rational], params: &RegionParams) -> Result<BoundCheck> {
    let (v2, w2) = layer_norms_sq(p, params)?;
    let (a, r) = (&params.a, &params.radius);
    let r2 = r * r;
    let norm2 = &v2 + &w2;
    let in_pa = in_parabolic(&v2, &w2, a, r);
    let on_sphere = norm2 == r2;
    // R√W vs a(R² − W): sign of R√W − a(R² − W).
    let w_vs_root = || {
        let rhs = a * (&r2 - &w2);
        if !rhs.is_positive() {
            if rhs.is_zero() && w2.is_zero() {
                std::cmp::Ordering::Equal
            } else {
                std::cmp::Ordering::Greater
            }
        } else {
            (&r2 * &w2).cmp(&(&rhs * &rhs))
        }
    };
    let w_upper = (!in_pa && norm2 <= r2).then(|| w_vs_root() != std::cmp::Ordering::Greater);
    let w_lower = (in_pa && on_sphere).then(|| w_vs_root() != std::cmp::Ordering::Less);
    let v_lower = (!in_pa && on_sphere).then(|| !(a * a * &v2 * &v2 + &r2 * &v2 - &r2 * &r2).is_negative());
    Ok(BoundCheck { w_upper, w_lower, v_lower })
}

/// ‖p‖² = R².
pub fn on_boundary(p: &[Rational], params: &RegionParams) -> Result<bool> {
    let (v2, w2) = layer_norms_sq(p, params)?;
    Ok(v2 + w2 == &params.radius * &params.radius)
}

/// Dilation δ_λ on F_{r2}: v ↦ λv, w ↦ λ²w.
pub fn dilate_exact(p: &[Rational], lambda: &Rational, params: &RegionParams) -> Result<Vec<Rational>> {
    params.check(p)?;
    let l2 = lambda * lambda;
    Ok(p.iter().enumerate().map(|(k, x)| if k < params.rank { x * lambda } else { x * &l2 }).collect())
}

pub fn dilate_f64(p: &[f64], lambda: f64, rank: usize) -> Vec<f64> {
    p.iter().enumerate().map(|(k, x)| if k < rank { x * lambda } else { x * lambda * lambda }).collect()
}
