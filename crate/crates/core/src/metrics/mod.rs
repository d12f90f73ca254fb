//! Left-invariant quasi-distances on graded groups (and a few companion spaces).
//!
//! Points are plain coordinate slices. Product kinds take the concatenation of the two factor
//! coordinates; finite spaces take a single 1-based label.

pub mod cc;
pub mod finite;
pub mod hs;
pub mod oracle;
pub mod quotient;

use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algebra::{builtin_group, GradedGroup, GroupSpec};
use crate::error::{Error, Result};
use crate::scalar::{exact_root, fmt_rational, int, pow_rational, rational_to_f64, Rational};

pub use finite::{FiniteMetricSpace, SmallRatio};
pub use oracle::BallOracle;
pub use quotient::QuotientDistance;

/// Position of a point relative to a closed ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

impl Membership {
    /// From the comparison of a distance (or a monotone proxy) with the radius.
    pub fn from_cmp(o: Ordering) -> Self {
        match o {
            Ordering::Less => Membership::Inside,
            Ordering::Equal => Membership::Boundary,
            Ordering::Greater => Membership::Outside,
        }
    }

    pub fn in_ball(self) -> bool {
        self != Membership::Outside
    }
}

/// A nonnegative number of the form `base^(1/k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub base: Rational,
    pub k: u64,
}

impl Root {
    pub fn rational(q: Rational) -> Self {
        Root { base: q, k: 1 }
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        if q.is_negative() {
            return Ordering::Greater;
        }
        self.base.cmp(&pow_rational(q, self.k))
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.base).powf(1.0 / self.k as f64)
    }
}

#[derive(Clone, Debug)]
pub enum QuasiDistance {
    /// Unit ball at the identity is the Euclidean ball of radius `r`.
    Hs {
        group: Arc<GradedGroup>,
        r: Rational,
    },
    UnitBall {
        group: Arc<GradedGroup>,
        oracle: BallOracle,
    },
    /// `d^(1/t)`, homogeneous on the t-power.
    Power {
        inner: Box<QuasiDistance>,
        t: Rational,
    },
    ProductMax {
        a: Box<QuasiDistance>,
        b: Box<QuasiDistance>,
    },
    /// `(d_a^r + d_b^r)^(1/r)`.
    LpCombo {
        a: Box<QuasiDistance>,
        b: Box<QuasiDistance>,
        r: Rational,
    },
    Quotient(Box<QuotientDistance>),
    /// Sub-Riemannian distance on H¹ with (aX, aY) orthonormal.
    CcH1 {
        scale: f64,
    },
    Finite(Arc<FiniteMetricSpace>),
}

impl QuasiDistance {
    pub fn hs(group: GradedGroup, r: Rational) -> Result<Self> {
        if !r.is_positive() {
            return Err(Error::Input("R must be positive".into()));
        }
        Ok(QuasiDistance::Hs { group: Arc::new(group), r })
    }

    /// Euclidean distance on ℝⁿ.
    pub fn euclidean(n: usize) -> Self {
        let g = builtin_group(&GroupSpec::Abelian(vec![int(1); n])).expect("abelian group");
        QuasiDistance::Hs { group: Arc::new(g), r: int(1) }
    }

    pub fn power(inner: QuasiDistance, t: Rational) -> Result<Self> {
        if !t.is_positive() {
            return Err(Error::Input("power exponent must be positive".into()));
        }
        Ok(QuasiDistance::Power { inner: Box::new(inner), t })
    }

    pub fn product_max(a: QuasiDistance, b: QuasiDistance) -> Self {
        QuasiDistance::ProductMax { a: Box::new(a), b: Box::new(b) }
    }

    pub fn lp_combo(a: QuasiDistance, b: QuasiDistance, r: Rational) -> Result<Self> {
        if r < int(1) {
            return Err(Error::Input("combination exponent must be at least 1".into()));
        }
        Ok(QuasiDistance::LpCombo { a: Box::new(a), b: Box::new(b), r })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            QuasiDistance::Hs { .. } => "hs",
            QuasiDistance::UnitBall { .. } => "unit_ball_oracle",
            QuasiDistance::Power { .. } => "power",
            QuasiDistance::ProductMax { .. } => "product_max",
            QuasiDistance::LpCombo { .. } => "lp_combo",
            QuasiDistance::Quotient(_) => "quotient",
            QuasiDistance::CcH1 { .. } => "cc_h1",
            QuasiDistance::Finite(_) => "finite_space",
        }
    }

    /// Number of coordinates of a point.
    pub fn dim(&self) -> usize {
        match self {
            QuasiDistance::Hs { group, .. } | QuasiDistance::UnitBall { group, .. } => group.dim(),
            QuasiDistance::Power { inner, .. } => inner.dim(),
            QuasiDistance::ProductMax { a, b } | QuasiDistance::LpCombo { a, b, .. } => a.dim() + b.dim(),
            QuasiDistance::Quotient(q) => q.target.dim(),
            QuasiDistance::CcH1 { .. } => 3,
            QuasiDistance::Finite(_) => 1,
        }
    }

    /// The group whose law is used for `p⁻¹q`, for single-group kinds.
    pub fn group(&self) -> Option<Arc<GradedGroup>> {
        match self {
            QuasiDistance::Hs { group, .. } | QuasiDistance::UnitBall { group, .. } => Some(group.clone()),
            QuasiDistance::Power { inner, .. } => inner.group(),
            QuasiDistance::Quotient(q) => Some(q.target.clone()),
            _ => None,
        }
    }

    /// Homogeneity exponents per coordinate (`None` for finite spaces).
    pub fn weights(&self) -> Option<Vec<Rational>> {
        match self {
            QuasiDistance::Hs { group, .. } | QuasiDistance::UnitBall { group, .. } => {
                Some(group.algebra().weights().to_vec())
            }
            QuasiDistance::Power { inner, t } => Some(inner.weights()?.iter().map(|w| w * t).collect()),
            QuasiDistance::ProductMax { a, b } | QuasiDistance::LpCombo { a, b, .. } => {
                let mut w = a.weights()?;
                w.extend(b.weights()?);
                Some(w)
            }
            QuasiDistance::Quotient(q) => Some(q.target.algebra().weights().to_vec()),
            QuasiDistance::CcH1 { .. } => Some(vec![int(1), int(1), int(2)]),
            QuasiDistance::Finite(_) => None,
        }
    }

    pub fn weights_f64(&self) -> Option<Vec<f64>> {
        match self {
            QuasiDistance::Hs { group, .. } | QuasiDistance::UnitBall { group, .. } => {
                Some(group.algebra().weights_f64().to_vec())
            }
            QuasiDistance::Power { inner, t } => {
                let t = rational_to_f64(t);
                Some(inner.weights_f64()?.iter().map(|w| w * t).collect())
            }
            QuasiDistance::ProductMax { a, b } | QuasiDistance::LpCombo { a, b, .. } => {
                let mut w = a.weights_f64()?;
                w.extend(b.weights_f64()?);
                Some(w)
            }
            QuasiDistance::Quotient(q) => Some(q.target.algebra().weights_f64().to_vec()),
            QuasiDistance::CcH1 { .. } => Some(vec![1.0, 1.0, 2.0]),
            QuasiDistance::Finite(_) => None,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        !matches!(self, QuasiDistance::Finite(_))
    }

    /// Whether ball membership can be decided in exact arithmetic for rational data.
    pub fn is_exact_capable(&self) -> bool {
        match self {
            QuasiDistance::Hs { .. } | QuasiDistance::Finite(_) => true,
            QuasiDistance::Power { inner, .. } => inner.is_exact_capable(),
            QuasiDistance::ProductMax { a, b } => a.is_exact_capable() && b.is_exact_capable(),
            QuasiDistance::LpCombo { a, b, r } => r.is_integer() && a.is_exact_capable() && b.is_exact_capable(),
            QuasiDistance::Quotient(q) => matches!(*q.inner, QuasiDistance::Hs { .. }),
            QuasiDistance::UnitBall { .. } | QuasiDistance::CcH1 { .. } => false,
        }
    }

    /// Whether d is continuous (the unit-ball oracles shipped here are not).
    pub fn is_continuous(&self) -> bool {
        match self {
            QuasiDistance::UnitBall { oracle, .. } => {
                matches!(oracle, BallOracle::Euclidean { .. })
            }
            QuasiDistance::Power { inner, .. } => inner.is_continuous(),
            QuasiDistance::ProductMax { a, b } | QuasiDistance::LpCombo { a, b, .. } => {
                a.is_continuous() && b.is_continuous()
            }
            QuasiDistance::Quotient(q) => q.inner.is_continuous(),
            _ => true,
        }
    }

    fn split_at(&self) -> usize {
        match self {
            QuasiDistance::ProductMax { a, .. } | QuasiDistance::LpCombo { a, .. } => a.dim(),
            _ => unreachable!("only product kinds split"),
        }
    }

    fn check(&self, p: &[impl Sized]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: p.len() });
        }
        Ok(())
    }

    /// `p⁻¹ q` in floating point.
    pub fn difference(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        self.check(p)?;
        self.check(q)?;
        match self {
            QuasiDistance::Hs { group, .. } | QuasiDistance::UnitBall { group, .. } => {
                Ok(group.mul_slices(&p.iter().map(|v| -v).collect::<Vec<_>>(), q))
            }
            QuasiDistance::Power { inner, .. } => inner.difference(p, q),
            QuasiDistance::ProductMax { a, b } | QuasiDistance::LpCombo { a, b, .. } => {
                let k = a.dim();
                let mut x = a.difference(&p[..k], &q[..k])?;
                x.extend(b.difference(&p[k..], &q[k..])?);
                Ok(x)
            }
            QuasiDistance::Quotient(qd) => Ok(qd.target.mul_slices(&p.iter().map(|v| -v).collect::<Vec<_>>(), q)),
            QuasiDistance::CcH1 { .. } => Ok(cc::h1_difference(p, q).to_vec()),
            QuasiDistance::Finite(_) => Err(Error::Input("finite spaces have no group law".into())),
        }
    }

    /// `p⁻¹ q` in exact arithmetic.
    pub fn difference_exact(&self, p: &[Rational], q: &[Rational]) -> Result<Vec<Rational>> {
        self.check(p)?;
        self.check(q)?;
        let neg = |p: &[Rational]| p.iter().map(|v| -v).collect::<Vec<_>>();
        match self {
            QuasiDistance::Hs { group, .. } | QuasiDistance::UnitBall { group, .. } => Ok(group.mul_slices(&neg(p), q)),
            QuasiDistance::Power { inner, .. } => inner.difference_exact(p, q),
            QuasiDistance::ProductMax { a, b } | QuasiDistance::LpCombo { a, b, .. } => {
                let k = a.dim();
                let mut x = a.difference_exact(&p[..k], &q[..k])?;
                x.extend(b.difference_exact(&p[k..], &q[k..])?);
                Ok(x)
            }
            QuasiDistance::Quotient(qd) => Ok(qd.target.mul_slices(&neg(p), q)),
            QuasiDistance::CcH1 { .. } => {
                let half = Rational::new(1.into(), 2.into());
                Ok(vec![&q[0] - &p[0], &q[1] - &p[1], &q[2] - &p[2] - half * (&p[0] * &q[1] - &p[1] * &q[0])])
            }
            QuasiDistance::Finite(_) => Err(Error::Input("finite spaces have no group law".into())),
        }
    }

    /// d(e, x).
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        match self {
            QuasiDistance::Hs { group, r } => hs::hs_norm(x, group.algebra().weights_f64(), rational_to_f64(r)),
            QuasiDistance::UnitBall { group, oracle } => {
                oracle::unit_ball_norm(&|y| oracle.contains(y), x, group.algebra().weights_f64())
            }
            QuasiDistance::Power { inner, t } => Ok(inner.norm(x)?.powf(1.0 / rational_to_f64(t))),
            QuasiDistance::ProductMax { a, b } => {
                let k = self.split_at();
                Ok(a.norm(&x[..k])?.max(b.norm(&x[k..])?))
            }
            QuasiDistance::LpCombo { a, b, r } => {
                let k = self.split_at();
                let r = rational_to_f64(r);
                let (u, v) = (a.norm(&x[..k])?, b.norm(&x[k..])?);
                Ok(if r == 1.0 { u + v } else { (u.powf(r) + v.powf(r)).powf(1.0 / r) })
            }
            QuasiDistance::Quotient(q) => q.norm(x),
            QuasiDistance::CcH1 { scale } => cc::cc_norm_h1(x, *scale),
            QuasiDistance::Finite(_) => Err(Error::Input("finite spaces have no identity".into())),
        }
    }

    /// d(p, q) in floating point.
    pub fn dist(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        if let QuasiDistance::Finite(s) = self {
            let (i, j) = (finite_label(p, s.len())?, finite_label(q, s.len())?);
            return Ok(s.distance_f64(i, j));
        }
        self.norm(&self.difference(p, q)?)
    }

    /// d(e, x) when it is of the form `base^(1/k)` with rational base.
    pub fn exact_norm(&self, x: &[Rational]) -> Option<Root> {
        match self {
            QuasiDistance::Hs { group, r } => hs::hs_exact_norm(x, r, group).map(Root::rational),
            QuasiDistance::Power { inner, t } => {
                // (base^(1/k))^(1/t) with t = a/b is (base^b)^(1/(k a)).
                let v = inner.exact_norm(x)?;
                let a: u64 = t.numer().try_into().ok()?;
                let b: u64 = t.denom().try_into().ok()?;
                Some(Root { base: pow_rational(&v.base, b), k: v.k * a })
            }
            QuasiDistance::ProductMax { a, b } => {
                let k = self.split_at();
                let (u, v) = (a.exact_norm(&x[..k])?, b.exact_norm(&x[k..])?);
                match (u.k, v.k) {
                    (1, 1) => Some(Root::rational(u.base.max(v.base))),
                    _ => {
                        // Compare u^{kv} with v^{ku}.
                        let lhs = pow_rational(&u.base, v.k);
                        let rhs = pow_rational(&v.base, u.k);
                        Some(if lhs >= rhs { u } else { v })
                    }
                }
            }
            QuasiDistance::LpCombo { a, b, r } if r.is_one() => {
                let k = self.split_at();
                let (u, v) = (a.exact_norm(&x[..k])?, b.exact_norm(&x[k..])?);
                if u.base.is_zero() {
                    Some(v)
                } else if v.base.is_zero() {
                    Some(u)
                } else if u.k == 1 && v.k == 1 {
                    Some(Root::rational(u.base + v.base))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Exact trichotomy for d(e, x) versus `radius`; `None` when this kind cannot decide exactly.
    pub fn norm_membership_exact(&self, x: &[Rational], radius: &Rational) -> Result<Option<Membership>> {
        self.check(x)?;
        Ok(match self {
            QuasiDistance::Hs { group, r } => Some(hs::hs_norm_membership_exact(x, radius, r, group)?),
            QuasiDistance::Power { inner, t } => {
                // d^(1/t) ≤ ρ iff d ≤ ρ^t.
                if !radius.is_positive() {
                    return Ok(Some(zero_radius(x)));
                }
                match rational_power(radius, t) {
                    Some(rt) => inner.norm_membership_exact(x, &rt)?,
                    None => None,
                }
            }
            QuasiDistance::ProductMax { a, b } => {
                let k = self.split_at();
                match (a.norm_membership_exact(&x[..k], radius)?, b.norm_membership_exact(&x[k..], radius)?) {
                    (Some(u), Some(v)) => Some(u.max(v)),
                    _ => None,
                }
            }
            QuasiDistance::LpCombo { a, b, r } => {
                let k = self.split_at();
                let (Some(u), Some(v)) = (a.exact_norm(&x[..k]), b.exact_norm(&x[k..])) else {
                    return Ok(None);
                };
                let Ok(r) = u64::try_from(r.to_integer()) else {
                    return Ok(None);
                };
                if !r.is_one() && !(r > 0 && radius.is_positive()) {
                    return Ok(None);
                }
                // Σ v_i^r against ρ^r, where v_i^r = base_i^(r/k_i).
                let target = pow_rational(radius, r);
                let (ur, vr) = (power_root(&u, r), power_root(&v, r));
                sum_cmp(&ur, &vr, &target).map(Membership::from_cmp)
            }
            QuasiDistance::Quotient(q) => match &*q.inner {
                QuasiDistance::Hs { group, r } => {
                    Some(hs::hs_norm_membership_exact(&q.lift_exact(x), radius, r, group)?)
                }
                _ => None,
            },
            QuasiDistance::Finite(_) | QuasiDistance::UnitBall { .. } | QuasiDistance::CcH1 { .. } => None,
        })
    }

    /// Exact trichotomy for `q` against the closed ball B(center, radius).
    pub fn membership_exact(
        &self,
        center: &[Rational],
        radius: &Rational,
        q: &[Rational],
    ) -> Result<Option<Membership>> {
        if let QuasiDistance::Finite(s) = self {
            let (i, j) = (finite_label_q(center, s.len())?, finite_label_q(q, s.len())?);
            let d = finite::small_to_big(&s.distance(i, j));
            return Ok(Some(Membership::from_cmp(d.cmp(radius))));
        }
        self.norm_membership_exact(&self.difference_exact(center, q)?, radius)
    }

    /// Float membership with an uncertainty band: `Boundary` means |d − ρ| ≤ margin.
    pub fn membership_float(&self, center: &[f64], radius: f64, q: &[f64], margin: f64) -> Result<Membership> {
        let d = self.dist(center, q)?;
        Ok(if d < radius - margin {
            Membership::Inside
        } else if d > radius + margin {
            Membership::Outside
        } else {
            Membership::Boundary
        })
    }

    /// δ_λ in floating point.
    pub fn dilate(&self, p: &[f64], lambda: f64) -> Result<Vec<f64>> {
        self.check(p)?;
        let w = self.weights_f64().ok_or_else(|| Error::Input("finite spaces have no dilations".into()))?;
        Ok(p.iter().zip(&w).map(|(v, w)| v * lambda.powf(*w)).collect())
    }

    /// δ_λ in exact arithmetic; fails when some λ^{w_i} is irrational.
    pub fn dilate_exact(&self, p: &[Rational], lambda: &Rational) -> Result<Vec<Rational>> {
        self.check(p)?;
        let w = self.weights().ok_or_else(|| Error::Input("finite spaces have no dilations".into()))?;
        p.iter()
            .zip(&w)
            .map(|(v, w)| {
                rational_power(lambda, w).map(|f| v * f).ok_or_else(|| {
                    Error::Inexact(format!("{}^{} is irrational", fmt_rational(lambda), fmt_rational(w)))
                })
            })
            .collect()
    }

    /// Random point: Gaussian coordinates pushed along a log-uniform dilation in [e⁻², e²].
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        if let QuasiDistance::Finite(s) = self {
            return vec![rng.random_range(1..=s.len()) as f64];
        }
        let x: Vec<f64> = (0..self.dim()).map(|_| StandardNormal.sample(rng)).collect();
        let lambda = rng.random_range(-2.0f64..2.0).exp();
        self.dilate(&x, lambda).expect("dimension matches")
    }

    /// Half-widths of a coordinate box containing B(e, 1).
    pub fn unit_ball_extent(&self) -> Result<Vec<f64>> {
        match self {
            QuasiDistance::Hs { group, r } => Ok(vec![rational_to_f64(r); group.dim()]),
            QuasiDistance::UnitBall { group, oracle } => Ok(vec![oracle.euclidean_bound(); group.dim()]),
            QuasiDistance::Power { inner, .. } => inner.unit_ball_extent(),
            QuasiDistance::ProductMax { a, b } | QuasiDistance::LpCombo { a, b, .. } => {
                let mut e = a.unit_ball_extent()?;
                e.extend(b.unit_ball_extent()?);
                Ok(e)
            }
            QuasiDistance::Quotient(q) => {
                let src = q.inner.unit_ball_extent()?;
                Ok(q.morphism
                    .matrix
                    .iter()
                    .map(|row| row.iter().zip(&src).map(|(c, e)| rational_to_f64(c).abs() * e).sum())
                    .collect())
            }
            // Horizontal length bounds |x|, |y|; enclosed area is at most L²/(4π).
            QuasiDistance::CcH1 { scale } => {
                let l = 1.0 / scale;
                Ok(vec![l, l, l * l / (4.0 * std::f64::consts::PI)])
            }
            QuasiDistance::Finite(_) => Err(Error::Input("finite spaces have no coordinates".into())),
        }
    }
}

fn zero_radius(x: &[Rational]) -> Membership {
    if x.iter().all(Zero::is_zero) {
        Membership::Boundary
    } else {
        Membership::Outside
    }
}

/// `q^w` when rational.
pub fn rational_power(q: &Rational, w: &Rational) -> Option<Rational> {
    let a: u64 = w.numer().abs().try_into().ok()?;
    let b: u64 = w.denom().try_into().ok()?;
    let v = exact_root(&pow_rational(q, a), b)?;
    Some(if w.is_negative() { v.recip() } else { v })
}

/// `(base^(1/k))^r` as a root.
fn power_root(v: &Root, r: u64) -> Root {
    let g = num_integer::gcd(r, v.k);
    Root { base: pow_rational(&v.base, r / g), k: v.k / g }
}

/// Sign of u + v − c for roots u, v and rational c, when one of u, v is rational.
fn sum_cmp(u: &Root, v: &Root, c: &Rational) -> Option<Ordering> {
    let (rat_part, other) = if u.k == 1 {
        (&u.base, v)
    } else if v.k == 1 {
        (&v.base, u)
    } else {
        return None;
    };
    let rest = c - rat_part;
    Some(other.cmp_rational(&rest))
}

fn finite_label(p: &[f64], n: usize) -> Result<usize> {
    let q =
        Rational::from_float(*p.first().ok_or(Error::Dimension { expected: 1, got: 0 })?).ok_or(Error::NonFinite)?;
    finite::index_of(&q, n)
}

fn finite_label_q(p: &[Rational], n: usize) -> Result<usize> {
    finite::index_of(p.first().ok_or(Error::Dimension { expected: 1, got: 0 })?, n)
}

/// δ_{1/d(e,u)}(u): a point of the unit sphere on the dilation orbit of u.
pub fn boundary_sample(d: &QuasiDistance, u: &[f64]) -> Result<Vec<f64>> {
    let n = d.norm(u)?;
    if n == 0.0 {
        return Err(Error::Input("cannot rescale the identity onto the unit sphere".into()));
    }
    d.dilate(u, 1.0 / n)
}

/// Largest observed d(p,q) / (d(p,p') + d(p',q)) over random triples.
pub fn estimate_quasi_triangle_constant<R: Rng + ?Sized>(
    d: &QuasiDistance,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (p, m, q) = (d.sample(rng), d.sample(rng), d.sample(rng));
        let den = d.dist(&p, &m)? + d.dist(&m, &q)?;
        if den > 0.0 {
            worst = worst.max(d.dist(&p, &q)? / den);
        }
    }
    Ok(worst)
}

/// Size of a greedy `radius`-separated subset of B(center, λ·radius).
///
/// Candidates are `center · δ_{λ·radius}(g)` for g on a grid with `res` points per axis over the
/// unit-ball box, scanned lexicographically; a candidate is kept when d ≥ radius to all kept ones.
pub fn packing_count(d: &QuasiDistance, center: &[f64], radius: f64, lambda: f64, res: usize) -> Result<usize> {
    let ext = d.unit_ball_extent()?;
    let n = ext.len();
    let big = lambda * radius;
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let total = res.checked_pow(n as u32).ok_or_else(|| Error::Input("packing grid too large".into()))?;
    let mut g = vec![0.0; n];
    for idx in 0..total {
        let mut rem = idx;
        for i in (0..n).rev() {
            let k = rem % res;
            rem /= res;
            g[i] = if res == 1 { 0.0 } else { ext[i] * (-1.0 + 2.0 * k as f64 / (res - 1) as f64) };
        }
        let off = d.dilate(&g, big)?;
        let cand = match d {
            QuasiDistance::ProductMax { .. } | QuasiDistance::LpCombo { .. } => {
                center.iter().zip(&off).map(|(a, b)| a + b).collect::<Vec<_>>()
            }
            _ => translate(d, center, &off)?,
        };
        if d.dist(center, &cand)? > big {
            continue;
        }
        let mut ok = true;
        for k in &kept {
            if d.dist(k, &cand)? < radius {
                ok = false;
                break;
            }
        }
        if ok {
            kept.push(cand);
        }
    }
    Ok(kept.len())
}

/// `c · x` for single-group kinds.
fn translate(d: &QuasiDistance, c: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    match d {
        QuasiDistance::CcH1 { .. } => {
            let neg: Vec<f64> = c.iter().map(|v| -v).collect();
            // h1_difference(−c, x) = c · x
            Ok(cc::h1_difference(&neg, x).to_vec())
        }
        _ => {
            let g = d.group().ok_or_else(|| Error::Input("no group law for this kind".into()))?;
            Ok(g.mul_slices(c, x))
        }
    }
}

/// Serializable description of a quasi-distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistanceSpec {
    Hs {
        group: String,
        r: String,
    },
    UnitBallOracle {
        group: String,
        oracle: BallOracle,
    },
    Power {
        inner: Box<DistanceSpec>,
        t: String,
    },
    ProductMax {
        a: Box<DistanceSpec>,
        b: Box<DistanceSpec>,
    },
    LpCombo {
        a: Box<DistanceSpec>,
        b: Box<DistanceSpec>,
        r: String,
    },
    /// Quotient of `inner` by a morphism onto `target`; matrix entries are rationals, target × source.
    Quotient {
        inner: Box<DistanceSpec>,
        target: String,
        matrix: Vec<Vec<String>>,
    },
    CcH1 {
        scale: f64,
    },
    CountableSpace {
        n: usize,
    },
}

impl DistanceSpec {
    pub fn build(&self) -> Result<QuasiDistance> {
        use crate::scalar::parse_rational as pr;
        let group = |s: &str| -> Result<GradedGroup> { builtin_group(&s.parse::<GroupSpec>()?) };
        match self {
            DistanceSpec::Hs { group: g, r } => QuasiDistance::hs(group(g)?, pr(r)?),
            DistanceSpec::UnitBallOracle { group: g, oracle } => {
                Ok(QuasiDistance::UnitBall { group: Arc::new(group(g)?), oracle: *oracle })
            }
            DistanceSpec::Power { inner, t } => QuasiDistance::power(inner.build()?, pr(t)?),
            DistanceSpec::ProductMax { a, b } => Ok(QuasiDistance::product_max(a.build()?, b.build()?)),
            DistanceSpec::LpCombo { a, b, r } => QuasiDistance::lp_combo(a.build()?, b.build()?, pr(r)?),
            DistanceSpec::Quotient { inner, target, matrix } => {
                let m = matrix
                    .iter()
                    .map(|row| row.iter().map(|c| pr(c)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                let q = QuotientDistance::new(inner.build()?, Arc::new(group(target)?), m)?;
                Ok(QuasiDistance::Quotient(Box::new(q)))
            }
            DistanceSpec::CcH1 { scale } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Input("scale must be positive".into()));
                }
                Ok(QuasiDistance::CcH1 { scale: *scale })
            }
            DistanceSpec::CountableSpace { n } => {
                if *n < 2 {
                    return Err(Error::Input("countable space needs n >= 2".into()));
                }
                Ok(QuasiDistance::Finite(Arc::new(FiniteMetricSpace::Countable { n: *n })))
            }
        }
    }
}
