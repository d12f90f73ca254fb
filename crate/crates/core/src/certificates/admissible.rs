//! Largest admissible ε per lemma, decided by rational interval arithmetic on a dyadic grid.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{Lemma, RegionParams};
use crate::error::{Error, Result};
use crate::scalar::{int, rat, rational_to_f64, sqrt_enclosure, Rational};

const SQRT_BITS: u32 = 80;
const GRID_BITS: u32 = 24;

/// Closed rational interval [lo, hi].
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn point(q: Rational) -> Self {
        Interval { lo: q.clone(), hi: q }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn scale(&self, c: &Rational) -> Interval {
        self.mul(&Interval::point(c.clone()))
    }

    /// Encloses √x for x in the interval; the interval must be non-negative.
    pub fn sqrt(&self) -> Result<Interval> {
        if self.lo.is_negative() {
            return Err(Error::Input("square root of a possibly negative interval".into()));
        }
        Ok(Interval { lo: sqrt_enclosure(&self.lo, SQRT_BITS).0, hi: sqrt_enclosure(&self.hi, SQRT_BITS).1 })
    }
}

fn p(q: Rational) -> Interval {
    Interval::point(q)
}

/// √(1 + 4c²).
fn s_of(c: &Rational) -> Result<Interval> {
    p(int(1) + int(4) * c * c).sqrt()
}

/// 2r²Rε + (r²/4)ε²R².
fn eps_tail(params: &RegionParams, eps: &Rational) -> Interval {
    let r2 = int((params.rank * params.rank) as i64);
    let big_r = &params.radius;
    p(int(2) * &r2 * big_r * eps + &r2 / int(4) * eps * eps * big_r * big_r)
}

/// Enclosures of the strict inequalities each lemma needs at ε (all must be negative).
pub fn lemma_margins(lemma: Lemma, params: &RegionParams, eps: &Rational) -> Result<Vec<Interval>> {
    let one_m = p(int(1) - eps);
    let tail = eps_tail(params, eps);
    let half = rat(1, 2);
    Ok(match lemma {
        Lemma::Aq | Lemma::SmallAngles => Vec::new(),
        Lemma::Away => {
            let a = &params.a;
            let sm1 = s_of(a)?.sub(&p(int(1)));
            let root = sm1.scale(&(int(1) / (int(2) * a * a))).sqrt()?;
            vec![p(int(1)).add(&sm1.scale(&half)).sub(&one_m.mul(&root).scale(&int(2))).add(&tail)]
        }
        Lemma::Near2a => {
            let ap = &params.a_prime;
            let sm1 = s_of(ap)?.sub(&p(int(1)));
            let first = p(int(1) / ap + int(1)).sub(&one_m.mul(&sm1).scale(&(int(1) / ap)));
            let second = one_m.scale(&int(-2)).add(&tail);
            vec![first, second]
        }
        Lemma::Inbetween => {
            let (a, ap) = (&params.a, &params.a_prime);
            let sm1p = s_of(ap)?.sub(&p(int(1)));
            let root = sm1p.scale(&half).sqrt()?;
            let first =
                p(half.clone()).add(&sm1p.scale(&rat(1, 4))).sub(&one_m.mul(&root).scale(&(int(2) / ap))).add(&tail);
            let sm1 = s_of(a)?.sub(&p(int(1)));
            let second = p(int(1) / (int(2) * a) + &half).sub(&one_m.mul(&sm1).scale(&(int(1) / a)));
            vec![first, second]
        }
    })
}

fn certified(lemma: Lemma, params: &RegionParams, eps: &Rational) -> Result<bool> {
    Ok(lemma_margins(lemma, params, eps)?.iter().all(|m| m.hi.is_negative()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonChoice {
    pub lemma: Lemma,
    /// Largest grid point k/2^grid_bits at which every margin is certified negative.
    #[serde(with = "crate::io::rational")]
    pub epsilon_max: Rational,
    /// epsilon_max · 9/10.
    #[serde(with = "crate::io::rational")]
    pub epsilon: Rational,
    pub grid_bits: u32,
    /// Upper ends of the margin enclosures at `epsilon`.
    pub margins: Vec<f64>,
}

/// Every margin increases with ε, so the feasible grid points form a prefix; binary search finds
/// its end.
pub fn admissible_epsilon(lemma: Lemma, params: &RegionParams) -> Result<EpsilonChoice> {
    params.validate()?;
    let scale = Rational::from_integer(BigInt::one() << GRID_BITS as usize);
    let at = |k: i64| Rational::from_integer(BigInt::from(k)) / &scale;
    if lemma_margins(lemma, params, &Rational::zero())?.is_empty() {
        return Err(Error::Input(format!("lemma {lemma} places no condition on epsilon")));
    }
    if !certified(lemma, params, &at(1))? {
        return Err(Error::Input(format!("no admissible epsilon for lemma {lemma} on the 2^-{GRID_BITS} grid")));
    }
    let (mut lo, mut hi) = (1i64, 1i64 << GRID_BITS);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if certified(lemma, params, &at(mid))? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let epsilon_max = at(lo);
    let epsilon = &epsilon_max * rat(9, 10);
    let margins = lemma_margins(lemma, params, &epsilon)?;
    if !margins.iter().all(|m| m.hi.is_negative()) {
        return Err(Error::Solver("slackened epsilon failed certification".into()));
    }
    Ok(EpsilonChoice {
        lemma,
        epsilon_max,
        epsilon,
        grid_bits: GRID_BITS,
        margins: margins.iter().map(|m| rational_to_f64(&m.hi)).collect(),
    })
}
