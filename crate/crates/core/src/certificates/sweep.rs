//! Randomized sweeps over hypothesis-satisfying pairs, and the exact A_p(q) membership check.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    a_form, admissible_epsilon, dilate_exact, layer_angle, on_boundary, region_classify_f64, Region, RegionParams,
};
use crate::algebra::{builtin_group, GroupSpec};
use crate::error::{Error, Result};
use crate::linalg::stereographic_point;
use crate::metrics::{Membership, QuasiDistance};
use crate::scalar::{fmt_rational, int, rat, rational_to_f64, Rational};

const SHARDS: u64 = 8;
pub const SWEEP_TOLERANCE: f64 = 1e-9;
pub const AQ_EXCLUSION: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    /// Sign of A_p(q) against ball membership, p on the unit sphere.
    Aq,
    /// Small layer angles imply the area and scalar-product conditions.
    SmallAngles,
    /// p, q outside P_a.
    Away,
    /// p, q in P_a′.
    Near2a,
    /// p, q in P_a ∖ P_a′.
    Inbetween,
}

impl Lemma {
    pub const ALL: [Lemma; 5] = [Lemma::Aq, Lemma::SmallAngles, Lemma::Away, Lemma::Near2a, Lemma::Inbetween];

    fn region(self) -> Option<Region> {
        match self {
            Lemma::Away => Some(Region::Complement),
            Lemma::Near2a => Some(Region::PaPrime),
            Lemma::Inbetween => Some(Region::PaMinusPaPrime),
            _ => None,
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lemma::Aq => "aq",
            Lemma::SmallAngles => "small_angles",
            Lemma::Away => "away",
            Lemma::Near2a => "near2a",
            Lemma::Inbetween => "inbetween",
        })
    }
}

impl FromStr for Lemma {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.to_string() == s)
            .ok_or_else(|| Error::Input(format!("unknown lemma '{s}' (aq|small_angles|away|near2a|inbetween)")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub lemma: Lemma,
    pub params: RegionParams,
    pub seed: u64,
    /// Candidate pairs drawn, including rejected ones.
    pub samples_tested: u64,
    /// Pairs satisfying every hypothesis; the count the sweep was asked for.
    pub hypothesis_satisfying: u64,
    /// Largest A_p(q) over accepted pairs (for small_angles, the largest condition excess).
    pub max_a_form: Option<f64>,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
    #[serde(with = "crate::io::rational_opt")]
    pub epsilon: Option<Rational>,
    pub delta: Option<f64>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn unit_vector<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let n = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-12 {
            return x.into_iter().map(|c| c / n).collect();
        }
    }
}

/// cos θ · u + sin θ · t for a random unit t ⊥ u; in dimension 1 the direction is u itself.
fn tilt<R: Rng>(u: &[f64], theta: f64, rng: &mut R) -> Vec<f64> {
    if u.len() == 1 {
        return u.to_vec();
    }
    loop {
        let x = unit_vector(u.len(), rng);
        let dot: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
        let t: Vec<f64> = x.iter().zip(u).map(|(a, b)| a - dot * b).collect();
        let n = t.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-6 {
            return u.iter().zip(&t).map(|(a, b)| theta.cos() * a + theta.sin() * b / n).collect();
        }
    }
}

/// Point with ‖v‖ = ρ cos φ, ‖w‖ = ρ sin φ along the given unit directions.
fn assemble(v_dir: &[f64], w_dir: &[f64], rho: f64, phi: f64) -> Vec<f64> {
    let (c, s) = (rho * phi.cos(), rho * phi.sin());
    v_dir.iter().map(|x| c * x).chain(w_dir.iter().map(|x| s * x)).collect()
}

/// Angle in [0, δ), biased toward δ so that the extreme of the hypothesis is well sampled.
fn small_angle<R: Rng>(delta: f64, rng: &mut R) -> f64 {
    delta * rng.random::<f64>().powf(0.25)
}

/// (p, q) with p on ∂B, q ∈ B, and both layer angles below δ by construction.
fn small_angle_pair<R: Rng>(rank: usize, w_dim: usize, radius: f64, delta: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let (vp, wp) = (unit_vector(rank, rng), unit_vector(w_dim, rng));
    let p = assemble(&vp, &wp, radius, rng.random::<f64>() * half_pi);
    let vq = tilt(&vp, small_angle(delta, rng), rng);
    let wq = tilt(&wp, small_angle(delta, rng), rng);
    let rho = radius * rng.random::<f64>().max(1e-3);
    let q = assemble(&vq, &wq, rho, rng.random::<f64>() * half_pi);
    (p, q)
}

/// Largest excess among |p_i q_j − q_i p_j| ≤ ε‖v_p‖‖v_q‖, ⟨v_p,v_q⟩ ≥ (1−ε)‖v_p‖‖v_q‖ and the
/// same scalar condition on w; the conditions hold iff the result is ≤ 0.
fn condition_excess(p: &[f64], q: &[f64], params: &RegionParams, eps: f64) -> f64 {
    let r = params.rank;
    let norm = |x: &[f64]| x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let nv = norm(&p[..r]) * norm(&q[..r]);
    let nw = norm(&p[r..]) * norm(&q[r..]);
    let mut worst = (1.0 - eps) * nv - dot(&p[..r], &q[..r]);
    worst = worst.max((1.0 - eps) * nw - dot(&p[r..], &q[r..]));
    for (i, j) in params.pairs() {
        worst = worst.max((p[i] * q[j] - q[i] * p[j]).abs() - eps * nv);
    }
    worst
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

fn shard_quota(total: u64, shard: u64) -> u64 {
    total / SHARDS + if shard == 0 { total % SHARDS } else { 0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaCalibration {
    #[serde(with = "crate::io::rational")]
    pub epsilon: Rational,
    pub delta: f64,
    pub pairs_per_candidate: u64,
    /// (δ candidate, all pairs satisfied the conditions), largest first.
    pub tried: Vec<(f64, bool)>,
}

/// Largest δ = 2^-k (k ≥ 1) for which `pairs` random pairs with layer angles below δ all satisfy
/// the area and scalar-product conditions at ε.
pub fn calibrate_delta(params: &RegionParams, eps: &Rational, pairs: u64, seed: u64) -> Result<DeltaCalibration> {
    params.validate()?;
    let e = rational_to_f64(eps);
    let radius = rational_to_f64(&params.radius);
    let w_dim = params.dim() - params.rank;
    let mut tried = Vec::new();
    for k in 1..=40 {
        let delta = 0.5f64.powi(k);
        let ok = (0..SHARDS).into_par_iter().all(|s| {
            let mut rng = shard_rng(seed ^ (k as u64) << 32, s);
            (0..shard_quota(pairs, s)).all(|_| {
                let (p, q) = small_angle_pair(params.rank, w_dim, radius, delta, &mut rng);
                condition_excess(&p, &q, params, e) <= 0.0
            })
        });
        tried.push((delta, ok));
        if ok {
            return Ok(DeltaCalibration { epsilon: eps.clone(), delta, pairs_per_candidate: pairs, tried });
        }
    }
    Err(Error::Solver("no dyadic delta down to 2^-40 met the conditions".into()))
}

struct ShardResult {
    tested: u64,
    accepted: u64,
    max_a: Option<f64>,
    violations: Vec<Violation>,
}

/// Sweeps `sample_count` hypothesis-satisfying pairs across 8 seeded shards.
///
/// `epsilon` defaults to the lemma's admissible value (for small_angles: the smallest of the three
/// containment lemmas); `delta` defaults to [`calibrate_delta`] with 10⁵ pairs.
pub fn lemma_sweep(
    lemma: Lemma,
    params: &RegionParams,
    epsilon: Option<Rational>,
    delta: Option<f64>,
    sample_count: u64,
    seed: u64,
) -> Result<SweepReport> {
    params.validate()?;
    let group = builtin_group(&GroupSpec::FreeStep2(params.rank))?;
    let d = QuasiDistance::hs(group, params.radius.clone())?;
    let (epsilon, delta) = if lemma == Lemma::Aq {
        (None, None)
    } else {
        let eps = match epsilon {
            Some(e) => e,
            None if lemma == Lemma::SmallAngles => [Lemma::Away, Lemma::Near2a, Lemma::Inbetween]
                .iter()
                .map(|l| admissible_epsilon(*l, params).map(|c| c.epsilon))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min()
                .unwrap(),
            None => admissible_epsilon(lemma, params)?.epsilon,
        };
        let delta = match delta {
            Some(d) => d,
            None => calibrate_delta(params, &eps, 100_000, seed)?.delta,
        };
        if !(delta > 0.0 && delta < std::f64::consts::PI) {
            return Err(Error::Input("delta must lie in (0, pi)".into()));
        }
        (Some(eps), Some(delta))
    };
    let e = epsilon.as_ref().map(rational_to_f64).unwrap_or(0.0);
    let results: Vec<Result<ShardResult>> = (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            sweep_shard(lemma, params, &d, e, delta.unwrap_or(0.0), shard_quota(sample_count, s), shard_rng(seed, s))
        })
        .collect();
    let mut report = SweepReport {
        lemma,
        params: params.clone(),
        seed,
        samples_tested: 0,
        hypothesis_satisfying: 0,
        max_a_form: None,
        tolerance: SWEEP_TOLERANCE,
        violations: Vec::new(),
        epsilon,
        delta,
    };
    for r in results {
        let r = r?;
        report.samples_tested += r.tested;
        report.hypothesis_satisfying += r.accepted;
        report.max_a_form = match (report.max_a_form, r.max_a) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        report.violations.extend(r.violations);
    }
    Ok(report)
}

fn sweep_shard(
    lemma: Lemma,
    params: &RegionParams,
    d: &QuasiDistance,
    eps: f64,
    delta: f64,
    quota: u64,
    mut rng: ChaCha8Rng,
) -> Result<ShardResult> {
    let rank = params.rank;
    let w_dim = params.dim() - rank;
    let radius = rational_to_f64(&params.radius);
    let (a, a_prime) = (rational_to_f64(&params.a), rational_to_f64(&params.a_prime));
    let mut out = ShardResult { tested: 0, accepted: 0, max_a: None, violations: Vec::new() };
    let track = |m: &mut Option<f64>, v: f64| *m = Some(m.map_or(v, |x| x.max(v)));
    while out.accepted < quota {
        if out.tested >= 10_000 * quota.max(1) {
            return Err(Error::Sampling(format!(
                "lemma {lemma}: {} of {} candidates accepted (rejection rate above 99.99%)",
                out.accepted, out.tested
            )));
        }
        out.tested += 1;
        match lemma {
            Lemma::Aq => {
                let (vp, wp) = (unit_vector(rank, &mut rng), unit_vector(w_dim, &mut rng));
                let p = assemble(&vp, &wp, radius, rng.random::<f64>() * std::f64::consts::FRAC_PI_2);
                let u = assemble(
                    &unit_vector(rank, &mut rng),
                    &unit_vector(w_dim, &mut rng),
                    radius,
                    rng.random::<f64>() * std::f64::consts::FRAC_PI_2,
                );
                let x = d.dilate(&u, 2.0 * rng.random::<f64>())?;
                let neg_p: Vec<f64> = p.iter().map(|c| -c).collect();
                let q = d.difference(&neg_p, &x)?;
                let dist = d.dist(&p, &q)?;
                if (dist - 1.0).abs() < AQ_EXCLUSION {
                    continue;
                }
                out.accepted += 1;
                let value = a_form(&p, &q, params)?;
                if (value <= 0.0) != (dist <= 1.0) {
                    out.violations.push(Violation { p, q, value, detail: format!("d(p,q) = {dist}") });
                }
            }
            Lemma::SmallAngles => {
                let (p, q) = small_angle_pair(rank, w_dim, radius, delta, &mut rng);
                let ang = layer_angle(&p, &q, params)?;
                if ang.v >= delta || ang.w >= delta {
                    continue;
                }
                out.accepted += 1;
                let excess = condition_excess(&p, &q, params, eps);
                track(&mut out.max_a, excess);
                if excess > SWEEP_TOLERANCE {
                    out.violations.push(Violation {
                        p,
                        q,
                        value: excess,
                        detail: "area or scalar condition fails".into(),
                    });
                }
            }
            Lemma::Away | Lemma::Near2a | Lemma::Inbetween => {
                let want = lemma.region().unwrap();
                let (p, q) = small_angle_pair(rank, w_dim, radius, delta, &mut rng);
                if region_classify_f64(&p, rank, radius, a, a_prime) != want
                    || region_classify_f64(&q, rank, radius, a, a_prime) != want
                {
                    continue;
                }
                let ang = layer_angle(&p, &q, params)?;
                if ang.v >= delta || ang.w >= delta {
                    continue;
                }
                out.accepted += 1;
                let value = a_form(&p, &q, params)?;
                track(&mut out.max_a, value);
                let dist = d.dist(&p, &q)?;
                if value > SWEEP_TOLERANCE || dist > 1.0 + SWEEP_TOLERANCE {
                    out.violations.push(Violation { p, q, value, detail: format!("d(p,q) = {dist}") });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AqExactReport {
    pub params: RegionParams,
    pub seed: u64,
    pub samples: u64,
    pub inside: u64,
    pub boundary: u64,
    pub outside: u64,
    /// (p, q) pairs, as "p/q" strings, where the sign of A_p(q) and exact membership disagree.
    pub disagreements: Vec<(Vec<String>, Vec<String>)>,
}

fn random_small_rational<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.random_range(-48..=48), rng.random_range(1..=16))
}

/// Exact comparison of sign(A_p(q)) with membership of q in B_d(p, 1), p rational on ∂B.
///
/// Half of the q are p · δ_s(x) with x rational on ∂B and s = k/8, so s = 1 lands exactly on the
/// sphere around p; the rest are random rationals near the ball.
pub fn aq_exact_check(params: &RegionParams, samples: u64, seed: u64) -> Result<AqExactReport> {
    params.validate()?;
    let n = params.dim();
    let group = builtin_group(&GroupSpec::FreeStep2(params.rank))?;
    let d = QuasiDistance::hs(group, params.radius.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AqExactReport {
        params: params.clone(),
        seed,
        samples,
        inside: 0,
        boundary: 0,
        outside: 0,
        disagreements: Vec::new(),
    };
    let sphere = |rng: &mut ChaCha8Rng| {
        let u: Vec<Rational> = (0..n - 1).map(|_| random_small_rational(rng)).collect();
        stereographic_point(&u, &params.radius)
    };
    for k in 0..samples {
        let p = sphere(&mut rng);
        debug_assert!(on_boundary(&p, params)?);
        let q = if k % 2 == 0 {
            let x = dilate_exact(&sphere(&mut rng), &rat(rng.random_range(1..=16), 8), params)?;
            let neg_p: Vec<Rational> = p.iter().map(|c| -c).collect();
            d.difference_exact(&neg_p, &x)?
        } else {
            (0..n).map(|_| random_small_rational(&mut rng) * &params.radius / int(8)).collect()
        };
        let m = d
            .membership_exact(&p, &int(1), &q)?
            .ok_or_else(|| Error::Inexact("hs membership should be exact".into()))?;
        let sign = Membership::from_cmp(a_form(&p, &q, params)?.cmp(&Rational::zero()));
        match m {
            Membership::Inside => report.inside += 1,
            Membership::Boundary => report.boundary += 1,
            Membership::Outside => report.outside += 1,
        }
        if sign != m {
            report.disagreements.push((p.iter().map(fmt_rational).collect(), q.iter().map(fmt_rational).collect()));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_names_round_trip() {
        for l in Lemma::ALL {
            assert_eq!(l.to_string().parse::<Lemma>().unwrap(), l);
            assert_eq!(serde_json::to_string(&l).unwrap(), format!("\"{l}\""));
        }
        assert!("nope".parse::<Lemma>().is_err());
    }

    #[test]
    fn tilt_keeps_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = unit_vector(3, &mut rng);
        let t = tilt(&u, 0.3, &mut rng);
        assert!((super::super::angle(&u, &t).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn small_exact_check() {
        let pr = RegionParams::new(2, int(1)).unwrap();
        let r = aq_exact_check(&pr, 60, 1).unwrap();
        assert!(r.disagreements.is_empty());
        assert!(r.inside > 0 && r.outside > 0 && r.boundary > 0, "{r:?}");
    }

    #[test]
    fn small_sweeps_pass() {
        let pr = RegionParams::new(2, int(1)).unwrap();
        for lemma in Lemma::ALL {
            let r = lemma_sweep(lemma, &pr, None, None, 400, 5).unwrap();
            assert!(r.passed(), "{lemma}: {:?}", r.violations.first());
            assert_eq!(r.hypothesis_satisfying, 400);
        }
    }

    #[test]
    fn sweeps_are_deterministic() {
        let pr = RegionParams::new(3, rat(1, 2)).unwrap();
        let a = lemma_sweep(Lemma::Near2a, &pr, None, Some(0.01), 200, 9).unwrap();
        let b = lemma_sweep(Lemma::Near2a, &pr, None, Some(0.01), 200, 9).unwrap();
        assert_eq!(a, b);
    }
}
