//! Randomized search for large Besicovitch families with witness at the identity.
//!
//! Each proposal is a point p; its ball is B(p, r) with r just above d(p, e). A proposal joins the
//! current family when it conflicts with no member (float test with a relative margin), or replaces
//! a single conflicting member with probability 1/2. Whenever the float family beats the shard's
//! record it is rationalized and certified; only certified families are kept.
//!
//! Work is split over a fixed number of shards whose random streams do not depend on the budget, so
//! results are reproducible for any worker count and never shrink as the budget grows.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{verify_family, BesicovitchFamily, Certificate, CertificateMode, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::metrics::{boundary_sample, Membership, QuasiDistance};
use crate::scalar::Rational;

/// Best certified family of a shard, and its count of failed certifications.
type ShardResult = (Option<(BesicovitchFamily, Certificate)>, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    /// Also accepts replacing k > 1 conflicting members, with probability decaying in k and time.
    Annealed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Total number of proposals over all shards.
    pub budget: u64,
    pub strategy: Strategy,
    pub seed: u64,
    pub shards: usize,
    /// Proposals are dilated by λ log-uniform in [shell_min, 1].
    pub shell_min: f64,
    /// A third of the fresh proposals get x < 0, y < 0.
    pub sign_bias: bool,
    /// Some proposals dilate an existing center.
    pub orbit_moves: bool,
    /// Some proposals walk along x-segments through a rescaled center (3-dimensional groups).
    pub segment_moves: bool,
    /// Relative margin of the float prefilter.
    pub rel_margin: f64,
}

impl SearchConfig {
    pub fn new(budget: u64, seed: u64) -> Self {
        SearchConfig {
            budget,
            strategy: Strategy::Random,
            seed,
            shards: 8,
            shell_min: 1e-4,
            sign_bias: false,
            orbit_moves: false,
            segment_moves: false,
            rel_margin: 1e-9,
        }
    }

    /// Random, orbit and segment proposals together.
    pub fn combined(budget: u64, seed: u64) -> Self {
        SearchConfig { sign_bias: true, orbit_moves: true, segment_moves: true, ..Self::new(budget, seed) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub family: BesicovitchFamily,
    pub certificate: Certificate,
    /// Certified record of each shard.
    pub shard_records: Vec<usize>,
    /// Float families that failed certification (expected 0).
    pub certification_failures: usize,
}

#[derive(Clone)]
struct Member {
    p: Vec<f64>,
    r: f64,
}

struct Shard<'a> {
    d: &'a QuasiDistance,
    cfg: &'a SearchConfig,
    rng: ChaCha8Rng,
    exact: bool,
    zero: Vec<f64>,
    extra: f64,
}

/// Keep `bits` significant binary digits (exactly representable, so the float is the rational).
fn round_bits(x: f64, bits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let s = bits - 1 - x.abs().log2().floor() as i32;
    (x * 2f64.powi(s)).round() / 2f64.powi(s)
}

fn round_bits_up(x: f64, bits: i32) -> f64 {
    let s = bits - 1 - x.abs().log2().floor() as i32;
    (x * 2f64.powi(s)).ceil() / 2f64.powi(s)
}

fn to_rational(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or(Error::NonFinite)
}

impl Shard<'_> {
    fn fresh(&mut self) -> Result<Vec<f64>> {
        let n = self.d.dim();
        loop {
            let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut self.rng)).collect();
            if self.cfg.sign_bias && n >= 2 && self.rng.random_range(0..3) == 0 {
                x[0] = -x[0].abs();
                x[1] = -x[1].abs();
            }
            if x.iter().all(|v| *v == 0.0) {
                continue;
            }
            let u = boundary_sample(self.d, &x)?;
            return self.d.dilate(&u, self.shell());
        }
    }

    fn shell(&mut self) -> f64 {
        self.rng.random_range(self.cfg.shell_min.ln()..=0.0).exp()
    }

    fn propose(&mut self, fam: &[Member]) -> Result<Vec<f64>> {
        let roll = self.rng.random_range(0..6);
        if !fam.is_empty() && self.cfg.orbit_moves && roll == 0 {
            let c = &fam[self.rng.random_range(0..fam.len())];
            let rho = self.rng.random_range(0.05f64.ln()..0.9f64.ln()).exp();
            return self.d.dilate(&c.p, rho);
        }
        if !fam.is_empty() && self.cfg.segment_moves && roll == 1 && self.d.dim() == 3 && self.d.group().is_some() {
            let c = fam[self.rng.random_range(0..fam.len())].clone();
            let u = self.d.dilate(&c.p, 1.0 / c.r)?;
            let t: f64 = self.rng.random();
            let a = [-t * u[0], 0.0, 0.0];
            let neg = |v: &[f64]| v.iter().map(|c| -c).collect::<Vec<_>>();
            let q =
                if self.rng.random() { self.d.difference(&neg(&u), &a)? } else { self.d.difference(&neg(&a), &u)? };
            let lam = c.r * self.rng.random_range(-1.5f64..0.5).exp();
            return self.d.dilate(&q, lam);
        }
        self.fresh()
    }

    fn separated(&self, a: &Member, b: &Member) -> Result<bool> {
        let dd = self.d.dist(&a.p, &b.p)?;
        Ok(dd > a.r.max(b.r) * (1.0 + self.cfg.rel_margin) + self.extra)
    }

    /// Rationalize and certify a float family.
    fn certify(&self, fam: &[Member]) -> Result<Option<(BesicovitchFamily, Certificate)>> {
        let e: Vec<Rational> = vec![Rational::zero(); self.d.dim()];
        let mut centers = Vec::with_capacity(fam.len());
        let mut radii = Vec::with_capacity(fam.len());
        for m in fam {
            let c = m.p.iter().map(|v| to_rational(*v)).collect::<Result<Vec<_>>>()?;
            let mut r = if self.exact {
                round_bits_up(m.r * (1.0 + 4e-12), 40)
            } else {
                round_bits_up(m.r + DEFAULT_MARGIN * (1.0 + 1e-3), 40)
            };
            if self.exact {
                let mut tries = 0;
                while self.d.membership_exact(&c, &to_rational(r)?, &e)? == Some(Membership::Outside) {
                    tries += 1;
                    if tries > 4 {
                        return Ok(None);
                    }
                    r = round_bits_up(r * (1.0 + 1e-11), 40);
                }
            }
            centers.push(c);
            radii.push(to_rational(r)?);
        }
        let mut f = BesicovitchFamily::exact(centers, radii, e).sorted();
        if !self.exact {
            f.mode = CertificateMode::Margin;
            f.epsilon = Some(DEFAULT_MARGIN);
        }
        let cert = verify_family(&f, self.d)?;
        Ok(cert.valid.then_some((f, cert)))
    }

    fn run(mut self, proposals: u64) -> Result<(Option<(BesicovitchFamily, Certificate)>, usize)> {
        let mut fam: Vec<Member> = Vec::new();
        let mut best: Option<(BesicovitchFamily, Certificate)> = None;
        let mut failures = 0;
        for it in 0..proposals {
            let raw = self.propose(&fam)?;
            let p: Vec<f64> = raw.iter().map(|v| round_bits(*v, 40)).collect();
            let r = self.d.dist(&p, &self.zero)?;
            if !(r > 0.0 && r.is_finite()) {
                continue;
            }
            let cand = Member { p, r };
            let mut conflicts = Vec::new();
            for (i, m) in fam.iter().enumerate() {
                if !self.separated(m, &cand)? {
                    conflicts.push(i);
                    if conflicts.len() > 3 {
                        break;
                    }
                }
            }
            let accept = match (conflicts.len(), self.cfg.strategy) {
                (0, _) => true,
                (1, _) => self.rng.random_bool(0.5),
                (k, Strategy::Annealed) if k <= 3 => {
                    let temp = 1.0 / (1.0 + it as f64 / 2000.0);
                    self.rng.random_bool(0.5 * (-(k as f64 - 1.0) / temp).exp())
                }
                _ => false,
            };
            if !accept {
                continue;
            }
            for &i in conflicts.iter().rev() {
                fam.swap_remove(i);
            }
            fam.push(cand);
            if fam.len() > best.as_ref().map_or(0, |b| b.0.len()) {
                match self.certify(&fam)? {
                    Some(b) => best = Some(b),
                    None => failures += 1,
                }
            }
        }
        Ok((best, failures))
    }
}

/// Best certified family found with the given budget; empty when nothing certifies.
pub fn search_family(d: &QuasiDistance, cfg: &SearchConfig) -> Result<SearchOutcome> {
    if !d.is_homogeneous() {
        return Err(Error::Input("search needs dilations (a homogeneous distance)".into()));
    }
    if cfg.shards == 0 {
        return Err(Error::Input("at least one shard is required".into()));
    }
    if !(cfg.shell_min > 0.0 && cfg.shell_min <= 1.0) {
        return Err(Error::Input("shell_min must lie in (0, 1]".into()));
    }
    let exact = d.is_exact_capable();
    let n = cfg.shards as u64;
    let results: Vec<Result<ShardResult>> = (0..cfg.shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(s as u64);
            let shard = Shard {
                d,
                cfg,
                rng,
                exact,
                zero: vec![0.0; d.dim()],
                extra: if exact { 0.0 } else { 2.0 * DEFAULT_MARGIN },
            };
            let quota = cfg.budget / n + u64::from((s as u64) < cfg.budget % n);
            shard.run(quota)
        })
        .collect();
    let mut records = Vec::with_capacity(cfg.shards);
    let mut failures = 0;
    let mut best: Option<(BesicovitchFamily, Certificate)> = None;
    for r in results {
        let (b, f) = r?;
        failures += f;
        records.push(b.as_ref().map_or(0, |x| x.0.len()));
        if let Some(b) = b {
            let better = match &best {
                None => true,
                Some(cur) => b.0.len() > cur.0.len() || (b.0.len() == cur.0.len() && b.0.centers < cur.0.centers),
            };
            if better {
                best = Some(b);
            }
        }
    }
    let (family, certificate) = match best {
        Some(b) => b,
        None => {
            let f = BesicovitchFamily::exact(vec![], vec![], vec![Rational::zero(); d.dim()]);
            let c = verify_family(&f, d)?;
            (f, c)
        }
    };
    Ok(SearchOutcome { family, certificate, shard_records: records, certification_failures: failures })
}
