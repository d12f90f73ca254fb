//! Families along dilation orbits, and segment points on non-standard Heisenberg groups.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{verify_family, BesicovitchFamily, Certificate, CertificateMode, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::linalg::stereographic_point;
use crate::metrics::{Membership, QuasiDistance};
use crate::scalar::{int, pow_rational, rat, rational_to_f64, round_significant, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum OrbitOutcome {
    Success {
        family: BesicovitchFamily,
        certificate: Certificate,
    },
    /// d(p, δ_{ρ^{jk}} p) ≤ 1 at this j.
    Failure {
        j: usize,
    },
}

/// Family {B(δ_{r_l} p, r_l)} with r_l = ρ^{lk}, l < count, and witness e.
///
/// `p` must lie on the unit sphere. Every orbit test d(p, δ_{ρ^{jk}} p) > 1 is run first; when
/// they all pass, the family is built and verified (exactly when the distance allows it).
pub fn dilation_orbit_family(
    d: &QuasiDistance,
    p: &[Rational],
    rho: &Rational,
    k: u32,
    count: usize,
) -> Result<OrbitOutcome> {
    if !(rho > &Rational::zero() && rho < &Rational::one()) {
        return Err(Error::Input("rho must lie in (0, 1)".into()));
    }
    if k == 0 || count == 0 {
        return Err(Error::Input("k and count must be positive".into()));
    }
    let e = vec![Rational::zero(); d.dim()];
    let step = pow_rational(rho, k as u64);
    let radii: Vec<Rational> = (0..count).map(|l| pow_rational(&step, l as u64)).collect();
    let exact = d.is_exact_capable() && d.dilate_exact(p, &step).is_ok();
    if exact {
        if d.norm_membership_exact(p, &int(1))? != Some(Membership::Boundary) {
            return Err(Error::Input("p is not on the unit sphere".into()));
        }
        let mut centers = Vec::with_capacity(count);
        for (j, r) in radii.iter().enumerate() {
            let q = d.dilate_exact(p, r)?;
            if j > 0 && d.membership_exact(p, &int(1), &q)? != Some(Membership::Outside) {
                return Ok(OrbitOutcome::Failure { j });
            }
            centers.push(q);
        }
        let family = BesicovitchFamily::exact(centers, radii, e);
        let certificate = verify_family(&family, d)?;
        return Ok(OrbitOutcome::Success { family, certificate });
    }
    let pf: Vec<f64> = p.iter().map(rational_to_f64).collect();
    if (d.norm(&pf)? - 1.0).abs() > 1e-9 {
        return Err(Error::Input("p is not on the unit sphere".into()));
    }
    let mut centers = Vec::with_capacity(count);
    for (j, r) in radii.iter().enumerate() {
        let q = d.dilate(&pf, rational_to_f64(r))?;
        if j > 0 && d.dist(&pf, &q)? <= 1.0 + DEFAULT_MARGIN {
            return Ok(OrbitOutcome::Failure { j });
        }
        centers.push(q.iter().map(|v| round_significant(*v, 50)).collect::<Result<Vec<_>>>()?);
    }
    // Margin certificates need slack on the witness side too: enlarge each radius slightly.
    let radii = radii.iter().map(|r| r * rat(1_000_001, 1_000_000)).collect();
    let mut family = BesicovitchFamily::exact(centers, radii, e);
    family.mode = CertificateMode::Margin;
    family.epsilon = Some(DEFAULT_MARGIN * 1e-2);
    let certificate = verify_family(&family, d)?;
    Ok(OrbitOutcome::Success { family, certificate })
}

/// A point of a boundary segment that lies strictly outside the unit ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentWitness {
    #[serde(with = "crate::io::rational_vec")]
    pub p: Vec<Rational>,
    #[serde(with = "crate::io::rational")]
    pub t: Rational,
    /// Left-translated variant (z − t·x·y/2) instead of the right-translated one.
    pub mirrored: bool,
    #[serde(with = "crate::io::rational_vec")]
    pub point: Vec<Rational>,
    /// d(e, point) − 1, in floating point.
    pub excess: f64,
}

/// p · exp(−t x_p X), or exp(−t x_p X) · p when `mirrored`.
pub fn segment_point(d: &QuasiDistance, p: &[Rational], t: &Rational, mirrored: bool) -> Result<Vec<Rational>> {
    let mut a = vec![Rational::zero(); 3];
    a[0] = -(t * &p[0]);
    let neg = |v: &[Rational]| v.iter().map(|c| -c).collect::<Vec<_>>();
    // difference(u, v) = u⁻¹ v, so u·v = difference(u⁻¹, v).
    if mirrored {
        d.difference_exact(&neg(&a), p)
    } else {
        d.difference_exact(&neg(p), &a)
    }
}

fn require_nonstandard_heisenberg(d: &QuasiDistance) -> Result<()> {
    let QuasiDistance::Hs { group, .. } = d else {
        return Err(Error::Input("segment search needs an exact Euclidean-ball distance".into()));
    };
    let alg = group.algebra();
    let w = alg.weights();
    let shape = alg.dim() == 3 && w[2] == &w[0] + &w[1] && !alg.basis_bracket(0, 1)[2].is_zero();
    if !shape {
        return Err(Error::Input("segment search needs a first Heisenberg group".into()));
    }
    if w[0] == w[1] {
        return Err(Error::Input(
            "the grading is a stratification; a point outside the ball would not witness anything".into(),
        ));
    }
    Ok(())
}

/// Random exact boundary points p (x_p ≠ 0) and grid values t = m/grid; first segment point found
/// strictly outside the unit ball.
pub fn segment_witness_nonbcp(
    d: &QuasiDistance,
    samples: usize,
    grid: u32,
    seed: u64,
) -> Result<Option<SegmentWitness>> {
    require_nonstandard_heisenberg(d)?;
    let QuasiDistance::Hs { r, .. } = d else { unreachable!() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = vec![Rational::zero(); 3];
    for _ in 0..samples {
        let u: Vec<Rational> = (0..2).map(|_| rat(rng.random_range(-64..=64), rng.random_range(1..=32))).collect();
        let p = stereographic_point(&u, r);
        if p[0].is_zero() {
            continue;
        }
        for m in 1..=grid {
            let t = rat(m as i64, grid as i64);
            for mirrored in [false, true] {
                let q = segment_point(d, &p, &t, mirrored)?;
                if d.membership_exact(&e, &int(1), &q)? == Some(Membership::Outside) {
                    let qf: Vec<f64> = q.iter().map(rational_to_f64).collect();
                    let excess = d.norm(&qf)? - 1.0;
                    return Ok(Some(SegmentWitness { p, t, mirrored, point: q, excess }));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{builtin_group, GroupSpec};

    #[test]
    fn euclidean_orbit_fails_immediately() {
        let d = QuasiDistance::euclidean(2);
        let p = vec![rat(3, 5), rat(4, 5)];
        assert_eq!(dilation_orbit_family(&d, &p, &rat(1, 2), 1, 4).unwrap(), OrbitOutcome::Failure { j: 1 });
    }

    #[test]
    fn segment_start_is_p() {
        let d = QuasiDistance::hs(builtin_group(&GroupSpec::HeisenbergNonstandard(int(2))).unwrap(), int(1)).unwrap();
        let p = vec![rat(3, 5), rat(4, 5), int(0)];
        assert_eq!(segment_point(&d, &p, &int(0), false).unwrap(), p);
        let end = segment_point(&d, &p, &int(1), false).unwrap();
        assert_eq!(end, vec![int(0), rat(4, 5), rat(6, 25)]);
        let end = segment_point(&d, &p, &int(1), true).unwrap();
        assert_eq!(end, vec![int(0), rat(4, 5), rat(-6, 25)]);
    }

    #[test]
    fn standard_heisenberg_is_refused() {
        let d = QuasiDistance::hs(builtin_group(&GroupSpec::Heisenberg(1)).unwrap(), int(1)).unwrap();
        assert!(segment_witness_nonbcp(&d, 10, 8, 0).is_err());
    }
}
