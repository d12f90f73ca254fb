//! Besicovitch families: certificates, searches, the greedy cover and the countable example space.

mod countable;
mod cover;
mod orbit;
mod search;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{DistanceSpec, Membership, QuasiDistance};
use crate::scalar::{rational_to_f64, Rational};

pub use countable::{ball_structure_holds, countable_space, find_two_ball_family, TwoBallFamily};
pub use cover::{greedy_cover, CoverReport};
pub use orbit::{dilation_orbit_family, segment_point, segment_witness_nonbcp, OrbitOutcome, SegmentWitness};
pub use search::{search_family, SearchConfig, SearchOutcome, Strategy};

/// Default absolute slack for margin certificates.
pub const DEFAULT_MARGIN: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    Exact,
    Margin,
}

/// Balls B(centers[i], radii[i]) that all contain `witness`, with no center inside another ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesicovitchFamily {
    #[serde(with = "crate::io::rational_mat")]
    pub centers: Vec<Vec<Rational>>,
    #[serde(with = "crate::io::rational_vec")]
    pub radii: Vec<Rational>,
    #[serde(with = "crate::io::rational_vec")]
    pub witness: Vec<Rational>,
    pub mode: CertificateMode,
    /// Required slack in margin mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceSpec>,
}

impl BesicovitchFamily {
    pub fn exact(centers: Vec<Vec<Rational>>, radii: Vec<Rational>, witness: Vec<Rational>) -> Self {
        BesicovitchFamily { centers, radii, witness, mode: CertificateMode::Exact, epsilon: None, distance: None }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Canonical order: by radius, then center, so equal families compare equal.
    pub fn sorted(mut self) -> Self {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.radii[a].cmp(&self.radii[b]).then_with(|| self.centers[a].cmp(&self.centers[b])));
        self.centers = idx.iter().map(|&i| self.centers[i].clone()).collect();
        self.radii = idx.iter().map(|&i| self.radii[i].clone()).collect();
        self
    }
}

/// A failed condition; indices are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyViolation {
    Shape {
        reason: String,
    },
    NonPositiveRadius {
        ball: usize,
    },
    /// The witness is not in the ball.
    WitnessOutside {
        ball: usize,
    },
    /// `center` lies in the closed ball `ball`.
    CenterInside {
        center: usize,
        ball: usize,
    },
}

impl std::fmt::Display for FamilyViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyViolation::Shape { reason } => write!(f, "malformed family: {reason}"),
            FamilyViolation::NonPositiveRadius { ball } => {
                write!(f, "radius {ball} is not positive")
            }
            FamilyViolation::WitnessOutside { ball } => write!(f, "witness is outside ball {ball}"),
            FamilyViolation::CenterInside { center, ball } => {
                write!(f, "center {center} lies in ball {ball}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub valid: bool,
    pub cardinality: usize,
    pub mode: CertificateMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<FamilyViolation>,
    /// Smallest observed slack (margin mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_slack: Option<f64>,
}

impl Certificate {
    fn reject(f: &BesicovitchFamily, v: FamilyViolation, slack: Option<f64>) -> Self {
        Certificate { valid: false, cardinality: f.len(), mode: f.mode, violation: Some(v), min_slack: slack }
    }
}

/// Check every condition of a Besicovitch family.
///
/// Exact mode decides each comparison in rational arithmetic and fails with an `Inexact` error when
/// the distance cannot do that. Margin mode requires slack at least ε on every comparison.
pub fn verify_family(f: &BesicovitchFamily, d: &QuasiDistance) -> Result<Certificate> {
    let n = f.len();
    if f.radii.len() != n {
        let reason = format!("{n} centers but {} radii", f.radii.len());
        return Ok(Certificate::reject(f, FamilyViolation::Shape { reason }, None));
    }
    for (i, c) in f.centers.iter().chain(std::iter::once(&f.witness)).enumerate() {
        if c.len() != d.dim() {
            let reason = format!("point {} has {} coordinates, expected {}", i + 1, c.len(), d.dim());
            return Ok(Certificate::reject(f, FamilyViolation::Shape { reason }, None));
        }
    }
    if let Some(i) = f.radii.iter().position(|r| *r <= Rational::from_integer(0.into())) {
        return Ok(Certificate::reject(f, FamilyViolation::NonPositiveRadius { ball: i + 1 }, None));
    }
    match f.mode {
        CertificateMode::Exact => verify_exact(f, d),
        CertificateMode::Margin => verify_margin(f, d, f.epsilon.unwrap_or(DEFAULT_MARGIN)),
    }
}

fn exact_membership(d: &QuasiDistance, c: &[Rational], r: &Rational, q: &[Rational]) -> Result<Membership> {
    d.membership_exact(c, r, q)?
        .ok_or_else(|| Error::Inexact(format!("{} distance cannot decide ball membership exactly", d.kind())))
}

fn verify_exact(f: &BesicovitchFamily, d: &QuasiDistance) -> Result<Certificate> {
    for (i, (c, r)) in f.centers.iter().zip(&f.radii).enumerate() {
        if !exact_membership(d, c, r, &f.witness)?.in_ball() {
            return Ok(Certificate::reject(f, FamilyViolation::WitnessOutside { ball: i + 1 }, None));
        }
    }
    for (j, (c, r)) in f.centers.iter().zip(&f.radii).enumerate() {
        for (i, q) in f.centers.iter().enumerate() {
            if i != j && exact_membership(d, c, r, q)?.in_ball() {
                return Ok(Certificate::reject(f, FamilyViolation::CenterInside { center: i + 1, ball: j + 1 }, None));
            }
        }
    }
    Ok(Certificate {
        valid: true,
        cardinality: f.len(),
        mode: CertificateMode::Exact,
        violation: None,
        min_slack: None,
    })
}

fn verify_margin(f: &BesicovitchFamily, d: &QuasiDistance, eps: f64) -> Result<Certificate> {
    let to_f = |p: &[Rational]| p.iter().map(rational_to_f64).collect::<Vec<_>>();
    let centers: Vec<Vec<f64>> = f.centers.iter().map(|c| to_f(c)).collect();
    let radii: Vec<f64> = f.radii.iter().map(rational_to_f64).collect();
    let w = to_f(&f.witness);
    let mut slack = f64::INFINITY;
    let mut first: Option<FamilyViolation> = None;
    for (i, c) in centers.iter().enumerate() {
        let s = radii[i] - d.dist(c, &w)?;
        slack = slack.min(s);
        if s < eps && first.is_none() {
            first = Some(FamilyViolation::WitnessOutside { ball: i + 1 });
        }
    }
    for (j, c) in centers.iter().enumerate() {
        for (i, q) in centers.iter().enumerate() {
            if i == j {
                continue;
            }
            let s = d.dist(c, q)? - radii[j];
            slack = slack.min(s);
            if s < eps && first.is_none() {
                first = Some(FamilyViolation::CenterInside { center: i + 1, ball: j + 1 });
            }
        }
    }
    let slack = if slack.is_finite() { Some(slack) } else { None };
    Ok(match first {
        Some(v) => Certificate::reject(f, v, slack),
        None => Certificate {
            valid: true,
            cardinality: f.len(),
            mode: CertificateMode::Margin,
            violation: None,
            min_slack: slack,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn line_families() {
        let d = QuasiDistance::euclidean(1);
        let f = BesicovitchFamily::exact(vec![vec![int(-1)], vec![int(1)]], vec![int(1), int(1)], vec![int(0)]);
        let c = verify_family(&f, &d).unwrap();
        assert!(c.valid);
        assert_eq!(c.cardinality, 2);
        let g = BesicovitchFamily::exact(vec![vec![rat(1, 2)], vec![int(1)]], vec![rat(1, 2), int(1)], vec![int(0)]);
        let c = verify_family(&g, &d).unwrap();
        assert!(!c.valid);
        assert_eq!(c.violation, Some(FamilyViolation::CenterInside { center: 2, ball: 1 }));
    }

    #[test]
    fn margin_mode_reports_slack() {
        let d = QuasiDistance::CcH1 { scale: 1.0 };
        let mut f = BesicovitchFamily::exact(
            vec![vec![int(-1), int(0), int(0)], vec![int(1), int(0), int(0)]],
            vec![int(1), int(1)],
            vec![int(0); 3],
        );
        assert!(matches!(verify_family(&f, &d), Err(Error::Inexact(_))));
        f.mode = CertificateMode::Margin;
        // The witness sits exactly on both spheres: zero slack.
        let c = verify_family(&f, &d).unwrap();
        assert!(!c.valid);
        f.radii = vec![rat(11, 10), rat(11, 10)];
        let c = verify_family(&f, &d).unwrap();
        assert!(c.valid && (c.min_slack.unwrap() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn json_shape() {
        let f = BesicovitchFamily::exact(vec![vec![int(-1)], vec![int(1)]], vec![int(1), int(1)], vec![int(0)]);
        let j = serde_json::to_string(&f).unwrap();
        assert_eq!(j, r#"{"centers":[["-1"],["1"]],"radii":["1","1"],"witness":["0"],"mode":"exact"}"#);
        assert_eq!(serde_json::from_str::<BesicovitchFamily>(&j).unwrap(), f);
    }
}
