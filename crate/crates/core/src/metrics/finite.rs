//! Finite metric spaces with exact rational distances.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};

pub type SmallRatio = Ratio<i64>;

/// Points are indexed 0..n internally and labelled 1..=n in reports.
#[derive(Clone, Debug, PartialEq)]
pub enum FiniteMetricSpace {
    Table {
        labels: Vec<String>,
        table: Vec<Vec<SmallRatio>>,
    },
    /// x₁..xₙ with d(x_i, x_j) = 1 − 1/max(i, j) for i ≠ j.
    Countable {
        n: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiniteViolation {
    Shape,
    Diagonal { i: usize },
    Negative { i: usize, j: usize },
    Symmetry { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize },
}

impl FiniteMetricSpace {
    pub fn from_table(labels: Vec<String>, table: Vec<Vec<SmallRatio>>) -> Result<Self> {
        let s = FiniteMetricSpace::Table { labels, table };
        match s.validate() {
            None => Ok(s),
            Some(v) => Err(Error::Input(format!("not a metric: {v:?}"))),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FiniteMetricSpace::Table { table, .. } => table.len(),
            FiniteMetricSpace::Countable { n } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, i: usize) -> String {
        match self {
            FiniteMetricSpace::Table { labels, .. } => labels[i].clone(),
            FiniteMetricSpace::Countable { .. } => format!("x{}", i + 1),
        }
    }

    /// Exact distance between points `i` and `j` (0-based).
    pub fn distance(&self, i: usize, j: usize) -> SmallRatio {
        match self {
            FiniteMetricSpace::Table { table, .. } => table[i][j],
            FiniteMetricSpace::Countable { .. } => {
                if i == j {
                    SmallRatio::zero()
                } else {
                    let m = i.max(j) as i64 + 1;
                    SmallRatio::new(m - 1, m)
                }
            }
        }
    }

    /// First violated metric axiom, checked exactly over all pairs and triples.
    pub fn validate(&self) -> Option<FiniteViolation> {
        let n = self.len();
        if let FiniteMetricSpace::Table { table, labels } = self {
            if labels.len() != n || table.iter().any(|r| r.len() != n) {
                return Some(FiniteViolation::Shape);
            }
        }
        for i in 0..n {
            if !self.distance(i, i).is_zero() {
                return Some(FiniteViolation::Diagonal { i: i + 1 });
            }
            for j in 0..n {
                let d = self.distance(i, j);
                if i != j && d <= SmallRatio::zero() {
                    return Some(FiniteViolation::Negative { i: i + 1, j: j + 1 });
                }
                if d != self.distance(j, i) {
                    return Some(FiniteViolation::Symmetry { i: i + 1, j: j + 1 });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dij = self.distance(i, j);
                for k in 0..n {
                    if self.distance(i, k) > dij + self.distance(j, k) {
                        return Some(FiniteViolation::Triangle { i: i + 1, j: j + 1, k: k + 1 });
                    }
                }
            }
        }
        None
    }

    pub fn distance_f64(&self, i: usize, j: usize) -> f64 {
        let d = self.distance(i, j);
        d.numer().to_f64().unwrap_or(f64::NAN) / d.denom().to_f64().unwrap_or(f64::NAN)
    }
}

pub fn small_to_big(q: &SmallRatio) -> Rational {
    Rational::new((*q.numer()).into(), (*q.denom()).into())
}

pub fn parse_small(s: &str) -> Result<SmallRatio> {
    let q = parse_rational(s)?;
    match (q.numer().to_i64(), q.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(SmallRatio::new(n, d)),
        _ => Err(Error::Input(format!("distance {s} does not fit in 64-bit rationals"))),
    }
}

/// Point index stored in a one-coordinate point (1-based label).
pub fn index_of(coord: &Rational, n: usize) -> Result<usize> {
    let i = coord
        .is_integer()
        .then(|| coord.to_integer().to_usize())
        .flatten()
        .ok_or_else(|| Error::Input("finite-space points are 1-based integer labels".into()))?;
    if i == 0 || i > n {
        return Err(Error::Input(format!("point label {i} out of range 1..={n}")));
    }
    Ok(i - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn countable_formula() {
        let s = FiniteMetricSpace::Countable { n: 5 };
        assert_eq!(s.distance(1, 2), SmallRatio::new(2, 3));
        assert_eq!(s.distance(2, 1), SmallRatio::new(2, 3));
        assert_eq!(s.validate(), None);
    }

    #[test]
    fn table_rejects_triangle_violation() {
        let r = |n| SmallRatio::from_integer(n);
        let t = vec![vec![r(0), r(1), r(5)], vec![r(1), r(0), r(1)], vec![r(5), r(1), r(0)]];
        let err = FiniteMetricSpace::from_table(vec!["a".into(), "b".into(), "c".into()], t);
        assert!(err.is_err());
    }
}
