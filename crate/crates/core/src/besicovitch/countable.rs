//! The space {x₁, x₂, …} with d(x_i, x_j) = 1 − 1/max(i, j): bounded Besicovitch families, no BCP.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{FiniteMetricSpace, SmallRatio};

/// The first `n` points.
pub fn countable_space(n: usize) -> Result<FiniteMetricSpace> {
    if n < 2 {
        return Err(Error::Input("countable space needs n >= 2".into()));
    }
    Ok(FiniteMetricSpace::Countable { n })
}

/// Exact `a ≤ b` style comparison by cross-multiplication in 128 bits.
fn cmp(a: &SmallRatio, b: &SmallRatio) -> Ordering {
    (*a.numer() as i128 * *b.denom() as i128).cmp(&(*b.numer() as i128 * *a.denom() as i128))
}

/// Closed ball as a bitset over the points.
fn ball(s: &FiniteMetricSpace, center: usize, r: &SmallRatio) -> Vec<u64> {
    let n = s.len();
    let mut bits = vec![0u64; n.div_ceil(64)];
    for j in 0..n {
        if cmp(&s.distance(center, j), r) != Ordering::Greater {
            bits[j / 64] |= 1 << (j % 64);
        }
    }
    bits
}

fn has(bits: &[u64], j: usize) -> bool {
    bits[j / 64] >> (j % 64) & 1 == 1
}

/// B(x_i, 1 − 1/i) = {x_1, …, x_i} for every i ≤ `up_to` (1-based), checked against all points.
pub fn ball_structure_holds(s: &FiniteMetricSpace, up_to: usize) -> bool {
    (1..=up_to.min(s.len())).all(|i| {
        let r = SmallRatio::new(i as i64 - 1, i as i64);
        (0..s.len()).all(|j| (cmp(&s.distance(i - 1, j), &r) != Ordering::Greater) == (j < i))
    })
}

/// A two-ball Besicovitch family (1-based labels).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoBallFamily {
    pub centers: (usize, usize),
    pub radii: (String, String),
    pub witness: usize,
}

/// Exhaustive search for B(x_i, ρ_i), B(x_j, ρ_j) with a common point and neither center in the
/// other ball, over all pairs i < j and the radii offered by `radii(i)` (0-based center).
pub fn find_two_ball_family(s: &FiniteMetricSpace, radii: &dyn Fn(usize) -> Vec<SmallRatio>) -> Option<TwoBallFamily> {
    let n = s.len();
    let balls: Vec<Vec<(SmallRatio, Vec<u64>)>> =
        (0..n).map(|i| radii(i).into_iter().map(|r| (r, ball(s, i, &r))).collect()).collect();
    for i in 0..n {
        for j in i + 1..n {
            for (ri, bi) in &balls[i] {
                if has(bi, j) {
                    continue;
                }
                for (rj, bj) in &balls[j] {
                    if has(bj, i) {
                        continue;
                    }
                    if let Some(w) = bi.iter().zip(bj).position(|(a, b)| a & b != 0) {
                        let word = bi[w] & bj[w];
                        return Some(TwoBallFamily {
                            centers: (i + 1, j + 1),
                            radii: (ri.to_string(), rj.to_string()),
                            witness: w * 64 + word.trailing_zeros() as usize + 1,
                        });
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let s = countable_space(30).unwrap();
        assert!(ball_structure_holds(&s, 30));
        let grid = |_| (1..=64).map(|k| SmallRatio::new(k, 64)).collect();
        assert_eq!(find_two_ball_family(&s, &grid), None);
        let every =
            |_| (0..=30).map(|m: i64| if m == 0 { SmallRatio::new(0, 1) } else { SmallRatio::new(m - 1, m) }).collect();
        assert_eq!(find_two_ball_family(&s, &every), None);
        assert!(countable_space(1).is_err());
    }

    #[test]
    fn detects_families_in_other_spaces() {
        // Three points on a line: -1, 0, 1 with balls of radius 1 around ±1.
        let r = |n| SmallRatio::from_integer(n);
        let t = vec![vec![r(0), r(1), r(2)], vec![r(1), r(0), r(1)], vec![r(2), r(1), r(0)]];
        let s = FiniteMetricSpace::from_table(vec!["-1".into(), "0".into(), "1".into()], t).unwrap();
        let f = find_two_ball_family(&s, &|_| vec![r(1)]).unwrap();
        assert_eq!(f.centers, (1, 3));
        assert_eq!(f.witness, 2);
    }
}
