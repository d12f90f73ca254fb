//! Constructive cover by blocks of comparable radii.
//!
//! Block j starts at M_j = max radius among still-uncovered points. Its first ball is a point of
//! radius M_j (smallest index on ties); the block then scans, in input order, the uncovered points
//! with radius ≥ M_j/2 and selects each one not yet covered.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::QuasiDistance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    /// Input indices of the chosen centers, in selection order (0-based).
    pub selected: Vec<usize>,
    /// Positions in `selected` where each block starts.
    pub block_starts: Vec<usize>,
    /// M_j for each block.
    pub block_bounds: Vec<f64>,
    /// Largest number of chosen balls containing a single input point.
    pub multiplicity: usize,
    pub covered: bool,
    /// d(x_i, x_j) > (r_i + r_j)/4 for all chosen pairs; for a distance this makes quarter balls disjoint.
    pub quarter_separated: bool,
    /// Every chosen center lies outside all previously chosen balls.
    pub centers_outside_earlier_balls: bool,
}

pub fn greedy_cover(points: &[Vec<f64>], radii: &[f64], d: &QuasiDistance) -> Result<CoverReport> {
    if points.len() != radii.len() {
        return Err(Error::Dimension { expected: points.len(), got: radii.len() });
    }
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::Input("radii must be positive and finite".into()));
    }
    let n = points.len();
    let mut covered = vec![false; n];
    let mut selected: Vec<usize> = Vec::new();
    let (mut block_starts, mut block_bounds) = (Vec::new(), Vec::new());
    let mark = |c: usize, covered: &mut [bool]| -> Result<()> {
        for (k, p) in points.iter().enumerate() {
            if !covered[k] && d.dist(&points[c], p)? <= radii[c] {
                covered[k] = true;
            }
        }
        Ok(())
    };
    loop {
        let mut first: Option<usize> = None;
        for k in 0..n {
            if !covered[k] && first.is_none_or(|f| radii[k] > radii[f]) {
                first = Some(k);
            }
        }
        let Some(first) = first else { break };
        let m = radii[first];
        block_starts.push(selected.len());
        block_bounds.push(m);
        selected.push(first);
        mark(first, &mut covered)?;
        for k in 0..n {
            if !covered[k] && radii[k] >= 0.5 * m {
                selected.push(k);
                mark(k, &mut covered)?;
            }
        }
    }

    let mut multiplicity = 0;
    for p in points {
        let mut c = 0;
        for &s in &selected {
            if d.dist(&points[s], p)? <= radii[s] {
                c += 1;
            }
        }
        multiplicity = multiplicity.max(c);
    }
    let mut quarter_separated = true;
    let mut centers_outside = true;
    for (a, &i) in selected.iter().enumerate() {
        for &j in &selected[a + 1..] {
            let dij = d.dist(&points[i], &points[j])?;
            quarter_separated &= dij > 0.25 * (radii[i] + radii[j]);
            centers_outside &= dij > radii[i];
        }
    }
    let all_covered =
        points.iter().all(|p| selected.iter().any(|&s| d.dist(&points[s], p).map(|v| v <= radii[s]).unwrap_or(false)));
    Ok(CoverReport {
        selected,
        block_starts,
        block_bounds,
        multiplicity,
        covered: all_covered,
        quarter_separated,
        centers_outside_earlier_balls: centers_outside,
    })
}
