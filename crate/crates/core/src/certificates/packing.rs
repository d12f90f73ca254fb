//! Constructive lower bounds on the number of unit vectors with pairwise angles above a threshold.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::angle;
use crate::error::{Error, Result};

const GREEDY_CANDIDATES: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingEstimate {
    pub dim: usize,
    pub angular_sep: f64,
    /// Size of an explicit configuration with all pairwise angles > angular_sep.
    pub lower: usize,
    /// 3 · lower². A heuristic stand-in for the family bound, not a proven constant.
    pub heuristic_family_bound: usize,
    pub note: String,
}

/// Explicit configuration: ± for dim 1, a regular polygon for dim 2, and for higher dimensions
/// the coordinate cross ±e_i (when it qualifies) extended greedily by seeded random directions.
pub fn sphere_packing_estimate(dim: usize, angular_sep: f64) -> Result<PackingEstimate> {
    if dim == 0 || !(angular_sep > 0.0 && angular_sep < std::f64::consts::PI) {
        return Err(Error::Input("need dim >= 1 and 0 < angular_sep < pi".into()));
    }
    let chosen = configuration(dim, angular_sep);
    debug_assert!(separated(&chosen, angular_sep));
    let lower = chosen.len();
    Ok(PackingEstimate {
        dim,
        angular_sep,
        lower,
        heuristic_family_bound: 3 * lower * lower,
        note: "lower bound from an explicit configuration; 3N^2 is reported as a heuristic only".into(),
    })
}

fn separated(vs: &[Vec<f64>], sep: f64) -> bool {
    vs.iter().enumerate().all(|(i, a)| vs[i + 1..].iter().all(|b| angle(a, b).unwrap() > sep))
}

fn configuration(dim: usize, sep: f64) -> Vec<Vec<f64>> {
    use std::f64::consts::TAU;
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            // Largest N with 2π/N > sep.
            let mut n = (TAU / sep).floor() as usize;
            while n > 1 && TAU / n as f64 <= sep {
                n -= 1;
            }
            let n = n.max(1);
            (0..n).map(|k| TAU * k as f64 / n as f64).map(|t| vec![t.cos(), t.sin()]).collect()
        }
        _ => {
            let mut chosen: Vec<Vec<f64>> = Vec::new();
            if sep < std::f64::consts::FRAC_PI_2 {
                for i in 0..dim {
                    for s in [1.0, -1.0] {
                        let mut e = vec![0.0; dim];
                        e[i] = s;
                        chosen.push(e);
                    }
                }
            } else {
                let mut e = vec![0.0; dim];
                e[0] = 1.0;
                chosen.push(e);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(dim as u64);
            for _ in 0..GREEDY_CANDIDATES {
                let x = random_unit(dim, &mut rng);
                if chosen.iter().all(|c| angle(c, &x).unwrap() > sep) {
                    chosen.push(x);
                }
            }
            chosen
        }
    }
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let x: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-12 {
            return x.into_iter().map(|c| c / n).collect();
        }
    }
}
