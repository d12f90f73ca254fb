//! Fixtures shared by the criterion benches.

use carnot_bcp::besicovitch::{search_family, BesicovitchFamily, SearchConfig};
use carnot_bcp::metrics::QuasiDistance;
use carnot_bcp::scalar::{int, rat};
use carnot_bcp::{builtin_group, GroupPoint, GroupSpec, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn hs(spec: GroupSpec) -> QuasiDistance {
    QuasiDistance::hs(builtin_group(&spec).expect("builtin group"), int(1)).expect("hs distance")
}

pub fn rational_points(dim: usize, n: usize, seed: u64) -> Vec<GroupPoint<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| GroupPoint::new((0..dim).map(|_| rat(rng.random_range(-40..=40), rng.random_range(1..=12))).collect()))
        .collect()
}

pub fn float_points(d: &QuasiDistance, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

/// Uniform points in the unit square with radii log-uniform in [1/16, 1].
pub fn cover_input(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let radii = (0..n).map(|_| (1.0f64 / 16.0).powf(rng.random::<f64>())).collect();
    (pts, radii)
}

pub fn found_family(d: &QuasiDistance) -> BesicovitchFamily {
    search_family(d, &SearchConfig::new(5_000, 0)).expect("search").family
}
