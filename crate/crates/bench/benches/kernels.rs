use carnot_bcp::besicovitch::{greedy_cover, search_family, verify_family, SearchConfig};
use carnot_bcp::certificates::{lemma_sweep, Lemma, RegionParams};
use carnot_bcp::metrics::QuasiDistance;
use carnot_bcp::scalar::int;
use carnot_bcp::{builtin_group, GroupSpec};
use carnot_bcp_bench::{cover_input, float_points, found_family, hs, rational_points};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn group_law(c: &mut Criterion) {
    let g = builtin_group(&GroupSpec::FreeStep2(3)).unwrap();
    let pts = rational_points(g.dim(), 64, 1);
    c.bench_function("f32 multiply exact", |b| {
        b.iter(|| pts.windows(2).map(|w| g.multiply(&w[0], &w[1]).unwrap()).collect::<Vec<_>>())
    });
    let fpts: Vec<_> = pts.iter().map(|p| p.to_f64()).collect();
    c.bench_function("f32 multiply f64", |b| {
        b.iter(|| fpts.windows(2).map(|w| g.multiply(&w[0], &w[1]).unwrap()).collect::<Vec<_>>())
    });
}

fn distances(c: &mut Criterion) {
    for (name, d) in [
        ("hs h1", hs(GroupSpec::Heisenberg(1))),
        ("hs nonstandard", hs(GroupSpec::HeisenbergNonstandard(int(2)))),
        ("cc h1", QuasiDistance::CcH1 { scale: 1.0 }),
    ] {
        let pts = float_points(&d, 256, 2);
        c.bench_function(&format!("{name} dist x255"), |b| {
            b.iter(|| pts.windows(2).map(|w| d.dist(black_box(&w[0]), black_box(&w[1])).unwrap()).sum::<f64>())
        });
    }
}

fn besicovitch(c: &mut Criterion) {
    let d = hs(GroupSpec::FreeStep2(2));
    let fam = found_family(&d);
    c.bench_function("verify f22 family exact", |b| b.iter(|| verify_family(black_box(&fam), &d).unwrap()));
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.bench_function("f22 budget 2000", |b| b.iter(|| search_family(&d, &SearchConfig::new(2_000, 0)).unwrap()));
    g.finish();
    let (pts, radii) = cover_input(1_000, 3);
    let e = QuasiDistance::euclidean(2);
    c.bench_function("greedy cover 1000", |b| b.iter(|| greedy_cover(&pts, &radii, &e).unwrap()));
}

fn sweeps(c: &mut Criterion) {
    let pr = RegionParams::new(2, int(1)).unwrap();
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("away 1000", |b| b.iter(|| lemma_sweep(Lemma::Away, &pr, None, Some(0.01), 1_000, 0).unwrap()));
    g.finish();
}

criterion_group!(benches, group_law, distances, besicovitch, sweeps);
criterion_main!(benches);
