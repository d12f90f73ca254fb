use carnot_bcp::certificates::{
    a_form, admissible_epsilon, aq_exact_check, calibrate_delta, check_bounds, dilate_exact, dilate_f64, layer_angle,
    lemma_sweep, on_boundary, region_classify, sphere_packing_estimate, Lemma, Region, RegionParams,
};
use carnot_bcp::linalg::stereographic_point;
use carnot_bcp::scalar::{int, rat, Rational};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(rank: usize, r: Rational) -> RegionParams {
    RegionParams::new(rank, r).unwrap()
}

fn sphere_point(rng: &mut ChaCha8Rng, pr: &RegionParams) -> Vec<Rational> {
    let u: Vec<Rational> =
        (0..pr.dim() - 1).map(|_| rat(rng.random_range(-12..=12), rng.random_range(1..=12))).collect();
    stereographic_point(&u, &pr.radius)
}

#[test]
fn boundary_points_satisfy_the_norm_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (rank, r) in [(2, int(1)), (3, rat(1, 2))] {
        let base = params(rank, r);
        let mut prime = base.clone();
        prime.a = base.a_prime.clone();
        prime.a_prime = &base.a_prime + int(1);
        let mut hits = [0usize; 3];
        for _ in 0..5_000 {
            let p = sphere_point(&mut rng, &base);
            assert!(on_boundary(&p, &base).unwrap());
            assert_eq!(a_form(&p, &p, &base).unwrap(), -(&base.radius * &base.radius));
            for pr in [&base, &prime] {
                let b = check_bounds(&p, pr).unwrap();
                assert!(b.holds(), "{p:?} {b:?}");
                hits[0] += b.w_lower.is_some() as usize;
                hits[1] += b.v_lower.is_some() as usize;
            }
            let inner = dilate_exact(&p, &rat(rng.random_range(1..=9), 10), &base).unwrap();
            let b = check_bounds(&inner, &base).unwrap();
            assert!(b.holds());
            hits[2] += b.w_upper.is_some() as usize;
        }
        assert!(hits.iter().all(|h| *h > 100), "{hits:?}");
    }
}

#[test]
fn exact_aq_agreement() {
    for (rank, r) in [(2, int(1)), (3, int(1)), (2, rat(1, 2))] {
        let rep = aq_exact_check(&params(rank, r), 150, 3).unwrap();
        assert!(rep.disagreements.is_empty(), "{:?}", rep.disagreements[0]);
        assert!(rep.boundary > 0 && rep.inside > 0 && rep.outside > 0);
    }
}

#[test]
fn sweeps_on_both_ranks_and_radii() {
    for rank in [2, 3] {
        for r in [rat(1, 2), int(1)] {
            let pr = params(rank, r);
            for lemma in Lemma::ALL {
                let rep = lemma_sweep(lemma, &pr, None, None, 1_000, 21).unwrap();
                assert!(rep.passed(), "{lemma} r={rank}: {:?}", rep.violations[0]);
                assert_eq!(rep.hypothesis_satisfying, 1_000);
                if matches!(lemma, Lemma::Away | Lemma::Near2a | Lemma::Inbetween) {
                    assert!(rep.max_a_form.unwrap() <= 1e-9);
                }
            }
        }
    }
}

#[test]
fn report_round_trips() {
    let rep = lemma_sweep(Lemma::Away, &params(2, int(1)), None, None, 100, 1).unwrap();
    let text = serde_json::to_string(&rep).unwrap();
    let back: carnot_bcp::certificates::SweepReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep);
    assert!(text.contains("\"R\":\"1\""));
}

#[test]
fn large_epsilon_breaks_the_conditions() {
    // δ calibrated for a tiny ε is much smaller than for a moderate one.
    let pr = params(2, int(1));
    let tight = calibrate_delta(&pr, &rat(1, 1000), 5_000, 2).unwrap();
    let loose = calibrate_delta(&pr, &rat(1, 10), 5_000, 2).unwrap();
    assert!(tight.delta < loose.delta);
    assert!(tight.delta <= (1e-3f64).asin() * 1.01);
}

#[test]
fn admissible_epsilon_shrinks_with_rank() {
    for lemma in [Lemma::Away, Lemma::Near2a, Lemma::Inbetween] {
        let e2 = admissible_epsilon(lemma, &params(2, int(1))).unwrap().epsilon;
        let e3 = admissible_epsilon(lemma, &params(3, int(1))).unwrap().epsilon;
        assert!(e3 <= e2 && e3 > Rational::zero());
    }
    assert!(admissible_epsilon(Lemma::Aq, &params(2, int(1))).is_err());
}

#[test]
fn packing_bound_dominates_search_families() {
    // Largest family found on F_22 with R = 1 is 8; with the calibrated δ the heuristic 3N² is far larger.
    let pr = params(2, int(1));
    let eps = admissible_epsilon(Lemma::Away, &pr).unwrap().epsilon;
    let delta = calibrate_delta(&pr, &eps, 20_000, 0).unwrap().delta;
    let est = sphere_packing_estimate(2, delta / 2.0).unwrap();
    assert!(est.heuristic_family_bound > 8);
}

proptest! {
    #[test]
    fn region_is_dilation_invariant(v in prop::collection::vec(-50i64..50, 3), den in 1i64..20, l in 1i64..40) {
        let pr = params(2, int(1));
        let p: Vec<Rational> = v.iter().map(|k| rat(*k, den)).collect();
        let lambda = rat(l, 7);
        let region: Region = region_classify(&p, &pr).unwrap();
        prop_assert_eq!(region_classify(&dilate_exact(&p, &lambda, &pr).unwrap(), &pr).unwrap(), region);
    }

    #[test]
    fn layer_angles_are_dilation_invariant(p in prop::collection::vec(-1.0f64..1.0, 6), q in prop::collection::vec(-1.0f64..1.0, 6), l in 0.01f64..100.0) {
        let pr = params(3, int(1));
        let a = layer_angle(&p, &q, &pr).unwrap();
        let b = layer_angle(&dilate_f64(&p, l, 3), &dilate_f64(&q, l, 3), &pr).unwrap();
        prop_assert!((a.v - b.v).abs() < 1e-12 && (a.w - b.w).abs() < 1e-12);
        prop_assert!((0.0..=std::f64::consts::PI).contains(&a.v));
    }
}
