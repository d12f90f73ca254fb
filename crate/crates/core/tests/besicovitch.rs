use carnot_bcp::besicovitch::*;
use carnot_bcp::linalg::stereographic_point;
use carnot_bcp::metrics::{Membership, QuasiDistance, SmallRatio};
use carnot_bcp::scalar::{int, rat, rational_to_f64, Rational};
use carnot_bcp::{builtin_group, GroupSpec};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn nonstandard() -> QuasiDistance {
    QuasiDistance::hs(builtin_group(&GroupSpec::HeisenbergNonstandard(int(2))).unwrap(), int(1)).unwrap()
}

fn f22() -> QuasiDistance {
    QuasiDistance::hs(builtin_group(&GroupSpec::FreeStep2(2)).unwrap(), int(1)).unwrap()
}

#[test]
fn countable_space_axioms_and_balls() {
    let s = countable_space(200).unwrap();
    assert_eq!(s.validate(), None);
    assert_eq!(s.distance(1, 2), SmallRatio::new(2, 3));
    assert!(ball_structure_holds(&countable_space(2_000).unwrap(), 2_000));
    // Covering x_2..x_m by balls B(x_i, r_i) needs an index ≥ m, and x_1 lies in every such ball.
    let m = 50;
    for i in 1..=200usize {
        let r = SmallRatio::new(i as i64 - 1, i as i64);
        assert!(s.distance(i - 1, 0) <= r);
        assert_eq!(s.distance(i - 1, m - 1) <= r, i >= m);
    }
}

#[test]
fn countable_space_has_no_two_ball_family() {
    let s = countable_space(200).unwrap();
    let grid = |_| (1..=64).map(|k| SmallRatio::new(k, 64)).collect();
    assert_eq!(find_two_ball_family(&s, &grid), None);
    // Radii just below the critical values r_j = 1 − 1/j.
    let below = |i: usize| {
        (2..=64i64)
            .map(|m| SmallRatio::new(m - 1, m) - SmallRatio::new(1, 64 * m))
            .chain(std::iter::once(SmallRatio::new(i as i64, i as i64 + 1)))
            .collect()
    };
    assert_eq!(find_two_ball_family(&s, &below), None);
}

#[test]
fn greedy_cover_on_random_planes() {
    let d = QuasiDistance::euclidean(2);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..400).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let radii: Vec<f64> = (0..400).map(|_| (1.0f64 / 16.0).powf(rng.random::<f64>())).collect();
        let rep = greedy_cover(&pts, &radii, &d).unwrap();
        assert!(rep.covered && rep.quarter_separated && rep.centers_outside_earlier_balls);
        assert!(rep.block_bounds.windows(2).all(|w| w[1] <= w[0] / 2.0));
        let max_r = radii.iter().cloned().fold(0.0, f64::max);
        assert_eq!(radii[rep.selected[0]], max_r);
    }
}

#[test]
fn single_block_cover_is_plain_greedy() {
    let d = QuasiDistance::euclidean(1);
    let pts: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 * 0.37]).collect();
    let radii: Vec<f64> = (0..30).map(|i| 1.0 + 0.02 * (i % 7) as f64).collect();
    let rep = greedy_cover(&pts, &radii, &d).unwrap();
    assert_eq!(rep.block_starts, vec![0]);
    assert!(rep.covered && rep.quarter_separated);
}

#[test]
fn search_output_re_verifies() {
    for d in [f22(), nonstandard()] {
        let out = search_family(&d, &SearchConfig::new(3_000, 4)).unwrap();
        assert!(out.certificate.valid);
        assert_eq!(out.certification_failures, 0);
        let again = verify_family(&out.family, &d).unwrap();
        assert!(again.valid && again.mode == CertificateMode::Exact);
        // Independent float cross-check of the Besicovitch conditions.
        let c: Vec<Vec<f64>> = out.family.centers.iter().map(|p| p.iter().map(rational_to_f64).collect()).collect();
        let r: Vec<f64> = out.family.radii.iter().map(rational_to_f64).collect();
        let e = vec![0.0; d.dim()];
        for i in 0..c.len() {
            assert!(d.dist(&c[i], &e).unwrap() <= r[i] * (1.0 + 1e-12));
            for j in 0..c.len() {
                if i != j {
                    assert!(d.dist(&c[j], &c[i]).unwrap() > r[j] * (1.0 - 1e-12));
                }
            }
        }
    }
}

#[test]
fn tampered_family_is_rejected() {
    let d = f22();
    let out = search_family(&d, &SearchConfig::new(2_000, 1)).unwrap();
    assert!(out.family.len() >= 2);
    let mut bad = out.family.clone();
    bad.radii[0] = &bad.radii[0] * int(100);
    assert!(!verify_family(&bad, &d).unwrap().valid);
    let mut bad = out.family.clone();
    bad.radii[1] = &bad.radii[1] * rat(1, 2);
    let cert = verify_family(&bad, &d).unwrap();
    assert_eq!(cert.violation, Some(FamilyViolation::WitnessOutside { ball: 2 }));
}

#[test]
fn annealed_search_is_sound() {
    let d = nonstandard();
    let mut cfg = SearchConfig::new(4_000, 2);
    cfg.strategy = Strategy::Annealed;
    let out = search_family(&d, &cfg).unwrap();
    assert!(out.certificate.valid && out.family.len() >= 3);
}

#[test]
fn orbit_scan_successes_verify() {
    let d = nonstandard();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures_at_one = 0;
    for _ in 0..300 {
        let u: Vec<Rational> = (0..2).map(|_| rat(rng.random_range(-30..=30), rng.random_range(1..=10))).collect();
        let p = stereographic_point(&u, &int(1));
        for rho in [rat(1, 2), rat(1, 4)] {
            match dilation_orbit_family(&d, &p, &rho, 1, 4).unwrap() {
                OrbitOutcome::Success { family, certificate } => {
                    assert!(certificate.valid);
                    assert_eq!(family.len(), 4);
                }
                OrbitOutcome::Failure { j } => {
                    assert!(j >= 1);
                    failures_at_one += (j == 1) as usize;
                }
            }
        }
    }
    assert!(failures_at_one > 0);
}

#[test]
fn segment_witness_is_exact() {
    let d = nonstandard();
    let w = segment_witness_nonbcp(&d, 200, 16, 0).unwrap().expect("a segment point outside the ball");
    let e = vec![Rational::zero(); 3];
    assert_eq!(d.membership_exact(&e, &int(1), &w.point).unwrap(), Some(Membership::Outside));
    assert_eq!(d.norm_membership_exact(&w.p, &int(1)).unwrap(), Some(Membership::Boundary));
    assert!(w.excess > 0.0);
    assert_eq!(segment_point(&d, &w.p, &w.t, w.mirrored).unwrap(), w.point);
    // The endpoint formula (0, y, z + x y / 2).
    let end = segment_point(&d, &w.p, &int(1), false).unwrap();
    assert_eq!(end, vec![int(0), w.p[1].clone(), &w.p[2] + &w.p[0] * &w.p[1] / int(2)]);
}

#[test]
fn family_json_round_trip() {
    let out = search_family(&f22(), &SearchConfig::new(1_000, 0)).unwrap();
    let text = serde_json::to_string(&out.family).unwrap();
    let back: BesicovitchFamily = serde_json::from_str(&text).unwrap();
    assert_eq!(back, out.family);
}
