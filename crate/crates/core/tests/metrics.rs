use std::sync::Arc;

use carnot_bcp::metrics::{cc, hs, Membership, QuasiDistance, QuotientDistance};
use carnot_bcp::scalar::{int, rat};
use carnot_bcp::{builtin_group, GroupSpec, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hs_dist(spec: GroupSpec, r: Rational) -> QuasiDistance {
    QuasiDistance::hs(builtin_group(&spec).unwrap(), r).unwrap()
}

fn f32_to_h1(r: Rational) -> QuotientDistance {
    let inner = hs_dist(GroupSpec::FreeStep2(3), r);
    let target = Arc::new(builtin_group(&GroupSpec::Heisenberg(1)).unwrap());
    // X1 -> X, X2 -> Y, X3 -> 0, X12 -> Z, X13, X23 -> 0
    let mut m = vec![vec![int(0); 6]; 3];
    m[0][0] = int(1);
    m[1][1] = int(1);
    m[2][3] = int(1);
    QuotientDistance::new(inner, target, m).unwrap()
}

fn all_kinds() -> Vec<QuasiDistance> {
    let snow = QuasiDistance::power(QuasiDistance::euclidean(1), int(2)).unwrap();
    vec![
        hs_dist(GroupSpec::Heisenberg(1), int(1)),
        hs_dist(GroupSpec::Heisenberg(2), rat(1, 2)),
        hs_dist(GroupSpec::HeisenbergNonstandard(int(2)), int(1)),
        hs_dist(GroupSpec::FreeStep2(3), int(1)),
        hs_dist(GroupSpec::GradedVsStratified, int(1)),
        QuasiDistance::power(hs_dist(GroupSpec::Heisenberg(1), int(1)), rat(3, 2)).unwrap(),
        QuasiDistance::product_max(QuasiDistance::euclidean(1), snow.clone()),
        QuasiDistance::lp_combo(QuasiDistance::euclidean(1), snow, int(1)).unwrap(),
        QuasiDistance::lp_combo(QuasiDistance::euclidean(2), hs_dist(GroupSpec::Heisenberg(1), int(1)), int(3))
            .unwrap(),
        QuasiDistance::CcH1 { scale: 1.0 },
        QuasiDistance::CcH1 { scale: 0.5 },
        QuasiDistance::Quotient(Box::new(f32_to_h1(rat(1, 2)))),
    ]
}

#[test]
fn homogeneity_and_left_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in all_kinds() {
        let n = if matches!(d, QuasiDistance::Quotient(_)) { 100 } else { 1000 };
        for _ in 0..n {
            let (p, q, g) = (d.sample(&mut rng), d.sample(&mut rng), d.sample(&mut rng));
            let l = rng.random_range(-3.0f64..3.0).exp();
            let base = d.dist(&p, &q).unwrap();
            let scaled = d.dist(&d.dilate(&p, l).unwrap(), &d.dilate(&q, l).unwrap()).unwrap();
            assert!((scaled - l * base).abs() <= 1e-8 * l * base, "{}: {scaled} vs {}", d.kind(), l * base);
            let (gp, gq) = (translate(&d, &g, &p), translate(&d, &g, &q));
            let moved = d.dist(&gp, &gq).unwrap();
            assert!((moved - base).abs() <= 1e-8 * base.max(1e-300), "{}: {moved} vs {base}", d.kind());
            let back = d.dist(&q, &p).unwrap();
            assert!((back - base).abs() <= 1e-9 * base, "{}: symmetry", d.kind());
        }
    }
}

/// g·p, using p⁻¹q with p = g⁻¹.
fn translate(d: &QuasiDistance, g: &[f64], p: &[f64]) -> Vec<f64> {
    let ginv: Vec<f64> = g.iter().map(|v| -v).collect();
    d.difference(&ginv, p).unwrap()
}

#[test]
fn orbit_norm_vanishes_with_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in all_kinds() {
        let p = d.sample(&mut rng);
        let d0 = d.dist(&vec![0.0; d.dim()], &p).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..200 {
            let x = d.dilate(&p, 1.0 / k as f64).unwrap();
            let v = d.norm(&x).unwrap();
            assert!(v < prev);
            assert!((v - d0 / k as f64).abs() <= 1e-8 * d0);
            prev = v;
        }
    }
}

#[test]
fn closed_form_on_heisenberg_groups() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=3 {
        let g = builtin_group(&GroupSpec::Heisenberg(n)).unwrap();
        let w = g.algebra().weights_f64();
        for _ in 0..2000 {
            let x: Vec<f64> = (0..2 * n + 1).map(|_| rng.random_range(-5.0..5.0)).collect();
            let r = rng.random_range(0.1..3.0);
            let a = hs::hs_norm(&x, w, r).unwrap();
            let c = hs::heisenberg_closed_form(&x, r);
            assert!((a - c).abs() <= 1e-10 * c);
        }
    }
}

#[test]
fn membership_equivariant_under_dilation() {
    let d = hs_dist(GroupSpec::Heisenberg(1), int(1));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..300 {
        let mut pt = || -> Vec<Rational> { (0..3).map(|_| rat(rng.random_range(-20..20), 7)).collect() };
        let (c, q) = (pt(), pt());
        let rho = rat(rng.random_range(1..40), 9);
        let l = rat(rng.random_range(1..9), rng.random_range(1..9));
        let m = d.membership_exact(&c, &rho, &q).unwrap();
        let m2 = d
            .membership_exact(&d.dilate_exact(&c, &l).unwrap(), &(&rho * &l), &d.dilate_exact(&q, &l).unwrap())
            .unwrap();
        assert_eq!(m, m2);
    }
}

#[test]
fn quotient_identity_kernel_is_inner() {
    let inner = hs_dist(GroupSpec::Heisenberg(1), int(1));
    let target = Arc::new(builtin_group(&GroupSpec::Heisenberg(1)).unwrap());
    let id = (0..3).map(|i| (0..3).map(|j| int((i == j) as i64)).collect()).collect();
    let q = QuotientDistance::new(inner.clone(), target, id).unwrap();
    assert_eq!(q.kernel_dim(), 0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x = inner.sample(&mut rng);
        assert_eq!(q.norm(&x).unwrap(), inner.norm(&x).unwrap());
    }
}

#[test]
fn quotient_below_canonical_lift_and_matches_grid() {
    let q = f32_to_h1(int(1));
    assert_eq!(q.kernel_dim(), 3);
    let h1 = hs_dist(GroupSpec::Heisenberg(1), int(1));
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let y = h1.sample(&mut rng);
        let canonical = vec![y[0], y[1], 0.0, y[2], 0.0, 0.0];
        let v = q.norm(&y).unwrap();
        assert!(v <= q.inner.norm(&canonical).unwrap() + 1e-12);
        let g = q.grid_minimum(&y, 64).unwrap();
        assert!(v <= g + 1e-12 && g - v <= 2e-3 * v, "{v} vs grid {g}");
        let (nm, _) = q.minimize(&q.lift_f64(&y)).unwrap();
        assert!((nm - v).abs() <= 1e-9 * v);
    }
}

#[test]
fn quotient_rejects_bad_maps() {
    let inner = hs_dist(GroupSpec::FreeStep2(3), int(1));
    let target = Arc::new(builtin_group(&GroupSpec::Heisenberg(1)).unwrap());
    let zero = vec![vec![int(0); 6]; 3];
    assert!(QuotientDistance::new(inner.clone(), target.clone(), zero).is_err());
    let mut swap = vec![vec![int(0); 6]; 3];
    swap[2][0] = int(1);
    swap[0][3] = int(1);
    swap[1][1] = int(1);
    assert!(QuotientDistance::new(inner, target, swap).is_err());
}

#[test]
fn quotient_exact_membership_agrees_with_float() {
    let q = QuasiDistance::Quotient(Box::new(f32_to_h1(int(1))));
    assert!(q.is_exact_capable());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let x: Vec<Rational> = (0..3).map(|_| rat(rng.random_range(-30..30), 11)).collect();
        let rho = rat(rng.random_range(1..50), 13);
        let xf: Vec<f64> = x.iter().map(carnot_bcp::scalar::rational_to_f64).collect();
        let d = q.norm(&xf).unwrap();
        let m = q.norm_membership_exact(&x, &rho).unwrap().unwrap();
        let rf = carnot_bcp::scalar::rational_to_f64(&rho);
        if (d - rf).abs() > 1e-9 {
            assert_eq!(m, if d < rf { Membership::Inside } else { Membership::Outside });
        }
    }
}

#[test]
fn cc_vertical_value() {
    let d = cc::cc_norm_h1(&[0.0, 0.0, 1.0], 1.0).unwrap();
    assert!((d - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-6);
}

#[test]
fn unit_ball_kind_matches_hs_for_euclidean_ball() {
    use carnot_bcp::metrics::BallOracle;
    let g = Arc::new(builtin_group(&GroupSpec::Heisenberg(1)).unwrap());
    let u = QuasiDistance::UnitBall { group: g.clone(), oracle: BallOracle::Euclidean { radius: 1.0 } };
    let h = QuasiDistance::Hs { group: g, r: int(1) };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let (p, q) = (h.sample(&mut rng), h.sample(&mut rng));
        let (a, b) = (u.dist(&p, &q).unwrap(), h.dist(&p, &q).unwrap());
        assert!((a - b).abs() <= 1e-9 * b);
    }
}

proptest! {
    #[test]
    fn hs_solver_hits_the_sphere(x in prop::collection::vec(-1e3f64..1e3, 5), r in 0.05f64..4.0) {
        prop_assume!(x.iter().any(|v| *v != 0.0));
        let w = [1.0, 1.0, 1.0, 1.0, 2.0];
        let l = hs::hs_norm(&x, &w, r).unwrap();
        let s: f64 = x.iter().zip(&w).map(|(v, w)| (v * l.powf(-w)).powi(2)).sum();
        prop_assert!((s.sqrt() - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn power_preserves_balls(x in -50i64..50, rho in 1i64..30) {
        let d = QuasiDistance::power(QuasiDistance::euclidean(1), int(2)).unwrap();
        let e = QuasiDistance::euclidean(1);
        let rho = rat(rho, 5);
        let a = d.membership_exact(&[int(0)], &rho, &[rat(x, 3)]).unwrap();
        let b = e.membership_exact(&[int(0)], &(&rho * &rho), &[rat(x, 3)]).unwrap();
        prop_assert_eq!(a, b);
    }
}
