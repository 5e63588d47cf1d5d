use super::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn ball(n: usize, r: f64) -> StarBody {
    StarBody::new(BodyDescriptor::Ball { n, r }).unwrap()
}

fn ellipsoid(a: &[f64]) -> StarBody {
    StarBody::new(BodyDescriptor::Ellipsoid { semi_axes: a.to_vec() }).unwrap()
}

fn s() -> Settings {
    Settings::default()
}

#[test]
fn larger_ball_is_consistent() {
    let r = bp_compare(&ball(3, 1.0), &ball(3, 1.1), 64, 1, None, &s()).unwrap();
    assert_eq!(r.verdict, Verdict::Consistent);
    assert!(r.min_gap > 0.0);
    assert!(r.volume_k2 > r.volume_k1);
    assert_eq!(r.volume_method_k1, "closed_form");
}

#[test]
fn body_against_itself_has_zero_gaps() {
    let k = ellipsoid(&[1.0, 2.0, 3.0]);
    let r = bp_compare(&k, &k, 64, 2, None, &s()).unwrap();
    assert_eq!(r.verdict, Verdict::Consistent);
    assert_eq!(r.min_gap, 0.0);
    assert_eq!(r.max_gap, 0.0);
    assert_eq!(r.volume_k1, r.volume_k2);
}

#[test]
fn smaller_ball_fails_dominance() {
    let r = bp_compare(&ball(3, 1.0), &ball(3, 0.5), 64, 3, None, &s()).unwrap();
    assert_eq!(r.verdict, Verdict::DominanceFails);
    assert!(r.min_gap < 0.0);
    assert_eq!(serde_json::to_value(r.verdict).unwrap(), "dominance-fails");
}

#[test]
fn dimensions_must_match() {
    assert!(matches!(
        bp_compare(&ball(3, 1.0), &ball(4, 1.0), 8, 0, None, &s()),
        Err(GeoError::DimensionMismatch { .. })
    ));
}

#[test]
fn counterexample_constants() {
    // κ₉ = π^{4.5}/Γ(5.5) with Γ(5.5) = 945√π/32.
    let kappa9 = PI.powf(4.5) / (945.0 * PI.sqrt() / 32.0);
    assert!((kappa9 - 3.29851).abs() < 1e-5);
    let r = counterexample_radius(10);
    assert!((r - (SQRT_2 / kappa9).powf(1.0 / 9.0)).abs() < 1e-14);
    assert!((r - 0.910192).abs() < 1e-6);
    let v10 = PI.powi(5) / 120.0 * r.powi(10);
    assert!((v10 - 0.995173).abs() < 1e-6, "{v10}");
    let r12 = counterexample_radius(12);
    let v12 = PI.powi(6) / 720.0 * r12.powi(12);
    assert!(v12 < v10);
    assert!(matches!(ball_counterexample(9, 16, 0, &s()), Err(GeoError::UnsupportedBody(_))));
}

#[test]
fn lutwak_equality_for_balls() {
    let r = lutwak_check(&ball(3, 1.0), &ball(3, 1.0), 64, 0, 1e-6, &s()).unwrap();
    assert!((r.scale - PI).abs() < 1e-10);
    assert!(r.margin.abs() < 1e-9, "{}", r.margin);
    let want = PI.powi(3) * 4.0 * PI / 3.0;
    assert!((r.volume_l1 - want).abs() < 1e-8 * want);
    assert!(r.holds);
}

#[test]
fn lutwak_for_ellipsoid() {
    let r = lutwak_check(&ellipsoid(&[1.0, 1.0, 1.5]), &ball(3, 1.0), 128, 0, 1e-6, &s()).unwrap();
    assert!(r.margin >= 0.0, "{}", r.margin);
    assert!(matches!(
        lutwak_check(&ball(4, 1.0), &ball(4, 1.0), 8, 0, 1e-6, &s()),
        Err(GeoError::UnsupportedBody(_))
    ));
}

#[test]
fn positivity_suite_of_the_ball() {
    let r = e3_positivity_suite(1, 0, 1e-6, 16, &s()).unwrap();
    assert!((r.min_margin - 1.0 / (2.0 * PI)).abs() < 1e-12);
    assert_eq!(r.rows.len(), 1);
    let csv = r.to_csv();
    assert!(csv.starts_with("body_id,margin,volume,verdict\n0,"));
    assert!(csv.trim_end().ends_with("intersection_body"));
}

#[test]
fn elongated_ellipsoid_is_an_intersection_body() {
    let v = is_intersection_body(&ellipsoid(&[1.0, 1.0, 4.0]), None, SUITE_RESOLUTION, 0).unwrap();
    assert!(v.is_intersection_body);
    assert!(v.margin > 0.0);
}

#[test]
fn suite_is_deterministic() {
    let a = e3_positivity_suite(6, 9, 1e-6, 24, &s()).unwrap();
    let b = e3_positivity_suite(6, 9, 1e-6, 24, &s()).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.min_margin > 0.0);
}

#[test]
fn random_convex_bodies_pass_the_probe() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let (body, _) = random_convex_body(&mut rng).unwrap();
        assert!(convexity_probe(&body, 5000, 1).passed());
        if let BodyDescriptor::Ellipsoid { semi_axes } = body.descriptor() {
            let (lo, hi) = semi_axes.iter().fold((f64::INFINITY, 0.0f64), |(l, h), a| (l.min(*a), h.max(*a)));
            assert!(hi / lo <= 5.0);
        }
    }
}

#[test]
fn max_section_of_ball_and_ellipsoid() {
    let b = max_section_search(&ball(3, 1.0), 2, 0, &s()).unwrap();
    assert!((b.value - PI).abs() < 1e-12);
    let e = max_section_search(&ellipsoid(&[1.0, 2.0, 3.0]), 3, 0, &s()).unwrap();
    assert!((e.value - 6.0 * PI).abs() < 0.01 * 6.0 * PI);
    assert!(e.direction[0].abs() > 0.99);
    assert!(max_section_search(&ball(3, 1.0), 0, 0, &s()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn verdicts_are_scale_invariant(sf in 0.3f64..3.0, r in 0.5f64..1.5, c in 1.0f64..2.0) {
        let k1 = ellipsoid(&[1.0, r, c]);
        let k2 = ball(3, 1.2);
        let a = bp_compare(&k1, &k2, 32, 4, None, &s()).unwrap();
        let b = bp_compare(&k1.scaled(sf).unwrap(), &k2.scaled(sf).unwrap(), 32, 4, None, &s()).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.min_gap.signum(), b.min_gap.signum());
    }
}
