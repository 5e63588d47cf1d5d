use super::*;
use crate::radon::{intersection_body_of, radon_transform};
use crate::sphere_quad::{random_directions, sph_harm};

fn body(json: &str) -> StarBody {
    StarBody::parse(json).unwrap()
}

fn dir(v: &[f64]) -> Direction {
    Direction::from_slice(v).unwrap()
}

fn e3() -> Direction {
    Direction::axis(3, 2)
}

fn ylm(l: usize, m: i64, u: &[f64]) -> f64 {
    sph_harm(l, m, u[1].atan2(u[0]), u[2].clamp(-1.0, 1.0).acos()).unwrap()
}

#[test]
fn latitude_average_of_ball_is_radius() {
    let k = body(r#"{"type":"ball","n":3,"r":1.7}"#);
    let f = PoleFrame::new(&dir(&[0.2, 0.3, 0.9])).unwrap();
    for phi in [0.0, 0.4, FRAC_PI_2, 2.0, PI] {
        assert!((latitude_average(&k, &f, phi, 256).unwrap() - 1.7).abs() < 1e-14);
    }
}

#[test]
fn latitude_average_of_spheroid_is_its_profile() {
    let k = body(r#"{"type":"ellipsoid","semi_axes":[1.0,1.0,2.0]}"#);
    let f = PoleFrame::new(&e3()).unwrap();
    for i in 0..=10 {
        let phi = i as f64 * PI / 10.0;
        let want = (phi.sin().powi(2) + phi.cos().powi(2) / 4.0).powf(-0.5);
        assert!((latitude_average(&k, &f, phi, 256).unwrap() - want).abs() < 1e-13);
    }
    assert!((latitude_average(&k, &f, 0.0, 64).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn latitude_average_converges() {
    let k = body(r#"{"type":"ellipsoid","semi_axes":[1.0,2.0,3.0]}"#);
    let f = PoleFrame::new(&e3()).unwrap();
    let a = latitude_average(&k, &f, FRAC_PI_2, 256).unwrap();
    let b = latitude_average(&k, &f, FRAC_PI_2, 4096).unwrap();
    assert!((a - b).abs() < 1e-10);
    assert!(latitude_average(&k, &f, -0.1, 256).is_err());
}

#[test]
fn ball_inverts_to_constant() {
    for a in [0.5, 1.0, 3.0] {
        let k = StarBody::new(crate::BodyDescriptor::Ball { n: 3, r: a }).unwrap();
        for u in random_directions(3, 3, 1) {
            let g1 = funk_invert_eq1(&k, &u, &Eq1Params::default()).unwrap();
            let g2 = funk_invert_abel(&k, &u, &AbelParams::default()).unwrap().g;
            assert!((g1 - a / (2.0 * PI)).abs() < 1e-10 * a, "eq1 {g1}");
            assert!((g2 - a / (2.0 * PI)).abs() < 1e-10 * a, "abel {g2}");
        }
    }
}

#[test]
fn eq1_matches_multiplier_oracle() {
    let k = body(r#"{"type":"perturbed_ball","r0":1.0,"amplitude":0.2,"coeffs":[{"l":4,"m":0,"c":1.0}]}"#);
    let p4 = 3.0 / 8.0;
    for u in std::iter::once(e3()).chain(random_directions(3, 5, 2)) {
        let want = 1.0 / (2.0 * PI) + 0.2 * ylm(4, 0, u.as_slice()) / (2.0 * PI * p4);
        let got = funk_invert_eq1(&k, &u, &Eq1Params::default()).unwrap();
        assert!((got - want).abs() < 1e-5, "{got} vs {want}");
    }
}

#[test]
fn abel_matches_harmonic_route() {
    let k = body(r#"{"type":"perturbed_ball","r0":1.0,"amplitude":0.2,"coeffs":[{"l":2,"m":0,"c":1.0}]}"#);
    let inv = harmonic_invert_body(&k, &Settings::default(), Some(8)).unwrap();
    for u in std::iter::once(e3()).chain(random_directions(3, 3, 3)) {
        let a = funk_invert_abel(&k, &u, &AbelParams::default()).unwrap();
        let h = inv.evaluate(u.as_slice()).unwrap();
        assert!((a.g - h).abs() < 1e-4, "{} vs {h}", a.g);
        assert!(a.residual < 1e-6);
    }
}

#[test]
fn routes_agree_on_spheroid() {
    let k = body(r#"{"type":"ellipsoid","semi_axes":[1.0,1.0,2.0]}"#);
    let inv = harmonic_invert_body(&k, &Settings::default(), None).unwrap();
    for u in [e3(), Direction::axis(3, 0)] {
        let e = funk_invert_eq1(&k, &u, &Eq1Params::default()).unwrap();
        let a = funk_invert_abel(&k, &u, &AbelParams::default()).unwrap().g;
        let h = inv.evaluate(u.as_slice()).unwrap();
        assert!((e - a).abs() < 1e-4);
        assert!((e - h).abs() < 1e-4);
    }
}

#[test]
fn smoothness_gate() {
    let cube = body(r#"{"type":"box","n":3,"half_sides":[0.5,0.5,0.5]}"#);
    assert!(matches!(funk_invert_eq1(&cube, &e3(), &Eq1Params::default()), Err(GeoError::UnsupportedBody(_))));
    assert!(matches!(funk_invert_abel(&cube, &e3(), &AbelParams::default()), Err(GeoError::UnsupportedBody(_))));
    assert!(matches!(preimage_body(&cube, None, &Settings::default()), Err(GeoError::UnsupportedBody(_))));
}

#[test]
fn harmonic_multipliers() {
    let grid = SphereGrid::new(16, 32).unwrap();
    let values: Vec<f64> = vec![2.0; grid.len()];
    let inv = harmonic_invert(&grid, &values, 8).unwrap();
    assert!(inv.values.iter().all(|g| (g - 1.0 / PI).abs() < 1e-13));

    let values: Vec<f64> = (0..grid.len()).map(|k| ylm(2, 0, &grid.node(k))).collect();
    let inv = harmonic_invert(&grid, &values, 8).unwrap();
    for (k, g) in inv.values.iter().enumerate() {
        assert!((g + values[k] / PI).abs() < 1e-12);
    }
}

#[test]
fn harmonic_round_trip() {
    let k = body(
        r#"{"type":"perturbed_ball","r0":1.0,"amplitude":1.0,"coeffs":[{"l":2,"m":0,"c":0.2},{"l":4,"m":2,"c":0.1},{"l":8,"m":-5,"c":0.05}]}"#,
    );
    let inv = harmonic_invert_body(&k, &Settings::default(), Some(8)).unwrap();
    let settings = Settings::default();
    for u in random_directions(3, 30, 4) {
        let r = radon_transform(|v| inv.evaluate(v).unwrap(), &u, &settings).unwrap();
        assert!((r - k.radial(u.as_slice())).abs() < 1e-6);
    }
}

#[test]
fn odd_input_is_rejected() {
    let grid = SphereGrid::new(16, 32).unwrap();
    let values: Vec<f64> = (0..grid.len()).map(|k| 1.0 + 0.1 * grid.node(k)[2]).collect();
    assert!(matches!(harmonic_invert(&grid, &values, 8), Err(GeoError::NotEven { .. })));
    assert!(matches!(harmonic_invert(&grid, &values, 600), Err(GeoError::InvalidParameter(_))));
}

#[test]
fn ball_is_an_intersection_body() {
    let v = is_intersection_body(&body(r#"{"type":"ball","n":3,"r":1.0}"#), None, 32, 0).unwrap();
    assert!(v.is_intersection_body);
    assert!((v.margin - 1.0 / (2.0 * PI)).abs() < 1e-12);
}

#[test]
fn waisted_body_is_not_an_intersection_body() {
    let k = StarBody::parse(include_str!("../../../tests/fixtures/negative_margin.json")).unwrap();
    let v = is_intersection_body(&k, None, 32, 0).unwrap();
    assert!(!v.is_intersection_body);
    // ρ = 1 + 0.6 P₂(z) gives g = (1 - 1.2 P₂(z)) / 2π, smallest at the poles.
    let z = v.witness[2];
    let p2 = 1.5 * z * z - 0.5;
    assert!((v.margin - (1.0 - 1.2 * p2) / (2.0 * PI)).abs() < 1e-10);
    assert!(z.abs() > 0.99);
}

#[test]
fn preimage_of_ball_intersection_bodies() {
    let settings = Settings { sphere_lat: 32, ..Settings::default() };
    for (r, radius) in [(PI, 1.0), (4.0 * PI, 2.0)] {
        let l = StarBody::new(crate::BodyDescriptor::Ball { n: 3, r }).unwrap();
        let m = preimage_body(&l, None, &settings).unwrap();
        assert_eq!(m.clamped, 0);
        for u in random_directions(3, 20, 5) {
            assert!((m.body.radial(u.as_slice()) - radius).abs() < 1e-10);
        }
    }
}

#[test]
fn preimage_reproduces_intersection_body() {
    let settings = Settings { sphere_lat: 32, ..Settings::default() };
    let m = body(r#"{"type":"ellipsoid","semi_axes":[1.0,1.2,1.5]}"#);
    let l = intersection_body_of(&m, &settings).unwrap();
    let back = preimage_body(&l, None, &settings).unwrap();
    let l2 = intersection_body_of(&back.body, &settings).unwrap();
    for u in random_directions(3, 50, 6) {
        let (a, b) = (l.radial(u.as_slice()), l2.radial(u.as_slice()));
        assert!((a - b).abs() < 5e-3 * a, "{a} vs {b}");
        assert!((back.body.radial(u.as_slice()) - m.radial(u.as_slice())).abs() < 5e-3);
    }
}

#[test]
fn preimage_rejects_negative_g() {
    let k = StarBody::parse(include_str!("../../../tests/fixtures/negative_margin.json")).unwrap();
    match preimage_body(&k, None, &Settings { sphere_lat: 32, ..Settings::default() }) {
        Err(GeoError::NotAnIntersectionBody { margin, witness }) => {
            assert!(margin < 0.0);
            assert_eq!(witness.len(), 3);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn method_names() {
    assert_eq!("eq1".parse::<Method>().unwrap(), Method::Eq1);
    assert!("newton".parse::<Method>().is_err());
    assert_eq!(serde_json::to_string(&Method::Harmonic).unwrap(), "\"harmonic\"");
}
