use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{GeoError, Result};

/// Declared regularity of a radial function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    C0,
    C1,
    C2,
    Smooth,
}

/// Tabulated radial profile `ρ(φ)` of a body of revolution, `φ ∈ [0, π/2]`
/// measured from the axis; extended to `[π/2, π]` by `ρ(π - φ) = ρ(φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarProfile {
    pub phi: Vec<f64>,
    pub rho: Vec<f64>,
}

/// One real harmonic term `c · Y_l^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicTerm {
    pub l: usize,
    pub m: i64,
    pub c: f64,
}

/// Serializable description of a centered star body.
///
/// The JSON form is internally tagged by `"type"`:
///
/// ```json
/// {"type": "ball", "n": 3, "r": 1.0}
/// {"type": "box", "n": 3, "half_sides": [0.5, 0.5, 0.5]}
/// {"type": "perturbed_ball", "r0": 1.0, "amplitude": 0.1, "coeffs": [{"l": 2, "m": 0, "c": 1.0}]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyDescriptor {
    Ball {
        n: usize,
        r: f64,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
    },
    #[serde(rename = "box")]
    Cuboid {
        n: usize,
        half_sides: Vec<f64>,
    },
    CrossPolytope {
        n: usize,
        a: f64,
    },
    /// `B^{n-1}(r) × [-h, h]`, the last coordinate being the axis.
    Cylinder {
        n: usize,
        r: f64,
        h: f64,
    },
    Revolution {
        #[serde(default = "default_axis")]
        axis: [f64; 3],
        profile: PolarProfile,
        smoothness: Smoothness,
    },
    /// `ρ = r0 + amplitude · Σ c Y_l^m` on S².
    PerturbedBall {
        r0: f64,
        amplitude: f64,
        coeffs: Vec<HarmonicTerm>,
    },
    /// Radial values on the cell-centred `n_phi × n_theta` grid of S²,
    /// latitude-major; `interpolation_order` is 1 (bilinear) or 3 (bicubic).
    Sampled {
        n: usize,
        n_phi: usize,
        n_theta: usize,
        values: Vec<f64>,
        interpolation_order: u8,
    },
}

fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn issue(path: &str, message: impl Into<String>) -> GeoError {
    GeoError::Parse { path: path.to_string(), message: message.into() }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(issue(path, format!("must be a positive finite number, got {v}")))
    }
}

fn dimension(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(issue("n", format!("dimension must be >= 2, got {n}")))
    }
}

fn positive_list(path: &str, values: &[f64], n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if values.len() != n {
            return Err(issue(path, format!("expected {n} entries, got {}", values.len())));
        }
    }
    for (i, v) in values.iter().enumerate() {
        positive(&format!("{path}[{i}]"), *v)?;
    }
    Ok(())
}

impl BodyDescriptor {
    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            BodyDescriptor::Ball { n, .. }
            | BodyDescriptor::Cuboid { n, .. }
            | BodyDescriptor::CrossPolytope { n, .. }
            | BodyDescriptor::Cylinder { n, .. }
            | BodyDescriptor::Sampled { n, .. } => *n,
            BodyDescriptor::Ellipsoid { semi_axes } => semi_axes.len(),
            BodyDescriptor::Revolution { .. } | BodyDescriptor::PerturbedBall { .. } => 3,
        }
    }

    /// Structural checks that do not need the compiled body.
    pub(crate) fn check(&self) -> Result<()> {
        match self {
            BodyDescriptor::Ball { n, r } => {
                dimension(*n)?;
                positive("r", *r)
            }
            BodyDescriptor::Ellipsoid { semi_axes } => {
                if semi_axes.len() < 2 {
                    return Err(issue("semi_axes", "need at least two semi-axes"));
                }
                positive_list("semi_axes", semi_axes, None)
            }
            BodyDescriptor::Cuboid { n, half_sides } => {
                dimension(*n)?;
                positive_list("half_sides", half_sides, Some(*n))
            }
            BodyDescriptor::CrossPolytope { n, a } => {
                dimension(*n)?;
                positive("a", *a)
            }
            BodyDescriptor::Cylinder { n, r, h } => {
                dimension(*n)?;
                positive("r", *r)?;
                positive("h", *h)
            }
            BodyDescriptor::Revolution { axis, profile, .. } => {
                if axis.iter().any(|c| !c.is_finite()) || axis.iter().all(|c| *c == 0.0) {
                    return Err(issue("axis", "axis must be a nonzero finite vector"));
                }
                let PolarProfile { phi, rho } = profile;
                if phi.len() < 2 || phi.len() != rho.len() {
                    return Err(issue("profile", "phi and rho need equal length >= 2"));
                }
                if phi[0].abs() > 1e-12 || (phi[phi.len() - 1] - FRAC_PI_2).abs() > 1e-12 {
                    return Err(issue("profile.phi", "must start at 0 and end at pi/2"));
                }
                if phi.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(issue("profile.phi", "must be strictly increasing"));
                }
                positive_list("profile.rho", rho, None)
            }
            BodyDescriptor::PerturbedBall { r0, amplitude, coeffs } => {
                positive("r0", *r0)?;
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(issue("amplitude", "must be finite and >= 0"));
                }
                for (i, t) in coeffs.iter().enumerate() {
                    if t.m.unsigned_abs() as usize > t.l {
                        return Err(issue(&format!("coeffs[{i}]"), "|m| must not exceed l"));
                    }
                    if t.l % 2 == 1 {
                        return Err(issue(&format!("coeffs[{i}].l"), "odd degree breaks central symmetry"));
                    }
                    if t.l > crate::sphere_quad::MAX_DEGREE {
                        return Err(issue(&format!("coeffs[{i}].l"), "degree too large"));
                    }
                    if !t.c.is_finite() {
                        return Err(issue(&format!("coeffs[{i}].c"), "must be finite"));
                    }
                }
                Ok(())
            }
            BodyDescriptor::Sampled { n, n_phi, n_theta, values, interpolation_order } => {
                if *n != 3 {
                    return Err(issue("n", "sampled bodies live on S², n must be 3"));
                }
                if *n_phi < 4 {
                    return Err(issue("n_phi", "need at least 4 latitudes"));
                }
                if *n_theta < 4 || n_theta % 2 == 1 {
                    return Err(issue("n_theta", "need an even count >= 4"));
                }
                if values.len() != n_phi * n_theta {
                    return Err(issue(
                        "values",
                        format!("expected {} samples, got {}", n_phi * n_theta, values.len()),
                    ));
                }
                if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(issue(&format!("values[{i}]"), "radial values must be finite and >= 0"));
                }
                if *interpolation_order != 1 && *interpolation_order != 3 {
                    return Err(issue("interpolation_order", "must be 1 or 3"));
                }
                Ok(())
            }
        }
    }

    /// The descriptor of `s·K`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(GeoError::invalid(format!("scale must be positive, got {s}")));
        }
        let scale = |v: &[f64]| v.iter().map(|x| x * s).collect::<Vec<_>>();
        Ok(match self {
            BodyDescriptor::Ball { n, r } => BodyDescriptor::Ball { n: *n, r: r * s },
            BodyDescriptor::Ellipsoid { semi_axes } => {
                BodyDescriptor::Ellipsoid { semi_axes: scale(semi_axes) }
            }
            BodyDescriptor::Cuboid { n, half_sides } => {
                BodyDescriptor::Cuboid { n: *n, half_sides: scale(half_sides) }
            }
            BodyDescriptor::CrossPolytope { n, a } => BodyDescriptor::CrossPolytope { n: *n, a: a * s },
            BodyDescriptor::Cylinder { n, r, h } => {
                BodyDescriptor::Cylinder { n: *n, r: r * s, h: h * s }
            }
            BodyDescriptor::Revolution { axis, profile, smoothness } => BodyDescriptor::Revolution {
                axis: *axis,
                profile: PolarProfile { phi: profile.phi.clone(), rho: scale(&profile.rho) },
                smoothness: *smoothness,
            },
            BodyDescriptor::PerturbedBall { r0, amplitude, coeffs } => BodyDescriptor::PerturbedBall {
                r0: r0 * s,
                amplitude: amplitude * s,
                coeffs: coeffs.clone(),
            },
            BodyDescriptor::Sampled { n, n_phi, n_theta, values, interpolation_order } => {
                BodyDescriptor::Sampled {
                    n: *n,
                    n_phi: *n_phi,
                    n_theta: *n_theta,
                    values: scale(values),
                    interpolation_order: *interpolation_order,
                }
            }
        })
    }
}

/// Parses the JSON body schema; unknown fields and invalid parameters are
/// reported with the path of the offending field.
pub fn parse_descriptor(text: &str) -> Result<BodyDescriptor> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| issue("", e.to_string()))?;
    let obj = value.as_object_mut().ok_or_else(|| issue("", "body must be a JSON object"))?;
    let tag = match obj.remove("type") {
        Some(serde_json::Value::String(t)) => t,
        Some(_) => return Err(issue("type", "must be a string")),
        None => return Err(issue("type", "missing body type")),
    };
    // Internally tagged enums buffer their content and lose error paths, so
    // the payload goes through an externally tagged twin of the descriptor.
    let wrapped = serde_json::json!({ tag.clone(): value });
    let External(desc) = serde_path_to_error::deserialize(wrapped).map_err(|e| {
        let full = e.path().to_string();
        let message = e.into_inner().to_string();
        let path = full.strip_prefix(tag.as_str()).unwrap_or(&full).trim_start_matches('.');
        let path = match path {
            "" | "." if message.starts_with("unknown variant") => "type",
            "" => ".",
            p => p,
        };
        issue(path, message)
    })?;
    desc.check()?;
    Ok(desc)
}

/// Compact JSON form of a descriptor.
pub fn serialize(desc: &BodyDescriptor) -> String {
    serde_json::to_string(desc).expect("descriptor serialization cannot fail")
}

struct External(BodyDescriptor);

impl<'de> Deserialize<'de> for External {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ExternalBody::deserialize(d).map(External)
    }
}

#[derive(Deserialize)]
#[serde(remote = "BodyDescriptor", rename_all = "snake_case", deny_unknown_fields)]
enum ExternalBody {
    Ball {
        n: usize,
        r: f64,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
    },
    #[serde(rename = "box")]
    Cuboid {
        n: usize,
        half_sides: Vec<f64>,
    },
    CrossPolytope {
        n: usize,
        a: f64,
    },
    Cylinder {
        n: usize,
        r: f64,
        h: f64,
    },
    Revolution {
        #[serde(default = "default_axis")]
        axis: [f64; 3],
        profile: PolarProfile,
        smoothness: Smoothness,
    },
    PerturbedBall {
        r0: f64,
        amplitude: f64,
        coeffs: Vec<HarmonicTerm>,
    },
    Sampled {
        n: usize,
        n_phi: usize,
        n_theta: usize,
        values: Vec<f64>,
        interpolation_order: u8,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ball() {
        let d = parse_descriptor(r#"{"type":"ball","n":3,"r":1.0}"#).unwrap();
        assert_eq!(d, BodyDescriptor::Ball { n: 3, r: 1.0 });
    }

    #[test]
    fn parses_box() {
        let text = format!(r#"{{"type":"box","n":10,"half_sides":{:?}}}"#, vec![0.5; 10]);
        let d = parse_descriptor(&text).unwrap();
        assert_eq!(d, BodyDescriptor::Cuboid { n: 10, half_sides: vec![0.5; 10] });
        assert_eq!(d.dim(), 10);
    }

    #[test]
    fn rejects_low_dimension() {
        let e = parse_descriptor(r#"{"type":"ball","n":1,"r":1.0}"#).unwrap_err();
        assert!(matches!(e, GeoError::Parse { ref path, .. } if path == "n"), "{e}");
        let e = parse_descriptor(r#"{"type":"ball","n":1}"#).unwrap_err();
        assert!(matches!(e, GeoError::Parse { .. }));
    }

    #[test]
    fn rejects_unknown_fields_and_types() {
        assert!(matches!(
            parse_descriptor(r#"{"type":"ball","n":3,"r":1.0,"color":"red"}"#),
            Err(GeoError::Parse { .. })
        ));
        match parse_descriptor(r#"{"type":"torus","n":3}"#) {
            Err(GeoError::Parse { path, .. }) => assert_eq!(path, "type"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_descriptor(r#"{"n":3}"#), Err(GeoError::Parse { .. })));
        assert!(matches!(parse_descriptor("[1, 2]"), Err(GeoError::Parse { .. })));
        let e = parse_descriptor(
            r#"{"type":"perturbed_ball","r0":1,"amplitude":0.1,"coeffs":[{"l":2,"m":0,"c":1,"x":0}]}"#,
        )
        .unwrap_err();
        match e {
            GeoError::Parse { path, .. } => assert!(path.starts_with("coeffs[0]"), "{path}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn path_points_at_bad_array_entry() {
        let e = parse_descriptor(r#"{"type":"box","n":3,"half_sides":[0.5,-1,0.5]}"#).unwrap_err();
        assert!(matches!(e, GeoError::Parse { ref path, .. } if path == "half_sides[1]"), "{e}");
        let e = parse_descriptor(r#"{"type":"box","n":3,"half_sides":[0.5,0.5]}"#).unwrap_err();
        assert!(matches!(e, GeoError::Parse { ref path, .. } if path == "half_sides"), "{e}");
    }

    #[test]
    fn odd_harmonics_are_rejected() {
        let e = parse_descriptor(
            r#"{"type":"perturbed_ball","r0":1,"amplitude":0.1,"coeffs":[{"l":3,"m":0,"c":1}]}"#,
        )
        .unwrap_err();
        assert!(matches!(e, GeoError::Parse { .. }));
    }

    #[test]
    fn revolution_axis_defaults_to_e3() {
        let d = parse_descriptor(
            r#"{"type":"revolution","profile":{"phi":[0,1.5707963267948966],"rho":[1,2]},"smoothness":"c2"}"#,
        )
        .unwrap();
        match d {
            BodyDescriptor::Revolution { axis, smoothness, .. } => {
                assert_eq!(axis, [0.0, 0.0, 1.0]);
                assert_eq!(smoothness, Smoothness::C2);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn scaling_multiplies_lengths() {
        let d = BodyDescriptor::Cylinder { n: 4, r: 1.0, h: 2.0 };
        assert_eq!(d.scaled(3.0).unwrap(), BodyDescriptor::Cylinder { n: 4, r: 3.0, h: 6.0 });
        assert!(d.scaled(0.0).is_err());
    }
}
