//! The JSON system-spec format: a lossless, explicit description of a
//! similarity system plus optional declarations and tolerance overrides.
//!
//! Angles carry an explicit unit field; there is no guessing. A spec
//! round-trips through serialization unchanged.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intersection::Rect;
use crate::sim::{SimSystem, Similarity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    Degrees,
    Radians,
}

/// One similarity: ratio, rotation with unit, optional reflection, and the
/// translation as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub r: f64,
    pub angle: f64,
    pub angle_unit: AngleUnit,
    #[serde(default)]
    pub reflect: bool,
    pub t: [f64; 2],
}

impl MapSpec {
    pub fn to_similarity(&self) -> Result<Similarity> {
        let angle = match self.angle_unit {
            AngleUnit::Radians => self.angle,
            AngleUnit::Degrees => self.angle.to_radians(),
        };
        Similarity::new(self.r, angle, self.reflect, Complex64::new(self.t[0], self.t[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertions {
    #[serde(default)]
    pub osc_asserted: bool,
    #[serde(default)]
    pub wsp_asserted: bool,
}

/// Optional overrides for the built-in tolerances and budgets.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fi_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf_budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arc_eps: Option<f64>,
}

/// A full system description as read from a spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub maps: Vec<MapSpec>,
    /// Declared open set for the separation check, one or more rectangles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open_set: Option<Vec<Rect>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assertions: Option<Assertions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

impl SystemSpec {
    pub fn to_system(&self) -> Result<SimSystem> {
        let maps: Vec<Similarity> = self
            .maps
            .iter()
            .enumerate()
            .map(|(k, m)| {
                m.to_similarity().map_err(|_| {
                    Error::Validation(format!(
                        "map {}: ratio must be in (0, 1), got {}",
                        k + 1,
                        m.r
                    ))
                })
            })
            .collect::<Result<_>>()?;
        SimSystem::new(maps).map_err(|e| Error::Validation(e.to_string()))
    }

    pub fn fi_tol(&self) -> f64 {
        self.tolerances
            .as_ref()
            .and_then(|t| t.fi_tol)
            .unwrap_or(1e-7)
    }

    pub fn arc_eps(&self) -> f64 {
        self.tolerances
            .as_ref()
            .and_then(|t| t.arc_eps)
            .unwrap_or(1.0 / 128.0)
    }
}

/// Parse and validate a spec from JSON text.
pub fn parse_spec(text: &str) -> Result<SystemSpec> {
    let spec: SystemSpec =
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("spec parse: {e}")))?;
    if spec.maps.len() < 2 {
        return Err(Error::Validation(format!(
            "a system needs at least 2 maps, got {}",
            spec.maps.len()
        )));
    }
    for (k, m) in spec.maps.iter().enumerate() {
        if !(m.r > 0.0 && m.r < 1.0) {
            return Err(Error::Validation(format!(
                "map {}: ratio must be in (0, 1), got {}",
                k + 1,
                m.r
            )));
        }
    }
    if let Some(rects) = &spec.open_set {
        for (k, rect) in rects.iter().enumerate() {
            if !(rect.x1 > rect.x0 && rect.y1 > rect.y0) {
                return Err(Error::Validation(format!(
                    "open set rectangle {k} is empty or inverted"
                )));
            }
        }
    }
    Ok(spec)
}

pub fn serialize_spec(spec: &SystemSpec) -> String {
    serde_json::to_string_pretty(spec).expect("spec serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gasket_json() -> String {
        r#"{
            "maps": [
                {"r": 0.5, "angle": 0.0, "angle_unit": "radians", "t": [0.0, 0.0]},
                {"r": 0.5, "angle": 0.0, "angle_unit": "radians", "t": [0.5, 0.0]},
                {"r": 0.5, "angle": 0.0, "angle_unit": "radians", "t": [0.25, 0.4330127018922193]}
            ],
            "assertions": {"osc_asserted": true}
        }"#
        .to_string()
    }

    #[test]
    fn gasket_spec_parses_and_matches_builtin() {
        let spec = parse_spec(&gasket_json()).unwrap();
        let sys = spec.to_system().unwrap();
        let builtin = crate::systems::gasket();
        for (a, b) in sys.maps().iter().zip(builtin.maps()) {
            assert!(a.approx_eq(b, 1e-12));
        }
    }

    #[test]
    fn ratio_out_of_range_is_named() {
        let text = r#"{"maps": [
            {"r": 1.0, "angle": 0.0, "angle_unit": "radians", "t": [0.0, 0.0]},
            {"r": 0.5, "angle": 0.0, "angle_unit": "radians", "t": [0.5, 0.0]}
        ]}"#;
        let err = parse_spec(text).unwrap_err();
        assert!(err.to_string().contains("map 1"));
        assert!(err.to_string().contains("(0, 1)"));
    }

    #[test]
    fn single_map_is_rejected() {
        let text = r#"{"maps": [{"r": 0.5, "angle": 0.0, "angle_unit": "radians", "t": [0.0, 0.0]}]}"#;
        assert!(parse_spec(text).is_err());
    }

    #[test]
    fn degrees_are_converted() {
        let text = r#"{"maps": [
            {"r": 0.3333333333333333, "angle": 90.0, "angle_unit": "degrees", "t": [0.6666666666666666, 0.3333333333333333]},
            {"r": 0.5, "angle": 0.0, "angle_unit": "radians", "t": [0.5, 0.0]}
        ]}"#;
        let sys = parse_spec(text).unwrap().to_system().unwrap();
        assert!((sys.maps()[0].rotation() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_identity() {
        let spec = parse_spec(&gasket_json()).unwrap();
        let text = serialize_spec(&spec);
        let again = parse_spec(&text).unwrap();
        assert_eq!(spec, again);
        // and byte-identical the second time through
        assert_eq!(text, serialize_spec(&again));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"maps": [
            {"r": 0.5, "angle": 0.0, "angle_unit": "radians", "t": [0.0, 0.0], "extra": 1},
            {"r": 0.5, "angle": 0.0, "angle_unit": "radians", "t": [0.5, 0.0]}
        ]}"#;
        assert!(parse_spec(text).is_err());
    }
}
