//! The full analysis report (JSON) and the SVG scene renderer.
//!
//! Report serialization is deterministic: struct fields serialize in
//! declaration order, every collection is sorted before emission, and no
//! timestamps or environment data enter the output. Two runs on the same
//! spec produce byte-identical files.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::attractor::{bounding_disk, cover, CellCover};
use crate::error::{Error, Result};
use crate::graph::{self, DendriteOutcome, DendriteWitness, TreeCheck};
use crate::input::SystemSpec;
use crate::intersection::{self, check_osc_rectangles, FiVerdict};
use crate::order;
use crate::sim::SimSystem;
use crate::slope::{self, InvariantArc, ParamMatch};
use crate::word::Word;

pub fn serialize_complex<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&z.re)?;
    seq.serialize_element(&z.im)?;
    seq.end()
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterJson {
    pub center: [f64; 2],
    pub radius: f64,
    pub witness_pairs: Vec<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub addresses: Option<[String; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairClustersJson {
    pub pair: [u8; 2],
    pub clusters: Vec<ClusterJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiJson {
    pub verdict: String,
    pub s: usize,
    pub pairs: Vec<PairClustersJson>,
    pub inconclusive_pairs: Vec<([u8; 2], f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphJson {
    pub level: usize,
    pub white: usize,
    pub black: usize,
    pub edges: usize,
    pub shape: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DendriteJson {
    pub outcome: String,
    pub checked_levels: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_cycle: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fi_failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeArmJson {
    pub arm: String,
    pub lambda: f64,
    pub winding: i64,
    pub delta_arg: f64,
    pub log_lip: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeJson {
    pub cluster_center: [f64; 2],
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub arms: Vec<SlopeArmJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OscJson {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

/// The full analysis of one system spec.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub system: SystemSpec,
    pub bounding_disk: BoundingJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub open_set_check: Option<OscJson>,
    pub fi: FiJson,
    pub graphs: Vec<GraphJson>,
    pub dendrite: DendriteJson,
    pub order: Vec<order::OrderReport>,
    pub slopes: Vec<SlopeJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundingJson {
    pub center: [f64; 2],
    pub radius: f64,
}

fn fi_to_json(fi: &intersection::FiReport) -> FiJson {
    let verdict = match &fi.verdict {
        FiVerdict::Certified { s } => format!("certified({s})"),
        FiVerdict::Likely { s } => format!("likely({s})"),
        FiVerdict::NotFi { pair, details } => {
            format!("not_fi({},{}) {details}", pair.0, pair.1)
        }
    };
    let pairs = fi
        .clusters
        .iter()
        .map(|(&(i, j), clusters)| PairClustersJson {
            pair: [i, j],
            clusters: clusters
                .iter()
                .map(|cl| ClusterJson {
                    center: [cl.center.re, cl.center.im],
                    radius: cl.radius,
                    witness_pairs: cl
                        .witness_pairs
                        .iter()
                        .map(|(u, v)| [u.to_string(), v.to_string()])
                        .collect(),
                    addresses: cl
                        .address_pair
                        .as_ref()
                        .map(|(a, b)| [a.to_string(), b.to_string()]),
                })
                .collect(),
        })
        .collect();
    FiJson {
        verdict,
        s: fi.s,
        pairs,
        inconclusive_pairs: fi
            .inconclusive_pairs
            .iter()
            .map(|&((i, j), tol)| ([i, j], tol))
            .collect(),
    }
}

/// Run the full pipeline: FI report, intersection graphs, dendrite
/// verdict, order reports at every critical point, slope matching at
/// every cluster.
pub fn analyze(spec: &SystemSpec, max_level: usize) -> Result<AnalysisReport> {
    let system = spec.to_system()?;
    let tol = spec.fi_tol();
    let disk = bounding_disk(&system);

    let open_set_check = match &spec.open_set {
        Some(rects) => {
            let check = check_osc_rectangles(&system, rects)?;
            Some(OscJson {
                holds: check.holds(),
                violation: check.violation,
            })
        }
        None => None,
    };

    let fi = intersection::fi_report(&system, tol)?;
    let dendrite = graph::dendrite_verdict_with_fi(&system, max_level, &fi)?;

    let mut graphs = Vec::new();
    if fi.is_usable() {
        for level in 1..=max_level.max(1) {
            match graph::build_graph(&system, level, &fi) {
                Ok(g) => {
                    let shape = match graph::is_tree(&g) {
                        TreeCheck::Tree => "tree".to_string(),
                        TreeCheck::Disconnected => "disconnected".to_string(),
                        TreeCheck::NotTree(cycle) => format!("cycle({})", cycle.len()),
                    };
                    graphs.push(GraphJson {
                        level,
                        white: g.white_count(),
                        black: g.black_count(),
                        edges: g.edge_count(),
                        shape,
                    });
                }
                Err(Error::Resource { .. }) => break,
                Err(Error::Inconclusive(_)) => break,
                Err(e) => return Err(e),
            }
        }
    }

    let dendrite_json = DendriteJson {
        outcome: match dendrite.outcome {
            DendriteOutcome::Dendrite => "dendrite".into(),
            DendriteOutcome::NotDendrite => "not_dendrite".into(),
            DendriteOutcome::Inconclusive => "inconclusive".into(),
        },
        checked_levels: dendrite.checked_levels,
        witness_cycle: match &dendrite.witness {
            Some(DendriteWitness::Cycle { vertices, .. }) => {
                Some(vertices.iter().map(|v| v.to_string()).collect())
            }
            _ => None,
        },
        witness_level: match &dendrite.witness {
            Some(DendriteWitness::Cycle { level, .. }) => Some(*level),
            _ => None,
        },
        fi_failure: match &dendrite.witness {
            Some(DendriteWitness::FiFailure { pair, details }) => {
                Some(format!("pair ({}, {}): {details}", pair.0, pair.1))
            }
            _ => None,
        },
        note: dendrite.note.clone(),
    };

    // order and slopes at the deduplicated critical points
    let mut order_reports = Vec::new();
    let mut slopes = Vec::new();
    if fi.is_usable() {
        let clusters = fi.merged_clusters();
        let bounds = if clusters.is_empty() {
            None
        } else {
            Some(order::assemble_bounds(
                &system,
                &fi,
                dendrite.outcome == DendriteOutcome::Dendrite,
            )?)
        };
        for cluster in &clusters {
            let point_tol = (2.0 * cluster.radius).max(1e-9);
            if let Some(bounds) = &bounds {
                match order::order_report_with_bounds(&system, cluster.center, point_tol, bounds) {
                    Ok(report) => order_reports.push(report),
                    Err(Error::Inconclusive(_)) | Err(Error::Resource { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            let slope_json = match slope::parameter_match(&system, cluster, 1e-3) {
                Ok(ParamMatch::Matched { lambda, arms }) => SlopeJson {
                    cluster_center: [cluster.center.re, cluster.center.im],
                    outcome: "matched".into(),
                    lambda: Some(lambda),
                    arms: arms_to_json(&arms),
                    note: None,
                },
                Ok(ParamMatch::Mismatched { arms }) => SlopeJson {
                    cluster_center: [cluster.center.re, cluster.center.im],
                    outcome: "mismatched".into(),
                    lambda: None,
                    arms: arms_to_json(&arms),
                    note: Some("slope disagreement at certified input".into()),
                },
                Ok(ParamMatch::Inconclusive { reason }) => SlopeJson {
                    cluster_center: [cluster.center.re, cluster.center.im],
                    outcome: "inconclusive".into(),
                    lambda: None,
                    arms: Vec::new(),
                    note: Some(reason),
                },
                Err(Error::Inconclusive(reason)) => SlopeJson {
                    cluster_center: [cluster.center.re, cluster.center.im],
                    outcome: "inconclusive".into(),
                    lambda: None,
                    arms: Vec::new(),
                    note: Some(reason),
                },
                Err(e) => return Err(e),
            };
            slopes.push(slope_json);
        }
    }

    Ok(AnalysisReport {
        system: spec.clone(),
        bounding_disk: BoundingJson {
            center: [disk.center.re, disk.center.im],
            radius: disk.radius,
        },
        open_set_check,
        fi: fi_to_json(&fi),
        graphs,
        dendrite: dendrite_json,
        order: order_reports,
        slopes,
    })
}

fn arms_to_json(arms: &[(String, slope::SlopeEstimate)]) -> Vec<SlopeArmJson> {
    arms.iter()
        .map(|(label, est)| SlopeArmJson {
            arm: label.clone(),
            lambda: est.lambda,
            winding: est.winding,
            delta_arg: est.delta_arg,
            log_lip: est.log_lip,
            residual: est.residual,
        })
        .collect()
}

pub fn to_json_string(report: &AnalysisReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serialization");
    text.push('\n');
    text
}

/// Spec echo plus the FI analysis, for the `fi --json` dump.
#[derive(Debug, Clone, Serialize)]
pub struct FiFileJson {
    pub system: SystemSpec,
    pub fi: FiJson,
}

pub fn fi_json_value(spec: &SystemSpec, fi: &intersection::FiReport) -> FiFileJson {
    FiFileJson {
        system: spec.clone(),
        fi: fi_to_json(fi),
    }
}

/// Human-readable FI summary for the terminal.
pub fn analyze_fi_only(_spec: &SystemSpec, fi: &intersection::FiReport) -> String {
    let mut out = String::new();
    match &fi.verdict {
        FiVerdict::Certified { s } => {
            out.push_str(&format!("FI certified: pieces meet in at most {s} point(s)\n"))
        }
        FiVerdict::Likely { s } => out.push_str(&format!(
            "FI likely (not certified): observed at most {s} point(s) per pair\n"
        )),
        FiVerdict::NotFi { pair, details } => out.push_str(&format!(
            "not FI: pieces {} and {} overlap ({details})\n",
            pair.0, pair.1
        )),
    }
    for ((i, j), clusters) in &fi.clusters {
        if clusters.is_empty() {
            continue;
        }
        for cl in clusters {
            let addr = cl
                .address_pair
                .as_ref()
                .map(|(a, b)| format!("  addresses {a} = {b}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "pieces ({i},{j}): contact near ({:.6}, {:.6}), radius {:.2e}{addr}\n",
                cl.center.re, cl.center.im, cl.radius
            ));
        }
    }
    for ((i, j), achieved) in &fi.inconclusive_pairs {
        out.push_str(&format!(
            "pieces ({i},{j}): inconclusive at tolerance {achieved:.2e} (budget)\n"
        ));
    }
    out
}

// ---------------------------------------------------------------------
// SVG

/// Everything the renderer can draw in one scene.
#[derive(Debug, Clone, Default)]
pub struct SvgScene {
    pub covers: Vec<CellCover>,
    pub clusters: Vec<(Complex64, f64)>,
    pub arcs: Vec<Vec<Complex64>>,
}

impl SvgScene {
    pub fn attractor(system: &SimSystem, eps: f64) -> Result<SvgScene> {
        Ok(SvgScene {
            covers: vec![cover(system, &Word::empty(), eps)?],
            ..Default::default()
        })
    }

    pub fn with_clusters(mut self, clusters: impl IntoIterator<Item = (Complex64, f64)>) -> Self {
        self.clusters.extend(clusters);
        self
    }

    pub fn with_arc(mut self, arc: &InvariantArc) -> Self {
        self.arcs.push(arc.polyline.clone());
        self
    }

    /// Deterministic SVG text: covers as cell rectangles, intersection
    /// clusters as circles, arcs as polylines. The y axis is flipped into
    /// SVG screen coordinates.
    pub fn to_svg(&self) -> String {
        let mut min = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut max = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut consider = |z: Complex64| {
            min = Complex64::new(min.re.min(z.re), min.im.min(z.im));
            max = Complex64::new(max.re.max(z.re), max.im.max(z.im));
        };
        for cov in &self.covers {
            if let Some((x0, y0, x1, y1)) = cov.bbox() {
                let h = cov.cell_size();
                consider(Complex64::new(x0 as f64 * h, y0 as f64 * h));
                consider(Complex64::new((x1 + 1) as f64 * h, (y1 + 1) as f64 * h));
            }
        }
        for &(c, r) in &self.clusters {
            consider(c - Complex64::new(r, r));
            consider(c + Complex64::new(r, r));
        }
        for arc in &self.arcs {
            for &z in arc {
                consider(z);
            }
        }
        if !min.re.is_finite() {
            min = Complex64::new(0.0, 0.0);
            max = Complex64::new(1.0, 1.0);
        }
        let span = ((max - min).re.max((max - min).im)).max(1e-9);
        let pad = span * 0.02;
        let (x0, y0) = (min.re - pad, min.im - pad);
        let (w, h) = (max.re - min.re + 2.0 * pad, max.im - min.im + 2.0 * pad);
        // flip: svg y = (y0 + h) - (world y - y0) => world y maps to y0 + h - (y - y0)
        let flip = |z: Complex64| (z.re, y0 + h - (z.im - y0));

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
            x0, y0, w, h
        ));
        for cov in &self.covers {
            let ch = cov.cell_size();
            out.push_str("  <g fill=\"#2266aa\" stroke=\"none\">\n");
            for &(cx, cy) in cov.cells() {
                let world_y = (cy + 1) as f64 * ch; // top edge after flip
                let (_, sy) = flip(Complex64::new(0.0, world_y));
                out.push_str(&format!(
                    "    <rect x=\"{:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{:.6}\"/>\n",
                    cx as f64 * ch,
                    sy,
                    ch,
                    ch
                ));
            }
            out.push_str("  </g>\n");
        }
        for arc in &self.arcs {
            let pts: Vec<String> = arc
                .iter()
                .map(|&z| {
                    let (sx, sy) = flip(z);
                    format!("{:.6},{:.6}", sx, sy)
                })
                .collect();
            out.push_str(&format!(
                "  <polyline fill=\"none\" stroke=\"#cc3311\" stroke-width=\"{:.6}\" points=\"{}\"/>\n",
                span * 0.003,
                pts.join(" ")
            ));
        }
        for &(c, r) in &self.clusters {
            let (sx, sy) = flip(c);
            out.push_str(&format!(
                "  <circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\" fill=\"none\" stroke=\"#119944\" stroke-width=\"{:.6}\"/>\n",
                sx,
                sy,
                r.max(span * 0.008),
                span * 0.003
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::parse_spec;

    fn segment_spec() -> SystemSpec {
        parse_spec(
            r#"{"maps": [
                {"r": 0.5, "angle": 0.0, "angle_unit": "radians", "t": [0.0, 0.0]},
                {"r": 0.5, "angle": 0.0, "angle_unit": "radians", "t": [0.5, 0.0]}
            ]}"#,
        )
        .unwrap()
    }

    #[test]
    fn segment_report_is_deterministic_and_sane() {
        let spec = segment_spec();
        let a = to_json_string(&analyze(&spec, 2).unwrap());
        let b = to_json_string(&analyze(&spec, 2).unwrap());
        assert_eq!(a, b, "byte-identical reports");
        assert!(a.contains("\"outcome\": \"dendrite\""));
        assert!(a.contains("certified(1)"));
    }

    #[test]
    fn svg_scene_renders_rects_and_circles() {
        let spec = segment_spec();
        let sys = spec.to_system().unwrap();
        let scene = SvgScene::attractor(&sys, 0.25)
            .unwrap()
            .with_clusters([(Complex64::new(0.5, 0.0), 0.01)]);
        let svg = scene.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<rect"));
        assert!(svg.contains("<circle"));
        assert_eq!(svg, scene.to_svg(), "deterministic");
    }
}
