//! JSON curve-graph files.
//!
//! ```json
//! {
//!   "name": "quarter",
//!   "vertices": [[1, 0, 0], [0, 1, 0]],
//!   "edges": [
//!     {"type": "arc", "from": 0, "to": 1, "center": [0, 0, 0], "radius": 1,
//!      "normal": [0, 0, 1], "u": [1, 0, 0], "start_angle": 0, "turns": 0.25}
//!   ]
//! }
//! ```
//!
//! Edge records:
//!
//! * `segment`: `from`, `to`. Geometry is the straight line between the vertices.
//! * `polyline`: `from`, `to`, `points` (full list, first and last matching the vertices).
//! * `arc`: `from`, `to`, `center`, `radius`, `normal`, `u` (in-plane direction of
//!   angle 0), optional `start_angle` (radians, default 0), and exactly one of
//!   `span` (radians) or `turns` (fractions of a revolution). The arc runs
//!   counter-clockwise about `normal`.
//! * `helix`: `from`, `to`, `axis_point`, `axis`, `radius`, `pitch` (rise per turn),
//!   `u` (perpendicular to the axis), optional `start_angle`, and `span` or `turns`.
//!
//! Unknown keys are rejected.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CircularArc, CurveGraph, Edge, EdgeGeometry, Helix};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub vertices: Vec<[f64; 3]>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum EdgeRecord {
    Segment {
        from: usize,
        to: usize,
    },
    Polyline {
        from: usize,
        to: usize,
        points: Vec<[f64; 3]>,
    },
    Arc {
        from: usize,
        to: usize,
        center: [f64; 3],
        radius: f64,
        normal: [f64; 3],
        u: [f64; 3],
        #[serde(default)]
        start_angle: f64,
        #[serde(default)]
        span: Option<f64>,
        #[serde(default)]
        turns: Option<f64>,
    },
    Helix {
        from: usize,
        to: usize,
        axis_point: [f64; 3],
        axis: [f64; 3],
        radius: f64,
        pitch: f64,
        u: [f64; 3],
        #[serde(default)]
        start_angle: f64,
        #[serde(default)]
        span: Option<f64>,
        #[serde(default)]
        turns: Option<f64>,
    },
}

fn v3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn angular_span(edge: usize, span: Option<f64>, turns: Option<f64>) -> Result<f64> {
    match (span, turns) {
        (Some(s), None) => Ok(s),
        (None, Some(t)) => Ok(t * TAU),
        _ => Err(Error::CurveFile(format!(
            "edge {edge}: give exactly one of `span` or `turns`"
        ))),
    }
}

impl CurveFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::CurveFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::CurveFile(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_graph(&self) -> Result<CurveGraph> {
        let vertices: Vec<Vec3> = self.vertices.iter().map(v3).collect();
        let vertex = |i: usize, e: usize| {
            vertices
                .get(i)
                .copied()
                .ok_or_else(|| Error::CurveFile(format!("edge {e} references missing vertex {i}")))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, rec) in self.edges.iter().enumerate() {
            let edge = match rec {
                EdgeRecord::Segment { from, to } => {
                    Edge::new(*from, *to, EdgeGeometry::segment(vertex(*from, i)?, vertex(*to, i)?)?)?
                }
                EdgeRecord::Polyline { from, to, points } => {
                    Edge::new(*from, *to, EdgeGeometry::polyline(points.iter().map(v3).collect())?)?
                }
                EdgeRecord::Arc { from, to, center, radius, normal, u, start_angle, span, turns } => {
                    let span = angular_span(i, *span, *turns)?;
                    let arc = CircularArc::with_normal(v3(center), *radius, v3(normal), v3(u), *start_angle, span)?;
                    Edge::new(*from, *to, EdgeGeometry::Arc(arc))?
                }
                EdgeRecord::Helix { from, to, axis_point, axis, radius, pitch, u, start_angle, span, turns } => {
                    let span = angular_span(i, *span, *turns)?;
                    let h = Helix::new(v3(axis_point), v3(axis), *radius, *pitch, v3(u), *start_angle, span)?;
                    Edge::new(*from, *to, EdgeGeometry::Helix(h))?
                }
            };
            edges.push(edge);
        }
        CurveGraph::new(vertices, edges)
    }
}

impl std::str::FromStr for CurveGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CurveFile::parse(s)?.to_graph()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_arc_with_turns() {
        let g: CurveGraph = r#"{"vertices": [[1,0,0],[0,1,0]],
            "edges": [{"type": "arc", "from": 0, "to": 1, "center": [0,0,0], "radius": 1,
                       "normal": [0,0,1], "u": [1,0,0], "turns": 0.25}]}"#
            .parse()
            .unwrap();
        assert!((g.total_length() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = CurveFile::parse(r#"{"vertices": [], "edges": [], "colour": 3}"#);
        assert!(matches!(err, Err(Error::CurveFile(_))));
        let err = CurveFile::parse(
            r#"{"vertices": [[0,0,0],[1,0,0]], "edges": [{"type": "segment", "from": 0, "to": 1, "w": 2}]}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn rejects_ambiguous_span() {
        let f = CurveFile::parse(
            r#"{"vertices": [[1,0,0]], "edges": [{"type": "arc", "from": 0, "to": 0, "center": [0,0,0],
                "radius": 1, "normal": [0,0,1], "u": [1,0,0], "turns": 1, "span": 6.283185307179586}]}"#,
        )
        .unwrap();
        assert!(f.to_graph().is_err());
    }

    #[test]
    fn rejects_missing_vertex() {
        let f = CurveFile::parse(r#"{"vertices": [[0,0,0]], "edges": [{"type": "segment", "from": 0, "to": 3}]}"#)
            .unwrap();
        assert!(f.to_graph().is_err());
    }

    #[test]
    fn polyline_must_meet_vertices() {
        let f = CurveFile::parse(
            r#"{"vertices": [[0,0,0],[1,1,0]], "edges": [{"type": "polyline", "from": 0, "to": 1,
                "points": [[0,0,0],[1,0,0],[1,0.5,0]]}]}"#,
        )
        .unwrap();
        assert!(matches!(f.to_graph(), Err(Error::InvalidGeometry(_))));
    }
}
