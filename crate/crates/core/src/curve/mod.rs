//! Curves as topological graphs with smooth edges.
//!
//! A smooth closed curve is a single edge whose two ends reference the same
//! vertex. Open curves, kinks, junctions and several components are all
//! expressed through the vertex/edge structure; the edges themselves are
//! always smooth.

mod builtin;
mod edge;
mod file;

pub use builtin::{builtin, builtin_names};
pub use edge::{CircularArc, EdgeGeometry, EdgeHit, Helix, Polyline};
pub use file::{CurveFile, EdgeRecord};

pub(crate) use edge::{segment_projection, split_range};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::quad;

/// Endpoints of an edge must coincide with their vertices to this distance.
pub const VERTEX_MATCH_TOL: f64 = 1e-9;

/// Default angular tolerance for tangent continuity at valence-2 vertices.
pub const DEFAULT_ANGLE_TOL: f64 = 1e-3;

const ORACLE_MAX_HALVINGS: u32 = 18;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    geometry: EdgeGeometry,
    length: f64,
}

impl Edge {
    pub fn new(from: usize, to: usize, geometry: EdgeGeometry) -> Result<Self> {
        let length = geometry.arc_length();
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidGeometry("edge must have finite positive length".into()));
        }
        Ok(Edge { from, to, geometry, length })
    }

    pub fn geometry(&self) -> &EdgeGeometry {
        &self.geometry
    }

    pub fn arc_length(&self) -> f64 {
        self.length
    }

    pub fn point_at_arclength(&self, s: f64) -> Result<Vec3> {
        self.geometry.point_at_arclength(s)
    }

    pub fn reversed(&self) -> Edge {
        Edge {
            from: self.to,
            to: self.from,
            geometry: self.geometry.reversed(),
            length: self.length,
        }
    }
}

/// Exact arc length of an edge (polygonal length for polylines).
pub fn arc_length(edge: &EdgeGeometry) -> f64 {
    edge.arc_length()
}

/// `x(s)` along an edge.
pub fn point_at_arclength(edge: &EdgeGeometry, s: f64) -> Result<Vec3> {
    edge.point_at_arclength(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveGraph {
    vertices: Vec<Vec3>,
    edges: Vec<Edge>,
}

impl CurveGraph {
    pub fn new(vertices: Vec<Vec3>, edges: Vec<Edge>) -> Result<Self> {
        for (i, v) in vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidGeometry(format!("vertex {i} is not finite")));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            for (end, vi, s) in [("start", e.from, 0.0), ("end", e.to, e.length)] {
                let v = vertices.get(vi).ok_or_else(|| {
                    Error::InvalidGeometry(format!("edge {i} references missing vertex {vi}"))
                })?;
                let gap = (e.geometry.point_at_clamped(s) - v).norm();
                if gap > VERTEX_MATCH_TOL {
                    return Err(Error::InvalidGeometry(format!(
                        "edge {i} {end} is {gap:e} away from vertex {vi}"
                    )));
                }
            }
        }
        Ok(CurveGraph { vertices, edges })
    }

    /// Graph of a single edge whose endpoints become its two vertices (one
    /// vertex when the edge closes on itself).
    pub fn from_edge(geometry: EdgeGeometry) -> Result<Self> {
        let a = geometry.point_at_clamped(0.0);
        let b = geometry.point_at_clamped(geometry.arc_length());
        if (a - b).norm() <= VERTEX_MATCH_TOL {
            CurveGraph::new(vec![a], vec![Edge::new(0, 0, geometry)?])
        } else {
            CurveGraph::new(vec![a, b], vec![Edge::new(0, 1, geometry)?])
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Number of edge ends at vertex `v`; a loop contributes two.
    pub fn valence(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.from == v) as usize + (e.to == v) as usize)
            .sum()
    }

    /// Unit tangents pointing away from `v` along each incident edge end.
    fn outward_tangents(&self, v: usize) -> Vec<Vec3> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.from == v {
                out.push(e.geometry.tangent_at(0.0));
            }
            if e.to == v {
                out.push(-e.geometry.tangent_at(e.length));
            }
        }
        out
    }

    /// Indices of the non-smooth vertices: junctions of three or more edge
    /// ends, and pass-through vertices where the tangent turns by more than
    /// `angle_tol`. Free ends of open curves are not included.
    pub fn nonsmooth_vertices(&self, angle_tol: f64) -> Vec<usize> {
        assert!(
            angle_tol > 0.0 && angle_tol <= std::f64::consts::FRAC_PI_4,
            "angle_tol must lie in (0, π/4]"
        );
        (0..self.vertices.len())
            .filter(|&v| match self.valence(v) {
                0 | 1 => false,
                2 => {
                    let t = self.outward_tangents(v);
                    // smooth when the two outward tangents are antiparallel
                    let (a, b) = (t[0], -t[1]);
                    a.cross(&b).norm().atan2(a.dot(&b)) > angle_tol
                }
                _ => true,
            })
            .collect()
    }

    pub fn reversed_edge(&self, i: usize) -> CurveGraph {
        let mut g = self.clone();
        g.edges[i] = g.edges[i].reversed();
        g
    }

    /// Applies `x ↦ rotation·x + shift` to every vertex and edge.
    pub fn transformed(&self, rotation: &nalgebra::Rotation3<f64>, shift: &Vec3) -> CurveGraph {
        let map = |p: &Vec3| rotation * p + shift;
        let vertices = self.vertices.iter().map(map).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let geometry = match &e.geometry {
                    EdgeGeometry::Segment { a, b } => EdgeGeometry::Segment { a: map(a), b: map(b) },
                    EdgeGeometry::Polyline(pl) => EdgeGeometry::Polyline(
                        Polyline::new(pl.points().iter().map(map).collect()).expect("rigid motion keeps validity"),
                    ),
                    EdgeGeometry::Arc(arc) => EdgeGeometry::Arc(CircularArc {
                        center: map(&arc.center),
                        u: rotation * arc.u,
                        v: rotation * arc.v,
                        ..arc.clone()
                    }),
                    EdgeGeometry::Helix(h) => EdgeGeometry::Helix(Helix {
                        axis_point: map(&h.axis_point),
                        axis: rotation * h.axis,
                        u: rotation * h.u,
                        v: rotation * h.v,
                        ..h.clone()
                    }),
                };
                Edge { geometry, ..e.clone() }
            })
            .collect();
        CurveGraph { vertices, edges }
    }
}

/// `∫_Σ f(x(s)) ds` by composite 5-point Gauss–Legendre on every edge,
/// halving the panels until two successive estimates differ by less than
/// `tolerance`. Polylines are integrated segment by segment.
pub fn line_integral_oracle<F>(graph: &CurveGraph, f: F, tolerance: f64) -> Result<f64>
where
    F: Fn(&Vec3) -> f64,
{
    if !(tolerance > 0.0) {
        return Err(Error::Domain("oracle tolerance must be positive".into()));
    }
    let mut total = 0.0;
    let mut comp = 0.0;
    for edge in &graph.edges {
        let value = edge_integral(&edge.geometry, &f, tolerance)?;
        quad::neumaier_add(&mut total, &mut comp, value);
    }
    Ok(total + comp)
}

fn edge_integral<F: Fn(&Vec3) -> f64>(geometry: &EdgeGeometry, f: &F, tolerance: f64) -> Result<f64> {
    let along = |s: f64| f(&geometry.point_at_clamped(s));
    match geometry {
        EdgeGeometry::Polyline(pl) => {
            let mut total = 0.0;
            for w in pl.cumulative().windows(2) {
                total += quad::refine_gl5(&along, w[0], w[1], 2, tolerance, ORACLE_MAX_HALVINGS)?;
            }
            Ok(total)
        }
        EdgeGeometry::Segment { .. } => {
            quad::refine_gl5(&along, 0.0, geometry.arc_length(), 2, tolerance, ORACLE_MAX_HALVINGS)
        }
        EdgeGeometry::Arc(CircularArc { span, .. }) | EdgeGeometry::Helix(Helix { span, .. }) => {
            let panels = (span / (std::f64::consts::PI / 4.0)).ceil().max(2.0) as usize;
            quad::refine_gl5(&along, 0.0, geometry.arc_length(), panels, tolerance, ORACLE_MAX_HALVINGS)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn lgraph() -> CurveGraph {
        CurveGraph::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
            vec![
                Edge::new(0, 1, EdgeGeometry::segment(Vec3::zeros(), Vec3::x()).unwrap()).unwrap(),
                Edge::new(0, 2, EdgeGeometry::segment(Vec3::zeros(), Vec3::y()).unwrap()).unwrap(),
            ],
        )
        .unwrap()
    }

    fn circle() -> CurveGraph {
        CurveGraph::from_edge(EdgeGeometry::Arc(
            CircularArc::new(Vec3::zeros(), 1.0, Vec3::x(), Vec3::y(), 0.0, TAU).unwrap(),
        ))
        .unwrap()
    }

    #[test]
    fn oracle_examples() {
        let square = CurveGraph::from_edge(
            EdgeGeometry::polyline(vec![
                Vec3::zeros(),
                Vec3::x(),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::y(),
                Vec3::zeros(),
            ])
            .unwrap(),
        )
        .unwrap();
        assert!((line_integral_oracle(&square, |_| 1.0, 1e-12).unwrap() - 4.0).abs() < 1e-12);

        let zseg = CurveGraph::from_edge(EdgeGeometry::segment(Vec3::zeros(), Vec3::z()).unwrap()).unwrap();
        assert!((line_integral_oracle(&zseg, |p| p.z, 1e-12).unwrap() - 0.5).abs() < 1e-12);

        let v = line_integral_oracle(&circle(), |p| p.x * p.x, 1e-12).unwrap();
        assert!((v - PI).abs() < 1e-11);
    }

    #[test]
    fn oracle_rejects_nonpositive_tolerance() {
        assert!(line_integral_oracle(&circle(), |_| 1.0, 0.0).is_err());
    }

    #[test]
    fn oracle_accuracy_error_carries_estimates() {
        let zseg = CurveGraph::from_edge(EdgeGeometry::segment(Vec3::zeros(), Vec3::z()).unwrap()).unwrap();
        let err = line_integral_oracle(&zseg, |p| 1.0 / p.z.sqrt(), 1e-15).unwrap_err();
        match err {
            Error::Accuracy { last, previous } => assert!(last.is_finite() && previous.is_finite()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonsmooth_examples() {
        assert!(circle().nonsmooth_vertices(DEFAULT_ANGLE_TOL).is_empty());
        assert_eq!(lgraph().nonsmooth_vertices(DEFAULT_ANGLE_TOL), vec![0]);
        let t = CurveGraph::new(
            vec![Vec3::zeros(), Vec3::x(), -Vec3::x(), Vec3::y()],
            (1..4)
                .map(|i| {
                    let ends = [Vec3::x(), -Vec3::x(), Vec3::y()];
                    Edge::new(0, i, EdgeGeometry::segment(Vec3::zeros(), ends[i - 1]).unwrap()).unwrap()
                })
                .collect(),
        )
        .unwrap();
        assert_eq!(t.nonsmooth_vertices(DEFAULT_ANGLE_TOL), vec![0]);
    }

    #[test]
    fn straight_pass_through_is_smooth() {
        let g = CurveGraph::new(
            vec![-Vec3::x(), Vec3::zeros(), Vec3::x()],
            vec![
                Edge::new(0, 1, EdgeGeometry::segment(-Vec3::x(), Vec3::zeros()).unwrap()).unwrap(),
                Edge::new(2, 1, EdgeGeometry::segment(Vec3::x(), Vec3::zeros()).unwrap()).unwrap(),
            ],
        )
        .unwrap();
        assert!(g.nonsmooth_vertices(DEFAULT_ANGLE_TOL).is_empty());
    }

    #[test]
    fn endpoint_mismatch_rejected() {
        let err = CurveGraph::new(
            vec![Vec3::zeros(), Vec3::new(1.0, 1e-6, 0.0)],
            vec![Edge::new(0, 1, EdgeGeometry::segment(Vec3::zeros(), Vec3::x()).unwrap()).unwrap()],
        );
        assert!(matches!(err, Err(Error::InvalidGeometry(_))));
        let err = CurveGraph::new(
            vec![Vec3::zeros()],
            vec![Edge::new(0, 1, EdgeGeometry::segment(Vec3::zeros(), Vec3::x()).unwrap()).unwrap()],
        );
        assert!(err.is_err());
    }

    #[test]
    fn additivity_and_reversal() {
        let g = lgraph();
        let f = |p: &Vec3| (p.x * 3.0).sin() + p.y * p.y;
        let tol = 1e-10;
        let whole = line_integral_oracle(&g, f, tol).unwrap();
        let parts: f64 = g
            .edges()
            .iter()
            .map(|e| line_integral_oracle(&CurveGraph::from_edge(e.geometry().clone()).unwrap(), f, tol).unwrap())
            .sum();
        assert!((whole - parts).abs() <= 2.0 * tol);
        let rev = line_integral_oracle(&g.reversed_edge(1), f, tol).unwrap();
        assert!((whole - rev).abs() <= tol);
    }
}
