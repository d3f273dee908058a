//! Distance `ρ(x) = inf_{y∈Σ} |x − y|` to a curve graph, its gradient
//! direction, and grid sampling of both.
//!
//! The gradient is taken as the unit vector from the foot point to the
//! query, which is exact wherever the closest point is unique. On the medial
//! axis the tie-break (lowest edge, then lowest arc length) picks the foot.

mod bvh;

pub use bvh::SpatialIndex;

use rayon::prelude::*;

use crate::curve::{segment_projection, CurveGraph, EdgeHit};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::grid::{GridSpec, ScalarField};

/// Distances below this are reported as exactly zero (the point is on Σ).
pub const ON_CURVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    EdgeInterior { edge: usize },
    /// Vertex shared by two or more edge ends.
    Vertex { vertex: usize },
    /// Free end of an open curve. For [`closest_point_segment`] the index is
    /// 0 for `a` and 1 for `b`.
    Endpoint { vertex: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPointResult {
    pub rho: f64,
    pub foot: Vec3,
    /// `(x − foot)/ρ`, or zero when `ρ = 0`.
    pub direction: Vec3,
    pub feature: Feature,
    pub edge: usize,
    /// Arc-length parameter of the foot along `edge`.
    pub s: f64,
}

fn unit_direction(p: &Vec3, foot: &Vec3, rho: f64) -> (f64, Vec3) {
    if rho < ON_CURVE_TOL {
        return (0.0, Vec3::zeros());
    }
    (rho, (p - foot).normalize())
}

/// Closest point on the closed segment `ab`.
pub fn closest_point_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> Result<ClosestPointResult> {
    if a == b {
        return Err(Error::DegenerateEdge);
    }
    let (t, foot) = segment_projection(p, a, b);
    let (rho, direction) = unit_direction(p, &foot, (p - foot).norm());
    let feature = if t == 0.0 {
        Feature::Endpoint { vertex: 0 }
    } else if t == 1.0 {
        Feature::Endpoint { vertex: 1 }
    } else {
        Feature::EdgeInterior { edge: 0 }
    };
    Ok(ClosestPointResult { rho, foot, direction, feature, edge: 0, s: t * (b - a).norm() })
}

fn finish(graph: &CurveGraph, p: &Vec3, edge: usize, hit: EdgeHit) -> ClosestPointResult {
    let e = &graph.edges()[edge];
    let end_vertex = if hit.s == 0.0 {
        Some(e.from)
    } else if hit.s == e.arc_length() {
        Some(e.to)
    } else {
        None
    };
    let feature = match end_vertex {
        Some(v) if graph.valence(v) >= 2 => Feature::Vertex { vertex: v },
        Some(v) => Feature::Endpoint { vertex: v },
        None => Feature::EdgeInterior { edge },
    };
    let (rho, direction) = unit_direction(p, &hit.foot, hit.rho);
    ClosestPointResult { rho, foot: hit.foot, direction, feature, edge, s: hit.s }
}

/// Global closest point using the spatial index. Panics if the graph is empty.
pub fn closest_point_graph(p: &Vec3, graph: &CurveGraph, index: &SpatialIndex) -> ClosestPointResult {
    let (edge, hit) = index.closest(graph, p).expect("closest point on an empty graph");
    finish(graph, p, edge, hit)
}

/// Reference scan over every edge, without the index.
pub fn closest_point_brute_force(p: &Vec3, graph: &CurveGraph) -> ClosestPointResult {
    let mut best: Option<(usize, EdgeHit)> = None;
    for (i, e) in graph.edges().iter().enumerate() {
        let hit = e.geometry().closest(p);
        if best.map_or(true, |(_, b)| hit.rho < b.rho) {
            best = Some((i, hit));
        }
    }
    let (edge, hit) = best.expect("closest point on an empty graph");
    finish(graph, p, edge, hit)
}

pub fn build_spatial_index(graph: &CurveGraph) -> SpatialIndex {
    SpatialIndex::build(graph)
}

/// `ρ` and the three components of `∇ρ` sampled at cell centres.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub rho: ScalarField,
    pub grad: [ScalarField; 3],
}

const GRID_CHUNK: usize = 4096;

/// Samples `ρ` and `∇ρ` at every cell centre. Each cell depends only on its
/// own query, so the output does not depend on the thread count.
pub fn distance_grid(graph: &CurveGraph, index: &SpatialIndex, grid: &GridSpec) -> DistanceField {
    let n = grid.len();
    let mut rho = vec![0.0; n];
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let mut gz = vec![0.0; n];
    rho.par_chunks_mut(GRID_CHUNK)
        .zip(gx.par_chunks_mut(GRID_CHUNK))
        .zip(gy.par_chunks_mut(GRID_CHUNK))
        .zip(gz.par_chunks_mut(GRID_CHUNK))
        .enumerate()
        .for_each(|(c, (((r, x), y), z))| {
            let base = c * GRID_CHUNK;
            for k in 0..r.len() {
                let cp = closest_point_graph(&grid.cell_center(base + k), graph, index);
                r[k] = cp.rho;
                x[k] = cp.direction.x;
                y[k] = cp.direction.y;
                z[k] = cp.direction.z;
            }
        });
    let field = |v| ScalarField::new(*grid, v).expect("length matches grid");
    DistanceField { rho: field(rho), grad: [field(gx), field(gy), field(gz)] }
}

/// Cells (ascending) whose centres may lie within `radius` of the curve: a
/// superset of `{ρ < radius}` built from per-piece bounding boxes.
pub fn tube_candidates(graph: &CurveGraph, grid: &GridSpec, radius: f64) -> Vec<usize> {
    let chunk = radius.max(grid.h());
    let pad = radius * (1.0 + 1e-12) + 1e-12;
    let mut cells = Vec::new();
    for e in graph.edges() {
        let n = (e.arc_length() / chunk).ceil().max(1.0) as usize;
        for (s0, s1) in crate::curve::split_range(e.arc_length(), n) {
            grid.cells_in_box(&e.geometry().bounding_box(s0, s1).expanded(pad), &mut cells);
        }
    }
    cells.par_sort_unstable();
    cells.dedup();
    cells
}

/// Closest-point results for every cell with `ρ < radius`, in ascending
/// cell order.
pub fn tube_cells(
    graph: &CurveGraph,
    index: &SpatialIndex,
    grid: &GridSpec,
    radius: f64,
) -> Vec<(usize, ClosestPointResult)> {
    let candidates = tube_candidates(graph, grid, radius);
    candidates
        .par_iter()
        .with_min_len(256)
        .filter_map(|&i| {
            let cp = closest_point_graph(&grid.cell_center(i), graph, index);
            (cp.rho < radius).then_some((i, cp))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::builtin;

    #[test]
    fn segment_examples() {
        let (a, b) = (Vec3::zeros(), Vec3::x());
        let r = closest_point_segment(&Vec3::new(0.5, 2.0, 0.0), &a, &b).unwrap();
        assert_eq!(r.rho, 2.0);
        assert_eq!(r.foot, Vec3::new(0.5, 0.0, 0.0));
        assert_eq!(r.direction, Vec3::y());
        let r = closest_point_segment(&Vec3::new(2.0, 0.0, 0.0), &a, &b).unwrap();
        assert_eq!((r.rho, r.foot, r.feature), (1.0, b, Feature::Endpoint { vertex: 1 }));
        let r = closest_point_segment(&Vec3::new(0.3, 0.0, 0.0), &a, &b).unwrap();
        assert_eq!(r.rho, 0.0);
        assert_eq!(r.direction, Vec3::zeros());
        assert!(matches!(closest_point_segment(&Vec3::zeros(), &a, &a), Err(Error::DegenerateEdge)));
    }

    #[test]
    fn graph_examples() {
        let circle = builtin("circle").unwrap();
        let idx = build_spatial_index(&circle);
        let r = closest_point_graph(&Vec3::new(2.0, 0.0, 0.0), &circle, &idx);
        assert!((r.rho - 1.0).abs() < 1e-15);
        assert!((r.foot - Vec3::x()).norm() < 1e-15);
        let r = closest_point_graph(&Vec3::new(0.0, 0.0, 1.0), &circle, &idx);
        assert!((r.rho - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.s, 0.0);

        let l = builtin("lgraph").unwrap();
        let idx = build_spatial_index(&l);
        let r = closest_point_graph(&Vec3::new(-1.0, -1.0, 0.0), &l, &idx);
        assert!((r.rho - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.foot, Vec3::zeros());
        assert_eq!(r.feature, Feature::Vertex { vertex: 0 });
        let r = closest_point_graph(&Vec3::new(1.5, 0.0, 0.0), &l, &idx);
        assert_eq!(r.feature, Feature::Endpoint { vertex: 1 });
    }

    #[test]
    fn single_edge_index_matches_segment() {
        let g = CurveGraph::from_edge(
            crate::curve::EdgeGeometry::segment(Vec3::new(0.1, 0.2, 0.3), Vec3::new(1.0, -0.5, 0.7)).unwrap(),
        )
        .unwrap();
        let idx = build_spatial_index(&g);
        assert_eq!(idx.piece_count(), 1);
        let p = Vec3::new(0.4, 0.9, -0.2);
        let a = closest_point_graph(&p, &g, &idx);
        let b = closest_point_segment(&p, &Vec3::new(0.1, 0.2, 0.3), &Vec3::new(1.0, -0.5, 0.7)).unwrap();
        assert_eq!(a.rho, b.rho);
        assert_eq!(a.foot, b.foot);
    }

    #[test]
    fn cylindrical_distance_to_axis() {
        let g = builtin("zaxis").unwrap();
        let idx = build_spatial_index(&g);
        let r = closest_point_graph(&Vec3::new(0.3, 0.4, 0.7), &g, &idx);
        assert!((r.rho - 0.5).abs() < 1e-15);
        assert!((r.direction - Vec3::new(0.6, 0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn grid_cell_on_curve_has_zero_distance() {
        let g = CurveGraph::from_edge(
            crate::curve::EdgeGeometry::segment(Vec3::new(-1.0, 0.125, 0.125), Vec3::new(1.0, 0.125, 0.125)).unwrap(),
        )
        .unwrap();
        let grid = GridSpec::new(&[0.0, 0.0, 0.0], 0.25, &[4, 4, 4]).unwrap();
        let d = distance_grid(&g, &build_spatial_index(&g), &grid);
        let i = grid.index(1, 0, 0);
        assert_eq!(d.rho.values()[i], 0.0);
        assert_eq!([d.grad[0].values()[i], d.grad[1].values()[i], d.grad[2].values()[i]], [0.0; 3]);
    }

    #[test]
    fn tube_cells_are_exactly_the_near_cells() {
        let g = builtin("helix").unwrap();
        let idx = build_spatial_index(&g);
        let grid = GridSpec::cube(-1.0, 1.0, 1.0 / 16.0, 3).unwrap();
        let radius = 0.15;
        let got: Vec<usize> = tube_cells(&g, &idx, &grid, radius).into_iter().map(|(i, _)| i).collect();
        let want: Vec<usize> = (0..grid.len())
            .filter(|&i| closest_point_brute_force(&grid.cell_center(i), &g).rho < radius)
            .collect();
        assert_eq!(got, want);
    }
}
