use std::f64::consts::PI;

use linedelta::{
    build_spatial_index, builtin, closest_point_brute_force, closest_point_graph, delta_codim2_from_distance,
    distance_grid, grid_integrate, CircularArc, CurveGraph, Edge, EdgeGeometry, GridSpec, Helix, Kernel,
    KernelFamily, ScalarField, Vec3, WeightMode,
};
use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3> {
    point().prop_filter("non-degenerate", |v| v.norm() > 0.1).prop_map(|v| v.normalize())
}

/// One free-standing edge of any kind.
fn geometry() -> impl Strategy<Value = EdgeGeometry> {
    prop_oneof![
        (point(), point()).prop_filter_map("distinct", |(a, b)| EdgeGeometry::segment(a, b).ok()),
        prop::collection::vec(point(), 2..8).prop_filter_map("valid", |p| EdgeGeometry::polyline(p).ok()),
        (point(), 0.1..1.0f64, unit(), 0.0..6.0f64, 0.3..6.2f64).prop_filter_map("arc", |(c, r, n, a, s)| {
            let u = n.cross(&Vec3::new(0.3, -0.7, 0.2)).try_normalize(1e-6)?;
            CircularArc::with_normal(c, r, n, u, a, s).ok().map(EdgeGeometry::Arc)
        }),
        (point(), unit(), 0.1..0.8f64, -1.0..1.0f64, 0.0..6.0f64, 0.5..12.0f64).prop_filter_map(
            "helix",
            |(p, ax, r, pitch, a, s)| {
                let u = ax.cross(&Vec3::new(0.3, -0.7, 0.2)).try_normalize(1e-6)?;
                Helix::new(p, ax, r, pitch, u, a, s).ok().map(EdgeGeometry::Helix)
            }
        ),
    ]
}

/// Disjoint union of a few edges, each with its own two vertices.
fn graph() -> impl Strategy<Value = CurveGraph> {
    prop::collection::vec(geometry(), 1..5).prop_map(|geoms| {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for g in geoms {
            let (a, b) = (g.point_at_arclength(0.0).unwrap(), g.point_at_arclength(g.arc_length()).unwrap());
            let from = vertices.len();
            vertices.push(a);
            let to = if (a - b).norm() < 1e-12 {
                from
            } else {
                vertices.push(b);
                from + 1
            };
            edges.push(Edge::new(from, to, g).unwrap());
        }
        CurveGraph::new(vertices, edges).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn index_matches_brute_force(g in graph(), qs in prop::collection::vec(point().prop_map(|p| 1.5 * p), 50)) {
        let index = build_spatial_index(&g);
        for q in qs {
            let a = closest_point_graph(&q, &g, &index);
            let b = closest_point_brute_force(&q, &g);
            prop_assert!((a.rho - b.rho).abs() <= 1e-12, "{} vs {}", a.rho, b.rho);
        }
    }

    #[test]
    fn distance_is_one_lipschitz(g in graph()) {
        let h = 1.0 / 8.0;
        let grid = GridSpec::cube(-1.5, 1.5, h, 3).unwrap();
        let d = distance_grid(&g, &build_spatial_index(&g), &grid);
        let rho = d.rho.values();
        let dims = grid.dims();
        let bound = h * 3f64.sqrt() + 1e-12;
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let here = rho[grid.index(i, j, k)];
                    prop_assert!(here >= 0.0);
                    if i + 1 < dims[0] { prop_assert!((here - rho[grid.index(i + 1, j, k)]).abs() <= bound); }
                    if j + 1 < dims[1] { prop_assert!((here - rho[grid.index(i, j + 1, k)]).abs() <= bound); }
                    if k + 1 < dims[2] { prop_assert!((here - rho[grid.index(i, j, k + 1)]).abs() <= bound); }
                }
            }
        }
    }

    #[test]
    fn integration_is_linear(alpha in -3.0..3.0f64, beta in -3.0..3.0f64, seed in 0u64..1000) {
        let grid = GridSpec::cube(-1.0, 1.0, 1.0 / 16.0, 3).unwrap();
        let s = seed as f64;
        let f1 = ScalarField::from_fn(grid, |p| (p.x * 3.0 + s).sin() + 1.5);
        let f2 = ScalarField::from_fn(grid, |p| (p.y * p.z * 5.0 - s).cos());
        let combo = ScalarField::new(
            grid,
            f1.values().iter().zip(f2.values()).map(|(a, b)| alpha * a + beta * b).collect(),
        ).unwrap();
        let f = |p: &Vec3| 1.0 + p.x * p.x;
        let lhs = grid_integrate(&combo, f).unwrap();
        let rhs = alpha * grid_integrate(&f1, f).unwrap() + beta * grid_integrate(&f2, f).unwrap();
        let scale = (alpha.abs() + beta.abs()) * grid_integrate(&f1, |_| 1.0).unwrap().abs().max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn translation_changes_nothing(sx in -8i32..8, sy in -8i32..8, sz in -8i32..8, which in 0usize..3) {
        // dyadic shifts keep every coordinate exactly representable
        let shift = Vec3::new(sx as f64 / 4.0, sy as f64 / 4.0, sz as f64 / 4.0);
        let name = ["circle", "lgraph", "helix"][which];
        let g = builtin(name).unwrap();
        let moved = g.transformed(&Rotation3::identity(), &shift);
        let grid = GridSpec::cube(-2.0, 2.0, 1.0 / 16.0, 3).unwrap();
        let k = Kernel::new(KernelFamily::Cosine, 0.25).unwrap();
        let a = delta_codim2_from_distance(&g, &build_spatial_index(&g), &grid, &k, WeightMode::Radial).unwrap();
        let grid2 = grid.translated(&shift);
        let b = delta_codim2_from_distance(&moved, &build_spatial_index(&moved), &grid2, &k, WeightMode::Radial)
            .unwrap();
        let f = |p: &Vec3| 1.0 + p.x * p.y - p.z;
        let ia = grid_integrate(&a, f).unwrap();
        let ib = grid_integrate(&b, |p| f(&(p - shift))).unwrap();
        prop_assert_eq!(ia, ib);
    }

    #[test]
    fn threads_do_not_change_integrals(seed in 0u64..1000, threads in 2usize..6) {
        let grid = GridSpec::cube(-1.0, 1.0, 1.0 / 32.0, 3).unwrap();
        let s = seed as f64;
        let field = ScalarField::from_fn(grid, |p| (p.x * 7.0 + s).sin() * (p.y * 3.0 - s).cos() + p.z);
        let f = |p: &Vec3| (p.x + p.y * p.y).exp();
        let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        let one = pool(1).install(|| grid_integrate(&field, f).unwrap());
        let many = pool(threads).install(|| grid_integrate(&field, f).unwrap());
        prop_assert_eq!(one.to_bits(), many.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn rotation_stays_within_refinement_error(axis in unit(), angle in 0.0..PI) {
        let h = 1.0 / 32.0;
        let grid = GridSpec::cube(-2.0, 2.0, h, 3).unwrap();
        let k = Kernel::new(KernelFamily::Cosine, 4.0 * h).unwrap();
        let circle = builtin("circle").unwrap();
        let base = delta_codim2_from_distance(&circle, &build_spatial_index(&circle), &grid, &k, WeightMode::Radial)
            .unwrap();
        let base = grid_integrate(&base, |_| 1.0).unwrap();
        let refinement_err = (base - 2.0 * PI).abs();
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        let turned = circle.transformed(&rot, &Vec3::zeros());
        let field = delta_codim2_from_distance(&turned, &build_spatial_index(&turned), &grid, &k, WeightMode::Radial)
            .unwrap();
        let value = grid_integrate(&field, |_| 1.0).unwrap();
        prop_assert!((value - base).abs() < 3.0 * refinement_err, "{value} vs {base} (err {refinement_err})");
    }
}
