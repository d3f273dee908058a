//! Regularized line delta functions `δ_Σ = δ(ρ)/(2πρ)` on Cartesian grids.
//!
//! A curve graph Σ (segments, polylines, circular arcs, helices) is turned
//! into a grid field whose midpoint-rule integral against `f` approximates
//! `∫_Σ f ds`. Fields are built from the exact distance `ρ` to Σ, from a
//! non-negative level set of Σ, or, for codimension-1 interfaces, from
//! `δ(φ)|∇φ|`.
//!
//! ```
//! use linedelta::{builtin, build_spatial_index, delta_codim2_from_distance,
//!                 grid_integrate, GridSpec, Kernel, KernelFamily, WeightMode};
//!
//! let circle = builtin("circle").unwrap();
//! let index = build_spatial_index(&circle);
//! let grid = GridSpec::cube(-2.0, 2.0, 1.0 / 16.0, 3).unwrap();
//! let kernel = Kernel::new(KernelFamily::Cosine, 4.0 / 16.0).unwrap();
//! let field = delta_codim2_from_distance(&circle, &index, &grid, &kernel, WeightMode::Radial).unwrap();
//! let length = grid_integrate(&field, |_| 1.0).unwrap();
//! assert!((length - 2.0 * std::f64::consts::PI).abs() < 0.1);
//! ```

pub mod cli;
pub mod curve;
pub mod delta;
pub mod distance;
mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod kernels;
mod quad;
pub mod quadrature;

pub use curve::{
    arc_length, builtin, builtin_names, line_integral_oracle, point_at_arclength, CircularArc, CurveFile,
    CurveGraph, Edge, EdgeGeometry, Helix, Polyline, DEFAULT_ANGLE_TOL,
};
pub use delta::{
    apply_excision, delta_codim1_from_levelset, delta_codim2_from_distance, delta_codim2_from_levelset,
    dphi_drho, Codim1Convention, ExcisionSpec, LevelSetInput, LevelSetOptions,
};
pub use distance::{
    build_spatial_index, closest_point_brute_force, closest_point_graph, closest_point_segment, distance_grid,
    ClosestPointResult, DistanceField, Feature, SpatialIndex,
};
pub use error::{Error, Result};
pub use geometry::Vec3;
pub use grid::{GridField, GridSpec, ScalarField, SparseField};
pub use kernels::{kernel_eval, kernel_mass, radial2d_weight, Kernel, KernelFamily, WeightMode};
pub use quadrature::{convergence_study, grid_integrate, ConvergenceReport, ConvergenceRow, Integrand};
