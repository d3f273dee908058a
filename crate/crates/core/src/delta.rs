//! Assembly of regularized delta fields on a grid.
//!
//! * codimension 2 from the distance: `w(ρ)` with `w` a radial or ratio weight;
//! * excision of balls around non-smooth vertices;
//! * codimension 2 from a non-negative level set `φ`:
//!   `δ_ε(φ) ∂φ/∂ρ / (2π max(ρ, ρ_floor))`;
//! * codimension 1 from a level set: `δ_ε(φ) |∇φ|`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::curve::CurveGraph;
use crate::distance::{closest_point_graph, tube_cells, ClosestPointResult, SpatialIndex};
use crate::error::{Error, Result};
use crate::geometry::{any_orthogonal, Vec3};
use crate::grid::{GridField, GridSpec, ScalarField, SparseField};
use crate::kernels::{Kernel, WeightMode};

/// Level-set values below this count as negative.
pub const NONNEGATIVE_SLACK: f64 = 1e-12;

const CELL_CHUNK: usize = 8192;

type PhiFn = dyn Fn(&Vec3) -> f64 + Send + Sync;

/// A level-set function, either evaluable anywhere or sampled on a grid.
#[derive(Clone)]
pub enum LevelSetInput {
    Analytic(Arc<PhiFn>),
    /// Grid samples; off-centre values use multilinear interpolation.
    Samples(ScalarField),
}

impl fmt::Debug for LevelSetInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelSetInput::Analytic(_) => f.write_str("LevelSetInput::Analytic"),
            LevelSetInput::Samples(s) => write!(f, "LevelSetInput::Samples({:?})", s.grid()),
        }
    }
}

impl LevelSetInput {
    pub fn analytic<F: Fn(&Vec3) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        LevelSetInput::Analytic(Arc::new(f))
    }

    pub fn samples(field: ScalarField) -> Self {
        LevelSetInput::Samples(field)
    }

    /// `None` when a sampled level set is asked outside its sample hull.
    pub fn eval(&self, p: &Vec3) -> Option<f64> {
        match self {
            LevelSetInput::Analytic(f) => Some(f(p)),
            LevelSetInput::Samples(s) => s.interpolate(p),
        }
    }

    fn at_cell(&self, grid: &GridSpec, idx: usize) -> Option<f64> {
        match self {
            LevelSetInput::Samples(s) if s.grid() == grid => Some(s.values()[idx]),
            _ => self.eval(&grid.cell_center(idx)),
        }
    }

    /// Value at the neighbouring cell centre along `axis`, or `None` past the
    /// grid boundary.
    fn neighbor(&self, grid: &GridSpec, idx: usize, axis: usize, forward: bool) -> Option<f64> {
        let c = grid.coords(idx);
        let n = grid.dims()[axis];
        let mut d = c;
        if forward {
            if c[axis] + 1 >= n {
                return None;
            }
            d[axis] += 1;
        } else {
            if c[axis] == 0 {
                return None;
            }
            d[axis] -= 1;
        }
        self.at_cell(grid, grid.index(d[0], d[1], d[2]))
    }
}

/// Balls of radius `radius` around excision centres.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcisionSpec {
    centers: Vec<Vec3>,
    radius: f64,
}

impl ExcisionSpec {
    pub fn new(graph: &CurveGraph, vertices: &[usize], radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("excision radius must be positive, got {radius}")));
        }
        let centers = vertices
            .iter()
            .map(|&v| {
                graph
                    .vertices()
                    .get(v)
                    .copied()
                    .ok_or_else(|| Error::Domain(format!("no vertex {v} to excise")))
            })
            .collect::<Result<_>>()?;
        Ok(ExcisionSpec { centers, radius })
    }

    /// Excise every non-smooth vertex.
    pub fn auto(graph: &CurveGraph, angle_tol: f64, radius: f64) -> Result<Self> {
        Self::new(graph, &graph.nonsmooth_vertices(angle_tol), radius)
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.centers.iter().any(|c| (p - c).norm() < self.radius)
    }
}

/// Zeroes every cell whose centre lies within the excision radius of a centre.
pub fn apply_excision<F: GridField>(field: F, spec: &ExcisionSpec) -> F {
    if spec.centers.is_empty() {
        return field;
    }
    let grid = *field.grid();
    field.zero_cells(|i| spec.contains(&grid.cell_center(i)))
}

/// `ρ_floor = h/2`, the default cap for ratio-mode weights.
pub fn default_rho_floor(grid: &GridSpec) -> f64 {
    0.5 * grid.h()
}

fn warn_if_underresolved(kernel: &Kernel, grid: &GridSpec) {
    if kernel.epsilon < 2.0 * grid.h() {
        log::warn!(
            "kernel support {} is below two cells (h = {}); expect large quadrature errors",
            kernel.epsilon,
            grid.h()
        );
    }
}

/// Codimension-2 delta `w(ρ)` of a curve graph in three dimensions.
pub fn delta_codim2_from_distance(
    graph: &CurveGraph,
    index: &SpatialIndex,
    grid: &GridSpec,
    kernel: &Kernel,
    mode: WeightMode,
) -> Result<SparseField> {
    if grid.ndim() != 3 {
        return Err(Error::Grid("curve deltas need a three-dimensional grid".into()));
    }
    if let WeightMode::Ratio { rho_floor } = mode {
        if !(rho_floor > 0.0) {
            return Err(Error::Domain("ratio mode needs a positive rho floor".into()));
        }
    }
    warn_if_underresolved(kernel, grid);
    let cells = tube_cells(graph, index, grid, kernel.epsilon);
    SparseField::from_sorted(
        *grid,
        cells
            .into_iter()
            .map(|(i, cp)| (i, kernel.radial2d_weight_unchecked(cp.rho, mode))),
    )
}

fn inside_grid(grid: &GridSpec, p: &Vec3) -> bool {
    let h = grid.h();
    (0..grid.ndim()).all(|a| {
        let lo = grid.origin()[a];
        p[a] >= lo && p[a] <= lo + h * grid.dims()[a] as f64
    })
}

/// Direction along which `ρ` grows at the cell: `∇ρ`, or a fixed normal to
/// the curve when the cell centre sits on it.
fn rho_direction(graph: &CurveGraph, cp: &ClosestPointResult) -> Vec3 {
    if cp.rho > 0.0 {
        cp.direction
    } else {
        let t = graph.edges()[cp.edge].geometry().tangent_at(cp.s);
        any_orthogonal(&t)
    }
}

fn dphi_drho_at(
    phi: &LevelSetInput,
    graph: &CurveGraph,
    grid: &GridSpec,
    idx: usize,
    cp: &ClosestPointResult,
    step: f64,
) -> Result<f64> {
    let x = grid.cell_center(idx);
    let dir = rho_direction(graph, cp);
    let sample = |p: Vec3| if inside_grid(grid, &p) { phi.eval(&p) } else { None };
    let forward = sample(x + step * dir);
    let backward = if cp.rho > step { sample(x - step * dir) } else { None };
    let value = match (forward, backward) {
        (Some(f), Some(b)) => (f - b) / (2.0 * step),
        (Some(f), None) | (None, Some(f)) => {
            let here = phi
                .at_cell(grid, idx)
                .ok_or_else(|| Error::NonFinite { cell: idx, what: "level set undefined at cell".into() })?;
            if forward.is_some() {
                (f - here) / step
            } else {
                (here - f) / step
            }
        }
        (None, None) => {
            return Err(Error::NonFinite { cell: idx, what: "no stencil for dphi/drho".into() });
        }
    };
    if !value.is_finite() {
        return Err(Error::NonFinite { cell: idx, what: format!("dphi/drho = {value}") });
    }
    Ok(value)
}

/// Directional derivative of `φ` along `∇ρ` at every cell, by centred
/// differences of width `2·step` (one-sided when the stencil leaves the grid
/// or would cross the curve).
pub fn dphi_drho(
    phi: &LevelSetInput,
    graph: &CurveGraph,
    index: &SpatialIndex,
    grid: &GridSpec,
    step: f64,
) -> Result<ScalarField> {
    if !(step > 0.0) {
        return Err(Error::Domain("difference step must be positive".into()));
    }
    let chunks: Vec<Result<Vec<f64>>> = (0..grid.len())
        .collect::<Vec<_>>()
        .par_chunks(CELL_CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .map(|&i| {
                    let cp = closest_point_graph(&grid.cell_center(i), graph, index);
                    dphi_drho_at(phi, graph, grid, i, &cp, step)
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for c in chunks {
        values.extend(c?);
    }
    ScalarField::new(*grid, values)
}

/// Options for [`delta_codim2_from_levelset`]; `None` selects `h/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LevelSetOptions {
    pub rho_floor: Option<f64>,
    pub step: Option<f64>,
}

/// Runs `cell` over every grid cell in parallel, keeping the nonzero results
/// in index order. The first error in index order wins.
fn assemble<F>(grid: &GridSpec, cell: F) -> Result<SparseField>
where
    F: Fn(usize) -> Result<Option<f64>> + Sync,
{
    let n = grid.len();
    let starts: Vec<usize> = (0..n).step_by(CELL_CHUNK).collect();
    let chunks: Vec<Result<Vec<(usize, f64)>>> = starts
        .par_iter()
        .map(|&start| {
            let mut out = Vec::new();
            for i in start..(start + CELL_CHUNK).min(n) {
                if let Some(v) = cell(i)? {
                    out.push((i, v));
                }
            }
            Ok(out)
        })
        .collect();
    let mut entries = Vec::new();
    for c in chunks {
        entries.extend(c?);
    }
    SparseField::from_sorted(*grid, entries)
}

/// Codimension-2 delta from a non-negative level set of the curve.
pub fn delta_codim2_from_levelset(
    phi: &LevelSetInput,
    graph: &CurveGraph,
    index: &SpatialIndex,
    grid: &GridSpec,
    kernel: &Kernel,
    options: LevelSetOptions,
) -> Result<SparseField> {
    if grid.ndim() != 3 {
        return Err(Error::Grid("curve deltas need a three-dimensional grid".into()));
    }
    let floor = options.rho_floor.unwrap_or_else(|| default_rho_floor(grid));
    let step = options.step.unwrap_or(0.5 * grid.h());
    if !(floor > 0.0) || !(step > 0.0) {
        return Err(Error::Domain("rho floor and difference step must be positive".into()));
    }
    warn_if_underresolved(kernel, grid);
    assemble(grid, |i| {
        let value = phi
            .at_cell(grid, i)
            .ok_or_else(|| Error::NonFinite { cell: i, what: "level set undefined at cell".into() })?;
        if !value.is_finite() {
            return Err(Error::NonFinite { cell: i, what: format!("phi = {value}") });
        }
        if value < -NONNEGATIVE_SLACK {
            return Err(Error::Domain(format!("level set is negative ({value}) at cell {i}")));
        }
        let kv = kernel.eval(value);
        if kv == 0.0 {
            return Ok(None);
        }
        let cp = closest_point_graph(&grid.cell_center(i), graph, index);
        let slope = dphi_drho_at(phi, graph, grid, i, &cp, step)?;
        if !(slope > 0.0) {
            return Err(Error::Monotonicity { cell: i, value: slope });
        }
        Ok(Some(kv * slope / (2.0 * PI * cp.rho.max(floor))))
    })
}

/// Which half-line or full-line normalization a codimension-1 level set uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Codim1Convention {
    /// Signed distance-like `φ`: `δ_ε(|φ|)/2`.
    #[default]
    Signed,
    /// `φ ≥ 0` vanishing on the interface: `δ_ε(φ)`.
    NonNegative,
}

/// Codimension-1 delta `δ_ε(φ)|∇φ|` on a 2-D or 3-D grid, with `|∇φ|` from
/// centred differences of width `2h` (one-sided at the grid boundary).
pub fn delta_codim1_from_levelset(
    phi: &LevelSetInput,
    grid: &GridSpec,
    kernel: &Kernel,
    convention: Codim1Convention,
) -> Result<SparseField> {
    warn_if_underresolved(kernel, grid);
    let h = grid.h();
    assemble(grid, |i| {
        let value = phi
            .at_cell(grid, i)
            .ok_or_else(|| Error::NonFinite { cell: i, what: "level set undefined at cell".into() })?;
        if !value.is_finite() {
            return Err(Error::NonFinite { cell: i, what: format!("phi = {value}") });
        }
        let kv = match convention {
            Codim1Convention::Signed => kernel.eval_symmetric(value),
            Codim1Convention::NonNegative => {
                if value < -NONNEGATIVE_SLACK {
                    return Err(Error::Domain(format!("level set is negative ({value}) at cell {i}")));
                }
                kernel.eval(value)
            }
        };
        if kv == 0.0 {
            return Ok(None);
        }
        let mut g2 = 0.0;
        for axis in 0..grid.ndim() {
            let d = match (phi.neighbor(grid, i, axis, true), phi.neighbor(grid, i, axis, false)) {
                (Some(f), Some(b)) => (f - b) / (2.0 * h),
                (Some(f), None) => (f - value) / h,
                (None, Some(b)) => (value - b) / h,
                (None, None) => 0.0,
            };
            g2 += d * d;
        }
        let out = kv * g2.sqrt();
        if !out.is_finite() {
            return Err(Error::NonFinite { cell: i, what: format!("|grad phi| = {}", g2.sqrt()) });
        }
        Ok(Some(out))
    })
}
