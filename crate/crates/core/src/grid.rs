//! Cartesian cell-centred grids and scalar fields on them.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};

/// Isotropic axis-aligned lattice in two or three dimensions. Cell `(i, j, k)`
/// has its centre at `origin + (index + 1/2)·h` along each axis; linear
/// indices run x fastest. Two-dimensional grids live in the plane z = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    origin: [f64; 3],
    h: f64,
    dims: [usize; 3],
    ndim: usize,
}

impl GridSpec {
    /// `origin` and `dims` must both have length 2 or 3.
    pub fn new(origin: &[f64], h: f64, dims: &[usize]) -> Result<Self> {
        let ndim = dims.len();
        if !(ndim == 2 || ndim == 3) || origin.len() != ndim {
            return Err(Error::Grid("grids are two- or three-dimensional".into()));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Grid(format!("spacing must be positive, got {h}")));
        }
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::Grid("every axis needs at least two cells".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Grid("origin must be finite".into()));
        }
        let mut o = [0.0; 3];
        let mut d = [1; 3];
        o[..ndim].copy_from_slice(origin);
        d[..ndim].copy_from_slice(dims);
        Ok(GridSpec { origin: o, h, dims: d, ndim })
    }

    /// The box `[lo, hi]^ndim` split into cells of width `h`; `(hi - lo)/h`
    /// must be an integer.
    pub fn cube(lo: f64, hi: f64, h: f64, ndim: usize) -> Result<Self> {
        let n = (hi - lo) / h;
        let rounded = n.round();
        if !(n > 0.0) || (n - rounded).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::Grid(format!(
                "box [{lo}, {hi}] is not a whole number of cells of width {h}"
            )));
        }
        let n = rounded as usize;
        GridSpec::new(&vec![lo; ndim], h, &vec![n; ndim])
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.ndim]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.ndim]
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `h^ndim`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.ndim as i32)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    pub fn cell_center(&self, idx: usize) -> Vec3 {
        let c = self.coords(idx);
        let mut p = Vec3::zeros();
        for a in 0..self.ndim {
            p[a] = self.origin[a] + (c[a] as f64 + 0.5) * self.h;
        }
        p
    }

    /// Same lattice shifted by `shift` (z ignored on 2-D grids).
    pub fn translated(&self, shift: &Vec3) -> GridSpec {
        let mut g = *self;
        for a in 0..self.ndim {
            g.origin[a] += shift[a];
        }
        g
    }

    /// Smallest box containing every cell centre.
    pub fn center_bounds(&self) -> Aabb {
        let mut b = Aabb::from_point(&self.cell_center(0));
        b.include(&self.cell_center(self.len() - 1));
        b
    }

    /// Linear indices of the cells whose centres fall in `bbox`, ascending.
    pub fn cells_in_box(&self, bbox: &Aabb, out: &mut Vec<usize>) {
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..3 {
            if a >= self.ndim {
                if bbox.min[a] > 0.0 || bbox.max[a] < 0.0 {
                    return;
                }
                continue;
            }
            let to_index = |x: f64| (x - self.origin[a]) / self.h - 0.5;
            let first = to_index(bbox.min[a]).ceil().max(0.0);
            let last = to_index(bbox.max[a]).floor().min(self.dims[a] as f64 - 1.0);
            if first > last {
                return;
            }
            lo[a] = first as usize;
            hi[a] = last as usize;
        }
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                let row = self.index(0, j, k);
                out.extend((lo[0]..=hi[0]).map(|i| row + i));
            }
        }
    }
}

/// One value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField { values: vec![0.0; grid.len()], grid }
    }

    pub fn from_fn<F: Fn(&Vec3) -> f64>(grid: GridSpec, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.cell_center(i))).collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Multilinear interpolation between cell centres; `None` outside the
    /// hull of the centres.
    pub fn interpolate(&self, p: &Vec3) -> Option<f64> {
        let g = &self.grid;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..g.ndim {
            let x = (p[a] - g.origin[a]) / g.h - 0.5;
            let n = g.dims[a];
            if !(x >= 0.0 && x <= (n - 1) as f64) {
                return None;
            }
            let i = (x.floor() as usize).min(n - 2);
            base[a] = i;
            frac[a] = x - i as f64;
        }
        let corners = 1usize << g.ndim;
        let mut acc = 0.0;
        for c in 0..corners {
            let mut w = 1.0;
            let mut idx = [base[0], base[1], base[2]];
            for a in 0..g.ndim {
                if c >> a & 1 == 1 {
                    idx[a] += 1;
                    w *= frac[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w != 0.0 {
                acc += w * self.values[g.index(idx[0], idx[1], idx[2])];
            }
        }
        Some(acc)
    }

    /// Nonzero entries in index order.
    pub fn to_sparse_field(&self) -> SparseField {
        let (indices, values) = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .unzip();
        SparseField { grid: self.grid, indices, values }
    }
}

/// A field that is zero outside an explicit list of cells; used for delta
/// fields, whose support is a thin tube around the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseField {
    grid: GridSpec,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseField {
    pub fn empty(grid: GridSpec) -> Self {
        SparseField { grid, indices: Vec::new(), values: Vec::new() }
    }

    /// Builds from `(cell, value)` pairs with strictly increasing cells.
    /// Zero values are dropped.
    pub fn from_sorted(grid: GridSpec, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, v) in entries {
            if i >= grid.len() || indices.last().is_some_and(|&last| last >= i) {
                return Err(Error::Grid("sparse entries must be in-range and strictly increasing".into()));
            }
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Ok(SparseField { grid, indices, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Value at a cell (zero when absent).
    pub fn get(&self, idx: usize) -> f64 {
        self.indices.binary_search(&idx).map_or(0.0, |k| self.values[k])
    }

    pub fn to_dense(&self) -> ScalarField {
        let mut values = vec![0.0; self.grid.len()];
        for (i, v) in self.iter() {
            values[i] = v;
        }
        ScalarField { grid: self.grid, values }
    }

    /// `alpha·self + beta·other` on the same grid.
    pub fn linear_combination(&self, alpha: f64, other: &SparseField, beta: f64) -> Result<SparseField> {
        if self.grid != other.grid {
            return Err(Error::Grid("fields live on different grids".into()));
        }
        let (mut a, mut b) = (self.iter().peekable(), other.iter().peekable());
        let mut out = Vec::with_capacity(self.nnz().max(other.nnz()));
        loop {
            let next = match (a.peek(), b.peek()) {
                (Some(&(i, x)), Some(&(j, y))) => {
                    if i == j {
                        a.next();
                        b.next();
                        (i, alpha * x + beta * y)
                    } else if i < j {
                        a.next();
                        (i, alpha * x)
                    } else {
                        b.next();
                        (j, beta * y)
                    }
                }
                (Some(&(i, x)), None) => {
                    a.next();
                    (i, alpha * x)
                }
                (None, Some(&(j, y))) => {
                    b.next();
                    (j, beta * y)
                }
                (None, None) => break,
            };
            out.push(next);
        }
        SparseField::from_sorted(self.grid, out)
    }
}

/// Common surface of dense and sparse fields.
pub trait GridField: Sized {
    fn grid(&self) -> &GridSpec;

    /// Nonzero entries in ascending cell order.
    fn sparse(&self) -> Cow<'_, SparseField>;

    /// Sets to zero every cell for which `drop` holds.
    fn zero_cells<P: Fn(usize) -> bool>(self, drop: P) -> Self;
}

impl GridField for ScalarField {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn sparse(&self) -> Cow<'_, SparseField> {
        Cow::Owned(self.to_sparse_field())
    }

    fn zero_cells<P: Fn(usize) -> bool>(mut self, drop: P) -> Self {
        for (i, v) in self.values.iter_mut().enumerate() {
            if drop(i) {
                *v = 0.0;
            }
        }
        self
    }
}

impl GridField for SparseField {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn sparse(&self) -> Cow<'_, SparseField> {
        Cow::Borrowed(self)
    }

    fn zero_cells<P: Fn(usize) -> bool>(self, drop: P) -> Self {
        let (indices, values) = self.iter().filter(|(i, _)| !drop(*i)).unzip();
        SparseField { grid: self.grid, indices, values }
    }
}
