//! Python bindings: curves, grids, kernels, delta fields, integration and
//! refinement studies. Heavy work runs with the interpreter detached.

use std::f64::consts::PI;

use linedelta::quadrature::{Domain, EpsRule, Excision, FieldSource, ModeChoice, Radius, StudySetup};
use linedelta::{
    apply_excision, build_spatial_index, closest_point_graph, convergence_study, delta_codim1_from_levelset,
    delta_codim2_from_distance, delta_codim2_from_levelset, distance_grid, grid_integrate, line_integral_oracle,
    Codim1Convention, CurveGraph, Error, ExcisionSpec, Feature, GridSpec, Integrand, KernelFamily,
    LevelSetOptions, ScalarField, SpatialIndex, SparseField, Vec3, WeightMode, DEFAULT_ANGLE_TOL,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Accuracy { .. } | Error::NonFinite { .. } | Error::Monotonicity { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn integrand(s: &str) -> PyResult<Integrand> {
    s.parse().map_err(to_py)
}

fn weight_mode(mode: &str, rho_floor: Option<f64>, grid: &GridSpec) -> PyResult<WeightMode> {
    match mode {
        "radial" => Ok(WeightMode::Radial),
        "ratio" => Ok(WeightMode::Ratio { rho_floor: rho_floor.unwrap_or(grid.h() / 2.0) }),
        _ => Err(PyValueError::new_err(format!("unknown mode `{mode}` (radial|ratio)"))),
    }
}

/// A curve graph together with its closest-point index.
#[pyclass(frozen, skip_from_py_object, module = "pylinedelta")]
#[derive(Clone)]
struct Curve {
    graph: CurveGraph,
    index: SpatialIndex,
    name: String,
}

impl Curve {
    fn wrap(graph: CurveGraph, name: String) -> Self {
        let index = build_spatial_index(&graph);
        Curve { graph, index, name }
    }
}

#[pymethods]
impl Curve {
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(Curve::wrap(linedelta::builtin(name).map_err(to_py)?, name.to_string()))
    }

    #[staticmethod]
    fn builtin_names() -> Vec<&'static str> {
        linedelta::builtin_names().collect()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let graph: CurveGraph = text.parse().map_err(to_py)?;
        Ok(Curve::wrap(graph, "json".into()))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let file = linedelta::CurveFile::load(path.as_ref()).map_err(to_py)?;
        Ok(Curve::wrap(file.to_graph().map_err(to_py)?, path.to_string()))
    }

    #[getter]
    fn total_length(&self) -> f64 {
        self.graph.total_length()
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.graph.vertices().len()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.graph.edges().len()
    }

    #[pyo3(signature = (angle_tol = DEFAULT_ANGLE_TOL))]
    fn nonsmooth_vertices(&self, angle_tol: f64) -> PyResult<Vec<usize>> {
        if !(angle_tol > 0.0 && angle_tol <= PI / 4.0) {
            return Err(PyValueError::new_err("angle_tol must lie in (0, pi/4]"));
        }
        Ok(self.graph.nonsmooth_vertices(angle_tol))
    }

    /// `∫_Σ f ds` for a registered integrand (`one`, `x2`, `z`, `poly:...`).
    #[pyo3(signature = (integrand = "one", tolerance = 1e-12))]
    fn line_integral(&self, integrand: &str, tolerance: f64) -> PyResult<f64> {
        let f = self::integrand(integrand)?;
        line_integral_oracle(&self.graph, |p| f.eval(p), tolerance).map_err(to_py)
    }

    fn closest_point<'py>(&self, py: Python<'py>, x: f64, y: f64, z: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = closest_point_graph(&Vec3::new(x, y, z), &self.graph, &self.index);
        let d = PyDict::new(py);
        d.set_item("rho", r.rho)?;
        d.set_item("foot", (r.foot.x, r.foot.y, r.foot.z))?;
        d.set_item("direction", (r.direction.x, r.direction.y, r.direction.z))?;
        let (kind, id) = match r.feature {
            Feature::EdgeInterior { edge } => ("edge", edge),
            Feature::Vertex { vertex } => ("vertex", vertex),
            Feature::Endpoint { vertex } => ("endpoint", vertex),
        };
        d.set_item("feature", (kind, id))?;
        d.set_item("edge", r.edge)?;
        d.set_item("s", r.s)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Curve({:?}, edges={}, length={})", self.name, self.graph.edges().len(), self.graph.total_length())
    }
}

#[pyclass(frozen, skip_from_py_object, module = "pylinedelta")]
#[derive(Clone)]
struct Grid {
    spec: GridSpec,
}

#[pymethods]
impl Grid {
    #[new]
    fn new(origin: Vec<f64>, h: f64, dims: Vec<usize>) -> PyResult<Self> {
        Ok(Grid { spec: GridSpec::new(&origin, h, &dims).map_err(to_py)? })
    }

    #[staticmethod]
    #[pyo3(signature = (lo, hi, h, ndim = 3))]
    fn cube(lo: f64, hi: f64, h: f64, ndim: usize) -> PyResult<Self> {
        Ok(Grid { spec: GridSpec::cube(lo, hi, h, ndim).map_err(to_py)? })
    }

    #[getter]
    fn h(&self) -> f64 {
        self.spec.h()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.spec.dims().to_vec()
    }

    #[getter]
    fn origin(&self) -> Vec<f64> {
        self.spec.origin().to_vec()
    }

    fn __len__(&self) -> usize {
        self.spec.len()
    }

    fn cell_center(&self, index: usize) -> PyResult<(f64, f64, f64)> {
        if index >= self.spec.len() {
            return Err(PyValueError::new_err("cell index out of range"));
        }
        let c = self.spec.cell_center(index);
        Ok((c.x, c.y, c.z))
    }

    fn __repr__(&self) -> String {
        format!("Grid(origin={:?}, h={}, dims={:?})", self.spec.origin(), self.spec.h(), self.spec.dims())
    }
}

#[pyclass(frozen, skip_from_py_object, module = "pylinedelta")]
#[derive(Clone)]
struct Kernel {
    inner: linedelta::Kernel,
}

#[pymethods]
impl Kernel {
    #[new]
    fn new(family: &str, eps: f64) -> PyResult<Self> {
        let family: KernelFamily = family.parse().map_err(to_py)?;
        Ok(Kernel { inner: linedelta::Kernel::new(family, eps).map_err(to_py)? })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family.name()
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.epsilon
    }

    fn eval(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    #[pyo3(signature = (rho, mode = "radial", rho_floor = 0.0))]
    fn radial_weight(&self, rho: f64, mode: &str, rho_floor: f64) -> PyResult<f64> {
        let mode = match mode {
            "radial" => WeightMode::Radial,
            "ratio" => WeightMode::Ratio { rho_floor },
            _ => return Err(PyValueError::new_err(format!("unknown mode `{mode}`"))),
        };
        self.inner.radial2d_weight(rho, mode).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Kernel({:?}, eps={})", self.inner.family.name(), self.inner.epsilon)
    }
}

/// A level-set function: one of the registered closed forms or grid samples.
#[pyclass(frozen, skip_from_py_object, module = "pylinedelta")]
#[derive(Clone)]
struct LevelSet {
    inner: linedelta::LevelSetInput,
}

#[pymethods]
impl LevelSet {
    /// `rho` (distance to `curve`), `cyl` (x²+y²), `ellip` (x²+4y²),
    /// `circle` (√(x²+y²)−1) or `sphere` (|x|−1), times `scale`.
    #[staticmethod]
    #[pyo3(signature = (name, scale = 1.0, curve = None))]
    fn named(name: &str, scale: f64, curve: Option<&Curve>) -> PyResult<Self> {
        use linedelta::LevelSetInput as L;
        let inner = match name {
            "rho" => {
                let c = curve.ok_or_else(|| PyValueError::new_err("`rho` needs a curve"))?.clone();
                L::analytic(move |p| scale * closest_point_graph(p, &c.graph, &c.index).rho)
            }
            "cyl" => L::analytic(move |p| scale * (p.x * p.x + p.y * p.y)),
            "ellip" => L::analytic(move |p| scale * (p.x * p.x + 4.0 * p.y * p.y)),
            "circle" => L::analytic(move |p| scale * (p.x.hypot(p.y) - 1.0)),
            "sphere" => L::analytic(move |p| scale * (p.norm() - 1.0)),
            _ => return Err(PyValueError::new_err(format!("unknown level set `{name}`"))),
        };
        Ok(LevelSet { inner })
    }

    /// Values at the cell centres of `grid`, x fastest.
    #[staticmethod]
    fn samples(grid: &Grid, values: Vec<f64>) -> PyResult<Self> {
        let field = ScalarField::new(grid.spec, values).map_err(to_py)?;
        Ok(LevelSet { inner: linedelta::LevelSetInput::samples(field) })
    }
}

/// A delta field stored as its nonzero cells.
#[pyclass(frozen, module = "pylinedelta")]
struct DeltaField {
    inner: SparseField,
}

#[pymethods]
impl DeltaField {
    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    #[getter]
    fn grid(&self) -> Grid {
        Grid { spec: *self.inner.grid() }
    }

    fn indices(&self) -> Vec<usize> {
        self.inner.indices().to_vec()
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn get(&self, index: usize) -> f64 {
        self.inner.get(index)
    }

    /// Every cell value, x fastest.
    fn dense(&self) -> Vec<f64> {
        self.inner.to_dense().into_values()
    }

    #[pyo3(signature = (integrand = "one"))]
    fn integrate(&self, py: Python<'_>, integrand: &str) -> PyResult<f64> {
        let f = self::integrand(integrand)?;
        py.detach(|| grid_integrate(&self.inner, |p| f.eval(p))).map_err(to_py)
    }

    /// Zeroes the cells within `radius` of the given vertices, or of every
    /// non-smooth vertex when `vertices` is None.
    #[pyo3(signature = (curve, radius, vertices = None))]
    fn excise(&self, curve: &Curve, radius: f64, vertices: Option<Vec<usize>>) -> PyResult<DeltaField> {
        let spec = match vertices {
            Some(v) => ExcisionSpec::new(&curve.graph, &v, radius),
            None => ExcisionSpec::auto(&curve.graph, DEFAULT_ANGLE_TOL, radius),
        }
        .map_err(to_py)?;
        Ok(DeltaField { inner: apply_excision(self.inner.clone(), &spec) })
    }

    fn __repr__(&self) -> String {
        format!("DeltaField(nnz={}, grid={:?})", self.inner.nnz(), self.inner.grid().dims())
    }
}

#[pyfunction]
#[pyo3(signature = (curve, grid, kernel, mode = "radial", rho_floor = None))]
fn delta_from_distance(
    py: Python<'_>,
    curve: &Curve,
    grid: &Grid,
    kernel: &Kernel,
    mode: &str,
    rho_floor: Option<f64>,
) -> PyResult<DeltaField> {
    let mode = weight_mode(mode, rho_floor, &grid.spec)?;
    let inner = py
        .detach(|| delta_codim2_from_distance(&curve.graph, &curve.index, &grid.spec, &kernel.inner, mode))
        .map_err(to_py)?;
    Ok(DeltaField { inner })
}

#[pyfunction]
fn delta_from_levelset(
    py: Python<'_>,
    phi: &LevelSet,
    curve: &Curve,
    grid: &Grid,
    kernel: &Kernel,
) -> PyResult<DeltaField> {
    let inner = py
        .detach(|| {
            delta_codim2_from_levelset(
                &phi.inner,
                &curve.graph,
                &curve.index,
                &grid.spec,
                &kernel.inner,
                LevelSetOptions::default(),
            )
        })
        .map_err(to_py)?;
    Ok(DeltaField { inner })
}

#[pyfunction]
#[pyo3(signature = (phi, grid, kernel, convention = "signed"))]
fn delta_codim1(py: Python<'_>, phi: &LevelSet, grid: &Grid, kernel: &Kernel, convention: &str) -> PyResult<DeltaField> {
    let convention = match convention {
        "signed" => Codim1Convention::Signed,
        "nonnegative" => Codim1Convention::NonNegative,
        _ => return Err(PyValueError::new_err(format!("unknown convention `{convention}`"))),
    };
    let inner = py
        .detach(|| delta_codim1_from_levelset(&phi.inner, &grid.spec, &kernel.inner, convention))
        .map_err(to_py)?;
    Ok(DeltaField { inner })
}

/// `(rho, grad_x, grad_y, grad_z)` at every cell, x fastest.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn distance(py: Python<'_>, curve: &Curve, grid: &Grid) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let d = py.detach(|| distance_grid(&curve.graph, &curve.index, &grid.spec));
    let [gx, gy, gz] = d.grad;
    (d.rho.into_values(), gx.into_values(), gy.into_values(), gz.into_values())
}

/// Refinement study of the distance-based field; returns a dict with the
/// CSV text, the rows and the observed order (None below three rows).
#[pyfunction]
#[pyo3(signature = (
    curve, hs, kernel = "cosine", mode = "radial", coupling = 4.0, integrand = "one",
    domain = (-2.0, 2.0), excise_cells = None, exact = None
))]
#[allow(clippy::too_many_arguments)]
fn converge<'py>(
    py: Python<'py>,
    curve: &Curve,
    hs: Vec<f64>,
    kernel: &str,
    mode: &str,
    coupling: f64,
    integrand: &str,
    domain: (f64, f64),
    excise_cells: Option<f64>,
    exact: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = match mode {
        "radial" => ModeChoice::Radial,
        "ratio" => ModeChoice::Ratio { rho_floor: None },
        _ => return Err(PyValueError::new_err(format!("unknown mode `{mode}`"))),
    };
    let setup = StudySetup {
        source: FieldSource::Distance {
            graph: curve.graph.clone(),
            mode,
            excision: match excise_cells {
                Some(c) => Excision::Auto(Radius::Cells(c)),
                None => Excision::None,
            },
        },
        domain: Domain::cube(domain.0, domain.1, 3),
        integrand: self::integrand(integrand)?,
        family: kernel.parse().map_err(to_py)?,
        eps: EpsRule::Coupling(coupling),
        exact,
        label: curve.name.clone(),
    };
    let report = py.detach(|| convergence_study(&setup, &hs)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("csv", report.to_csv())?;
    d.set_item("summary", report.summary())?;
    d.set_item("order", report.observed_order())?;
    d.set_item("exact", report.meta.exact)?;
    let rows: Vec<(f64, f64, f64, f64, f64)> =
        report.rows.iter().map(|r| (r.h, r.eps, r.value, r.abs_err, r.rel_err)).collect();
    d.set_item("rows", rows)?;
    Ok(d)
}

#[pymodule]
fn pylinedelta(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Curve>()?;
    m.add_class::<Grid>()?;
    m.add_class::<Kernel>()?;
    m.add_class::<LevelSet>()?;
    m.add_class::<DeltaField>()?;
    m.add_function(wrap_pyfunction!(delta_from_distance, m)?)?;
    m.add_function(wrap_pyfunction!(delta_from_levelset, m)?)?;
    m.add_function(wrap_pyfunction!(delta_codim1, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(converge, m)?)?;
    Ok(())
}
