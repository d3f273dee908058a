//! Midpoint quadrature of delta fields and grid-refinement studies.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{line_integral_oracle, CurveGraph};
use crate::delta::{
    apply_excision, default_rho_floor, delta_codim1_from_levelset, delta_codim2_from_distance,
    delta_codim2_from_levelset, Codim1Convention, ExcisionSpec, LevelSetInput, LevelSetOptions,
};
use crate::distance::build_spatial_index;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::grid::{GridField, GridSpec, SparseField};
use crate::kernels::{Kernel, KernelFamily, WeightMode};
use crate::quad::neumaier_add;

/// Nonzeros per summation chunk. Chunk boundaries are fixed so the reduction
/// order, and therefore the result, does not depend on the thread count.
const SUM_CHUNK: usize = 2048;

/// Tolerance used for oracle line integrals in studies.
pub const ORACLE_TOL: f64 = 1e-12;

/// `h^d Σ field(x)·f(x)` over the cells where the field is nonzero.
pub fn grid_integrate<G, F>(field: &G, f: F) -> Result<f64>
where
    G: GridField,
    F: Fn(&Vec3) -> f64 + Sync,
{
    let sparse = field.sparse();
    integrate_sparse(&sparse, &f)
}

fn integrate_sparse<F: Fn(&Vec3) -> f64 + Sync>(field: &SparseField, f: &F) -> Result<f64> {
    let grid = field.grid();
    let partials: Vec<Result<(f64, f64)>> = field
        .indices()
        .par_chunks(SUM_CHUNK)
        .zip(field.values().par_chunks(SUM_CHUNK))
        .map(|(idx, vals)| {
            let (mut sum, mut comp) = (0.0, 0.0);
            for (&i, &v) in idx.iter().zip(vals) {
                let fx = f(&grid.cell_center(i));
                if !fx.is_finite() {
                    return Err(Error::NonFinite { cell: i, what: format!("integrand = {fx}") });
                }
                neumaier_add(&mut sum, &mut comp, v * fx);
            }
            Ok((sum, comp))
        })
        .collect();
    let (mut sum, mut comp) = (0.0, 0.0);
    for p in partials {
        let (s, c) = p?;
        neumaier_add(&mut sum, &mut comp, s);
        neumaier_add(&mut sum, &mut comp, c);
    }
    Ok((sum + comp) * grid.cell_volume())
}

/// Registered test integrands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Integrand {
    One,
    X2,
    Z,
    /// `Σ c·x^a y^b z^c` as `(coefficient, [a, b, c])` terms.
    Polynomial(Vec<(f64, [u32; 3])>),
}

impl Integrand {
    pub fn eval(&self, p: &Vec3) -> f64 {
        match self {
            Integrand::One => 1.0,
            Integrand::X2 => p.x * p.x,
            Integrand::Z => p.z,
            Integrand::Polynomial(terms) => terms
                .iter()
                .map(|(c, [a, b, d])| c * p.x.powi(*a as i32) * p.y.powi(*b as i32) * p.z.powi(*d as i32))
                .sum(),
        }
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integrand::One => f.write_str("one"),
            Integrand::X2 => f.write_str("x2"),
            Integrand::Z => f.write_str("z"),
            Integrand::Polynomial(terms) => {
                f.write_str("poly:")?;
                for (i, (c, [a, b, d])) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{c},{a},{b},{d}")?;
                }
                Ok(())
            }
        }
    }
}

/// Accepts `one`, `x2`, `z`, or `poly:c,a,b,d;c,a,b,d;...` for
/// `Σ c·x^a y^b z^d`.
impl FromStr for Integrand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => return Ok(Integrand::One),
            "x2" => return Ok(Integrand::X2),
            "z" => return Ok(Integrand::Z),
            _ => {}
        }
        let body = s
            .strip_prefix("poly:")
            .ok_or_else(|| Error::Usage(format!("unknown integrand `{s}` (one|x2|z|poly:c,a,b,d;...)")))?;
        let bad = || Error::Usage(format!("malformed polynomial integrand `{s}`"));
        let terms = body
            .split(';')
            .map(|term| {
                let parts: Vec<&str> = term.split(',').map(str::trim).collect();
                if parts.len() != 4 {
                    return Err(bad());
                }
                let c: f64 = parts[0].parse().map_err(|_| bad())?;
                let mut e = [0u32; 3];
                for k in 0..3 {
                    e[k] = parts[k + 1].parse().map_err(|_| bad())?;
                }
                if !c.is_finite() {
                    return Err(bad());
                }
                Ok((c, e))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Integrand::Polynomial(terms))
    }
}

impl From<Integrand> for String {
    fn from(i: Integrand) -> String {
        i.to_string()
    }
}

impl TryFrom<String> for Integrand {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Axis-aligned integration domain; each extent must be a whole number of
/// cells at every resolution studied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn cube(lo: f64, hi: f64, ndim: usize) -> Self {
        Domain { lo: vec![lo; ndim], hi: vec![hi; ndim] }
    }

    pub fn ndim(&self) -> usize {
        self.lo.len()
    }

    pub fn grid(&self, h: f64) -> Result<GridSpec> {
        if self.lo.len() != self.hi.len() {
            return Err(Error::Grid("domain corners differ in dimension".into()));
        }
        let dims = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(lo, hi)| {
                let n = (hi - lo) / h;
                let rounded = n.round();
                if !(rounded >= 1.0) || (n - rounded).abs() > 1e-9 * rounded.max(1.0) {
                    return Err(Error::Grid(format!("extent [{lo}, {hi}] is not a whole number of cells of size {h}")));
                }
                Ok(rounded as usize)
            })
            .collect::<Result<Vec<_>>>()?;
        GridSpec::new(&self.lo, h, &dims)
    }
}

/// Excision radius, absolute or as a multiple of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Radius {
    Absolute(f64),
    Cells(f64),
}

impl Radius {
    pub fn at(self, h: f64) -> f64 {
        match self {
            Radius::Absolute(r) => r,
            Radius::Cells(c) => c * h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Excision {
    None,
    /// Every non-smooth vertex.
    Auto(Radius),
    Vertices(Vec<usize>, Radius),
}

/// Weight mode with a resolution-dependent default floor (`h/2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Radial,
    Ratio { rho_floor: Option<f64> },
}

impl ModeChoice {
    pub fn resolve(self, grid: &GridSpec) -> WeightMode {
        match self {
            ModeChoice::Radial => WeightMode::Radial,
            ModeChoice::Ratio { rho_floor } => {
                WeightMode::Ratio { rho_floor: rho_floor.unwrap_or_else(|| default_rho_floor(grid)) }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModeChoice::Radial => "radial",
            ModeChoice::Ratio { .. } => "ratio",
        }
    }
}

/// What a delta field is assembled from.
#[derive(Debug, Clone)]
pub enum FieldSource {
    Distance { graph: CurveGraph, mode: ModeChoice, excision: Excision },
    LevelSetCodim2 { graph: CurveGraph, phi: LevelSetInput },
    Codim1 { phi: LevelSetInput, convention: Codim1Convention },
}

impl FieldSource {
    pub fn formula_name(&self) -> &'static str {
        match self {
            FieldSource::Distance { .. } => "distance",
            FieldSource::LevelSetCodim2 { .. } => "levelset-codim2",
            FieldSource::Codim1 { .. } => "codim1",
        }
    }

    pub fn graph(&self) -> Option<&CurveGraph> {
        match self {
            FieldSource::Distance { graph, .. } | FieldSource::LevelSetCodim2 { graph, .. } => Some(graph),
            FieldSource::Codim1 { .. } => None,
        }
    }

    /// Builds the field on `grid` with kernel support `epsilon`.
    pub fn assemble(&self, grid: &GridSpec, family: KernelFamily, epsilon: f64) -> Result<SparseField> {
        let kernel = Kernel::new(family, epsilon)?;
        match self {
            FieldSource::Distance { graph, mode, excision } => {
                let index = build_spatial_index(graph);
                let field = delta_codim2_from_distance(graph, &index, grid, &kernel, mode.resolve(grid))?;
                let spec = match excision {
                    Excision::None => return Ok(field),
                    Excision::Auto(r) => ExcisionSpec::auto(graph, crate::curve::DEFAULT_ANGLE_TOL, r.at(grid.h()))?,
                    Excision::Vertices(v, r) => ExcisionSpec::new(graph, v, r.at(grid.h()))?,
                };
                Ok(apply_excision(field, &spec))
            }
            FieldSource::LevelSetCodim2 { graph, phi } => {
                let index = build_spatial_index(graph);
                delta_codim2_from_levelset(phi, graph, &index, grid, &kernel, LevelSetOptions::default())
            }
            FieldSource::Codim1 { phi, convention } => delta_codim1_from_levelset(phi, grid, &kernel, *convention),
        }
    }
}

/// Kernel support as a function of the grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsRule {
    /// `ε = c·h`.
    Coupling(f64),
    Fixed(f64),
}

impl EpsRule {
    pub fn at(self, h: f64) -> f64 {
        match self {
            EpsRule::Coupling(c) => c * h,
            EpsRule::Fixed(e) => e,
        }
    }
}

/// A refinement study: the field source, the domain, and the `ε(h)` rule.
#[derive(Debug, Clone)]
pub struct StudySetup {
    pub source: FieldSource,
    pub domain: Domain,
    pub integrand: Integrand,
    pub family: KernelFamily,
    pub eps: EpsRule,
    /// Reference value; when absent the line integral over the whole graph
    /// is used.
    pub exact: Option<f64>,
    /// Curve or level-set label recorded in the report.
    pub label: String,
}

impl StudySetup {
    pub fn reference(&self) -> Result<f64> {
        if let Some(e) = self.exact {
            return Ok(e);
        }
        match self.source.graph() {
            Some(g) => line_integral_oracle(g, |p| self.integrand.eval(p), ORACLE_TOL),
            None => Err(Error::Usage("codimension-1 studies need an exact reference value".into())),
        }
    }

    /// Integral at one resolution as `(ε, value)`.
    pub fn integrate_at(&self, h: f64) -> Result<(f64, f64)> {
        let grid = self.domain.grid(h)?;
        let eps = self.eps.at(h);
        let field = self.source.assemble(&grid, self.family, eps)?;
        Ok((eps, grid_integrate(&field, |p| self.integrand.eval(p))?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub eps: f64,
    pub value: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub kernel: String,
    pub mode: String,
    pub formula: String,
    pub curve: String,
    pub integrand: String,
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub meta: ReportMeta,
}

impl ConvergenceReport {
    pub fn new(rows: Vec<ConvergenceRow>, meta: ReportMeta) -> Result<Self> {
        if rows.windows(2).any(|w| !(w[1].h < w[0].h)) {
            return Err(Error::Usage("resolutions must be strictly decreasing".into()));
        }
        Ok(ConvergenceReport { rows, meta })
    }

    /// Mean of `log(e_i/e_{i+1}) / log(h_i/h_{i+1})` over successive rows.
    /// `None` with fewer than three rows or when an error is exactly zero.
    pub fn observed_order(&self) -> Option<f64> {
        if self.rows.len() < 3 || self.rows.iter().any(|r| r.abs_err == 0.0) {
            return None;
        }
        let orders: Vec<f64> = self
            .rows
            .windows(2)
            .map(|w| (w[0].abs_err / w[1].abs_err).ln() / (w[0].h / w[1].h).ln())
            .collect();
        Some(orders.iter().sum::<f64>() / orders.len() as f64)
    }

    /// CSV with header `h,eps,value,abs_err,rel_err`. Numbers use the
    /// shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,eps,value,abs_err,rel_err\n");
        for r in &self.rows {
            out.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", r.h, r.eps, r.value, r.abs_err, r.rel_err));
        }
        out
    }

    pub fn summary(&self) -> String {
        let m = &self.meta;
        let mut s = format!(
            "curve={} formula={} kernel={} mode={} integrand={} exact={}\n",
            m.curve, m.formula, m.kernel, m.mode, m.integrand, m.exact
        );
        for r in &self.rows {
            s.push_str(&format!(
                "  h={:<12} eps={:<12.6e} value={:<22} rel_err={:.3e}\n",
                format_h(r.h),
                r.eps,
                r.value,
                r.rel_err
            ));
        }
        match self.observed_order() {
            Some(p) => s.push_str(&format!("observed order: {p:.3}\n")),
            None => s.push_str("observed order: n/a\n"),
        }
        s
    }
}

fn format_h(h: f64) -> String {
    let inv = 1.0 / h;
    if (inv - inv.round()).abs() < 1e-9 && inv >= 1.0 {
        format!("1/{}", inv.round())
    } else {
        format!("{h}")
    }
}

/// Runs the study at each `h` (strictly decreasing), sequentially.
pub fn convergence_study(setup: &StudySetup, hs: &[f64]) -> Result<ConvergenceReport> {
    if hs.len() < 2 {
        return Err(Error::Usage("a convergence study needs at least two resolutions".into()));
    }
    if hs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Usage("resolutions must be strictly decreasing".into()));
    }
    let exact = setup.reference()?;
    let mut rows = Vec::with_capacity(hs.len());
    for &h in hs {
        let (eps, value) = setup.integrate_at(h)?;
        let abs_err = (value - exact).abs();
        let rel_err = if exact != 0.0 { abs_err / exact.abs() } else { abs_err };
        log::info!("h = {h}: value {value}, relative error {rel_err:.3e}");
        rows.push(ConvergenceRow { h, eps, value, abs_err, rel_err });
    }
    let mode = match &setup.source {
        FieldSource::Distance { mode, .. } => mode.name(),
        _ => "ratio",
    };
    ConvergenceReport::new(
        rows,
        ReportMeta {
            kernel: setup.family.to_string(),
            mode: mode.to_string(),
            formula: setup.source.formula_name().to_string(),
            curve: setup.label.clone(),
            integrand: setup.integrand.to_string(),
            exact,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::builtin;
    use crate::grid::ScalarField;

    #[test]
    fn zero_and_constant_fields() {
        let grid = GridSpec::cube(0.0, 1.0, 0.125, 3).unwrap();
        assert_eq!(grid_integrate(&ScalarField::zeros(grid), |_| 1.0).unwrap(), 0.0);
        let c = ScalarField::from_fn(grid, |_| 3.0);
        let v = grid_integrate(&c, |_| 1.0).unwrap();
        assert!((v - 3.0 * 512.0 * 0.125f64.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn non_finite_integrand_names_the_cell() {
        let grid = GridSpec::cube(0.0, 1.0, 0.25, 2).unwrap();
        let mut f = ScalarField::zeros(grid);
        f.values_mut()[5] = 1.0;
        let err = grid_integrate(&f, |_| f64::NAN).unwrap_err();
        assert!(matches!(err, Error::NonFinite { cell: 5, .. }));
        // NaN where the field vanishes is never evaluated
        let ok = grid_integrate(&f, |p| if p == &grid.cell_center(5) { 2.0 } else { f64::NAN });
        assert_eq!(ok.unwrap(), 2.0 * grid.cell_volume());
    }

    #[test]
    fn integrand_parsing() {
        assert_eq!("x2".parse::<Integrand>().unwrap(), Integrand::X2);
        let p: Integrand = "poly:2,1,0,0;-1,0,0,2".parse().unwrap();
        assert_eq!(p.eval(&Vec3::new(3.0, 0.0, 2.0)), 2.0);
        assert_eq!(p.to_string().parse::<Integrand>().unwrap(), p);
        assert!("poly:1,2".parse::<Integrand>().is_err());
        assert!("sin".parse::<Integrand>().is_err());
    }

    #[test]
    fn domain_grid_requires_whole_cells() {
        let d = Domain { lo: vec![-0.5, -0.5, 0.0], hi: vec![0.5, 0.5, 1.0] };
        assert_eq!(d.grid(1.0 / 64.0).unwrap().dims(), &[64, 64, 64]);
        assert!(d.grid(0.3).is_err());
    }

    #[test]
    fn order_needs_three_rows() {
        let row = |h: f64, e: f64| ConvergenceRow { h, eps: 4.0 * h, value: 1.0 + e, abs_err: e, rel_err: e };
        let meta = ReportMeta {
            kernel: "cosine".into(),
            mode: "radial".into(),
            formula: "distance".into(),
            curve: "t".into(),
            integrand: "one".into(),
            exact: 1.0,
        };
        let two = ConvergenceReport::new(vec![row(0.1, 0.4), row(0.05, 0.1)], meta.clone()).unwrap();
        assert_eq!(two.observed_order(), None);
        let three = ConvergenceReport::new(vec![row(0.1, 0.4), row(0.05, 0.1), row(0.025, 0.025)], meta.clone()).unwrap();
        assert!((three.observed_order().unwrap() - 2.0).abs() < 1e-12);
        assert!(three.to_csv().starts_with("h,eps,value,abs_err,rel_err\n"));
        assert_eq!(three.to_csv().lines().count(), 4);
        assert!(ConvergenceReport::new(vec![row(0.05, 0.1), row(0.1, 0.4)], meta).is_err());
    }

    #[test]
    fn study_is_repeatable() {
        let setup = StudySetup {
            source: FieldSource::Distance {
                graph: builtin("circle").unwrap(),
                mode: ModeChoice::Radial,
                excision: Excision::None,
            },
            domain: Domain::cube(-2.0, 2.0, 3),
            integrand: Integrand::One,
            family: KernelFamily::Cosine,
            eps: EpsRule::Coupling(4.0),
            exact: None,
            label: "circle".into(),
        };
        let hs = [1.0 / 8.0, 1.0 / 16.0];
        let a = convergence_study(&setup, &hs).unwrap();
        let b = convergence_study(&setup, &hs).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!((a.meta.exact - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(convergence_study(&setup, &[1.0 / 8.0]).is_err());
    }
}
