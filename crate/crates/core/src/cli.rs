//! Command-line configuration and the `linedelta` pipeline.
//!
//! Every flag may also be given in a TOML file passed with `--config`, using
//! the flag name as key (`kernel = "hat"`, `eps-coupling = 4`,
//! `h = "1/32,1/64"`). Flags on the command line win over the file. Unknown
//! keys are rejected.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::curve::{builtin, builtin_names, CurveFile, CurveGraph};
use crate::delta::{Codim1Convention, LevelSetInput};
use crate::distance::{build_spatial_index, closest_point_graph, distance_grid};
use crate::error::{Error, Result};
use crate::io::{slice_csv, write_field_dump, write_text_with_meta};
use crate::kernels::KernelFamily;
use crate::quadrature::{
    convergence_study, ConvergenceReport, ConvergenceRow, Domain, EpsRule, Excision, FieldSource, Integrand,
    ModeChoice, Radius, ReportMeta, StudySetup,
};

/// Smallest number of cells allowed along any axis.
pub const MIN_DIMS: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "linedelta", version, about = "Regularized line delta fields on Cartesian grids")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Sample the distance to the curve and its gradient.
    Distance(Flags),
    /// Assemble a delta field and dump it.
    Field(Flags),
    /// Print the grid integral of the delta field against an integrand.
    Integrate(Flags),
    /// Refinement study written as CSV.
    Converge(Flags),
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Flags {
    /// TOML file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Built-in curve name or path to a curve JSON file.
    #[arg(long)]
    curve: Option<String>,
    /// distance | levelset-codim2 | codim1
    #[arg(long)]
    formula: Option<String>,
    /// Level set: rho | cyl | ellip | circle | sphere
    #[arg(long)]
    phi: Option<String>,
    /// Multiplies the level set.
    #[arg(long)]
    phi_scale: Option<f64>,
    /// Codimension-1 convention: signed | nonnegative
    #[arg(long)]
    phi_convention: Option<String>,
    /// hat | cosine | quartic
    #[arg(long)]
    kernel: Option<String>,
    /// Fixed kernel support.
    #[arg(long)]
    eps: Option<f64>,
    /// Kernel support as a multiple of h (default 4).
    #[arg(long)]
    eps_coupling: Option<f64>,
    /// radial | ratio
    #[arg(long)]
    mode: Option<String>,
    /// Distance floor for ratio mode (default h/2).
    #[arg(long)]
    rho_floor: Option<f64>,
    /// auto | none | comma-separated vertex indices
    #[arg(long)]
    excise: Option<String>,
    /// Excision radius, absolute or with an `h` suffix (default 4h).
    #[arg(long)]
    excise_radius: Option<String>,
    /// Grid spacing; comma-separated list for `converge`. Accepts `1/64`.
    #[arg(long)]
    h: Option<String>,
    /// `lo,hi` for a cube or all lower then all upper corner coordinates.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// 2 or 3
    #[arg(long)]
    dim: Option<usize>,
    /// one | x2 | z | poly:c,a,b,d;...
    #[arg(long)]
    integrand: Option<String>,
    /// Reference value overriding the built-in oracle.
    #[arg(long, allow_hyphen_values = true)]
    exact: Option<f64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Output path stem for field dumps.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV report path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write the z-layer with this index as CSV.
    #[arg(long)]
    slice: Option<usize>,
}

macro_rules! merge_flags {
    ($cli:expr, $file:expr; $($f:ident),*) => {
        Flags { config: $cli.config.take(), $($f: $cli.$f.take().or($file.$f.take())),* }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Distance,
    Field,
    Integrate,
    Converge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveRef {
    Builtin(String),
    File(PathBuf),
}

impl CurveRef {
    pub fn load(&self) -> Result<CurveGraph> {
        match self {
            CurveRef::Builtin(name) => builtin(name),
            CurveRef::File(path) => CurveFile::load(path)?.to_graph(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CurveRef::Builtin(name) => name.clone(),
            CurveRef::File(path) => path.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    Distance,
    LevelsetCodim2,
    Codim1,
}

/// Registered level-set functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiChoice {
    /// Distance to the curve.
    Rho,
    /// `x² + y²`.
    Cyl,
    /// `x² + 4y²`.
    Ellip,
    /// `√(x² + y²) − 1`.
    Circle,
    /// `|x| − 1`.
    Sphere,
}

impl PhiChoice {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "rho" => Ok(PhiChoice::Rho),
            "cyl" => Ok(PhiChoice::Cyl),
            "ellip" => Ok(PhiChoice::Ellip),
            "circle" => Ok(PhiChoice::Circle),
            "sphere" => Ok(PhiChoice::Sphere),
            _ => Err(Error::Usage(format!("unknown level set `{s}` (rho|cyl|ellip|circle|sphere)"))),
        }
    }

    fn build(self, scale: f64, graph: Option<&CurveGraph>) -> Result<LevelSetInput> {
        Ok(match self {
            PhiChoice::Rho => {
                let graph = graph.ok_or_else(|| Error::Usage("--phi rho needs --curve".into()))?.clone();
                let index = build_spatial_index(&graph);
                LevelSetInput::analytic(move |p| scale * closest_point_graph(p, &graph, &index).rho)
            }
            PhiChoice::Cyl => LevelSetInput::analytic(move |p| scale * (p.x * p.x + p.y * p.y)),
            PhiChoice::Ellip => LevelSetInput::analytic(move |p| scale * (p.x * p.x + 4.0 * p.y * p.y)),
            PhiChoice::Circle => LevelSetInput::analytic(move |p| scale * (p.x.hypot(p.y) - 1.0)),
            PhiChoice::Sphere => LevelSetInput::analytic(move |p| scale * (p.norm() - 1.0)),
        })
    }

    /// Closed-form interface integral of a registered integrand, if known.
    fn exact(self, integrand: &Integrand) -> Option<f64> {
        match (self, integrand) {
            (PhiChoice::Circle, Integrand::One) => Some(2.0 * PI),
            (PhiChoice::Circle, Integrand::X2) => Some(PI),
            (PhiChoice::Sphere, Integrand::One) => Some(4.0 * PI),
            (PhiChoice::Sphere, Integrand::X2) => Some(4.0 * PI / 3.0),
            (PhiChoice::Circle | PhiChoice::Sphere, Integrand::Z) => Some(0.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExciseChoice {
    None,
    Auto,
    Vertices(Vec<usize>),
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub curve: Option<CurveRef>,
    pub formula: Formula,
    pub phi: Option<PhiChoice>,
    pub phi_scale: f64,
    pub phi_convention: Codim1Convention,
    pub kernel: KernelFamily,
    pub eps: EpsRule,
    pub mode: ModeChoice,
    pub excise: ExciseChoice,
    pub excise_radius: Radius,
    /// Spacings as given, e.g. `1/64`.
    pub h_text: Vec<String>,
    pub h: Vec<f64>,
    pub domain: Domain,
    pub integrand: Integrand,
    pub exact: Option<f64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub slice: Option<usize>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

/// Parses `a/b` or a decimal into a positive finite spacing.
pub fn parse_spacing(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| usage(format!("malformed spacing `{s}`")))?;
            let b: f64 = b.trim().parse().map_err(|_| usage(format!("malformed spacing `{s}`")))?;
            a / b
        }
        None => s.parse().map_err(|_| usage(format!("malformed spacing `{s}`")))?,
    };
    if !(value > 0.0) || !value.is_finite() {
        return Err(usage(format!("h must be positive, got `{s}`")));
    }
    Ok(value)
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("malformed {what} value `{t}`"))))
        .collect()
}

fn parse_radius(s: &str) -> Result<Radius> {
    let s = s.trim();
    let (num, cells) = match s.strip_suffix('h') {
        Some(n) => (n, true),
        None => (s, false),
    };
    let v: f64 = num.parse().map_err(|_| usage(format!("malformed excision radius `{s}`")))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(usage(format!("excision radius must be positive, got `{s}`")));
    }
    Ok(if cells { Radius::Cells(v) } else { Radius::Absolute(v) })
}

fn positive(v: f64, what: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("{what} must be positive, got {v}")))
    }
}

/// Parses `argv` (including the program name) and any `--config` file into a
/// validated [`RunConfig`].
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Error::Help(e.to_string()),
            _ => Error::Usage(e.to_string()),
        }
    })?;
    let (command, mut flags) = match cli.command {
        Sub::Distance(f) => (Command::Distance, f),
        Sub::Field(f) => (Command::Field, f),
        Sub::Integrate(f) => (Command::Integrate, f),
        Sub::Converge(f) => (Command::Converge, f),
    };
    if let Some(path) = flags.config.clone() {
        let text = fs::read_to_string(&path).map_err(|e| usage(format!("config file {}: {e}", path.display())))?;
        let mut file: Flags =
            toml::from_str(&text).map_err(|e| usage(format!("config file {}: {e}", path.display())))?;
        flags = merge_flags!(flags, file; curve, formula, phi, phi_scale, phi_convention, kernel, eps,
            eps_coupling, mode, rho_floor, excise, excise_radius, h, domain, dim, integrand, exact, threads,
            out, csv, slice);
    }
    validate(command, flags)
}

fn validate(command: Command, f: Flags) -> Result<RunConfig> {
    let formula = match f.formula.as_deref().unwrap_or("distance") {
        "distance" => Formula::Distance,
        "levelset-codim2" => Formula::LevelsetCodim2,
        "codim1" => Formula::Codim1,
        other => return Err(usage(format!("unknown formula `{other}` (distance|levelset-codim2|codim1)"))),
    };
    let dim = f.dim.unwrap_or(3);
    if dim != 2 && dim != 3 {
        return Err(usage(format!("--dim must be 2 or 3, got {dim}")));
    }
    let needs_curve = command == Command::Distance || formula != Formula::Codim1;
    if needs_curve && dim != 3 {
        return Err(usage("curve-based fields need --dim 3"));
    }

    let curve = match f.curve {
        Some(c) if builtin_names().any(|n| n == c) => Some(CurveRef::Builtin(c)),
        Some(c) => {
            let path = PathBuf::from(&c);
            if !path.is_file() {
                return Err(usage(format!("curve file not found: {c}")));
            }
            Some(CurveRef::File(path))
        }
        None if needs_curve => return Err(usage("--curve is required")),
        None => None,
    };

    let kernel: KernelFamily = f.kernel.as_deref().unwrap_or("cosine").parse()?;
    let eps = match (f.eps, f.eps_coupling) {
        (Some(_), Some(_)) => return Err(usage("--eps and --eps-coupling are mutually exclusive")),
        (Some(e), None) => EpsRule::Fixed(positive(e, "--eps")?),
        (None, c) => EpsRule::Coupling(positive(c.unwrap_or(4.0), "--eps-coupling")?),
    };
    let rho_floor = f.rho_floor.map(|r| positive(r, "--rho-floor")).transpose()?;
    let mode = match f.mode.as_deref().unwrap_or("radial") {
        "radial" => ModeChoice::Radial,
        "ratio" => ModeChoice::Ratio { rho_floor },
        other => return Err(usage(format!("unknown mode `{other}` (radial|ratio)"))),
    };
    if rho_floor.is_some() && mode == ModeChoice::Radial {
        return Err(usage("--rho-floor only applies to --mode ratio"));
    }

    let excise = match f.excise.as_deref().unwrap_or("none") {
        "none" => ExciseChoice::None,
        "auto" => ExciseChoice::Auto,
        list => ExciseChoice::Vertices(
            list.split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| usage(format!("malformed vertex index `{t}`"))))
                .collect::<Result<_>>()?,
        ),
    };
    let excise_radius = parse_radius(f.excise_radius.as_deref().unwrap_or("4h"))?;

    let default_h = if command == Command::Converge { "1/32,1/64,1/128" } else { "1/64" };
    let h_text: Vec<String> = f.h.as_deref().unwrap_or(default_h).split(',').map(|s| s.trim().to_string()).collect();
    let h = h_text.iter().map(|s| parse_spacing(s)).collect::<Result<Vec<_>>>()?;
    match command {
        Command::Converge => {
            if h.len() < 2 {
                return Err(usage("converge needs at least two values of --h"));
            }
            if h.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(usage("--h values must be strictly decreasing"));
            }
        }
        _ if h.len() != 1 => return Err(usage("--h takes a single value for this command")),
        _ => {}
    }

    let domain = match f.domain.as_deref() {
        None => Domain::cube(-2.0, 2.0, dim),
        Some(s) => {
            let v = parse_list(s, "domain")?;
            if v.len() == 2 {
                Domain::cube(v[0], v[1], dim)
            } else if v.len() == 2 * dim {
                Domain { lo: v[..dim].to_vec(), hi: v[dim..].to_vec() }
            } else {
                return Err(usage(format!("--domain needs 2 or {} numbers", 2 * dim)));
            }
        }
    };
    for &hv in &h {
        let grid = domain.grid(hv).map_err(|e| usage(e.to_string()))?;
        if grid.dims().iter().any(|&d| d < MIN_DIMS) {
            return Err(usage(format!("grid at h = {hv} has fewer than {MIN_DIMS} cells along an axis")));
        }
    }

    let phi = match (formula, f.phi.as_deref()) {
        (Formula::Distance, Some(_)) => return Err(usage("--phi needs a level-set formula")),
        (Formula::Distance, None) => None,
        (_, Some(p)) => Some(PhiChoice::parse(p)?),
        (Formula::LevelsetCodim2, None) => Some(PhiChoice::Rho),
        (Formula::Codim1, None) => Some(if dim == 2 { PhiChoice::Circle } else { PhiChoice::Sphere }),
    };
    if formula == Formula::Codim1 && phi == Some(PhiChoice::Rho) && curve.is_none() {
        return Err(usage("--phi rho needs --curve"));
    }
    let phi_scale = positive(f.phi_scale.unwrap_or(1.0), "--phi-scale")?;
    let phi_convention = match f.phi_convention.as_deref().unwrap_or("signed") {
        "signed" => Codim1Convention::Signed,
        "nonnegative" => Codim1Convention::NonNegative,
        other => return Err(usage(format!("unknown convention `{other}` (signed|nonnegative)"))),
    };
    let integrand: Integrand = f.integrand.as_deref().unwrap_or("one").parse()?;
    if let Some(t) = f.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
    }
    if let Some(e) = f.exact {
        if !e.is_finite() {
            return Err(usage("--exact must be finite"));
        }
    }

    Ok(RunConfig {
        command,
        curve,
        formula,
        phi,
        phi_scale,
        phi_convention,
        kernel,
        eps,
        mode,
        excise,
        excise_radius,
        h_text,
        h,
        domain,
        integrand,
        exact: f.exact,
        threads: f.threads,
        out: f.out,
        csv: f.csv,
        slice: f.slice,
    })
}

impl RunConfig {
    fn field_source(&self, graph: Option<&CurveGraph>) -> Result<FieldSource> {
        let need_graph = || graph.cloned().ok_or_else(|| usage("--curve is required"));
        Ok(match self.formula {
            Formula::Distance => FieldSource::Distance {
                graph: need_graph()?,
                mode: self.mode,
                excision: match &self.excise {
                    ExciseChoice::None => Excision::None,
                    ExciseChoice::Auto => Excision::Auto(self.excise_radius),
                    ExciseChoice::Vertices(v) => Excision::Vertices(v.clone(), self.excise_radius),
                },
            },
            Formula::LevelsetCodim2 => FieldSource::LevelSetCodim2 {
                graph: need_graph()?,
                phi: self.phi.unwrap_or(PhiChoice::Rho).build(self.phi_scale, graph)?,
            },
            Formula::Codim1 => FieldSource::Codim1 {
                phi: self.phi.unwrap_or(PhiChoice::Circle).build(self.phi_scale, graph)?,
                convention: self.phi_convention,
            },
        })
    }

    fn setup(&self, graph: Option<&CurveGraph>) -> Result<StudySetup> {
        let exact = self.exact.or_else(|| match self.formula {
            Formula::Codim1 => self.phi.and_then(|p| p.exact(&self.integrand)),
            _ => None,
        });
        Ok(StudySetup {
            source: self.field_source(graph)?,
            domain: self.domain.clone(),
            integrand: self.integrand.clone(),
            family: self.kernel,
            eps: self.eps,
            exact,
            label: match (&self.curve, self.phi) {
                (Some(c), _) => c.label(),
                (None, Some(p)) => serde_json::to_value(p)?.as_str().unwrap_or("phi").to_string(),
                (None, None) => "none".into(),
            },
        })
    }

    fn config_json(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }
}

fn stem_path(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Executes a validated configuration on a pool of the requested size.
pub fn run(config: &RunConfig) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    pool.install(|| run_inner(config))
}

fn run_inner(config: &RunConfig) -> Result<()> {
    let graph = config.curve.as_ref().map(CurveRef::load).transpose()?;
    let meta = config.config_json()?;
    match config.command {
        Command::Distance => {
            let graph = graph.as_ref().expect("validated");
            let grid = config.domain.grid(config.h[0])?;
            let d = distance_grid(graph, &build_spatial_index(graph), &grid);
            let max = d.rho.values().iter().cloned().fold(0.0, f64::max);
            println!("cells {} max_rho {max}", grid.len());
            if let Some(stem) = &config.out {
                let fields = [("rho", &d.rho), ("grad_x", &d.grad[0]), ("grad_y", &d.grad[1]), ("grad_z", &d.grad[2])];
                for (name, field) in fields {
                    write_field_dump(&stem_path(stem, &format!(".{name}.f64")), name, field, &meta)?;
                    if let Some(k) = config.slice {
                        write_text_with_meta(
                            &stem_path(stem, &format!(".{name}.slice.csv")),
                            &slice_csv(field, k)?,
                            &meta,
                        )?;
                    }
                }
            }
        }
        Command::Field => {
            let setup = config.setup(graph.as_ref())?;
            let h = config.h[0];
            let grid = config.domain.grid(h)?;
            let field = setup.source.assemble(&grid, config.kernel, config.eps.at(h))?;
            println!("cells {} nonzero {}", grid.len(), field.nnz());
            if let Some(stem) = &config.out {
                let dense = field.to_dense();
                write_field_dump(&stem_path(stem, ".delta.f64"), "delta", &dense, &meta)?;
                if let Some(k) = config.slice {
                    write_text_with_meta(&stem_path(stem, ".delta.slice.csv"), &slice_csv(&dense, k)?, &meta)?;
                }
            }
        }
        Command::Integrate => {
            let setup = config.setup(graph.as_ref())?;
            let h = config.h[0];
            let (eps, value) = setup.integrate_at(h)?;
            println!("{value}");
            let exact = setup.reference().ok();
            if let Some(exact) = exact {
                let abs_err = (value - exact).abs();
                let rel_err = if exact != 0.0 { abs_err / exact.abs() } else { abs_err };
                eprintln!("exact {exact} abs_err {abs_err:e} rel_err {rel_err:e}");
                if let Some(path) = &config.csv {
                    let report = ConvergenceReport::new(
                        vec![ConvergenceRow { h, eps, value, abs_err, rel_err }],
                        report_meta(config, &setup, exact),
                    )?;
                    write_text_with_meta(path, &report.to_csv(), &meta)?;
                }
            } else if config.csv.is_some() {
                return Err(usage("--csv needs a reference value; pass --exact"));
            }
        }
        Command::Converge => {
            let setup = config.setup(graph.as_ref())?;
            let report = convergence_study(&setup, &config.h)?;
            match &config.csv {
                Some(path) => {
                    write_text_with_meta(path, &report.to_csv(), &meta)?;
                    print!("{}", report.summary());
                }
                None => {
                    print!("{}", report.to_csv());
                    eprint!("{}", report.summary());
                }
            }
        }
    }
    Ok(())
}

fn report_meta(config: &RunConfig, setup: &StudySetup, exact: f64) -> ReportMeta {
    ReportMeta {
        kernel: config.kernel.to_string(),
        mode: config.mode.name().to_string(),
        formula: setup.source.formula_name().to_string(),
        curve: setup.label.clone(),
        integrand: config.integrand.to_string(),
        exact,
    }
}

/// Parses, runs, and maps the outcome to an exit status (0, 1 or 2).
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_config(argv).and_then(|c| run(&c));
    match result {
        Ok(()) => 0,
        Err(Error::Help(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("linedelta: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        parse_config(std::iter::once("linedelta").chain(args.iter().copied()))
    }

    #[test]
    fn happy_path_converge() {
        let c = parse(&[
            "converge", "--curve", "circle", "--kernel", "cosine", "--mode", "radial", "--eps-coupling", "4", "--h",
            "1/32,1/64,1/128",
        ])
        .unwrap();
        assert_eq!(c.h, vec![1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0]);
        assert_eq!(c.eps, EpsRule::Coupling(4.0));
        assert_eq!(c.curve, Some(CurveRef::Builtin("circle".into())));
    }

    #[test]
    fn rejects_bad_values() {
        for args in [
            &["integrate", "--curve", "circle", "--h", "0"][..],
            &["integrate", "--curve", "circle", "--h", "abc"],
            &["integrate", "--curve", "circle", "--eps", "x"],
            &["integrate", "--curve", "circle", "--bogus"],
            &["integrate", "--curve", "no/such/file.json"],
            &["integrate", "--curve", "circle", "--h", "2"],
            &["converge", "--curve", "circle", "--h", "1/64,1/32"],
            &["integrate", "--curve", "circle", "--eps", "0.1", "--eps-coupling", "3"],
        ] {
            let err = parse(args).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{args:?}: {err}");
        }
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "kernel = \"hat\"\ncurve = \"circle\"\nh = \"1/16\"\n").unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["integrate", "--config", p, "--kernel", "quartic"]).unwrap();
        assert_eq!(c.kernel, KernelFamily::Quartic);
        assert_eq!(c.h, vec![1.0 / 16.0]);
        let c = parse(&["integrate", "--config", p]).unwrap();
        assert_eq!(c.kernel, KernelFamily::Hat);
        fs::write(&path, "kernal = \"hat\"\n").unwrap();
        assert_eq!(parse(&["integrate", "--config", p]).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn excise_radius_forms() {
        assert_eq!(parse_radius("4h").unwrap(), Radius::Cells(4.0));
        assert_eq!(parse_radius("0.25").unwrap(), Radius::Absolute(0.25));
        assert!(parse_radius("-1").is_err());
        assert_eq!(parse_spacing("1/64").unwrap(), 1.0 / 64.0);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(parse(&["--help"]).unwrap_err().exit_code(), 0);
    }
}
