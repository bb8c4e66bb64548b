//! Run configuration, read from a TOML file with one section per concern.
//!
//! ```toml
//! seed = 0
//!
//! [domain]
//! shape = "rectangle"
//! lo = [0.0, 0.0]
//! hi = [1.0, 1.0]
//! h = 0.0625
//!
//! [metric]
//! kind = "euclidean"
//!
//! [problem]
//! variant = "dirichlet"
//! s = 0.5
//! p_list = [4.0, 8.0, 16.0]
//! ```

use std::path::{Path, PathBuf};

use fracp::discretization::FormParams;
use fracp::eigen::{EigenProblemSpec, EigenVariant, SolverParams};
use fracp::geometry::{DomainGrid, DomainShape, MetricSpec, Point};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub shape: String,
    pub h: f64,
    /// Metric width of the exterior buffer; defaults to the domain diameter.
    pub buffer: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub lo: Option<Point>,
    pub hi: Option<Point>,
    pub center: Option<Point>,
    pub radius: Option<f64>,
    pub origin: Option<Point>,
    pub size: Option<f64>,
    pub notch: Option<f64>,
    pub vertices: Option<Vec<Point>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    #[serde(default = "euclidean_kind")]
    pub kind: String,
    /// Row-major weight matrix for `kind = "weighted"`.
    pub matrix: Option<Vec<f64>>,
    pub q: Option<f64>,
    pub scale: Option<f64>,
}

fn euclidean_kind() -> String {
    "euclidean".into()
}

impl Default for MetricSection {
    fn default() -> Self {
        MetricSection { kind: euclidean_kind(), matrix: None, q: None, scale: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub variant: String,
    pub s: f64,
    pub p_list: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub step0: Option<f64>,
    pub block: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSection {
    /// CSV files with columns `x,y,mass`, relative to the config file.
    pub source: PathBuf,
    pub target: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    seed: u64,
    out: Option<PathBuf>,
    domain: DomainSection,
    #[serde(default)]
    metric: MetricSection,
    problem: ProblemSection,
    #[serde(default)]
    solver: SolverSection,
    transport: Option<TransportSection>,
}

/// Validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub shape: DomainShape,
    pub h: f64,
    pub buffer: Option<f64>,
    pub metric: MetricSpec,
    pub variant: EigenVariant,
    pub s: f64,
    pub p_list: Vec<f64>,
    pub solver: SolverParams,
    pub transport: Option<TransportSection>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Directory that relative input paths are resolved against.
    pub base_dir: PathBuf,
}

fn missing(field: &str, shape: &str) -> CliError {
    CliError::Config(format!("missing field `domain.{field}` required by shape \"{shape}\""))
}

fn build_shape(d: &DomainSection) -> CliResult<DomainShape> {
    let sh = d.shape.as_str();
    let req = |v: Option<f64>, name: &str| v.ok_or_else(|| missing(name, sh));
    let req_pt = |v: Option<Point>, name: &str| v.ok_or_else(|| missing(name, sh));
    let shape = match sh {
        "interval" => DomainShape::Interval { a: req(d.a, "a")?, b: req(d.b, "b")? },
        "rectangle" => DomainShape::Rectangle { lo: req_pt(d.lo, "lo")?, hi: req_pt(d.hi, "hi")? },
        "disk" => DomainShape::Disk { center: req_pt(d.center, "center")?, radius: req(d.radius, "radius")? },
        "l_shape" => DomainShape::LShape {
            origin: d.origin.unwrap_or([0.0, 0.0]),
            size: req(d.size, "size")?,
            notch: req(d.notch, "notch")?,
        },
        "polygon" => DomainShape::Polygon { vertices: d.vertices.clone().ok_or_else(|| missing("vertices", sh))? },
        other => {
            return Err(CliError::Config(format!(
                "unknown domain.shape \"{other}\" (expected interval, rectangle, disk, l_shape or polygon)"
            )))
        }
    };
    shape.validate().map_err(|e| CliError::Config(format!("domain: {e}")))?;
    Ok(shape)
}

fn build_metric(m: &MetricSection, dim: usize) -> CliResult<MetricSpec> {
    let bad = |e: fracp::Error| CliError::Config(format!("metric: {e}"));
    let base = match m.kind.as_str() {
        "euclidean" => MetricSpec::euclidean(dim),
        "weighted" => {
            let matrix = m.matrix.clone().ok_or_else(|| {
                CliError::Config("missing field `metric.matrix` required by kind \"weighted\"".into())
            })?;
            MetricSpec::weighted_euclidean(dim, matrix).map_err(bad)?
        }
        "q_norm" => {
            let q = m.q.ok_or_else(|| CliError::Config("missing field `metric.q` required by kind \"q_norm\"".into()))?;
            MetricSpec::q_norm(dim, q).map_err(bad)?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown metric.kind \"{other}\" (expected euclidean, weighted or q_norm)"
            )))
        }
    };
    match m.scale {
        Some(c) => base.scaled(c).map_err(bad),
        None => Ok(base),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> CliResult<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        let shape = build_shape(&raw.domain)?;
        let h = raw.domain.h;
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::Config(format!("domain.h must be positive, got {h}")));
        }
        if let Some(b) = raw.domain.buffer {
            if !(b > 0.0 && b.is_finite()) {
                return Err(CliError::Config(format!("domain.buffer must be positive, got {b}")));
            }
        }
        let metric = build_metric(&raw.metric, shape.dim())?;

        let pr = &raw.problem;
        let variant = EigenVariant::parse(&pr.variant).ok_or_else(|| {
            CliError::Config(format!(
                "unknown problem.variant \"{}\" (expected dirichlet, neumann_seminorm or neumann_nonlocal)",
                pr.variant
            ))
        })?;
        if !(pr.s > 0.0 && pr.s < 1.0) {
            return Err(CliError::Config(format!("problem.s must lie in (0, 1), got {}", pr.s)));
        }
        if pr.p_list.is_empty() {
            return Err(CliError::Config("problem.p_list is empty".into()));
        }
        if let Some(p) = pr.p_list.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
            return Err(CliError::Config(format!("problem.p_list entries must exceed 1, got {p}")));
        }
        if pr.p_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("problem.p_list must be strictly ascending".into()));
        }
        if variant == EigenVariant::Dirichlet && !metric.is_euclidean() {
            return Err(CliError::Config("the dirichlet variant requires the euclidean metric".into()));
        }

        let mut solver = SolverParams { seed: raw.seed, ..SolverParams::default() };
        let sv = &raw.solver;
        if let Some(n) = sv.max_iters {
            if n == 0 {
                return Err(CliError::Config("solver.max_iters must be at least 1".into()));
            }
            solver.max_iters = n;
        }
        if let Some(t) = sv.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("solver.tol must be positive, got {t}")));
            }
            solver.tol = t;
        }
        if let Some(a) = sv.step0 {
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::Config(format!("solver.step0 must be positive, got {a}")));
            }
            solver.step0 = a;
        }
        if let Some(b) = sv.block {
            if b == 0 {
                return Err(CliError::Config("solver.block must be at least 1".into()));
            }
            solver.block = b;
        }

        Ok(RunConfig {
            shape,
            h,
            buffer: raw.domain.buffer,
            metric,
            variant,
            s: pr.s,
            p_list: pr.p_list.clone(),
            solver,
            transport: raw.transport,
            out: raw.out,
            seed: raw.seed,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.solver.seed = seed;
    }

    pub fn grid(&self) -> CliResult<DomainGrid> {
        Ok(DomainGrid::new(self.shape.clone(), self.h, &self.metric, self.buffer)?)
    }

    pub fn eigen_spec<'g>(&self, grid: &'g DomainGrid) -> CliResult<EigenProblemSpec<'g>> {
        let form = FormParams::new(self.s, self.p_list[0], self.metric.clone())?;
        let mut spec = EigenProblemSpec::new(self.variant, form, grid);
        spec.solver = self.solver.clone();
        Ok(spec)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
