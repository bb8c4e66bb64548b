use std::fs;
use std::path::{Path, PathBuf};

use fracp::asymptotics::{limit_target, run_limit_experiment};
use fracp::eigen::p_sweep;
use fracp::geometry::{diameter, inradius, DomainShape, MetricSpec};
use fracp::transport::solve_dual;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::*;

/// Largest tolerated `|target * transport_value - k|` in a limits run.
pub const CONSISTENCY_TOL: f64 = 1e-9;
/// Largest tolerated duality gap, relative to `1 + primal`.
pub const GAP_TOL: f64 = 1e-7;

fn shape_name(s: &DomainShape) -> &'static str {
    match s {
        DomainShape::Interval { .. } => "interval",
        DomainShape::Rectangle { .. } => "rectangle",
        DomainShape::Disk { .. } => "disk",
        DomainShape::LShape { .. } => "l_shape",
        DomainShape::Polygon { .. } => "polygon",
    }
}

fn prepare(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

/// Writes `geometry.json`.
pub fn cmd_geometry(cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    prepare(out)?;
    let g = cfg.grid()?;
    let r = inradius(&g)?;
    let d = diameter(&g, &cfg.metric)?;
    let report = GeometryReport {
        shape: shape_name(&cfg.shape).into(),
        h: g.h(),
        n_nodes: g.len(),
        n_interior: g.n_interior(),
        n_closure: g.n_closure(),
        inradius: r.value,
        incenter: r.incenter,
        inradius_exact: r.exact,
        diameter: d.value,
        diameter_pair: [d.pair.0, d.pair.1],
    };
    let path = out.join("geometry.json");
    write_json(&path, &report)?;
    Ok(vec![path])
}

/// Writes `eig_<variant>.csv`. Rows that did not converge are data, not errors.
pub fn cmd_eig(cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    prepare(out)?;
    let g = cfg.grid()?;
    let spec = cfg.eigen_spec(&g)?;
    let target = limit_target(&spec)?;
    let results = p_sweep(&spec, &cfg.p_list)?;
    let rows: Vec<EigRow> = results
        .iter()
        .zip(&cfg.p_list)
        .map(|(r, &p)| EigRow {
            p,
            lambda: r.lambda,
            lambda_root: r.lambda_root,
            target,
            rel_err: (r.lambda_root - target).abs() / target,
            iterations: r.iterations,
            converged: r.converged,
            holder: None,
        })
        .collect();
    let path = out.join(format!("eig_{}.csv", cfg.variant.name()));
    write_eig_csv(&path, &rows)?;
    Ok(vec![path])
}

/// Writes `plan.csv`, `potential.csv` and `duality.json` for the measures
/// named in the `[transport]` section. Fails with exit code 3 after writing
/// if the duality gap exceeds its tolerance.
pub fn cmd_transport(cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let t = cfg
        .transport
        .as_ref()
        .ok_or_else(|| CliError::Config("missing section `[transport]` with fields `source` and `target`".into()))?;
    let mu = read_measure_csv(&cfg.resolve(&t.source))?;
    let nu = read_measure_csv(&cfg.resolve(&t.target))?;
    let metric = if cfg.metric.dim() == 2 { cfg.metric.clone() } else { MetricSpec::euclidean(2) };
    let dual = solve_dual(&mu, &nu, cfg.s, &metric)?;
    prepare(out)?;

    let plan: Vec<PlanEntry> = dual.plan.entries().into_iter().map(|(i, j, mass)| PlanEntry { i, j, mass }).collect();
    let potential: Vec<PotentialRow> = dual
        .potential
        .points
        .iter()
        .zip(&dual.potential.values)
        .map(|(x, v)| PotentialRow { point: *x, value: *v })
        .collect();
    let primal = dual.plan.value;
    let report = DualityReport {
        primal,
        dual: dual.value,
        gap: (primal - dual.value).abs(),
        marginal_residual: dual.plan.marginal_residual(&mu, &nu),
        holder_violation: dual.potential.feasibility_violation(),
    };
    let paths = [out.join("plan.csv"), out.join("potential.csv"), out.join("duality.json")];
    write_plan_csv(&paths[0], &plan)?;
    write_potential_csv(&paths[1], &potential)?;
    write_json(&paths[2], &report)?;
    if report.gap > GAP_TOL * (1.0 + primal) {
        return Err(CliError::Invariant(format!("duality gap {:e} exceeds tolerance", report.gap)));
    }
    Ok(paths.to_vec())
}

/// Writes `limits_<variant>.csv`, `plot_data.csv` and `limits_meta.json`.
/// Fails with exit code 3 after writing if the eigenvalue target and the
/// transport extreme disagree.
pub fn cmd_limits(cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    prepare(out)?;
    let g = cfg.grid()?;
    let spec = cfg.eigen_spec(&g)?;
    let rep = run_limit_experiment(&spec, &cfg.p_list)?;
    let rows: Vec<EigRow> = rep
        .rows
        .iter()
        .map(|r| EigRow {
            p: r.p,
            lambda: r.lambda,
            lambda_root: r.lambda_root,
            target: r.target,
            rel_err: r.rel_err,
            iterations: r.iterations,
            converged: r.converged,
            holder: Some(r.holder),
        })
        .collect();
    let plot: Vec<PlotRow> =
        rep.rows.iter().map(|r| PlotRow { p: r.p, lambda_root: r.lambda_root, target: r.target }).collect();
    let residual = rep.consistency_residual();
    let meta = LimitsMeta {
        variant: cfg.variant.name().into(),
        s: rep.meta.s,
        h: rep.meta.h,
        geometric: rep.meta.geometric,
        transport_value: rep.meta.transport_value,
        target: rep.rows[0].target,
        consistency_residual: residual,
        trend_holds: rep.trend_holds(8.0),
        all_converged: rep.rows.iter().all(|r| r.converged),
    };
    let paths = [
        out.join(format!("limits_{}.csv", cfg.variant.name())),
        out.join("plot_data.csv"),
        out.join("limits_meta.json"),
    ];
    write_eig_csv(&paths[0], &rows)?;
    write_plot_csv(&paths[1], &plot)?;
    write_json(&paths[2], &meta)?;
    if !(residual <= CONSISTENCY_TOL) {
        return Err(CliError::Invariant(format!("limit target and transport value disagree by {residual:e}")));
    }
    Ok(paths.to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Geometry,
    Eig,
    Transport,
    Limits,
}

pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    match cmd {
        Command::Geometry => cmd_geometry(cfg, out),
        Command::Eig => cmd_eig(cfg, out),
        Command::Transport => cmd_transport(cfg, out),
        Command::Limits => cmd_limits(cfg, out),
    }
}

/// Default output directory when neither `--out` nor `out` is given.
pub fn default_out(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}
