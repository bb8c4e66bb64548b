//! Large-`p` limit experiments and the auxiliary identities they rely on.
//!
//! Limits compared against:
//!
//! * Dirichlet: `λ^{1/p} → 1/R^s`, `R` the inradius;
//! * both Neumann variants: `λ^{1/p} → 2/diam_d^s`.
//!
//! The transport side gives the same constants: `R^s` is the largest cost of
//! sending a probability measure to the boundary, `diam_d^s` the largest
//! cost between two probability measures on the closure.

use crate::discretization::{holder_seminorm, GridFunction, HolderRegion};
use crate::eigen::{
    minimize_rayleigh, p_sweep, rayleigh, zero_pmean_shift, EigenProblemSpec, EigenResult, EigenVariant, Quotient,
};
use crate::error::{precondition, Result};
use crate::geometry::{diameter, inradius, DomainGrid, MetricSpec};
use crate::kernel::Power;
use crate::transport::{dirichlet_sup, neumann_max};

/// Two-point profile `u(x) = -1 + 2 d(x, y0)^s / diam_d^s`, where `(x0, y0)`
/// is the diameter pair; `u(y0) = -1` and `u(x0) = 1`.
pub fn trial_function(grid: &DomainGrid, m: &MetricSpec, s: f64) -> Result<GridFunction> {
    let d = diameter(grid, m)?;
    let y0 = d.pair.1;
    let scale = 2.0 / d.value.powf(s);
    Ok(GridFunction::from_fn(grid, |i| -1.0 + scale * m.eval(&grid.node(i), &y0).powf(s)))
}

/// Quotient of the trial function after the zero-p-mean shift (applied on
/// every node). Only meaningful for the Neumann variants.
pub fn trial_quotient(spec: &EigenProblemSpec) -> Result<Quotient> {
    if !spec.variant.is_neumann() {
        return Err(precondition("the trial function is not admissible for the Dirichlet quotient"));
    }
    let u = trial_function(spec.grid, &spec.form.metric, spec.form.s)?;
    let c = zero_pmean_shift(spec.grid, &u, spec.form.p)?;
    rayleigh(spec, &u.shifted(-c))
}

/// Closed-form limit of `λ^{1/p}` on this grid.
pub fn limit_target(spec: &EigenProblemSpec) -> Result<f64> {
    let s = spec.form.s;
    Ok(match spec.variant {
        EigenVariant::Dirichlet => 1.0 / inradius(spec.grid)?.value.powf(s),
        _ => 2.0 / diameter(spec.grid, &spec.form.metric)?.value.powf(s),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub lambda: f64,
    pub lambda_root: f64,
    pub target: f64,
    pub rel_err: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Hölder constant of the eigenfunction (see [`holder_profile`]).
    pub holder: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepMeta {
    pub variant: EigenVariant,
    pub s: f64,
    pub h: f64,
    pub metric: MetricSpec,
    /// Inradius (Dirichlet) or metric diameter (Neumann variants).
    pub geometric: f64,
    /// `dirichlet_sup` or `neumann_max` value on the same grid.
    pub transport_value: f64,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub meta: SweepMeta,
    pub results: Vec<EigenResult>,
}

impl SweepReport {
    /// `target * transport_value` should be 1 (Dirichlet) or 2 (Neumann).
    pub fn consistency_residual(&self) -> f64 {
        let want = if self.meta.variant == EigenVariant::Dirichlet { 1.0 } else { 2.0 };
        let target = self.rows.first().map_or(f64::NAN, |r| r.target);
        (target * self.meta.transport_value - want).abs()
    }

    /// Whether `rel_err` is non-increasing over the rows with `p >= p_min`.
    /// `None` for sweeps with fewer than three rows.
    pub fn trend_holds(&self, p_min: f64) -> Option<bool> {
        if self.rows.len() < 3 {
            return None;
        }
        let tail: Vec<f64> = self.rows.iter().filter(|r| r.p >= p_min).map(|r| r.rel_err).collect();
        Some(tail.windows(2).all(|w| w[1] <= w[0]))
    }
}

/// Region over which eigenfunction regularity is measured: the interior for
/// the seminorm quotient (which never sees other nodes), the closure otherwise.
pub fn holder_region(variant: EigenVariant) -> HolderRegion {
    if variant == EigenVariant::NeumannSeminorm {
        HolderRegion::U
    } else {
        HolderRegion::Closure
    }
}

/// Hölder constant `max |u(x) - u(y)| / d(x, y)^s` of an eigenfunction.
pub fn holder_profile(
    grid: &DomainGrid,
    result: &EigenResult,
    variant: EigenVariant,
    s: f64,
    m: &MetricSpec,
) -> Result<f64> {
    holder_seminorm(grid, &result.eigenfunction, s, m, holder_region(variant))
}

/// p-sweep with targets and the transport cross-check.
pub fn run_limit_experiment(spec: &EigenProblemSpec, p_list: &[f64]) -> Result<SweepReport> {
    let g = spec.grid;
    let s = spec.form.s;
    let target = limit_target(spec)?;
    let (geometric, transport_value) = match spec.variant {
        EigenVariant::Dirichlet => (inradius(g)?.value, dirichlet_sup(g, s)?.value),
        _ => (diameter(g, &spec.form.metric)?.value, neumann_max(g, s, &spec.form.metric)?.value),
    };
    let results = p_sweep(spec, p_list)?;
    let metric = if spec.variant == EigenVariant::Dirichlet {
        MetricSpec::euclidean(g.dim())
    } else {
        spec.form.metric.clone()
    };
    let mut rows = Vec::with_capacity(results.len());
    for (r, &p) in results.iter().zip(p_list) {
        rows.push(SweepRow {
            p,
            lambda: r.lambda,
            lambda_root: r.lambda_root,
            target,
            rel_err: (r.lambda_root - target).abs() / target,
            iterations: r.iterations,
            converged: r.converged,
            holder: holder_profile(g, r, spec.variant, s, &metric)?,
        });
    }
    Ok(SweepReport {
        rows,
        meta: SweepMeta { variant: spec.variant, s, h: g.h(), metric, geometric, transport_value },
        results,
    })
}

/// Density `f_p = |u_p|^{p-2} u_p` paired with an eigenfunction, with the
/// scalar identities it satisfies.
#[derive(Clone, Debug)]
pub struct DensityPair {
    pub density: GridFunction,
    /// `Σ u_p f_p w = ‖u_p‖_p^p`, equal to 1 for a normalised eigenfunction.
    pub pairing: f64,
    /// `Σ |f_p| w`.
    pub mass: f64,
    /// Hölder bound `|U|^{1/p}` for `mass`.
    pub mass_bound: f64,
    /// `Σ f_p w`; zero on the Neumann constraint set.
    pub mean: f64,
}

pub fn density_pair(grid: &DomainGrid, u: &GridFunction, p: f64) -> Result<DensityPair> {
    if u.len() != grid.len() {
        return Err(precondition("grid function does not match grid"));
    }
    let pw = Power::new(p - 1.0);
    let w = grid.cell_measure();
    let ni = grid.n_interior();
    let vals = u.values();
    let f: Vec<f64> = (0..grid.len())
        .map(|i| {
            if i < ni {
                let a = pw.of(vals[i].abs());
                if vals[i] < 0.0 {
                    -a
                } else {
                    a
                }
            } else {
                0.0
            }
        })
        .collect();
    let (mut pairing, mut mass, mut mean) = (0.0, 0.0, 0.0);
    for i in 0..ni {
        pairing += vals[i] * f[i] * w;
        mass += f[i].abs() * w;
        mean += f[i] * w;
    }
    Ok(DensityPair {
        density: GridFunction::new(grid, f)?,
        pairing,
        mass,
        mass_bound: grid.interior_measure().powf(1.0 / p),
        mean,
    })
}

#[derive(Clone, Debug)]
pub struct SeminormComparison {
    pub p: f64,
    pub seminorm: EigenResult,
    pub nonlocal: EigenResult,
}

impl SeminormComparison {
    /// `λ^N / (2 λ)`; at most 1.
    pub fn ratio(&self) -> f64 {
        self.seminorm.lambda / (2.0 * self.nonlocal.lambda)
    }
}

/// Seminorm and nonlocal Neumann eigenvalues along a p-sweep. Each seminorm
/// solve is also offered the nonlocal eigenfunction as a start: on the
/// constraint set `⟦u⟧^p <= H(u)`, so that start already has quotient at
/// most `2 λ`.
pub fn compare_neumann(spec: &EigenProblemSpec, p_list: &[f64]) -> Result<Vec<SeminormComparison>> {
    let mut nonlocal_spec = spec.clone();
    nonlocal_spec.variant = EigenVariant::NeumannNonlocal;
    let nonlocal = p_sweep(&nonlocal_spec, p_list)?;
    let mut out = Vec::with_capacity(p_list.len());
    for (nl, &p) in nonlocal.into_iter().zip(p_list) {
        let mut sub = spec.with_p(p);
        sub.variant = EigenVariant::NeumannSeminorm;
        sub.solver.warm_start = Some(nl.eigenfunction.clone());
        let sn = minimize_rayleigh(&sub)?;
        out.push(SeminormComparison { p, seminorm: sn, nonlocal: nl });
    }
    Ok(out)
}
