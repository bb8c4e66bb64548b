//! Quadrature of the nonlocal semi-norms, energies and operators on a
//! [`DomainGrid`].
//!
//! Every double integral becomes a sum over ordered node pairs `x != y`
//! weighted by `w_x w_y`; the principal value is the diagonal-excluded sum.
//! The operators `(-Δ)_p^s` and `N_{s,p}` use the same summands as the forms,
//! so the divergence theorem and the integration by parts formula hold for
//! the discrete objects up to rounding.
//!
//! "Exterior" below means every non-interior node (boundary and buffer):
//! boundary nodes sit on `∂U`, which belongs to the complement of the open
//! domain.

use crate::error::{precondition, Result};
use crate::geometry::{DomainGrid, MetricSpec, NodeClass};
use crate::kernel::{unit_sphere_measure, PairKernel, PairSystem, Power};
use crate::parallel::DEFAULT_BLOCK;

/// Real values on all nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: &DomainGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(precondition(format!(
                "grid function has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(precondition(format!("non-finite value at node {i}")));
        }
        Ok(GridFunction { values })
    }

    pub fn zeros(grid: &DomainGrid) -> Self {
        GridFunction { values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &DomainGrid, f: impl Fn(usize) -> f64) -> Self {
        GridFunction { values: (0..grid.len()).map(f).collect() }
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

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        GridFunction { values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn shifted(&self, c: f64) -> Self {
        GridFunction { values: self.values.iter().map(|v| v + c).collect() }
    }

    fn check(&self, grid: &DomainGrid) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(precondition(format!(
                "grid function has {} values for {} nodes",
                self.values.len(),
                grid.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormParams {
    pub s: f64,
    pub p: f64,
    pub metric: MetricSpec,
    /// Rows per deterministic reduction block.
    pub block: usize,
}

impl FormParams {
    pub fn new(s: f64, p: f64, metric: MetricSpec) -> Result<Self> {
        check_sp(s, p)?;
        Ok(FormParams { s, p, metric, block: DEFAULT_BLOCK })
    }
}

pub(crate) fn check_sp(s: f64, p: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(precondition(format!("s must lie in (0, 1), got {s}")));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(precondition(format!("p must be finite and > 1, got {p}")));
    }
    Ok(())
}

/// A nonnegative p-power sum, carried in log form so that `value^(1/p)` is
/// available even when `value` itself over- or underflows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormValue {
    pub log_value: f64,
    pub value: f64,
}

impl FormValue {
    pub(crate) fn from_ln(log_value: f64) -> Self {
        FormValue { log_value, value: log_value.exp() }
    }

    /// `value^(1/p)`.
    pub fn root(&self, p: f64) -> f64 {
        (self.log_value / p).exp()
    }
}

/// Coefficient root `(2 w_x w_y / d^(n+sp))^(1/p)` of an unordered pair.
fn pair_root(w: f64, n: usize, s: f64, p: f64) -> impl Fn(f64) -> f64 + Sync {
    let scale = (2.0 * w * w).powf(1.0 / p);
    let e = n as f64 / p + s;
    move |d: f64| scale * d.powf(-e)
}

impl PairSystem {
    /// `[u]^p_{s,p}` restricted to functions vanishing off the interior,
    /// including the buffer pairs and the analytic far field.
    pub(crate) fn dirichlet(grid: &DomainGrid, s: f64, p: f64, block: usize) -> Self {
        let n = grid.dim();
        let w = grid.cell_measure();
        let euclid = MetricSpec::euclidean(n);
        let root = PairKernel::new(grid, &euclid, pair_root(w, n, s, p));
        let e = n as f64 + s * p;
        let full = PairKernel::new(grid, &euclid, move |d: f64| d.powf(-e));
        let ni = grid.n_interior();
        let tail = 2.0 * w * unit_sphere_measure(n) * grid.buffer_euclid().powf(-s * p) / (s * p);
        let outer = (0..ni)
            .map(|i| {
                let near: f64 = (ni..grid.len()).map(|j| full.get(i, j)).sum();
                (2.0 * w * w * near + tail).powf(1.0 / p)
            })
            .collect();
        PairSystem::build(ni, ni, p, block, |i, j| root.get(i, j), outer)
    }

    /// `⟦u⟧^p_{s,p}`: interior pairs only.
    pub(crate) fn neumann(grid: &DomainGrid, s: f64, p: f64, m: &MetricSpec, block: usize) -> Self {
        let root = PairKernel::new(grid, m, pair_root(grid.cell_measure(), grid.dim(), s, p));
        let ni = grid.n_interior();
        PairSystem::build(ni, ni, p, block, |i, j| root.get(i, j), Vec::new())
    }

    /// `H_{s,p}(u)`: all pairs except exterior x exterior.
    pub(crate) fn nonlocal(grid: &DomainGrid, s: f64, p: f64, m: &MetricSpec, block: usize) -> Self {
        let root = PairKernel::new(grid, m, pair_root(grid.cell_measure(), grid.dim(), s, p));
        PairSystem::build(grid.n_interior(), grid.len(), p, block, |i, j| root.get(i, j), Vec::new())
    }
}

/// Discrete Gagliardo semi-norm `[u]^p_{s,p}` (Euclidean kernel) of a
/// function vanishing on boundary and buffer nodes. Pairs reaching beyond the
/// buffer contribute the closed-form tail
/// `2 sum_x |u(x)|^p w_x σ_{n-1} W^{-sp} / (sp)`.
pub fn seminorm_dirichlet(grid: &DomainGrid, u: &GridFunction, s: f64, p: f64) -> Result<FormValue> {
    check_sp(s, p)?;
    u.check(grid)?;
    if let Some(i) = (grid.n_interior()..grid.len()).find(|&i| u.values[i] != 0.0) {
        return Err(precondition(format!(
            "Dirichlet semi-norm needs u = 0 off the interior; node {i} ({:?}) holds {}",
            grid.class(i),
            u.values[i]
        )));
    }
    let sys = PairSystem::dirichlet(grid, s, p, DEFAULT_BLOCK);
    Ok(FormValue::from_ln(sys.ln_value(&u.values[..grid.n_interior()])))
}

/// `⟦u⟧^p_{s,p} = sum_{x != y interior} |u(x)-u(y)|^p / d(x,y)^(n+sp) w_x w_y`.
pub fn seminorm_neumann(
    grid: &DomainGrid,
    u: &GridFunction,
    s: f64,
    p: f64,
    m: &MetricSpec,
) -> Result<FormValue> {
    check_sp(s, p)?;
    u.check(grid)?;
    let sys = PairSystem::neumann(grid, s, p, m, DEFAULT_BLOCK);
    Ok(FormValue::from_ln(sys.ln_value(&u.values[..grid.n_interior()])))
}

/// `H_{s,p}(u)`: the double sum over every ordered pair not lying in
/// `(U^c)^2`, truncated at the buffer.
pub fn h_form(grid: &DomainGrid, u: &GridFunction, s: f64, p: f64, m: &MetricSpec) -> Result<FormValue> {
    check_sp(s, p)?;
    u.check(grid)?;
    let sys = PairSystem::nonlocal(grid, s, p, m, DEFAULT_BLOCK);
    Ok(FormValue::from_ln(sys.ln_value(&u.values)))
}

#[inline]
fn phi(pw: &Power, d: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        pw.of(d.abs()) * d
    }
}

/// `H_{s,p}(u, v) = sum |Δu|^(p-2) Δu Δv / d^(n+sp) w_x w_y` over the same
/// ordered pairs as [`h_form`].
pub fn h_bilinear(
    grid: &DomainGrid,
    u: &GridFunction,
    v: &GridFunction,
    s: f64,
    p: f64,
    m: &MetricSpec,
) -> Result<f64> {
    check_sp(s, p)?;
    u.check(grid)?;
    v.check(grid)?;
    let n = grid.dim();
    let e = n as f64 + s * p;
    let ker = PairKernel::new(grid, m, move |d: f64| d.powf(-e));
    let w = grid.cell_measure();
    let pw = Power::new(p - 2.0);
    let (u, v) = (&u.values, &v.values);
    let ni = grid.n_interior();
    let mut total = 0.0;
    for i in 0..grid.len() {
        let others = if i < ni { 0..grid.len() } else { 0..ni };
        let mut row = 0.0;
        for j in others {
            if j == i {
                continue;
            }
            row += phi(&pw, u[i] - u[j]) * (v[i] - v[j]) * ker.get(i, j);
        }
        total += row * w * w;
    }
    Ok(total)
}

/// `H_{s,∞}(u)`: largest `|u(x)-u(y)| / d(x,y)^s` over pairs not both exterior.
pub fn h_infty(grid: &DomainGrid, u: &GridFunction, s: f64, m: &MetricSpec) -> Result<f64> {
    u.check(grid)?;
    let ker = PairKernel::new(grid, m, move |d: f64| d.powf(-s));
    let vals = &u.values;
    let mut best = 0.0f64;
    for i in 0..grid.n_interior() {
        for j in (i + 1)..grid.len() {
            best = best.max((vals[i] - vals[j]).abs() * ker.get(i, j));
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HolderRegion {
    /// Interior nodes.
    U,
    /// Interior and boundary nodes.
    Closure,
    AllNodes,
}

/// Largest Hölder quotient `|u(x)-u(y)| / d(x,y)^s` over node pairs of `region`.
pub fn holder_seminorm(
    grid: &DomainGrid,
    u: &GridFunction,
    s: f64,
    m: &MetricSpec,
    region: HolderRegion,
) -> Result<f64> {
    u.check(grid)?;
    let n = match region {
        HolderRegion::U => grid.n_interior(),
        HolderRegion::Closure => grid.n_closure(),
        HolderRegion::AllNodes => grid.len(),
    };
    let ker = PairKernel::new(grid, m, move |d: f64| d.powf(-s));
    let vals = &u.values;
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.max((vals[i] - vals[j]).abs() * ker.get(i, j));
        }
    }
    Ok(best)
}

fn operator_rows(
    grid: &DomainGrid,
    u: &GridFunction,
    s: f64,
    p: f64,
    m: &MetricSpec,
    interior_rows: bool,
) -> Result<GridFunction> {
    check_sp(s, p)?;
    u.check(grid)?;
    let e = grid.dim() as f64 + s * p;
    let ker = PairKernel::new(grid, m, move |d: f64| d.powf(-e));
    let w = grid.cell_measure();
    let pw = Power::new(p - 2.0);
    let ni = grid.n_interior();
    let vals = &u.values;
    let mut out = vec![0.0; grid.len()];
    let rows = if interior_rows { 0..ni } else { ni..grid.len() };
    for i in rows {
        let cols = if interior_rows { 0..grid.len() } else { 0..ni };
        let mut acc = 0.0;
        for j in cols {
            if j != i {
                acc += phi(&pw, vals[i] - vals[j]) * ker.get(i, j);
            }
        }
        out[i] = acc * w;
    }
    Ok(GridFunction { values: out })
}

/// Discrete `(-Δ)_p^s u` on interior nodes (diagonal-excluded sum over all
/// nodes); zero elsewhere.
pub fn op_fractional_plap(
    grid: &DomainGrid,
    u: &GridFunction,
    s: f64,
    p: f64,
    m: &MetricSpec,
) -> Result<GridFunction> {
    operator_rows(grid, u, s, p, m, true)
}

/// Discrete nonlocal normal derivative `N_{s,p} u` on exterior (boundary and
/// buffer) nodes, integrating over interior nodes; zero on the interior.
pub fn op_neumann_derivative(
    grid: &DomainGrid,
    u: &GridFunction,
    s: f64,
    p: f64,
    m: &MetricSpec,
) -> Result<GridFunction> {
    operator_rows(grid, u, s, p, m, false)
}

/// `sum_x u(x) w_x` over nodes of the given class predicate.
pub fn weighted_sum(grid: &DomainGrid, u: &GridFunction, pick: impl Fn(NodeClass) -> bool) -> f64 {
    (0..grid.len())
        .filter(|&i| pick(grid.class(i)))
        .map(|i| u.values[i] * grid.weight(i))
        .sum()
}
