//! First eigenvalues of the discrete fractional p-Laplacian.
//!
//! Three constrained Rayleigh quotients are minimised:
//!
//! * `Dirichlet`: `[u]^p / ‖u‖_p^p` over functions vanishing off the interior;
//! * `NeumannSeminorm`: `⟦u⟧^p / ‖u‖_p^p` subject to `Σ |u|^{p-2} u w = 0`;
//! * `NeumannNonlocal`: `H(u) / (2 ‖u‖_p^p)` under the same constraint, with
//!   the exterior values as free unknowns.
//!
//! The solver works on `L(u) = ln E(u) - ln min_c ‖u - c‖_p^p` (no shift for
//! the Dirichlet case). `L` is invariant under scaling and under adding
//! constants, agrees with the log of the quotient on the constraint set, and
//! its gradient there is the projected quotient gradient. Every accepted
//! iterate is shifted to zero p-mean and normalised, so the projection never
//! changes the objective and the recorded sequence decreases monotonically.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::trial_function;
use crate::discretization::{check_sp, FormParams, GridFunction};
use crate::error::{degenerate, domain, precondition, Result};
use crate::geometry::{diameter, distance_to_boundary, inradius, DomainGrid, MetricSpec};
use crate::kernel::{ln_lp_power, unit_sphere_measure, LogEval, PairSystem, Power};
use crate::parallel::DEFAULT_BLOCK;

/// Consecutive small decreases required before declaring convergence.
const STALL_WINDOW: usize = 25;
const MAX_RESTARTS: usize = 5;
const ARMIJO_C1: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EigenVariant {
    Dirichlet,
    NeumannSeminorm,
    NeumannNonlocal,
}

impl EigenVariant {
    pub const ALL: [EigenVariant; 3] =
        [EigenVariant::Dirichlet, EigenVariant::NeumannSeminorm, EigenVariant::NeumannNonlocal];

    pub fn name(self) -> &'static str {
        match self {
            EigenVariant::Dirichlet => "dirichlet",
            EigenVariant::NeumannSeminorm => "neumann_seminorm",
            EigenVariant::NeumannNonlocal => "neumann_nonlocal",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    pub fn is_neumann(self) -> bool {
        self != EigenVariant::Dirichlet
    }

    /// Denominator factor: the nonlocal quotient divides by `2 ‖u‖_p^p`.
    fn ln_factor(self) -> f64 {
        if self == EigenVariant::NeumannNonlocal {
            std::f64::consts::LN_2
        } else {
            0.0
        }
    }
}

impl std::fmt::Display for EigenVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams {
    pub max_iters: usize,
    /// Initial trial step along the preconditioned direction.
    pub step0: f64,
    /// Threshold on the relative quotient decrease per iteration.
    pub tol: f64,
    pub seed: u64,
    /// Rows per reduction block of the pair sums.
    pub block: usize,
    pub warm_start: Option<GridFunction>,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            max_iters: 20000,
            step0: 1.0,
            tol: 1e-8,
            seed: 0,
            block: DEFAULT_BLOCK,
            warm_start: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenProblemSpec<'g> {
    pub variant: EigenVariant,
    pub form: FormParams,
    pub grid: &'g DomainGrid,
    pub solver: SolverParams,
}

impl<'g> EigenProblemSpec<'g> {
    pub fn new(variant: EigenVariant, form: FormParams, grid: &'g DomainGrid) -> Self {
        EigenProblemSpec { variant, form, grid, solver: SolverParams::default() }
    }

    pub fn with_p(&self, p: f64) -> Self {
        let mut out = self.clone();
        out.form.p = p;
        out
    }

    fn validate(&self) -> Result<()> {
        check_sp(self.form.s, self.form.p)?;
        if !(self.solver.tol > 0.0) {
            return Err(precondition("solver tolerance must be positive"));
        }
        if self.solver.max_iters == 0 {
            return Err(precondition("max_iters must be at least 1"));
        }
        if self.grid.n_interior() < 2 {
            return Err(precondition("eigenproblem needs at least two interior nodes"));
        }
        if self.form.metric.dim() != self.grid.dim() {
            return Err(precondition("metric and grid dimensions differ"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub lambda: f64,
    /// `lambda^(1/p)` taken from the log of the quotient.
    pub lambda_root: f64,
    /// Normalised to `‖u‖_{L^p(U)} = 1`.
    pub eigenfunction: GridFunction,
    pub iterations: usize,
    /// Euler-Lagrange residual `max_i |E'(u)[e_i]/κ - λ p |u_i|^{p-2} u_i w_i|`
    /// divided by `λ p max_i |u_i|^{p-1} w_i`.
    pub grad_residual: f64,
    /// Dirichlet: `|‖u‖_p^p - 1|`. Neumann: `|Σ |u|^{p-2} u w| / Σ |u|^{p-1} w`.
    pub constraint_residual: f64,
    pub converged: bool,
    pub restarts: usize,
    /// `ln λ` after each accepted step.
    pub history: Vec<f64>,
}

/// Zero-p-mean shift on a slice with uniform weights.
pub(crate) fn pmean_shift(vals: &[f64], p: f64) -> Result<f64> {
    let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if vals.is_empty() || !(hi > lo) {
        return Err(degenerate("zero-p-mean shift of a constant function is not unique"));
    }
    let range = hi - lo;
    let pw = Power::new(p - 2.0);
    // decreasing in c; values are scaled by the range to keep powers bounded
    let f = |c: f64| -> f64 {
        vals.iter()
            .map(|&v| {
                let d = (v - c) / range;
                if d == 0.0 {
                    0.0
                } else {
                    pw.of(d.abs()) * d
                }
            })
            .sum()
    };
    let (mut a, mut b) = (lo, hi);
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = f(mid);
        if v > 0.0 {
            a = mid;
        } else if v < 0.0 {
            b = mid;
        } else {
            return Ok(mid);
        }
    }
    Ok(if f(a).abs() <= f(b).abs() { a } else { b })
}

/// The constant `c` with `Σ_interior |u - c|^{p-2} (u - c) w = 0`.
pub fn zero_pmean_shift(grid: &DomainGrid, u: &GridFunction, p: f64) -> Result<f64> {
    if u.len() != grid.len() {
        return Err(precondition("grid function does not match grid"));
    }
    if !(p > 1.0) {
        return Err(precondition(format!("p must be > 1, got {p}")));
    }
    pmean_shift(&u.values()[..grid.n_interior()], p)
}

fn constraint_residual(interior: &[f64], p: f64) -> f64 {
    let pw = Power::new(p - 1.0);
    let (mut num, mut den) = (0.0, 0.0);
    for &v in interior {
        let a = pw.of(v.abs());
        num += if v >= 0.0 { a } else { -a };
        den += a;
    }
    if den > 0.0 {
        num.abs() / den
    } else {
        0.0
    }
}

/// A Rayleigh quotient with its log and constraint status.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quotient {
    pub lambda: f64,
    pub ln_lambda: f64,
    /// Relative violation of the variant's constraint (see
    /// [`EigenResult::constraint_residual`], scale-free form for Dirichlet: 0).
    pub constraint_residual: f64,
}

impl Quotient {
    pub fn feasible(&self, tol: f64) -> bool {
        self.constraint_residual <= tol
    }
}

/// Objective data shared by the solver, the quotient and the residuals.
struct Problem {
    variant: EigenVariant,
    sys: PairSystem,
    n_interior: usize,
    w: f64,
    p: f64,
}

struct Point {
    x: Vec<f64>,
    l: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    ln_norm: f64,
}

impl Problem {
    fn new(spec: &EigenProblemSpec) -> Self {
        let g = spec.grid;
        let (s, p, b) = (spec.form.s, spec.form.p, spec.solver.block);
        let sys = match spec.variant {
            EigenVariant::Dirichlet => PairSystem::dirichlet(g, s, p, b),
            EigenVariant::NeumannSeminorm => PairSystem::neumann(g, s, p, &spec.form.metric, b),
            EigenVariant::NeumannNonlocal => PairSystem::nonlocal(g, s, p, &spec.form.metric, b),
        };
        Problem { variant: spec.variant, sys, n_interior: g.n_interior(), w: g.cell_measure(), p }
    }

    fn n(&self) -> usize {
        self.sys.n_unknowns()
    }

    fn weights(&self) -> Vec<f64> {
        vec![self.w; self.n_interior]
    }

    fn shift(&self, x: &[f64]) -> Result<f64> {
        if self.variant.is_neumann() {
            pmean_shift(&x[..self.n_interior], self.p)
        } else {
            Ok(0.0)
        }
    }

    /// Shift to zero p-mean and normalise; returns the applied scale factor.
    fn project(&self, x: &mut [f64]) -> Result<f64> {
        let c = self.shift(x)?;
        x.iter_mut().for_each(|v| *v -= c);
        let ln = ln_lp_power(x, &self.weights(), self.p, false).ln_value;
        if !ln.is_finite() {
            return Err(degenerate("zero L^p norm on the interior"));
        }
        let scale = (-ln / self.p).exp();
        x.iter_mut().for_each(|v| *v *= scale);
        Ok(scale)
    }

    /// `L` with gradient and preconditioner at `x` (not necessarily projected).
    fn evaluate(&self, x: &[f64]) -> Result<Point> {
        let c = self.shift(x)?;
        let shifted: Vec<f64>;
        let xs = if c != 0.0 {
            shifted = x.iter().map(|v| v - c).collect();
            &shifted[..]
        } else {
            x
        };
        let e: LogEval = self.sys.eval(xs);
        let nrm = ln_lp_power(xs, &self.weights(), self.p, true);
        if !e.ln_value.is_finite() || !nrm.ln_value.is_finite() {
            return Err(degenerate("quotient undefined at this point"));
        }
        let grad: Vec<f64> = e.grad.iter().zip(&nrm.grad).map(|(a, b)| a - b).collect();
        let hmax = e.hess.iter().cloned().fold(0.0, f64::max);
        let floor = 1e-12 * hmax;
        let hess = e.hess.iter().map(|&h| h.max(floor)).collect();
        Ok(Point { x: x.to_vec(), l: e.ln_value - nrm.ln_value, grad, hess, ln_norm: nrm.ln_value })
    }

    fn ln_lambda(&self, l: f64) -> f64 {
        l - self.variant.ln_factor()
    }
}

fn unknowns_of(spec: &EigenProblemSpec, u: &GridFunction) -> Vec<f64> {
    let n = if spec.variant == EigenVariant::NeumannNonlocal { spec.grid.len() } else { spec.grid.n_interior() };
    u.values()[..n].to_vec()
}

/// Rayleigh quotient of the variant at `u`, evaluated in the log domain.
///
/// The Dirichlet quotient requires `u = 0` off the interior. For the Neumann
/// variants the quotient is evaluated as given (no shift) and the constraint
/// violation is reported in the result.
pub fn rayleigh(spec: &EigenProblemSpec, u: &GridFunction) -> Result<Quotient> {
    spec.validate()?;
    let g = spec.grid;
    if u.len() != g.len() {
        return Err(precondition("grid function does not match grid"));
    }
    let vals = u.values();
    if spec.variant == EigenVariant::Dirichlet {
        if let Some(i) = (g.n_interior()..g.len()).find(|&i| vals[i] != 0.0) {
            return Err(precondition(format!("Dirichlet quotient needs u = 0 off the interior (node {i})")));
        }
    }
    let p = spec.form.p;
    let interior = &vals[..g.n_interior()];
    let ln_n = ln_lp_power(interior, &vec![g.cell_measure(); g.n_interior()], p, false).ln_value;
    if !ln_n.is_finite() {
        return Err(domain("‖u‖_p = 0 on the interior"));
    }
    let sys = Problem::new(spec).sys;
    let ln_e = sys.ln_value(&unknowns_of(spec, u));
    let ln_lambda = ln_e - ln_n - spec.variant.ln_factor();
    let constraint_residual =
        if spec.variant.is_neumann() { constraint_residual(interior, p) } else { 0.0 };
    Ok(Quotient { lambda: ln_lambda.exp(), ln_lambda, constraint_residual })
}

fn default_init(spec: &EigenProblemSpec) -> Result<GridFunction> {
    let g = spec.grid;
    match spec.variant {
        EigenVariant::Dirichlet => {
            let s = spec.form.s;
            let mut vals = vec![0.0; g.len()];
            for (i, v) in vals.iter_mut().enumerate().take(g.n_interior()) {
                *v = distance_to_boundary(g, i)?.powf(s);
            }
            GridFunction::new(g, vals)
        }
        _ => trial_function(g, &spec.form.metric, spec.form.s),
    }
}

fn random_init(n: usize, seed: u64, attempt: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(attempt as u64 + 1)));
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn to_grid_function(spec: &EigenProblemSpec, x: &[f64]) -> GridFunction {
    let mut vals = vec![0.0; spec.grid.len()];
    vals[..x.len()].copy_from_slice(x);
    GridFunction::from_fn(spec.grid, |i| vals[i])
}

struct Run {
    point: Point,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

/// Preconditioned Polak-Ribière+ descent with Armijo backtracking on `L`.
fn descend(prob: &Problem, start: Vec<f64>, params: &SolverParams) -> Result<Run> {
    let mut x = start;
    prob.project(&mut x)?;
    let mut pt = prob.evaluate(&x)?;
    let mut history = vec![prob.ln_lambda(pt.l)];
    let mut dir: Vec<f64> = pt.grad.iter().zip(&pt.hess).map(|(g, h)| -g / h).collect();
    let mut prev_gz = dot(&pt.grad, &dir).abs();
    let mut step = params.step0;
    let mut quiet = 0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iters {
        iterations += 1;
        let mut slope = dot(&pt.grad, &dir);
        if !(slope < 0.0) {
            dir = pt.grad.iter().zip(&pt.hess).map(|(g, h)| -g / h).collect();
            slope = dot(&pt.grad, &dir);
            if !(slope < 0.0) {
                converged = true;
                break;
            }
        }
        let mut accepted = None;
        let mut a = (2.0 * step).min(params.step0 * 1e6);
        for _ in 0..80 {
            let trial: Vec<f64> = pt.x.iter().zip(&dir).map(|(x, d)| x + a * d).collect();
            if let Ok(cand) = prob.evaluate(&trial) {
                if cand.l <= pt.l + ARMIJO_C1 * a * slope {
                    accepted = Some(cand);
                    break;
                }
            }
            a *= 0.5;
        }
        let Some(mut cand) = accepted else {
            // no decrease representable along a descent direction
            converged = true;
            break;
        };
        step = a;
        let scale = prob.project(&mut cand.x)?;
        cand.grad.iter_mut().for_each(|g| *g /= scale);
        cand.hess.iter_mut().for_each(|h| *h /= scale * scale);
        let decrease = -(cand.l - pt.l).exp_m1();
        history.push(prob.ln_lambda(cand.l));

        let z: Vec<f64> = cand.grad.iter().zip(&cand.hess).map(|(g, h)| g / h).collect();
        let gz = dot(&cand.grad, &z);
        let gz_old = dot(&pt.grad, &z) * scale;
        let beta = ((gz - gz_old) / prev_gz).max(0.0);
        let beta = if beta.is_finite() { beta } else { 0.0 };
        dir = z.iter().zip(&dir).map(|(z, d)| -z + beta * d * scale).collect();
        prev_gz = gz;
        pt = cand;

        if decrease < params.tol {
            quiet += 1;
            if quiet >= STALL_WINDOW {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(Run { point: pt, iterations, converged, history })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimise the variant's Rayleigh quotient.
///
/// Starts from the better of the default profile (`dist(x, ∂U)^s` or the
/// two-point trial function) and the warm start, if any. Infeasible starts
/// fall back to seeded random starts.
pub fn minimize_rayleigh(spec: &EigenProblemSpec) -> Result<EigenResult> {
    spec.validate()?;
    let prob = Problem::new(spec);
    let n = prob.n();

    let mut starts = Vec::new();
    if let Some(ws) = &spec.solver.warm_start {
        if ws.len() == spec.grid.len() {
            starts.push(unknowns_of(spec, ws));
        }
    }
    starts.push(unknowns_of(spec, &default_init(spec)?));
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in starts {
        let mut x = s;
        if prob.project(&mut x).is_err() {
            continue;
        }
        if let Ok(pt) = prob.evaluate(&x) {
            if best.as_ref().is_none_or(|b| pt.l < b.0) {
                best = Some((pt.l, x));
            }
        }
    }

    let mut restarts = 0;
    let mut start = match best {
        Some((_, x)) => x,
        None => {
            restarts = 1;
            random_init(n, spec.solver.seed, 0)
        }
    };
    let run = loop {
        match descend(&prob, start, &spec.solver) {
            Ok(r) => break r,
            Err(e) if restarts >= MAX_RESTARTS => return Err(e),
            Err(_) => {
                start = random_init(n, spec.solver.seed, restarts);
                restarts += 1;
            }
        }
    };

    let mut x = run.point.x;
    let sign_node = if spec.variant.is_neumann() {
        let d = diameter(spec.grid, &spec.form.metric)?;
        spec.grid.nearest_interior(&d.pair.0)
    } else {
        inradius(spec.grid)?.incenter_index
    };
    let mut grad = run.point.grad;
    if x[sign_node] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
        grad.iter_mut().for_each(|v| *v = -*v);
    }
    let eigenfunction = to_grid_function(spec, &x);
    let q = rayleigh(spec, &eigenfunction)?;

    let p = spec.form.p;
    let pm1 = Power::new(p - 1.0);
    let peak = x[..prob.n_interior].iter().map(|v| pm1.of(v.abs())).fold(0.0, f64::max) * prob.w;
    let gmax = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    let grad_residual = gmax * run.point.ln_norm.exp() / (p * peak);
    let constraint_residual = if spec.variant.is_neumann() {
        q.constraint_residual
    } else {
        (ln_lp_power(&x, &prob.weights(), p, false).ln_value).exp_m1().abs()
    };

    Ok(EigenResult {
        lambda: q.lambda,
        lambda_root: (q.ln_lambda / p).exp(),
        eigenfunction,
        iterations: run.iterations,
        grad_residual,
        constraint_residual,
        converged: run.converged,
        restarts,
        history: run.history,
    })
}

/// `minimize_rayleigh` along an ascending list of exponents, each solve warm
/// started from the previous eigenfunction.
pub fn p_sweep(spec: &EigenProblemSpec, p_list: &[f64]) -> Result<Vec<EigenResult>> {
    if p_list.is_empty() {
        return Err(precondition("empty p list"));
    }
    if p_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(precondition("p list must be strictly ascending"));
    }
    let mut out: Vec<EigenResult> = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let mut sub = spec.with_p(p);
        if let Some(prev) = out.last() {
            sub.solver.warm_start = Some(prev.eigenfunction.clone());
        }
        out.push(minimize_rayleigh(&sub)?);
    }
    Ok(out)
}

/// Eigen-decomposition of the unconstrained `p = 2` form on the interior
/// unknowns, scaled like the quotient. Exterior unknowns of the nonlocal
/// variant are eliminated by a Schur complement; their block is diagonal
/// because exterior pairs never couple.
#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` belongs to `values[k]`; interior entries only.
    pub vectors: DMatrix<f64>,
    /// Maps interior values to the exterior values minimising the form
    /// (nonlocal variant only): `u_ext = -extension^T u_int`.
    extension: Option<DMatrix<f64>>,
}

pub fn dense_p2_spectrum(spec: &EigenProblemSpec) -> Result<DenseSpectrum> {
    if spec.form.p != 2.0 {
        return Err(precondition(format!("dense reference solver needs p = 2, got {}", spec.form.p)));
    }
    spec.validate()?;
    let g = spec.grid;
    let ni = g.n_interior();
    let w = g.cell_measure();
    let s = spec.form.s;
    let e = g.dim() as f64 + 2.0 * s;
    let coef = |m: &MetricSpec, i: usize, j: usize| 2.0 * w * w * m.eval(&g.node(i), &g.node(j)).powf(-e);
    let euclid = MetricSpec::euclidean(g.dim());

    let (a, extension) = match spec.variant {
        EigenVariant::Dirichlet => {
            let mut a = laplacian(ni, |i, j| coef(&euclid, i, j));
            let tail = 2.0 * w * unit_sphere_measure(g.dim()) * g.buffer_euclid().powf(-2.0 * s) / (2.0 * s);
            for i in 0..ni {
                let near: f64 = (ni..g.len()).map(|j| coef(&euclid, i, j)).sum();
                a[(i, i)] += near + tail;
            }
            (a, None)
        }
        EigenVariant::NeumannSeminorm => (laplacian(ni, |i, j| coef(&spec.form.metric, i, j)), None),
        EigenVariant::NeumannNonlocal => {
            let m = &spec.form.metric;
            let ne = g.len() - ni;
            let mut a = laplacian(ni, |i, j| coef(m, i, j));
            let mut cross = DMatrix::<f64>::zeros(ni, ne);
            let mut diag = vec![0.0; ne];
            for i in 0..ni {
                for k in 0..ne {
                    let c = coef(m, i, ni + k);
                    a[(i, i)] += c;
                    cross[(i, k)] = -c;
                    diag[k] += c;
                }
            }
            let mut scaled = cross.clone();
            for (k, d) in diag.iter().enumerate() {
                scaled.column_mut(k).scale_mut(1.0 / d);
            }
            a -= &scaled * cross.transpose();
            let a = (&a + a.transpose()) * 0.5;
            (a, Some(scaled))
        }
    };

    let factor = if spec.variant == EigenVariant::NeumannNonlocal { 2.0 } else { 1.0 };
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..ni).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k] / (factor * w)).collect();
    let vectors = DMatrix::from_fn(ni, ni, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(DenseSpectrum { values, vectors, extension })
}

/// Reference solver for `p = 2` by dense diagonalisation.
///
/// Dirichlet: smallest eigenvalue. Neumann variants: the second eigenvalue,
/// the first being zero with constant eigenvector; for `p = 2` the constraint
/// is exactly orthogonality to constants.
pub fn dense_p2_oracle(spec: &EigenProblemSpec) -> Result<EigenResult> {
    let sp = dense_p2_spectrum(spec)?;
    let g = spec.grid;
    let ni = g.n_interior();
    let w = g.cell_measure();
    let pick = usize::from(spec.variant.is_neumann());
    let lambda = sp.values[pick];
    let v = sp.vectors.column(pick);

    let mut vals = vec![0.0; g.len()];
    for i in 0..ni {
        vals[i] = v[i];
    }
    if let Some(ext) = &sp.extension {
        let ue = ext.transpose() * v;
        for k in 0..ue.len() {
            vals[ni + k] = -ue[k];
        }
    }
    let norm = (vals[..ni].iter().map(|x| x * x).sum::<f64>() * w).sqrt();
    vals.iter_mut().for_each(|x| *x /= norm);
    let eigenfunction = GridFunction::new(g, vals)?;
    let constraint_residual = if spec.variant.is_neumann() {
        constraint_residual(&eigenfunction.values()[..ni], 2.0)
    } else {
        0.0
    };
    Ok(EigenResult {
        lambda,
        lambda_root: lambda.max(0.0).sqrt(),
        eigenfunction,
        iterations: 0,
        grad_residual: 0.0,
        constraint_residual,
        converged: true,
        restarts: 0,
        history: Vec::new(),
    })
}

fn laplacian(n: usize, c: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = c(i, j);
            a[(i, i)] += v;
            a[(j, j)] += v;
            a[(i, j)] -= v;
            a[(j, i)] -= v;
        }
    }
    a
}
