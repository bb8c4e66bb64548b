//! Discrete optimal transport for the cost `c(x, y) = d(x, y)^s`, `0 < s < 1`.
//!
//! For `s < 1` the cost `d^s` is itself a metric, so Kantorovich potentials
//! are exactly the functions with `|ψ(x) - ψ(y)| <= d(x, y)^s`, and
//! `W_s(μ, ν) = max_ψ Σ ψ dν - Σ ψ dμ`.

use nalgebra::DMatrix;

use crate::discretization::check_sp;
use crate::error::{invalid, precondition, Result};
use crate::geometry::{diameter, inradius, DomainGrid, MetricSpec, Point};
use crate::simplex;

/// Atoms lighter than this are dropped before solving.
pub const ATOM_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    support: Vec<Point>,
    weights: Vec<f64>,
    mass: f64,
}

impl DiscreteMeasure {
    pub fn new(support: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(invalid(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if let Some(k) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid(format!("weight {k} is negative or not finite")));
        }
        if support.iter().flatten().any(|c| !c.is_finite()) {
            return Err(invalid("support point with non-finite coordinate"));
        }
        let mass = weights.iter().sum();
        Ok(DiscreteMeasure { support, weights, mass })
    }

    pub fn dirac(x: Point) -> Self {
        DiscreteMeasure { support: vec![x], weights: vec![1.0], mass: 1.0 }
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Indices of atoms at or above [`ATOM_FLOOR`].
    fn kept(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.weights[k] >= ATOM_FLOOR).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    pub row_support: Vec<Point>,
    pub col_support: Vec<Point>,
    /// `matrix[(i, j)]` is the mass sent from row atom `i` to column atom `j`.
    pub matrix: DMatrix<f64>,
    pub value: f64,
    /// Row and column potentials with `u_i + v_j <= c_ij`, equality on the
    /// optimal basis; dropped atoms carry `NaN`.
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
    /// Cells of the final simplex basis (a spanning tree of the kept atoms).
    pub basis: Vec<(usize, usize)>,
}

impl TransportPlan {
    /// Nonzero entries as `(i, j, mass)` in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let x = self.matrix[(i, j)];
                if x > 0.0 {
                    out.push((i, j, x));
                }
            }
        }
        out
    }

    /// Largest deviation of the plan's marginals from `mu` and `nu`.
    pub fn marginal_residual(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut r = 0.0f64;
        for i in 0..self.matrix.nrows() {
            r = r.max((self.matrix.row(i).sum() - mu.weights[i]).abs());
        }
        for j in 0..self.matrix.ncols() {
            r = r.max((self.matrix.column(j).sum() - nu.weights[j]).abs());
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KantorovichPotential {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub s: f64,
    pub metric: MetricSpec,
}

impl KantorovichPotential {
    /// `max |ψ(x) - ψ(y)| / d(x, y)^s` over distinct point pairs.
    pub fn holder_constant(&self) -> f64 {
        let mut best = 0.0f64;
        for a in 0..self.points.len() {
            for b in (a + 1)..self.points.len() {
                let d = self.metric.eval(&self.points[a], &self.points[b]);
                if d > 0.0 {
                    best = best.max((self.values[a] - self.values[b]).abs() / d.powf(self.s));
                }
            }
        }
        best
    }

    /// Largest violation of `|ψ(x) - ψ(y)| <= d(x, y)^s`.
    pub fn feasibility_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.points.len() {
            for b in (a + 1)..self.points.len() {
                let c = self.metric.eval(&self.points[a], &self.points[b]).powf(self.s);
                worst = worst.max((self.values[a] - self.values[b]).abs() - c);
            }
        }
        worst
    }

    /// Value at `x`, which must be one of the potential's points.
    pub fn at(&self, x: &Point) -> Option<f64> {
        self.points.iter().position(|p| p == x).map(|k| self.values[k])
    }
}

/// `C_ij = d(x_i, y_j)^s`.
pub fn cost_matrix(xs: &[Point], ys: &[Point], s: f64, m: &MetricSpec) -> Result<DMatrix<f64>> {
    check_s(s)?;
    Ok(DMatrix::from_fn(xs.len(), ys.len(), |i, j| m.eval(&xs[i], &ys[j]).powf(s)))
}

fn check_s(s: f64) -> Result<()> {
    check_sp(s, 2.0)
}

/// Optimal plan between `mu` (rows) and `nu` (columns) for the cost matrix
/// `c`, by the exact transportation simplex.
pub fn solve_primal(mu: &DiscreteMeasure, nu: &DiscreteMeasure, c: &DMatrix<f64>) -> Result<TransportPlan> {
    if c.nrows() != mu.len() || c.ncols() != nu.len() {
        return Err(precondition(format!(
            "cost matrix is {}x{} for measures with {} and {} atoms",
            c.nrows(),
            c.ncols(),
            mu.len(),
            nu.len()
        )));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(precondition("cost matrix has non-finite entries"));
    }
    if (mu.mass - nu.mass).abs() > 1e-12 * mu.mass.max(nu.mass).max(1.0) {
        return Err(precondition(format!("mass mismatch: {} vs {}", mu.mass, nu.mass)));
    }
    let rows = mu.kept();
    let cols = nu.kept();
    let mut matrix = DMatrix::<f64>::zeros(mu.len(), nu.len());
    let mut row_potential = vec![f64::NAN; mu.len()];
    let mut col_potential = vec![f64::NAN; nu.len()];
    let mut basis = Vec::new();
    if !rows.is_empty() && !cols.is_empty() {
        let a: Vec<f64> = rows.iter().map(|&i| mu.weights[i]).collect();
        let b: Vec<f64> = cols.iter().map(|&j| nu.weights[j]).collect();
        let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| c[(rows[i], cols[j])]);
        let sol = simplex::solve(&a, &b, &sub)?;
        for (i, &ri) in rows.iter().enumerate() {
            row_potential[ri] = sol.u[i];
            for (j, &cj) in cols.iter().enumerate() {
                matrix[(ri, cj)] = sol.flow[(i, j)];
            }
        }
        for (j, &cj) in cols.iter().enumerate() {
            col_potential[cj] = sol.v[j];
        }
        basis = sol.basis.iter().map(|&(i, j)| (rows[i], cols[j])).collect();
    }
    let value = matrix.component_mul(c).sum();
    Ok(TransportPlan {
        row_support: mu.support.clone(),
        col_support: nu.support.clone(),
        matrix,
        value,
        row_potential,
        col_potential,
        basis,
    })
}

/// Lower transform `ψ^c(y_j) = min_i ψ(x_i) + C_ij`.
pub fn c_transform_lower(psi: &[f64], c: &DMatrix<f64>) -> Vec<f64> {
    (0..c.ncols())
        .map(|j| (0..c.nrows()).map(|i| psi[i] + c[(i, j)]).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Upper transform `φ^c(x_i) = max_j φ(y_j) - C_ij`.
pub fn c_transform_upper(phi: &[f64], c: &DMatrix<f64>) -> Vec<f64> {
    (0..c.nrows())
        .map(|i| (0..c.ncols()).map(|j| phi[j] - c[(i, j)]).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

#[derive(Clone, Debug)]
pub struct DualSolution {
    pub potential: KantorovichPotential,
    /// `Σ ψ dν - Σ ψ dμ`.
    pub value: f64,
    pub plan: TransportPlan,
}

/// Distinct points of both supports, first-seen order.
fn joint_support(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::new();
    for p in mu.support.iter().chain(&nu.support) {
        if !pts.contains(p) {
            pts.push(*p);
        }
    }
    pts
}

/// Optimal s-Hölder potential. The simplex column potentials `v` satisfy
/// `v_j - C_ij <= -u_i`; their upper transform over the joint support,
/// `ψ(z) = max_j v_j - d(z, y_j)^s`, is 1-Lipschitz for the metric `d^s`,
/// lies below `-u` on the rows and above `v` on the columns, so its dual
/// value is at least the primal value and, by weak duality, equal to it.
pub fn solve_dual(mu: &DiscreteMeasure, nu: &DiscreteMeasure, s: f64, m: &MetricSpec) -> Result<DualSolution> {
    let c = cost_matrix(&mu.support, &nu.support, s, m)?;
    let plan = solve_primal(mu, nu, &c)?;
    let points = joint_support(mu, nu);
    let cols = nu.kept();
    let ys: Vec<Point> = cols.iter().map(|&j| nu.support[j]).collect();
    let v: Vec<f64> = cols.iter().map(|&j| plan.col_potential[j]).collect();
    let values = if ys.is_empty() {
        vec![0.0; points.len()]
    } else {
        c_transform_upper(&v, &cost_matrix(&points, &ys, s, m)?)
    };
    let potential = KantorovichPotential { points, values, s, metric: m.clone() };
    let integral = |meas: &DiscreteMeasure| -> f64 {
        meas.support
            .iter()
            .zip(&meas.weights)
            .map(|(x, w)| w * potential.at(x).unwrap_or(0.0))
            .sum()
    };
    let value = integral(nu) - integral(mu);
    Ok(DualSolution { potential, value, plan })
}

/// `W_s(μ, ν)` for the metric `m`.
pub fn w_s(mu: &DiscreteMeasure, nu: &DiscreteMeasure, s: f64, m: &MetricSpec) -> Result<f64> {
    let c = cost_matrix(&mu.support, &nu.support, s, m)?;
    Ok(solve_primal(mu, nu, &c)?.value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalPair {
    pub value: f64,
    pub first: DiscreteMeasure,
    pub second: DiscreteMeasure,
}

/// Per-atom projection of `mu` onto the boundary: each atom is moved to its
/// nearest boundary point. The coupling is optimal against any measure on
/// the boundary, since each atom pays at least its distance to the boundary.
pub fn boundary_projection(grid: &DomainGrid, mu: &DiscreteMeasure) -> DiscreteMeasure {
    let support = mu.support.iter().map(|x| grid.shape().nearest_boundary(x).1).collect();
    DiscreteMeasure { support, weights: mu.weights.clone(), mass: mu.mass }
}

/// `inf_{ν ∈ P(∂U)} W_s(μ, ν) = Σ μ(x) dist(x, ∂U)^s` (Euclidean cost).
pub fn boundary_transport_cost(grid: &DomainGrid, mu: &DiscreteMeasure, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(mu
        .support
        .iter()
        .zip(&mu.weights)
        .map(|(x, w)| w * grid.shape().boundary_distance(x).powf(s))
        .sum())
}

/// `sup_μ inf_{ν ∈ P(∂U)} W_s(μ, ν)` over probability measures on the grid:
/// `R^s` with `R` the grid inradius, attained by the Dirac mass at the
/// incenter and its nearest boundary point.
pub fn dirichlet_sup(grid: &DomainGrid, s: f64) -> Result<ExtremalPair> {
    check_s(s)?;
    let r = inradius(grid)?;
    let foot = grid.shape().nearest_boundary(&r.incenter).1;
    Ok(ExtremalPair {
        value: r.value.powf(s),
        first: DiscreteMeasure::dirac(r.incenter),
        second: DiscreteMeasure::dirac(foot),
    })
}

/// `max W_s(σ⁺, σ⁻)` over probability measures on the closure nodes:
/// `diam_d^s`, attained by Dirac masses at the diameter pair. No coupling
/// costs more than the largest entry of the cost matrix.
pub fn neumann_max(grid: &DomainGrid, s: f64, m: &MetricSpec) -> Result<ExtremalPair> {
    check_s(s)?;
    let d = diameter(grid, m)?;
    Ok(ExtremalPair {
        value: d.value.powf(s),
        first: DiscreteMeasure::dirac(d.pair.0),
        second: DiscreteMeasure::dirac(d.pair.1),
    })
}
