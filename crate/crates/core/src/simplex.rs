//! Transportation simplex on the bipartite polytope `{x >= 0 : row sums = a,
//! column sums = b}` with Bland's pivoting rule (smallest index enters,
//! smallest index leaves among ratio ties), which rules out cycling on
//! degenerate instances.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{degenerate, Result};

pub(crate) struct Solution {
    pub flow: DMatrix<f64>,
    /// Basic cells, `m + n - 1` of them, forming a spanning tree.
    pub basis: Vec<(usize, usize)>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Node ids: rows `0..m`, columns `m..m+n`.
fn potentials(m: usize, n: usize, c: &DMatrix<f64>, adj: &[Vec<(usize, usize)>]) -> (Vec<f64>, Vec<f64>) {
    let mut pot = vec![f64::NAN; m + n];
    let mut queue = VecDeque::new();
    pot[0] = 0.0;
    queue.push_back(0);
    while let Some(a) = queue.pop_front() {
        for &(b, _) in &adj[a] {
            if pot[b].is_nan() {
                let (i, j) = if a < m { (a, b - m) } else { (b, a - m) };
                pot[b] = c[(i, j)] - pot[a];
                queue.push_back(b);
            }
        }
    }
    (pot[..m].to_vec(), pot[m..].to_vec())
}

fn adjacency(m: usize, n: usize, basis: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); m + n];
    for (k, &(i, j)) in basis.iter().enumerate() {
        adj[i].push((m + j, k));
        adj[m + j].push((i, k));
    }
    adj
}

/// Basis positions along the tree path from row `i` to column `j`.
fn tree_path(m: usize, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    let mut via = vec![usize::MAX; adj.len()];
    prev[i] = i;
    let mut queue = VecDeque::from([i]);
    while let Some(a) = queue.pop_front() {
        if a == m + j {
            break;
        }
        for &(b, k) in &adj[a] {
            if prev[b] == usize::MAX {
                prev[b] = a;
                via[b] = k;
                queue.push_back(b);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = m + j;
    while node != i {
        path.push(via[node]);
        node = prev[node];
    }
    path.reverse();
    path
}

/// Solve `min <c, x>` over plans with marginals `a` (rows) and `b`
/// (columns). Both must be positive with equal sums up to rounding; the last
/// column absorbs the rounding difference.
pub(crate) fn solve(a: &[f64], b: &[f64], c: &DMatrix<f64>) -> Result<Solution> {
    let (m, n) = (a.len(), b.len());
    let mut flow = DMatrix::<f64>::zeros(m, n);
    let mut basis = Vec::with_capacity(m + n - 1);

    // north-west corner start: a staircase of exactly m + n - 1 cells
    let mut ra = a.to_vec();
    let mut rb = b.to_vec();
    rb[n - 1] += a.iter().sum::<f64>() - b.iter().sum::<f64>();
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]).max(0.0);
        flow[(i, j)] = x;
        basis.push((i, j));
        ra[i] -= x;
        rb[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && ra[i] <= rb[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }

    let cmax = c.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let eps = 1e-13 * (1.0 + cmax);
    let limit = 50 * (m + n) * (m + n) * (m * n).max(1);
    let mut in_basis = DMatrix::<bool>::from_element(m, n, false);
    for &(i, j) in &basis {
        in_basis[(i, j)] = true;
    }
    for _ in 0..limit {
        let adj = adjacency(m, n, &basis);
        let (u, v) = potentials(m, n, c, &adj);
        let entering = (0..m * n)
            .map(|k| (k / n, k % n))
            .find(|&(i, j)| !in_basis[(i, j)] && c[(i, j)] - u[i] - v[j] < -eps);
        let Some((ei, ej)) = entering else {
            return Ok(Solution { flow, basis, u, v });
        };
        let path = tree_path(m, &adj, ei, ej);
        // odd positions along the row-to-column path lose flow
        let mut leave = usize::MAX;
        let mut theta = f64::INFINITY;
        for (t, &k) in path.iter().enumerate() {
            if t % 2 == 0 {
                let (i, j) = basis[k];
                let x = flow[(i, j)];
                let better = x < theta
                    || (x == theta && i * n + j < basis[leave].0 * n + basis[leave].1);
                if better {
                    theta = x;
                    leave = k;
                }
            }
        }
        for (t, &k) in path.iter().enumerate() {
            let (i, j) = basis[k];
            if t % 2 == 0 {
                flow[(i, j)] -= theta;
            } else {
                flow[(i, j)] += theta;
            }
        }
        let (li, lj) = basis[leave];
        flow[(li, lj)] = 0.0;
        in_basis[(li, lj)] = false;
        flow[(ei, ej)] = theta;
        in_basis[(ei, ej)] = true;
        basis[leave] = (ei, ej);
    }
    Err(degenerate("transportation simplex exceeded its pivot limit"))
}
