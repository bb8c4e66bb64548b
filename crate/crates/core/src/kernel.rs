//! Pair kernels on a grid and the log-domain evaluation of p-power pair sums
//! shared by the forms and the eigensolver.

use crate::geometry::{DomainGrid, MetricSpec};
use crate::parallel::map_blocks;

/// `f(d(x_i, x_j))` for node pairs, tabulated by lattice offset. All supported
/// metrics are norms, so lattice pairs only depend on their offset.
pub(crate) struct PairKernel<'g, F> {
    grid: &'g DomainGrid,
    metric: &'g MetricSpec,
    f: F,
    span: [i64; 2],
    table: Vec<f64>,
}

impl<'g, F: Fn(f64) -> f64 + Sync> PairKernel<'g, F> {
    pub(crate) fn new(grid: &'g DomainGrid, metric: &'g MetricSpec, f: F) -> Self {
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        for i in 0..grid.len() {
            if let Some(l) = grid.lattice_index(i) {
                for a in 0..2 {
                    lo[a] = lo[a].min(l[a]);
                    hi[a] = hi[a].max(l[a]);
                }
            }
        }
        if lo[0] > hi[0] {
            return PairKernel { grid, metric, f, span: [0, 0], table: Vec::new() };
        }
        let span = [hi[0] - lo[0], hi[1] - lo[1]];
        let ny = 2 * span[1] + 1;
        let h = grid.h();
        let mut table = vec![0.0; ((2 * span[0] + 1) * ny) as usize];
        for dx in -span[0]..=span[0] {
            for dy in -span[1]..=span[1] {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let d = metric.norm(&[dx as f64 * h, dy as f64 * h]);
                table[((dx + span[0]) * ny + dy + span[1]) as usize] = f(d);
            }
        }
        PairKernel { grid, metric, f, span, table }
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        match (self.grid.lattice_index(i), self.grid.lattice_index(j)) {
            (Some(a), Some(b)) => {
                let dx = b[0] - a[0] + self.span[0];
                let dy = b[1] - a[1] + self.span[1];
                self.table[(dx * (2 * self.span[1] + 1) + dy) as usize]
            }
            _ => (self.f)(self.metric.eval(&self.grid.node(i), &self.grid.node(j))),
        }
    }

}

/// Surface measure of the unit sphere in `R^n`, `n` in {1, 2}.
pub(crate) fn unit_sphere_measure(n: usize) -> f64 {
    if n == 1 {
        2.0
    } else {
        2.0 * std::f64::consts::PI
    }
}

/// `a^e` with a fast path for small integer exponents.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Power {
    e: f64,
    int: Option<i32>,
}

impl Power {
    pub(crate) fn new(e: f64) -> Self {
        let int = (e.fract() == 0.0 && e.abs() <= 4096.0).then_some(e as i32);
        Power { e, int }
    }

    #[inline]
    pub(crate) fn of(&self, a: f64) -> f64 {
        match self.int {
            Some(n) => a.powi(n),
            None => a.powf(self.e),
        }
    }
}

/// Value and derivatives of `ln E(u)` for a pair sum
/// `E(u) = sum_{pairs} k_ij^p |u_i - u_j|^p + sum_i o_i^p |u_i|^p`.
#[derive(Clone, Debug)]
pub(crate) struct LogEval {
    pub ln_value: f64,
    /// Gradient of `ln E`.
    pub grad: Vec<f64>,
    /// Diagonal of the Hessian of `E`, divided by `E`.
    pub hess: Vec<f64>,
}

/// Pair-sum energy over unknowns `0..n_unknowns`. Row `i < n_rows` couples
/// `i` with every `j > i`; unknowns at or beyond `n_rows` never couple with
/// each other. Each unordered pair stores `k_ij = c_ij^(1/p)` so that the
/// summand is `(k_ij |u_i - u_j|)^p`, which keeps large `p` in range.
pub(crate) struct PairSystem {
    n_rows: usize,
    n_unknowns: usize,
    p: f64,
    row_start: Vec<usize>,
    k: Vec<f64>,
    outer: Vec<f64>,
    k_max: f64,
    outer_max: f64,
    block: usize,
}

struct BlockSums {
    sum: f64,
    a_max: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl PairSystem {
    pub(crate) fn build(
        n_rows: usize,
        n_unknowns: usize,
        p: f64,
        block: usize,
        coef_root: impl Fn(usize, usize) -> f64,
        outer: Vec<f64>,
    ) -> Self {
        let mut row_start = Vec::with_capacity(n_rows + 1);
        let mut k = Vec::new();
        row_start.push(0);
        for i in 0..n_rows {
            for j in (i + 1)..n_unknowns {
                k.push(coef_root(i, j));
            }
            row_start.push(k.len());
        }
        let k_max = k.iter().cloned().fold(0.0, f64::max);
        let outer_max = outer.iter().cloned().fold(0.0, f64::max);
        PairSystem { n_rows, n_unknowns, p, row_start, k, outer, k_max, outer_max, block }
    }

    pub(crate) fn n_unknowns(&self) -> usize {
        self.n_unknowns
    }

    fn pass(&self, u: &[f64], inv_b: f64, with_grad: bool) -> Vec<BlockSums> {
        let pm1 = Power::new(self.p - 1.0);
        let pm2 = Power::new(self.p - 2.0);
        let n = self.n_unknowns;
        map_blocks(self.n_rows, self.block, |rows| {
            let mut out = BlockSums {
                sum: 0.0,
                a_max: 0.0,
                grad: if with_grad { vec![0.0; n] } else { Vec::new() },
                hess: if with_grad { vec![0.0; n] } else { Vec::new() },
            };
            for i in rows {
                let ui = u[i];
                let ks = &self.k[self.row_start[i]..self.row_start[i + 1]];
                let us = &u[i + 1..n];
                let mut s = 0.0;
                let mut amax = out.a_max;
                if with_grad {
                    let mut gi = 0.0;
                    let mut hi = 0.0;
                    for (off, (&kij, &uj)) in ks.iter().zip(us).enumerate() {
                        let d = ui - uj;
                        let a = d.abs() * kij * inv_b;
                        if a == 0.0 {
                            continue;
                        }
                        amax = amax.max(a);
                        let g2 = pm2.of(a);
                        let g = g2 * a;
                        s += g * a;
                        let gk = if d > 0.0 { g * kij } else { -g * kij };
                        let hk = g2 * kij * kij;
                        gi += gk;
                        hi += hk;
                        out.grad[i + 1 + off] -= gk;
                        out.hess[i + 1 + off] += hk;
                    }
                    if let Some(&o) = self.outer.get(i) {
                        let a = ui.abs() * o * inv_b;
                        if a > 0.0 {
                            amax = amax.max(a);
                            let g2 = pm2.of(a);
                            let g = g2 * a;
                            s += g * a;
                            gi += if ui > 0.0 { g * o } else { -g * o };
                            hi += g2 * o * o;
                        }
                    }
                    out.grad[i] += gi;
                    out.hess[i] += hi;
                } else {
                    for (&kij, &uj) in ks.iter().zip(us) {
                        let a = (ui - uj).abs() * kij * inv_b;
                        if a == 0.0 {
                            continue;
                        }
                        amax = amax.max(a);
                        s += pm1.of(a) * a;
                    }
                    if let Some(&o) = self.outer.get(i) {
                        let a = ui.abs() * o * inv_b;
                        if a > 0.0 {
                            amax = amax.max(a);
                            s += pm1.of(a) * a;
                        }
                    }
                }
                out.sum += s;
                out.a_max = amax;
            }
            out
        })
    }

    /// A-priori upper bound on every `k_ij |u_i - u_j|` and `o_i |u_i|`.
    fn shift(&self, u: &[f64]) -> f64 {
        let (mut lo, mut hi, mut abs) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for &v in u {
            lo = lo.min(v);
            hi = hi.max(v);
            abs = abs.max(v.abs());
        }
        ((hi - lo) * self.k_max).max(abs * self.outer_max)
    }

    fn run(&self, u: &[f64], with_grad: bool) -> (f64, f64, Vec<BlockSums>) {
        assert_eq!(u.len(), self.n_unknowns);
        let mut b = self.shift(u);
        if !(b > 0.0) {
            return (0.0, 0.0, Vec::new());
        }
        loop {
            let blocks = self.pass(u, 1.0 / b, with_grad);
            let sum: f64 = blocks.iter().map(|x| x.sum).sum();
            let a_max = blocks.iter().map(|x| x.a_max).fold(0.0, f64::max);
            // rescale around the largest term when the a-priori shift was too loose
            if a_max > 0.0 && a_max < 0.5 && sum < 1e-250 {
                b *= a_max;
                continue;
            }
            return (b, sum, blocks);
        }
    }

    /// `ln E(u)`; `-inf` when every summand vanishes.
    pub(crate) fn ln_value(&self, u: &[f64]) -> f64 {
        let (b, sum, _) = self.run(u, false);
        if sum > 0.0 {
            self.p * b.ln() + sum.ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    pub(crate) fn eval(&self, u: &[f64]) -> LogEval {
        let n = self.n_unknowns;
        let (b, sum, blocks) = self.run(u, true);
        if !(sum > 0.0) {
            return LogEval { ln_value: f64::NEG_INFINITY, grad: vec![0.0; n], hess: vec![0.0; n] };
        }
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];
        for blk in &blocks {
            for (g, x) in grad.iter_mut().zip(&blk.grad) {
                *g += x;
            }
            for (g, x) in hess.iter_mut().zip(&blk.hess) {
                *g += x;
            }
        }
        let p = self.p;
        let gs = p / (b * sum);
        let hs = p * (p - 1.0) / (b * b * sum);
        grad.iter_mut().for_each(|g| *g *= gs);
        hess.iter_mut().for_each(|g| *g *= hs);
        LogEval { ln_value: p * b.ln() + sum.ln(), grad, hess }
    }
}

/// `ln sum_i |u_i|^p w_i` over the first `n` entries, with derivatives.
pub(crate) fn ln_lp_power(u: &[f64], w: &[f64], p: f64, with_grad: bool) -> LogEval {
    let n = w.len();
    let m = u[..n].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut grad = vec![0.0; u.len()];
    let mut hess = vec![0.0; u.len()];
    if m == 0.0 {
        return LogEval { ln_value: f64::NEG_INFINITY, grad, hess };
    }
    let pm1 = Power::new(p - 1.0);
    let mut sum = 0.0;
    for i in 0..n {
        let a = u[i].abs() / m;
        if a == 0.0 {
            continue;
        }
        let g = pm1.of(a);
        sum += g * a * w[i];
        if with_grad {
            grad[i] = if u[i] > 0.0 { g * w[i] } else { -g * w[i] };
            hess[i] = g / a * w[i];
        }
    }
    if with_grad {
        let gs = p / (m * sum);
        let hs = p * (p - 1.0) / (m * m * sum);
        grad.iter_mut().for_each(|g| *g *= gs);
        hess.iter_mut().for_each(|g| *g *= hs);
    }
    LogEval { ln_value: p * m.ln() + sum.ln(), grad, hess }
}
