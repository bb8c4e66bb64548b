//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use fracp::asymptotics::{compare_neumann, density_pair, run_limit_experiment, trial_function, trial_quotient};
use fracp::discretization::{h_bilinear, h_infty, op_fractional_plap, op_neumann_derivative, FormParams, GridFunction};
use fracp::eigen::{dense_p2_oracle, dense_p2_spectrum, minimize_rayleigh, EigenProblemSpec, EigenResult, EigenVariant};
use fracp::geometry::{diameter, inradius, DomainGrid, DomainShape, MetricSpec, Point};
use fracp::transport::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

/// An eigen solve kept for the cross-criterion checks.
struct Run<'g> {
    grid: &'g DomainGrid,
    variant: EigenVariant,
    s: f64,
    p: f64,
    result: EigenResult,
}

fn unit_square(h: f64, m: &MetricSpec, buffer: Option<f64>) -> DomainGrid {
    DomainGrid::new(DomainShape::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, h, m, buffer).unwrap()
}

fn l_shape(h: f64) -> DomainGrid {
    let shape = DomainShape::LShape { origin: [0.0, 0.0], size: 2.0, notch: 1.0 };
    DomainGrid::new(shape, h, &MetricSpec::euclidean(2), None).unwrap()
}

fn spec<'g>(g: &'g DomainGrid, v: EigenVariant, s: f64, p: f64, m: &MetricSpec) -> EigenProblemSpec<'g> {
    EigenProblemSpec::new(v, FormParams::new(s, p, m.clone()).unwrap(), g)
}

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect()
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

/// Probability measure on up to `max_atoms` random closure nodes.
fn random_grid_measure(rng: &mut ChaCha8Rng, g: &DomainGrid, max_atoms: usize) -> DiscreteMeasure {
    let k = rng.gen_range(1..=max_atoms);
    let pts = (0..k).map(|_| g.node(rng.gen_range(0..g.n_closure()))).collect();
    DiscreteMeasure::new(pts, random_weights(rng, k)).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let e = MetricSpec::euclidean(2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let s = [0.3, 0.5, 0.8][k % 3];
        let (m, n) = (rng.gen_range(1..=40), rng.gen_range(1..=40));
        let mu = DiscreteMeasure::new(random_points(&mut rng, m), random_weights(&mut rng, m)).unwrap();
        let nu = DiscreteMeasure::new(random_points(&mut rng, n), random_weights(&mut rng, n)).unwrap();
        let d = solve_dual(&mu, &nu, s, &e).unwrap();
        worst = worst.max((d.plan.value - d.value).abs() / (1.0 + d.plan.value));
    }
    let secs = t0.elapsed().as_secs_f64();
    Outcome::new(worst <= 1e-7 && secs <= 10.0, format!("max relative gap {worst:.2e}, {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    let e = MetricSpec::euclidean(2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut triple, mut fixed, mut holder) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..100 {
        let s = [0.3, 0.5, 0.8][k % 3];
        let (nx, ny) = (rng.gen_range(1..=50), rng.gen_range(1..=50));
        let xs = random_points(&mut rng, nx);
        let ys = random_points(&mut rng, ny);
        let psi: Vec<f64> = (0..nx).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let c = cost_matrix(&xs, &ys, s, &e).unwrap();
        let once = c_transform_lower(&psi, &c);
        let thrice = c_transform_lower(&c_transform_upper(&once, &c), &c);
        triple = triple.max(sup_diff(&once, &thrice));

        let cxx = cost_matrix(&xs, &xs, s, &e).unwrap();
        let convex = c_transform_lower(&psi, &cxx);
        fixed = fixed.max(sup_diff(&convex, &c_transform_lower(&convex, &cxx)));
        let pot = KantorovichPotential { points: xs, values: convex, s, metric: e.clone() };
        holder = holder.max(pot.holder_constant() - 1.0);
    }
    Outcome::new(
        triple <= 1e-12 && fixed <= 1e-12 && holder <= 1e-12,
        format!("triple {triple:.1e}, fixed point {fixed:.1e}, Hölder excess {holder:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let h = 1.0 / 64.0;
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, g) in [("square", unit_square(h, &MetricSpec::euclidean(2), None)), ("l_shape", l_shape(h))] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = inradius(&g).unwrap().value;
        let (mut exact, mut worst, mut lp_worst, mut lp_dev) = (true, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0f64);
        for s in [0.3, 0.5, 0.8] {
            let bound = r.powf(s);
            exact &= dirichlet_sup(&g, s).unwrap().value == bound;
            for k in 0..1000 {
                let mu = random_grid_measure(&mut rng, &g, 20);
                let cost = boundary_transport_cost(&g, &mu, s).unwrap();
                worst = worst.max(cost - bound);
                if k % 5 == 0 {
                    let lp = w_s(&mu, &boundary_projection(&g, &mu), s, &MetricSpec::euclidean(2)).unwrap();
                    lp_worst = lp_worst.max(lp - bound);
                    lp_dev = lp_dev.max((lp - cost).abs());
                }
            }
        }
        pass &= exact && worst <= 1e-9 && lp_worst <= 1e-9 && lp_dev <= 1e-12;
        detail.push(format!(
            "{name}: R={r:.5}, exact={exact}, max excess {worst:.2e} (LP {lp_worst:.2e}, LP vs projection {lp_dev:.1e})"
        ));
    }
    Outcome::new(pass, detail.join("; "))
}

fn criterion_4() -> Outcome {
    let metrics = [MetricSpec::euclidean(2), MetricSpec::weighted_euclidean(2, vec![2.0, 0.5, 0.5, 1.0]).unwrap()];
    let mut pass = true;
    let mut detail = Vec::new();
    for (k, m) in metrics.iter().enumerate() {
        let g = unit_square(1.0 / 32.0, m, None);
        let mut rng = ChaCha8Rng::seed_from_u64(4 + k as u64);
        let s = 0.5;
        let d = diameter(&g, m).unwrap().value;
        let top = neumann_max(&g, s, m).unwrap();
        let attained = w_s(&top.first, &top.second, s, m).unwrap();
        let mut excess = f64::NEG_INFINITY;
        for _ in 0..500 {
            let a = random_grid_measure(&mut rng, &g, 15);
            let b = random_grid_measure(&mut rng, &g, 15);
            excess = excess.max(w_s(&a, &b, s, m).unwrap() - d.powf(s));
        }
        let doubled = neumann_max(&g, s, &m.scaled(2.0).unwrap()).unwrap().value;
        let scale_err = (doubled / top.value - 2f64.powf(s)).abs() / 2f64.powf(s);
        let ok = top.value == d.powf(s)
            && (attained - top.value).abs() <= 1e-15 * top.value
            && excess <= 1e-9
            && scale_err <= 4.0 * f64::EPSILON;
        pass &= ok;
        detail.push(format!("metric {k}: max excess {excess:.2e}, scaling error {scale_err:.1e}"));
    }
    Outcome::new(pass, detail.join("; "))
}

fn criterion_5() -> Outcome {
    let e = MetricSpec::euclidean(2);
    let weighted = MetricSpec::weighted_euclidean(2, vec![2.0, 0.5, 0.5, 1.0]).unwrap();
    let line = DomainGrid::new(DomainShape::Interval { a: 0.0, b: 1.0 }, 1.0 / 21.0, &MetricSpec::euclidean(1), None)
        .unwrap();
    let sq = unit_square(1.0 / 6.0, &e, Some(0.4));
    let sqw = unit_square(1.0 / 6.0, &weighted, Some(0.4));
    let cases: [(&DomainGrid, MetricSpec); 3] =
        [(&line, MetricSpec::euclidean(1)), (&sq, e.clone()), (&sqw, weighted.clone())];
    let mut worst = 0.0f64;
    let mut too_big = false;
    for (g, m) in &cases {
        too_big |= g.len() > 300;
        for v in EigenVariant::ALL {
            if v == EigenVariant::Dirichlet && !m.is_euclidean() {
                continue;
            }
            let mut sp = spec(g, v, 0.5, 2.0, m);
            sp.solver.tol = 1e-13;
            let got = minimize_rayleigh(&sp).unwrap().lambda;
            let want = dense_p2_oracle(&sp).unwrap().lambda;
            worst = worst.max((got - want).abs() / want);
        }
    }
    let mut simple = true;
    for v in [EigenVariant::NeumannSeminorm, EigenVariant::NeumannNonlocal] {
        let sp = dense_p2_spectrum(&spec(&sq, v, 0.5, 2.0, &e)).unwrap();
        let top = *sp.values.last().unwrap();
        let zeros = sp.values.iter().filter(|x| x.abs() <= 1e-10 * top).count();
        let c = sp.vectors.column(0);
        let mean = c.mean();
        let dev = c.iter().fold(0.0f64, |a, x| a.max((x - mean).abs()));
        simple &= zeros == 1 && sp.values[0].abs() <= 1e-10 * top && dev <= 1e-8 * mean.abs();
    }
    Outcome::new(
        worst <= 1e-6 && simple && !too_big,
        format!("max relative deviation {worst:.2e}; zero eigenvalue simple with constant vector: {simple}"),
    )
}

fn criterion_6<'g>(g: &'g DomainGrid, runs: &mut Vec<Run<'g>>) -> Outcome {
    let e = MetricSpec::euclidean(2);
    let p_list = [4.0, 8.0, 16.0, 32.0, 64.0];
    let mut pass = true;
    let mut detail = Vec::new();
    for v in EigenVariant::ALL {
        let t0 = Instant::now();
        let rep = run_limit_experiment(&spec(g, v, 0.5, p_list[0], &e), &p_list).unwrap();
        let secs = t0.elapsed().as_secs_f64();
        let trend = rep.trend_holds(8.0) == Some(true);
        let last = rep.rows.last().unwrap().rel_err;
        pass &= trend && last <= 0.25 && secs <= 300.0;
        let errs: Vec<String> = rep.rows.iter().map(|r| format!("{:.4}", r.rel_err)).collect();
        detail.push(format!("{v}: rel_err [{}], trend {trend}, {secs:.0} s", errs.join(", ")));
        for (r, &p) in rep.results.into_iter().zip(&p_list) {
            runs.push(Run { grid: g, variant: v, s: 0.5, p, result: r });
        }
    }
    Outcome::new(pass, detail.join("; "))
}

fn criterion_7<'g>(grids: &'g [(f64, DomainGrid)], runs: &mut Vec<Run<'g>>) -> Outcome {
    let e = MetricSpec::euclidean(2);
    let p_list = [4.0, 8.0, 16.0, 32.0];
    let mut worst = 0.0f64;
    let mut count = 0;
    for (_, g) in grids {
        for s in [0.3, 0.5, 0.8] {
            let sp = spec(g, EigenVariant::NeumannSeminorm, s, p_list[0], &e);
            for c in compare_neumann(&sp, &p_list).unwrap() {
                worst = worst.max(c.ratio());
                count += 1;
                runs.push(Run { grid: g, variant: EigenVariant::NeumannSeminorm, s, p: c.p, result: c.seminorm });
                runs.push(Run { grid: g, variant: EigenVariant::NeumannNonlocal, s, p: c.p, result: c.nonlocal });
            }
        }
    }
    Outcome::new(worst <= 1.0 + 1e-6, format!("{count} pairs, max λ^N/(2λ) = {worst:.6}"))
}

fn criterion_8() -> Outcome {
    let e = MetricSpec::euclidean(2);
    let g = unit_square(1.0 / 31.0, &e, None);
    let w = g.cell_measure();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut div, mut ibp) = (0.0f64, 0.0f64);
    for k in 0..50 {
        let u = GridFunction::new(&g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let v = GridFunction::new(&g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let (s, p) = ([0.3, 0.5, 0.8][k % 3], [2.0, 3.0, 4.5, 1.5][k % 4]);
        let lap = op_fractional_plap(&g, &u, s, p, &e).unwrap();
        let nd = op_neumann_derivative(&g, &u, s, p, &e).unwrap();
        let (l, n) = (lap.values(), nd.values());
        let inner: f64 = (0..g.n_interior()).map(|x| l[x] * w).sum();
        let outer: f64 = (g.n_interior()..g.len()).map(|x| n[x] * w).sum();
        let scale: f64 = (0..g.len()).map(|x| (l[x].abs() + n[x].abs()) * w).sum();
        div = div.max((inner + outer).abs() / scale);
        let lhs = 0.5 * h_bilinear(&g, &u, &v, s, p, &e).unwrap();
        let rhs: f64 = (0..g.len()).map(|x| v.values()[x] * (l[x] + n[x]) * w).sum();
        ibp = ibp.max((lhs - rhs).abs() / lhs.abs().max(scale));
    }
    Outcome::new(
        div <= 1e-10 && ibp <= 1e-10 && g.n_interior() == 900,
        format!("divergence {div:.1e}, integration by parts {ibp:.1e}"),
    )
}

fn criterion_9(runs: &[Run]) -> Outcome {
    let e = MetricSpec::euclidean(2);
    let (mut h_excess, mut mid, mut bound_fail) = (f64::NEG_INFINITY, true, 0usize);
    let mut seen: BTreeMap<(usize, u64), ()> = BTreeMap::new();
    let mut checked = 0;
    for r in runs.iter().filter(|r| r.variant.is_neumann()) {
        let g = r.grid;
        if seen.insert((g as *const DomainGrid as usize, r.s.to_bits()), ()).is_none() {
            let u = trial_function(g, &e, r.s).unwrap();
            let d = diameter(g, &e).unwrap().value;
            h_excess = h_excess.max(h_infty(g, &u, r.s, &e).unwrap() / (2.0 / d.powf(r.s)) - 1.0);
            let closure = &u.values()[..g.n_closure()];
            let sup = closure.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let inf = closure.iter().cloned().fold(f64::INFINITY, f64::min);
            mid &= (sup + inf).abs() <= 2.0 * g.h().powf(r.s);
        }
        let q = trial_quotient(&spec(g, r.variant, r.s, r.p, &e)).unwrap();
        if r.result.lambda > q.lambda * (1.0 + 1e-12) {
            bound_fail += 1;
        }
        checked += 1;
    }
    Outcome::new(
        h_excess <= 1e-9 && mid && bound_fail == 0,
        format!("H_∞ excess {h_excess:.1e}, midrange ok {mid}, {bound_fail}/{checked} eigenvalues above the trial quotient"),
    )
}

fn criterion_10(runs: &[Run]) -> Outcome {
    let (mut pairing, mut mass, mut mean) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    let (mut rows, mut skipped) = (0, 0);
    for r in runs {
        if !r.result.converged {
            skipped += 1;
            continue;
        }
        let d = density_pair(r.grid, &r.result.eigenfunction, r.p).unwrap();
        pairing = pairing.max((d.pairing - 1.0).abs());
        mass = mass.max(d.mass / d.mass_bound - 1.0);
        if r.variant.is_neumann() {
            mean = mean.max(d.mean.abs());
        }
        rows += 1;
    }
    let tol = fracp::eigen::SolverParams::default().tol;
    Outcome::new(
        rows > 0 && pairing <= 1e-12 && mass <= 1e-9 && mean <= 10.0 * tol,
        format!(
            "{rows} converged rows ({skipped} not converged): pairing {pairing:.1e}, mass excess {mass:.1e}, mean {mean:.1e}"
        ),
    )
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn criterion_11() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let base = r#"
seed = 11

[domain]
shape = "l_shape"
size = 1.0
notch = 0.5
h = 0.125

[problem]
variant = "VARIANT"
s = 0.4
p_list = [2.0, 5.0, 9.0]

[transport]
source = "mu.csv"
target = "nu.csv"
"#;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in ["mu.csv", "nu.csv"] {
        let n = 30;
        let mu = DiscreteMeasure::new(random_points(&mut rng, n), random_weights(&mut rng, n)).unwrap();
        fracp_cli::output::write_measure_csv(&dir.path().join(name), &mu).unwrap();
    }
    let mut pass = true;
    let mut compared = 0;
    for variant in EigenVariant::ALL {
        let cfg = dir.path().join(format!("{variant}.toml"));
        fs::write(&cfg, base.replace("VARIANT", variant.name())).unwrap();
        for cmd in ["geometry", "eig", "transport", "limits"] {
            let mut trees = Vec::new();
            for (k, workers) in [1, 4, 1].iter().enumerate() {
                let out = dir.path().join(format!("{variant}-{cmd}-{k}"));
                let status = Command::new(env!("CARGO_BIN_EXE_fracp"))
                    .arg(cmd)
                    .arg("--config")
                    .arg(&cfg)
                    .arg("--out")
                    .arg(&out)
                    .arg("--seed")
                    .arg("5")
                    .env("FRACP_WORKERS", workers.to_string())
                    .status()
                    .unwrap();
                pass &= status.success();
                trees.push(read_tree(&out));
            }
            pass &= !trees[0].is_empty() && trees.iter().all(|t| *t == trees[0]);
            compared += trees[0].len();
        }
    }
    Outcome::new(pass, format!("{compared} output files identical across reruns with 1 and 4 workers"))
}

fn main() {
    let e = MetricSpec::euclidean(2);
    let grids: Vec<(f64, DomainGrid)> =
        [1.0 / 16.0, 1.0 / 32.0].iter().map(|&h| (h, unit_square(h, &e, None))).collect();
    let mut runs: Vec<Run> = Vec::new();

    let mut outcomes: Vec<(usize, &str, Outcome)> = vec![
        (1, "duality", criterion_1()),
        (2, "c-transform calculus", criterion_2()),
        (3, "boundary transport extreme", criterion_3()),
        (4, "diameter transport extreme", criterion_4()),
        (5, "p = 2 dense equivalence", criterion_5()),
    ];
    outcomes.push((6, "large-p limits", criterion_6(&grids[1].1, &mut runs)));
    outcomes.push((7, "seminorm vs nonlocal Neumann", criterion_7(&grids, &mut runs)));
    outcomes.push((8, "divergence and integration by parts", criterion_8()));
    outcomes.push((9, "trial function", criterion_9(&runs)));
    outcomes.push((10, "minimizer pair identities", criterion_10(&runs)));
    outcomes.push((11, "determinism", criterion_11()));

    let mut failed = 0;
    for (k, name, o) in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} [{tag}] {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
