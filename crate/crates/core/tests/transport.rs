use fracp::geometry::{DomainGrid, DomainShape, MetricSpec, Point};
use fracp::transport::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect()
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> DiscreteMeasure {
    let pts = random_points(rng, n);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteMeasure::new(pts, raw.iter().map(|w| w / total).collect()).unwrap()
}

/// Optimal assignment by exhaustive search over permutations.
fn best_assignment(c: &nalgebra::DMatrix<f64>) -> f64 {
    fn go(c: &nalgebra::DMatrix<f64>, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == c.nrows() {
            *best = best.min(acc);
            return;
        }
        for j in 0..c.ncols() {
            if !used[j] {
                used[j] = true;
                go(c, row + 1, used, acc + c[(row, j)], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(c, 0, &mut vec![false; c.ncols()], 0.0, &mut best);
    best
}

#[test]
fn two_by_two_vertex_enumeration() {
    let e = MetricSpec::euclidean(2);
    let mu = DiscreteMeasure::new(vec![[0.0, 0.0], [1.0, 0.0]], vec![0.3, 0.7]).unwrap();
    let nu = DiscreteMeasure::new(vec![[0.2, 0.0], [0.9, 0.0]], vec![0.6, 0.4]).unwrap();
    let s = 0.5;
    let c = |a: f64, b: f64| (a - b).abs().powf(s);
    // plans are parametrised by x = π_11 in [0, 0.3]; the vertices are the endpoints
    let plan_value = |x: f64| {
        x * c(0.0, 0.2) + (0.3 - x) * c(0.0, 0.9) + (0.6 - x) * c(1.0, 0.2) + (0.1 + x) * c(1.0, 0.9)
    };
    let want = plan_value(0.0).min(plan_value(0.3));
    let got = w_s(&mu, &nu, s, &e).unwrap();
    assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    let dual = solve_dual(&mu, &nu, s, &e).unwrap();
    assert!((dual.value - want).abs() < 1e-14);
}

#[test]
fn uniform_instances_match_assignment_search() {
    let e = MetricSpec::euclidean(2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=6 {
        for _ in 0..5 {
            let xs = random_points(&mut rng, n);
            let ys = random_points(&mut rng, n);
            let w = vec![1.0 / n as f64; n];
            let mu = DiscreteMeasure::new(xs.clone(), w.clone()).unwrap();
            let nu = DiscreteMeasure::new(ys.clone(), w).unwrap();
            let c = cost_matrix(&xs, &ys, 0.5, &e).unwrap();
            let want = best_assignment(&c) / n as f64;
            let got = solve_primal(&mu, &nu, &c).unwrap().value;
            assert!((got - want).abs() <= 1e-12, "n={n}: {got} vs {want}");
        }
    }
}

#[test]
fn random_instances_have_zero_duality_gap() {
    let e = MetricSpec::euclidean(2);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..60 {
        let s = [0.3, 0.5, 0.8][k % 3];
        let (m, n) = (rng.gen_range(1..=25), rng.gen_range(1..=25));
        let mu = random_measure(&mut rng, m);
        let nu = random_measure(&mut rng, n);
        let dual = solve_dual(&mu, &nu, s, &e).unwrap();
        let primal = dual.plan.value;
        assert!((primal - dual.value).abs() <= 1e-7 * (1.0 + primal), "instance {k}");
        assert!(dual.potential.feasibility_violation() <= 1e-10);
        assert!(dual.plan.marginal_residual(&mu, &nu) <= 1e-10);
        assert!(dual.plan.entries().len() < m + n);
        assert_eq!(dual.plan.basis.len(), m + n - 1);
    }
}

#[test]
fn metric_scaling_scales_values_and_keeps_plans() {
    let e = MetricSpec::euclidean(2);
    let e2 = e.scaled(2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let mu = random_measure(&mut rng, 8);
        let nu = random_measure(&mut rng, 6);
        let s = 0.4;
        let c1 = cost_matrix(mu.support(), nu.support(), s, &e).unwrap();
        let c2 = cost_matrix(mu.support(), nu.support(), s, &e2).unwrap();
        let a = solve_primal(&mu, &nu, &c1).unwrap();
        let b = solve_primal(&mu, &nu, &c2).unwrap();
        assert!((b.value - 2f64.powf(s) * a.value).abs() <= 1e-13 * b.value);
        assert_eq!(a.matrix, b.matrix);
    }
}

#[test]
fn cost_is_s_subadditive() {
    let e = MetricSpec::euclidean(2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let p = random_points(&mut rng, 3);
        let s = rng.gen_range(0.05..0.95);
        let d = |a: &Point, b: &Point| e.eval(a, b).powf(s);
        assert!(d(&p[0], &p[1]) <= d(&p[0], &p[2]) + d(&p[2], &p[1]) + 1e-15);
    }
}

#[test]
fn constant_potential_is_its_own_transform() {
    let e = MetricSpec::euclidean(2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs = random_points(&mut rng, 9);
    let c = cost_matrix(&xs, &xs, 0.5, &e).unwrap();
    let t = c_transform_lower(&[3.5; 9], &c);
    assert!(t.iter().all(|&v| v == 3.5));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn triple_transform_equals_single(seed in 0u64..1_000_000, nx in 1usize..30, ny in 1usize..30, s in 0.1f64..0.9) {
        let e = MetricSpec::euclidean(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = random_points(&mut rng, nx);
        let ys = random_points(&mut rng, ny);
        let psi: Vec<f64> = (0..nx).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let c = cost_matrix(&xs, &ys, s, &e).unwrap();
        let once = c_transform_lower(&psi, &c);
        let thrice = c_transform_lower(&c_transform_upper(&once, &c), &c);
        let err = once.iter().zip(&thrice).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        prop_assert!(err <= 1e-12);
    }

    #[test]
    fn transforms_on_one_set_are_fixed_and_holder(seed in 0u64..1_000_000, n in 2usize..50, s in 0.1f64..0.9) {
        let e = MetricSpec::euclidean(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = random_points(&mut rng, n);
        let phi: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let c = cost_matrix(&xs, &xs, s, &e).unwrap();
        let psi = c_transform_lower(&phi, &c);
        let again = c_transform_lower(&psi, &c);
        let err = psi.iter().zip(&again).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        prop_assert!(err <= 1e-12);
        let pot = KantorovichPotential { points: xs, values: psi, s, metric: e };
        prop_assert!(pot.holder_constant() <= 1.0 + 1e-12);
    }
}

#[test]
fn l_shape_dirichlet_sup() {
    let e = MetricSpec::euclidean(2);
    let shape = DomainShape::LShape { origin: [0.0, 0.0], size: 2.0, notch: 1.0 };
    let h = 1.0 / 64.0;
    let g = DomainGrid::new(shape, h, &e, None).unwrap();
    let r = fracp::geometry::inradius(&g).unwrap();
    let exact = 2f64.sqrt() / (1.0 + 2f64.sqrt());
    assert!((r.value - exact).abs() <= h * 2f64.sqrt());
    let sup = dirichlet_sup(&g, 0.5).unwrap();
    assert_eq!(sup.value, r.value.powf(0.5));
}

#[test]
fn boundary_projection_bounds_random_measures() {
    let e = MetricSpec::euclidean(2);
    let g = DomainGrid::new(DomainShape::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 1.0 / 16.0, &e, None).unwrap();
    let s = 0.5;
    let sup = dirichlet_sup(&g, s).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let k = rng.gen_range(1..12);
        let idx: Vec<usize> = (0..k).map(|_| rng.gen_range(0..g.n_closure())).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mu = DiscreteMeasure::new(idx.iter().map(|&i| g.node(i)).collect(), raw.iter().map(|w| w / total).collect())
            .unwrap();
        let nu = boundary_projection(&g, &mu);
        let lp = w_s(&mu, &nu, s, &e).unwrap();
        let decoupled = boundary_transport_cost(&g, &mu, s).unwrap();
        assert!(lp <= decoupled + 1e-12);
        assert!(decoupled <= sup + 1e-9);
    }
}
