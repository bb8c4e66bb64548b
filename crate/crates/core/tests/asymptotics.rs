use fracp::asymptotics::*;
use fracp::discretization::{h_infty, FormParams, GridFunction};
use fracp::eigen::*;
use fracp::geometry::{diameter, DomainGrid, DomainShape, MetricSpec};
use fracp::Error;

fn square(h: f64, m: &MetricSpec) -> DomainGrid {
    DomainGrid::new(DomainShape::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, h, m, Some(0.4)).unwrap()
}

fn spec<'g>(g: &'g DomainGrid, v: EigenVariant, s: f64, p: f64, m: &MetricSpec) -> EigenProblemSpec<'g> {
    let mut sp = EigenProblemSpec::new(v, FormParams::new(s, p, m.clone()).unwrap(), g);
    sp.solver.tol = 1e-12;
    sp
}

/// Largest `|u(x)-u(y)| / d(x,y)^s` over closure pairs, by direct enumeration.
fn pair_scan(g: &DomainGrid, u: &[f64], s: f64, m: &MetricSpec) -> f64 {
    let mut best = 0.0f64;
    for i in 0..g.n_closure() {
        for j in 0..g.n_closure() {
            if i != j {
                best = best.max((u[i] - u[j]).abs() / m.eval(&g.node(i), &g.node(j)).powf(s));
            }
        }
    }
    best
}

fn metrics() -> Vec<MetricSpec> {
    vec![
        MetricSpec::euclidean(2),
        MetricSpec::weighted_euclidean(2, vec![2.0, 0.5, 0.5, 1.0]).unwrap(),
        MetricSpec::q_norm(2, 1.0).unwrap(),
    ]
}

#[test]
fn trial_function_profile() {
    let shapes = [
        DomainShape::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] },
        DomainShape::LShape { origin: [0.0, 0.0], size: 2.0, notch: 1.0 },
    ];
    for shape in shapes {
        for m in metrics() {
            for s in [0.3, 0.5, 0.8] {
                let h = 1.0 / 12.0;
                let g = DomainGrid::new(shape.clone(), h, &m, None).unwrap();
                let d = diameter(&g, &m).unwrap();
                let u = trial_function(&g, &m, s).unwrap();
                let v = u.values();
                assert_eq!(v[d.indices.1], -1.0);
                assert!((v[d.indices.0] - 1.0).abs() <= 1e-15);
                let bound = 2.0 / d.value.powf(s);
                assert!(h_infty(&g, &u, s, &m).unwrap() <= bound * (1.0 + 1e-9));
                let closure = &v[..g.n_closure()];
                let sup = closure.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let inf = closure.iter().cloned().fold(f64::INFINITY, f64::min);
                assert!((sup + inf).abs() <= 2.0 * h.powf(s));
            }
        }
    }
}

#[test]
fn trial_quotient_bounds_the_eigenvalue() {
    let m = MetricSpec::euclidean(2);
    let g = square(1.0 / 6.0, &m);
    for v in [EigenVariant::NeumannSeminorm, EigenVariant::NeumannNonlocal] {
        for p in [2.0, 4.0, 8.0] {
            let sp = spec(&g, v, 0.5, p, &m);
            let trial = trial_quotient(&sp).unwrap();
            let r = minimize_rayleigh(&sp).unwrap();
            assert!(r.lambda <= trial.lambda * (1.0 + 1e-12), "{v} p={p}");
        }
    }
    let sp = spec(&g, EigenVariant::Dirichlet, 0.5, 4.0, &m);
    assert!(matches!(trial_quotient(&sp), Err(Error::Precondition(_))));
}

#[test]
fn density_pair_identities() {
    let m = MetricSpec::euclidean(2);
    let g = square(1.0 / 6.0, &m);
    for v in EigenVariant::ALL {
        for p in [3.0, 8.0, 20.0] {
            let sp = spec(&g, v, 0.4, p, &m);
            let r = minimize_rayleigh(&sp).unwrap();
            let d = density_pair(&g, &r.eigenfunction, p).unwrap();
            assert!((d.pairing - 1.0).abs() <= 1e-12, "{v} p={p}: {}", d.pairing);
            assert!(d.mass <= d.mass_bound * (1.0 + 1e-9));
            if v.is_neumann() {
                assert!(d.mean.abs() <= 10.0 * sp.solver.tol, "{v} p={p}: {}", d.mean);
            }
        }
    }
}

#[test]
fn density_pair_rejects_foreign_functions() {
    let m = MetricSpec::euclidean(2);
    let g = square(0.25, &m);
    let other = square(0.2, &m);
    let u = GridFunction::zeros(&other);
    assert!(matches!(density_pair(&g, &u, 4.0), Err(Error::Precondition(_))));
}

#[test]
fn holder_profile_of_constant_is_zero() {
    let m = MetricSpec::euclidean(2);
    let g = square(0.25, &m);
    let sp = spec(&g, EigenVariant::NeumannNonlocal, 0.5, 4.0, &m);
    let mut r = minimize_rayleigh(&sp).unwrap();
    r.eigenfunction = GridFunction::from_fn(&g, |_| 2.5);
    for v in EigenVariant::ALL {
        assert_eq!(holder_profile(&g, &r, v, 0.5, &m).unwrap(), 0.0);
    }
}

#[test]
fn holder_profile_matches_pair_scan() {
    let m = MetricSpec::euclidean(2);
    let g = square(1.0 / 6.0, &m);
    let sp = spec(&g, EigenVariant::Dirichlet, 0.5, 64.0, &m);
    let r = minimize_rayleigh(&sp).unwrap();
    let got = holder_profile(&g, &r, EigenVariant::Dirichlet, 0.5, &m).unwrap();
    let want = pair_scan(&g, r.eigenfunction.values(), 0.5, &m);
    assert!((got - want).abs() <= 1e-12 * want);
    assert!(got.is_finite() && got > 0.0);
}

#[test]
fn single_row_sweep_skips_trend() {
    let m = MetricSpec::euclidean(2);
    let g = square(0.25, &m);
    let sp = spec(&g, EigenVariant::NeumannSeminorm, 0.5, 2.0, &m);
    let rep = run_limit_experiment(&sp, &[4.0]).unwrap();
    assert_eq!(rep.rows.len(), 1);
    assert_eq!(rep.trend_holds(8.0), None);
    let row = &rep.rows[0];
    assert_eq!(row.rel_err, (row.lambda_root - row.target).abs() / row.target);
}

#[test]
fn targets_agree_with_transport_extremes() {
    for m in metrics() {
        let g = square(0.2, &m);
        for v in EigenVariant::ALL {
            if v == EigenVariant::Dirichlet && !m.is_euclidean() {
                continue;
            }
            let sp = spec(&g, v, 0.7, 2.0, &m);
            let rep = run_limit_experiment(&sp, &[3.0, 5.0, 9.0]).unwrap();
            assert!(rep.consistency_residual() <= 1e-9, "{v}");
            assert!(rep.trend_holds(3.0).is_some());
            for row in &rep.rows {
                assert_eq!(row.target, limit_target(&sp).unwrap());
            }
        }
    }
}

#[test]
fn trend_check_ignores_rows_below_threshold() {
    let m = MetricSpec::euclidean(2);
    let g = square(0.25, &m);
    let sp = spec(&g, EigenVariant::Dirichlet, 0.5, 2.0, &m);
    let mut rep = run_limit_experiment(&sp, &[2.0, 4.0, 8.0]).unwrap();
    for (row, e) in rep.rows.iter_mut().zip([0.1, 0.3, 0.2]) {
        row.rel_err = e;
    }
    assert_eq!(rep.trend_holds(2.0), Some(false));
    assert_eq!(rep.trend_holds(4.0), Some(true));
}

#[test]
fn neumann_comparison_respects_factor_two() {
    let m = MetricSpec::euclidean(2);
    let g = square(1.0 / 6.0, &m);
    let sp = spec(&g, EigenVariant::NeumannSeminorm, 0.5, 2.0, &m);
    let rows = compare_neumann(&sp, &[2.0, 4.0, 8.0]).unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r.ratio() <= 1.0 + 1e-6, "p={}: {}", r.p, r.ratio());
    }
}
