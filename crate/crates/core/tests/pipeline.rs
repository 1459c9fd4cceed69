use maxgraph::graph::verify_height_harmonic;
use maxgraph::parabolicity::{check_phi_inequalities, superharmonicity_report, Hypothesis};
use maxgraph::rigidity::{surface_of, theta_identities_check};
use maxgraph::wedge::{graph_height_bound_check, properness_certificate};
use maxgraph::solver::solve_with_boundary_values;
use maxgraph::*;

fn disc(model: &MetricModel, radius: f64, nr: usize, nt: usize) -> Grid {
    build_grid(
        model,
        &Domain::GeodesicDisc { radius },
        Resolution {
            radial_cells: nr,
            angular_cells: nt,
        },
    )
    .unwrap()
}

#[test]
fn solve_then_check_on_sphere_cap() {
    let model = MetricModel::sphere(1.0).unwrap();
    let grid = disc(&model, 1.0, 24, 48);
    let data = BoundaryData::Fourier {
        amplitude: 0.2,
        mode: 3,
    };
    let sol = solve_dirichlet(&grid, &data, &SolverOptions::default()).unwrap();
    assert!(sol.residual() <= 1e-8);
    assert!(residual_mean_curvature(&grid, &sol.graph) <= 1e-8);
    let (f, op) = surface_of(&grid, &sol.graph);
    assert!(matches!(Hypothesis::of(&f), Hypothesis::Satisfied { .. }));

    let d2 = grid.spacing().powi(2);
    let h = verify_height_harmonic(&f, &op, 2);
    assert!(h.laplacian.max <= 1e-8);
    let s = superharmonicity_report(&f, &op, None, 2, 8.0 * d2).unwrap();
    assert_eq!(s.pass, Some(true));
    let p = check_phi_inequalities(&f, &op, 2, 8.0 * d2).unwrap();
    assert_eq!(p.pass, Some(true));

    let cert = starlike_check(&model, grid.domain(), model.basepoint()).unwrap();
    assert!(graph_height_bound_check(&grid, &sol.graph, &cert).unwrap().pass);
    let proper = properness_certificate(&grid, &sol.graph, 0.5, 0.25, None).unwrap();
    assert_eq!(proper.violations, 0);

    let json = serde_json::to_value(&s).unwrap();
    assert_eq!(json["pass"], true);
}

/// `u = log(cosh x / cosh y)` is maximal wherever `tanh²x + tanh²y < 1`.
fn scherk(rho: f64, theta: f64) -> f64 {
    let (x, y) = (rho * theta.cos(), rho * theta.sin());
    (x.cosh() / y.cosh()).ln()
}

#[test]
fn scherk_surface_is_recovered_at_second_order() {
    let model = MetricModel::flat();
    let mut errors = Vec::new();
    let mut theta_residuals = Vec::new();
    for (nr, nt) in [(48, 96), (96, 192)] {
        let grid = disc(&model, 0.8, nr, nt);
        let exact = grid.sample(scherk);
        let sol = solve_with_boundary_values(&grid, &exact, &SolverOptions::default()).unwrap();
        let err = sol
            .graph
            .values()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let (f, op) = surface_of(&grid, &sol.graph);
        errors.push(err);
        theta_residuals.push(theta_identities_check(&f, &op, 2).laplacian.max);
    }
    assert!(errors[0] < 1e-4, "{errors:?}");
    assert!(errors[0] / errors[1] > 3.5, "{errors:?}");
    assert!(theta_residuals[0] / theta_residuals[1] > 3.0, "{theta_residuals:?}");
}

#[test]
fn hyperbolic_graphs_are_flagged_not_judged() {
    let model = MetricModel::hyperbolic();
    let grid = disc(&model, 1.0, 16, 32);
    let u = make_graph(&grid, vec![0.3; grid.len()]).unwrap();
    let (f, op) = surface_of(&grid, &u);
    let s = superharmonicity_report(&f, &op, None, 2, 1e-3).unwrap();
    assert_eq!(s.pass, None);
    let json = serde_json::to_value(s.hypothesis).unwrap();
    assert_eq!(json["status"], "hypothesis violated");
    assert_eq!(json["min_curvature"], -1.0);
}

#[test]
fn steep_boundary_data_is_rejected() {
    let grid = disc(&MetricModel::flat(), 1.0, 16, 32);
    let err = solve_dirichlet(
        &grid,
        &BoundaryData::Affine { a: 1.5, b: 0.0, c: 0.0 },
        &SolverOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::MarginViolation { .. } | Error::NotSpacelike { .. }), "{err}");
}

#[test]
fn chart_limit_is_enforced() {
    let model = MetricModel::sphere(1.0).unwrap();
    let err = build_grid(
        &model,
        &Domain::GeodesicDisc { radius: 3.5 },
        Resolution {
            radial_cells: 8,
            angular_cells: 16,
        },
    )
    .unwrap_err();
    assert!(matches!(err, Error::DegenerateDomain(_)));
}

#[test]
fn history_csv_has_one_row_per_iterate() {
    let grid = disc(&MetricModel::flat(), 1.0, 16, 32);
    let sol = solve_dirichlet(
        &grid,
        &BoundaryData::Fourier {
            amplitude: 0.3,
            mode: 2,
        },
        &SolverOptions::default(),
    )
    .unwrap();
    let mut buf = Vec::new();
    sol.write_history_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,residual,energy,margin,step"));
    assert_eq!(lines.count(), sol.history.len());
}
