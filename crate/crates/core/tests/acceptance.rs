//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Oracles are computed here, independently of the library.

use std::f64::consts::{E, PI, SQRT_2};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maxgraph::convergence::fit_order;
use maxgraph::graph::verify_height_harmonic;
use maxgraph::parabolicity::{
    capacity_trend, check_phi_inequalities, random_walk_escape, superharmonicity_report, CapacityOptions,
    TrendSurface, Verdict,
};
use maxgraph::rigidity::{
    bernstein_flatness_test, inverse_theta_subharmonic, surface_of, theta_identities_check, FlatnessOptions,
};
use maxgraph::wedge::{
    dist_plus_brute_force, dist_plus_to_wedge_boundary, graph_height_bound_check, phi_sublevel_bound,
    properness_constant, radial_monotonicity_check, sample_sublevel_containment,
};
use maxgraph::*;

const EXACT_TOL: f64 = 1e-10;
const CATENOID_SUP_TOL: f64 = 1e-3;
const ORDER_TARGET: f64 = 2.0;
const ORDER_BAND: f64 = 0.3;
/// `max|Δh| ≤ C·Δ²` for both the operator and the pointwise form.
const HARMONIC_C: f64 = 16.0;
/// Largest ratio between fitted constants `C` along one ladder.
const HARMONIC_C_SPREAD: f64 = 2.0;
/// `tol(Δ) = CHAIN_C·Δ²`.
const CHAIN_C: f64 = 8.0;
const DECOMPOSITION_C: f64 = 4.0;
const COMPARISON_SLACK: f64 = 1e-12;
const CAPACITY_REL: f64 = 0.05;
const HYPERBOLIC_LIMIT: f64 = 8.1392;
const WALKERS: usize = 100_000;
const WALK_SIGMAS: f64 = 3.0;
const WALK_SEED: u64 = 20_240_601;
const WEDGE_POINTS: usize = 100;
const BRUTE_SAMPLES: usize = 100_000;
const CONTAINMENT_SAMPLES: usize = 10_000;
const RADIAL_CURVES: usize = 32;
const FLAT_A2_TOL: f64 = 1e-6;
const SLICE_THETA_TOL: f64 = 1e-8;
const THETA_ORDER_MIN: f64 = 1.5;
const COLLAR: usize = 2;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    lines: Vec<String>,
}

struct Level {
    grid: Grid,
    graph: GraphFunction,
}

impl Level {
    fn spacing(&self) -> f64 {
        self.grid.spacing()
    }
}

fn solve(model: &MetricModel, domain: Domain, nr: usize, nt: usize, data: BoundaryData) -> Level {
    let grid = build_grid(
        model,
        &domain,
        Resolution {
            radial_cells: nr,
            angular_cells: nt,
        },
    )
    .expect("grid");
    let graph = solve_dirichlet(&grid, &data, &SolverOptions::default())
        .expect("solve")
        .graph;
    Level { grid, graph }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn chain_tol(d: f64) -> f64 {
    CHAIN_C * d * d
}

fn identity_suite() -> Outcome {
    let model = MetricModel::flat();
    let grid = build_grid(
        &model,
        &Domain::GeodesicDisc { radius: 1.0 },
        Resolution {
            radial_cells: 16,
            angular_cells: 32,
        },
    )
    .unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, slope, theta) in [("slice", 0.0, -1.0), ("tilted plane 0.6x", 0.6, -1.25)] {
        let u = make_graph(&grid, grid.sample(|r, t| slope * r * t.cos())).unwrap();
        let (f, op) = surface_of(&grid, &u);
        let grad_h = op.gradient_norm(&f.h);
        let mut worst = [0.0f64; 4];
        for (a, n) in grid.nodes().iter().enumerate() {
            let h = slope * n.rho * n.theta.cos();
            let t2 = f.theta[a] * f.theta[a] - 1.0;
            worst[0] = worst[0].max((f.theta[a] - theta).abs());
            worst[1] = worst[1].max((grad_h[a] - t2).abs());
            worst[2] = worst[2].max((f.nstar_norm2[a] - t2).abs());
            worst[3] = worst[3].max((f.phi[a] - (n.rho * n.rho - h * h)).abs());
        }
        pass &= worst.iter().all(|&w| w <= EXACT_TOL);
        lines.push(format!(
            "{name}: |Θ−({theta})| {:.1e}, |‖∇h‖²−(Θ²−1)| {:.1e}, |‖N*‖²−(Θ²−1)| {:.1e}, |φ−(r²−h²)| {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ));
    }
    Outcome {
        id: 1,
        name: "identity suite (exact cases)",
        pass,
        lines,
    }
}

fn solver_vs_ode(catenoid: &[Level]) -> Outcome {
    let mut spacings = Vec::new();
    let mut errors = Vec::new();
    let mut lines = Vec::new();
    for l in catenoid {
        let err = l
            .grid
            .nodes()
            .iter()
            .zip(l.graph.values())
            .map(|(n, v)| (v - n.rho.asinh()).abs())
            .fold(0.0, f64::max);
        lines.push(format!("Δ = {:.5}: sup |u − asinh ρ| = {err:.3e}", l.spacing()));
        spacings.push(l.spacing());
        errors.push(err);
    }
    let fit = fit_order(&spacings, &errors).unwrap();
    lines.push(format!("fitted order {:.3} (pairwise {:?})", fit.order, fmt_all(&fit.pairwise)));
    let finest = *errors.last().unwrap();
    Outcome {
        id: 2,
        name: "solver vs catenoid oracle",
        pass: finest <= CATENOID_SUP_TOL && (fit.order - ORDER_TARGET).abs() <= ORDER_BAND,
        lines,
    }
}

fn harmonic_height(ladders: &[(&str, &[Level])], singles: &[(&str, &Level)]) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, ladder) in ladders {
        let mut consts = Vec::new();
        for l in ladder.iter() {
            let (f, op) = surface_of(&l.grid, &l.graph);
            let r = verify_height_harmonic(&f, &op, COLLAR);
            let d2 = l.spacing().powi(2);
            let (c_op, c_pt) = (r.laplacian.max / d2, r.laplacian_pointwise.max / d2);
            pass &= c_op <= HARMONIC_C && c_pt <= HARMONIC_C;
            consts.push(c_pt);
            lines.push(format!(
                "{name} Δ = {:.5}: operator max|Δh| {:.2e} (C {:.2e}), pointwise max|2HΘ| {:.2e} (C {c_pt:.2})",
                l.spacing(),
                r.laplacian.max,
                c_op,
                r.laplacian_pointwise.max
            ));
        }
        let spread = consts.iter().copied().fold(0.0, f64::max) / consts.iter().copied().fold(f64::INFINITY, f64::min);
        pass &= spread <= HARMONIC_C_SPREAD;
        lines.push(format!("{name}: pointwise C spread {spread:.3}"));
    }
    for (name, l) in singles {
        let (f, op) = surface_of(&l.grid, &l.graph);
        let r = verify_height_harmonic(&f, &op, COLLAR);
        let c = r.laplacian.max / l.spacing().powi(2);
        pass &= c <= HARMONIC_C;
        lines.push(format!("{name}: operator max|Δh| {:.2e} (C {c:.2e})", r.laplacian.max));
    }
    Outcome {
        id: 3,
        name: "harmonic height",
        pass,
        lines,
    }
}

fn superharmonicity_chain(ladders: &[(&str, &[Level])]) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, ladder) in ladders {
        let mut prev_tol = f64::INFINITY;
        for l in ladder.iter() {
            let d = l.spacing();
            let tol = chain_tol(d);
            let (f, op) = surface_of(&l.grid, &l.graph);
            let s = superharmonicity_report(&f, &op, None, COLLAR, tol).unwrap();
            let p = check_phi_inequalities(&f, &op, COLLAR, tol).unwrap();
            let dec_c = p.decomposition_residual.max / (d * d);
            let ok = s.pass == Some(true) && p.pass == Some(true) && dec_c <= DECOMPOSITION_C && tol < prev_tol;
            pass &= ok;
            prev_tol = tol;
            lines.push(format!(
                "{name} Δ = {d:.5} tol {tol:.2e}: max Δlogφ {:.2e}, max(½Δφ−2) {:.2e}, max(4φ−‖∇φ‖²) {:.2e}, decomposition {:.2e} (C {dec_c:.2})",
                s.max_lap_log_phi, p.half_lap_phi_excess, p.gradient_deficit, p.decomposition_residual.max
            ));
        }
    }
    Outcome {
        id: 4,
        name: "superharmonicity chain",
        pass,
        lines,
    }
}

fn laplacian_comparison() -> Outcome {
    let samples = 10_000;
    let mut pass = true;
    let mut lines = Vec::new();
    let cases = [
        ("flat", MetricModel::flat(), 50.0, false),
        ("sphere(1)", MetricModel::sphere(1.0).unwrap(), PI, false),
        ("hyperbolic", MetricModel::hyperbolic(), 20.0, true),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, model, reach, expect_violation) in cases {
        let mut worst = f64::NEG_INFINITY;
        for k in 1..samples {
            let rho = reach * k as f64 / samples as f64;
            let x = model.point_from_polar(rho, 2.0 * PI * rng.gen::<f64>());
            let v = model.distance_to_basepoint(x) * model.distance_laplacian(x).unwrap();
            worst = worst.max(v);
        }
        let violated = worst > 1.0 + COMPARISON_SLACK;
        pass &= violated == expect_violation;
        lines.push(format!(
            "{name}: max r̂Δ̂r̂ = {worst:.6} ({})",
            if violated { "violated" } else { "holds" }
        ));
    }
    Outcome {
        id: 5,
        name: "Laplacian comparison gate",
        pass,
        lines,
    }
}

fn capacity_contrast() -> Outcome {
    let radii = [4.0, 8.0, 16.0, 32.0];
    let opts = CapacityOptions::default();
    let mut pass = true;
    let mut lines = Vec::new();

    let flat = capacity_trend(&MetricModel::flat(), &TrendSurface::Slice { height: 0.0 }, &radii, &opts).unwrap();
    for (r, c) in radii.iter().zip(&flat.capacities) {
        let oracle = 2.0 * PI / r.ln();
        pass &= rel(*c, oracle) <= CAPACITY_REL;
        lines.push(format!("flat R = {r}: {c:.5} vs 2π/log R = {oracle:.5} ({:.2}%)", 100.0 * rel(*c, oracle)));
    }
    pass &= flat.verdict == Verdict::Decay;
    lines.push(format!("flat verdict: {}", flat.verdict.label()));

    let hyp = capacity_trend(&MetricModel::hyperbolic(), &TrendSurface::Slice { height: 0.0 }, &radii, &opts).unwrap();
    // ∫₁^R dρ / sinh ρ = log tanh(R/2) − log tanh(1/2)
    let quad = |r: f64| 2.0 * PI / ((r / 2.0).tanh().ln() - 0.5f64.tanh().ln());
    for (r, c) in radii.iter().zip(&hyp.capacities) {
        pass &= rel(*c, quad(*r)) <= CAPACITY_REL;
        lines.push(format!("hyperbolic R = {r}: {c:.5} vs quadrature {:.5}", quad(*r)));
    }
    let last = *hyp.capacities.last().unwrap();
    pass &= rel(last, HYPERBOLIC_LIMIT) <= CAPACITY_REL && hyp.verdict == Verdict::Plateau;
    lines.push(format!(
        "hyperbolic R = 32 vs limit {HYPERBOLIC_LIMIT}: {:.3}%, verdict: {}",
        100.0 * rel(last, HYPERBOLIC_LIMIT),
        hyp.verdict.label()
    ));

    let cat = capacity_trend(
        &MetricModel::flat(),
        &TrendSurface::Maximal {
            data: BoundaryData::Radial { flux: 1.0, offset: 0.0 },
        },
        &radii,
        &opts,
    )
    .unwrap();
    pass &= cat.verdict == Verdict::Decay;
    lines.push(format!(
        "catenoid capacities {:?}, fit residual {:.3}, verdict: {}",
        fmt_all(&cat.capacities),
        cat.fit_max_relative_residual,
        cat.verdict.label()
    ));
    Outcome {
        id: 6,
        name: "capacity contrast",
        pass,
        lines,
    }
}

fn walk_agreement() -> Outcome {
    let model = MetricModel::flat();
    let nr = 53;
    let grid = build_grid(
        &model,
        &Domain::GeodesicAnnulus { inner: 1.0, outer: E },
        Resolution {
            radial_cells: nr,
            angular_cells: 64,
        },
    )
    .unwrap();
    let ring = (0..=nr)
        .min_by(|&a, &b| {
            (grid.ring_radius(a) - E.sqrt())
                .abs()
                .total_cmp(&(grid.ring_radius(b) - E.sqrt()).abs())
        })
        .unwrap();
    let start = grid.node_id(ring, 0);
    let u = make_graph(&grid, vec![0.0; grid.len()]).unwrap();
    let (_, op) = surface_of(&grid, &u);
    let w = random_walk_escape(&op, start, grid.inner_boundary(), grid.outer_boundary(), WALKERS, WALK_SEED).unwrap();
    let rho = grid.ring_radius(ring);
    let sigmas = (w.escape_probability - 0.5).abs() / w.stderr;
    Outcome {
        id: 7,
        name: "walk/harmonic agreement",
        pass: sigmas <= WALK_SIGMAS,
        lines: vec![format!(
            "start ρ = {rho:.5} (√e = {:.5}), {} walkers: p̂ = {:.5} ± {:.5}, |p̂ − 0.5| = {sigmas:.2}σ, discrete harmonic {:.5}",
            E.sqrt(),
            w.n_walks,
            w.escape_probability,
            w.stderr,
            w.harmonic
        )],
    }
}

fn wedge_formulas() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    let c = phi_sublevel_bound(0.5, 3.0).unwrap();
    let p = properness_constant(1.0, 2.0).unwrap();
    pass &= (c - 2.0).abs() <= 1e-12 && (p - SQRT_2).abs() <= 1e-12;
    lines.push(format!("phi_sublevel_bound(0.5, 3) − 2 = {:.1e}, properness(1, 2) − √2 = {:.1e}", c - 2.0, p - SQRT_2));

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (name, model, reach) in [("flat", MetricModel::flat(), 5.0), ("sphere(1)", MetricModel::sphere(1.0).unwrap(), 2.0)] {
        let mut worst_gap = 0.0f64;
        let mut worst_ratio = 0.0f64;
        let mut bad = 0;
        for k in 0..WEDGE_POINTS {
            let rho = reach * rng.gen::<f64>();
            let x = model.point_from_polar(rho, 2.0 * PI * rng.gen::<f64>());
            let r = model.distance_to_basepoint(x);
            let t = r * (2.0 * rng.gen::<f64>() - 1.0);
            let exact = dist_plus_to_wedge_boundary(&model, x, t).unwrap();
            let brute = dist_plus_brute_force(&model, x, t, BRUTE_SAMPLES, k as u64).unwrap();
            let gap = brute.distance - exact;
            if gap < -1e-12 || gap > brute.resolution {
                bad += 1;
            }
            worst_gap = worst_gap.max(gap.abs());
            worst_ratio = worst_ratio.max(gap / brute.resolution);
        }
        pass &= bad == 0;
        lines.push(format!(
            "{name}: {WEDGE_POINTS} points, max |brute − exact| {worst_gap:.2e}, max gap/resolution {worst_ratio:.3}, outside bracket {bad}"
        ));
    }

    let mut violations = 0;
    let mut cells = 0;
    for model in [MetricModel::flat(), MetricModel::sphere(1.0).unwrap()] {
        for a in [0.25, 0.5, 0.75, 0.95] {
            for b in [0.5, 1.0, 3.0] {
                let r = sample_sublevel_containment(&model, a, b, CONTAINMENT_SAMPLES, 3).unwrap();
                violations += r.violations;
                cells += 1;
            }
        }
    }
    pass &= violations == 0;
    lines.push(format!("containment matrix: {cells} cells × {CONTAINMENT_SAMPLES} samples, {violations} violations"));
    Outcome {
        id: 8,
        name: "wedge formulas",
        pass,
        lines,
    }
}

fn height_bound(graphs: &[(&str, &Level)]) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, l) in graphs {
        let model = l.grid.model();
        let cert = starlike_check(model, l.grid.domain(), model.basepoint()).unwrap();
        let h = graph_height_bound_check(&l.grid, &l.graph, &cert).unwrap();
        let m = radial_monotonicity_check(&l.grid, &l.graph, RADIAL_CURVES).unwrap();
        pass &= h.pass && h.worst_margin > 0.0 && m.pass;
        lines.push(format!(
            "{name}: worst margin {:.3e}, {} curves min increment {:.3e}, violations {}/{}",
            h.worst_margin, m.curves, m.min_increment, h.violations, m.violations
        ));
    }
    Outcome {
        id: 9,
        name: "height bound",
        pass,
        lines,
    }
}

fn rigidity(ladders: &[(&str, &[Level])], singles: &[(&str, &Level)]) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    let affine = bernstein_flatness_test(
        &MetricModel::flat(),
        &BoundaryData::Affine { a: 0.6, b: 0.3, c: 0.1 },
        &[2.0, 4.0, 8.0],
        &FlatnessOptions::default(),
    )
    .unwrap();
    for r in &affine.rows {
        pass &= r.sup_a2 <= FLAT_A2_TOL;
        lines.push(format!("affine R = {}: sup‖A‖² = {:.2e}", r.radius, r.sup_a2));
    }
    let cap = bernstein_flatness_test(
        &MetricModel::sphere(1.0).unwrap(),
        &BoundaryData::Constant { value: 0.4 },
        &[1.0, 2.0, 3.0],
        &FlatnessOptions::default(),
    )
    .unwrap();
    for r in &cap.rows {
        pass &= r.sup_theta_plus_one <= SLICE_THETA_TOL;
        lines.push(format!("sphere cap constant R = {}: sup|Θ+1| = {:.2e}", r.radius, r.sup_theta_plus_one));
    }
    let mut all_k_nonneg: Vec<(String, &Level)> = singles.iter().map(|(n, l)| (n.to_string(), *l)).collect();
    for (name, ladder) in ladders {
        let mut h = Vec::new();
        let mut lap = Vec::new();
        let mut grad = Vec::new();
        for l in ladder.iter() {
            let (f, op) = surface_of(&l.grid, &l.graph);
            let r = theta_identities_check(&f, &op, COLLAR);
            h.push(l.spacing());
            lap.push(r.laplacian.max);
            grad.push(r.gradient.max);
            all_k_nonneg.push((format!("{name} Δ = {:.5}", l.spacing()), l));
        }
        let fl = fit_order(&h, &lap).unwrap();
        let fg = fit_order(&h, &grad).unwrap();
        pass &= fl.order >= THETA_ORDER_MIN && fg.order >= THETA_ORDER_MIN;
        lines.push(format!(
            "{name}: ΔΘ identity {:?} order {:.2}; ‖∇Θ‖² identity {:?} order {:.2}",
            fmt_all(&lap),
            fl.order,
            fmt_all(&grad),
            fg.order
        ));
    }
    let mut worst = (f64::INFINITY, String::new());
    for (name, l) in &all_k_nonneg {
        let tol = chain_tol(l.spacing());
        let (f, op) = surface_of(&l.grid, &l.graph);
        let r = inverse_theta_subharmonic(&f, &op, COLLAR, tol);
        pass &= r.pass == Some(true);
        if r.min_laplacian + tol < worst.0 {
            worst = (r.min_laplacian + tol, name.clone());
        }
    }
    lines.push(format!(
        "{} K ≥ 0 graphs: min (Δ(1/Θ) + tol(Δ)) = {:.3e} on {}",
        all_k_nonneg.len(),
        worst.0,
        worst.1
    ));
    Outcome {
        id: 10,
        name: "rigidity",
        pass,
        lines,
    }
}

fn fmt_all(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.3e}")).collect()
}

fn main() -> ExitCode {
    let start = Instant::now();
    let flat = MetricModel::flat();
    let sphere = MetricModel::sphere(1.0).unwrap();
    let catenoid: Vec<Level> = [(96, 104), (192, 208), (384, 416)]
        .into_iter()
        .map(|(nr, nt)| {
            solve(
                &flat,
                Domain::GeodesicAnnulus { inner: 1.0, outer: 4.0 },
                nr,
                nt,
                BoundaryData::Radial { flux: 1.0, offset: 0.0 },
            )
        })
        .collect();
    let fourier = BoundaryData::Fourier { amplitude: 0.3, mode: 2 };
    let cap: Vec<Level> = [(64, 128), (128, 256), (256, 512)]
        .into_iter()
        .map(|(nr, nt)| solve(&sphere, Domain::GeodesicDisc { radius: 1.2 }, nr, nt, fourier))
        .collect();
    let disc = Domain::GeodesicDisc { radius: 2.0 };
    let slice = solve(&flat, disc, 32, 64, BoundaryData::Constant { value: 0.0 });
    let tilted = solve(&flat, disc, 32, 64, BoundaryData::Affine { a: 0.6, b: 0.0, c: 0.0 });
    let wavy = solve(&flat, disc, 32, 64, fourier);
    let sector = solve(
        &flat,
        Domain::PolarRectangle {
            rho: (0.0, 2.0),
            theta: (0.0, PI / 2.0),
        },
        32,
        64,
        fourier,
    );
    eprintln!("solves done in {:.1?}", start.elapsed());

    let ladders: [(&str, &[Level]); 2] = [("catenoid", &catenoid), ("sphere cap", &cap)];
    let singles: [(&str, &Level); 3] = [("flat disc tilted", &tilted), ("flat disc sin 2θ", &wavy), ("flat sector sin 2θ", &sector)];
    let starlike: [(&str, &Level); 5] = [
        ("flat disc slice", &slice),
        ("flat disc tilted", &tilted),
        ("flat disc sin 2θ", &wavy),
        ("flat sector sin 2θ", &sector),
        ("sphere cap sin 2θ", &cap[0]),
    ];
    let outcomes = [
        identity_suite(),
        solver_vs_ode(&catenoid),
        harmonic_height(&ladders, &singles),
        superharmonicity_chain(&ladders),
        laplacian_comparison(),
        capacity_contrast(),
        walk_agreement(),
        wedge_formulas(),
        height_bound(&starlike),
        rigidity(&ladders, &singles),
    ];
    let mut failed = 0;
    for o in &outcomes {
        println!("{} criterion {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name);
        for l in &o.lines {
            println!("    {l}");
        }
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed in {:.1?}",
        outcomes.len() - failed,
        outcomes.len(),
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
