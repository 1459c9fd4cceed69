//! Experiment pipelines. Each appends checks and results to an [`Outcome`]
//! and writes its tables through the [`Sink`].

use std::f64::consts::PI;

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use maxgraph::convergence::fit_order;
use maxgraph::graph::verify_height_harmonic;
use maxgraph::parabolicity::{
    capacity_trend, check_phi_inequalities, random_walk_escape, rotsym_slice_capacity, superharmonicity_report,
    CapacityOptions, TrendSurface, Verdict,
};
use maxgraph::rigidity::{
    bernstein_flatness_test, inverse_theta_subharmonic, surface_of, theta_identities_check, FlatnessOptions,
    FLATNESS_NOISE,
};
use maxgraph::solver::Solution;
use maxgraph::wedge::{
    dist_plus_brute_force, dist_plus_to_wedge_boundary, graph_height_bound_check, phi_sublevel_bound,
    properness_certificate, radial_monotonicity_check, sample_sublevel_containment,
};
use maxgraph::{
    build_grid, make_graph, solve_dirichlet, starlike_check, BoundaryData, Domain, Grid, MetricKind, MetricModel,
    Resolution, Warp,
};

use crate::config::{ExpectedVerdict, RunConfig, SurfaceChoice};
use crate::report::{Check, Outcome, Sink};

pub struct Level {
    pub grid: Grid,
    pub solution: Solution,
}

impl Level {
    fn spacing(&self) -> f64 {
        self.grid.spacing()
    }
}

fn domain(cfg: &RunConfig, what: &str) -> Result<Domain> {
    cfg.domain.ok_or_else(|| anyhow!("`{what}` needs a [domain] section"))
}

fn boundary(cfg: &RunConfig, what: &str) -> Result<BoundaryData> {
    cfg.boundary.ok_or_else(|| anyhow!("`{what}` needs a [boundary] section"))
}

/// Solves the Dirichlet problem at every ladder level, in parallel.
pub fn solve_ladder(cfg: &RunConfig, model: &MetricModel, what: &str) -> Result<Vec<Level>> {
    let domain = domain(cfg, what)?;
    let data = boundary(cfg, what)?;
    cfg.grid
        .ladder
        .par_iter()
        .map(|&m| {
            let grid = build_grid(
                model,
                &domain,
                Resolution {
                    radial_cells: cfg.grid.radial_cells * m,
                    angular_cells: cfg.grid.angular_cells * m,
                },
            )
            .context("maximal_solver: building the grid")?;
            let solution = solve_dirichlet(&grid, &data, &cfg.solver).context("maximal_solver")?;
            Ok(Level { grid, solution })
        })
        .collect()
}

#[derive(Serialize)]
struct LevelSummary {
    level: usize,
    radial_cells: usize,
    angular_cells: usize,
    spacing: f64,
    nodes: usize,
    newton_iterations: usize,
    residual: f64,
    spacelike_margin: f64,
    energy_decrease: f64,
}

pub fn solve(cfg: &RunConfig, model: &MetricModel, sink: &mut Sink, out: &mut Outcome) -> Result<Vec<Level>> {
    let levels = solve_ladder(cfg, model, "solve")?;
    let mut rows = Vec::new();
    for (k, l) in levels.iter().enumerate() {
        let (fields, _) = surface_of(&l.grid, &l.solution.graph);
        sink.csv(&format!("solve/level{k}_grid.csv"), |w| l.grid.write_csv(w))?;
        sink.csv(&format!("solve/level{k}_fields.csv"), |w| fields.write_csv(w))?;
        sink.csv(&format!("solve/level{k}_history.csv"), |w| l.solution.write_history_csv(w))?;
        let scope = format!("level {k}, Δ = {:.4e}", l.spacing());
        out.push(Check::at_most("H = 0", &scope, l.solution.residual(), cfg.solver.tolerance));
        let margin = l.solution.graph.spacelike_margin();
        out.push(Check::gate(
            "‖∇̂u‖² < 1",
            &scope,
            margin,
            cfg.solver.margin_floor,
            margin >= cfg.solver.margin_floor,
        )
        .with_detail("value is min 1 − ‖∇̂u‖², bounded below"));
        let res = l.grid.resolution();
        rows.push(LevelSummary {
            level: k,
            radial_cells: res.radial_cells,
            angular_cells: res.angular_cells,
            spacing: l.spacing(),
            nodes: l.grid.len(),
            newton_iterations: l.solution.history.len() - 1,
            residual: l.solution.residual(),
            spacelike_margin: margin,
            energy_decrease: l.solution.energy_decrease(),
        });
    }
    out.record("solve", &rows)?;
    Ok(levels)
}

/// Samples `r̂ Δ̂r̂` over `(0, reach]`.
fn comparison_max(model: &MetricModel, reach: f64) -> Result<f64> {
    let n = 4096;
    (1..=n).try_fold(f64::NEG_INFINITY, |m, k| {
        let rho = reach * k as f64 / n as f64;
        Ok(m.max(rho * model.distance_laplacian_at_radius(rho)?))
    })
}

#[derive(Serialize)]
struct IdentityRow {
    level: usize,
    spacing: f64,
    max_lap_h: f64,
    max_lap_h_pointwise: f64,
    nstar_identity: f64,
    max_lap_log_phi: f64,
    half_lap_phi_excess: f64,
    gradient_deficit: f64,
    decomposition_residual: f64,
    theta_laplacian: f64,
    theta_gradient: f64,
    min_lap_inverse_theta: f64,
}

pub fn verify(cfg: &RunConfig, model: &MetricModel, levels: &[Level], sink: &mut Sink, out: &mut Outcome) -> Result<()> {
    let tol = &cfg.tolerances;
    let collar = tol.collar;
    let (_, outer) = domain(cfg, "verify")?.radial_range();
    let comparison = comparison_max(model, outer)?;
    let comparison_check = if model.nonnegative_curvature() {
        Check::at_most("r̂Δ̂r̂ ≤ 1", model_scope(model), comparison, 1.0 + 1e-12)
    } else {
        Check::info("r̂Δ̂r̂ ≤ 1", model_scope(model), comparison).with_detail(if comparison > 1.0 {
            "violated; the model does not satisfy K ≥ 0"
        } else {
            "holds"
        })
    };
    out.push(comparison_check);

    let mut rows = Vec::new();
    for (k, l) in levels.iter().enumerate() {
        let d = l.spacing();
        let chain = tol.chain_constant * d * d;
        let scope = format!("level {k}, Δ = {d:.4e}");
        let (f, op) = surface_of(&l.grid, &l.solution.graph);

        let h = verify_height_harmonic(&f, &op, collar);
        let harmonic_tol = tol.harmonic_constant * d * d;
        out.push(Check::at_most("Δh = 0", &scope, h.laplacian.max, harmonic_tol.max(tol.identity)));
        out.push(
            Check::info("Δh = −2HΘ", &scope, h.laplacian_pointwise.max)
                .with_detail(format!("pointwise C = {:.3}", h.laplacian_pointwise.max / (d * d))),
        );

        let nstar = (0..f.len())
            .map(|a| (f.nstar_norm2[a] - (f.theta[a].powi(2) - 1.0)).abs())
            .fold(0.0, f64::max);
        out.push(Check::at_most("‖N*‖² = Θ² − 1", &scope, nstar, tol.identity));

        let s = superharmonicity_report(&f, &op, tol.phi_min, collar, chain)?;
        out.push(Check::optional("Δ log φ ≤ 0", &scope, s.max_lap_log_phi, chain, s.pass));
        let p = check_phi_inequalities(&f, &op, collar, chain)?;
        let gated = p.hypothesis.holds();
        out.push(Check::optional(
            "½Δφ ≤ 2",
            &scope,
            p.half_lap_phi_excess,
            chain,
            gated.then_some(p.half_lap_phi_excess <= chain),
        ));
        out.push(Check::optional(
            "‖∇φ‖² ≥ 4φ",
            &scope,
            p.gradient_deficit,
            chain,
            gated.then_some(p.gradient_deficit <= chain),
        ));
        let dec_tol = (tol.decomposition_constant * d * d).max(tol.identity);
        out.push(Check::optional(
            "‖∇φ‖² − 4φ = 4(r⟨∇̄r̄, N⟩ + hΘ)²",
            &scope,
            p.decomposition_residual.max,
            dec_tol,
            gated.then_some(p.decomposition_residual.max <= dec_tol),
        ));

        let th = theta_identities_check(&f, &op, collar);
        let inv = inverse_theta_subharmonic(&f, &op, collar, chain);
        out.push(Check::optional("Δ(1/Θ) ≥ 0", &scope, -inv.min_laplacian, chain, inv.pass));

        sink.json(&format!("verify/level{k}.json"), &serde_json::json!({
            "height": h, "superharmonicity": s, "phi": p, "theta": th, "inverse_theta": inv,
        }))?;
        rows.push(IdentityRow {
            level: k,
            spacing: d,
            max_lap_h: h.laplacian.max,
            max_lap_h_pointwise: h.laplacian_pointwise.max,
            nstar_identity: nstar,
            max_lap_log_phi: s.max_lap_log_phi,
            half_lap_phi_excess: p.half_lap_phi_excess,
            gradient_deficit: p.gradient_deficit,
            decomposition_residual: p.decomposition_residual.max,
            theta_laplacian: th.laplacian.max,
            theta_gradient: th.gradient.max,
            min_lap_inverse_theta: inv.min_laplacian,
        });
    }

    for (anchor, errors) in [
        ("ΔΘ = Θ(κ(Θ² − 1) + ‖A‖²)", rows.iter().map(|r| r.theta_laplacian).collect::<Vec<_>>()),
        ("‖∇Θ‖² = ½‖A‖²(Θ² − 1)", rows.iter().map(|r| r.theta_gradient).collect()),
    ] {
        let finest = *errors.last().expect("at least one level");
        if finest <= tol.identity {
            out.push(Check::at_most(anchor, "finest level", finest, tol.identity).with_detail("exact"));
        } else if rows.len() >= 2 {
            let spacings: Vec<f64> = rows.iter().map(|r| r.spacing).collect();
            let fit = fit_order(&spacings, &errors)?;
            out.push(
                Check::gate(anchor, "ladder order", fit.order, tol.theta_order, fit.order >= tol.theta_order)
                    .with_detail(format!("fitted order over {} levels", rows.len())),
            );
        } else {
            out.push(Check::info(anchor, "level 0", finest).with_detail("a ladder of 2+ levels is needed for an order"));
        }
    }

    sink.csv("verify/identities.csv", |w| {
        writeln!(
            w,
            "level,spacing,max_lap_h,max_lap_h_pointwise,nstar_identity,max_lap_log_phi,half_lap_phi_excess,gradient_deficit,decomposition_residual,theta_laplacian,theta_gradient,min_lap_inverse_theta"
        )?;
        for r in &rows {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.level,
                r.spacing,
                r.max_lap_h,
                r.max_lap_h_pointwise,
                r.nstar_identity,
                r.max_lap_log_phi,
                r.half_lap_phi_excess,
                r.gradient_deficit,
                r.decomposition_residual,
                r.theta_laplacian,
                r.theta_gradient,
                r.min_lap_inverse_theta
            )?;
        }
        Ok(())
    })?;
    out.record("verify", &rows)?;
    Ok(())
}

fn model_scope(model: &MetricModel) -> String {
    match model.kind() {
        MetricKind::Flat => "model flat".into(),
        MetricKind::Hyperbolic => "model hyperbolic".into(),
        MetricKind::RotationallySymmetric(Warp::Sphere { radius }) => format!("model sphere, radius {radius}"),
        MetricKind::RotationallySymmetric(Warp::Cigar { scale }) => format!("model cigar, scale {scale}"),
    }
}

pub fn parabolicity(cfg: &RunConfig, model: &MetricModel, sink: &mut Sink, out: &mut Outcome) -> Result<()> {
    let p = cfg.parabolicity.clone().unwrap_or_default();
    let opts = CapacityOptions {
        inner: p.inner.get(),
        spacing: p.spacing.get(),
        angular_cells: p.angular_cells,
        solver: cfg.solver,
    };
    let surface = match p.surface {
        SurfaceChoice::Slice => TrendSurface::Slice { height: p.height },
        SurfaceChoice::Maximal => TrendSurface::Maximal {
            data: boundary(cfg, "parabolicity")?,
        },
    };
    let curve = capacity_trend(model, &surface, &p.radii, &opts).context("parabolicity_lab")?;
    let slice = p.surface == SurfaceChoice::Slice;
    let oracles: Vec<f64> = p
        .radii
        .iter()
        .map(|&r| if slice { rotsym_slice_capacity(model, p.inner.get(), r) } else { f64::NAN })
        .collect();
    sink.csv("parab/capacities.csv", |w| {
        writeln!(w, "R,capacity,quadrature")?;
        for ((r, c), q) in p.radii.iter().zip(&curve.capacities).zip(&oracles) {
            writeln!(w, "{r},{c:.17e},{q:.17e}")?;
        }
        Ok(())
    })?;
    if slice {
        for ((r, c), q) in p.radii.iter().zip(&curve.capacities).zip(&oracles) {
            let rel = (c - q).abs() / q;
            out.push(
                Check::at_most("cap = 2π / ∫ dρ/f", format!("R = {r}"), rel, tol_rel(cfg))
                    .with_detail(format!("capacity {c:.6}, quadrature {q:.6}")),
            );
        }
    }
    let verdict_check = match p.expected {
        Some(e) => {
            let want = match e {
                ExpectedVerdict::Decay => Verdict::Decay,
                ExpectedVerdict::Plateau => Verdict::Plateau,
            };
            Check::gate("capacity verdict", "exhaustion", curve.fitted_c, 0.0, curve.verdict == want)
                .with_detail(format!("verdict {}, expected {}", curve.verdict.label(), want.label()))
        }
        None => Check::info("capacity verdict", "exhaustion", curve.fitted_c).with_detail(curve.verdict.label()),
    };
    out.push(verdict_check);
    out.record("capacity", &curve)?;

    if p.walkers > 0 {
        let outer = p.radii[0];
        let grid = build_grid(
            model,
            &Domain::GeodesicAnnulus {
                inner: p.inner.get(),
                outer,
            },
            Resolution {
                radial_cells: (((outer - p.inner.get()) / p.spacing.get()).ceil() as usize).max(8),
                angular_cells: p.angular_cells,
            },
        )?;
        let graph = match &surface {
            TrendSurface::Slice { height } => make_graph(&grid, vec![*height; grid.len()])?,
            TrendSurface::Maximal { data } => solve_dirichlet(&grid, data, &cfg.solver)?.graph,
        };
        let (_, op) = surface_of(&grid, &graph);
        let start = grid.node_id(grid.rings() / 2, 0);
        let walk = random_walk_escape(&op, start, grid.inner_boundary(), grid.outer_boundary(), p.walkers, cfg.seed)
            .context("parabolicity_lab: random walk")?;
        out.push(
            Check::at_most("P(escape) = harmonic measure", format!("ρ = {:.4}", grid.nodes()[start].rho), walk.deviation_sigmas, cfg.tolerances.walk_sigmas)
                .with_detail(format!(
                    "p = {:.5} ± {:.5}, harmonic {:.5}",
                    walk.escape_probability, walk.stderr, walk.harmonic
                )),
        );
        out.record("walk", &walk)?;
    }
    Ok(())
}

fn tol_rel(cfg: &RunConfig) -> f64 {
    cfg.tolerances.capacity_relative
}

pub fn wedge(cfg: &RunConfig, model: &MetricModel, sink: &mut Sink, out: &mut Outcome) -> Result<()> {
    let w = cfg
        .wedge
        .clone()
        .ok_or_else(|| anyhow!("`wedge` needs a [wedge] section"))?;
    let (a, b) = (w.a.get(), w.b.get());
    let c = phi_sublevel_bound(a, b)?;
    out.push(Check::info("c = √(b/(1 − a²))", format!("a = {a}, b = {b}"), c));
    let containment = sample_sublevel_containment(model, a, b, w.samples, cfg.seed)?;
    out.push(
        Check::gate(
            "r̂² − t² ≤ b ⇒ r̂ ≤ c",
            format!("{} samples", w.samples),
            containment.violations as f64,
            0.0,
            containment.violations == 0,
        )
        .with_detail(format!("{} samples in the sublevel", containment.in_sublevel)),
    );
    out.record("containment", &containment)?;

    let reach = cfg
        .domain
        .map(|d| d.radial_range().1)
        .unwrap_or(2.0 * c)
        .min(0.99 * model.chart_limit());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points: Vec<(f64, f64, f64)> = (0..w.points)
        .map(|_| {
            let rho = reach * rng.gen::<f64>();
            let theta = 2.0 * PI * rng.gen::<f64>();
            (rho, theta, 2.0 * rng.gen::<f64>() - 1.0)
        })
        .collect();
    let mut rows = Vec::with_capacity(points.len());
    let mut outside = 0;
    let mut worst = 0.0f64;
    for (k, &(rho, theta, q)) in points.iter().enumerate() {
        let x = model.point_from_polar(rho, theta);
        let t = q * model.distance_to_basepoint(x);
        let exact = dist_plus_to_wedge_boundary(model, x, t)?;
        let brute = dist_plus_brute_force(model, x, t, w.brute_force_samples, cfg.seed.wrapping_add(k as u64))?;
        let gap = brute.distance - exact;
        if gap < -1e-12 || gap > brute.resolution {
            outside += 1;
        }
        worst = worst.max(gap / brute.resolution);
        rows.push((rho, theta, t, exact, brute.distance, brute.resolution));
    }
    if !points.is_empty() {
        out.push(
            Check::gate("dist₊ = (r̂ − |t|)/√2", format!("{} points", w.points), outside as f64, 0.0, outside == 0)
                .with_detail(format!("max gap / resolution {worst:.3}")),
        );
    }
    sink.csv("wedge/dist_plus.csv", |wr| {
        writeln!(wr, "rho,theta,t,closed_form,brute_force,resolution")?;
        for r in &rows {
            writeln!(wr, "{:e},{:e},{:e},{:e},{:e},{:e}", r.0, r.1, r.2, r.3, r.4, r.5)?;
        }
        Ok(())
    })?;

    if let (Some(domain), Some(data)) = (cfg.domain, cfg.boundary) {
        let grid = build_grid(
            model,
            &domain,
            Resolution {
                radial_cells: cfg.grid.radial_cells,
                angular_cells: cfg.grid.angular_cells,
            },
        )?;
        let u = solve_dirichlet(&grid, &data, &cfg.solver).context("maximal_solver")?.graph;
        let cert = starlike_check(model, &domain, model.basepoint())?;
        if cert.is_certified() && grid.pole().is_some() {
            let h = graph_height_bound_check(&grid, &u, &cert)?;
            out.push(Check::gate("−r̂ < u < r̂", "solved graph", h.worst_margin, 0.0, h.pass && h.worst_margin > 0.0));
            let m = radial_monotonicity_check(&grid, &u, w.curves.min(grid.slots()))?;
            out.push(Check::gate(
                "dist₊ increases along radial geodesics",
                format!("{} curves", m.curves),
                m.min_increment,
                0.0,
                m.pass,
            ));
            let proper = properness_certificate(&grid, &u, b, w.delta.get(), None)?;
            out.push(
                Check::gate(
                    "c = (2ε² + b)/(2√2ε)",
                    format!("δ = {}", proper.delta),
                    proper.violations as f64,
                    0.0,
                    proper.violations == 0,
                )
                .with_detail(format!("ε = {:.4e}, c = {:.4e}", proper.epsilon, proper.c)),
            );
            out.record("height_bound", &h)?;
            out.record("properness", &proper)?;
        } else {
            out.push(Check::info("−r̂ < u < r̂", "solved graph", f64::NAN).with_detail(format!("no starlike certificate: {cert:?}")));
        }
    }
    Ok(())
}

pub fn rigidity(cfg: &RunConfig, model: &MetricModel, sink: &mut Sink, out: &mut Outcome) -> Result<()> {
    let r = cfg.rigidity.clone().unwrap_or_default();
    let data = boundary(cfg, "rigidity")?;
    let opts = FlatnessOptions {
        spacing: r.spacing.get(),
        angular_cells: r.angular_cells,
        inner_radius: r.inner_radius.get(),
        collar: cfg.tolerances.collar,
        solver: cfg.solver,
    };
    let trend = bernstein_flatness_test(model, &data, &r.radii, &opts).context("rigidity_suite")?;
    sink.csv("rigidity/flatness.csv", |w| trend.write_csv(w))?;
    out.push(Check::gate(
        "sup_{B_1} ‖A‖² non-increasing in R",
        format!("{} radii", trend.rows.len()),
        trend.rows.last().map_or(0.0, |x| x.sup_a2_inner),
        FLATNESS_NOISE,
        trend.non_increasing,
    ));
    let affine_on_flat = matches!(data, BoundaryData::Affine { .. }) && matches!(model.kind(), MetricKind::Flat);
    for row in &trend.rows {
        let scope = format!("R = {}", row.radius);
        if affine_on_flat {
            out.push(Check::at_most("‖A‖² ≡ 0", &scope, row.sup_a2, cfg.tolerances.flat_a2));
        }
        if data.is_constant() {
            out.push(Check::at_most("Θ ≡ −1", &scope, row.sup_theta_plus_one, cfg.tolerances.slice_theta));
        }
    }
    out.record("flatness", &trend)?;
    Ok(())
}

/// Runs every section the configuration provides.
pub fn full_suite(cfg: &RunConfig, model: &MetricModel, sink: &mut Sink, out: &mut Outcome) -> Result<()> {
    let mut ran = 0;
    if cfg.domain.is_some() && cfg.boundary.is_some() {
        let levels = solve(cfg, model, sink, out)?;
        verify(cfg, model, &levels, sink, out)?;
        ran += 1;
    }
    if cfg.parabolicity.is_some() {
        parabolicity(cfg, model, sink, out)?;
        ran += 1;
    }
    if cfg.wedge.is_some() {
        wedge(cfg, model, sink, out)?;
        ran += 1;
    }
    if cfg.rigidity.is_some() && cfg.boundary.is_some() {
        rigidity(cfg, model, sink, out)?;
        ran += 1;
    }
    if ran == 0 {
        bail!("the configuration provides no section the suite can run");
    }
    Ok(())
}
