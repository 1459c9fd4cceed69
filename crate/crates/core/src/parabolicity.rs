//! Probes of parabolicity: the `φ = r² − h²` superharmonicity chain,
//! annulus capacities, and random walks on the operator's weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::functions::BoundaryData;
use crate::geometry::{MetricModel, CURVATURE_SIGN_TOL};
use crate::graph::{
    field_phi_derivatives, gauss_map_fields, induce_metric, laplace_beltrami, make_graph, DiscreteOperator,
    ResidualStats, SurfaceFields,
};
use crate::grid::{build_grid, Grid, Resolution};
use crate::solver::{solve_dirichlet, SolverOptions};

/// Off-diagonal weights below `−NEGATIVE_WEIGHT_TOL · |diagonal|` abort a
/// random walk; smaller ones are rounding of zero weights and are dropped.
pub const NEGATIVE_WEIGHT_TOL: f64 = 1e-12;

/// Relative residual bound of the `c / log R` fit for a decay verdict.
pub const DECAY_FIT_TOL: f64 = 0.10;
/// Relative spread of the last three capacities for a plateau verdict.
pub const PLATEAU_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Hypothesis {
    Satisfied { min_curvature: f64 },
    #[serde(rename = "hypothesis violated")]
    Violated { min_curvature: f64 },
}

impl Hypothesis {
    pub fn of(fields: &SurfaceFields) -> Self {
        let min_curvature = fields.kappa.iter().copied().fold(f64::INFINITY, f64::min);
        if min_curvature >= -CURVATURE_SIGN_TOL {
            Hypothesis::Satisfied { min_curvature }
        } else {
            Hypothesis::Violated { min_curvature }
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, Hypothesis::Satisfied { .. })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperharmonicityReport {
    pub phi_min: f64,
    pub collar: usize,
    pub spacing: f64,
    pub admissible: usize,
    /// Largest discrete `Δ log φ` over admissible nodes.
    pub max_lap_log_phi: f64,
    pub argmax: Option<usize>,
    pub tolerance: f64,
    pub hypothesis: Hypothesis,
    /// `None` when the curvature hypothesis fails and nothing is asserted.
    pub pass: Option<bool>,
}

/// Checks `Δ log φ ≤ tolerance` on interior nodes with `φ ≥ phi_min`
/// (default `10Δ²`).
pub fn superharmonicity_report(
    fields: &SurfaceFields,
    op: &DiscreteOperator,
    phi_min: Option<f64>,
    collar: usize,
    tolerance: f64,
) -> Result<SuperharmonicityReport> {
    let d = field_phi_derivatives(fields, op, phi_min, collar)?;
    let (max, argmax) = ResidualStats::signed_max(
        (0..fields.len())
            .filter(|&a| d.admissible[a])
            .map(|a| (a, d.lap_log_phi[a])),
    );
    let hypothesis = Hypothesis::of(fields);
    Ok(SuperharmonicityReport {
        phi_min: d.phi_min,
        collar,
        spacing: op.grid().spacing(),
        admissible: d.admissible.iter().filter(|&&x| x).count(),
        max_lap_log_phi: max,
        argmax,
        tolerance,
        hypothesis,
        pass: hypothesis.holds().then_some(max <= tolerance),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiInequalityReport {
    pub collar: usize,
    pub spacing: f64,
    /// Interior max of `½Δφ − 2`.
    pub half_lap_phi_excess: f64,
    /// Interior max of `4φ − ‖∇φ‖²`.
    pub gradient_deficit: f64,
    /// `‖∇φ‖² − 4φ − 4(r⟨∇̄r̄, N⟩ + hΘ)²`, pole excluded.
    pub decomposition_residual: ResidualStats,
    pub tolerance: f64,
    pub hypothesis: Hypothesis,
    pub pass: Option<bool>,
}

pub fn check_phi_inequalities(
    fields: &SurfaceFields,
    op: &DiscreteOperator,
    collar: usize,
    tolerance: f64,
) -> Result<PhiInequalityReport> {
    let d = field_phi_derivatives(fields, op, None, collar)?;
    let nodes = || (0..fields.len()).filter(|&a| d.interior[a]);
    let (excess, _) = ResidualStats::signed_max(nodes().map(|a| (a, 0.5 * d.lap_phi[a] - 2.0)));
    let (deficit, _) =
        ResidualStats::signed_max(nodes().map(|a| (a, 4.0 * fields.phi[a] - d.grad_phi_norm2[a])));
    let hypothesis = Hypothesis::of(fields);
    Ok(PhiInequalityReport {
        collar,
        spacing: op.grid().spacing(),
        half_lap_phi_excess: excess,
        gradient_deficit: deficit,
        decomposition_residual: d.decomposition_residual,
        tolerance,
        hypothesis,
        pass: hypothesis
            .holds()
            .then_some(excess <= tolerance && deficit <= tolerance),
    })
}

fn marker_mask(n: usize, nodes: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &a in nodes {
        m[a] = true;
    }
    m
}

fn check_markers(n: usize, inner: &[usize], outer: &[usize]) -> Result<()> {
    if inner.is_empty() || outer.is_empty() {
        return Err(Error::Precondition("inner and outer node sets must be nonempty".into()));
    }
    if let Some(a) = inner.iter().chain(outer).find(|&&a| a >= n) {
        return Err(Error::Precondition(format!("marker node {a} out of range")));
    }
    let im = marker_mask(n, inner);
    if let Some(a) = outer.iter().find(|&&a| im[a]) {
        return Err(Error::Precondition(format!("node {a} is marked both inner and outer")));
    }
    Ok(())
}

/// The discrete harmonic function equal to 1 on `inner`, 0 on `outer`.
pub fn harmonic_measure(op: &DiscreteOperator, inner: &[usize], outer: &[usize]) -> Result<Vec<f64>> {
    let n = op.grid().len();
    check_markers(n, inner, outer)?;
    let mut fixed = vec![None; n];
    for &a in inner {
        fixed[a] = Some(1.0);
    }
    for &a in outer {
        fixed[a] = Some(0.0);
    }
    op.harmonic_extension(&fixed)
}

/// Capacity of the condenser `(inner, outer)`: the Dirichlet energy `vᵀKv`
/// of its harmonic measure.
pub fn annulus_capacity(op: &DiscreteOperator, inner: &[usize], outer: &[usize]) -> Result<f64> {
    let v = harmonic_measure(op, inner, outer)?;
    Ok(op.energy(&v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "decay-consistent-with-parabolic")]
    Decay,
    #[serde(rename = "plateau-consistent-with-non-parabolic")]
    Plateau,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Decay => "decay-consistent-with-parabolic",
            Verdict::Plateau => "plateau-consistent-with-non-parabolic",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Surface over which capacities are measured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TrendSurface {
    /// The slice `t = height`.
    Slice { height: f64 },
    /// The maximal graph with the given Dirichlet data on each annulus.
    Maximal { data: BoundaryData },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityOptions {
    pub inner: f64,
    /// Radial spacing of every annulus grid.
    pub spacing: f64,
    pub angular_cells: usize,
    pub solver: SolverOptions,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            inner: 1.0,
            spacing: 1.0 / 16.0,
            angular_cells: 64,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityCurve {
    pub inner: f64,
    pub radii: Vec<f64>,
    pub capacities: Vec<f64>,
    /// Least-squares `c` in `cap ≈ c / log(R / inner)`, relative residuals.
    pub fitted_c: f64,
    pub fit_max_relative_residual: f64,
    /// `(max − min) / mean` over the last three capacities.
    pub plateau_spread: f64,
    /// Largest increase `cap_{k+1} − cap_k` (0 when non-increasing).
    pub monotonicity_defect: f64,
    pub verdict: Verdict,
}

pub fn classify_capacities(inner: f64, radii: &[f64], capacities: &[f64]) -> Result<CapacityCurve> {
    if radii.len() < 4 || radii.len() != capacities.len() {
        return Err(Error::InvalidParameter(format!(
            "a capacity trend needs at least 4 radii, got {}",
            radii.len()
        )));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > inner) {
        return Err(Error::InvalidParameter("radii must increase and exceed the inner radius".into()));
    }
    let z: Vec<f64> = radii
        .iter()
        .zip(capacities)
        .map(|(r, c)| 1.0 / ((r / inner).ln() * c))
        .collect();
    let fitted_c = z.iter().sum::<f64>() / z.iter().map(|v| v * v).sum::<f64>();
    let fit_max_relative_residual = z.iter().map(|v| (fitted_c * v - 1.0).abs()).fold(0.0, f64::max);
    let tail = &capacities[capacities.len() - 3..];
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = tail.iter().sum::<f64>() / 3.0;
    let plateau_spread = (hi - lo) / mean;
    let monotonicity_defect = capacities.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max);
    let verdict = if fit_max_relative_residual < DECAY_FIT_TOL {
        Verdict::Decay
    } else if mean > 0.0 && plateau_spread < PLATEAU_BAND {
        Verdict::Plateau
    } else {
        Verdict::Inconclusive
    };
    Ok(CapacityCurve {
        inner,
        radii: radii.to_vec(),
        capacities: capacities.to_vec(),
        fitted_c,
        fit_max_relative_residual,
        plateau_spread,
        monotonicity_defect,
        verdict,
    })
}

fn annulus_grid(model: &MetricModel, inner: f64, outer: f64, opts: &CapacityOptions) -> Result<Grid> {
    let domain = Domain::GeodesicAnnulus { inner, outer };
    let radial_cells = (((outer - inner) / opts.spacing).ceil() as usize).max(8);
    build_grid(
        model,
        &domain,
        Resolution {
            radial_cells,
            angular_cells: opts.angular_cells,
        },
    )
}

/// Capacity of `{ρ ≤ inner}` relative to `{ρ ≥ R}` on the given surface,
/// for each `R` in `radii` (annuli solved in parallel).
pub fn capacity_trend(
    model: &MetricModel,
    surface: &TrendSurface,
    radii: &[f64],
    opts: &CapacityOptions,
) -> Result<CapacityCurve> {
    if radii.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "a capacity trend needs at least 4 radii, got {}",
            radii.len()
        )));
    }
    let capacities = radii
        .par_iter()
        .map(|&r| {
            let grid = annulus_grid(model, opts.inner, r, opts)?;
            let graph = match surface {
                TrendSurface::Slice { height } => make_graph(&grid, vec![*height; grid.len()])?,
                TrendSurface::Maximal { data } => solve_dirichlet(&grid, data, &opts.solver)?.graph,
            };
            let op = laplace_beltrami(&grid, &graph, &induce_metric(&grid, &graph));
            annulus_capacity(&op, grid.inner_boundary(), grid.outer_boundary())
        })
        .collect::<Result<Vec<f64>>>()?;
    classify_capacities(opts.inner, radii, &capacities)
}

/// `2π / ∫_{inner}^{outer} dρ / f(ρ)`: capacity of a rotationally symmetric
/// slice annulus, by quadrature.
pub fn rotsym_slice_capacity(model: &MetricModel, inner: f64, outer: f64) -> f64 {
    let integral = crate::ode::integrate(|r| 1.0 / model.warp(r).f, inner, outer, 1.0 / 64.0);
    2.0 * PI / integral
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkStats {
    pub n_walks: usize,
    pub seed: u64,
    pub start: usize,
    pub escapes: usize,
    pub escape_probability: f64,
    /// Binomial standard error `√(p(1−p)/n)`.
    pub stderr: f64,
    /// Value of the discrete harmonic measure of `outer` at `start`.
    pub harmonic: f64,
    /// `|p − harmonic| / stderr` (0 when both agree exactly).
    pub deviation_sigmas: f64,
}

struct Kernel {
    targets: Vec<Vec<usize>>,
    cumulative: Vec<Vec<f64>>,
}

fn transition_kernel(op: &DiscreteOperator) -> Result<Kernel> {
    let k = op.stiffness();
    let n = k.dim();
    let diag = k.diagonal();
    let mut targets = Vec::with_capacity(n);
    let mut cumulative = Vec::with_capacity(n);
    for a in 0..n {
        let mut t = Vec::new();
        let mut c = Vec::new();
        let mut total = 0.0;
        for (b, v) in k.row(a) {
            if b == a {
                continue;
            }
            let w = -v;
            if w < -NEGATIVE_WEIGHT_TOL * diag[a].abs() {
                return Err(Error::NegativeWeight {
                    from: a,
                    to: b,
                    weight: w,
                });
            }
            if w > 0.0 {
                total += w;
                t.push(b);
                c.push(total);
            }
        }
        for x in &mut c {
            *x /= total;
        }
        targets.push(t);
        cumulative.push(c);
    }
    Ok(Kernel { targets, cumulative })
}

const MAX_WALK_STEPS: u64 = 100_000_000;

/// Monte Carlo estimate of the probability that the walk with transition
/// probabilities `−K_ab / Σ_b −K_ab` started at `start` reaches `outer`
/// before `inner`. Walker `i` draws from a ChaCha8 stream `(seed, i)`.
pub fn random_walk_escape(
    op: &DiscreteOperator,
    start: usize,
    inner: &[usize],
    outer: &[usize],
    n_walks: usize,
    seed: u64,
) -> Result<WalkStats> {
    let n = op.grid().len();
    check_markers(n, inner, outer)?;
    if start >= n {
        return Err(Error::Precondition(format!("start node {start} out of range")));
    }
    if n_walks == 0 {
        return Err(Error::InvalidParameter("n_walks must be positive".into()));
    }
    let inner_mask = marker_mask(n, inner);
    let outer_mask = marker_mask(n, outer);
    if outer_mask[start] {
        return Err(Error::Precondition(format!("start node {start} lies on the outer set")));
    }
    let harmonic = harmonic_measure(op, inner, outer).map(|v| 1.0 - v[start])?;
    let kernel = transition_kernel(op)?;
    let escapes = (0..n_walks)
        .into_par_iter()
        .map(|walker| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(walker as u64);
            let mut a = start;
            for _ in 0..MAX_WALK_STEPS {
                if inner_mask[a] {
                    return Ok(0usize);
                }
                if outer_mask[a] {
                    return Ok(1);
                }
                let x: f64 = rng.gen();
                let c = &kernel.cumulative[a];
                let k = c.partition_point(|&p| p <= x).min(c.len() - 1);
                a = kernel.targets[a][k];
            }
            Err(Error::Precondition(format!("walker {walker} did not terminate")))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    let p = escapes as f64 / n_walks as f64;
    let stderr = (p * (1.0 - p) / n_walks as f64).sqrt();
    let gap = (p - harmonic).abs();
    Ok(WalkStats {
        n_walks,
        seed,
        start,
        escapes,
        escape_probability: p,
        stderr,
        harmonic,
        deviation_sigmas: if gap == 0.0 { 0.0 } else { gap / stderr },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SublevelCheck {
    pub b: f64,
    /// `√(b + t0²)`: radius bounding `{φ ≤ b}` on the slice.
    pub bound: f64,
    pub max_radius: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub t0: f64,
    pub max_abs_mean_curvature: f64,
    /// Nodes where the sign of `φ` disagrees with the sign of `r − |t0|`.
    pub positivity_mismatches: usize,
    pub sublevels: Vec<SublevelCheck>,
    pub hypothesis: Hypothesis,
    pub capacity: CapacityCurve,
    /// Capacity of the slice from `ρ = 1` to infinity, by quadrature.
    pub limit_capacity: f64,
}

/// The slice `t = t0` in `H² × ℝ₁`: a maximal surface on which `φ` is
/// eventually positive and proper, yet whose capacities plateau.
pub fn counterexample_slice(t0: f64, radii: &[f64], opts: &CapacityOptions) -> Result<CounterexampleReport> {
    let model = MetricModel::hyperbolic();
    let outer = *radii.last().ok_or_else(|| Error::InvalidParameter("empty radius list".into()))?;
    let grid = build_grid(
        &model,
        &Domain::GeodesicDisc { radius: outer.min(8.0) },
        Resolution {
            radial_cells: 64,
            angular_cells: 32,
        },
    )?;
    let graph = make_graph(&grid, vec![t0; grid.len()])?;
    let fields = gauss_map_fields(&grid, &graph);
    let max_abs_mean_curvature = (0..grid.len())
        .filter(|&a| !grid.is_boundary(a))
        .map(|a| fields.mean_curvature[a].abs())
        .fold(0.0, f64::max);
    let positivity_mismatches = (0..grid.len())
        .filter(|&a| {
            let r = fields.r[a];
            let gap = r - t0.abs();
            gap.abs() > 1e-12 && (fields.phi[a] > 0.0) != (gap > 0.0)
        })
        .count();
    let sublevels = [0.5, 1.0, 4.0, 9.0]
        .iter()
        .map(|&b| {
            let bound = (b + t0 * t0).sqrt();
            let max_radius = (0..grid.len())
                .filter(|&a| fields.phi[a] <= b)
                .map(|a| fields.r[a])
                .fold(0.0, f64::max);
            SublevelCheck {
                b,
                bound,
                max_radius,
                bounded: max_radius <= bound + 1e-12,
            }
        })
        .collect();
    let capacity = capacity_trend(&model, &TrendSurface::Slice { height: t0 }, radii, opts)?;
    Ok(CounterexampleReport {
        t0,
        max_abs_mean_curvature,
        positivity_mismatches,
        sublevels,
        hypothesis: Hypothesis::of(&fields),
        capacity,
        limit_capacity: 2.0 * PI / -(opts.inner / 2.0).tanh().ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slice_op(grid: &Grid) -> DiscreteOperator<'_> {
        let u = make_graph(grid, vec![0.0; grid.len()]).unwrap();
        laplace_beltrami(grid, &u, &induce_metric(grid, &u))
    }

    fn annulus(inner: f64, outer: f64, nr: usize, nt: usize) -> Grid {
        build_grid(
            &MetricModel::flat(),
            &Domain::GeodesicAnnulus { inner, outer },
            Resolution {
                radial_cells: nr,
                angular_cells: nt,
            },
        )
        .unwrap()
    }

    #[test]
    fn flat_annulus_capacity_matches_log_law() {
        let g = annulus(1.0, std::f64::consts::E, 64, 128);
        let op = slice_op(&g);
        let cap = annulus_capacity(&op, g.inner_boundary(), g.outer_boundary()).unwrap();
        assert!((cap - 2.0 * PI).abs() / (2.0 * PI) < 2e-3, "{cap}");
        let v = harmonic_measure(&op, g.inner_boundary(), g.outer_boundary()).unwrap();
        assert!(v.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
    }

    #[test]
    fn markers_are_validated() {
        let g = annulus(1.0, 2.0, 8, 16);
        let op = slice_op(&g);
        assert!(annulus_capacity(&op, &[], g.outer_boundary()).is_err());
        assert!(annulus_capacity(&op, g.inner_boundary(), g.inner_boundary()).is_err());
    }

    #[test]
    fn verdicts_on_synthetic_curves() {
        let radii = [4.0, 8.0, 16.0, 32.0];
        let decay: Vec<f64> = radii.iter().map(|r: &f64| 2.0 * PI / r.ln()).collect();
        let c = classify_capacities(1.0, &radii, &decay).unwrap();
        assert_eq!(c.verdict, Verdict::Decay);
        assert!((c.fitted_c - 2.0 * PI).abs() < 1e-12);
        let flat = classify_capacities(1.0, &radii, &[8.5, 8.15, 8.14, 8.139]).unwrap();
        assert_eq!(flat.verdict, Verdict::Plateau);
        let odd = classify_capacities(1.0, &radii, &[1.0, 3.0, 1.0, 3.0]).unwrap();
        assert_eq!(odd.verdict, Verdict::Inconclusive);
        assert!(classify_capacities(1.0, &radii[..3], &decay[..3]).is_err());
    }

    #[test]
    fn walk_from_inner_boundary_is_absorbed() {
        let g = annulus(1.0, 2.0, 8, 64);
        let op = slice_op(&g);
        let s = random_walk_escape(&op, g.inner_boundary()[0], g.inner_boundary(), g.outer_boundary(), 100, 1)
            .unwrap();
        assert_eq!(s.escapes, 0);
        assert!(random_walk_escape(&op, g.outer_boundary()[0], g.inner_boundary(), g.outer_boundary(), 100, 1)
            .is_err());
    }

    #[test]
    fn coarse_stencil_with_obtuse_angles_aborts_the_walk() {
        let g = annulus(1.0, 2.0, 8, 16);
        let op = slice_op(&g);
        let start = g.node_id(4, 0);
        assert!(matches!(
            random_walk_escape(&op, start, g.inner_boundary(), g.outer_boundary(), 10, 1),
            Err(Error::NegativeWeight { .. })
        ));
    }

    #[test]
    fn walk_is_reproducible() {
        let g = annulus(1.0, 2.0, 8, 64);
        let op = slice_op(&g);
        let start = g.node_id(4, 0);
        let a = random_walk_escape(&op, start, g.inner_boundary(), g.outer_boundary(), 2000, 7).unwrap();
        let b = random_walk_escape(&op, start, g.inner_boundary(), g.outer_boundary(), 2000, 7).unwrap();
        assert_eq!(a.escapes, b.escapes);
        assert!(a.deviation_sigmas < 4.0, "{a:?}");
    }

    #[test]
    fn slice_chain_equality_cases() {
        let g = annulus(1.0, 4.0, 48, 192);
        let u = make_graph(&g, vec![0.0; g.len()]).unwrap();
        let op = laplace_beltrami(&g, &u, &induce_metric(&g, &u));
        let f = gauss_map_fields(&g, &u);
        let s = superharmonicity_report(&f, &op, None, 2, 1e-2).unwrap();
        assert_eq!(s.pass, Some(true));
        let p = check_phi_inequalities(&f, &op, 2, 1e-2).unwrap();
        assert_eq!(p.pass, Some(true));
        assert!(p.half_lap_phi_excess.abs() < 1e-2 && p.gradient_deficit.abs() < 1e-2);
    }

    #[test]
    fn hyperbolic_slice_is_flagged() {
        let g = build_grid(
            &MetricModel::hyperbolic(),
            &Domain::GeodesicAnnulus {
                inner: 1.0,
                outer: 3.0,
            },
            Resolution {
                radial_cells: 32,
                angular_cells: 64,
            },
        )
        .unwrap();
        let u = make_graph(&g, vec![0.0; g.len()]).unwrap();
        let op = laplace_beltrami(&g, &u, &induce_metric(&g, &u));
        let s = superharmonicity_report(&gauss_map_fields(&g, &u), &op, None, 2, 1e-2).unwrap();
        assert!(!s.hypothesis.holds());
        assert_eq!(s.pass, None);
    }

    #[test]
    fn quadrature_capacity_limit() {
        let m = MetricModel::hyperbolic();
        let limit = 2.0 * PI / -(0.5f64).tanh().ln();
        assert!((rotsym_slice_capacity(&m, 1.0, 40.0) - limit).abs() < 1e-10);
        assert!((limit - 8.1395).abs() < 1e-4);
        let flat = MetricModel::flat();
        assert!((rotsym_slice_capacity(&flat, 1.0, std::f64::consts::E) - 2.0 * PI).abs() < 1e-10);
    }
}
