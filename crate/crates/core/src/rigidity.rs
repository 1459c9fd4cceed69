//! Identities for the hyperbolic angle `Θ` of maximal graphs and flattening
//! of maximal graphs over growing discs.

use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use crate::domain::Domain;
use crate::error::Result;
use crate::functions::BoundaryData;
use crate::geometry::MetricModel;
use crate::graph::{gauss_map_fields, induce_metric, laplace_beltrami, DiscreteOperator, ResidualStats, SurfaceFields};
use crate::grid::{build_grid, Resolution};
use crate::parabolicity::Hypothesis;
use crate::solver::{solve_dirichlet, SolverOptions};

/// Differences in `sup ‖A‖²` below this are roundoff, not growth.
pub const FLATNESS_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct ThetaIdentityReport {
    pub collar: usize,
    pub spacing: f64,
    /// `ΔΘ − Θ(κ(Θ² − 1) + ‖A‖²)`.
    pub laplacian: ResidualStats,
    /// `‖∇Θ‖² − ½‖A‖²(Θ² − 1)`.
    pub gradient: ResidualStats,
}

pub fn theta_identities_check(fields: &SurfaceFields, op: &DiscreteOperator, collar: usize) -> ThetaIdentityReport {
    let grid = op.grid();
    let mask = grid.interior_mask(collar);
    let lap = op.laplacian(&fields.theta);
    let grad = op.gradient_norm(&fields.theta);
    let nodes = || (0..fields.len()).filter(|&a| mask[a]);
    let rhs_lap = |a: usize| {
        let t = fields.theta[a];
        t * (fields.kappa[a] * (t * t - 1.0) + fields.a_norm2[a])
    };
    let rhs_grad = |a: usize| 0.5 * fields.a_norm2[a] * (fields.theta[a].powi(2) - 1.0);
    ThetaIdentityReport {
        collar,
        spacing: grid.spacing(),
        laplacian: ResidualStats::over(nodes().map(|a| (a, lap[a] - rhs_lap(a)))),
        gradient: ResidualStats::over(nodes().map(|a| (a, grad[a] - rhs_grad(a)))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseThetaReport {
    pub collar: usize,
    pub spacing: f64,
    /// Interior min of the discrete `Δ(1/Θ)`.
    pub min_laplacian: f64,
    pub argmin: Option<usize>,
    /// Nodes violating `−1 ≤ 1/Θ < 0`.
    pub range_violations: usize,
    pub tolerance: f64,
    pub hypothesis: Hypothesis,
    /// `None` when the curvature hypothesis fails.
    pub pass: Option<bool>,
}

pub fn inverse_theta_subharmonic(
    fields: &SurfaceFields,
    op: &DiscreteOperator,
    collar: usize,
    tolerance: f64,
) -> InverseThetaReport {
    let grid = op.grid();
    let mask = grid.interior_mask(collar);
    let inv: Vec<f64> = fields.theta.iter().map(|t| 1.0 / t).collect();
    let range_violations = inv.iter().filter(|&&v| !(-1.0..0.0).contains(&v)).count();
    let lap = op.laplacian(&inv);
    let (neg_min, argmin) =
        ResidualStats::signed_max((0..fields.len()).filter(|&a| mask[a]).map(|a| (a, -lap[a])));
    let min_laplacian = -neg_min;
    let hypothesis = Hypothesis::of(fields);
    InverseThetaReport {
        collar,
        spacing: grid.spacing(),
        min_laplacian,
        argmin,
        range_violations,
        tolerance,
        hypothesis,
        pass: hypothesis
            .holds()
            .then_some(min_laplacian >= -tolerance && range_violations == 0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatnessOptions {
    pub spacing: f64,
    pub angular_cells: usize,
    /// Radius of the fixed inner disc on which `‖A‖²` is tracked.
    pub inner_radius: f64,
    /// Cells excluded next to `∂B_R` from the whole-disc supremum.
    pub collar: usize,
    pub solver: SolverOptions,
}

impl Default for FlatnessOptions {
    fn default() -> Self {
        FlatnessOptions {
            spacing: 1.0 / 16.0,
            angular_cells: 64,
            inner_radius: 1.0,
            collar: 2,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessRow {
    pub radius: f64,
    /// `sup ‖A‖²` over `B_inner`.
    pub sup_a2_inner: f64,
    /// `sup ‖A‖²` over the interior of `B_R`.
    pub sup_a2: f64,
    pub sup_theta_plus_one: f64,
    pub residual: f64,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessTrend {
    pub data: BoundaryData,
    pub rows: Vec<FlatnessRow>,
    /// `sup_{B_inner} ‖A‖²` is non-increasing in `R`, up to [`FLATNESS_NOISE`].
    pub non_increasing: bool,
}

impl FlatnessTrend {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "R,sup_A2_inner,sup_A2,sup_abs_theta_plus_1,residual,newton_iterations")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                r.radius, r.sup_a2_inner, r.sup_a2, r.sup_theta_plus_one, r.residual, r.newton_iterations
            )?;
        }
        Ok(())
    }
}

/// Solves the Dirichlet problem on `B_R` for each `R` (in parallel) and
/// tracks the second fundamental form.
pub fn bernstein_flatness_test(
    model: &MetricModel,
    data: &BoundaryData,
    radii: &[f64],
    opts: &FlatnessOptions,
) -> Result<FlatnessTrend> {
    let rows = radii
        .par_iter()
        .map(|&radius| {
            let grid = build_grid(
                model,
                &Domain::GeodesicDisc { radius },
                Resolution {
                    radial_cells: ((radius / opts.spacing).round() as usize).max(8),
                    angular_cells: opts.angular_cells,
                },
            )?;
            let sol = solve_dirichlet(&grid, data, &opts.solver)?;
            let fields = gauss_map_fields(&grid, &sol.graph);
            let mask = grid.interior_mask(opts.collar);
            let mut row = FlatnessRow {
                radius,
                sup_a2_inner: 0.0,
                sup_a2: 0.0,
                sup_theta_plus_one: 0.0,
                residual: sol.residual(),
                newton_iterations: sol.history.len() - 1,
            };
            for a in 0..grid.len() {
                row.sup_theta_plus_one = row.sup_theta_plus_one.max((fields.theta[a] + 1.0).abs());
                if mask[a] {
                    row.sup_a2 = row.sup_a2.max(fields.a_norm2[a]);
                }
                if fields.r[a] <= opts.inner_radius + 1e-12 {
                    row.sup_a2_inner = row.sup_a2_inner.max(fields.a_norm2[a]);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<FlatnessRow>>>()?;
    let non_increasing = rows.windows(2).all(|w| w[1].sup_a2_inner <= w[0].sup_a2_inner + FLATNESS_NOISE);
    Ok(FlatnessTrend {
        data: data.clone(),
        rows,
        non_increasing,
    })
}

/// Convenience: the operator and fields of a graph in one call.
pub fn surface_of<'g>(
    grid: &'g crate::grid::Grid,
    u: &crate::graph::GraphFunction,
) -> (SurfaceFields, DiscreteOperator<'g>) {
    let op = laplace_beltrami(grid, u, &induce_metric(grid, u));
    (gauss_map_fields(grid, u), op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_graph;

    #[test]
    fn tilted_plane_identities_vanish() {
        let m = MetricModel::flat();
        let g = build_grid(
            &m,
            &Domain::GeodesicDisc { radius: 1.0 },
            Resolution {
                radial_cells: 16,
                angular_cells: 32,
            },
        )
        .unwrap();
        let u = make_graph(&g, g.sample(|r, t| 0.6 * r * t.cos())).unwrap();
        let (f, op) = surface_of(&g, &u);
        let r = theta_identities_check(&f, &op, 2);
        assert!(r.laplacian.max < 1e-10 && r.gradient.max < 1e-10, "{r:?}");
        let inv = inverse_theta_subharmonic(&f, &op, 2, 1e-8);
        assert_eq!(inv.pass, Some(true));
        assert!(inv.min_laplacian.abs() < 1e-10);
    }

    #[test]
    fn affine_data_stays_flat() {
        let t = bernstein_flatness_test(
            &MetricModel::flat(),
            &BoundaryData::Affine { a: 0.6, b: 0.0, c: 0.0 },
            &[2.0, 4.0],
            &FlatnessOptions::default(),
        )
        .unwrap();
        assert!(t.rows.iter().all(|r| r.sup_a2 < 1e-10), "{:?}", t.rows);
    }

    #[test]
    fn sphere_cap_with_constant_data_is_a_slice() {
        let t = bernstein_flatness_test(
            &MetricModel::sphere(1.0).unwrap(),
            &BoundaryData::Constant { value: 0.4 },
            &[1.0, 2.0],
            &FlatnessOptions::default(),
        )
        .unwrap();
        assert!(t.rows.iter().all(|r| r.sup_theta_plus_one == 0.0));
    }
}
