//! Dirichlet problem for maximal graphs.
//!
//! Maximal graphs are the critical points of the area functional
//! `E(u) = ∫ √(1 − ‖∇̂u‖²) dA_M`, which is concave on spacelike functions.
//! Its P1 discretization is maximized by Newton's method with a backtracking
//! line search that keeps every iterate above the spacelike margin floor and
//! never lets the area decrease.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::functions::BoundaryData;
use crate::graph::{area_functional, area_gradient, gauss_map_fields, laplace_beltrami, induce_metric, make_graph};
use crate::graph::GraphFunction;
use crate::grid::Grid;
use crate::sparse::{solve_dirichlet_system, CsrMatrix};

/// Relative slack for the area comparison in the line search, measured
/// against the sum of the per-triangle increments' magnitudes.
const ENERGY_SLACK: f64 = 1e-12;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Target for the largest interior discrete `|H|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Every iterate keeps `1 − ‖∇̂u‖² ≥ margin_floor` on all triangles.
    pub margin_floor: f64,
    /// Backtracking factor of the line search.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-8,
            max_iterations: 50,
            margin_floor: 1e-3,
            damping: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.margin_floor > 0.0 && self.margin_floor < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "margin_floor must lie in (0, 1), got {}",
                self.margin_floor
            )));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidParameter(format!("damping must lie in (0, 1), got {}", self.damping)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub residual: f64,
    pub energy: f64,
    pub margin: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub graph: GraphFunction,
    pub history: Vec<HistoryRow>,
}

impl Solution {
    pub fn residual(&self) -> f64 {
        self.history.last().map_or(0.0, |r| r.residual)
    }

    /// Largest decrease of the area between consecutive accepted iterates
    /// (zero when the area is non-decreasing).
    pub fn energy_decrease(&self) -> f64 {
        self.history
            .windows(2)
            .map(|w| (w[0].energy - w[1].energy).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn write_history_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,residual,energy,margin,step")?;
        for r in &self.history {
            writeln!(out, "{},{:.17e},{:.17e},{:.17e},{:.17e}", r.iteration, r.residual, r.energy, r.margin, r.step)?;
        }
        Ok(())
    }
}

fn triangle_margin(grid: &Grid, values: &[f64]) -> f64 {
    grid.triangles()
        .iter()
        .map(|t| 1.0 - t.norm2(t.gradient(values)))
        .fold(f64::INFINITY, f64::min)
}

fn interior_residual(grid: &Grid, grad: &[f64]) -> f64 {
    let w = grid.area_weights();
    (0..grid.len())
        .filter(|&a| !grid.is_boundary(a))
        .map(|a| (grad[a] / (2.0 * w[a])).abs())
        .fold(0.0, f64::max)
}

/// `E(u + s·δ) − E(u)` summed per triangle in a form free of cancellation:
/// `W' − W = −(‖p'‖² − ‖p‖²)/(W + W')` with `‖p'‖² − ‖p‖² = s·dᵀG⁻¹(2p + s·d)`.
/// Returns the increment and the sum of the magnitudes of its terms, or
/// `None` if a triangle leaves the spacelike cone.
fn area_increment(grid: &Grid, values: &[f64], delta: &[f64], s: f64) -> Option<(f64, f64)> {
    let (mut total, mut scale) = (0.0, 0.0);
    for t in grid.triangles() {
        let p = t.gradient(values);
        let d = t.gradient(delta);
        let gi = &t.metric_inv;
        let q = [2.0 * p[0] + s * d[0], 2.0 * p[1] + s * d[1]];
        let change = s * (d[0] * (gi[0][0] * q[0] + gi[0][1] * q[1]) + d[1] * (gi[1][0] * q[0] + gi[1][1] * q[1]));
        let n2 = t.norm2(p);
        let n2_new = n2 + change;
        if !(n2_new < 1.0) {
            return None;
        }
        let term = -t.area * t.sqrt_det * change / ((1.0 - n2).sqrt() + (1.0 - n2_new).sqrt());
        total += term;
        scale += term.abs();
    }
    Some((total, scale))
}

/// Hessian of `−E`: `Σ_T |T|√G ∇φᵀ (G⁻¹/W + G⁻¹p pᵀG⁻¹/W³) ∇φ`.
fn area_hessian(grid: &Grid, values: &[f64]) -> CsrMatrix {
    let mut triplets = Vec::with_capacity(9 * grid.triangles().len());
    for t in grid.triangles() {
        let p = t.gradient(values);
        let w2 = 1.0 - t.norm2(p);
        let w = w2.sqrt();
        let gi = &t.metric_inv;
        let gp = [gi[0][0] * p[0] + gi[0][1] * p[1], gi[1][0] * p[0] + gi[1][1] * p[1]];
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = gi[i][j] / w + gp[i] * gp[j] / (w2 * w);
            }
        }
        let scale = t.area * t.sqrt_det;
        for a in 0..3 {
            let da = [t.grad[0][a], t.grad[1][a]];
            let md = [m[0][0] * da[0] + m[0][1] * da[1], m[1][0] * da[0] + m[1][1] * da[1]];
            for b in 0..3 {
                let v = scale * (md[0] * t.grad[0][b] + md[1] * t.grad[1][b]);
                triplets.push((t.vertices[a], t.vertices[b], v));
            }
        }
    }
    CsrMatrix::from_triplets(grid.len(), &triplets)
}

/// Harmonic extension of the boundary values with respect to `g_M`.
pub fn harmonic_extension(grid: &Grid, boundary: &[f64]) -> Result<Vec<f64>> {
    let zero = make_graph(grid, vec![0.0; grid.len()])?;
    let op = laplace_beltrami(grid, &zero, &induce_metric(grid, &zero));
    let fixed: Vec<Option<f64>> = (0..grid.len())
        .map(|a| grid.is_boundary(a).then_some(boundary[a]))
        .collect();
    op.harmonic_extension(&fixed)
}

/// Solves the maximal graph equation with Dirichlet data.
pub fn solve_dirichlet(grid: &Grid, data: &BoundaryData, opts: &SolverOptions) -> Result<Solution> {
    let model = grid.model();
    let boundary: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(a, n)| if grid.is_boundary(a) { data.value(model, n.rho, n.theta) } else { 0.0 })
        .collect();
    solve_with_boundary_values(grid, &boundary, opts)
}

/// As [`solve_dirichlet`], with boundary values given per node (entries at
/// interior nodes are ignored).
pub fn solve_with_boundary_values(grid: &Grid, boundary: &[f64], opts: &SolverOptions) -> Result<Solution> {
    opts.validate()?;
    let n = grid.len();
    let free: Vec<bool> = (0..n).map(|a| !grid.is_boundary(a)).collect();
    let bvals: Vec<f64> = (0..n).filter(|&a| !free[a]).map(|a| boundary[a]).collect();
    if let (Some(lo), Some(hi)) = (
        bvals.iter().copied().reduce(f64::min),
        bvals.iter().copied().reduce(f64::max),
    ) {
        if lo == hi {
            let values = vec![lo; n];
            let energy = area_functional(grid, &values);
            return Ok(Solution {
                graph: make_graph(grid, values)?,
                history: vec![HistoryRow {
                    iteration: 0,
                    residual: 0.0,
                    energy,
                    margin: 1.0,
                    step: 0.0,
                }],
            });
        }
    }

    let mut u = harmonic_extension(grid, boundary)?;
    let margin0 = triangle_margin(grid, &u);
    if margin0 < opts.margin_floor {
        return Err(Error::MarginViolation {
            margin: margin0,
            floor: opts.margin_floor,
        });
    }
    let mut energy = area_functional(grid, &u);
    let mut grad = area_gradient(grid, &u);
    let mut residual = interior_residual(grid, &grad);
    let mut history = vec![HistoryRow {
        iteration: 0,
        residual,
        energy,
        margin: margin0,
        step: 0.0,
    }];
    let mut iteration = 0;
    while residual > opts.tolerance {
        if iteration == opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations: iteration,
                last: residual,
                history: history.iter().map(|r| r.residual).collect(),
            });
        }
        iteration += 1;
        let hess = area_hessian(grid, &u);
        let rhs: Vec<f64> = grad.iter().zip(&free).map(|(g, &f)| if f { *g } else { 0.0 }).collect();
        let delta = solve_dirichlet_system(&hess, &rhs, &free, &vec![0.0; n], 1e-13)?;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(x, d)| x + step * d).collect();
            let margin = triangle_margin(grid, &trial);
            if margin >= opts.margin_floor {
                if let Some((gain, scale)) = area_increment(grid, &u, &delta, step) {
                    if gain >= -ENERGY_SLACK * scale {
                        accepted = Some((trial, energy + gain, margin));
                        break;
                    }
                }
            }
            step *= opts.damping;
        }
        let Some((trial, e, margin)) = accepted else {
            return Err(Error::NoConvergence {
                iterations: iteration,
                last: residual,
                history: history.iter().map(|r| r.residual).collect(),
            });
        };
        u = trial;
        energy = e;
        grad = area_gradient(grid, &u);
        residual = interior_residual(grid, &grad);
        history.push(HistoryRow {
            iteration,
            residual,
            energy,
            margin,
            step,
        });
    }
    let graph = make_graph(grid, u)?;
    if graph.spacelike_margin() < opts.margin_floor {
        return Err(Error::MarginViolation {
            margin: graph.spacelike_margin(),
            floor: opts.margin_floor,
        });
    }
    Ok(Solution { graph, history })
}

/// Largest interior `|H|` of the discrete mean curvature field.
pub fn residual_mean_curvature(grid: &Grid, u: &GraphFunction) -> f64 {
    let f = gauss_map_fields(grid, u);
    (0..grid.len())
        .filter(|&a| !grid.is_boundary(a))
        .map(|a| f.mean_curvature[a].abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::geometry::MetricModel;
    use crate::grid::{build_grid, Resolution};

    fn grid(model: &MetricModel, domain: Domain, nr: usize, nt: usize) -> Grid {
        build_grid(
            model,
            &domain,
            Resolution {
                radial_cells: nr,
                angular_cells: nt,
            },
        )
        .unwrap()
    }

    #[test]
    fn affine_data_returns_the_plane() {
        let g = grid(&MetricModel::flat(), Domain::GeodesicDisc { radius: 1.0 }, 16, 32);
        let data = BoundaryData::Affine { a: 0.6, b: 0.0, c: 0.0 };
        let s = solve_dirichlet(&g, &data, &SolverOptions::default()).unwrap();
        for (v, n) in s.graph.values().iter().zip(g.nodes()) {
            assert!((v - 0.6 * n.local[0]).abs() < 1e-10);
        }
        let h = residual_mean_curvature(&g, &s.graph);
        assert!(h < 1e-9, "{h}");
    }

    #[test]
    fn constant_data_short_circuits() {
        let g = grid(&MetricModel::sphere(1.0).unwrap(), Domain::GeodesicDisc { radius: 1.0 }, 16, 32);
        let s = solve_dirichlet(&g, &BoundaryData::Constant { value: 0.7 }, &SolverOptions::default()).unwrap();
        assert!(s.graph.values().iter().all(|&v| v == 0.7));
        assert_eq!(s.history.len(), 1);
    }

    #[test]
    fn catenoid_converges_with_monotone_area() {
        let g = grid(
            &MetricModel::flat(),
            Domain::GeodesicAnnulus {
                inner: 1.0,
                outer: 4.0,
            },
            24,
            64,
        );
        let data = BoundaryData::Radial { flux: 1.0, offset: 0.0 };
        let s = solve_dirichlet(&g, &data, &SolverOptions::default()).unwrap();
        assert!(s.residual() <= 1e-8);
        assert!(s.energy_decrease() <= 1e-12 * s.history[0].energy);
        let err = s
            .graph
            .values()
            .iter()
            .zip(g.nodes())
            .map(|(v, n)| (v - n.rho.asinh()).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-2, "{err}");
    }

    #[test]
    fn steep_data_reports_margin_violation() {
        let g = grid(&MetricModel::flat(), Domain::GeodesicDisc { radius: 1.0 }, 16, 32);
        let data = BoundaryData::Fourier { amplitude: 0.99, mode: 6 };
        assert!(matches!(
            solve_dirichlet(&g, &data, &SolverOptions::default()),
            Err(Error::MarginViolation { .. })
        ));
    }

    #[test]
    fn options_are_validated() {
        let bad = SolverOptions {
            margin_floor: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
