//! Spacelike graphs `Σ(u) = {(x, u(x))}` over a grid, their induced metric
//! `g = g_M − du²`, Gauss-map fields and Laplace–Beltrami operator.

mod fields;
mod identities;
mod operator;

pub use fields::{area_functional, area_gradient, discrete_mean_curvature, gauss_map_fields, SurfaceFields};
pub use identities::{
    field_phi_derivatives, verify_height_harmonic, verify_lifted_laplacian, HeightHarmonicReport,
    LiftedLaplacianReport, PhiDerivatives, ResidualStats,
};
pub use operator::{laplace_beltrami, DiscreteOperator};

use crate::calculus::{nodal_jets, Jet};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Nodal values of `u` with reconstructed gradients.
#[derive(Debug, Clone)]
pub struct GraphFunction {
    values: Vec<f64>,
    jets: Vec<Jet>,
    triangle_covectors: Vec<[f64; 2]>,
    triangle_norm2: Vec<f64>,
    spacelike_margin: f64,
}

/// Wraps `values` as a graph over `grid`, rejecting non-spacelike input.
///
/// The margin is the minimum of `1 − ‖∇̂u‖²_M` over nodal reconstructions
/// and over the per-triangle P1 gradients.
pub fn make_graph(grid: &Grid, values: Vec<f64>) -> Result<GraphFunction> {
    if values.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "{} values for a grid of {} nodes",
            values.len(),
            grid.len()
        )));
    }
    if let Some(a) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite value at node {a}")));
    }
    let jets = nodal_jets(grid, &values);
    let mut worst = (f64::NEG_INFINITY, 0);
    for (a, jet) in jets.iter().enumerate() {
        let n2 = jet.grad_norm2();
        if n2 > worst.0 {
            worst = (n2, a);
        }
    }
    let mut triangle_covectors = Vec::with_capacity(grid.triangles().len());
    let mut triangle_norm2 = Vec::with_capacity(grid.triangles().len());
    for t in grid.triangles() {
        let p = t.gradient(&values);
        let n2 = t.norm2(p);
        if n2 > worst.0 {
            worst = (n2, t.vertices[0]);
        }
        triangle_covectors.push(p);
        triangle_norm2.push(n2);
    }
    if worst.0 >= 1.0 {
        return Err(Error::NotSpacelike {
            node: worst.1,
            grad_norm2: worst.0,
        });
    }
    Ok(GraphFunction {
        values,
        jets,
        triangle_covectors,
        triangle_norm2,
        spacelike_margin: 1.0 - worst.0,
    })
}

impl GraphFunction {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn jets(&self) -> &[Jet] {
        &self.jets
    }

    /// `∇̂u` at a node in its orthonormal frame (see [`crate::calculus`]).
    pub fn frame_gradient(&self, node: usize) -> [f64; 2] {
        self.jets[node].grad
    }

    /// `du` at a node in normal-coordinate chart components.
    pub fn chart_gradient(&self, grid: &Grid, node: usize) -> [f64; 2] {
        let n = &grid.nodes()[node];
        let g = self.jets[node].grad;
        if n.slot.is_none() {
            return g;
        }
        let (s, c) = n.theta.sin_cos();
        let k = grid.model().warp_ratio(n.rho);
        [g[0] * c - g[1] * k * s, g[0] * s + g[1] * k * c]
    }

    pub fn grad_norm2(&self, node: usize) -> f64 {
        self.jets[node].grad_norm2()
    }

    pub fn triangle_covector(&self, triangle: usize) -> [f64; 2] {
        self.triangle_covectors[triangle]
    }

    pub fn triangle_norm2(&self, triangle: usize) -> f64 {
        self.triangle_norm2[triangle]
    }

    pub fn spacelike_margin(&self) -> f64 {
        self.spacelike_margin
    }
}

/// Per-triangle induced metric data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleMetric {
    pub inverse: [[f64; 2]; 2],
    pub sqrt_det: f64,
}

#[derive(Debug, Clone)]
pub struct InducedMetric {
    tensors: Vec<[[f64; 2]; 2]>,
    base_det: Vec<f64>,
    volume_weights: Vec<f64>,
    triangles: Vec<TriangleMetric>,
}

/// `g = g_M − du ⊗ du`, nodally in normal-coordinate chart components and
/// per triangle; volume weights lump `√det g` with the grid's mass fractions.
pub fn induce_metric(grid: &Grid, u: &GraphFunction) -> InducedMetric {
    let model = grid.model();
    let mut tensors = Vec::with_capacity(grid.len());
    let mut base_det = Vec::with_capacity(grid.len());
    for (a, n) in grid.nodes().iter().enumerate() {
        let gm = model.metric_normal_coords(n.local);
        let p = u.chart_gradient(grid, a);
        base_det.push(gm[0][0] * gm[1][1] - gm[0][1] * gm[1][0]);
        tensors.push([
            [gm[0][0] - p[0] * p[0], gm[0][1] - p[0] * p[1]],
            [gm[1][0] - p[1] * p[0], gm[1][1] - p[1] * p[1]],
        ]);
    }
    let mut volume_weights = vec![0.0; grid.len()];
    let mut triangles = Vec::with_capacity(grid.triangles().len());
    for (k, t) in grid.triangles().iter().enumerate() {
        let p = u.triangle_covector(k);
        let w2 = 1.0 - u.triangle_norm2(k);
        let gp = [
            t.metric_inv[0][0] * p[0] + t.metric_inv[0][1] * p[1],
            t.metric_inv[1][0] * p[0] + t.metric_inv[1][1] * p[1],
        ];
        // Sherman–Morrison: (G − ppᵀ)⁻¹ = G⁻¹ + G⁻¹p pᵀG⁻¹ / (1 − |p|²)
        let mut inverse = t.metric_inv;
        for i in 0..2 {
            for j in 0..2 {
                inverse[i][j] += gp[i] * gp[j] / w2;
            }
        }
        let sqrt_det = t.sqrt_det * w2.sqrt();
        for v in 0..3 {
            volume_weights[t.vertices[v]] += t.area * sqrt_det * t.mass_fraction[v];
        }
        triangles.push(TriangleMetric { inverse, sqrt_det });
    }
    InducedMetric {
        tensors,
        base_det,
        volume_weights,
        triangles,
    }
}

impl InducedMetric {
    pub fn tensor(&self, node: usize) -> [[f64; 2]; 2] {
        self.tensors[node]
    }

    pub fn tensors(&self) -> &[[[f64; 2]; 2]] {
        &self.tensors
    }

    /// `det g_M` at a node, in the same chart as [`Self::tensor`].
    pub fn base_det(&self, node: usize) -> f64 {
        self.base_det[node]
    }

    pub fn volume_weights(&self) -> &[f64] {
        &self.volume_weights
    }

    pub fn triangle(&self, k: usize) -> &TriangleMetric {
        &self.triangles[k]
    }

    pub fn area(&self) -> f64 {
        self.volume_weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::geometry::MetricModel;
    use crate::grid::{build_grid, Resolution};

    fn flat_disc() -> Grid {
        build_grid(
            &MetricModel::flat(),
            &Domain::GeodesicDisc { radius: 1.0 },
            Resolution {
                radial_cells: 16,
                angular_cells: 32,
            },
        )
        .unwrap()
    }

    #[test]
    fn slice_has_unit_margin() {
        let g = flat_disc();
        let u = make_graph(&g, vec![0.0; g.len()]).unwrap();
        assert_eq!(u.spacelike_margin(), 1.0);
    }

    #[test]
    fn tilted_plane_margin() {
        let g = flat_disc();
        let u = make_graph(&g, g.sample(|r, t| 0.6 * r * t.cos())).unwrap();
        assert!((u.spacelike_margin() - 0.64).abs() < 1e-12);
    }

    #[test]
    fn steep_plane_is_rejected() {
        let g = flat_disc();
        match make_graph(&g, g.sample(|r, t| 1.2 * r * t.cos())) {
            Err(Error::NotSpacelike { grad_norm2, .. }) => assert!((grad_norm2 - 1.44).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn induced_tensor_of_tilted_plane() {
        let g = flat_disc();
        let u = make_graph(&g, g.sample(|r, t| 0.6 * r * t.cos())).unwrap();
        let m = induce_metric(&g, &u);
        for a in 0..g.len() {
            let t = m.tensor(a);
            assert!((t[0][0] - 0.64).abs() < 1e-12);
            assert!(t[0][1].abs() < 1e-12 && (t[1][1] - 1.0).abs() < 1e-12);
        }
        assert!((m.area() - 0.8 * g.total_area()).abs() < 1e-12);
    }

    #[test]
    fn induced_determinant_lemma_on_sphere() {
        let model = MetricModel::sphere(1.0).unwrap();
        let g = build_grid(
            &model,
            &Domain::GeodesicDisc { radius: 1.2 },
            Resolution {
                radial_cells: 16,
                angular_cells: 32,
            },
        )
        .unwrap();
        let u = make_graph(&g, g.sample(|r, t| 0.3 * r.sin() * (2.0 * t).cos())).unwrap();
        let m = induce_metric(&g, &u);
        for a in 0..g.len() {
            let t = m.tensor(a);
            let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
            let expected = m.base_det(a) * (1.0 - u.grad_norm2(a));
            assert!((det - expected).abs() < 1e-13, "{det} {expected}");
        }
    }
}
