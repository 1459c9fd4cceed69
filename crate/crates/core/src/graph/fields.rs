use serde::Serialize;
use std::io::Write;

use crate::grid::Grid;

use super::GraphFunction;

/// Per-node geometry of `Σ(u)`.
///
/// Vector quantities (`nstar`) are stored in the node's orthonormal frame:
/// `{∇̂r̂, τ}` at ring nodes, the Cartesian normal frame at the pole.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceFields {
    pub h: Vec<f64>,
    pub r: Vec<f64>,
    /// `Θ = ⟨N, ∂_t⟩ = −1/W`.
    pub theta: Vec<f64>,
    /// Discrete mean curvature: the divergence-form value
    /// `(∂E/∂u_a) / (2 w_a)` at interior nodes (the residual the solver
    /// drives to zero) and the pointwise value at boundary nodes.
    pub mean_curvature: Vec<f64>,
    /// `H = −½ tr A` from nodal second derivatives.
    pub mean_curvature_pointwise: Vec<f64>,
    pub a_norm2: Vec<f64>,
    pub phi: Vec<f64>,
    pub nstar: Vec<[f64; 2]>,
    pub nstar_norm2: Vec<f64>,
    /// `W = √(1 − ‖∇̂u‖²)`.
    pub w: Vec<f64>,
    /// Gaussian curvature of `M` along the graph.
    pub kappa: Vec<f64>,
    /// `Δ̂r̂` along the graph; `NaN` at the pole.
    pub distance_laplacian: Vec<f64>,
}

/// `∂E/∂u_a` for the discrete area functional `E(u) = Σ_T |T| √G_T W_T`.
pub fn area_gradient(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; grid.len()];
    for t in grid.triangles() {
        let p = t.gradient(values);
        let w = (1.0 - t.norm2(p)).sqrt();
        let gp = [
            t.metric_inv[0][0] * p[0] + t.metric_inv[0][1] * p[1],
            t.metric_inv[1][0] * p[0] + t.metric_inv[1][1] * p[1],
        ];
        let scale = t.area * t.sqrt_det / w;
        for k in 0..3 {
            grad[t.vertices[k]] -= scale * (gp[0] * t.grad[0][k] + gp[1] * t.grad[1][k]);
        }
    }
    grad
}

/// `E(u) = Σ_T |T| √G_T W_T`; `NaN` if some triangle is not spacelike.
pub fn area_functional(grid: &Grid, values: &[f64]) -> f64 {
    grid.triangles()
        .iter()
        .map(|t| {
            let n2 = t.norm2(t.gradient(values));
            if n2 < 1.0 {
                t.area * t.sqrt_det * (1.0 - n2).sqrt()
            } else {
                f64::NAN
            }
        })
        .sum()
}

/// Divergence-form mean curvature at interior nodes, `0` elsewhere.
pub fn discrete_mean_curvature(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let grad = area_gradient(grid, values);
    let w = grid.area_weights();
    (0..grid.len())
        .map(|a| if grid.is_boundary(a) { 0.0 } else { grad[a] / (2.0 * w[a]) })
        .collect()
}

pub fn gauss_map_fields(grid: &Grid, u: &GraphFunction) -> SurfaceFields {
    let model = grid.model();
    let n = grid.len();
    let variational = discrete_mean_curvature(grid, u.values());
    let mut f = SurfaceFields {
        h: u.values().to_vec(),
        r: grid.nodes().iter().map(|p| p.rho).collect(),
        theta: Vec::with_capacity(n),
        mean_curvature: Vec::with_capacity(n),
        mean_curvature_pointwise: Vec::with_capacity(n),
        a_norm2: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
        nstar: Vec::with_capacity(n),
        nstar_norm2: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
        kappa: Vec::with_capacity(n),
        distance_laplacian: Vec::with_capacity(n),
    };
    for (a, node) in grid.nodes().iter().enumerate() {
        let jet = &u.jets()[a];
        let p = jet.grad;
        let w2 = 1.0 - jet.grad_norm2();
        let w = w2.sqrt();
        // II = −∇̂²u / W and g⁻¹ = I + ∇̂u ∇̂uᵀ / W² in the orthonormal frame
        let mut shape = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    let ginv = if i == k { 1.0 } else { 0.0 } + p[i] * p[k] / w2;
                    s += ginv * (-jet.hess[k][j] / w);
                }
                shape[i][j] = s;
            }
        }
        let tr = shape[0][0] + shape[1][1];
        let a2 = shape[0][0] * shape[0][0]
            + shape[0][1] * shape[1][0]
            + shape[1][0] * shape[0][1]
            + shape[1][1] * shape[1][1];
        let h_pt = -0.5 * tr;
        let ns = [p[0] / w, p[1] / w];
        f.theta.push(-1.0 / w);
        f.mean_curvature_pointwise.push(h_pt);
        f.mean_curvature.push(if grid.is_boundary(a) { h_pt } else { variational[a] });
        f.a_norm2.push(a2);
        f.phi.push(node.rho * node.rho - jet.value * jet.value);
        f.nstar.push(ns);
        f.nstar_norm2.push(ns[0] * ns[0] + ns[1] * ns[1]);
        f.w.push(w);
        f.kappa.push(model.curvature_at_radius(node.rho));
        f.distance_laplacian.push(if node.slot.is_some() {
            model.warp(node.rho).df / model.warp(node.rho).f
        } else {
            f64::NAN
        });
    }
    f
}

impl SurfaceFields {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Writes one row per node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "node,h,r,theta,H,H_pointwise,A_norm2,phi,nstar_norm2,W")?;
        for a in 0..self.len() {
            writeln!(
                out,
                "{a},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.h[a],
                self.r[a],
                self.theta[a],
                self.mean_curvature[a],
                self.mean_curvature_pointwise[a],
                self.a_norm2[a],
                self.phi[a],
                self.nstar_norm2[a],
                self.w[a]
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::geometry::MetricModel;
    use crate::graph::make_graph;
    use crate::grid::{build_grid, Resolution};

    fn flat_disc(radius: f64, n: usize) -> Grid {
        build_grid(
            &MetricModel::flat(),
            &Domain::GeodesicDisc { radius },
            Resolution {
                radial_cells: n,
                angular_cells: 2 * n,
            },
        )
        .unwrap()
    }

    #[test]
    fn slice_fields() {
        let g = flat_disc(1.0, 16);
        let f = gauss_map_fields(&g, &make_graph(&g, vec![0.0; g.len()]).unwrap());
        assert!(f.theta.iter().all(|&t| t == -1.0));
        assert!(f.mean_curvature.iter().all(|&h| h == 0.0));
        assert!(f.a_norm2.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn tilted_plane_fields() {
        let g = flat_disc(1.0, 16);
        let f = gauss_map_fields(&g, &make_graph(&g, g.sample(|r, t| 0.6 * r * t.cos())).unwrap());
        for a in 0..g.len() {
            assert!((f.theta[a] + 1.25).abs() < 1e-12);
            assert!((f.nstar_norm2[a] - (f.theta[a].powi(2) - 1.0)).abs() < 1e-12);
            assert!(f.mean_curvature[a].abs() < 1e-12);
            assert!(f.a_norm2[a] < 1e-16);
        }
    }

    #[test]
    fn parabola_mean_curvature_at_origin() {
        // u = 0.15 ρ²: ∇u = 0 and ∇²u = 0.3 I at the origin, so H = 0.3
        let g = flat_disc(0.5, 32);
        let f = gauss_map_fields(&g, &make_graph(&g, g.sample(|r, _| 0.15 * r * r)).unwrap());
        assert!((f.mean_curvature_pointwise[0] - 0.3).abs() < 1e-9);
        assert!((f.mean_curvature[0] - 0.3).abs() < 1e-3, "{}", f.mean_curvature[0]);
    }

    #[test]
    fn area_gradient_matches_finite_difference() {
        let g = flat_disc(1.0, 8);
        let v = g.sample(|r, t| 0.2 * r * r * (2.0 * t).sin());
        let grad = area_gradient(&g, &v);
        let a = 40;
        let mut vp = v.clone();
        let mut vm = v.clone();
        vp[a] += 1e-6;
        vm[a] -= 1e-6;
        let fd = (area_functional(&g, &vp) - area_functional(&g, &vm)) / 2e-6;
        assert!((fd - grad[a]).abs() < 1e-8, "{fd} {}", grad[a]);
    }
}
