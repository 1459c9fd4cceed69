use std::io::Write;

use crate::calculus::{nodal_jets, Jet};
use crate::error::Result;
use crate::grid::Grid;
use crate::sparse::{solve_dirichlet_system, CsrMatrix};

use super::{GraphFunction, InducedMetric};

/// Laplace–Beltrami operator of the induced metric.
///
/// `Δv(a) = −(K v)_a / w_a` with `K` the symmetric P1 stiffness matrix of `g`
/// and `w` the lumped `g`-area. Rows of `K` sum to zero, so `(K v)_a` is
/// evaluated as `Σ_b K_ab (v_b − v_a)` and constants are annihilated exactly.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<'g> {
    grid: &'g Grid,
    stiffness: CsrMatrix,
    mass: Vec<f64>,
    graph_grad: Vec<[f64; 2]>,
    w2: Vec<f64>,
}

pub fn laplace_beltrami<'g>(
    grid: &'g Grid,
    u: &GraphFunction,
    induced: &InducedMetric,
) -> DiscreteOperator<'g> {
    let mut triplets = Vec::with_capacity(9 * grid.triangles().len());
    for (k, t) in grid.triangles().iter().enumerate() {
        let tm = induced.triangle(k);
        let scale = t.area * tm.sqrt_det;
        let m = &tm.inverse;
        for p in 0..3 {
            let gp = [t.grad[0][p], t.grad[1][p]];
            let mg = [m[0][0] * gp[0] + m[0][1] * gp[1], m[1][0] * gp[0] + m[1][1] * gp[1]];
            for q in 0..3 {
                let v = scale * (mg[0] * t.grad[0][q] + mg[1] * t.grad[1][q]);
                triplets.push((t.vertices[p], t.vertices[q], v));
            }
        }
    }
    let graph_grad = (0..grid.len()).map(|a| u.frame_gradient(a)).collect();
    let w2 = (0..grid.len()).map(|a| 1.0 - u.grad_norm2(a)).collect();
    DiscreteOperator {
        grid,
        stiffness: CsrMatrix::from_triplets(grid.len(), &triplets),
        mass: induced.volume_weights().to_vec(),
        graph_grad,
        w2,
    }
}

impl<'g> DiscreteOperator<'g> {
    pub fn grid(&self) -> &'g Grid {
        self.grid
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Discrete Laplacian at every node (boundary rows included, though only
    /// interior rows approximate `Δv`).
    pub fn laplacian(&self, v: &[f64]) -> Vec<f64> {
        (0..v.len())
            .map(|a| {
                let s: f64 = self.stiffness.row(a).filter(|e| e.0 != a).map(|(b, k)| k * (v[b] - v[a])).sum();
                -s / self.mass[a]
            })
            .collect()
    }

    /// `‖∇v‖²_g = ‖∇̂v‖² + ⟨∇̂u, ∇̂v⟩² / W²` from nodal jets.
    pub fn gradient_norm(&self, v: &[f64]) -> Vec<f64> {
        let jets = nodal_jets(self.grid, v);
        (0..jets.len()).map(|a| self.gradient_inner_at(a, &jets[a], &jets[a])).collect()
    }

    /// `⟨∇v, ∇w⟩_g` from nodal jets.
    pub fn gradient_inner(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        let jv = nodal_jets(self.grid, v);
        let jw = nodal_jets(self.grid, w);
        (0..jv.len()).map(|a| self.gradient_inner_at(a, &jv[a], &jw[a])).collect()
    }

    fn gradient_inner_at(&self, a: usize, x: &Jet, y: &Jet) -> f64 {
        let p = self.graph_grad[a];
        let (gx, gy) = (x.grad, y.grad);
        gx[0] * gy[0] + gx[1] * gy[1] + (p[0] * gx[0] + p[1] * gx[1]) * (p[0] * gy[0] + p[1] * gy[1]) / self.w2[a]
    }

    /// Dirichlet energy `vᵀ K v`.
    pub fn energy(&self, v: &[f64]) -> f64 {
        self.stiffness.mul_vec(v).iter().zip(v).map(|(k, x)| k * x).sum()
    }

    /// Solves `Δv = 0` on nodes where `fixed[a]` is `None`, with the given
    /// values elsewhere.
    pub fn harmonic_extension(&self, fixed: &[Option<f64>]) -> Result<Vec<f64>> {
        let free: Vec<bool> = fixed.iter().map(Option::is_none).collect();
        let data: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        solve_dirichlet_system(&self.stiffness, &vec![0.0; data.len()], &free, &data, 1e-13)
    }

    /// Writes the stiffness matrix as `row col value` lines.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# row col value (stiffness of the induced metric)")?;
        for (r, c, v) in self.stiffness.triplets() {
            writeln!(out, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }
}
