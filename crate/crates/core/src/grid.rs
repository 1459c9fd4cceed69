//! Polar-structured triangulations of pole-centred domains.
//!
//! Nodes sit on rings `ρ_i = ρ_min + iΔρ` at angles `θ_j`; each logical cell
//! `(i, j)` is split along the fixed diagonal `(i, j)–(i+1, j+1)`. Triangles
//! are straight in geodesic normal coordinates, where affine functions of the
//! flat plane are exactly representable. A disc has a single pole node joined
//! to the first ring by a fan; the pole's lumped area is a quarter of the fan
//! area (the area of the dual disc of radius Δρ/2), not the usual third.

use serde::Serialize;
use std::io::Write;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geometry::{MetricModel, Point};

/// Mass fraction of a pole vertex in each fan triangle.
const POLE_MASS_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Resolution {
    pub radial_cells: usize,
    pub angular_cells: usize,
}

impl Resolution {
    /// Radial cells of width `spacing`; angular cells chosen so that the
    /// angular step is about `2·spacing`, rounded up to a multiple of 8.
    pub fn from_spacing(domain: &Domain, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
        }
        let (r0, r1) = domain.radial_range();
        let ((t0, t1), _) = domain.angular_range();
        let radial_cells = ((r1 - r0) / spacing).round() as usize;
        let angular_cells = (8 * ((t1 - t0) / (16.0 * spacing)).ceil() as usize).max(8);
        Ok(Resolution {
            radial_cells,
            angular_cells,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Node {
    /// Position in the model chart.
    pub position: Point,
    /// Normal coordinates relative to the basepoint.
    pub local: [f64; 2],
    pub rho: f64,
    pub theta: f64,
    pub ring: usize,
    /// Angular slot; `None` for the pole.
    pub slot: Option<usize>,
}

/// P1 data of one triangle in normal coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    /// Chart gradients of the three hat functions: `grad[k][a] = ∂_k φ_a`.
    pub grad: [[f64; 3]; 2],
    /// Chart (coordinate) area.
    pub area: f64,
    /// `G⁻¹` of `g_M` at the centroid.
    pub metric_inv: [[f64; 2]; 2],
    /// `G` of `g_M` at the centroid.
    pub metric: [[f64; 2]; 2],
    pub sqrt_det: f64,
    pub mass_fraction: [f64; 3],
}

impl Triangle {
    /// Chart gradient (covector) of a nodal field restricted to the triangle.
    pub fn gradient(&self, values: &[f64]) -> [f64; 2] {
        let v = self.vertices.map(|a| values[a]);
        [
            self.grad[0][0] * v[0] + self.grad[0][1] * v[1] + self.grad[0][2] * v[2],
            self.grad[1][0] * v[0] + self.grad[1][1] * v[1] + self.grad[1][2] * v[2],
        ]
    }

    /// `|p|²_{g_M}` for a covector `p` at the centroid.
    pub fn norm2(&self, p: [f64; 2]) -> f64 {
        let m = &self.metric_inv;
        p[0] * (m[0][0] * p[0] + m[0][1] * p[1]) + p[1] * (m[1][0] * p[0] + m[1][1] * p[1])
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    model: MetricModel,
    domain: Domain,
    resolution: Resolution,
    pub(crate) rho_min: f64,
    pub(crate) d_rho: f64,
    pub(crate) d_theta: f64,
    pub(crate) periodic: bool,
    pub(crate) has_pole: bool,
    pub(crate) slots: usize,
    nodes: Vec<Node>,
    triangles: Vec<Triangle>,
    area_weights: Vec<f64>,
    boundary: Vec<bool>,
    inner_boundary: Vec<usize>,
    outer_boundary: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

/// Discretizes `domain` on `model`.
pub fn build_grid(model: &MetricModel, domain: &Domain, resolution: Resolution) -> Result<Grid> {
    domain.validate(model)?;
    let Resolution {
        radial_cells: nr,
        angular_cells: nt,
    } = resolution;
    let ((t0, t1), periodic) = domain.angular_range();
    if nr + 1 < 8 || nt < 8 {
        return Err(Error::InvalidParameter(format!(
            "resolution {nr}x{nt} cells gives fewer than 8 nodes per direction"
        )));
    }
    if periodic && nt % 4 != 0 {
        return Err(Error::InvalidParameter(format!(
            "angular cells of a full-turn domain must be a multiple of 4, got {nt}"
        )));
    }
    let (r0, r1) = domain.radial_range();
    let has_pole = domain.contains_pole();
    let d_rho = (r1 - r0) / nr as f64;
    let d_theta = (t1 - t0) / nt as f64;
    let slots = if periodic { nt } else { nt + 1 };

    let mut nodes = Vec::new();
    let first_ring = if has_pole {
        nodes.push(Node {
            position: model.basepoint(),
            local: [0.0, 0.0],
            rho: 0.0,
            theta: 0.0,
            ring: 0,
            slot: None,
        });
        1
    } else {
        0
    };
    for i in first_ring..=nr {
        let rho = r0 + i as f64 * d_rho;
        for j in 0..slots {
            let theta = t0 + j as f64 * d_theta;
            let (s, c) = theta.sin_cos();
            nodes.push(Node {
                position: model.point_from_polar(rho, theta),
                local: [rho * c, rho * s],
                rho,
                theta,
                ring: i,
                slot: Some(j),
            });
        }
    }

    let id = |i: usize, j: usize| -> usize {
        if has_pole {
            if i == 0 {
                0
            } else {
                1 + (i - 1) * slots + j
            }
        } else {
            i * slots + j
        }
    };

    let mut tris = Vec::new();
    for i in 0..nr {
        for j in 0..nt {
            let jn = if periodic { (j + 1) % nt } else { j + 1 };
            if has_pole && i == 0 {
                tris.push([0, id(1, j), id(1, jn)]);
            } else {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, jn), id(i, jn));
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
        }
    }

    let mut triangles = Vec::with_capacity(tris.len());
    let mut area_weights = vec![0.0; nodes.len()];
    for v in tris {
        let x = v.map(|a| nodes[a].local);
        let b = [[x[1][0] - x[0][0], x[2][0] - x[0][0]], [x[1][1] - x[0][1], x[2][1] - x[0][1]]];
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        let area = 0.5 * det.abs();
        // inverse transpose of B applied to the reference gradients
        let bit = [[b[1][1] / det, -b[1][0] / det], [-b[0][1] / det, b[0][0] / det]];
        let reference = [[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]];
        let mut grad = [[0.0; 3]; 2];
        for k in 0..2 {
            for a in 0..3 {
                grad[k][a] = bit[k][0] * reference[0][a] + bit[k][1] * reference[1][a];
            }
        }
        let centroid = [
            (x[0][0] + x[1][0] + x[2][0]) / 3.0,
            (x[0][1] + x[1][1] + x[2][1]) / 3.0,
        ];
        let (metric, metric_inv, sqrt_det) = model.metric_normal_coords_with_inverse(centroid);
        let mass_fraction = v.map(|a| {
            if has_pole && a == 0 {
                POLE_MASS_FRACTION
            } else {
                1.0 / 3.0
            }
        });
        for k in 0..3 {
            area_weights[v[k]] += area * sqrt_det * mass_fraction[k];
        }
        triangles.push(Triangle {
            vertices: v,
            grad,
            area,
            metric_inv,
            metric,
            sqrt_det,
            mass_fraction,
        });
    }

    let mut boundary = vec![false; nodes.len()];
    let mut inner_boundary = Vec::new();
    let mut outer_boundary = Vec::new();
    for (a, n) in nodes.iter().enumerate() {
        let on_outer = n.ring == nr;
        let on_inner = !has_pole && n.ring == 0;
        let on_side = !periodic && (n.slot.is_none() || n.slot == Some(0) || n.slot == Some(nt));
        if on_outer {
            outer_boundary.push(a);
        }
        if on_inner {
            inner_boundary.push(a);
        }
        boundary[a] = on_outer || on_inner || on_side;
    }

    let mut neighbors = vec![Vec::new(); nodes.len()];
    for t in &triangles {
        for p in 0..3 {
            for q in 0..3 {
                if p != q {
                    neighbors[t.vertices[p]].push(t.vertices[q]);
                }
            }
        }
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
        nb.dedup();
    }

    Ok(Grid {
        model: model.clone(),
        domain: *domain,
        resolution,
        rho_min: r0,
        d_rho,
        d_theta,
        periodic,
        has_pole,
        slots,
        nodes,
        triangles,
        area_weights,
        boundary,
        inner_boundary,
        outer_boundary,
        neighbors,
    })
}

impl Grid {
    pub fn model(&self) -> &MetricModel {
        &self.model
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    /// Characteristic spacing Δ (the radial step).
    pub fn spacing(&self) -> f64 {
        self.d_rho
    }

    pub fn angular_step(&self) -> f64 {
        self.d_theta
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn area_weights(&self) -> &[f64] {
        &self.area_weights
    }

    pub fn total_area(&self) -> f64 {
        self.area_weights.iter().sum()
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn inner_boundary(&self) -> &[usize] {
        &self.inner_boundary
    }

    pub fn outer_boundary(&self) -> &[usize] {
        &self.outer_boundary
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn has_pole(&self) -> bool {
        self.has_pole
    }

    pub fn pole(&self) -> Option<usize> {
        self.has_pole.then_some(0)
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn rings(&self) -> usize {
        self.resolution.radial_cells + 1
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Node id of ring `i`, slot `j` (any slot maps to the pole on ring 0 of a disc).
    pub fn node_id(&self, ring: usize, slot: usize) -> usize {
        if self.has_pole {
            if ring == 0 {
                0
            } else {
                1 + (ring - 1) * self.slots + slot
            }
        } else {
            ring * self.slots + slot
        }
    }

    /// Radius of ring `i`.
    pub fn ring_radius(&self, ring: usize) -> f64 {
        self.rho_min + ring as f64 * self.d_rho
    }

    /// Nodes at least `collar` cells away from every boundary ring or edge.
    pub fn interior_mask(&self, collar: usize) -> Vec<bool> {
        let nr = self.resolution.radial_cells;
        let nt = self.resolution.angular_cells;
        self.nodes
            .iter()
            .enumerate()
            .map(|(a, n)| {
                if self.boundary[a] {
                    return false;
                }
                if nr - n.ring < collar {
                    return false;
                }
                if !self.has_pole && n.ring < collar {
                    return false;
                }
                if !self.periodic {
                    if let Some(j) = n.slot {
                        if j < collar || nt - j < collar {
                            return false;
                        }
                    }
                    if self.has_pole && n.ring < collar {
                        return false;
                    }
                }
                true
            })
            .collect()
    }

    /// Samples a function of polar coordinates at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|n| f(n.rho, n.theta)).collect()
    }

    /// Writes `node,x,y,rho,theta,area_weight,boundary` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "node,x,y,rho,theta,area_weight,boundary")?;
        for (a, n) in self.nodes.iter().enumerate() {
            writeln!(
                out,
                "{a},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                n.position[0],
                n.position[1],
                n.rho,
                n.theta,
                self.area_weights[a],
                u8::from(self.boundary[a])
            )?;
        }
        Ok(())
    }
}
