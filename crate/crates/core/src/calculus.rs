//! Nodal first and second derivatives of grid fields.
//!
//! Ring nodes use polar differences with trigonometrically fitted angular
//! stencils (exact on `a + b cos θ + c sin θ`, hence on flat affine
//! functions) and report gradient and Hessian in the orthonormal frame
//! `{e_ρ, e_θ/f}`. The pole uses a least-squares quartic fit over the first
//! rings in normal coordinates, where the Christoffel symbols vanish;
//! its frame is the Cartesian frame of the normal chart.

use nalgebra::{DMatrix, DVector, Matrix5, Vector5};

use crate::grid::Grid;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl Jet {
    pub fn grad_norm2(&self) -> f64 {
        self.grad[0] * self.grad[0] + self.grad[1] * self.grad[1]
    }

    pub fn laplacian(&self) -> f64 {
        self.hess[0][0] + self.hess[1][1]
    }

    /// `∇²v(a, b)` for frame vectors `a`, `b`.
    pub fn hess_form(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let h = &self.hess;
        a[0] * (h[0][0] * b[0] + h[0][1] * b[1]) + a[1] * (h[1][0] * b[0] + h[1][1] * b[1])
    }
}

/// Angular derivatives `(v_θ, v_θθ)` of `values` at ring `i`, slot `j`.
fn theta_derivs(grid: &Grid, values: &[f64], i: usize, j: usize) -> (f64, f64) {
    if grid.has_pole && i == 0 {
        return (0.0, 0.0);
    }
    let dt = grid.d_theta;
    let at = |jj: usize| values[grid.node_id(i, jj)];
    let nt = grid.resolution().angular_cells;
    if grid.periodic || (j > 0 && j < nt) {
        let (jm, jp) = if grid.periodic {
            ((j + nt - 1) % nt, (j + 1) % nt)
        } else {
            (j - 1, j + 1)
        };
        let (vm, v0, vp) = (at(jm), at(j), at(jp));
        ((vp - vm) / (2.0 * dt.sin()), (vp - 2.0 * v0 + vm) / (2.0 * (1.0 - dt.cos())))
    } else {
        let s = if j == 0 { 1.0 } else { -1.0 };
        let step = |k: usize| if j == 0 { at(k) } else { at(nt - k) };
        let v: [f64; 5] = std::array::from_fn(step);
        (s * one_sided_first(&v, dt), one_sided_second(&v, dt))
    }
}

/// Weights of the first and second derivative at 0 from samples at
/// `offsets · h` (exact on quartics).
fn five_point_weights(offsets: [f64; 5], h: f64) -> ([f64; 5], [f64; 5]) {
    let v = Matrix5::from_fn(|k, m| offsets[m].powi(k as i32));
    let lu = v.lu();
    let first = lu.solve(&Vector5::new(0.0, 1.0, 0.0, 0.0, 0.0)).unwrap_or_else(Vector5::zeros);
    let second = lu.solve(&Vector5::new(0.0, 0.0, 2.0, 0.0, 0.0)).unwrap_or_else(Vector5::zeros);
    (
        std::array::from_fn(|m| first[m] / h),
        std::array::from_fn(|m| second[m] / (h * h)),
    )
}

/// First and second ρ-differences at ring `i` of a ring-indexed sequence.
/// `ring_value(k)` may return `None` for rings that do not exist; negative
/// rings are reflections through the pole on full-turn discs. Both use five
/// consecutive rings, centred where possible and shifted towards the
/// interior next to a boundary ring, so every ring carries a fourth-order
/// first difference and derived fields stay smooth from ring to ring.
fn rho_derivs(grid: &Grid, i: usize, ring_value: impl Fn(isize) -> Option<f64>) -> (f64, f64) {
    let nr = grid.resolution().radial_cells as isize;
    let i = i as isize;
    let at = |k: isize| if k > nr { None } else { ring_value(k) };
    for shift in [0isize, -1, 1, -2, 2] {
        let lo = i - 2 + shift;
        let window: Option<Vec<f64>> = (lo..lo + 5).map(at).collect();
        if let Some(w) = window {
            let offsets = std::array::from_fn(|m| (lo + m as isize - i) as f64);
            let (c1, c2) = five_point_weights(offsets, grid.d_rho);
            let d1 = (0..5).map(|m| c1[m] * w[m]).sum();
            let d2 = (0..5).map(|m| c2[m] * w[m]).sum();
            return (d1, d2);
        }
    }
    (f64::NAN, f64::NAN)
}

/// Second-order forward first derivative from `v[k] = v(x + k h)`.
fn one_sided_first(v: &[f64; 5], h: f64) -> f64 {
    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
}

/// Forward second derivative from `v[k] = v(x + k h)`.
fn one_sided_second(v: &[f64; 5], h: f64) -> f64 {
    (35.0 * v[0] - 104.0 * v[1] + 114.0 * v[2] - 56.0 * v[3] + 11.0 * v[4]) / (12.0 * h * h)
}

/// Least-squares quartic through the pole and the first rings, in normal
/// coordinates scaled by `Δρ`.
fn pole_jet(grid: &Grid, values: &[f64]) -> Jet {
    let h = grid.d_rho;
    let rings = grid.rings().saturating_sub(1).min(4);
    let mut rows = vec![(0.0, 0.0, values[0])];
    for i in 1..=rings {
        for j in 0..grid.slots {
            let a = grid.node_id(i, j);
            let p = grid.nodes()[a].local;
            rows.push((p[0] / h, p[1] / h, values[a]));
        }
    }
    let monomials: Vec<(i32, i32)> = (0..=4).flat_map(|d| (0..=d).map(move |q| (d - q, q))).collect();
    let a = DMatrix::from_fn(rows.len(), monomials.len(), |r, c| {
        let (x, y, _) = rows[r];
        x.powi(monomials[c].0) * y.powi(monomials[c].1)
    });
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2));
    let c = a
        .svd(true, true)
        .solve(&b, 1e-10)
        .unwrap_or_else(|_| DVector::zeros(monomials.len()));
    // monomial order: 1, x, y, x², xy, y², ...
    Jet {
        value: values[0],
        grad: [c[1] / h, c[2] / h],
        hess: [[2.0 * c[3] / (h * h), c[4] / (h * h)], [c[4] / (h * h), 2.0 * c[5] / (h * h)]],
    }
}

/// Jets of `values` at every node of `grid`.
pub fn nodal_jets(grid: &Grid, values: &[f64]) -> Vec<Jet> {
    let model = grid.model();
    let pole_value = values[0];
    let mut jets = Vec::with_capacity(grid.len());
    for (a, node) in grid.nodes().iter().enumerate() {
        let Some(j) = node.slot else {
            jets.push(pole_jet(grid, values));
            continue;
        };
        let i = node.ring;
        let opposite = grid.periodic.then(|| (j + grid.slots / 2) % grid.slots);
        let ring_value = |k: isize| -> Option<f64> {
            match (k, grid.has_pole) {
                (0, true) => Some(pole_value),
                (k, _) if k >= 0 => Some(values[grid.node_id(k as usize, j)]),
                (k, true) => opposite.map(|o| values[grid.node_id((-k) as usize, o)]),
                _ => None,
            }
        };
        let ring_theta = |k: isize| -> Option<f64> {
            match (k, grid.has_pole) {
                (k, _) if k >= 0 => Some(theta_derivs(grid, values, k as usize, j).0),
                (k, true) => opposite.map(|o| theta_derivs(grid, values, (-k) as usize, o).0),
                _ => None,
            }
        };
        let (v_r, v_rr) = rho_derivs(grid, i, ring_value);
        let (v_t, v_tt) = theta_derivs(grid, values, i, j);
        let (v_rt, _) = rho_derivs(grid, i, ring_theta);
        let w = model.warp(node.rho);
        let (f, df) = (w.f, w.df);
        let off = (v_rt - df / f * v_t) / f;
        jets.push(Jet {
            value: values[a],
            grad: [v_r, v_t / f],
            hess: [[v_rr, off], [off, (v_tt + f * df * v_r) / (f * f)]],
        });
    }
    jets
}
