use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::BaseFunction;

use super::{DiscreteOperator, SurfaceFields};

/// Max and RMS of a residual over a node set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualStats {
    pub max: f64,
    pub rms: f64,
    pub count: usize,
    pub argmax: Option<usize>,
}

impl ResidualStats {
    pub fn over(values: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut max = 0.0;
        let mut argmax = None;
        let mut sum2 = 0.0;
        let mut count = 0;
        for (a, v) in values {
            let v = v.abs();
            if v > max || argmax.is_none() {
                max = v;
                argmax = Some(a);
            }
            sum2 += v * v;
            count += 1;
        }
        ResidualStats {
            max,
            rms: if count > 0 { (sum2 / count as f64).sqrt() } else { 0.0 },
            count,
            argmax,
        }
    }

    /// Signed maximum (not absolute) of a field over a node set.
    pub fn signed_max(values: impl IntoIterator<Item = (usize, f64)>) -> (f64, Option<usize>) {
        values
            .into_iter()
            .fold((f64::NEG_INFINITY, None), |(m, am), (a, v)| if v > m { (v, Some(a)) } else { (m, am) })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HeightHarmonicReport {
    pub collar: usize,
    pub spacing: f64,
    /// `|Δh|` with the divergence-form operator.
    pub laplacian: ResidualStats,
    /// `|Δh|` through the non-divergence form `−2HΘ`, `H` from nodal
    /// second derivatives.
    pub laplacian_pointwise: ResidualStats,
    /// `|Δh + 2HΘ|`: operator Laplacian against the pointwise mean curvature.
    pub identity: ResidualStats,
}

pub fn verify_height_harmonic(fields: &SurfaceFields, op: &DiscreteOperator, collar: usize) -> HeightHarmonicReport {
    let grid = op.grid();
    let mask = grid.interior_mask(collar);
    let lap = op.laplacian(&fields.h);
    let nodes = || (0..grid.len()).filter(|&a| mask[a]);
    let pointwise = |a: usize| -2.0 * fields.mean_curvature_pointwise[a] * fields.theta[a];
    HeightHarmonicReport {
        collar,
        spacing: grid.spacing(),
        laplacian: ResidualStats::over(nodes().map(|a| (a, lap[a]))),
        laplacian_pointwise: ResidualStats::over(nodes().map(|a| (a, pointwise(a)))),
        identity: ResidualStats::over(nodes().map(|a| (a, lap[a] - pointwise(a)))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftedLaplacianReport {
    pub function: String,
    pub collar: usize,
    pub residual: ResidualStats,
    /// Nodes skipped because the polar frame is undefined there.
    pub excluded: Vec<usize>,
}

/// Compares the discrete `Δψ` of `ψ = ψ̂ ∘ π` with
/// `Δ̂ψ̂ + 2H⟨N*, ∇̂ψ̂⟩ + ∇̂²ψ̂(N*, N*)` evaluated from analytic derivatives.
pub fn verify_lifted_laplacian(
    fields: &SurfaceFields,
    op: &DiscreteOperator,
    psi: &dyn BaseFunction,
    collar: usize,
) -> Result<LiftedLaplacianReport> {
    let grid = op.grid();
    let model = grid.model();
    if psi.partials(grid.ring_radius(grid.rings() - 1), 0.0).is_none() {
        return Err(Error::MissingDerivatives);
    }
    let values: Vec<f64> = grid.nodes().iter().map(|n| psi.value(n.rho, n.theta)).collect();
    let lap = op.laplacian(&values);
    let mask = grid.interior_mask(collar);
    let mut excluded = Vec::new();
    let mut residuals = Vec::new();
    for (a, n) in grid.nodes().iter().enumerate() {
        if !mask[a] {
            continue;
        }
        if n.slot.is_none() {
            excluded.push(a);
            continue;
        }
        let partials = psi.partials(n.rho, n.theta).ok_or(Error::MissingDerivatives)?;
        let (grad, hess) = partials.frame(model, n.rho);
        let ns = fields.nstar[a];
        let rhs = hess[0][0]
            + hess[1][1]
            + 2.0 * fields.mean_curvature_pointwise[a] * (ns[0] * grad[0] + ns[1] * grad[1])
            + ns[0] * (hess[0][0] * ns[0] + hess[0][1] * ns[1])
            + ns[1] * (hess[1][0] * ns[0] + hess[1][1] * ns[1]);
        residuals.push((a, lap[a] - rhs));
    }
    Ok(LiftedLaplacianReport {
        function: psi.name(),
        collar,
        residual: ResidualStats::over(residuals),
        excluded,
    })
}

/// Derivatives of `φ = r² − h²` and the analytic right sides of the
/// `Δh²` and `Δr²` formulas.
#[derive(Debug, Clone, Serialize)]
pub struct PhiDerivatives {
    pub collar: usize,
    pub phi_min: f64,
    pub interior: Vec<bool>,
    /// Interior nodes with `φ ≥ phi_min`.
    pub admissible: Vec<bool>,
    pub lap_phi: Vec<f64>,
    pub grad_phi_norm2: Vec<f64>,
    /// `(φΔφ − ‖∇φ‖²)/φ²` on admissible nodes, `NaN` elsewhere.
    pub lap_log_phi: Vec<f64>,
    pub lap_h2: Vec<f64>,
    /// `2hΔh + 2(Θ² − 1)` with `Δh = −2HΘ`.
    pub lap_h2_rhs: Vec<f64>,
    pub half_lap_r2: Vec<f64>,
    /// `r Δ̂r̂ (1 + ⟨N*, τ⟩²) + 1 + ⟨N*, ∇̂r̂⟩² + 2Hr⟨N*, ∇̂r̂⟩`; `NaN` at the pole.
    pub half_lap_r2_rhs: Vec<f64>,
    /// `‖∇φ‖² − 4φ − 4(r⟨∇̄r̄, N⟩ + hΘ)²`; `NaN` at the pole.
    pub decomposition: Vec<f64>,
    pub lap_h2_residual: ResidualStats,
    pub lap_r2_residual: ResidualStats,
    pub decomposition_residual: ResidualStats,
    /// Interior nodes where the `{∇̂r̂, τ}` frame is undefined.
    pub excluded: Vec<usize>,
}

pub fn field_phi_derivatives(
    fields: &SurfaceFields,
    op: &DiscreteOperator,
    phi_min: Option<f64>,
    collar: usize,
) -> Result<PhiDerivatives> {
    let grid = op.grid();
    let n = grid.len();
    let phi_min = phi_min.unwrap_or(10.0 * grid.spacing().powi(2));
    if fields.phi.iter().all(|&p| p <= 0.0) {
        return Err(Error::NoAdmissibleRegion("phi <= 0 at every node".into()));
    }
    let interior = grid.interior_mask(collar);
    let admissible: Vec<bool> = (0..n).map(|a| interior[a] && fields.phi[a] >= phi_min).collect();
    if !admissible.iter().any(|&x| x) {
        return Err(Error::NoAdmissibleRegion(format!("no interior node with phi >= {phi_min:.3e}")));
    }
    let lap_phi = op.laplacian(&fields.phi);
    let grad_phi_norm2 = op.gradient_norm(&fields.phi);
    let lap_log_phi = (0..n)
        .map(|a| {
            if admissible[a] {
                let p = fields.phi[a];
                (p * lap_phi[a] - grad_phi_norm2[a]) / (p * p)
            } else {
                f64::NAN
            }
        })
        .collect();
    let h2: Vec<f64> = fields.h.iter().map(|h| h * h).collect();
    let r2: Vec<f64> = fields.r.iter().map(|r| r * r).collect();
    let lap_h2 = op.laplacian(&h2);
    let half_lap_r2: Vec<f64> = op.laplacian(&r2).iter().map(|v| 0.5 * v).collect();

    let mut lap_h2_rhs = Vec::with_capacity(n);
    let mut half_lap_r2_rhs = Vec::with_capacity(n);
    let mut decomposition = Vec::with_capacity(n);
    let mut excluded = Vec::new();
    for (a, node) in grid.nodes().iter().enumerate() {
        let (h, r, th) = (fields.h[a], fields.r[a], fields.theta[a]);
        let hm = fields.mean_curvature_pointwise[a];
        lap_h2_rhs.push(2.0 * h * (-2.0 * hm * th) + 2.0 * (th * th - 1.0));
        if node.slot.is_none() {
            if interior[a] {
                excluded.push(a);
            }
            half_lap_r2_rhs.push(f64::NAN);
            decomposition.push(f64::NAN);
            continue;
        }
        let [n_r, n_tau] = fields.nstar[a];
        half_lap_r2_rhs
            .push(r * fields.distance_laplacian[a] * (1.0 + n_tau * n_tau) + 1.0 + n_r * n_r + 2.0 * hm * r * n_r);
        // ⟨∇̄r̄, N⟩ = ⟨∇̂r̂, ∇̂u⟩/W = ⟨N*, ∇̂r̂⟩
        let sq = r * n_r + h * th;
        decomposition.push(grad_phi_norm2[a] - 4.0 * fields.phi[a] - 4.0 * sq * sq);
    }
    let framed = |a: usize| interior[a] && grid.nodes()[a].slot.is_some();
    let lap_h2_residual = ResidualStats::over((0..n).filter(|&a| interior[a]).map(|a| (a, lap_h2[a] - lap_h2_rhs[a])));
    let lap_r2_residual =
        ResidualStats::over((0..n).filter(|&a| framed(a)).map(|a| (a, half_lap_r2[a] - half_lap_r2_rhs[a])));
    let decomposition_residual = ResidualStats::over((0..n).filter(|&a| framed(a)).map(|a| (a, decomposition[a])));
    Ok(PhiDerivatives {
        collar,
        phi_min,
        interior,
        admissible,
        lap_phi,
        grad_phi_norm2,
        lap_log_phi,
        lap_h2,
        lap_h2_rhs,
        half_lap_r2,
        half_lap_r2_rhs,
        decomposition,
        lap_h2_residual,
        lap_r2_residual,
        decomposition_residual,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::functions::{AnalyticFunction, Constant, DistanceSquared};
    use crate::geometry::MetricModel;
    use crate::graph::{gauss_map_fields, induce_metric, laplace_beltrami, make_graph};
    use crate::grid::{build_grid, Grid, Resolution};

    fn flat(domain: Domain, nr: usize, nt: usize) -> Grid {
        build_grid(
            &MetricModel::flat(),
            &domain,
            Resolution {
                radial_cells: nr,
                angular_cells: nt,
            },
        )
        .unwrap()
    }

    #[test]
    fn slice_height_is_harmonic() {
        let g = flat(Domain::GeodesicDisc { radius: 1.0 }, 16, 32);
        let u = make_graph(&g, vec![0.0; g.len()]).unwrap();
        let f = gauss_map_fields(&g, &u);
        let op = laplace_beltrami(&g, &u, &induce_metric(&g, &u));
        let r = verify_height_harmonic(&f, &op, 2);
        assert_eq!(r.laplacian.max, 0.0);
        assert_eq!(r.identity.max, 0.0);
    }

    #[test]
    fn lifted_laplacian_examples() {
        let g = flat(Domain::GeodesicDisc { radius: 1.0 }, 32, 64);
        let u = make_graph(&g, vec![0.0; g.len()]).unwrap();
        let f = gauss_map_fields(&g, &u);
        let op = laplace_beltrami(&g, &u, &induce_metric(&g, &u));
        let c = verify_lifted_laplacian(&f, &op, &Constant(2.0), 2).unwrap();
        assert!(c.residual.max < 1e-12);
        let r2 = verify_lifted_laplacian(&f, &op, &DistanceSquared, 2).unwrap();
        assert!(r2.residual.max < 2e-2, "{:?}", r2.residual);
        assert_eq!(r2.excluded, vec![0]);
        let bare = AnalyticFunction::new("bare", |r, _| r);
        assert!(matches!(verify_lifted_laplacian(&f, &op, &bare, 2), Err(Error::MissingDerivatives)));
    }

    #[test]
    fn slice_phi_chain() {
        let g = flat(
            Domain::GeodesicAnnulus {
                inner: 1.0,
                outer: 4.0,
            },
            48,
            192,
        );
        let u = make_graph(&g, vec![0.0; g.len()]).unwrap();
        let f = gauss_map_fields(&g, &u);
        let op = laplace_beltrami(&g, &u, &induce_metric(&g, &u));
        let d = field_phi_derivatives(&f, &op, None, 2).unwrap();
        for a in 0..g.len() {
            if d.admissible[a] {
                assert!(d.lap_h2[a].abs() < 1e-12);
                assert!((0.5 * d.lap_phi[a] - 2.0).abs() < 1e-2);
                assert!((d.grad_phi_norm2[a] - 4.0 * f.phi[a]).abs() < 1e-10);
                assert!(d.lap_log_phi[a].abs() < 1e-2);
            }
        }
        assert!(d.decomposition_residual.max < 1e-10);
    }

    #[test]
    fn negative_phi_everywhere_is_an_error() {
        let g = flat(Domain::GeodesicDisc { radius: 0.5 }, 16, 32);
        let u = make_graph(&g, vec![1.0; g.len()]).unwrap();
        let f = gauss_map_fields(&g, &u);
        let op = laplace_beltrami(&g, &u, &induce_metric(&g, &u));
        assert!(matches!(field_phi_derivatives(&f, &op, None, 2), Err(Error::NoAdmissibleRegion(_))));
    }
}
