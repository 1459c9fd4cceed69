//! Rotationally symmetric maximal graphs.
//!
//! A radial graph `u(ρ)` is maximal iff `f u′ / √(1 − u′²) = C` is constant,
//! i.e. `u′ = C / √(f² + C²)`. The profile is integrated from the pole, where
//! the integrand stays bounded, so `u(0) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{MetricKind, MetricModel};

/// Five-point Gauss–Legendre rule on `[−1, 1]`.
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

/// Composite Gauss–Legendre quadrature with panels no wider than `panel`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panel: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let n = ((b - a).abs() / panel).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut total = 0.0;
    for k in 0..n {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * total
}

/// `u′(ρ) = C / √(f(ρ)² + C²)`.
pub fn rotsym_slope(model: &MetricModel, flux: f64, rho: f64) -> f64 {
    if flux == 0.0 {
        return 0.0;
    }
    let f = model.warp(rho).f;
    flux / (f * f + flux * flux).sqrt()
}

/// `u(ρ) = ∫₀^ρ u′`; closed form `C·arcsinh(ρ/C)` on the flat plane.
pub fn rotsym_value(model: &MetricModel, flux: f64, rho: f64) -> f64 {
    if flux == 0.0 {
        return 0.0;
    }
    if matches!(model.kind(), MetricKind::Flat) {
        return flux * (rho / flux).asinh();
    }
    integrate(|s| rotsym_slope(model, flux, s), 0.0, rho, 1e-2)
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub flux: f64,
    pub rho: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: Vec<f64>,
    /// `1 − u′² = f² / (f² + C²)`.
    pub margin: Vec<f64>,
}

impl RadialProfile {
    /// Largest violation of the first integral `f u′ / √(1 − u′²) = C`.
    pub fn first_integral_defect(&self, model: &MetricModel) -> f64 {
        self.rho
            .iter()
            .zip(&self.slope)
            .zip(&self.margin)
            .map(|((&r, &s), &m)| (model.warp(r).f * s / m.sqrt() - self.flux).abs())
            .fold(0.0, f64::max)
    }
}

/// Samples the radial maximal profile with first integral `flux` on
/// `samples + 1` equispaced radii of `rho_range`.
pub fn solve_rotsym_ode(
    model: &MetricModel,
    flux: f64,
    rho_range: (f64, f64),
    samples: usize,
) -> Result<RadialProfile> {
    let (a, b) = rho_range;
    if !(a >= 0.0 && b > a && samples > 0) {
        return Err(Error::InvalidParameter(format!("invalid radial range [{a}, {b}]")));
    }
    model.check_radius(b)?;
    let mut rho = Vec::with_capacity(samples + 1);
    let mut values = Vec::with_capacity(samples + 1);
    let mut slope = Vec::with_capacity(samples + 1);
    let mut margin = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let r = a + (b - a) * k as f64 / samples as f64;
        let f = model.warp(r).f;
        if flux != 0.0 && f == 0.0 {
            return Err(Error::DegenerateDomain(format!(
                "f vanishes at rho = {r}, where the profile with flux {flux} becomes null"
            )));
        }
        let m = if flux == 0.0 { 1.0 } else { f * f / (f * f + flux * flux) };
        rho.push(r);
        values.push(rotsym_value(model, flux, r));
        slope.push(rotsym_slope(model, flux, r));
        margin.push(m);
    }
    Ok(RadialProfile {
        flux,
        rho,
        values,
        slope,
        margin,
    })
}
