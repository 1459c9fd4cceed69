//! Wedges `𝒲_a = {|t| ≤ a r̂(x)}` around the basepoint and the properness
//! bounds for `φ = r² − h²` they yield.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

use crate::domain::StarlikeVerdict;
use crate::error::{Error, Result};
use crate::geometry::{MetricModel, Point};
use crate::graph::{GraphFunction, SurfaceFields};
use crate::grid::Grid;

/// Boundary samples used by [`dist_plus_brute_force`].
pub const BRUTE_FORCE_SAMPLES: usize = 100_000;
const CONTAINMENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WedgeSpec {
    a: f64,
}

impl WedgeSpec {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter(format!("wedge slope must lie in (0, 1), got {a}")));
        }
        Ok(WedgeSpec { a })
    }

    pub fn slope(&self) -> f64 {
        self.a
    }

    pub fn contains(&self, model: &MetricModel, x: Point, t: f64) -> bool {
        wedge_membership(self, model, x, t)
    }

    pub fn sublevel_bound(&self, b: f64) -> Result<f64> {
        phi_sublevel_bound(self.a, b)
    }
}

pub fn wedge_membership(w: &WedgeSpec, model: &MetricModel, x: Point, t: f64) -> bool {
    t.abs() <= w.a * model.distance_to_basepoint(x)
}

/// `c = √(b / (1 − a²))`: on `𝒲_a`, `r̂² − t² ≤ b` forces `r̂ ≤ c` and
/// `|t| ≤ a c`. Accepts the degenerate slope `a = 0` (the slab `t = 0`).
pub fn phi_sublevel_bound(a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("b must be positive, got {b}")));
    }
    if !(0.0..1.0).contains(&a) {
        return Err(Error::InvalidParameter(format!("wedge slope must lie in [0, 1), got {a}")));
    }
    Ok((b / (1.0 - a * a)).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct ContainmentReport {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub samples: usize,
    pub seed: u64,
    /// Samples of `𝒲_a` with `r̂² − t² ≤ b`.
    pub in_sublevel: usize,
    pub violations: usize,
}

/// Samples `n` points of `𝒲_a` over `r̂ ≤ 2c` and counts sublevel points
/// escaping `B̄(x₀, c) × [−ac, ac]`.
pub fn sample_sublevel_containment(
    model: &MetricModel,
    a: f64,
    b: f64,
    n: usize,
    seed: u64,
) -> Result<ContainmentReport> {
    let c = phi_sublevel_bound(a, b)?;
    let reach = (2.0 * c).min(model.chart_limit() * 0.999);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_sublevel = 0;
    let mut violations = 0;
    for _ in 0..n {
        let rho = reach * rng.gen::<f64>();
        let theta = 2.0 * PI * rng.gen::<f64>();
        let x = model.point_from_polar(rho, theta);
        let r = model.distance_to_basepoint(x);
        let t = a * r * (2.0 * rng.gen::<f64>() - 1.0);
        if r * r - t * t <= b {
            in_sublevel += 1;
            if r > c + CONTAINMENT_SLACK || t.abs() > a * c + CONTAINMENT_SLACK {
                violations += 1;
            }
        }
    }
    Ok(ContainmentReport {
        a,
        b,
        c,
        samples: n,
        seed,
        in_sublevel,
        violations,
    })
}

/// Distance in `g_M + dt²` from `(x, t)` to `∂𝒲` for the slope-one wedge:
/// `(r̂(x) − |t|)/√2`.
pub fn dist_plus_to_wedge_boundary(model: &MetricModel, x: Point, t: f64) -> Result<f64> {
    let r = model.distance_to_basepoint(x);
    if t.abs() > r {
        return Err(Error::Precondition(format!(
            "point with |t| = {} lies outside the wedge |t| <= r = {r}",
            t.abs()
        )));
    }
    Ok((r - t.abs()) / SQRT_2)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BruteForceDistance {
    pub distance: f64,
    /// Bound on the gap between the sampled and the exact minimum.
    pub resolution: f64,
    pub samples: usize,
}

/// Minimizes the product distance from `(x, t)` over boundary samples
/// `(y, ±r̂(y))`, stratified on a `(r̂, θ, sign)` lattice with one jittered
/// point per cell.
pub fn dist_plus_brute_force(
    model: &MetricModel,
    x: Point,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<BruteForceDistance> {
    let r = model.distance_to_basepoint(x);
    let reach = (r + t.abs() + 1.0).min(model.chart_limit() * 0.999);
    let per_sign = (samples / 2).max(4);
    let n_rho = ((per_sign as f64 / (2.0 * PI)).sqrt().ceil() as usize).max(2);
    let n_theta = (per_sign / n_rho).max(2);
    let d_rho = reach / n_rho as f64;
    let d_theta = 2.0 * PI / n_theta as f64;
    let best = (0..n_rho)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut best = f64::INFINITY;
            for j in 0..n_theta {
                let rho = (i as f64 + rng.gen::<f64>()) * d_rho;
                let theta = (j as f64 + rng.gen::<f64>()) * d_theta;
                let y = model.point_from_polar(rho, theta);
                let ry = model.distance_to_basepoint(y);
                let dm = model.distance(x, y)?;
                for s in [ry, -ry] {
                    best = best.min(dm.hypot(t - s));
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    // a cell has M-diameter at most √(Δρ² + (f_max Δθ)²); the boundary height
    // r̂(y) is 1-Lipschitz, so the product distance moves by at most √2 times it
    let f_max = (0..=64)
        .map(|k| model.warp(reach * k as f64 / 64.0).f)
        .fold(0.0, f64::max);
    let resolution = SQRT_2 * d_rho.hypot(f_max * d_theta);
    Ok(BruteForceDistance {
        distance: best,
        resolution,
        samples: 2 * n_rho * n_theta,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HeightBoundReport {
    /// Value subtracted so that `u(x₀) = 0`.
    pub normalization_shift: f64,
    pub warning: Option<String>,
    /// `min (r̂ − |u|)` over nodes other than the basepoint.
    pub worst_margin: f64,
    pub worst_node: Option<usize>,
    pub violations: usize,
    pub pass: bool,
}

/// Checks `−r̂ < u < r̂` away from `x₀` on a starlike pole-centred grid.
pub fn graph_height_bound_check(
    grid: &Grid,
    u: &GraphFunction,
    certificate: &StarlikeVerdict,
) -> Result<HeightBoundReport> {
    if !certificate.is_certified() {
        return Err(Error::Precondition(
            "height bound requires a starlike certificate for the domain".into(),
        ));
    }
    let pole = grid
        .pole()
        .ok_or_else(|| Error::Precondition("the basepoint is not a node of the grid".into()))?;
    let shift = u.values()[pole];
    let warning = (shift != 0.0).then(|| format!("u(x0) = {shift:e}; values shifted so that u(x0) = 0"));
    let mut worst_margin = f64::INFINITY;
    let mut worst_node = None;
    let mut violations = 0;
    for (a, n) in grid.nodes().iter().enumerate() {
        if a == pole {
            continue;
        }
        let margin = n.rho - (u.values()[a] - shift).abs();
        if margin <= 0.0 {
            violations += 1;
        }
        if margin < worst_margin {
            worst_margin = margin;
            worst_node = Some(a);
        }
    }
    Ok(HeightBoundReport {
        normalization_shift: shift,
        warning,
        worst_margin,
        worst_node,
        violations,
        pass: violations == 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialMonotonicityReport {
    pub curves: usize,
    /// Smallest increment of `dist₊` between consecutive samples on a curve.
    pub min_increment: f64,
    pub violations: usize,
    pub pass: bool,
}

/// Samples `curves` radial geodesics of a pole-centred grid and checks that
/// `s ↦ (s − |u(γ(s)) − u(x₀)|)/√2` strictly increases along each.
pub fn radial_monotonicity_check(grid: &Grid, u: &GraphFunction, curves: usize) -> Result<RadialMonotonicityReport> {
    let pole = grid
        .pole()
        .ok_or_else(|| Error::Precondition("radial curves need the basepoint as a grid node".into()))?;
    if curves == 0 || curves > grid.slots() {
        return Err(Error::InvalidParameter(format!(
            "between 1 and {} radial curves available, {curves} requested",
            grid.slots()
        )));
    }
    let base = u.values()[pole];
    let mut min_increment = f64::INFINITY;
    let mut violations = 0;
    for k in 0..curves {
        let slot = k * grid.slots() / curves;
        let mut prev = 0.0;
        for ring in 1..grid.rings() {
            let a = grid.node_id(ring, slot);
            let d = (grid.nodes()[a].rho - (u.values()[a] - base).abs()) / SQRT_2;
            let inc = d - prev;
            if inc <= 0.0 {
                violations += 1;
            }
            min_increment = min_increment.min(inc);
            prev = d;
        }
    }
    Ok(RadialMonotonicityReport {
        curves,
        min_increment,
        violations,
        pass: violations == 0,
    })
}

/// `c = (2ε² + b)/(2√2 ε)`.
pub fn properness_constant(epsilon: f64, b: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!(
            "epsilon must be positive (the graph touches the wedge boundary), got {epsilon}"
        )));
    }
    if !(b >= 0.0) {
        return Err(Error::InvalidParameter(format!("b must be non-negative, got {b}")));
    }
    Ok((2.0 * epsilon * epsilon + b) / (2.0 * SQRT_2 * epsilon))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProperCertificate {
    /// Largest `|u − u(x₀)| / r̂` outside `B_δ`: the graph lies in `𝒲_a`.
    pub a: f64,
    pub b: f64,
    /// Radius of the ring used as `∂B_δ`.
    pub delta: f64,
    pub epsilon: f64,
    /// Largest jump of `dist₊` between adjacent samples of `∂B_δ`.
    pub sampling_gap: f64,
    pub c: f64,
    pub violations: usize,
    /// Outer radius of the grid: the scale at which the bound was checked.
    pub scale: f64,
}

/// Computes `ε = min dist₊` over the grid ring nearest `ρ = delta`, the
/// constant `c`, and counts nodes outside `B_δ` with `φ ≤ b` but `r̂ > c`.
/// `base_value` is `u(x₀)`; on pole-centred grids it defaults to the pole
/// value.
pub fn properness_certificate(
    grid: &Grid,
    u: &GraphFunction,
    b: f64,
    delta: f64,
    base_value: Option<f64>,
) -> Result<ProperCertificate> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let base = match (base_value, grid.pole()) {
        (Some(v), _) => v,
        (None, Some(p)) => u.values()[p],
        (None, None) => {
            return Err(Error::Precondition("u(x0) must be given when x0 is not a grid node".into()))
        }
    };
    let ring = (0..grid.rings())
        .min_by(|&i, &j| {
            (grid.ring_radius(i) - delta)
                .abs()
                .total_cmp(&(grid.ring_radius(j) - delta).abs())
        })
        .unwrap_or(0);
    let radius = grid.ring_radius(ring);
    if !(radius > 0.0) || ring + 1 >= grid.rings() {
        return Err(Error::Precondition(format!(
            "delta = {delta} does not select a ring compactly inside the grid"
        )));
    }
    let dist: Vec<f64> = (0..grid.slots())
        .map(|s| {
            let a = grid.node_id(ring, s);
            (radius - (u.values()[a] - base).abs()) / SQRT_2
        })
        .collect();
    let epsilon = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let sampling_gap = dist
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let c = properness_constant(epsilon, b)?;
    let mut a_max: f64 = 0.0;
    let mut violations = 0;
    for (k, n) in grid.nodes().iter().enumerate() {
        if n.rho <= radius {
            continue;
        }
        let h = u.values()[k] - base;
        a_max = a_max.max(h.abs() / n.rho);
        if n.rho * n.rho - h * h <= b && n.rho > c + CONTAINMENT_SLACK {
            violations += 1;
        }
    }
    Ok(ProperCertificate {
        a: a_max,
        b,
        delta: radius,
        epsilon,
        sampling_gap,
        c,
        violations,
        scale: grid.ring_radius(grid.rings() - 1),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExhaustionLevel {
    pub radius: f64,
    /// `min φ` over nodes with `core < r ≤ radius`.
    pub min_phi_outside_core: f64,
    /// Largest `r` of a node in `{φ ≤ b}` within the level.
    pub sublevel_radius: f64,
    /// Largest `|h| / r` outside the core.
    pub wedge_slope: f64,
    pub eventually_positive: bool,
    pub sublevel_bounded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EventualPositivityReport {
    pub core: f64,
    pub b: f64,
    pub levels: Vec<ExhaustionLevel>,
    /// Positivity and bounded sublevels at every level, "at this scale".
    pub eventually_positive: bool,
    pub sublevels_bounded: bool,
}

/// Per exhaustion radius: positivity of `φ` outside `B_core` and whether
/// `{φ ≤ b}` stays clear of the level's outer edge (`margin` away).
pub fn eventual_positivity_report(
    fields: &SurfaceFields,
    core: f64,
    exhaustion: &[f64],
    b: f64,
    margin: f64,
) -> Result<EventualPositivityReport> {
    if exhaustion.is_empty() || exhaustion.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("exhaustion radii must be nonempty and increasing".into()));
    }
    let levels: Vec<ExhaustionLevel> = exhaustion
        .iter()
        .map(|&radius| {
            let mut min_phi = f64::INFINITY;
            let mut sub: f64 = 0.0;
            let mut slope: f64 = 0.0;
            for a in 0..fields.len() {
                let r = fields.r[a];
                if r > radius {
                    continue;
                }
                if fields.phi[a] <= b {
                    sub = sub.max(r);
                }
                if r > core {
                    min_phi = min_phi.min(fields.phi[a]);
                    slope = slope.max(fields.h[a].abs() / r);
                }
            }
            ExhaustionLevel {
                radius,
                min_phi_outside_core: min_phi,
                sublevel_radius: sub,
                wedge_slope: slope,
                eventually_positive: min_phi > 0.0,
                sublevel_bounded: sub < radius - margin,
            }
        })
        .collect();
    Ok(EventualPositivityReport {
        core,
        b,
        eventually_positive: levels.iter().all(|l| l.eventually_positive),
        sublevels_bounded: levels.iter().all(|l| l.sublevel_bounded),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_examples() {
        let m = MetricModel::flat();
        let w = WedgeSpec::new(0.5).unwrap();
        assert!(w.contains(&m, [2.0, 0.0], 1.0));
        assert!(!w.contains(&m, [2.0, 0.0], 1.01));
        assert!(w.contains(&m, [0.0, 0.0], 0.0));
        assert!(WedgeSpec::new(1.2).is_err() && WedgeSpec::new(0.0).is_err());
    }

    #[test]
    fn sublevel_bound_examples() {
        assert!((phi_sublevel_bound(0.5, 3.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((phi_sublevel_bound(0.0, 4.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(phi_sublevel_bound(0.5, 0.0).is_err());
        let r = sample_sublevel_containment(&MetricModel::flat(), 0.7, 1.0, 10_000, 3).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.in_sublevel > 0);
    }

    #[test]
    fn dist_plus_examples() {
        let m = MetricModel::flat();
        assert!((dist_plus_to_wedge_boundary(&m, [3.0, 0.0], 1.0).unwrap() - SQRT_2).abs() < 1e-12);
        assert_eq!(dist_plus_to_wedge_boundary(&m, [0.0, 0.0], 0.0).unwrap(), 0.0);
        assert!(dist_plus_to_wedge_boundary(&m, [1.0, 0.0], 2.0).is_err());
    }

    #[test]
    fn brute_force_brackets_the_closed_form() {
        let m = MetricModel::sphere(1.0).unwrap();
        let x = m.point_from_polar(1.0, 0.4);
        let exact = dist_plus_to_wedge_boundary(&m, x, 0.3).unwrap();
        let bf = dist_plus_brute_force(&m, x, 0.3, 20_000, 1).unwrap();
        assert!(exact <= bf.distance + 1e-12);
        assert!(bf.distance <= exact + bf.resolution, "{bf:?} {exact}");
    }

    #[test]
    fn properness_constant_examples() {
        assert!((properness_constant(1.0, 2.0).unwrap() - SQRT_2).abs() < 1e-12);
        assert!((properness_constant(0.5f64.sqrt(), 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(properness_constant(0.0, 1.0).is_err());
    }
}
