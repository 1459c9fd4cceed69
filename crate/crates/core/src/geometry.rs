//! Base surfaces `M²` with a pole-based geodesic distance.
//!
//! Every supported model is written in geodesic polar coordinates around the
//! basepoint, `g_M = dρ² + f(ρ)² dθ²`, so the distance to the basepoint is the
//! radial coordinate and is smooth away from the pole. Points are handed
//! around in *normal coordinates* `x = ρ (cos θ, sin θ)` centred at the
//! basepoint; for the flat plane these are Cartesian coordinates shifted by
//! the basepoint.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tolerance used when verifying a declared curvature sign.
pub const CURVATURE_SIGN_TOL: f64 = 1e-10;

/// A point of `M` in the model's chart (Cartesian for the flat plane,
/// normal coordinates about the pole otherwise).
pub type Point = [f64; 2];

/// Warping profiles of rotationally symmetric models other than the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Warp {
    /// Round sphere of the given radius, `f = R sin(ρ/R)`, `K = 1/R²`.
    Sphere { radius: f64 },
    /// Hamilton's cigar, `f = s tanh(ρ/s)`, `K = 2 sech²(ρ/s)/s² > 0`.
    Cigar { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    Flat,
    RotationallySymmetric(Warp),
    /// The hyperbolic plane of curvature −1, `f = sinh ρ`.
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureSign {
    NonNegative,
    Mixed,
    Negative,
}

impl CurvatureSign {
    pub fn as_str(self) -> &'static str {
        match self {
            CurvatureSign::NonNegative => "non-negative",
            CurvatureSign::Mixed => "mixed",
            CurvatureSign::Negative => "negative",
        }
    }
}

/// Values of the warping function and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpJet {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricModel {
    kind: MetricKind,
    basepoint: Point,
    curvature_sign: CurvatureSign,
    /// Range of ρ over which the declared curvature sign was verified.
    verified_up_to: f64,
}

impl MetricModel {
    /// Builds a model and verifies the declared curvature sign on sampled radii.
    pub fn new(kind: MetricKind, basepoint: Point, claim: CurvatureSign) -> Result<Self> {
        match kind {
            MetricKind::RotationallySymmetric(Warp::Sphere { radius })
            | MetricKind::RotationallySymmetric(Warp::Cigar { scale: radius }) => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "warp scale must be positive, got {radius}"
                    )));
                }
            }
            _ => {}
        }
        if !matches!(kind, MetricKind::Flat) && basepoint != [0.0, 0.0] {
            return Err(Error::InvalidParameter(
                "rotationally symmetric models are charted about their pole; basepoint must be the origin"
                    .into(),
            ));
        }
        let mut model = MetricModel {
            kind,
            basepoint,
            curvature_sign: claim,
            verified_up_to: 0.0,
        };
        model.verified_up_to = model.verify_curvature_claim()?;
        Ok(model)
    }

    pub fn flat() -> Self {
        Self::new(MetricKind::Flat, [0.0, 0.0], CurvatureSign::NonNegative).unwrap()
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Self::new(
            MetricKind::RotationallySymmetric(Warp::Sphere { radius }),
            [0.0, 0.0],
            CurvatureSign::NonNegative,
        )
    }

    pub fn cigar(scale: f64) -> Result<Self> {
        Self::new(
            MetricKind::RotationallySymmetric(Warp::Cigar { scale }),
            [0.0, 0.0],
            CurvatureSign::NonNegative,
        )
    }

    pub fn hyperbolic() -> Self {
        Self::new(MetricKind::Hyperbolic, [0.0, 0.0], CurvatureSign::Negative).unwrap()
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn basepoint(&self) -> Point {
        self.basepoint
    }

    pub fn curvature_sign(&self) -> CurvatureSign {
        self.curvature_sign
    }

    /// True when the model carries the curvature hypothesis `K ≥ 0` used by
    /// the superharmonicity and rigidity checks.
    pub fn nonnegative_curvature(&self) -> bool {
        self.curvature_sign == CurvatureSign::NonNegative
    }

    /// Supremum of the radial coordinate covered by the chart.
    pub fn chart_limit(&self) -> f64 {
        match self.kind {
            MetricKind::RotationallySymmetric(Warp::Sphere { radius }) => PI * radius,
            _ => f64::INFINITY,
        }
    }

    pub fn check_radius(&self, rho: f64) -> Result<()> {
        let max = self.chart_limit();
        if !(rho >= 0.0 && rho < max) {
            return Err(Error::OutsideChart { rho, max });
        }
        Ok(())
    }

    pub fn warp(&self, rho: f64) -> WarpJet {
        match self.kind {
            MetricKind::Flat => WarpJet {
                f: rho,
                df: 1.0,
                d2f: 0.0,
            },
            MetricKind::Hyperbolic => WarpJet {
                f: rho.sinh(),
                df: rho.cosh(),
                d2f: rho.sinh(),
            },
            MetricKind::RotationallySymmetric(Warp::Sphere { radius }) => {
                let (s, c) = (rho / radius).sin_cos();
                WarpJet {
                    f: radius * s,
                    df: c,
                    d2f: -s / radius,
                }
            }
            MetricKind::RotationallySymmetric(Warp::Cigar { scale }) => {
                let t = (rho / scale).tanh();
                let sech2 = 1.0 - t * t;
                WarpJet {
                    f: scale * t,
                    df: sech2,
                    d2f: -2.0 * sech2 * t / scale,
                }
            }
        }
    }

    /// `f(ρ)/ρ`, continuous through the pole (where it equals 1).
    pub fn warp_ratio(&self, rho: f64) -> f64 {
        if rho < 1e-6 {
            // second-order Taylor: f(ρ)/ρ = 1 − K(0) ρ²/6 + O(ρ⁴)
            1.0 - self.curvature_at_radius(0.0) * rho * rho / 6.0
        } else {
            self.warp(rho).f / rho
        }
    }

    /// Analytic Gaussian curvature as a function of the radial coordinate,
    /// including the limiting value at the pole.
    pub fn curvature_at_radius(&self, rho: f64) -> f64 {
        match self.kind {
            MetricKind::Flat => 0.0,
            MetricKind::Hyperbolic => -1.0,
            MetricKind::RotationallySymmetric(Warp::Sphere { radius }) => 1.0 / (radius * radius),
            MetricKind::RotationallySymmetric(Warp::Cigar { scale }) => {
                let sech = 1.0 / (rho / scale).cosh();
                2.0 * sech * sech / (scale * scale)
            }
        }
    }

    /// Gaussian curvature at a point of the chart.
    pub fn gaussian_curvature(&self, point: Point) -> Result<f64> {
        let (rho, _) = self.polar(point);
        self.check_radius(rho)?;
        Ok(self.curvature_at_radius(rho))
    }

    /// Geodesic polar coordinates `(ρ, θ)` of a point, `θ ∈ (−π, π]`.
    pub fn polar(&self, point: Point) -> (f64, f64) {
        let x = point[0] - self.basepoint[0];
        let y = point[1] - self.basepoint[1];
        (x.hypot(y), y.atan2(x))
    }

    pub fn point_from_polar(&self, rho: f64, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        [self.basepoint[0] + rho * c, self.basepoint[1] + rho * s]
    }

    /// `r̂(x) = dist_M(x, x₀)`.
    pub fn distance_to_basepoint(&self, point: Point) -> f64 {
        self.polar(point).0
    }

    /// `Δ̂r̂ = f'(ρ)/f(ρ)`, singular at the basepoint.
    pub fn distance_laplacian(&self, point: Point) -> Result<f64> {
        let (rho, _) = self.polar(point);
        self.distance_laplacian_at_radius(rho)
    }

    pub fn distance_laplacian_at_radius(&self, rho: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Err(Error::SingularAtBasepoint);
        }
        self.check_radius(rho)?;
        let w = self.warp(rho);
        Ok(w.df / w.f)
    }

    /// Geodesic distance between two chart points. Needs a closed form, so
    /// the cigar is not supported.
    pub fn distance(&self, p: Point, q: Point) -> Result<f64> {
        let (a, ta) = self.polar(p);
        let (b, tb) = self.polar(q);
        let half = 0.5 * (ta - tb);
        let s2 = half.sin().powi(2);
        match self.kind {
            MetricKind::Flat => Ok((p[0] - q[0]).hypot(p[1] - q[1])),
            MetricKind::Hyperbolic => {
                // sinh²(d/2) = sinh²((a−b)/2) + sinh a sinh b sin²(Δθ/2)
                let v = (0.5 * (a - b)).sinh().powi(2) + a.sinh() * b.sinh() * s2;
                Ok(2.0 * v.sqrt().asinh())
            }
            MetricKind::RotationallySymmetric(Warp::Sphere { radius }) => {
                let (a, b) = (a / radius, b / radius);
                let v = (0.5 * (a - b)).sin().powi(2) + a.sin() * b.sin() * s2;
                Ok(2.0 * radius * v.sqrt().min(1.0).asin())
            }
            MetricKind::RotationallySymmetric(Warp::Cigar { .. }) => Err(Error::Unsupported(
                "point-to-point distance on the cigar has no closed form".into(),
            )),
        }
    }

    /// `(G, G⁻¹, √det G)` in normal coordinates, with the inverse and the
    /// determinant `(f/ρ)²` formed analytically.
    pub fn metric_normal_coords_with_inverse(&self, x: [f64; 2]) -> ([[f64; 2]; 2], [[f64; 2]; 2], f64) {
        let rho = x[0].hypot(x[1]);
        if rho == 0.0 {
            let id = [[1.0, 0.0], [0.0, 1.0]];
            return (id, id, 1.0);
        }
        let k = self.warp_ratio(rho);
        let s = k * k;
        let n = [x[0] / rho, x[1] / rho];
        let mut g = [[0.0; 2]; 2];
        let mut gi = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                g[i][j] = n[i] * n[j] + s * (id - n[i] * n[j]);
                gi[i][j] = n[i] * n[j] + (id - n[i] * n[j]) / s;
            }
        }
        (g, gi, k)
    }

    /// Metric tensor of `g_M` in normal coordinates (relative to the
    /// basepoint): `G = n nᵀ + (f/ρ)² (I − n nᵀ)` with `n = x/|x|`.
    pub fn metric_normal_coords(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let rho = x[0].hypot(x[1]);
        let s = self.warp_ratio(rho).powi(2);
        if rho == 0.0 {
            return [[1.0, 0.0], [0.0, 1.0]];
        }
        let n = [x[0] / rho, x[1] / rho];
        let mut g = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                g[i][j] = n[i] * n[j] + s * (id - n[i] * n[j]);
            }
        }
        g
    }

    fn verify_curvature_claim(&self) -> Result<f64> {
        let upto = self.chart_limit().min(50.0) * 0.999;
        let samples = 4000;
        let mut min_k = f64::INFINITY;
        let mut max_k = f64::NEG_INFINITY;
        let mut argmin = 0.0;
        let mut argmax = 0.0;
        for k in 0..=samples {
            let rho = upto * k as f64 / samples as f64;
            let kk = self.curvature_at_radius(rho);
            if !kk.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "curvature is not finite at rho = {rho}"
                )));
            }
            if kk < min_k {
                min_k = kk;
                argmin = rho;
            }
            if kk > max_k {
                max_k = kk;
                argmax = rho;
            }
        }
        let claim = self.curvature_sign;
        let violation = match claim {
            CurvatureSign::NonNegative => (min_k < -CURVATURE_SIGN_TOL).then_some((argmin, min_k)),
            CurvatureSign::Negative => (max_k >= -CURVATURE_SIGN_TOL).then_some((argmax, max_k)),
            CurvatureSign::Mixed => {
                if min_k >= -CURVATURE_SIGN_TOL {
                    Some((argmin, min_k))
                } else if max_k <= CURVATURE_SIGN_TOL {
                    Some((argmax, max_k))
                } else {
                    None
                }
            }
        };
        match violation {
            Some((rho, curvature)) => Err(Error::CurvatureClaim {
                claim: claim.as_str(),
                rho,
                curvature,
            }),
            None => Ok(upto),
        }
    }

    /// Radius up to which the curvature claim was sampled.
    pub fn verified_up_to(&self) -> f64 {
        self.verified_up_to
    }
}
