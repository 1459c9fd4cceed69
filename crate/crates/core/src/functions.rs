//! Analytic functions on the base surface and Dirichlet boundary data.

use serde::{Deserialize, Serialize};

use crate::geometry::MetricModel;
use crate::ode::rotsym_value;

/// Value and polar partial derivatives at a point `(ρ, θ)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PolarPartials {
    pub v: f64,
    pub v_r: f64,
    pub v_t: f64,
    pub v_rr: f64,
    pub v_rt: f64,
    pub v_tt: f64,
}

impl PolarPartials {
    /// Gradient and Hessian of `g_M` in the orthonormal frame `{e_ρ, e_θ/f}`.
    pub fn frame(&self, model: &MetricModel, rho: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let w = model.warp(rho);
        let (f, df) = (w.f, w.df);
        let off = (self.v_rt - df / f * self.v_t) / f;
        (
            [self.v_r, self.v_t / f],
            [[self.v_rr, off], [off, (self.v_tt + f * df * self.v_r) / (f * f)]],
        )
    }
}

/// A smooth function on `M` given in geodesic polar coordinates.
pub trait BaseFunction: Send + Sync {
    fn name(&self) -> String;

    fn value(&self, rho: f64, theta: f64) -> f64;

    /// Analytic polar partials, if the function supplies them.
    fn partials(&self, _rho: f64, _theta: f64) -> Option<PolarPartials> {
        None
    }
}

pub struct Constant(pub f64);

impl BaseFunction for Constant {
    fn name(&self) -> String {
        format!("constant {}", self.0)
    }

    fn value(&self, _: f64, _: f64) -> f64 {
        self.0
    }

    fn partials(&self, _: f64, _: f64) -> Option<PolarPartials> {
        Some(PolarPartials {
            v: self.0,
            ..Default::default()
        })
    }
}

/// `r̂²`.
pub struct DistanceSquared;

impl BaseFunction for DistanceSquared {
    fn name(&self) -> String {
        "r^2".into()
    }

    fn value(&self, rho: f64, _: f64) -> f64 {
        rho * rho
    }

    fn partials(&self, rho: f64, _: f64) -> Option<PolarPartials> {
        Some(PolarPartials {
            v: rho * rho,
            v_r: 2.0 * rho,
            v_rr: 2.0,
            ..Default::default()
        })
    }
}

/// `c + a x + b y` in normal coordinates.
pub struct Affine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BaseFunction for Affine {
    fn name(&self) -> String {
        format!("{} + {} x + {} y", self.c, self.a, self.b)
    }

    fn value(&self, rho: f64, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.c + rho * (self.a * c + self.b * s)
    }

    fn partials(&self, rho: f64, theta: f64) -> Option<PolarPartials> {
        let (s, c) = theta.sin_cos();
        let lin = self.a * c + self.b * s;
        let dlin = -self.a * s + self.b * c;
        Some(PolarPartials {
            v: self.c + rho * lin,
            v_r: lin,
            v_t: rho * dlin,
            v_rr: 0.0,
            v_rt: dlin,
            v_tt: -rho * lin,
        })
    }
}

type ValueFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type PartialsFn = Box<dyn Fn(f64, f64) -> PolarPartials + Send + Sync>;

/// Closure-backed function; derivatives are optional.
pub struct AnalyticFunction {
    name: String,
    value: ValueFn,
    partials: Option<PartialsFn>,
}

impl AnalyticFunction {
    pub fn new(name: impl Into<String>, value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        AnalyticFunction {
            name: name.into(),
            value: Box::new(value),
            partials: None,
        }
    }

    pub fn with_partials(
        mut self,
        partials: impl Fn(f64, f64) -> PolarPartials + Send + Sync + 'static,
    ) -> Self {
        self.partials = Some(Box::new(partials));
        self
    }
}

impl BaseFunction for AnalyticFunction {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn value(&self, rho: f64, theta: f64) -> f64 {
        (self.value)(rho, theta)
    }

    fn partials(&self, rho: f64, theta: f64) -> Option<PolarPartials> {
        self.partials.as_ref().map(|p| p(rho, theta))
    }
}

/// Dirichlet data for the maximal graph problem, as functions of `(ρ, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryData {
    Constant { value: f64 },
    /// `c + a x + b y` in normal coordinates.
    Affine { a: f64, b: f64, c: f64 },
    /// `amplitude · sin(mode θ)`.
    Fourier { amplitude: f64, mode: u32 },
    /// Trace of the rotationally symmetric maximal graph with first
    /// integral `flux`, shifted by `offset`.
    Radial { flux: f64, offset: f64 },
}

impl BoundaryData {
    pub fn value(&self, model: &MetricModel, rho: f64, theta: f64) -> f64 {
        match *self {
            BoundaryData::Constant { value } => value,
            BoundaryData::Affine { a, b, c } => Affine { a, b, c }.value(rho, theta),
            BoundaryData::Fourier { amplitude, mode } => amplitude * (mode as f64 * theta).sin(),
            BoundaryData::Radial { flux, offset } => offset + rotsym_value(model, flux, rho),
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            BoundaryData::Constant { .. } => true,
            BoundaryData::Affine { a, b, .. } => a == 0.0 && b == 0.0,
            BoundaryData::Fourier { amplitude, mode } => amplitude == 0.0 || mode == 0,
            BoundaryData::Radial { flux, .. } => flux == 0.0,
        }
    }
}
