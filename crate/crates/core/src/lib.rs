//! Numerical laboratory for maximal spacelike graphs `t = u(x)` in Lorentzian
//! products `M² × ℝ₁` over rotationally symmetric model surfaces.

pub mod calculus;
pub mod domain;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod graph;
pub mod grid;
pub mod convergence;
pub mod ode;
pub mod parabolicity;
pub mod rigidity;
pub mod solver;
pub mod sparse;
pub mod wedge;

pub use domain::{starlike_check, Domain, StarlikeVerdict};
pub use error::{Error, Result};
pub use functions::{BaseFunction, BoundaryData};
pub use geometry::{CurvatureSign, MetricKind, MetricModel, Point, Warp};
pub use graph::{
    gauss_map_fields, induce_metric, laplace_beltrami, make_graph, DiscreteOperator, GraphFunction,
    InducedMetric, SurfaceFields,
};
pub use grid::{build_grid, Grid, Resolution};
pub use ode::{solve_rotsym_ode, RadialProfile};
pub use solver::{residual_mean_curvature, solve_dirichlet, SolverOptions};
