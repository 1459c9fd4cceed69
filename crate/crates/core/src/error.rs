use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point at rho = {rho} lies outside the chart range [0, {max})")]
    OutsideChart { rho: f64, max: f64 },

    #[error("distance Laplacian is singular at the basepoint")]
    SingularAtBasepoint,

    #[error("declared curvature sign {claim} contradicted: K = {curvature:.3e} at rho = {rho}")]
    CurvatureClaim {
        claim: &'static str,
        rho: f64,
        curvature: f64,
    },

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("graph is not spacelike at node {node}: |grad u|^2 = {grad_norm2}")]
    NotSpacelike { node: usize, grad_norm2: f64 },

    #[error(
        "spacelike margin {margin:.3e} below the floor {floor:.3e} (boundary data force |grad u| towards 1)"
    )]
    MarginViolation { margin: f64, floor: f64 },

    #[error("Newton iteration did not reach tolerance after {iterations} steps (last residual {last:.3e})")]
    NoConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("negative transition weight {weight:.3e} between nodes {from} and {to}")]
    NegativeWeight { from: usize, to: usize, weight: f64 },

    #[error("test function provides no analytic derivatives")]
    MissingDerivatives,

    #[error("no admissible region: {0}")]
    NoAdmissibleRegion(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
