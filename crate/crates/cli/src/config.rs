//! Run configuration: a TOML document with typed sections.
//!
//! Range constraints are enforced while deserializing so that violations
//! are reported with the offending line and column.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use maxgraph::{BoundaryData, CurvatureSign, Domain, MetricKind, MetricModel, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    VerifyIdentities,
    Parabolicity,
    Wedge,
    Rigidity,
    FullSuite,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::VerifyIdentities => "verify-identities",
            Experiment::Parabolicity => "parabolicity",
            Experiment::Wedge => "wedge",
            Experiment::Rigidity => "rigidity",
            Experiment::FullSuite => "full-suite",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A finite `f64 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Positive(f64);

impl Positive {
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Positive {
    type Error = String;

    fn try_from(v: f64) -> Result<Self, String> {
        if v > 0.0 && v.is_finite() {
            Ok(Positive(v))
        } else {
            Err(format!("expected a positive number, got {v}"))
        }
    }
}

impl From<Positive> for f64 {
    fn from(v: Positive) -> f64 {
        v.0
    }
}

/// Wedge slope `a` with `0 < a < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Slope(f64);

impl Slope {
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Slope {
    type Error = String;

    fn try_from(v: f64) -> Result<Self, String> {
        if v > 0.0 && v < 1.0 {
            Ok(Slope(v))
        } else {
            Err(format!("wedge slope a must satisfy 0 < a < 1, got {v}"))
        }
    }
}

impl From<Slope> for f64 {
    fn from(v: Slope) -> f64 {
        v.0
    }
}

/// Base surfaces, all with the basepoint at the pole of normal coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Flat {},
    Sphere { radius: Positive },
    Cigar { scale: Positive },
    Hyperbolic {},
}

impl ModelConfig {
    pub fn build(&self) -> maxgraph::Result<MetricModel> {
        match *self {
            ModelConfig::Flat {} => Ok(MetricModel::flat()),
            ModelConfig::Sphere { radius } => MetricModel::sphere(radius.get()),
            ModelConfig::Cigar { scale } => MetricModel::cigar(scale.get()),
            ModelConfig::Hyperbolic {} => MetricModel::new(MetricKind::Hyperbolic, [0.0, 0.0], CurvatureSign::Negative),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub radial_cells: usize,
    pub angular_cells: usize,
    /// Refinement multipliers applied to both cell counts.
    pub ladder: Vec<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            radial_cells: 32,
            angular_cells: 64,
            ladder: vec![1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Exact identities and residuals of closed-form cases.
    pub identity: f64,
    /// `max|Δh| ≤ harmonic_constant · Δ²`.
    pub harmonic_constant: f64,
    /// `tol(Δ) = chain_constant · Δ²` for the superharmonicity chain and `Δ(1/Θ)`.
    pub chain_constant: f64,
    pub decomposition_constant: f64,
    /// Minimum fitted order of the `Θ` identities along a ladder.
    pub theta_order: f64,
    pub collar: usize,
    pub capacity_relative: f64,
    pub walk_sigmas: f64,
    pub flat_a2: f64,
    pub slice_theta: f64,
    /// Sublevel cutoff for `Δ log φ`; unset means `10Δ²` at each level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_min: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-10,
            harmonic_constant: 16.0,
            chain_constant: 8.0,
            decomposition_constant: 4.0,
            theta_order: 1.5,
            collar: 2,
            capacity_relative: 0.05,
            walk_sigmas: 3.0,
            flat_a2: 1e-6,
            slice_theta: 1e-8,
            phi_min: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceChoice {
    Slice,
    Maximal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedVerdict {
    Decay,
    Plateau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParabolicityConfig {
    pub surface: SurfaceChoice,
    /// Height of the slice when `surface = "slice"`.
    pub height: f64,
    pub inner: Positive,
    pub radii: Vec<f64>,
    pub spacing: Positive,
    pub angular_cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<ExpectedVerdict>,
    /// Random walkers on the first annulus; 0 disables the walk.
    pub walkers: usize,
}

impl Default for ParabolicityConfig {
    fn default() -> Self {
        ParabolicityConfig {
            surface: SurfaceChoice::Slice,
            height: 0.0,
            inner: Positive(1.0),
            radii: vec![4.0, 8.0, 16.0, 32.0],
            spacing: Positive(1.0 / 16.0),
            angular_cells: 64,
            expected: None,
            walkers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WedgeConfig {
    pub a: Slope,
    pub b: Positive,
    #[serde(default = "default_containment_samples")]
    pub samples: usize,
    /// Random wedge points checked against the brute-force distance.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_brute_force_samples")]
    pub brute_force_samples: usize,
    /// Radius of the ball around `x₀` left out of the properness certificate.
    #[serde(default = "default_delta")]
    pub delta: Positive,
    #[serde(default = "default_curves")]
    pub curves: usize,
}

fn default_containment_samples() -> usize {
    10_000
}

fn default_points() -> usize {
    100
}

fn default_brute_force_samples() -> usize {
    100_000
}

fn default_delta() -> Positive {
    Positive(0.25)
}

fn default_curves() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigidityConfig {
    pub radii: Vec<f64>,
    pub inner_radius: Positive,
    pub spacing: Positive,
    pub angular_cells: usize,
}

impl Default for RigidityConfig {
    fn default() -> Self {
        RigidityConfig {
            radii: vec![2.0, 4.0, 8.0],
            inner_radius: Positive(1.0),
            spacing: Positive(1.0 / 16.0),
            angular_cells: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryData>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parabolicity: Option<ParabolicityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wedge: Option<WedgeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rigidity: Option<RigidityConfig>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// A configuration error, with the 1-based line it refers to when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source_name: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{l}:{c}: {}", self.source_name, self.message),
            (Some(l), None) => write!(f, "{}:{l}: {}", self.source_name, self.message),
            _ => write!(f, "{}: {}", self.source_name, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Line of the `[section]` header, if present.
fn section_line(text: &str, section: &str) -> Option<usize> {
    let header = format!("[{section}]");
    text.lines().position(|l| l.trim() == header).map(|i| i + 1)
}

impl RunConfig {
    pub fn parse(text: &str, source_name: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => {
                    let (l, c) = line_col(text, span.start);
                    (Some(l), Some(c))
                }
                None => (None, None),
            };
            ConfigError {
                source_name: source_name.into(),
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        config.validate(text, source_name)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source_name: name.clone(),
            line: None,
            column: None,
            message: format!("cannot read configuration: {e}"),
        })?;
        Self::parse(&text, &name)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configurations serialize to TOML")
    }

    /// Cross-field checks that the schema alone cannot express.
    fn validate(&self, text: &str, source_name: &str) -> Result<(), ConfigError> {
        let err = |section: &str, message: String| ConfigError {
            source_name: source_name.into(),
            line: section_line(text, section),
            column: None,
            message,
        };
        let model = self.model.build().map_err(|e| err("model", e.to_string()))?;
        if let Some(domain) = &self.domain {
            domain.validate(&model).map_err(|e| err("domain", e.to_string()))?;
        }
        if self.grid.radial_cells < 2 || self.grid.angular_cells < 3 {
            return Err(err("grid", "grid needs at least 2 radial and 3 angular cells".into()));
        }
        if self.grid.ladder.is_empty() || self.grid.ladder.contains(&0) {
            return Err(err("grid", "ladder must list positive refinement multipliers".into()));
        }
        if self.grid.ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(err("grid", "ladder multipliers must increase".into()));
        }
        self.solver.validate().map_err(|e| err("solver", e.to_string()))?;
        if let Some(v) = self.tolerances.phi_min {
            if !(v > 0.0) {
                return Err(err("tolerances", format!("phi_min must be positive, got {v}")));
            }
        }
        if let Some(p) = &self.parabolicity {
            if p.radii.len() < 4 {
                return Err(err("parabolicity", format!("at least 4 radii required, got {}", p.radii.len())));
            }
            if p.radii[0] <= p.inner.get() || p.radii.windows(2).any(|w| w[1] <= w[0]) {
                return Err(err("parabolicity", "radii must increase and exceed inner".into()));
            }
            if p.surface == SurfaceChoice::Maximal && self.boundary.is_none() {
                return Err(err("parabolicity", "surface = \"maximal\" needs a [boundary] section".into()));
            }
        }
        if let Some(r) = &self.rigidity {
            if r.radii.is_empty() || r.radii.iter().any(|v| !(*v > 0.0)) {
                return Err(err("rigidity", "radii must be positive".into()));
            }
        }
        Ok(())
    }
}
