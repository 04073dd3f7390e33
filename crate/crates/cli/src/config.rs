//! Experiment configuration: the JSON schema, parsing with JSON-pointer
//! errors, and conversion into library objects.

use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use whlab::gridfn::{Grid, SampledFunction, C64};
use whlab::operators::{bump_kernel, delta_kernel, gaussian_kernel, mollified_delta, WienerHopfOperator};
use whlab::spaces::{OrliczFunction, SpaceSpec, Weight};
use whlab::vector::{OperatorWeight, WeightEntry};

/// A configuration problem located by a JSON pointer.
#[derive(Debug, thiserror::Error)]
#[error("{pointer}: {message}")]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

impl SchemaError {
    pub fn at(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Free-form label copied into the report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub space: SpaceConfig,
    #[serde(default)]
    pub grid: GridConfig,
    /// Scalar operator; required by `symbol` and `inclusion`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorConfig>,
    pub experiment: Experiment,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    #[serde(default)]
    pub weight: WeightConfig,
    /// Lebesgue exponent; mutually exclusive with `orlicz`. Defaults to 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orlicz: Option<OrliczConfig>,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self {
            weight: WeightConfig::Constant,
            p: None,
            orlicz: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightConfig {
    #[default]
    Constant,
    /// `(1 + x)^alpha`
    Power { alpha: f64 },
    /// `e^{beta x}`
    Exponential { beta: f64 },
    /// `e^{beta min(x, cap)}`
    CappedExponential { beta: f64, cap: f64 },
    /// `e^{beta s(x)}` with the slope ±1 zigzag `s` on dyadic blocks.
    DyadicZigzag { beta: f64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum OrliczConfig {
    /// `A(y) = y^p`
    Power { p: f64 },
    /// `A(y) = e^y - 1`
    ExpMinusOne,
    /// `A(y) = y ln(1 + y)`
    YLogOnePlusY,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Length of the sampled half-line `[0, span]`.
    pub span: f64,
    pub step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { span: 20.0, step: 0.01 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    /// Normal density `N(centre, width²)`.
    Gaussian { centre: f64, width: f64 },
    /// Smooth bump of unit mass on `[centre - radius, centre + radius]`.
    Bump { centre: f64, radius: f64 },
    /// Bump of total width `width` at `at`.
    MollifiedDelta { at: f64, width: f64 },
    /// Discrete point mass at the node `at`.
    Delta { at: f64 },
    /// Translation `S_by`.
    Shift { by: f64 },
    Identity,
    /// Kernel samples from a CSV file with header `x,re,im`; relative paths
    /// are resolved against the config file.
    Samples { path: PathBuf },
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    /// Symbols on the strip, representation residuals, analyticity and the
    /// strip bound.
    Symbol(SymbolParams),
    /// Spectral certificates for the translation on a polar λ-lattice.
    Annulus(AnnulusParams),
    /// Cut-off function with prescribed spectral concentration.
    Cutoff(CutoffParams),
    /// Approximate eigenvectors of `T_φ` at `φ̂(α)` for `α` in the strip.
    Inclusion(InclusionParams),
    /// Operator-valued symbol of a vector operator on `L^p_W`.
    VectorSymbol(VectorSymbolParams),
    /// Weight diagnostics: admissibility, translation norms, spectral radii,
    /// Orlicz consistency.
    WeightsReport(WeightsReportParams),
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SymbolParams {
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_probes")]
    pub probes: usize,
    /// Frequency band exported to the tables.
    #[serde(default = "default_band")]
    pub band: f64,
    /// Run the corrupted-symbol and conjugated-table controls.
    #[serde(default)]
    pub controls: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AnnulusParams {
    /// Defaults to radii bracketing `[inner·0.8, outer·1.2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default = "default_angles")]
    pub angles: usize,
    /// Also certify the translation on `ℂ^dim`-valued functions.
    #[serde(default = "default_dim")]
    pub dim: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CutoffParams {
    pub epsilon: f64,
    pub eta0: f64,
    pub delta: f64,
    pub c0: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct InclusionParams {
    /// `[re, im]` pairs; defaults to a small lattice in the strip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<[f64; 2]>>,
    /// Window lengths of the quasi-eigenvector ladder.
    #[serde(default = "default_window_lengths")]
    pub lengths: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct VectorSymbolParams {
    #[serde(default = "default_dim3")]
    pub dim: usize,
    pub matrix: MatrixConfig,
    #[serde(default)]
    pub weight: MatrixWeightConfig,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_vector_probes")]
    pub probes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WeightsReportParams {
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<RadiusExpectation>,
    /// Exponents for the `y^p` Luxemburg versus `L^p` comparison.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orlicz_powers: Vec<f64>,
    #[serde(default = "default_functions")]
    pub functions: usize,
    /// Dimensions at which the vector translation radius is compared.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vector_dims: Vec<usize>,
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Symbol(_) => "symbol",
            Self::Annulus(_) => "annulus",
            Self::Cutoff(_) => "cutoff",
            Self::Inclusion(_) => "inclusion",
            Self::VectorSymbol(_) => "vector-symbol",
            Self::WeightsReport(_) => "weights-report",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RadiusExpectation {
    pub forward: f64,
    pub backward: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixConfig {
    /// Entries `c·N(m, s²)` with random `c`, `m ∈ [-1, 1]`, `s ∈ [0.3, 0.8]`.
    RandomKernel { seed: u64 },
    /// The top-level scalar operator kernel on every diagonal entry.
    DiagonalKernel,
    /// Componentwise translation.
    Shift { by: f64 },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixWeightConfig {
    /// `ω·Identity` with `ω` from `space.weight`.
    #[default]
    Scalar,
    /// The built-in 5×5 weight.
    FiveByFive,
    Diagonal(WeightEntries),
    /// Row-major `dim × dim` entries.
    Matrix(WeightEntries),
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WeightEntries {
    pub entries: Vec<WeightEntryConfig>,
}

/// `poly(x)·e^{rate·x}`, `poly` by ascending coefficients.
#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WeightEntryConfig {
    pub poly: Vec<f64>,
    #[serde(default)]
    pub rate: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub representation: f64,
    pub cross_level: f64,
    pub cauchy_riemann: f64,
    pub inside_residual: f64,
    pub separation: f64,
    pub inclusion: f64,
    pub scalarization: f64,
    pub closed_form: f64,
    pub orlicz: f64,
    pub radius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            representation: 1e-5,
            cross_level: 1e-6,
            cauchy_riemann: 1e-4,
            inside_residual: 5e-2,
            separation: 10.0,
            inclusion: 5e-2,
            scalarization: 1e-8,
            closed_form: 1e-6,
            orlicz: 1e-8,
            radius: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

fn default_levels() -> usize {
    5
}
fn default_probes() -> usize {
    5
}
fn default_vector_probes() -> usize {
    3
}
fn default_band() -> f64 {
    20.0
}
fn default_angles() -> usize {
    8
}
fn default_dim() -> usize {
    1
}
fn default_dim3() -> usize {
    3
}
fn default_functions() -> usize {
    50
}
fn default_window_lengths() -> Vec<f64> {
    vec![25.0, 50.0, 100.0, 200.0, 400.0]
}
fn default_offsets() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}

/// `a.b[2].c` style path as a JSON pointer.
fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    out
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        let message = e.inner().to_string();
        let root: Option<serde_json::Value> = serde_json::from_str(text).ok();
        let (pointer, message) = match &root {
            Some(root) => refine(root, pointer, message),
            None => (pointer, message),
        };
        SchemaError::at(if pointer.is_empty() { "/".to_string() } else { pointer }, message)
    })?;
    config.validate()?;
    Ok(config)
}

/// Tagged enums are buffered by serde, which hides the path below them.
/// Re-parse the offending object variant by variant to locate the field.
fn refine(root: &serde_json::Value, mut pointer: String, mut message: String) -> (String, String) {
    for _ in 0..4 {
        let Some(v) = root.pointer(&pointer) else { break };
        let Some(obj) = v.as_object() else { break };
        let tag_key = if pointer == "/space/weight" || pointer == "/space/orlicz" { "family" } else { "kind" };
        let Some(tag) = obj.get(tag_key) else {
            if message.starts_with("missing field") {
                pointer.push('/');
                pointer.push_str(tag_key);
            }
            break;
        };
        let Some(tag) = tag.as_str() else {
            pointer.push('/');
            pointer.push_str(tag_key);
            break;
        };
        if message.starts_with("unknown variant") {
            pointer.push('/');
            pointer.push_str(tag_key);
            break;
        }
        let mut rest = obj.clone();
        rest.remove(tag_key);
        let rest = serde_json::Value::Object(rest);
        let found = match (pointer.as_str(), tag) {
            ("/experiment", "symbol") => locate::<SymbolParams>(&rest),
            ("/experiment", "annulus") => locate::<AnnulusParams>(&rest),
            ("/experiment", "cutoff") => locate::<CutoffParams>(&rest),
            ("/experiment", "inclusion") => locate::<InclusionParams>(&rest),
            ("/experiment", "vector-symbol") => locate::<VectorSymbolParams>(&rest),
            ("/experiment", "weights-report") => locate::<WeightsReportParams>(&rest),
            ("/experiment/weight", "diagonal" | "matrix") => locate::<WeightEntries>(&rest),
            _ => locate_flat(&rest, &message),
        };
        match found {
            Some((sub, msg)) if !sub.is_empty() => {
                pointer.push_str(&sub);
                message = msg;
            }
            _ => break,
        }
    }
    (pointer, message)
}

fn locate<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Option<(String, String)> {
    let err = serde_path_to_error::deserialize::<_, T>(v.clone()).err()?;
    Some((pointer_of(err.path()), err.inner().to_string()))
}

/// For flat variants: the unknown field named in the message, or the first
/// field whose value is not a number.
fn locate_flat(v: &serde_json::Value, message: &str) -> Option<(String, String)> {
    if let Some(rest) = message.strip_prefix("unknown field `") {
        let name = rest.split('`').next()?;
        return Some((format!("/{name}"), message.to_string()));
    }
    let obj = v.as_object()?;
    let (k, _) = obj.iter().find(|(k, val)| k.as_str() != "path" && !val.is_number())?;
    Some((format!("/{k}"), message.to_string()))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, SchemaError> {
    let text = std::fs::read_to_string(path).map_err(|e| SchemaError::at("/", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn positive(pointer: &str, v: f64) -> Result<(), SchemaError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SchemaError::at(pointer, format!("must be a positive finite number, got {v}")))
    }
}

fn finite(pointer: &str, v: f64) -> Result<(), SchemaError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SchemaError::at(pointer, format!("must be finite, got {v}")))
    }
}

impl ExperimentConfig {
    /// Semantic checks beyond the schema shape.
    pub fn validate(&self) -> Result<(), SchemaError> {
        let t = &self.tolerances;
        for (name, v) in [
            ("representation", t.representation),
            ("cross_level", t.cross_level),
            ("cauchy_riemann", t.cauchy_riemann),
            ("inside_residual", t.inside_residual),
            ("separation", t.separation),
            ("inclusion", t.inclusion),
            ("scalarization", t.scalarization),
            ("closed_form", t.closed_form),
            ("orlicz", t.orlicz),
            ("radius", t.radius),
        ] {
            positive(&format!("/tolerances/{name}"), v)?;
        }
        positive("/grid/span", self.grid.span)?;
        positive("/grid/step", self.grid.step)?;
        if self.grid.span / self.grid.step > 5e6 {
            return Err(SchemaError::at("/grid", "more than 5e6 nodes"));
        }
        match &self.space.weight {
            WeightConfig::Constant => {}
            WeightConfig::Power { alpha } => finite("/space/weight/alpha", *alpha)?,
            WeightConfig::Exponential { beta } | WeightConfig::DyadicZigzag { beta } => finite("/space/weight/beta", *beta)?,
            WeightConfig::CappedExponential { beta, cap } => {
                finite("/space/weight/beta", *beta)?;
                positive("/space/weight/cap", *cap)?;
            }
        }
        if self.space.p.is_some() && self.space.orlicz.is_some() {
            return Err(SchemaError::at("/space/orlicz", "give either `p` or `orlicz`, not both"));
        }
        if let Some(p) = self.space.p {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(SchemaError::at("/space/p", format!("p = {p} must lie in [1, ∞)")));
            }
        }
        if let Some(o) = self.space.orlicz {
            o.to_function().validate().map_err(|e| SchemaError::at("/space/orlicz", e.to_string()))?;
        }
        if let Some(op) = &self.operator {
            match op {
                OperatorConfig::Gaussian { centre, width } => {
                    finite("/operator/centre", *centre)?;
                    positive("/operator/width", *width)?;
                }
                OperatorConfig::Bump { centre, radius } => {
                    finite("/operator/centre", *centre)?;
                    positive("/operator/radius", *radius)?;
                }
                OperatorConfig::MollifiedDelta { at, width } => {
                    finite("/operator/at", *at)?;
                    positive("/operator/width", *width)?;
                }
                OperatorConfig::Delta { at } => finite("/operator/at", *at)?,
                OperatorConfig::Shift { by } => finite("/operator/by", *by)?,
                OperatorConfig::Identity | OperatorConfig::Samples { .. } => {}
            }
        }
        let needs_operator = match &self.experiment {
            Experiment::Symbol(_) | Experiment::Inclusion(_) => true,
            Experiment::VectorSymbol(v) => matches!(v.matrix, MatrixConfig::DiagonalKernel),
            _ => false,
        };
        if needs_operator && self.operator.is_none() {
            return Err(SchemaError::at("/operator", format!("experiment `{}` needs an operator", self.experiment.kind())));
        }
        match &self.experiment {
            Experiment::Symbol(SymbolParams { levels, probes, band, .. }) => {
                if *levels == 0 {
                    return Err(SchemaError::at("/experiment/levels", "must be at least 1"));
                }
                if *probes == 0 {
                    return Err(SchemaError::at("/experiment/probes", "must be at least 1"));
                }
                positive("/experiment/band", *band)?;
            }
            Experiment::Annulus(AnnulusParams { radii, angles, dim }) => {
                if let Some(r) = radii {
                    if r.is_empty() {
                        return Err(SchemaError::at("/experiment/radii", "must not be empty"));
                    }
                    for (i, v) in r.iter().enumerate() {
                        if !(v.is_finite() && *v >= 0.0) {
                            return Err(SchemaError::at(format!("/experiment/radii/{i}"), format!("radius {v} must be finite and ≥ 0")));
                        }
                    }
                }
                if *angles == 0 {
                    return Err(SchemaError::at("/experiment/angles", "must be at least 1"));
                }
                if *dim == 0 {
                    return Err(SchemaError::at("/experiment/dim", "must be at least 1"));
                }
                if self.space.orlicz.is_some() {
                    return Err(SchemaError::at("/space/orlicz", "annulus certificates need a weighted L^p space"));
                }
            }
            Experiment::Cutoff(CutoffParams { epsilon, eta0, delta, c0 }) => {
                positive("/experiment/epsilon", *epsilon)?;
                if *epsilon >= 1.0 {
                    return Err(SchemaError::at("/experiment/epsilon", "must be below 1"));
                }
                finite("/experiment/eta0", *eta0)?;
                positive("/experiment/delta", *delta)?;
                positive("/experiment/c0", *c0)?;
            }
            Experiment::Inclusion(InclusionParams { alphas, lengths }) => {
                if let Some(a) = alphas {
                    for (i, z) in a.iter().enumerate() {
                        finite(&format!("/experiment/alphas/{i}/0"), z[0])?;
                        finite(&format!("/experiment/alphas/{i}/1"), z[1])?;
                    }
                }
                if lengths.is_empty() {
                    return Err(SchemaError::at("/experiment/lengths", "needs at least one window length"));
                }
                for (i, &l) in lengths.iter().enumerate() {
                    if !(l.is_finite() && l > 0.0) {
                        return Err(SchemaError::at(format!("/experiment/lengths/{i}"), "must be positive"));
                    }
                }
                if self.space.orlicz.is_some() {
                    return Err(SchemaError::at("/space/orlicz", "inclusion needs a weighted L^p space"));
                }
            }
            Experiment::VectorSymbol(VectorSymbolParams { dim, weight, levels, probes, matrix }) => {
                if *dim == 0 {
                    return Err(SchemaError::at("/experiment/dim", "must be at least 1"));
                }
                if *levels == 0 || *probes == 0 {
                    return Err(SchemaError::at(if *levels == 0 { "/experiment/levels" } else { "/experiment/probes" }, "must be at least 1"));
                }
                if let MatrixConfig::Shift { by } = matrix {
                    finite("/experiment/matrix/by", *by)?;
                }
                let expected = match weight {
                    MatrixWeightConfig::Scalar => *dim,
                    MatrixWeightConfig::FiveByFive => 5,
                    MatrixWeightConfig::Diagonal(WeightEntries { entries }) => entries.len(),
                    MatrixWeightConfig::Matrix(WeightEntries { entries }) => {
                        if entries.len() != dim * dim {
                            return Err(SchemaError::at("/experiment/weight/entries", format!("expected {} entries for a {dim}×{dim} weight", dim * dim)));
                        }
                        *dim
                    }
                };
                if expected != *dim {
                    return Err(SchemaError::at("/experiment/weight", format!("weight dimension {expected} differs from dim = {dim}")));
                }
                if self.space.orlicz.is_some() {
                    return Err(SchemaError::at("/space/orlicz", "vector symbols need a weighted L^p space"));
                }
            }
            Experiment::WeightsReport(WeightsReportParams {
                offsets,
                expect,
                orlicz_powers,
                functions,
                vector_dims,
            }) => {
                for (i, y) in offsets.iter().enumerate() {
                    positive(&format!("/experiment/offsets/{i}"), *y)?;
                }
                if let Some(e) = expect {
                    positive("/experiment/expect/forward", e.forward)?;
                    positive("/experiment/expect/backward", e.backward)?;
                    positive("/experiment/expect/tolerance", e.tolerance)?;
                }
                for (i, p) in orlicz_powers.iter().enumerate() {
                    if !(*p >= 1.0 && p.is_finite()) {
                        return Err(SchemaError::at(format!("/experiment/orlicz_powers/{i}"), format!("p = {p} must lie in [1, ∞)")));
                    }
                }
                if !orlicz_powers.is_empty() && *functions == 0 {
                    return Err(SchemaError::at("/experiment/functions", "must be at least 1"));
                }
                for (i, d) in vector_dims.iter().enumerate() {
                    if *d == 0 {
                        return Err(SchemaError::at(format!("/experiment/vector_dims/{i}"), "must be at least 1"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn weight(&self) -> Weight {
        self.space.weight.to_weight()
    }

    pub fn space_spec(&self) -> SpaceSpec {
        let weight = self.weight();
        match self.space.orlicz {
            Some(o) if weight.is_constant() => SpaceSpec::Orlicz { a: o.to_function() },
            Some(o) => SpaceSpec::WeightedOrlicz { a: o.to_function(), weight },
            None => SpaceSpec::Lp {
                p: self.space.p.unwrap_or(2.0),
                weight,
            },
        }
    }

    /// `p` of the Lebesgue scale, or 2 for Orlicz spaces (used for radii, which do not depend on it).
    pub fn p(&self) -> f64 {
        self.space.p.unwrap_or(2.0)
    }

    pub fn grid(&self) -> Result<Grid, SchemaError> {
        Grid::new(0.0, self.grid.step, (self.grid.span / self.grid.step).round() as usize + 1).map_err(|e| SchemaError::at("/grid", e.to_string()))
    }
}

impl WeightConfig {
    pub fn to_weight(&self) -> Weight {
        match *self {
            Self::Constant => Weight::constant(),
            Self::Power { alpha } => Weight::power(alpha),
            Self::Exponential { beta } => Weight::exponential(beta),
            Self::CappedExponential { beta, cap } => Weight::capped_exponential(beta, cap),
            Self::DyadicZigzag { beta } => Weight::dyadic_zigzag(beta),
        }
    }
}

impl OrliczConfig {
    pub fn to_function(self) -> OrliczFunction {
        match self {
            Self::Power { p } => OrliczFunction::Power { p },
            Self::ExpMinusOne => OrliczFunction::ExpMinusOne,
            Self::YLogOnePlusY => OrliczFunction::YLogOnePlusY,
        }
    }
}

impl WeightEntryConfig {
    fn to_entry(&self) -> WeightEntry {
        WeightEntry {
            poly: self.poly.clone(),
            rate: self.rate,
        }
    }
}

impl MatrixWeightConfig {
    pub fn to_weight(&self, dim: usize, scalar: Weight) -> whlab::Result<OperatorWeight> {
        match self {
            Self::Scalar => Ok(OperatorWeight::Scalar { dim, weight: scalar }),
            Self::FiveByFive => Ok(OperatorWeight::five_by_five()),
            Self::Diagonal(WeightEntries { entries }) => OperatorWeight::diagonal(entries.iter().map(|e| e.to_entry()).collect()),
            Self::Matrix(WeightEntries { entries }) => OperatorWeight::entries(dim, entries.iter().map(|e| e.to_entry()).collect()),
        }
    }
}

/// Reads kernel samples from CSV `x,re,im`; the nodes must be equally spaced.
pub fn read_kernel_csv(path: &Path) -> Result<SampledFunction, String> {
    #[derive(Deserialize)]
    struct Row {
        x: f64,
        re: f64,
        im: f64,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "re", "im"] {
        return Err(format!("{}: header must be `x,re,im`", path.display()));
    }
    let rows = reader
        .deserialize::<Row>()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| format!("{} row {}: {e}", path.display(), i + 2)))
        .collect::<Result<Vec<_>, _>>()?;
    if rows.len() < 2 {
        return Err(format!("{}: need at least two samples", path.display()));
    }
    let h = rows[1].x - rows[0].x;
    if !(h > 0.0) {
        return Err(format!("{}: x must increase", path.display()));
    }
    for (i, w) in rows.windows(2).enumerate() {
        if ((w[1].x - w[0].x) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(format!("{} row {}: nodes are not equally spaced", path.display(), i + 3));
        }
    }
    let grid = Grid::new(rows[0].x, h, rows.len()).map_err(|e| e.to_string())?;
    SampledFunction::new(grid, rows.iter().map(|r| C64::new(r.re, r.im)).collect()).map_err(|e| e.to_string())
}

impl OperatorConfig {
    /// The operator on `space`, kernels sampled with step `h`.
    pub fn build(&self, h: f64, space: SpaceSpec, base: &Path) -> Result<WienerHopfOperator, SchemaError> {
        let wrap = |e: whlab::WhError| SchemaError::at("/operator", e.to_string());
        let phi = match self {
            Self::Shift { by } => return Ok(WienerHopfOperator::shift(*by, space)),
            Self::Identity => delta_kernel(0.0, h).map_err(wrap)?,
            Self::Gaussian { centre, width } => gaussian_kernel(snap(*centre, h), *width, h).map_err(wrap)?,
            Self::Bump { centre, radius } => bump_kernel(snap(*centre, h), *radius, h).map_err(wrap)?,
            Self::MollifiedDelta { at, width } => mollified_delta(snap(*at, h), *width, h).map_err(wrap)?,
            Self::Delta { at } => delta_kernel(*at, h).map_err(wrap)?,
            Self::Samples { path } => {
                let full = if path.is_relative() { base.join(path) } else { path.clone() };
                let phi = read_kernel_csv(&full).map_err(|e| SchemaError::at("/operator/path", e))?;
                if (phi.grid().step() - h).abs() > 1e-9 * h {
                    return Err(SchemaError::at("/operator/path", format!("sample step {} differs from grid step {h}", phi.grid().step())));
                }
                phi
            }
        };
        Ok(WienerHopfOperator::kernel(phi, space))
    }

    /// The kernel itself, when the operator has one.
    pub fn is_kernel(&self) -> bool {
        !matches!(self, Self::Shift { .. })
    }
}

/// Nearest grid node, so kernels stay aligned with the sampling grid.
fn snap(x: f64, h: f64) -> f64 {
    (x / h).round() * h
}

/// JSON Schema of the configuration file.
pub fn config_schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(ExperimentConfig)).expect("schema serialises")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(r#"{"experiment": {"kind": "cutoff", "epsilon": 0.1, "eta0": 5, "delta": 1, "c0": 2}}"#).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.p(), 2.0);
        assert_eq!(c.tolerances.representation, 1e-5);
        assert!(c.weight().is_constant());
    }

    #[test]
    fn unknown_family_points_at_the_tag() {
        let e = parse_config(r#"{"space": {"weight": {"family": "zigzag"}}, "experiment": {"kind": "annulus"}}"#).unwrap_err();
        assert_eq!(e.pointer, "/space/weight/family", "{e}");
        assert!(e.message.contains("zigzag"));
    }

    #[test]
    fn nested_field_errors_are_located() {
        let e = parse_config(r#"{"experiment": {"kind": "annulus", "radii": [1, "x"]}}"#).unwrap_err();
        assert_eq!(e.pointer, "/experiment/radii/1");
        let e = parse_config(r#"{"experiment": {"kind": "cutoff", "epsilon": 0.1, "eta0": 5, "delta": 1, "c0": 2}, "tolerances": {"orlicz": -1}}"#).unwrap_err();
        assert_eq!(e.pointer, "/tolerances/orlicz");
        let e = parse_config(r#"{"experiment": {"kind": "symbol"}}"#).unwrap_err();
        assert_eq!(e.pointer, "/operator");
        let e = parse_config(r#"{"experiment": {"kind": "annulus"}, "colour": 1}"#).unwrap_err();
        assert!(e.message.contains("colour"));
    }

    #[test]
    fn schema_lists_experiments() {
        let s = config_schema().to_string();
        for kind in ["symbol", "annulus", "cutoff", "inclusion", "vector-symbol", "weights-report", "dyadic_zigzag"] {
            assert!(s.contains(kind), "{kind}");
        }
    }
}
