use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WhError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("overflow at sample {index} (x = {x}): {context}")]
    Overflow {
        index: usize,
        x: f64,
        context: String,
    },

    #[error("invalid weight at x = {x}: {reason}")]
    InvalidWeight { x: f64, reason: String },

    #[error("translation {shift} is not a multiple of the grid step {step}")]
    Alignment { shift: f64, step: f64 },

    #[error("output support escapes the grid ({detail}); enlarge the grid and retry")]
    Support { detail: String },

    #[error("could not bracket the Luxemburg norm within t in [{t_min:e}, {t_max:e}]")]
    Bracket { t_min: f64, t_max: f64 },

    #[error("level a = {a} lies outside the strip [{a_min}, {a_max}]")]
    Strip { a: f64, a_min: f64, a_max: f64 },

    #[error("probe rejected: {0}")]
    Probe(String),

    #[error("mollifier deconvolution window is empty at scale n = {n}; increase n")]
    Scale { n: usize },

    #[error("window ladder did not converge: {trend}")]
    Windowing { trend: String },

    #[error("empty window [{start}, {end}]")]
    EmptyWindow { start: f64, end: f64 },

    #[error("grid too small: required span {required}, available {available}")]
    GridTooSmall { required: f64, available: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, WhError>;
