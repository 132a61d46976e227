use thiserror::Error;

/// Errors produced by the thermal model, the reward engine and the scenario runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node {node}: {reason}")]
    InvalidNode { node: usize, reason: String },

    #[error("edge #{index} ({i}, {j}): {reason}")]
    InvalidEdge {
        index: usize,
        i: usize,
        j: usize,
        reason: String,
    },

    #[error("network must contain exactly one environment node, found {0}")]
    EnvironmentCount(usize),

    #[error("node {node} has no thermal path to the environment node")]
    Disconnected { node: usize },

    #[error("sampling interval must be positive and finite, got {0}")]
    NonPositiveStep(f64),

    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("nodes {i} and {j} are not connected by an edge")]
    NotAnEdge { i: usize, j: usize },

    #[error("heat input is invalid at node {node}: {reason}")]
    InvalidInput { node: usize, reason: String },

    #[error("torque window has no samples")]
    EmptyWindow,

    #[error("rms torque for motor {motor} is negative ({value})")]
    NegativeRms { motor: usize, value: f64 },

    #[error("{field}: invalid range [{min}, {max}]")]
    InvalidRange {
        field: &'static str,
        min: f64,
        max: f64,
    },

    #[error("invalid parameter {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("gamma bound needs clip_max > t_max (clip_max = {clip_max}, t_max = {t_max})")]
    GammaBound { clip_max: f64, t_max: f64 },

    #[error("gamma_T = {gamma} exceeds the feasible bound {bound} for this network")]
    InfeasibleGamma { gamma: f64, bound: f64 },

    #[error("steady-state system is singular")]
    Singular,

    #[error("unsupported schema_version {found} (supported: {supported})")]
    UnsupportedSchema { found: u64, supported: u64 },

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
