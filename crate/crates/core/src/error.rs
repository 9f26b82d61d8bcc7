//! Error types shared across the crate.

use thiserror::Error;

/// Violations of a property model's domain (bad volume fraction, bad
/// efficiency, non-positive property values).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropertyError {
    #[error("{name} = {value} is outside its valid domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
    #[error("unknown coolant `{name}`; valid names are: {valid}")]
    UnknownCoolant { name: String, valid: String },
}

/// Failures while assembling the thermal network.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid cooling direction {0}; expected 1..=6")]
    Direction(u8),
    #[error("cooling direction {direction} needs two channel legs per layer, geometry has {legs}")]
    DirectionNeedsTwoLegs { direction: u8, legs: usize },
    #[error(transparent)]
    Property(#[from] PropertyError),
}

/// Failures during time integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("solution diverged at t = {time} s: node {node} ({kind}) became non-finite")]
    Divergence {
        time: f64,
        node: usize,
        kind: String,
    },
    #[error("phase-change iteration did not converge at t = {time} s after {iterations} iterations")]
    PhaseChangeStalled { time: f64, iterations: usize },
    #[error("linear solve did not converge at t = {time} s (relative residual {residual:e})")]
    LinearSolve { time: f64, residual: f64 },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

impl SolverError {
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            SolverError::Divergence { .. }
                | SolverError::PhaseChangeStalled { .. }
                | SolverError::LinearSolve { .. }
        )
    }
}

/// Scenario configuration errors. `path` names the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("unknown preset `{name}`; available presets: {available}")]
    UnknownPreset { name: String, available: String },
}

impl ConfigError {
    pub fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Input errors for KPI post-processing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("series length mismatch: {left} pressure samples vs {right} flow samples")]
    LengthMismatch { left: usize, right: usize },
    #[error("sweep grid is empty")]
    EmptyGrid,
}
