//! Documents written by the subcommands. Each one deserializes back into
//! the same value, and its embedded tensors parse with the library readers.

use cylfi::gaussian::LimitDiagnostics;
use cylfi::json::{ComplexPair, MomentFunctionalJson, TensorJson};
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;
use crate::suite::{Caps, Suite};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenOutput {
    pub manifest: RunManifest,
    pub order: usize,
    pub max_degree: usize,
    /// `F₀ … F_order`, all in the full model basis.
    pub green_functions: Vec<TensorJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub eps: f64,
    pub functional: MomentFunctionalJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitOutput {
    pub manifest: RunManifest,
    pub schedule: Vec<f64>,
    pub order: usize,
    pub samples: Vec<LimitSample>,
    /// Extrapolated to ε = 0, or the single sample on passthrough.
    pub functional: MomentFunctionalJson,
    pub diagnostics: Option<LimitDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub k: usize,
    pub term: ComplexPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenfunOutput {
    pub manifest: RunManifest,
    pub degree: usize,
    pub value: ComplexPair,
    /// `exp((i/2) B(φ, φ))`.
    pub closed_form: ComplexPair,
    pub deviation: f64,
    pub terms: Vec<SeriesTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub trials: u64,
    pub tolerance: f64,
    /// Largest residual, or the largest normalized score for the oracle suite.
    pub max_residual: f64,
    pub failures: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub suite: Suite,
    pub trial: u64,
    pub residual: Option<f64>,
    pub error: Option<String>,
    /// The generated instance; regenerate it with the same seed, suite and trial.
    pub instance: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub manifest: RunManifest,
    pub seed: u64,
    pub trials: u64,
    pub caps: Caps,
    pub sabotage: bool,
    pub suites: Vec<SuiteSummary>,
    /// At most [`crate::commands::MAX_REPORTED_FAILURES`] per suite.
    pub failures: Vec<Failure>,
    pub passed: bool,
}
