//! Crate-wide error type.
//!
//! One enum for everything; callers that care about a specific failure mode
//! (notably [`Error::ZeroProbabilityEvidence`], which the EM driver treats as
//! a restart signal rather than a hard failure) match on the variant.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Structural problem in a model definition: unknown names, duplicate
    /// names, cycles, bad table lengths, out-of-range states, …
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A structural-equation table does not produce some child state at all.
    /// (Selector and intervened-constant equations are exempt.)
    #[error("equation for '{child}' never produces state {state} (non-surjective table)")]
    NonSurjective { child: String, state: usize },

    /// Exogenous state-space products exceed what enumeration allows.
    #[error("joint exogenous space has {states} states, above the cap of {cap}")]
    EnumerationCapExceeded { states: u64, cap: u64 },

    /// A fully specified model was required but some exogenous PMF is missing.
    #[error("exogenous variable '{0}' has no distribution (partial model)")]
    PartialModel(String),

    /// A PMF fails validation (wrong length, negative mass, or a total
    /// further than the normalization tolerance from 1).
    #[error("invalid distribution for '{name}': {reason}")]
    InvalidPmf { name: String, reason: String },

    /// Conditioning event has probability zero under the current parameters.
    /// During EM this is a restart signal, not a bug.
    #[error("conditioning event has zero probability")]
    ZeroProbabilityEvidence,

    /// Malformed counterfactual query (unknown variable, state out of range,
    /// cause not preceding effect, too many worlds, …).
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    /// Dataset problems: header/model mismatch, out-of-range state values,
    /// records that a supposedly selected dataset cannot contain.
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    /// An iterative numeric routine ran out of iterations or subdivisions.
    #[error("{what} failed to converge")]
    NonConvergence { what: &'static str },

    /// Argument outside the mathematical domain of a routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// Every EM restart attempt failed (persistent zero-probability evidence
    /// or no run converged) — the data are infeasible for this model.
    #[error("all {attempts} restart attempts failed: {reason}")]
    AllRestartsFailed { attempts: usize, reason: String },

    /// Benchmark generation could not produce an admissible case.
    #[error("benchmark generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: JSON error: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}:{line}: CSV error: {msg}")]
    Csv {
        path: String,
        line: u64,
        msg: String,
    },
}

impl Error {
    /// Process exit code for the CLI: 2 parse, 3 infeasible/incompatible,
    /// 4 numeric. Everything structural about inputs counts as parse.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidModel(_)
            | Error::NonSurjective { .. }
            | Error::InvalidPmf { .. }
            | Error::InvalidQuery(_)
            | Error::InvalidDataset(_)
            | Error::Io { .. }
            | Error::Json { .. }
            | Error::Csv { .. } => 2,
            Error::ZeroProbabilityEvidence
            | Error::AllRestartsFailed { .. }
            | Error::GenerationFailed { .. }
            | Error::PartialModel(_) => 3,
            Error::EnumerationCapExceeded { .. }
            | Error::NonConvergence { .. }
            | Error::Domain(_) => 4,
        }
    }
}
