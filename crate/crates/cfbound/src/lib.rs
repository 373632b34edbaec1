//! Partial-identification toolkit for discrete structural causal models
//! observed through a biased acquisition process.
//!
//! The crate covers the full pipeline: model representation and canonical
//! conservative construction ([`scm`]), exact inference including
//! counterfactual (multi-world) queries ([`inference`]), selection-aware
//! likelihoods ([`selection`]), the multi-restart expectation-maximization
//! procedure that turns restarts into bounds ([`emcc`]), credible-interval
//! machinery for deciding how many restarts are enough ([`credible`]), and a
//! synthetic benchmark generator plus evaluator ([`benchgen`]).
//!
//! With the default `parallel` feature, restart batches fan out over a rayon
//! pool; disabling it swaps in a sequential driver with identical results.

pub mod credible;
pub mod emcc;
pub mod error;
pub mod factor;
pub mod index;
pub mod inference;
pub mod io;
mod par;
pub mod quad;
pub mod scm;
pub mod selection;
pub mod special;

pub use error::{Error, Result};
