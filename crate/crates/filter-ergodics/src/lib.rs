//! Exact nonlinear filtering and measure-valued lifts for bivariate Markov
//! chains on finite state spaces.
//!
//! A model is a row-stochastic kernel on a product space `E x F` together
//! with an invariant law; only the `F` coordinate is observed. The crate
//! computes the filter (the conditional law of the hidden coordinate given
//! the observations so far) exactly, the time-reversed kernel, mixing
//! coefficients, the product/rectangle structure a nondegenerate kernel
//! imposes on supports, and the one-step successor laws of the lifted
//! chains `(filter, observation)` and `(filter, hidden, observation)`.
//! Experiment drivers trace filter stability along sampled observation
//! records, conditional merging over smoothing windows, and empirical
//! invariant measures of the lifts with a moment-battery comparison; a model
//! zoo builds the structured families and the degenerate counterexamples
//! these diagnostics are designed to tell apart.
//!
//! Everything is seeded and deterministic: replicate seeds derive from a
//! master seed by a splitmix-style expansion, so results are independent of
//! execution order and thread count.

// Dense kernel arithmetic reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod filter;
pub mod io;
pub mod lift;
pub mod model;
pub mod rng;
pub mod zoo;

pub use error::{Error, Result};
