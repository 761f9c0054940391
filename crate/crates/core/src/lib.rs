//! Online click-through-rate prediction with an auxiliary context model.
//!
//! A context-only model predicts the click rate of a request from user and
//! placement features alone. Its prediction is bucketized into one
//! categorical feature that the main field-aware factorization machine
//! consumes, either in place of the raw context features (`Replace`) or
//! alongside them (`Add`).
//!
//! The crate covers the whole loop:
//!
//! - [`model`]: the FFM with online AdaGrad updates, plus [`flops`] cost counts
//! - [`context`]: projection, bucketizing and feature injection
//! - [`datagen`]: synthetic logs with planted effects, JSONL IO, hashing
//! - [`eval`]: log-loss, relative information gain, lifts, AUC
//! - [`sim`]: joint replay with progressive validation, request scoring,
//!   the variant experiment and its per-chunk lift series
//! - [`config`], [`report`]: run configuration and experiment output files
//! - [`cli`]: the `ctxctr` command line

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod context;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod flops;
pub mod model;
pub mod report;
pub mod schema;
pub mod sim;

pub use error::{Error, Result};
