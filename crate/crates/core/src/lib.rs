//! Differentiable rule learning with semi-symbolic DNF layers.
//!
//! The pipeline: [`graphgen`] samples a hidden rule set and labelled graphs,
//! [`trainer`] fits a [`dnfmodel::DnfModel`] by gradient descent while
//! annealing the logic gate, [`postprocess`] prunes and thresholds the
//! weights to `{-6, 0, +6}`, and [`dnfmodel::extract_rules`] reads off rules
//! that [`rulelang`] can print, parse and ground.

pub mod dnfmodel;
pub mod error;
pub mod graphgen;
pub mod postprocess;
pub mod rulelang;
pub mod semisymbolic;
pub mod signature;
pub mod trainer;

pub use error::{Error, Result};
pub use signature::{GroundExample, PredicateSignature};
