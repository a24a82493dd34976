//! Integrability analysis for two-dimensional sigma models described by a
//! graded Lie algebra and a pair of chiral operators `Σ±`.
//!
//! The pipeline is: build an algebra ([`algebra`]), attach operators
//! ([`sigma`]), decide integrability ([`integrability`]), construct the
//! exponential Lax connection ([`lax`]) and verify flatness ([`flatness`]).
//! [`catalog`] holds reference models, [`scanner`] classifies parameter
//! families and [`cli`] is the command-line front end.

pub mod algebra;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod flatness;
pub mod integrability;
pub mod lax;
pub mod linalg;
pub mod model;
pub mod numeric;
pub mod par;
pub mod rational;
pub mod scanner;
pub mod sigma;
