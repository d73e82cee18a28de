//! Exact, asymptotic and Monte Carlo analysis of the naive exhaustive
//! maximum-independent-set search on G(n,p) random graphs.
//!
//! The crate is organised bottom-up: [`model`] holds parameters and the two
//! scalar kinds, [`graphs`] and [`search`] produce cost samples, [`exact`]
//! computes the moment sequences, [`asymptotics`] evaluates the limit
//! formulas and [`stats`] runs simulation campaigns on top of everything.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod graphs;
pub mod model;
pub mod rng;
pub mod search;
pub mod stats;

pub use error::{Error, Result};
pub use model::{required_precision, Mode, ModelParams, NumericContext, Scalar};

/// Version tag embedded in reports and cache files.
pub const ENGINE_VERSION: &str = concat!("mislab/", env!("CARGO_PKG_VERSION"), "+engine1");
