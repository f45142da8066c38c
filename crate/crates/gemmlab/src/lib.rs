//! gemmlab: a dense matrix-multiplication performance laboratory.
//!
//! The crate bundles four multiplication kernels (naive, prefetch, cache
//! tiled, thread parallel), a seeded Box-Muller generator for input data, a
//! benchmark harness with power-analysis-driven repetition counts, and a
//! reporter that aggregates trials into summary tables and a log-log
//! complexity fit.
//!
//! Kernels and data generation are generic over the scalar type through
//! [`scalar::Real`]; the benchmark pipeline runs on `f64`.

pub mod cli;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod matrix;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use kernels::KernelVariant;
pub use matrix::Matrix;
pub use rng::RandomStream;
pub use scalar::Real;

/// The element type the benchmark pipeline is pinned to.
pub type Elem = f64;
/// Matrix type used by the harness, verifier, and CLI.
pub type MatrixF64 = Matrix<f64>;
/// Single-precision counterpart, available to library users.
pub type MatrixF32 = Matrix<f32>;
