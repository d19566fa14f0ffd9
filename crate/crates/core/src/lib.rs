//! Desk-scale tools for shadowing, orbit weaving and entropy counting.
//!
//! The crate works on two kinds of systems: subshifts of finite type over a
//! small alphabet, and continuous piecewise-linear maps of an interval. Shift
//! computations are exact combinatorics; interval computations use `f64`
//! except where shadowing needs exact rationals.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod interval;
pub mod measures;
pub mod rng;
pub mod shadowing;
pub mod systems;
pub mod variational;
pub mod weaving;

pub use error::{Error, Result};
pub use interval::Interval;
pub use systems::{ShiftSpace, State, System, Word};

/// Library version, echoed into output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
