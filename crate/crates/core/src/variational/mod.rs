//! Conditional variational principle on shifts of finite type.
//!
//! Pressure of a locally constant observable and its Legendre dual give
//! `H(α)`, the largest entropy with `∫φ = α`. The shrinking-ball search
//! gives lower bounds on the entropy available near a fixed measure.

mod lift;
mod pressure;
mod shrink;
mod spectrum;

pub use lift::MAX_LIFT_STATES;
pub use pressure::{pressure, pressure_curve, GibbsMeasure, PressureCurve, PRESSURE_TOLERANCE};
pub use spectrum::{attainable_range, constrained_sup, spectrum, SpectrumPoint, SpectrumResult};
pub use shrink::{max_entropy_measure, shrink_experiment, ShrinkReport, ShrinkRow, RESTARTS};
