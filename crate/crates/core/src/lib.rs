//! One-phase Whitham modulation theory of the Camassa-Holm equation.
//!
//! The genus-one spectral curve `μ² = (λ+ν)(λ−u¹)(λ−u²)(λ−u³)` carries the
//! Riemann invariants `u^i`. From it the crate computes wave number,
//! frequency and characteristic speeds by three independent routes, the
//! diagonal metrics of the modulation system together with their curvature,
//! the reciprocal map to the first negative flow of the KdV hierarchy, and
//! solutions of the modulation equations (`ν = 0`) by the hodograph method.
//!
//! Everything is generic over the floating type; [`f64`] aliases are
//! provided at the root.

pub mod ch_modulation;
pub mod curve;
pub mod error;
pub mod hodograph_solver;
pub mod kdv_modulation;
pub mod metric_geometry;
pub mod quadrature;
pub mod reciprocal;
pub mod scalar;
pub mod series;
pub mod special_functions;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ChCurve64 = curve::ChCurve<f64>;
pub type ChCurve32 = curve::ChCurve<f32>;
pub type KdvCurve64 = kdv_modulation::KdvCurve<f64>;
pub type KdvCurve32 = kdv_modulation::KdvCurve<f32>;
pub type ReciprocalPair64 = reciprocal::ReciprocalPair<f64>;
pub type Table1_64 = reciprocal::Table1<f64>;
pub type InitialData64 = hodograph_solver::InitialData<f64>;
pub type Hodograph64 = hodograph_solver::Hodograph<f64>;
pub type ModulationSolution64 = hodograph_solver::ModulationSolution<f64>;
