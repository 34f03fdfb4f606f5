//! Adaptive P1 finite elements for `-∇·(A∇u) = f` in two dimensions, driven by
//! a recovery-based a posteriori error estimator with a divergence residual.
//!
//! The numerical core is generic over the scalar type through [`Real`]; the
//! `*64` aliases below fix it to `f64`, which is what the adaptive driver and
//! the benchmark problems are tuned for.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod error;
pub mod estimate;
pub mod fem;
pub mod mesh;
pub mod problems;
pub mod recovery;
pub mod report;
pub mod scalar;

pub use error::{AfemError, Result};
pub use scalar::{Mat2, Point, Real};

pub type Mesh64 = mesh::Mesh<f64>;
pub type Mesh32 = mesh::Mesh<f32>;
pub type FEFunction64 = fem::FEFunction<f64>;
pub type FEFunction32 = fem::FEFunction<f32>;
pub type CoefficientField64 = fem::CoefficientField<f64>;
pub type RecoveredGradient64 = recovery::RecoveredGradient<f64>;
pub type Estimate64 = estimate::Estimate<f64>;
pub type ProblemSpec64 = problems::ProblemSpec<f64>;
