//! P1 conforming finite elements: quadrature, assembly, Dirichlet data, CG and error norms.

mod assembly;
mod coefficient;
mod function;
mod norms;
mod quadrature;
mod solver;
mod sparse;

pub use assembly::{apply_dirichlet, assemble_system, local_stiffness, solve_dirichlet, ConstrainedSystem};
pub use coefficient::{CoefficientField, ScalarFn, VectorFn};
pub use function::FEFunction;
pub use norms::{energy_error, linear_field_error, ErrorIntegrator, FieldError, Singularity};
pub(crate) use quadrature::triangle_area;
pub use quadrature::QuadratureRule;
pub use solver::{cg, solve_cg, CgSolution, SolverSettings};
pub use sparse::SparseMatrix;
