//! Vector-valued P1/Q1 finite elements on the structured meshes of [`crate::mesh`].
//!
//! Homogeneous Dirichlet conditions are imposed by elimination: only interior
//! vertices carry degrees of freedom, two per vertex (x and y components,
//! interleaved). All assembled matrices share one sparsity pattern, so
//! linear combinations such as `M/Δt + A` are formed entrywise.

mod assembly;
mod cg;
mod dofs;
mod element;
mod material;
mod sparse;

pub use assembly::{
    a_form_matrix, assemble_elastic, assemble_mass, assemble_vector, b_form_matrix, l2_error, ritz_project,
    RITZ_TOL,
};
pub use cg::{cg_solve, CgOutcome, JacobiPcg};
pub use dofs::DofMap;
pub use element::{cell_points, QuadPoint, RuleOrder};
pub use material::{symmetric_part, Lame, Material};
pub use sparse::CsrMatrix;
