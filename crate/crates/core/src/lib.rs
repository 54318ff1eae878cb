//! Fast finite element solver for the velocity form of a fractional
//! viscoelastic wave equation on the unit square.
//!
//! The relaxation kernel `β(t) = E_α(−(t/τ_σ)^α)` is compressed into a sum of
//! exponentials so the history integral can be advanced with one recursion
//! per exponential instead of a full convolution over all previous steps.
//! A direct-quadrature baseline that stores the whole velocity history is
//! provided alongside for comparison.
//!
//! Module map:
//!
//! * [`mlf`]: Mittag-Leffler evaluation and the relaxation kernel.
//! * [`soe`]: sum-of-exponentials construction and certification.
//! * [`mesh`]: structured triangular and square meshes of the unit square.
//! * [`fem`]: P1/Q1 vector finite elements, sparse assembly, PCG.
//! * [`problems`]: manufactured solutions and load assembly.
//! * [`stepper`]: the fast and direct backward Euler time integrators.

pub mod error;
pub mod fem;
pub mod mesh;
pub mod mlf;
pub mod problems;
pub mod quad;
pub mod soe;
pub mod stepper;

pub use error::{Error, Result};
pub use fem::{CsrMatrix, DofMap, Material};
pub use mesh::{Mesh, MeshKind};
pub use problems::{ManufacturedProblem, ProblemKind};
pub use soe::SoeApprox;
pub use stepper::{RunOptions, RunOutcome, Scheme};
