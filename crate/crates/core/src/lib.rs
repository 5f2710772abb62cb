//! Potential theory on the Korányi ball of the Heisenberg group H_n.
//!
//! Kernels (fundamental solution, Green, Poisson, Neumann), their
//! Nyström discretizations and iterated families, and representation-formula
//! solvers for polyharmonic Neumann, Neumann–Dirichlet and Dirichlet–Neumann
//! problems with circular data.

pub mod error;
pub mod exprdsl;
pub mod hcalc;
pub mod hgroup;
pub mod jet;
pub mod kernels;
pub mod quad;
pub mod solver;
pub mod special;
pub mod sphharm;

pub use error::{Error, Result};
pub use hgroup::Point;
pub use jet::{Jet2, Scalar};
