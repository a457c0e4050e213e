//! Exact permanents, permanental rank, maximal subspaces of bounded
//! permanental rank, and linear maps preserving permanental rank bounds.

pub mod density;
pub mod error;
pub mod field;
pub mod harness;
pub mod json;
mod kernel;
pub mod linalg;
pub mod matrix;
pub mod permanent;
pub mod preserver;
pub mod sampling;
pub mod subspace;
pub mod theta;

pub use error::{Error, Result};
pub use field::{FieldSpec, Scalar};
pub use matrix::{Matrix, Permutation};
pub use permanent::{per_fast, per_naive, prk, prk_decide_leq, PrkTable, PrkWitness};
