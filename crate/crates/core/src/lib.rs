//! Flexible satisfiability for finite relational structures.
//!
//! Frozen-in/frozen-out relation analysis, robust satisfiability, the reduction chain
//! monotone NAE3SAT -> amplified NAE -> split NAE3SAT -> triangulated graph -> monotone
//! 1-in-3 3SAT, and the finite semigroups attached to 1-in-3 instances.

pub mod error;
pub mod flex;
pub mod format;
pub mod hom;
pub mod nae;
pub mod pipeline;
pub mod reduction;
pub mod semigroup;
pub mod structure;

pub use error::{Error, Result};
pub use flex::{FrozenReport, PartialAssignment, RelationRef};
pub use hom::{csp_solve, enumerate_homs, is_core, Solver};
pub use nae::{AmplifiedInstance, Literal, Mode, NaeInstance, Split3Instance};
pub use reduction::{OneInThreeInstance, ReductionGraph, Role};
pub use semigroup::{FiniteGroupoid, FiniteSemigroup};
pub use structure::{builtin, Assignment, FiniteStructure, HomSet, Signature, Symbol, Tuple};
