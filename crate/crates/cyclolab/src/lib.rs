//! Computations with mask polynomials of integer-weighted multisets in
//! cyclic groups: prescribed cyclotomic divisibility, fiber decompositions,
//! the fibered bound `FIB(S)` and the exact minimum `MIN(S)`, tiling and
//! (T1)/(T2) audits, and generators for a family of explicit constructions.

pub mod error;
pub mod zmod;
pub mod poly;
pub mod multiset;
pub mod cyclotomic;
pub mod structure;
pub(crate) mod solver;
pub mod bounds;
pub mod tiling;
pub mod symbolic;
pub mod constructions;

pub use error::{Error, Result};
pub use multiset::{CuboidSpec, Multiset, NonnegMultiset};
pub use zmod::{ArrayCoords, CyclicModulus, FiberSpec, GridSpec, LongFiberSpec};
