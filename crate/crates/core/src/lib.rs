//! Feasibility of basic semi-algebraic systems whose equalities are
//! invariant under permuting coordinates and whose inequalities form an
//! equivariant family.
//!
//! Such a system in `n` variables of degree `d` has a real solution iff it
//! has one with at most `2d - 1` distinct coordinates. The solver enumerates
//! the partitions of `n` into at most `2d - 1` blocks, identifies variables
//! inside each block, and decides each reduced system with a certified
//! interval branch-and-prune search.

pub mod feasibility;
pub mod io;
pub mod linalg;
pub mod partition;
pub mod poly;
pub mod reduction;
pub mod symmetry;
