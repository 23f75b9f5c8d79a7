//! Explicit-value software model checking.
//!
//! Programs in a small C-like language are lowered to control-flow automata
//! and checked for reachability of `error()` calls. The analysis tracks
//! explicit integer values for a per-location set of variables and grows
//! that set lazily from infeasible error paths, using interpolation over
//! the explicit domain. No SMT solver is involved.

pub mod cegar;
pub mod cpa;
pub mod domain;
pub mod lang;
