//! Executable kernel for a call-by-value λμ-calculus with records and
//! polymorphic variants: an abstract machine, a partial decision
//! procedure for observational equivalence backed by a bounded
//! counterexample search, and a checker for a second-order type system
//! in which the value restriction is relaxed to "provably equivalent to
//! a value". A small ML-like surface language and a CLI sit on top.

pub mod checker;
pub mod equivalence;
pub mod machine;
pub mod types;
pub mod pretty;
pub mod report;
pub mod surface;
pub mod syntax;
