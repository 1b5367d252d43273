//! Satisfiability checking for graded modal logic `Gr(K_R)` and its extension
//! with inverse and intersected relations.
//!
//! Four tableau engines share the [`formula`] frontend and the [`kripke`]
//! model checker:
//!
//! * [`engine::optimized`]: depth-first, counter-based procedure whose live
//!   memory is one root-to-leaf trace, even for binary-coded numbers.
//! * [`engine::inverse`]: the same trace discipline extended with
//!   predecessor-aware counters and reset-restart for inverse relations.
//! * [`engine::standard`]: the classic calculus with successor
//!   identification; sound and complete, used as a differential oracle.
//! * [`engine::incorrect`]: a calculus with a known soundness bug, kept as an
//!   executable exhibit.

pub mod csys;
pub mod engine;
pub mod formula;
pub mod gen;
pub mod kripke;
