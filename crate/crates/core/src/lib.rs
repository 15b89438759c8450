//! Core library for reversal-bounded counter automata and their relatives.
//!
//! The crate models six machine/grammar formalisms (counter automata with and
//! without a pushdown stack, integer vector addition systems with and without
//! propositional guards, and context-free grammars with integer effects),
//! provides language-preserving conversions between them, and builds decision
//! procedures for unboundedness-style predicates and for the growth dichotomy
//! of the recognised languages on top of an exact integer-linear feasibility
//! core.
//!
//! The crate is `no_std`-compatible (it only needs `alloc`); all IO, file
//! formats and the command line front end live in the companion `rbca-cli`
//! crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod convert;
pub mod fixtures;
pub mod growth;
pub mod linear;
pub mod models;
pub mod normalize;
pub mod unbounded;
