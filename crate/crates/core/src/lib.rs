//! Succinct finite automata.
//!
//! This crate stores complete deterministic automata, acyclic automata, and
//! nondeterministic automata in near information-theoretic optimal space while
//! answering membership queries directly on the compressed form.  The three
//! representations share a small toolbox of succinct building blocks:
//!
//! * [`bits`]: plain bitvectors with rank/select, compressed sparse
//!   bitvectors with partial rank, and monotone integer sequences;
//! * [`bptree`]: ordered trees as balanced-parentheses strings with a
//!   block-summary tree for navigation;
//! * [`packedvec`]: fixed-base integer vectors packed in mixed radix.
//!
//! On top of those, [`automaton`] holds the plain pointer-based automata and
//! their generators, [`dyckcodec`] converts deterministic automata to and from
//! a boxed-diagram integer encoding, and [`sdfa`], [`sadfa`], [`snfa`] and
//! [`product`] provide the compressed automata themselves.  [`container`]
//! defines the on-disk format.

pub mod automaton;
pub mod bits;
pub mod bptree;
pub mod container;
pub mod dyckcodec;
mod error;
pub mod packedvec;
pub mod product;
pub mod sadfa;
pub mod sdfa;
pub mod snfa;

pub use error::{Error, Result};

/// State identifier, 1-based.  In failure-compressed contexts 0 is the
/// implicit failure state.
pub type State = u32;

/// Input letter, 1-based: letters range over `1..=sigma`.
pub type Letter = u32;
