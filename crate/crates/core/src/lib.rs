//! Restaurant-booking dialogue laboratory: synthetic Task-1 corpora, a
//! disfluency injector that mixes hesitations, restarts and self-corrections
//! into user turns, a from-scratch end-to-end memory network trained with
//! plain SGD, and a word-by-word incremental parser with backtrack repair.
//!
//! The crate is `no_std` + `alloc`: everything here is pure computation over
//! owned data. File and terminal IO live in the companion `babilab-cli`
//! crate, which also documents the on-disk formats.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod corpus;
pub mod disfluency;
pub mod eval;
pub mod generator;
pub mod memn2n;
pub mod parser;
pub mod rng;

pub use corpus::{ApiCall, Dialogue, Speaker, Turn};
pub use generator::SlotVocab;
