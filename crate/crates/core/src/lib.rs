//! Desk-scale laboratory for reranker scaling laws.
//!
//! The crate covers the full measurement loop: a deterministic synthetic
//! retrieval benchmark ([`synth`]), BM25 first-stage retrieval ([`bm25`]),
//! capacity-parameterized rerankers trained under pointwise, pairwise, and
//! listwise objectives ([`ltr`]), ranking metrics over the first-stage
//! candidate sets ([`metrics`]), and saturating power-law fits with hold-out
//! forecasting ([`scaling`]).
//!
//! Everything is a pure function of configuration and seed: two runs with
//! identical inputs produce bit-identical outputs. File formats, the
//! experiment ledger, and the command-line surface live in the companion
//! `rankscale` crate; this crate is `no_std` + `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bm25;
pub mod error;
pub mod ledger;
pub mod ltr;
mod math;
pub mod metrics;
pub mod rng;
pub mod scaling;
pub mod synth;

pub use error::CoreError;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, CoreError>;
