//! Experiment ledger persistence, TREC-format interchange, configuration,
//! and report generation for the reranker scaling-law laboratory.
//!
//! The algorithmic core lives in `rankscale-core`; this crate owns
//! everything that touches the filesystem and the command-line surface.

pub mod checkpoints;
pub mod config;
pub mod error;
pub mod ledger_io;
pub mod pipeline;
pub mod reference;
pub mod report;
pub mod trec;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Serialize a real at 9 significant digits, the ledger-wide convention.
pub fn format_sig9(value: f64) -> String {
    format!("{value:.8e}")
}
