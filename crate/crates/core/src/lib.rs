//! Word embeddings trained with skip-gram negative sampling over arbitrary
//! (word, context) pairs.
//!
//! Contexts are not limited to neighbouring words: any symbol can serve as
//! a context, which lets ontology concepts attached to a word act as
//! additional training signal. The crate covers the whole path from raw
//! notes to an evaluation score:
//!
//! - [`normalize`]: clinical note text to token streams.
//! - [`pairgen`]: vocabularies and (word, context) pair streams, with
//!   optional (word, concept) pairs from a [`pairgen::ConceptMap`].
//! - [`sgns`]: the trainer.
//! - [`vectors`]: text and binary embedding files.
//! - [`eval`]: Spearman correlation against phrase-similarity judgments.
//! - [`neighbors`]: nearest-neighbour inspection.
//! - [`pipeline`]: config-driven end-to-end runs.

pub mod embedding;
pub mod error;
pub mod eval;
mod fsutil;
pub mod neighbors;
pub mod normalize;
pub mod pairgen;
pub mod pipeline;
pub mod seed;
pub mod sgns;
pub mod vectors;
pub mod vocab;

pub use embedding::EmbeddingMatrix;
pub use error::{Error, ErrorKind, Result};
pub use fsutil::write_atomic;
pub use vocab::Vocabulary;
