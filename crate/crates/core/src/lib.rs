//! Retrieval-based correction of ASR hypotheses.
//!
//! The pipeline embeds candidate correction phrases and utterance audio into a
//! shared vector space, retrieves the nearest phrase for each utterance, scores
//! it against the original top hypothesis, and expands the n-best list when the
//! retrieved phrase is similar enough. A deterministic synthetic embedder stands
//! in for a real speech encoder so the whole system runs at desk scale.

pub mod corpus;
pub mod corrector;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod index;
pub mod pipeline;
pub mod synth;
pub mod util;
pub mod vecmath;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
