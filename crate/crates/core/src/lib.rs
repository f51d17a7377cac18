//! Mapping centers of scientific excellence from bibliometric records.
//!
//! The crate loads a corpus of publications, journals, impact factors,
//! organizations and researchers ([`corpus`]), links author mentions to
//! researchers ([`identity`]), scores researchers and clusters
//! ([`scoring`]), selects top scientists and centers of excellence
//! ([`excellence`]) and summarizes the result ([`analytics`]).

pub mod analytics;
pub mod corpus;
pub mod excellence;
pub mod identity;
pub mod manifest;
pub mod par;
pub mod scoring;
pub mod synth;
mod text;

pub use corpus::{load_corpus, Corpus, CorpusError};
pub use excellence::{run_pipeline, run_pipeline_with, ExcellenceMap, PipelineConfig, PipelineError, UnitLevel};
pub use par::Execution;
pub use scoring::FssScope;
