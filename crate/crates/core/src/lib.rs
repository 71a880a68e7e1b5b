//! Linear discourse segmentation toolkit.
//!
//! The crate is organised around a single conversational data model
//! ([`corpus::Document`] and [`corpus::Segmentation`]) shared by every
//! segmenter, metric and annotation routine:
//!
//! * [`corpus`]: documents, segmentations, boundary vectors, JSONL I/O,
//!   ingestion of raw transcripts, descriptive statistics and stratified splits.
//! * [`classical`]: TextTiling and C99 over pluggable text normalisation.
//! * [`embedding`]: TextTiling scaffolding over embedding similarity.
//! * [`llm`]: prompt rendering, chat-completion client, output validation,
//!   repair and SFT pair emission.
//! * [`corruption`]: segment-merging corruption for restoration training.
//! * [`metrics`]: boundary macro F1, Pk, WindowDiff, topic accuracy, reports
//!   and rank summaries.
//! * [`annotation`]: validation sheets, adjudication and agreement statistics.

pub mod annotation;
pub mod classical;
pub mod corpus;
pub mod corruption;
pub mod embedding;
pub mod http;
pub mod llm;
pub mod metrics;

pub use corpus::{BoundaryVector, Document, Segment, Segmentation, Utterance};
