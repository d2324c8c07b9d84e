//! Dataset generation and baselines for synonymy prediction over
//! UMLS-style terminologies.
//!
//! The crate is organised as a pipeline:
//!
//! - [`corpus`]: the atom/concept data model, a pipe-delimited file format and
//!   a seeded synthetic terminology generator.
//! - [`lexsim`]: string normalization, Jaccard similarity over token sets and
//!   an exact inverted index for finding lexically similar atoms.
//! - [`datagen`]: positive pairs, the four negative variants, the
//!   learning/generalization split and context-graph triple export.
//! - [`rba`]: the rule-based baseline (source synonymy, lexical similarity
//!   with semantic compatibility, and the transitive closure).
//! - [`eval`]: confusion matrices, metrics and report rendering.
//!
//! All stages are deterministic: identical inputs and seed give byte-identical
//! outputs regardless of how many worker threads are used.

pub mod corpus;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod lexsim;
pub mod rba;
pub mod seed;
mod unionfind;

pub use corpus::{AtomId, AtomRecord, Corpus, HierarchyEdge, SynthParams};
pub use datagen::{
    DatasetBundle, DatasetKind, DatasetName, GenConfig, Label, LabeledPair, NegativeVariant,
    PairSet, SimClass,
};
pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, MetricsReport};
pub use lexsim::{JaccardScore, SimIndex, TokenSet};
pub use rba::{RuleMode, SynonymyPartition};
