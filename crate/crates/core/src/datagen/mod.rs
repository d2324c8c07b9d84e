//! Labeled pair generation.
//!
//! Positives pair every atom with the other atoms of its concept. Negatives
//! come in three similarity-controlled variants drawn per anchor atom, plus
//! their union:
//!
//! | variant     | per anchor with k = n(a) - 1 positives            |
//! |-------------|----------------------------------------------------|
//! | `TOPN_SIM`  | the 2k highest-Jaccard negatives (1 when k = 0)    |
//! | `RAN_SIM`   | 2k random negatives with Jaccard > 0 (1 when k = 0)|
//! | `RAN_NOSIM` | 2k random negatives with Jaccard = 0               |
//! | `ALL`       | union of the three, at most 6k for k > 0           |
//!
//! Every random draw uses a stream keyed by the global seed, the sampler name
//! and the anchor's AUI, so output does not depend on thread count or
//! iteration order.

mod conkg;
mod io;
mod negatives;
mod split;

pub use conkg::{export_conkg, write_triples, ConKgVariant, Relation, Triple};
pub use io::{
    bundle_file_name, header_hash, read_pair_file, render_pair_file, resolve_records,
    verify_bundle, write_bundle, write_pair_file, write_pairs_jsonl, FileEntry, Manifest, PairFile,
    PairRecord, PAIR_HEADER,
};
pub use negatives::{negatives, sample_negatives, target_count, NegativeSets, Shortfall};
pub use split::{generate_bundle, split, DatasetBundle};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AtomId, Corpus};
use crate::error::{Error, Result};
use crate::lexsim::JaccardScore;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Pos => "POS",
            Label::Neg => "NEG",
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Pos
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "POS" => Ok(Label::Pos),
            "NEG" => Ok(Label::Neg),
            _ => Err(Error::Param(format!("unknown label {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimClass {
    Sim,
    NoSim,
    NotApplicable,
}

impl SimClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SimClass::Sim => "SIM",
            SimClass::NoSim => "NOSIM",
            SimClass::NotApplicable => "NA",
        }
    }
}

impl FromStr for SimClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SIM" => Ok(SimClass::Sim),
            "NOSIM" => Ok(SimClass::NoSim),
            "NA" => Ok(SimClass::NotApplicable),
            _ => Err(Error::Param(format!("unknown similarity class {s:?}"))),
        }
    }
}

/// Ordered pair of atoms with its ground-truth label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledPair {
    pub anchor: AtomId,
    pub other: AtomId,
    pub label: Label,
    pub simclass: SimClass,
    pub jacc: Option<JaccardScore>,
}

impl LabeledPair {
    pub fn key(&self) -> (AtomId, AtomId) {
        (self.anchor, self.other)
    }
}

/// Pairs sorted by `(anchor, other)`, at most one per ordered pair, tagged
/// with the hash of the corpus they were drawn from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSet {
    corpus_hash: String,
    pairs: Vec<LabeledPair>,
}

impl PairSet {
    pub fn new(corpus_hash: impl Into<String>, mut pairs: Vec<LabeledPair>) -> Self {
        pairs.sort_unstable();
        pairs.dedup_by_key(|p| p.key());
        PairSet {
            corpus_hash: corpus_hash.into(),
            pairs,
        }
    }

    pub fn corpus_hash(&self) -> &str {
        &self.corpus_hash
    }

    pub fn pairs(&self) -> &[LabeledPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn into_pairs(self) -> Vec<LabeledPair> {
        self.pairs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NegativeVariant {
    #[serde(rename = "TOPN_SIM")]
    TopnSim,
    #[serde(rename = "RAN_SIM")]
    RanSim,
    #[serde(rename = "RAN_NOSIM")]
    RanNosim,
    #[serde(rename = "ALL")]
    All,
}

impl NegativeVariant {
    pub const ALL_VARIANTS: [NegativeVariant; 4] = [
        NegativeVariant::All,
        NegativeVariant::TopnSim,
        NegativeVariant::RanSim,
        NegativeVariant::RanNosim,
    ];

    /// The three sampled variants that `ALL` is the union of.
    pub const COMPONENTS: [NegativeVariant; 3] = [
        NegativeVariant::TopnSim,
        NegativeVariant::RanSim,
        NegativeVariant::RanNosim,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NegativeVariant::TopnSim => "TOPN_SIM",
            NegativeVariant::RanSim => "RAN_SIM",
            NegativeVariant::RanNosim => "RAN_NOSIM",
            NegativeVariant::All => "ALL",
        }
    }
}

impl fmt::Display for NegativeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NegativeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL_VARIANTS
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Param(format!("unknown negative variant {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DatasetKind {
    Train,
    Gen,
}

impl DatasetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Train => "TRAIN",
            DatasetKind::Gen => "GEN",
        }
    }
}

/// One of the eight bundle members, e.g. `TRAIN_ALL` or `GEN_RAN_NOSIM`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DatasetName {
    pub kind: DatasetKind,
    pub variant: NegativeVariant,
}

impl DatasetName {
    pub fn new(kind: DatasetKind, variant: NegativeVariant) -> Self {
        DatasetName { kind, variant }
    }

    pub fn all() -> impl Iterator<Item = DatasetName> {
        [DatasetKind::Train, DatasetKind::Gen]
            .into_iter()
            .flat_map(|kind| {
                NegativeVariant::ALL_VARIANTS
                    .into_iter()
                    .map(move |variant| DatasetName { kind, variant })
            })
    }

    pub fn gen(variant: NegativeVariant) -> Self {
        DatasetName::new(DatasetKind::Gen, variant)
    }

    pub fn train(variant: NegativeVariant) -> Self {
        DatasetName::new(DatasetKind::Train, variant)
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.kind.as_str(), self.variant.as_str())
    }
}

impl FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DatasetName::all()
            .find(|n| n.to_string() == s)
            .ok_or_else(|| Error::Param(format!("unknown dataset name {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Fraction of positives assigned to the learning (TRAIN) side.
    pub pos_split: f64,
    /// Fraction of each negative variant assigned to TRAIN.
    pub neg_split: f64,
    pub topn_multiplier: usize,
    pub ransim_multiplier: usize,
    pub rannosim_multiplier: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            pos_split: 0.80,
            neg_split: 0.50,
            topn_multiplier: 2,
            ransim_multiplier: 2,
            rannosim_multiplier: 2,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("pos_split", self.pos_split), ("neg_split", self.neg_split)] {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Param(format!("{name} must lie in (0, 1), got {r}")));
            }
        }
        Ok(())
    }
}

/// All ordered same-concept pairs: n(a) - 1 per anchor.
pub fn positives(corpus: &Corpus) -> PairSet {
    let mut pairs = Vec::new();
    for anchor in corpus.atom_ids() {
        for &other in corpus.siblings(anchor) {
            if other != anchor {
                pairs.push(LabeledPair {
                    anchor,
                    other,
                    label: Label::Pos,
                    simclass: SimClass::NotApplicable,
                    jacc: None,
                });
            }
        }
    }
    PairSet::new(corpus.hash(), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::testing::corpus_of;

    #[test]
    fn positive_counts_follow_concept_sizes() {
        let corpus = corpus_of(&[
            ("A1", "a", "C1"),
            ("A2", "b", "C1"),
            ("A3", "c", "C1"),
            ("A4", "d", "C2"),
            ("A5", "e", "C2"),
            ("A6", "f", "C3"),
        ]);
        let pos = positives(&corpus);
        assert_eq!(pos.len(), 3 * 2 + 2);
        let from_a1 = pos.pairs().iter().filter(|p| p.anchor == AtomId(0)).count();
        assert_eq!(from_a1, 2);
        assert!(pos
            .pairs()
            .iter()
            .all(|p| corpus.same_concept(p.anchor, p.other)));
    }

    #[test]
    fn singletons_have_no_positives() {
        let corpus = corpus_of(&[("A1", "a", "C1"), ("A2", "b", "C2")]);
        assert!(positives(&corpus).is_empty());
    }

    #[test]
    fn names_round_trip() {
        for name in DatasetName::all() {
            assert_eq!(name.to_string().parse::<DatasetName>().unwrap(), name);
        }
        assert_eq!(
            DatasetName::gen(NegativeVariant::RanNosim).to_string(),
            "GEN_RAN_NOSIM"
        );
        assert_eq!(
            "topn_sim".parse::<NegativeVariant>().unwrap(),
            NegativeVariant::TopnSim
        );
        assert!("BOGUS".parse::<NegativeVariant>().is_err());
    }

    #[test]
    fn config_ratios_are_checked() {
        assert!(GenConfig::default().validate().is_ok());
        let bad = GenConfig {
            pos_split: 1.0,
            ..GenConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
