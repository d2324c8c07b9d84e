//! Rule-based synonymy baseline.
//!
//! Two editorial rules decide whether two atoms are synonymous:
//!
//! - **SS** (source synonymy): both atoms carry the same SCUI in the same
//!   source vocabulary.
//! - **LS_SC** (lexical similarity, semantic compatibility): equal LUIs and at
//!   least one shared semantic group.
//!
//! `SS_LS_SC` fires when either rule fires, and `SS_LS_SC_TRANS` closes that
//! relation transitively: two atoms are synonymous when a chain of rule
//! firings connects them. The closure is computed with a disjoint-set forest
//! over edges generated from shared-(source, SCUI) and shared-(LUI, group)
//! buckets, never by pairwise comparison.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{AtomId, AtomRecord, Corpus};
use crate::error::{ensure_same_corpus, Error, Result};
use crate::unionfind::DisjointSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleMode {
    Ss,
    LsSc,
    SsLsSc,
    SsLsScTrans,
}

impl RuleMode {
    pub const ALL: [RuleMode; 4] = [
        RuleMode::Ss,
        RuleMode::LsSc,
        RuleMode::SsLsSc,
        RuleMode::SsLsScTrans,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleMode::Ss => "SS",
            RuleMode::LsSc => "LS_SC",
            RuleMode::SsLsSc => "SS_LS_SC",
            RuleMode::SsLsScTrans => "SS_LS_SC_TRANS",
        }
    }

    /// Command-line spelling: `ss`, `lssc`, `ss-lssc`, `ss-lssc-trans`.
    pub fn flag(self) -> &'static str {
        match self {
            RuleMode::Ss => "ss",
            RuleMode::LsSc => "lssc",
            RuleMode::SsLsSc => "ss-lssc",
            RuleMode::SsLsScTrans => "ss-lssc-trans",
        }
    }

    fn uses_ss(self) -> bool {
        self != RuleMode::LsSc
    }

    fn uses_lssc(self) -> bool {
        self != RuleMode::Ss
    }
}

impl fmt::Display for RuleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RuleMode::ALL
            .into_iter()
            .find(|m| m.flag() == s || m.as_str() == s)
            .ok_or_else(|| Error::Param(format!("unknown rule mode {s:?}")))
    }
}

/// SS rule. SCUIs are scoped to their source, so equal SCUI strings from
/// different sources do not fire.
pub fn predict_ss(t: &AtomRecord, t2: &AtomRecord) -> bool {
    match (&t.scui, &t2.scui) {
        (Some(a), Some(b)) => t.src == t2.src && a == b,
        _ => false,
    }
}

fn groups_overlap(a: &[String], b: &[String]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// LS_SC rule. Atoms without semantic groups never fire.
pub fn predict_lssc(t: &AtomRecord, t2: &AtomRecord) -> bool {
    t.lui == t2.lui && groups_overlap(&t.sg, &t2.sg)
}

pub fn predict_rules(t: &AtomRecord, t2: &AtomRecord, mode: RuleMode) -> bool {
    (mode.uses_ss() && predict_ss(t, t2)) || (mode.uses_lssc() && predict_lssc(t, t2))
}

/// Connected components of a mode's rule graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynonymyPartition {
    component_of: Vec<u32>,
    mode: RuleMode,
    corpus_hash: String,
}

impl SynonymyPartition {
    pub fn mode(&self) -> RuleMode {
        self.mode
    }

    pub fn corpus_hash(&self) -> &str {
        &self.corpus_hash
    }

    /// Component label: the smallest atom id in the component.
    pub fn component(&self, atom: AtomId) -> AtomId {
        AtomId(self.component_of[atom.index()])
    }

    pub fn same_component(&self, a: AtomId, b: AtomId) -> bool {
        self.component_of[a.index()] == self.component_of[b.index()]
    }

    pub fn n_components(&self) -> usize {
        self.component_of
            .iter()
            .enumerate()
            .filter(|(i, &c)| *i as u32 == c)
            .count()
    }
}

/// Unions every atom with the first atom of each bucket it belongs to.
fn union_buckets<'a>(set: &mut DisjointSet, mut keyed: Vec<((&'a str, &'a str), u32)>) {
    keyed.par_sort_unstable();
    for run in keyed.chunk_by(|a, b| a.0 == b.0) {
        for &(_, atom) in &run[1..] {
            set.union(run[0].1, atom);
        }
    }
}

/// Builds the closure of `mode`'s base relation.
///
/// Within one (LUI, group) bucket every pair fires LS_SC, and within one
/// (source, SCUI) bucket every pair fires SS, so joining each bucket as a
/// star gives the same components as adding all pairwise edges.
pub fn build_partition(corpus: &Corpus, mode: RuleMode) -> SynonymyPartition {
    let atoms = corpus.atoms();
    let mut set = DisjointSet::new(atoms.len());
    if mode.uses_ss() {
        let keyed: Vec<((&str, &str), u32)> = atoms
            .par_iter()
            .enumerate()
            .filter_map(|(i, a)| a.scui.as_deref().map(|s| ((a.src.as_str(), s), i as u32)))
            .collect();
        union_buckets(&mut set, keyed);
    }
    if mode.uses_lssc() {
        let keyed: Vec<((&str, &str), u32)> = atoms
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, a)| {
                a.sg.iter()
                    .map(move |g| ((a.lui.as_str(), g.as_str()), i as u32))
            })
            .collect();
        union_buckets(&mut set, keyed);
    }
    SynonymyPartition {
        component_of: set.canonical_labels(),
        mode,
        corpus_hash: corpus.hash().to_string(),
    }
}

/// Applies one rule mode to atom pairs. Transitive mode answers from a
/// prebuilt partition.
#[derive(Clone, Debug)]
pub struct RbaPredictor<'a> {
    corpus: &'a Corpus,
    mode: RuleMode,
    partition: Option<SynonymyPartition>,
}

impl<'a> RbaPredictor<'a> {
    pub fn new(corpus: &'a Corpus, mode: RuleMode) -> Self {
        let partition = (mode == RuleMode::SsLsScTrans).then(|| build_partition(corpus, mode));
        RbaPredictor {
            corpus,
            mode,
            partition,
        }
    }

    pub fn with_partition(corpus: &'a Corpus, partition: SynonymyPartition) -> Result<Self> {
        ensure_same_corpus(corpus.hash(), partition.corpus_hash())?;
        Ok(RbaPredictor {
            corpus,
            mode: partition.mode(),
            partition: Some(partition),
        })
    }

    pub fn mode(&self) -> RuleMode {
        self.mode
    }

    pub fn predict(&self, a: AtomId, b: AtomId) -> bool {
        predict(self.corpus, self.partition.as_ref(), a, b, self.mode)
            .expect("predictor holds a matching partition")
    }
}

/// Predicts synonymy of `(a, b)` under `mode`. Transitive mode requires a
/// partition built for that mode from the same corpus.
pub fn predict(
    corpus: &Corpus,
    partition: Option<&SynonymyPartition>,
    a: AtomId,
    b: AtomId,
    mode: RuleMode,
) -> Result<bool> {
    if a.index() >= corpus.len() || b.index() >= corpus.len() {
        return Err(Error::NotFound(format!(
            "atom {a} or {b} is outside the corpus"
        )));
    }
    if mode != RuleMode::SsLsScTrans {
        return Ok(predict_rules(corpus.atom(a), corpus.atom(b), mode));
    }
    let partition = partition
        .ok_or_else(|| Error::Param("transitive mode needs a synonymy partition".into()))?;
    ensure_same_corpus(corpus.hash(), partition.corpus_hash())?;
    if partition.mode() != RuleMode::SsLsScTrans {
        return Err(Error::Param(format!(
            "partition was built for {}, not {}",
            partition.mode(),
            mode
        )));
    }
    Ok(a == b || partition.same_component(a, b))
}
