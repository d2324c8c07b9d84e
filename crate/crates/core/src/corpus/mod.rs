//! Atoms, concepts and source hierarchies.
//!
//! A [`Corpus`] is built once and then only read. Atoms are numbered densely
//! in ascending AUI order; every list of [`AtomId`]s it hands out is sorted,
//! which makes "sorted by id" and "sorted by AUI" the same thing.

mod io;
mod synth;

pub use io::{load_corpus, write_corpus, LoadOptions};
pub use synth::{synth_corpus, SynthParams};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lexsim::normalize;

/// Dense atom number within one corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// One occurrence of a term in a source vocabulary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomRecord {
    pub aui: String,
    pub term: String,
    pub src: String,
    pub scui: Option<String>,
    pub cui: String,
    /// Semantic groups, sorted and deduplicated.
    pub sg: Vec<String>,
    pub sui: String,
    pub lui: String,
}

/// Atom as read from a file or produced by the generator, before SUI/LUI
/// derivation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomInput {
    pub aui: String,
    pub term: String,
    pub src: String,
    pub scui: Option<String>,
    pub cui: String,
    pub sg: Vec<String>,
    pub sui: Option<String>,
    pub lui: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HierarchyEdge {
    pub child_scui: String,
    pub parent_scui: String,
}

/// SCUI, semantic groups and parent SCUIs of one atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomContext {
    pub scui: Option<String>,
    pub sg: Vec<String>,
    pub parents: Vec<String>,
}

#[derive(Clone, Debug, Default)]
struct ScuiInfo {
    members: Vec<AtomId>,
    groups: Vec<String>,
    parents: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    atoms: Vec<AtomRecord>,
    aui_ids: HashMap<String, AtomId>,
    cuis: Vec<String>,
    cui_ids: HashMap<String, u32>,
    atom_cui: Vec<u32>,
    by_cui: Vec<Vec<AtomId>>,
    scuis: BTreeMap<String, ScuiInfo>,
    edges: Vec<HierarchyEdge>,
    hash: String,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        // Everything else is derived from atoms and edges.
        self.atoms == other.atoms && self.edges == other.edges
    }
}

impl Eq for Corpus {}

fn check_field(aui: &str, name: &str, value: &str) -> Result<()> {
    if value.contains(['|', '\n', '\r']) {
        return Err(Error::Validation(format!(
            "atom {aui}: {name} contains a forbidden character ('|' or newline)"
        )));
    }
    Ok(())
}

/// Checks that `ids` relabels the partition induced by `keys` one-to-one.
fn check_relabeling(kind: &str, keys: &[String], ids: &[String], auis: &[String]) -> Result<()> {
    let mut by_key: HashMap<&str, (&str, &str)> = HashMap::new();
    let mut by_id: HashMap<&str, (&str, &str)> = HashMap::new();
    for ((key, id), aui) in keys.iter().zip(ids).zip(auis) {
        if let Some((seen_id, seen_aui)) = by_key.insert(key, (id, aui)) {
            if seen_id != id {
                return Err(Error::Validation(format!(
                    "atoms {seen_aui} and {aui} have equal {kind} keys but {kind}s {seen_id} and {id}"
                )));
            }
        }
        if let Some((seen_key, seen_aui)) = by_id.insert(id, (key, aui)) {
            if seen_key != key {
                return Err(Error::Validation(format!(
                    "atoms {seen_aui} and {aui} share {kind} {id} but their {kind} keys differ"
                )));
            }
        }
    }
    Ok(())
}

/// Dense ids `{prefix}0000001`, ... over the sorted distinct keys.
fn derive_ids(prefix: char, keys: &[String]) -> Vec<String> {
    let mut distinct: Vec<&str> = keys.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let rank: HashMap<&str, usize> = distinct.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    keys.iter()
        .map(|k| format!("{prefix}{:07}", rank[k.as_str()] + 1))
        .collect()
}

/// SUI/LUI columns must be filled for every atom or for none.
fn resolve_ids(
    kind: &str,
    prefix: char,
    given: Vec<Option<String>>,
    keys: &[String],
    auis: &[String],
) -> Result<Vec<String>> {
    let present = given.iter().filter(|g| g.is_some()).count();
    if present == 0 {
        return Ok(derive_ids(prefix, keys));
    }
    if present != given.len() {
        return Err(Error::Validation(format!(
            "{kind} column is filled for {present} of {} atoms; fill it for all or none",
            given.len()
        )));
    }
    let ids: Vec<String> = given.into_iter().map(Option::unwrap_or_default).collect();
    check_relabeling(kind, keys, &ids, auis)?;
    Ok(ids)
}

impl Corpus {
    /// Validates and indexes a set of atoms and hierarchy edges.
    ///
    /// Missing SUI/LUI columns are derived: SUIs number distinct raw strings,
    /// LUIs number distinct normalized strings. Supplied ids must agree with
    /// those partitions.
    pub fn build(inputs: Vec<AtomInput>, edges: Vec<HierarchyEdge>) -> Result<Corpus> {
        let mut inputs = inputs;
        inputs.sort_by(|a, b| a.aui.cmp(&b.aui));
        for w in inputs.windows(2) {
            if w[0].aui == w[1].aui {
                return Err(Error::Validation(format!("duplicate AUI {}", w[0].aui)));
            }
        }
        for a in &inputs {
            if a.aui.is_empty() {
                return Err(Error::Validation("atom with empty AUI".into()));
            }
            for (name, value) in [("STR", &a.term), ("SRC", &a.src), ("CUI", &a.cui)] {
                if value.is_empty() {
                    return Err(Error::Validation(format!("atom {}: empty {name}", a.aui)));
                }
            }
            check_field(&a.aui, "AUI", &a.aui)?;
            check_field(&a.aui, "STR", &a.term)?;
            check_field(&a.aui, "SRC", &a.src)?;
            check_field(&a.aui, "CUI", &a.cui)?;
            for opt in [&a.scui, &a.sui, &a.lui].into_iter().flatten() {
                check_field(&a.aui, "identifier", opt)?;
            }
            for g in &a.sg {
                check_field(&a.aui, "SG", g)?;
                if g.contains(';') {
                    return Err(Error::Validation(format!(
                        "atom {}: semantic group {g:?} contains ';'",
                        a.aui
                    )));
                }
            }
        }

        let auis: Vec<String> = inputs.iter().map(|a| a.aui.clone()).collect();
        let raw_keys: Vec<String> = inputs.iter().map(|a| a.term.clone()).collect();
        let norm_keys: Vec<String> = inputs.iter().map(|a| normalize(&a.term).key()).collect();
        let suis = resolve_ids(
            "SUI",
            'S',
            inputs.iter_mut().map(|a| a.sui.take()).collect(),
            &raw_keys,
            &auis,
        )?;
        let luis = resolve_ids(
            "LUI",
            'L',
            inputs.iter_mut().map(|a| a.lui.take()).collect(),
            &norm_keys,
            &auis,
        )?;

        let atoms: Vec<AtomRecord> = inputs
            .into_iter()
            .zip(suis.into_iter().zip(luis))
            .map(|(a, (sui, lui))| {
                let mut sg: Vec<String> = a.sg.into_iter().filter(|g| !g.is_empty()).collect();
                sg.sort_unstable();
                sg.dedup();
                AtomRecord {
                    aui: a.aui,
                    term: a.term,
                    src: a.src,
                    scui: a.scui.filter(|s| !s.is_empty()),
                    cui: a.cui,
                    sg,
                    sui,
                    lui,
                }
            })
            .collect();

        let aui_ids = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.aui.clone(), AtomId(i as u32)))
            .collect();

        let mut cuis: Vec<String> = atoms.iter().map(|a| a.cui.clone()).collect();
        cuis.sort_unstable();
        cuis.dedup();
        let cui_ids: HashMap<String, u32> = cuis
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i as u32))
            .collect();
        let atom_cui: Vec<u32> = atoms.iter().map(|a| cui_ids[&a.cui]).collect();
        let mut by_cui = vec![Vec::new(); cuis.len()];
        for (i, &c) in atom_cui.iter().enumerate() {
            by_cui[c as usize].push(AtomId(i as u32));
        }

        let mut scuis: BTreeMap<String, ScuiInfo> = BTreeMap::new();
        for (i, a) in atoms.iter().enumerate() {
            if let Some(s) = &a.scui {
                let info = scuis.entry(s.clone()).or_default();
                info.members.push(AtomId(i as u32));
                info.groups.extend(a.sg.iter().cloned());
            }
        }
        for info in scuis.values_mut() {
            info.groups.sort_unstable();
            info.groups.dedup();
        }

        let mut edges = edges;
        edges.sort_unstable();
        edges.dedup();
        for e in &edges {
            if e.child_scui == e.parent_scui {
                return Err(Error::Validation(format!(
                    "hierarchy self-loop on SCUI {}",
                    e.child_scui
                )));
            }
            for s in [&e.child_scui, &e.parent_scui] {
                if !scuis.contains_key(s) {
                    return Err(Error::Validation(format!(
                        "hierarchy edge {} -> {} references unknown SCUI {s}",
                        e.child_scui, e.parent_scui
                    )));
                }
            }
        }
        for e in &edges {
            if let Some(info) = scuis.get_mut(&e.child_scui) {
                // Edges are sorted by (child, parent), so parents arrive sorted.
                info.parents.push(e.parent_scui.clone());
            }
        }

        let hash = content_hash(&atoms, &edges);
        Ok(Corpus {
            atoms,
            aui_ids,
            cuis,
            cui_ids,
            atom_cui,
            by_cui,
            scuis,
            edges,
            hash,
        })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[AtomRecord] {
        &self.atoms
    }

    pub fn atom(&self, id: AtomId) -> &AtomRecord {
        &self.atoms[id.index()]
    }

    pub fn atom_id(&self, aui: &str) -> Result<AtomId> {
        self.aui_ids
            .get(aui)
            .copied()
            .ok_or_else(|| Error::NotFound(format!("AUI {aui}")))
    }

    pub fn atom_ids(&self) -> impl ExactSizeIterator<Item = AtomId> {
        (0..self.atoms.len() as u32).map(AtomId)
    }

    pub fn aui(&self, id: AtomId) -> &str {
        &self.atoms[id.index()].aui
    }

    /// SHA-256 over the canonical file rendering of atoms and edges.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn cuis(&self) -> &[String] {
        &self.cuis
    }

    pub fn cui_of(&self, id: AtomId) -> &str {
        &self.atoms[id.index()].cui
    }

    /// Dense concept number of an atom, for cheap equality tests.
    pub fn concept_index(&self, id: AtomId) -> u32 {
        self.atom_cui[id.index()]
    }

    pub fn same_concept(&self, a: AtomId, b: AtomId) -> bool {
        self.atom_cui[a.index()] == self.atom_cui[b.index()]
    }

    /// All atoms of a concept, ascending.
    pub fn concept_members(&self, cui: &str) -> Result<&[AtomId]> {
        self.cui_ids
            .get(cui)
            .map(|&c| self.by_cui[c as usize].as_slice())
            .ok_or_else(|| Error::NotFound(format!("CUI {cui}")))
    }

    /// Atoms sharing `id`'s concept, including `id` itself.
    pub fn siblings(&self, id: AtomId) -> &[AtomId] {
        &self.by_cui[self.atom_cui[id.index()] as usize]
    }

    /// n(a): number of atoms in the concept of `id`.
    pub fn concept_size(&self, id: AtomId) -> usize {
        self.siblings(id).len()
    }

    pub fn atom_context(&self, aui: &str) -> Result<AtomContext> {
        let atom = self.atom(self.atom_id(aui)?);
        let parents = atom
            .scui
            .as_ref()
            .map(|s| self.scui_parents(s).to_vec())
            .unwrap_or_default();
        Ok(AtomContext {
            scui: atom.scui.clone(),
            sg: atom.sg.clone(),
            parents,
        })
    }

    pub fn scuis(&self) -> impl Iterator<Item = &str> {
        self.scuis.keys().map(String::as_str)
    }

    pub fn has_scui(&self, scui: &str) -> bool {
        self.scuis.contains_key(scui)
    }

    /// Union of the semantic groups of the atoms carrying `scui`.
    pub fn scui_groups(&self, scui: &str) -> &[String] {
        self.scuis.get(scui).map_or(&[], |i| i.groups.as_slice())
    }

    pub fn scui_parents(&self, scui: &str) -> &[String] {
        self.scuis.get(scui).map_or(&[], |i| i.parents.as_slice())
    }

    pub fn scui_members(&self, scui: &str) -> &[AtomId] {
        self.scuis.get(scui).map_or(&[], |i| i.members.as_slice())
    }

    pub fn edges(&self) -> &[HierarchyEdge] {
        &self.edges
    }
}

fn content_hash(atoms: &[AtomRecord], edges: &[HierarchyEdge]) -> String {
    let mut hasher = Sha256::new();
    for a in atoms {
        hasher.update(io::atom_line(a).as_bytes());
        hasher.update(b"\n");
    }
    hasher.update(b"\x00edges\n");
    for e in edges {
        hasher.update(io::edge_line(e).as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    pub(crate) fn input(aui: &str, term: &str, cui: &str) -> AtomInput {
        AtomInput {
            aui: aui.into(),
            term: term.into(),
            src: "SRC".into(),
            cui: cui.into(),
            sg: vec!["G".into()],
            ..Default::default()
        }
    }

    /// Corpus from `(aui, term, cui)` triples, one source, one group, no SCUIs.
    pub(crate) fn corpus_of(rows: &[(&str, &str, &str)]) -> Corpus {
        let inputs = rows.iter().map(|(a, t, c)| input(a, t, c)).collect();
        Corpus::build(inputs, Vec::new()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn concept_index_and_members() {
        let corpus = corpus_of(&[
            ("A3", "gamma", "C1"),
            ("A1", "alpha", "C1"),
            ("A2", "beta", "C2"),
            ("A4", "delta", "C1"),
        ]);
        assert_eq!(corpus.concept_members("C1").unwrap().len(), 3);
        let members: Vec<&str> = corpus
            .concept_members("C1")
            .unwrap()
            .iter()
            .map(|&a| corpus.aui(a))
            .collect();
        assert_eq!(members, ["A1", "A3", "A4"]);
        assert_eq!(corpus.concept_members("C2").unwrap().len(), 1);
        assert!(matches!(
            corpus.concept_members("C9"),
            Err(Error::NotFound(_))
        ));
        for id in corpus.atom_ids() {
            assert!(corpus
                .concept_members(corpus.cui_of(id))
                .unwrap()
                .contains(&id));
        }
    }

    #[test]
    fn case_variants_share_lui_not_sui() {
        let corpus = corpus_of(&[("A1", "Aspirin", "C1"), ("A2", "aspirin", "C1")]);
        let (a, b) = (&corpus.atoms()[0], &corpus.atoms()[1]);
        assert_eq!(a.lui, b.lui);
        assert_ne!(a.sui, b.sui);
    }

    #[test]
    fn duplicate_aui_is_rejected() {
        let inputs = vec![input("A1", "x", "C1"), input("A1", "y", "C2")];
        assert!(matches!(
            Corpus::build(inputs, vec![]),
            Err(Error::Validation(m)) if m.contains("duplicate AUI A1")
        ));
    }

    #[test]
    fn context_and_hierarchy() {
        let mut a1 = input("A1", "kidney", "C1");
        a1.scui = Some("s1".into());
        a1.sg = vec!["ANAT".into()];
        let mut a2 = input("A2", "renal organ", "C1");
        a2.scui = Some("s1".into());
        a2.sg = vec!["DISO".into(), "ANAT".into()];
        let mut a3 = input("A3", "organ", "C2");
        a3.scui = Some("p1".into());
        let a4 = input("A4", "no scui here", "C3");
        let edges = vec![HierarchyEdge {
            child_scui: "s1".into(),
            parent_scui: "p1".into(),
        }];
        let corpus = Corpus::build(vec![a1, a2, a3, a4], edges).unwrap();

        let ctx = corpus.atom_context("A1").unwrap();
        assert_eq!(ctx.scui.as_deref(), Some("s1"));
        assert_eq!(ctx.sg, ["ANAT"]);
        assert_eq!(ctx.parents, ["p1"]);
        assert_eq!(corpus.scui_groups("s1"), ["ANAT", "DISO"]);

        let none = corpus.atom_context("A4").unwrap();
        assert_eq!(none.scui, None);
        assert_eq!(none.sg, ["G"]);
        assert!(none.parents.is_empty());
        assert!(matches!(corpus.atom_context("A9"), Err(Error::NotFound(_))));
    }

    #[test]
    fn bad_edges_are_rejected() {
        let mut a1 = input("A1", "x", "C1");
        a1.scui = Some("s1".into());
        let self_loop = vec![HierarchyEdge {
            child_scui: "s1".into(),
            parent_scui: "s1".into(),
        }];
        assert!(Corpus::build(vec![a1.clone()], self_loop).is_err());
        let unknown = vec![HierarchyEdge {
            child_scui: "s1".into(),
            parent_scui: "s9".into(),
        }];
        assert!(matches!(
            Corpus::build(vec![a1], unknown),
            Err(Error::Validation(m)) if m.contains("unknown SCUI s9")
        ));
    }

    #[test]
    fn supplied_ids_must_match_partitions() {
        let mut a = input("A1", "Aspirin", "C1");
        let mut b = input("A2", "aspirin", "C1");
        a.sui = Some("S1".into());
        b.sui = Some("S1".into());
        a.lui = Some("L1".into());
        b.lui = Some("L1".into());
        assert!(Corpus::build(vec![a.clone(), b.clone()], vec![]).is_err());
        b.sui = Some("S2".into());
        assert!(Corpus::build(vec![a.clone(), b.clone()], vec![]).is_ok());
        b.lui = None;
        assert!(Corpus::build(vec![a, b], vec![]).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let c1 = corpus_of(&[("A1", "alpha", "C1")]);
        let c2 = corpus_of(&[("A1", "alpha", "C1")]);
        let c3 = corpus_of(&[("A1", "alpha", "C2")]);
        assert_eq!(c1.hash(), c2.hash());
        assert_ne!(c1.hash(), c3.hash());
        assert_eq!(c1.hash().len(), 64);
    }
}
