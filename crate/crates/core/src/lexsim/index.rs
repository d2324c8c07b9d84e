use std::collections::HashMap;

use rayon::prelude::*;

use super::{jaccard_sorted, normalize, JaccardScore, TokenSet};
use crate::corpus::{AtomId, Corpus};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IndexOptions {
    /// Tokens whose document frequency exceeds this bound are dropped from
    /// every token set. This changes which pairs count as similar; it exists
    /// only for corpora where a few tokens are near-universal.
    pub df_cutoff: Option<usize>,
}

/// An atom sharing at least one token with a query atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub atom: AtomId,
    pub score: JaccardScore,
}

/// Inverted index from normalized tokens to the atoms containing them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimIndex {
    corpus_hash: String,
    options: IndexOptions,
    vocabulary: Vec<String>,
    postings: Vec<Vec<AtomId>>,
    token_sets: Vec<Vec<u32>>,
}

impl SimIndex {
    pub fn build(corpus: &Corpus) -> Self {
        Self::build_with(corpus, IndexOptions::default())
    }

    pub fn build_with(corpus: &Corpus, options: IndexOptions) -> Self {
        let sets: Vec<TokenSet> = corpus
            .atoms()
            .par_iter()
            .map(|atom| normalize(&atom.term))
            .collect();

        let mut df: HashMap<&str, usize> = HashMap::new();
        for set in &sets {
            for token in set.tokens() {
                *df.entry(token.as_str()).or_default() += 1;
            }
        }
        let keep = |token: &str| options.df_cutoff.is_none_or(|cut| df[token] <= cut);

        let mut vocabulary: Vec<&str> = df.keys().copied().filter(|t| keep(t)).collect();
        vocabulary.sort_unstable();
        let ids: HashMap<&str, u32> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (*t, i as u32))
            .collect();

        let mut postings = vec![Vec::new(); vocabulary.len()];
        let mut token_sets = Vec::with_capacity(sets.len());
        for (atom, set) in sets.iter().enumerate() {
            // Vocabulary and token sets are both sorted, so ids come out ascending.
            let row: Vec<u32> = set
                .tokens()
                .iter()
                .filter_map(|t| ids.get(t.as_str()).copied())
                .collect();
            for &t in &row {
                postings[t as usize].push(AtomId(atom as u32));
            }
            token_sets.push(row);
        }

        SimIndex {
            corpus_hash: corpus.hash().to_string(),
            options,
            vocabulary: vocabulary.into_iter().map(str::to_string).collect(),
            postings,
            token_sets,
        }
    }

    pub(crate) fn from_parts(
        corpus_hash: String,
        options: IndexOptions,
        vocabulary: Vec<String>,
        postings: Vec<Vec<AtomId>>,
        n_atoms: usize,
    ) -> Result<Self> {
        if !vocabulary.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Validation(
                "index vocabulary is not strictly sorted".into(),
            ));
        }
        let mut token_sets = vec![Vec::new(); n_atoms];
        for (t, list) in postings.iter().enumerate() {
            if !list.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Validation(format!(
                    "postings for token {:?} are not strictly sorted",
                    vocabulary[t]
                )));
            }
            for atom in list {
                let row = token_sets.get_mut(atom.index()).ok_or_else(|| {
                    Error::Validation(format!("posting references atom {} of {n_atoms}", atom.0))
                })?;
                row.push(t as u32);
            }
        }
        Ok(SimIndex {
            corpus_hash,
            options,
            vocabulary,
            postings,
            token_sets,
        })
    }

    pub fn corpus_hash(&self) -> &str {
        &self.corpus_hash
    }

    pub fn options(&self) -> IndexOptions {
        self.options
    }

    pub fn n_atoms(&self) -> usize {
        self.token_sets.len()
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub(crate) fn raw_postings(&self) -> &[Vec<AtomId>] {
        &self.postings
    }

    /// Atoms containing `token`, ascending.
    pub fn postings(&self, token: &str) -> Option<&[AtomId]> {
        self.vocabulary
            .binary_search_by(|t| t.as_str().cmp(token))
            .ok()
            .map(|i| self.postings[i].as_slice())
    }

    pub fn df(&self, token: &str) -> usize {
        self.postings(token).map_or(0, <[AtomId]>::len)
    }

    fn check(&self, atom: AtomId) -> Result<()> {
        if atom.index() < self.n_atoms() {
            Ok(())
        } else {
            Err(Error::NotFound(format!("atom #{} is not indexed", atom.0)))
        }
    }

    pub fn token_set(&self, atom: AtomId) -> Result<TokenSet> {
        self.check(atom)?;
        Ok(TokenSet::from_tokens(
            self.token_sets[atom.index()]
                .iter()
                .map(|&t| self.vocabulary[t as usize].clone()),
        ))
    }

    /// Exact Jaccard score between two indexed atoms.
    pub fn score(&self, a: AtomId, b: AtomId) -> JaccardScore {
        jaccard_sorted(&self.token_sets[a.index()], &self.token_sets[b.index()])
    }

    /// Every atom with a non-zero score against `atom` (excluding itself),
    /// ordered by ascending atom id.
    pub fn overlapping(&self, atom: AtomId) -> Vec<Candidate> {
        let row = &self.token_sets[atom.index()];
        let mut hits: Vec<AtomId> = row
            .iter()
            .flat_map(|&t| self.postings[t as usize].iter().copied())
            .filter(|&other| other != atom)
            .collect();
        hits.sort_unstable();

        let mut out = Vec::new();
        let mut i = 0;
        while i < hits.len() {
            let other = hits[i];
            let mut j = i + 1;
            while j < hits.len() && hits[j] == other {
                j += 1;
            }
            let shared = (j - i) as u32;
            let union = (row.len() + self.token_sets[other.index()].len()) as u32 - shared;
            out.push(Candidate {
                atom: other,
                score: JaccardScore::new(shared, union),
            });
            i = j;
        }
        out
    }

    /// Atoms with a non-zero score against `atom`, highest score first,
    /// ties broken by ascending atom id, truncated to `top_n` when given.
    pub fn candidates(&self, atom: AtomId, top_n: Option<usize>) -> Result<Vec<Candidate>> {
        self.check(atom)?;
        let mut out = self.overlapping(atom);
        rank(&mut out);
        if let Some(n) = top_n {
            out.truncate(n);
        }
        Ok(out)
    }
}

/// Sorts by descending score, then ascending atom id.
pub(crate) fn rank(candidates: &mut [Candidate]) {
    candidates.sort_unstable_by(|a, b| b.score.cmp(&a.score).then(a.atom.cmp(&b.atom)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::testing::corpus_of;

    #[test]
    fn single_atom_index() {
        let corpus = corpus_of(&[("A1", "lung cancer", "C1")]);
        let index = SimIndex::build(&corpus);
        assert_eq!(index.vocabulary(), ["cancer", "lung"]);
        assert_eq!(index.postings("lung"), Some(&[AtomId(0)][..]));
        assert!(index.candidates(AtomId(0), None).unwrap().is_empty());
    }

    #[test]
    fn shared_token_postings() {
        let corpus = corpus_of(&[
            ("A1", "lung cancer", "C1"),
            ("A2", "skin cancer", "C2"),
            ("A3", "cancers", "C3"),
            ("A4", "fracture", "C4"),
        ]);
        let index = SimIndex::build(&corpus);
        assert_eq!(
            index.postings("cancer").unwrap(),
            &[AtomId(0), AtomId(1), AtomId(2)]
        );
        assert_eq!(index.df("cancer"), 3);
        assert_eq!(index.df("missing"), 0);
    }

    #[test]
    fn one_sharer_scores_half() {
        let corpus = corpus_of(&[
            ("A1", "lung cancer", "C1"),
            ("A2", "cancer", "C2"),
            ("A3", "fracture", "C3"),
        ]);
        let index = SimIndex::build(&corpus);
        let got = index.candidates(AtomId(0), None).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].atom, AtomId(1));
        assert_eq!(got[0].score.value(), 0.5);
        assert!(index.candidates(AtomId(2), None).unwrap().is_empty());
        assert!(matches!(
            index.candidates(AtomId(9), None),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn top_n_breaks_ties_by_id() {
        // Anchor {x, y}; sharers: A2 {x,y}=1, A3 {x}=1/2, A4 {y}=1/2,
        // A5 {x,z}=1/3, A6 {y,w}=1/3.
        let corpus = corpus_of(&[
            ("A1", "xray yolk", "C1"),
            ("A2", "yolk xray", "C2"),
            ("A3", "xray", "C3"),
            ("A4", "yolk", "C4"),
            ("A5", "xray zinc", "C5"),
            ("A6", "yolk wart", "C6"),
        ]);
        let index = SimIndex::build(&corpus);
        let top: Vec<u32> = index
            .candidates(AtomId(0), Some(2))
            .unwrap()
            .iter()
            .map(|c| c.atom.0)
            .collect();
        assert_eq!(top, [1, 2]);
        let all: Vec<u32> = index
            .candidates(AtomId(0), None)
            .unwrap()
            .iter()
            .map(|c| c.atom.0)
            .collect();
        assert_eq!(all, [1, 2, 3, 4, 5]);
    }

    #[test]
    fn df_cutoff_drops_frequent_tokens() {
        let corpus = corpus_of(&[
            ("A1", "cancer lung", "C1"),
            ("A2", "cancer skin", "C2"),
            ("A3", "cancer bone", "C3"),
        ]);
        let index = SimIndex::build_with(&corpus, IndexOptions { df_cutoff: Some(2) });
        assert_eq!(index.df("cancer"), 0);
        assert!(index.candidates(AtomId(0), None).unwrap().is_empty());
    }
}
