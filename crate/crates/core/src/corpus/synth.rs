//! Seeded synthetic terminologies.
//!
//! Terms are built from pronounceable pseudo-words (consonant-vowel
//! syllables) so that the normalizer treats every generated word as already
//! singular and never as a stopword. Shared-pool words and concept-private
//! words start with disjoint syllables, so they can never collide.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AtomInput, Corpus, HierarchyEdge};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_cuis: usize,
    /// `cui_size_weights[i]` is the relative weight of concepts with `i + 1` atoms.
    pub cui_size_weights: Vec<f64>,
    pub vocab_sources: usize,
    pub sg_pool: Vec<String>,
    /// Number of words shared across concepts.
    pub token_pool: usize,
    pub tokens_per_term: usize,
    /// Probability that an additional atom of a concept is a lexical variant
    /// (same normalized string) of the concept's base term.
    pub variant_rate: f64,
    /// Probability that a term word is drawn from the shared pool rather than
    /// being private to its concept.
    pub share_rate: f64,
    /// Probability that an atom carries a source concept id.
    pub scui_rate: f64,
    /// Number of hierarchy levels per source; 1 means no edges.
    pub hierarchy_depth: usize,
}

impl Default for SynthParams {
    /// Roughly 5,000 atoms in 1,500 concepts of sizes 1 to 5.
    fn default() -> Self {
        SynthParams {
            n_cuis: 1500,
            cui_size_weights: vec![0.10, 0.20, 0.20, 0.25, 0.25],
            vocab_sources: 8,
            sg_pool: [
                "ACTI", "ANAT", "CHEM", "CONC", "DEVI", "DISO", "GENE", "GEOG", "LIVB", "OBJC",
                "OCCU", "ORGA", "PHEN", "PHYS", "PROC",
            ]
            .map(String::from)
            .to_vec(),
            token_pool: 600,
            tokens_per_term: 3,
            variant_rate: 0.35,
            share_rate: 0.5,
            scui_rate: 0.85,
            hierarchy_depth: 3,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Param(m));
        for (name, v) in [
            ("n_cuis", self.n_cuis),
            ("vocab_sources", self.vocab_sources),
            ("token_pool", self.token_pool),
            ("tokens_per_term", self.tokens_per_term),
            ("hierarchy_depth", self.hierarchy_depth),
        ] {
            if v == 0 {
                return fail(format!("{name} must be at least 1"));
            }
        }
        if self.tokens_per_term > self.token_pool {
            return fail(format!(
                "tokens_per_term ({}) exceeds token_pool ({})",
                self.tokens_per_term, self.token_pool
            ));
        }
        if self.sg_pool.is_empty() {
            return fail("sg_pool is empty".into());
        }
        if self
            .sg_pool
            .iter()
            .any(|g| g.is_empty() || g.contains(['|', ';', '\n']))
        {
            return fail("sg_pool entries must be non-empty and free of '|' and ';'".into());
        }
        if self.cui_size_weights.is_empty()
            || self
                .cui_size_weights
                .iter()
                .any(|w| !w.is_finite() || *w < 0.0)
            || self.cui_size_weights.iter().sum::<f64>() <= 0.0
        {
            return fail("cui_size_weights must be non-negative with a positive sum".into());
        }
        for (name, r) in [
            ("variant_rate", self.variant_rate),
            ("share_rate", self.share_rate),
            ("scui_rate", self.scui_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return fail(format!("{name} must lie in [0, 1], got {r}"));
            }
        }
        Ok(())
    }
}

const SHARED_ONSETS: [&str; 4] = ["b", "d", "f", "g"];
const PRIVATE_ONSETS: [&str; 10] = ["h", "j", "k", "l", "m", "n", "p", "r", "t", "v"];
const CONSONANTS: [&str; 14] = [
    "b", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "t", "v",
];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];

fn syllable(i: usize) -> String {
    format!(
        "{}{}",
        CONSONANTS[i / VOWELS.len()],
        VOWELS[i % VOWELS.len()]
    )
}

/// Injective map from `n` to a word of at least two syllables whose first
/// consonant comes from `onsets`.
fn word(n: usize, onsets: &[&str]) -> String {
    let per_onset = onsets.len() * VOWELS.len();
    let mut out = format!(
        "{}{}",
        onsets[(n % per_onset) / VOWELS.len()],
        VOWELS[n % VOWELS.len()]
    );
    let radix = CONSONANTS.len() * VOWELS.len();
    // Bijective base-`radix` numeral of n / per_onset, at least one digit.
    let mut rest = n / per_onset;
    loop {
        out.push_str(&syllable(rest % radix));
        if rest < radix {
            break;
        }
        rest = rest / radix - 1;
    }
    out
}

struct Concept {
    base: Vec<String>,
    groups: Vec<String>,
    sources: [usize; 2],
}

struct Generator<'a> {
    params: &'a SynthParams,
    rng: ChaCha8Rng,
    next_private: usize,
}

impl Generator<'_> {
    fn fresh_token(&mut self) -> String {
        if self.rng.gen_bool(self.params.share_rate) {
            word(
                self.rng.gen_range(0..self.params.token_pool),
                &SHARED_ONSETS,
            )
        } else {
            self.next_private += 1;
            word(self.next_private - 1, &PRIVATE_ONSETS)
        }
    }

    /// A token absent from `words`; falls back to a private word when the
    /// shared pool is exhausted.
    fn token_not_in(&mut self, words: &[String]) -> String {
        for _ in 0..64 {
            let t = self.fresh_token();
            if !words.contains(&t) {
                return t;
            }
        }
        self.next_private += 1;
        word(self.next_private - 1, &PRIVATE_ONSETS)
    }

    fn base_tokens(&mut self) -> Vec<String> {
        let mut tokens: Vec<String> = Vec::with_capacity(self.params.tokens_per_term);
        while tokens.len() < self.params.tokens_per_term {
            let t = self.fresh_token();
            if !tokens.contains(&t) {
                tokens.push(t);
            }
        }
        tokens
    }

    fn capitalize(w: &str) -> String {
        let mut c = w.chars();
        match c.next() {
            Some(f) => f.to_uppercase().chain(c).collect(),
            None => String::new(),
        }
    }

    /// Same token set, different surface form.
    fn lexical_variant(&mut self, base: &[String]) -> String {
        let mut words: Vec<String> = base.to_vec();
        if self.rng.gen_bool(0.5) {
            words.shuffle(&mut self.rng);
        }
        let last = words.len() - 1;
        match self.rng.gen_range(0..5) {
            0 => words[last].push('s'),
            1 => words[0].push_str("'s"),
            2 => words.iter_mut().for_each(|w| *w = w.to_uppercase()),
            3 if words.len() > 1 => words.insert(1, "of the".into()),
            _ => words[0] = Self::capitalize(&words[0]),
        }
        words.join(" ")
    }

    /// A synonym whose normalized form differs from the base term.
    fn synonym(&mut self, base: &[String]) -> String {
        let mut words: Vec<String> = base.to_vec();
        let slot = self.rng.gen_range(0..words.len());
        words[slot] = self.token_not_in(&words);
        if self.rng.gen_bool(0.3) {
            let t = self.fresh_token();
            if !words.contains(&t) {
                words.push(t);
            }
        }
        words.shuffle(&mut self.rng);
        let mut term = words.join(" ");
        if self.rng.gen_bool(0.3) {
            term = Self::capitalize(&term);
        }
        term
    }
}

/// Generates a terminology that is a pure function of `(params, seed)`.
pub fn synth_corpus(params: &SynthParams, seed: u64) -> Result<Corpus> {
    params.validate()?;
    let mut g = Generator {
        params,
        rng: seed::rng_for(seed, &[b"synth"]),
        next_private: 0,
    };
    let sizes = WeightedIndex::new(&params.cui_size_weights)
        .map_err(|e| Error::Param(format!("cui_size_weights: {e}")))?;

    let mut concepts = Vec::with_capacity(params.n_cuis);
    for _ in 0..params.n_cuis {
        let base = g.base_tokens();
        let n_groups = if params.sg_pool.len() > 1 && g.rng.gen_bool(0.3) {
            2
        } else {
            1
        };
        let mut groups: Vec<String> = params
            .sg_pool
            .choose_multiple(&mut g.rng, n_groups)
            .cloned()
            .collect();
        groups.sort_unstable();
        let sources = [
            g.rng.gen_range(0..params.vocab_sources),
            g.rng.gen_range(0..params.vocab_sources),
        ];
        concepts.push(Concept {
            base,
            groups,
            sources,
        });
    }

    let mut atoms = Vec::new();
    // (source, level) -> scuis, for wiring the hierarchy afterwards.
    let mut levels: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    let mut scui_level: Vec<(String, usize, usize)> = Vec::new();
    for (c, concept) in concepts.iter().enumerate() {
        let size = sizes.sample(&mut g.rng) + 1;
        let mut scui_by_source: BTreeMap<usize, String> = BTreeMap::new();
        for j in 0..size {
            let term = if j == 0 {
                concept.base.join(" ")
            } else if g.rng.gen_bool(params.variant_rate) {
                g.lexical_variant(&concept.base)
            } else {
                g.synonym(&concept.base)
            };
            let src = concept.sources[g.rng.gen_range(0..2)];
            let scui = if g.rng.gen_bool(params.scui_rate) {
                let next = scui_by_source.len();
                Some(
                    scui_by_source
                        .entry(src)
                        .or_insert_with(|| {
                            let id = format!("SC{src}-{c:07}{next}");
                            let level = g.rng.gen_range(0..params.hierarchy_depth);
                            levels.entry((src, level)).or_default().push(id.clone());
                            scui_level.push((id.clone(), src, level));
                            id
                        })
                        .clone(),
                )
            } else {
                None
            };
            atoms.push(AtomInput {
                aui: format!("A{:08}", atoms.len() + 1),
                term,
                src: format!("SRC{src}"),
                scui,
                cui: format!("C{:07}", c + 1),
                sg: concept.groups.clone(),
                sui: None,
                lui: None,
            });
        }
    }

    let mut edges = Vec::new();
    for (scui, src, level) in scui_level {
        if level == 0 {
            continue;
        }
        if let Some(parents) = levels.get(&(src, level - 1)) {
            let parent = parents
                .choose(&mut g.rng)
                .expect("level lists are non-empty");
            edges.push(HierarchyEdge {
                child_scui: scui,
                parent_scui: parent.clone(),
            });
        }
    }

    Corpus::build(atoms, edges)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::lexsim::{normalize, STOPWORDS};

    fn small() -> SynthParams {
        SynthParams {
            n_cuis: 200,
            ..SynthParams::default()
        }
    }

    #[test]
    fn words_are_distinct_and_normalization_stable() {
        let mut seen = HashSet::new();
        for n in 0..20_000 {
            for onsets in [&SHARED_ONSETS[..], &PRIVATE_ONSETS[..]] {
                let w = word(n, onsets);
                assert!(seen.insert(w.clone()), "collision on {w}");
                assert!(!STOPWORDS.contains(&w.as_str()));
                assert_eq!(normalize(&w).into_tokens(), std::slice::from_ref(&w));
                assert_eq!(
                    normalize(&format!("{w}s")).into_tokens(),
                    std::slice::from_ref(&w)
                );
            }
        }
    }

    #[test]
    fn single_atom_corpus() {
        let params = SynthParams {
            n_cuis: 1,
            cui_size_weights: vec![1.0],
            ..SynthParams::default()
        };
        let c = synth_corpus(&params, 3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.cuis().len(), 1);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = synth_corpus(&small(), 11).unwrap();
        let b = synth_corpus(&small(), 11).unwrap();
        let c = synth_corpus(&small(), 12).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn full_variant_rate_plants_shared_luis() {
        let params = SynthParams {
            variant_rate: 1.0,
            ..small()
        };
        let c = synth_corpus(&params, 5).unwrap();
        for cui in c.cuis() {
            let members = c.concept_members(cui).unwrap();
            if members.len() < 2 {
                continue;
            }
            let luis: HashSet<&str> = members.iter().map(|&a| c.atom(a).lui.as_str()).collect();
            assert!(luis.len() < members.len(), "{cui} has no repeated LUI");
        }
    }

    #[test]
    fn parents_stay_in_scui_space() {
        let c = synth_corpus(&small(), 2).unwrap();
        assert!(!c.edges().is_empty());
        for a in c.atoms() {
            let ctx = c.atom_context(&a.aui).unwrap();
            for p in &ctx.parents {
                assert!(c.has_scui(p));
            }
        }
    }

    #[test]
    fn infeasible_params_are_rejected() {
        let too_long = SynthParams {
            token_pool: 2,
            tokens_per_term: 3,
            ..small()
        };
        assert!(matches!(synth_corpus(&too_long, 1), Err(Error::Param(_))));
        let bad_rate = SynthParams {
            share_rate: 1.5,
            ..small()
        };
        assert!(matches!(synth_corpus(&bad_rate, 1), Err(Error::Param(_))));
    }
}
