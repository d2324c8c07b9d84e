use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GenConfig, Label, LabeledPair, NegativeVariant, PairSet, SimClass};
use crate::corpus::{AtomId, Corpus};
use crate::error::{ensure_same_corpus, Result};
use crate::lexsim::{rank, Candidate, SimIndex};
use crate::seed;

/// Anchors that received fewer negatives than their target, and how many
/// pairs were missing in total.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub anchors: usize,
    pub pairs: usize,
}

impl Shortfall {
    fn record(&mut self, target: usize, got: usize) {
        if got < target {
            self.anchors += 1;
            self.pairs += target - got;
        }
    }
}

/// Number of negatives an anchor with `k` positives should receive from a
/// sampler with the given multiplier. `k = 0` yields one pair when
/// `one_if_no_positives` is set and the multiplier is non-zero.
pub fn target_count(k: usize, multiplier: usize, one_if_no_positives: bool) -> usize {
    if multiplier == 0 {
        0
    } else if k == 0 && one_if_no_positives {
        1
    } else {
        multiplier * k
    }
}

/// Jointly sampled negatives for a whole corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativeSets {
    pub sets: BTreeMap<NegativeVariant, PairSet>,
    pub shortfalls: BTreeMap<NegativeVariant, Shortfall>,
}

impl NegativeSets {
    pub fn get(&self, variant: NegativeVariant) -> &PairSet {
        &self.sets[&variant]
    }
}

#[derive(Clone, Copy)]
struct Want {
    topn: bool,
    ran_sim: bool,
    ran_nosim: bool,
    /// RAN_SIM skips atoms already taken by TOPN_SIM for the same anchor.
    exclusive: bool,
}

#[derive(Default)]
struct AnchorSample {
    topn: Vec<Candidate>,
    ran_sim: Vec<Candidate>,
    ran_nosim: Vec<Candidate>,
    targets: [usize; 3],
}

fn sample_anchor(
    corpus: &Corpus,
    index: &SimIndex,
    anchor: AtomId,
    config: &GenConfig,
    want: Want,
) -> AnchorSample {
    let k = corpus.concept_size(anchor) - 1;
    let aui = corpus.aui(anchor).as_bytes();
    let overlapping = index.overlapping(anchor);
    let sim_pool: Vec<Candidate> = overlapping
        .iter()
        .copied()
        .filter(|c| !corpus.same_concept(anchor, c.atom))
        .collect();
    let mut out = AnchorSample::default();

    if want.topn {
        let target = target_count(k, config.topn_multiplier, true);
        let mut ranked = sim_pool.clone();
        rank(&mut ranked);
        ranked.truncate(target);
        ranked.sort_unstable_by_key(|c| c.atom);
        out.topn = ranked;
        out.targets[0] = target;
    }

    if want.ran_sim {
        let target = target_count(k, config.ransim_multiplier, true);
        let pool: Vec<Candidate> = if want.exclusive && want.topn {
            sim_pool
                .iter()
                .copied()
                .filter(|c| out.topn.binary_search_by_key(&c.atom, |t| t.atom).is_err())
                .collect()
        } else {
            sim_pool.clone()
        };
        let mut rng = seed::rng_for(config.seed, &[b"ran_sim", aui]);
        let m = target.min(pool.len());
        let mut picks: Vec<Candidate> = index::sample(&mut rng, pool.len(), m)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        picks.sort_unstable_by_key(|c| c.atom);
        out.ran_sim = picks;
        out.targets[1] = target;
    }

    if want.ran_nosim {
        let target = target_count(k, config.rannosim_multiplier, false);
        let n = corpus.len();
        let pool_size = n - corpus.concept_size(anchor) - sim_pool.len();
        let m = target.min(pool_size);
        let excluded = |b: AtomId| {
            corpus.same_concept(anchor, b)
                || overlapping.binary_search_by_key(&b, |c| c.atom).is_ok()
        };
        let mut rng = seed::rng_for(config.seed, &[b"ran_nosim", aui]);
        let picks: Vec<AtomId> = if m == 0 {
            Vec::new()
        } else if pool_size * 2 >= n {
            // Dissimilar atoms dominate: rejection sampling avoids building
            // the pool.
            let mut chosen = BTreeSet::new();
            while chosen.len() < m {
                let b = AtomId(rng.gen_range(0..n as u32));
                if !excluded(b) {
                    chosen.insert(b);
                }
            }
            chosen.into_iter().collect()
        } else {
            let pool: Vec<AtomId> = corpus.atom_ids().filter(|&b| !excluded(b)).collect();
            debug_assert_eq!(pool.len(), pool_size);
            let mut picks: Vec<AtomId> = index::sample(&mut rng, pool.len(), m)
                .into_iter()
                .map(|i| pool[i])
                .collect();
            picks.sort_unstable();
            picks
        };
        out.ran_nosim = picks
            .into_iter()
            .map(|b| Candidate {
                atom: b,
                score: index.score(anchor, b),
            })
            .collect();
        out.targets[2] = target;
    }
    out
}

fn negative_pair(anchor: AtomId, c: &Candidate, simclass: SimClass) -> LabeledPair {
    LabeledPair {
        anchor,
        other: c.atom,
        label: Label::Neg,
        simclass,
        jacc: Some(c.score),
    }
}

fn run(
    corpus: &Corpus,
    index: &SimIndex,
    config: &GenConfig,
    want: Want,
) -> Result<Vec<(AtomId, AnchorSample)>> {
    config.validate()?;
    ensure_same_corpus(corpus.hash(), index.corpus_hash())?;
    Ok((0..corpus.len() as u32)
        .into_par_iter()
        .map(|i| {
            let a = AtomId(i);
            (a, sample_anchor(corpus, index, a, config, want))
        })
        .collect())
}

/// Samples TOPN_SIM, RAN_SIM and RAN_NOSIM together. RAN_SIM never repeats
/// an atom TOPN_SIM already took for the same anchor, so the three sets are
/// pairwise disjoint and `ALL` is their plain union.
pub fn sample_negatives(
    corpus: &Corpus,
    index: &SimIndex,
    config: &GenConfig,
) -> Result<NegativeSets> {
    let want = Want {
        topn: true,
        ran_sim: true,
        ran_nosim: true,
        exclusive: true,
    };
    let samples = run(corpus, index, config, want)?;
    let mut topn = Vec::new();
    let mut ran_sim = Vec::new();
    let mut ran_nosim = Vec::new();
    let mut shortfalls: BTreeMap<NegativeVariant, Shortfall> = NegativeVariant::COMPONENTS
        .into_iter()
        .map(|v| (v, Shortfall::default()))
        .collect();
    for (a, s) in &samples {
        topn.extend(s.topn.iter().map(|c| negative_pair(*a, c, SimClass::Sim)));
        ran_sim.extend(
            s.ran_sim
                .iter()
                .map(|c| negative_pair(*a, c, SimClass::Sim)),
        );
        ran_nosim.extend(
            s.ran_nosim
                .iter()
                .map(|c| negative_pair(*a, c, SimClass::NoSim)),
        );
        for (v, got, target) in [
            (NegativeVariant::TopnSim, s.topn.len(), s.targets[0]),
            (NegativeVariant::RanSim, s.ran_sim.len(), s.targets[1]),
            (NegativeVariant::RanNosim, s.ran_nosim.len(), s.targets[2]),
        ] {
            shortfalls.get_mut(&v).unwrap().record(target, got);
        }
    }
    let all: Vec<LabeledPair> = topn
        .iter()
        .chain(&ran_sim)
        .chain(&ran_nosim)
        .copied()
        .collect();
    let hash = corpus.hash();
    let sets = BTreeMap::from([
        (NegativeVariant::TopnSim, PairSet::new(hash, topn)),
        (NegativeVariant::RanSim, PairSet::new(hash, ran_sim)),
        (NegativeVariant::RanNosim, PairSet::new(hash, ran_nosim)),
        (NegativeVariant::All, PairSet::new(hash, all)),
    ]);
    Ok(NegativeSets { sets, shortfalls })
}

/// Negatives of a single variant. `ALL` runs the joint sampler; the other
/// variants are sampled on their own, so a stand-alone RAN_SIM draw may
/// overlap TOPN_SIM.
pub fn negatives(
    corpus: &Corpus,
    index: &SimIndex,
    variant: NegativeVariant,
    config: &GenConfig,
) -> Result<PairSet> {
    let want = match variant {
        NegativeVariant::All => {
            return Ok(sample_negatives(corpus, index, config)?
                .sets
                .remove(&NegativeVariant::All)
                .expect("joint sampler yields ALL"));
        }
        NegativeVariant::TopnSim => Want {
            topn: true,
            ran_sim: false,
            ran_nosim: false,
            exclusive: false,
        },
        NegativeVariant::RanSim => Want {
            topn: false,
            ran_sim: true,
            ran_nosim: false,
            exclusive: false,
        },
        NegativeVariant::RanNosim => Want {
            topn: false,
            ran_sim: false,
            ran_nosim: true,
            exclusive: false,
        },
    };
    let samples = run(corpus, index, config, want)?;
    let mut pairs = Vec::new();
    for (a, s) in &samples {
        pairs.extend(s.topn.iter().map(|c| negative_pair(*a, c, SimClass::Sim)));
        pairs.extend(
            s.ran_sim
                .iter()
                .map(|c| negative_pair(*a, c, SimClass::Sim)),
        );
        pairs.extend(
            s.ran_nosim
                .iter()
                .map(|c| negative_pair(*a, c, SimClass::NoSim)),
        );
    }
    Ok(PairSet::new(corpus.hash(), pairs))
}
