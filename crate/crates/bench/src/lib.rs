//! Shared fixtures for the criterion benchmarks in `benches/`.

use uva_core::corpus::synth_corpus;
use uva_core::{Corpus, SynthParams};

/// Synthetic corpus with `n_cuis` concepts (about 3.4 atoms each) and a
/// token pool scaled so postings stay short.
pub fn corpus(n_cuis: usize) -> Corpus {
    let params = SynthParams {
        n_cuis,
        token_pool: (n_cuis * 2 / 5).max(600),
        ..SynthParams::default()
    };
    synth_corpus(&params, 1).expect("benchmark corpus")
}
