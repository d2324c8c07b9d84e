//! Lexical similarity: normalization, Jaccard scores and the inverted index.

mod index;
mod normalize;
mod persist;

pub(crate) use index::rank;
pub use index::{Candidate, IndexOptions, SimIndex};
pub use normalize::{normalize, TokenSet, STOPWORDS};
pub use persist::{read_index, write_index, INDEX_MAGIC};

use std::cmp::Ordering;
use std::fmt;

/// An exact Jaccard score kept as a ratio of set sizes.
///
/// Ordering compares the ratios exactly (cross-multiplication), so ranking
/// never depends on floating-point rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct JaccardScore {
    pub shared: u32,
    pub union: u32,
}

impl JaccardScore {
    pub const ZERO: JaccardScore = JaccardScore {
        shared: 0,
        union: 0,
    };

    pub fn new(shared: u32, union: u32) -> Self {
        debug_assert!(shared <= union);
        Self { shared, union }
    }

    pub fn value(self) -> f64 {
        if self.union == 0 {
            0.0
        } else {
            f64::from(self.shared) / f64::from(self.union)
        }
    }

    pub fn is_zero(self) -> bool {
        self.shared == 0
    }
}

impl Ord for JaccardScore {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = u64::from(self.shared) * u64::from(other.union.max(1));
        let rhs = u64::from(other.shared) * u64::from(self.union.max(1));
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for JaccardScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for JaccardScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.value())
    }
}

/// |a ∩ b| / |a ∪ b| over two sorted, deduplicated slices.
pub fn jaccard_sorted<T: Ord>(a: &[T], b: &[T]) -> JaccardScore {
    let (mut i, mut j, mut shared) = (0, 0, 0u32);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = (a.len() + b.len()) as u32 - shared;
    JaccardScore::new(shared, union)
}

/// Jaccard similarity of two token sets; 0 when both are empty.
pub fn jaccard(a: &TokenSet, b: &TokenSet) -> f64 {
    jaccard_sorted(a.tokens(), b.tokens()).value()
}
