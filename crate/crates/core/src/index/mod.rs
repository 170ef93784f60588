//! The filter framework: each point is stored in the bucket of every filter
//! its decode emits; a query decodes itself and scans the union of its
//! buckets, returning the first candidate that passes the far threshold.

pub mod buckets;
pub mod hamming;
pub mod persist;
pub mod plan;
pub mod similarity;

use serde::{Deserialize, Serialize};

pub use buckets::BucketTable;
pub use hamming::{build_hamming_index, HammingIndex};
pub use persist::{load, save, to_bytes, Header, ParamsBlock, MAGIC};
pub use plan::{
    hamming_theory, plan_hamming_params, plan_hamming_with, plan_similarity_params, HammingConfig, HammingLayout,
    HammingParams, HammingTheory, Mode, ReductionKind, SimMode, SimilarityParams,
};
pub use similarity::{
    build_similarity_index, build_similarity_index_with, group_by_weight, predicted_entries, weight_range, SimilarityGroup,
    SimilarityIndex,
};

/// Wall-clock build time; ignored by equality and never persisted.
#[derive(Clone, Copy, Debug, Default)]
pub struct Elapsed(pub f64);

impl PartialEq for Elapsed {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// Result of one query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryOutcome {
    pub answer: Option<usize>,
    /// Distinct points whose distance or similarity was computed.
    pub candidates: usize,
    /// Filters (bucket keys) decoded for the query.
    pub filters: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LsfIndex {
    Hamming(HammingIndex),
    Similarity(SimilarityIndex),
}

impl LsfIndex {
    pub fn kind(&self) -> &'static str {
        match self {
            LsfIndex::Hamming(_) => "hamming",
            LsfIndex::Similarity(_) => "sets",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LsfIndex::Hamming(i) => i.len(),
            LsfIndex::Similarity(i) => i.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> usize {
        match self {
            LsfIndex::Hamming(i) => i.entries(),
            LsfIndex::Similarity(i) => i.entries(),
        }
    }

    pub fn build_seconds(&self) -> f64 {
        match self {
            LsfIndex::Hamming(i) => i.build_seconds(),
            LsfIndex::Similarity(i) => i.build_seconds(),
        }
    }
}
