//! Hamming-space index: a one-sided reduction to `S` blocks, one tensored
//! covering code shared by every block, and one bucket table per block.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::buckets::{BucketTable, Visited};
use super::plan::{HammingParams, ReductionKind};
use super::{Elapsed, QueryOutcome};
use crate::bitvec::BitVector;
use crate::dimred::{HammingReduction, PartitionReduction, XorReduction};
use crate::error::{check_dim, Error, Result};
use crate::hamming::{build_inner_code, build_tensored_code, greedy_inner_code, InnerMode, TensoredCode};
use crate::seed::{tags, Seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammingIndex {
    params: HammingParams,
    reduction: HammingReduction,
    code: TensoredCode,
    tables: Vec<BucketTable>,
    points: Vec<BitVector>,
    #[serde(skip)]
    build_seconds: Elapsed,
}

pub fn build_hamming_index(points: Vec<BitVector>, params: &HammingParams, seed: &Seed) -> Result<HammingIndex> {
    let start = Instant::now();
    let d = params.d;
    for p in &points {
        check_dim(d, p.len())?;
    }
    if points.len() > u32::MAX as usize {
        return Err(Error::param("more than 2^32 points"));
    }
    let l = &params.layout;
    let red_seed = seed.derive(tags::REDUCTION);
    let reduction = match params.reduction {
        ReductionKind::Xor => HammingReduction::Xor(XorReduction::with_block(
            d, params.r, params.c, l.eps, l.delta, l.block, &red_seed,
        )?),
        ReductionKind::Partition => HammingReduction::Partition(PartitionReduction::with_block(d, l.block, &red_seed)?),
    };
    if reduction.outputs() != l.outputs || reduction.block() != l.block {
        return Err(Error::param(format!(
            "reduction gives {} blocks of {}, plan expects {} of {}",
            reduction.outputs(),
            reduction.block(),
            l.outputs,
            l.block
        )));
    }
    let inner = match l.inner_mode {
        InnerMode::Sampled => build_inner_code(l.inner_dim, l.inner_pair_radius, l.inner_radius, &seed.derive(tags::INNER_CODE))?,
        InnerMode::Greedy => greedy_inner_code(l.inner_dim, l.inner_pair_radius, l.inner_radius)?,
    };
    let code = build_tensored_code(inner, l.block)?;
    let tables = (0..l.outputs)
        .into_par_iter()
        .map(|i| -> Result<BucketTable> {
            let mut entries = Vec::new();
            let mut ids = Vec::new();
            for (id, x) in points.iter().enumerate() {
                code.decode_into(&reduction.apply_block(i, x)?, &mut ids)?;
                entries.extend(ids.iter().map(|&f| (f, id as u32)));
            }
            Ok(BucketTable::from_entries(entries))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HammingIndex {
        params: params.clone(),
        reduction,
        code,
        tables,
        points,
        build_seconds: Elapsed(start.elapsed().as_secs_f64()),
    })
}

impl HammingIndex {
    pub fn params(&self) -> &HammingParams {
        &self.params
    }

    pub fn reduction(&self) -> &HammingReduction {
        &self.reduction
    }

    pub fn code(&self) -> &TensoredCode {
        &self.code
    }

    pub fn tables(&self) -> &[BucketTable] {
        &self.tables
    }

    pub fn points(&self) -> &[BitVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Wall-clock build time (not persisted).
    pub fn build_seconds(&self) -> f64 {
        self.build_seconds.0
    }

    /// Total bucket entries over all substructures.
    pub fn entries(&self) -> usize {
        self.tables.iter().map(|t| t.entries()).sum()
    }

    /// First stored point within `floor(cr)` of `q` in scan order.
    pub fn query(&self, q: &BitVector) -> Result<QueryOutcome> {
        self.scan(q, true)
    }

    /// Scans every colliding point; `answer` is the first that passes.
    pub fn query_all(&self, q: &BitVector) -> Result<QueryOutcome> {
        self.scan(q, false)
    }

    fn scan(&self, q: &BitVector, stop: bool) -> Result<QueryOutcome> {
        check_dim(self.params.d, q.len())?;
        let far = self.params.far_radius();
        let mut out = QueryOutcome::default();
        let mut visited = Visited::new(self.points.len());
        let mut ids = Vec::new();
        for (i, table) in self.tables.iter().enumerate() {
            self.code.decode_into(&self.reduction.apply_block(i, q)?, &mut ids)?;
            out.filters += ids.len();
            for &f in &ids {
                for &id in table.get(f) {
                    if !visited.insert(id) {
                        continue;
                    }
                    out.candidates += 1;
                    if out.answer.is_none() && self.points[id as usize].dist(q) <= far {
                        out.answer = Some(id as usize);
                        if stop {
                            return Ok(out);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
