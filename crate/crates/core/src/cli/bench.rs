//! Scaling benchmark on planted data.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gen::{planted_hamming, planted_sets};
use super::{build_index, describe, IndexArgs, ModeArg, ReductionArg};
use crate::error::{Error, Result};
use crate::formats::Dataset;
use crate::index::{HammingConfig, LsfIndex, Mode, QueryOutcome, ReductionKind};
use crate::seed::Seed;
use crate::setpoint::braun_blanquet;

#[derive(Clone, Debug, PartialEq)]
pub enum BenchKind {
    Hamming { r: usize, c: f64, cfg: HammingConfig },
    Sets { w: usize, b1: f64, b2: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub kind: BenchKind,
    pub ns: Vec<usize>,
    pub d: usize,
    pub queries: usize,
    pub seed: Seed,
    /// Also scan every colliding point per query (a second pass).
    pub colliding: bool,
    pub cost_guard: Option<u64>,
}

/// One row per data set size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub kind: String,
    pub n: usize,
    pub d: usize,
    pub params: String,
    pub build_seconds: f64,
    pub mean_query_us: f64,
    pub median_query_us: f64,
    /// Distinct points checked before the first answer.
    pub candidates_per_query: f64,
    /// Distinct points sharing a bucket with the query.
    pub colliding_per_query: Option<f64>,
    /// Fraction of planted queries answered within the far threshold.
    pub recall: f64,
    /// Least-squares slope of `ln candidates_per_query` against `ln n` over all rows.
    pub exponent: Option<f64>,
    /// The same slope for `colliding_per_query`.
    pub colliding_exponent: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// distinct `x` or any non-positive value.
pub fn fit_exponent(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-12 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

fn index_args(kind: &BenchKind, cost_guard: Option<u64>) -> IndexArgs {
    let mut a = IndexArgs { r: None, c: 2.0, mode: ModeArg::Theorem, reduction: None, b1: None, b2: None, cost_guard };
    match kind {
        BenchKind::Hamming { r, c, cfg } => {
            a.r = Some(*r);
            a.c = *c;
            a.mode = match cfg.mode {
                Mode::Theorem => ModeArg::Theorem,
                Mode::Corollary => ModeArg::Corollary,
            };
            a.reduction = cfg.reduction.map(|k| match k {
                ReductionKind::Xor => ReductionArg::Xor,
                ReductionKind::Partition => ReductionArg::Partition,
            });
        }
        BenchKind::Sets { b1, b2, .. } => {
            a.b1 = Some(*b1);
            a.b2 = Some(*b2);
        }
    }
    a
}

/// Answer check for query `i`: `Some(true)` if the answer passes the far threshold.
fn run_query(index: &LsfIndex, queries: &Dataset, i: usize, all: bool) -> Result<(QueryOutcome, bool)> {
    match (index, queries) {
        (LsfIndex::Hamming(h), Dataset::Hamming { points, .. }) => {
            let q = &points[i];
            let out = if all { h.query_all(q)? } else { h.query(q)? };
            let ok = out.answer.is_some_and(|a| h.points()[a].dist(q) <= h.params().far_radius());
            Ok((out, ok))
        }
        (LsfIndex::Similarity(s), Dataset::Sets { points, .. }) => {
            let q = &points[i];
            let out = if all { s.query_all(q)? } else { s.query(q)? };
            let ok = match out.answer {
                Some(a) => braun_blanquet(&s.points()[a], q)?.above(s.thresholds().1),
                None => false,
            };
            Ok((out, ok))
        }
        _ => Err(Error::param("query kind does not match index kind")),
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 }
}

/// Generates planted data at every `n`, builds, and queries it. Every query
/// has a planted neighbour, so recall below 1 is a failed Las Vegas guarantee.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRecord>> {
    if spec.queries == 0 || spec.ns.is_empty() {
        return Err(Error::param("bench needs at least one n and one query"));
    }
    let args = index_args(&spec.kind, spec.cost_guard);
    let mut rows = Vec::with_capacity(spec.ns.len());
    for &n in &spec.ns {
        let seed = spec.seed.derive(n as u64);
        let g = match &spec.kind {
            BenchKind::Hamming { r, .. } => planted_hamming(n, spec.d, *r, spec.queries, &seed)?,
            BenchKind::Sets { w, b1, .. } => planted_sets(n, spec.d, *w, *b1, spec.queries, &seed)?,
        };
        let index = build_index(g.data, &args, &seed)?;
        let timed = (0..spec.queries)
            .into_par_iter()
            .map(|i| {
                let start = Instant::now();
                let (out, ok) = run_query(&index, &g.queries, i, false)?;
                Ok((start.elapsed().as_secs_f64() * 1e6, out, ok))
            })
            .collect::<Result<Vec<_>>>()?;
        let colliding = if spec.colliding {
            let total = (0..spec.queries)
                .into_par_iter()
                .map(|i| Ok(run_query(&index, &g.queries, i, true)?.0.candidates))
                .collect::<Result<Vec<usize>>>()?
                .iter()
                .sum::<usize>();
            Some(total as f64 / spec.queries as f64)
        } else {
            None
        };
        let q = spec.queries as f64;
        let mut times: Vec<f64> = timed.iter().map(|t| t.0).collect();
        let correct = timed.iter().filter(|t| t.2 && t.1.candidates >= 1).count();
        rows.push(BenchRecord {
            kind: index.kind().to_string(),
            n,
            d: spec.d,
            params: describe(&index),
            build_seconds: index.build_seconds(),
            mean_query_us: times.iter().sum::<f64>() / q,
            median_query_us: median(&mut times),
            candidates_per_query: timed.iter().map(|t| t.1.candidates).sum::<usize>() as f64 / q,
            colliding_per_query: colliding,
            recall: correct as f64 / q,
            exponent: None,
            colliding_exponent: None,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let cand: Vec<f64> = rows.iter().map(|r| r.candidates_per_query).collect();
    let coll: Option<Vec<f64>> = rows.iter().map(|r| r.colliding_per_query).collect();
    let (e, ce) = (fit_exponent(&xs, &cand), coll.and_then(|c| fit_exponent(&xs, &c)));
    for r in &mut rows {
        r.exponent = e;
        r.colliding_exponent = ce;
    }
    Ok(rows)
}
