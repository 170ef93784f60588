//! Braun-Blanquet similarity index: points are grouped by exact weight and
//! each group stores every point under the blocks of a Turán system that
//! its (possibly self-concatenated) set contains.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::buckets::{BucketTable, Visited};
use super::plan::{plan_similarity_params, SimMode, SimilarityParams};
use super::{Elapsed, QueryOutcome};
use crate::error::{check_dim, Error, Result};
use crate::seed::{tags, Seed};
use crate::setpoint::{braun_blanquet, SetPoint};
use crate::turan::{block_id, build_turan_with, TuranOptions, TuranSystem};

/// Largest total number of bucket entries a build may create.
pub const MAX_SIM_ENTRIES: f64 = 1e8;

/// Exact-weight groups in increasing weight order, with point ids ascending.
pub fn group_by_weight(points: &[SetPoint]) -> Vec<(usize, Vec<usize>)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| (points[i].weight(), i));
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in order {
        let w = points[i].weight();
        match groups.last_mut() {
            Some((gw, ids)) if *gw == w => ids.push(i),
            _ => groups.push((w, vec![i])),
        }
    }
    groups
}

/// Weights `w` with `b1 wq <= w <= wq / b1`: only these can hold a point
/// of similarity `>= b1` to a query of weight `wq`.
pub fn weight_range(wq: usize, b1: f64) -> (f64, f64) {
    (b1 * wq as f64 - 1e-9, wq as f64 / b1 + 1e-9)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGroup {
    pub weight: usize,
    pub params: SimilarityParams,
    pub system: TuranSystem,
    pub table: BucketTable,
    /// Global ids of the group's points, ascending.
    pub ids: Vec<u32>,
}

impl SimilarityGroup {
    fn expand(&self, x: &SetPoint) -> Vec<u32> {
        expand(x, self.params.mode)
    }
}

fn expand(x: &SetPoint, mode: SimMode) -> Vec<u32> {
    match mode {
        SimMode::SelfConcatenated { copies } => {
            let m = copies as u32;
            x.elements().iter().flat_map(|&e| (0..m).map(move |j| e * m + j)).collect()
        }
        _ => x.elements().to_vec(),
    }
}

fn group_system(p: &SimilarityParams, seed: &Seed) -> Result<TuranSystem> {
    let (de, _, ke) = p.expanded();
    match p.mode {
        SimMode::AllSubsets => TuranSystem::complete(p.d, p.k, p.k.min(p.d)),
        _ => Ok(build_turan_with(de, ke, p.r, TuranOptions { dir: p.dir, shortcut: true }, seed)?.system),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityIndex {
    d: usize,
    b1: f64,
    b2: f64,
    groups: Vec<SimilarityGroup>,
    points: Vec<SetPoint>,
    #[serde(skip)]
    build_seconds: Elapsed,
}

/// Plans and builds one group per weight. Empty sets are stored but never
/// indexed: they have similarity 0 (or undefined) to everything.
pub fn build_similarity_index(points: Vec<SetPoint>, d: usize, b1: f64, b2: f64, seed: &Seed) -> Result<SimilarityIndex> {
    let start = Instant::now();
    for p in &points {
        check_dim(d, p.universe())?;
    }
    if points.len() > u32::MAX as usize {
        return Err(Error::param("more than 2^32 points"));
    }
    if !(0.0 < b2 && b2 < b1 && b1 < 1.0) {
        return Err(Error::param(format!("need 0 < b2 < b1 < 1, got b1 = {b1}, b2 = {b2}")));
    }
    let groups = plan_groups(&points, d, b1, b2)?;
    let predicted = predicted_of(&groups);
    if predicted > MAX_SIM_ENTRIES {
        return Err(Error::CostGuard(format!("about {predicted:.3e} bucket entries predicted")));
    }
    let groups = groups
        .into_par_iter()
        .map(|(params, ids)| build_group(&points, params, ids, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimilarityIndex {
        d,
        b1,
        b2,
        groups,
        points,
        build_seconds: Elapsed(start.elapsed().as_secs_f64()),
    })
}

fn plan_groups(points: &[SetPoint], d: usize, b1: f64, b2: f64) -> Result<Vec<(SimilarityParams, Vec<usize>)>> {
    group_by_weight(points)
        .into_iter()
        .filter(|(w, _)| *w > 0)
        .map(|(w, ids)| Ok((plan_similarity_params(ids.len(), d, w, b1, b2)?, ids)))
        .collect()
}

fn predicted_of(groups: &[(SimilarityParams, Vec<usize>)]) -> f64 {
    groups.iter().map(|(p, ids)| p.blocks_per_point * ids.len() as f64).sum()
}

/// Bucket entries the planner expects [`build_similarity_index`] to create.
pub fn predicted_entries(points: &[SetPoint], d: usize, b1: f64, b2: f64) -> Result<f64> {
    Ok(predicted_of(&plan_groups(points, d, b1, b2)?))
}

/// Single-weight index with explicit parameters.
pub fn build_similarity_index_with(points: Vec<SetPoint>, params: &SimilarityParams, seed: &Seed) -> Result<SimilarityIndex> {
    let start = Instant::now();
    for p in &points {
        check_dim(params.d, p.universe())?;
        if p.weight() != params.w {
            return Err(Error::param(format!("point of weight {} in an index of weight {}", p.weight(), params.w)));
        }
    }
    let ids = (0..points.len()).collect();
    let group = build_group(&points, params.clone(), ids, seed)?;
    Ok(SimilarityIndex {
        d: params.d,
        b1: params.b1,
        b2: params.b2,
        groups: vec![group],
        points,
        build_seconds: Elapsed(start.elapsed().as_secs_f64()),
    })
}

fn build_group(points: &[SetPoint], params: SimilarityParams, ids: Vec<usize>, seed: &Seed) -> Result<SimilarityGroup> {
    let seed = seed.derive(tags::GROUP).derive(params.w as u64);
    let system = group_system(&params, &seed)?;
    let entries: Vec<(u128, u32)> = ids
        .par_iter()
        .flat_map_iter(|&id| {
            let x = expand(&points[id], params.mode);
            system.decode(&x).into_iter().map(move |b| (block_id(&b), id as u32))
        })
        .collect();
    Ok(SimilarityGroup {
        weight: params.w,
        params,
        system,
        table: BucketTable::from_entries(entries),
        ids: ids.into_iter().map(|i| i as u32).collect(),
    })
}

impl SimilarityIndex {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (self.b1, self.b2)
    }

    pub fn groups(&self) -> &[SimilarityGroup] {
        &self.groups
    }

    pub fn points(&self) -> &[SetPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn build_seconds(&self) -> f64 {
        self.build_seconds.0
    }

    pub fn entries(&self) -> usize {
        self.groups.iter().map(|g| g.table.entries()).sum()
    }

    /// Groups a query of weight `wq` is sent to.
    pub fn dispatch(&self, wq: usize) -> impl Iterator<Item = &SimilarityGroup> + '_ {
        let (lo, hi) = weight_range(wq, self.b1);
        self.groups
            .iter()
            .filter(move |g| lo <= g.weight as f64 && g.weight as f64 <= hi)
    }

    /// First stored set with similarity `> b2` to `q` in scan order.
    pub fn query(&self, q: &SetPoint) -> Result<QueryOutcome> {
        self.scan(q, true)
    }

    pub fn query_all(&self, q: &SetPoint) -> Result<QueryOutcome> {
        self.scan(q, false)
    }

    fn scan(&self, q: &SetPoint, stop: bool) -> Result<QueryOutcome> {
        check_dim(self.d, q.universe())?;
        let mut out = QueryOutcome::default();
        if q.weight() == 0 {
            return Ok(out);
        }
        let mut visited = Visited::new(self.points.len());
        for g in self.dispatch(q.weight()) {
            let blocks = g.system.decode(&g.expand(q));
            out.filters += blocks.len();
            for b in &blocks {
                for &id in g.table.get(block_id(b)) {
                    if !visited.insert(id) {
                        continue;
                    }
                    out.candidates += 1;
                    if out.answer.is_none() && braun_blanquet(&self.points[id as usize], q)?.above(self.b2) {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::scan::linear_scan_sets;
    use crate::turan::random_subset;
    use rand::Rng;

    fn planted(x: &SetPoint, shared: usize, d: usize, rng: &mut impl Rng) -> SetPoint {
        let w = x.weight();
        let keep: Vec<u32> = rand::seq::index::sample(rng, w, shared).into_iter().map(|i| x.elements()[i]).collect();
        let mut out = keep;
        while out.len() < w {
            let e = rng.gen_range(0..d as u32);
            if !x.contains(e) && !out.contains(&e) {
                out.push(e);
            }
        }
        SetPoint::new(d, out).unwrap()
    }

    #[test]
    fn groups() {
        let d = 10;
        let pts = vec![
            SetPoint::new(d, [0, 1, 2]).unwrap(),
            SetPoint::new(d, [3, 4, 5, 6, 7]).unwrap(),
            SetPoint::new(d, [1, 2, 3]).unwrap(),
        ];
        assert_eq!(group_by_weight(&pts), vec![(3, vec![0, 2]), (5, vec![1])]);
        assert_eq!(group_by_weight(&pts[..1]).len(), 1);
        assert!(group_by_weight(&[]).is_empty());
    }

    #[test]
    fn dispatch_covers_similar_pairs() {
        // Exhaustive over weights: any pair with similarity >= b1 has its
        // stored weight inside the query's dispatch range.
        for b1 in [0.3, 0.5, 0.75] {
            for wq in 1..=40usize {
                for w in 1..=40usize {
                    let best = wq.min(w) as f64 / wq.max(w) as f64;
                    let (lo, hi) = weight_range(wq, b1);
                    if best >= b1 - 1e-12 {
                        assert!(lo <= w as f64 && w as f64 <= hi, "b1={b1} wq={wq} w={w}");
                    }
                }
            }
        }
    }

    #[test]
    fn self_query() {
        let mut rng = Seed::new(1).rng();
        let d = 200;
        let pts: Vec<SetPoint> = (0..100)
            .map(|i| SetPoint::from_sorted(d, random_subset(d, 10 + i % 3, &mut rng)))
            .collect();
        let idx = build_similarity_index(pts.clone(), d, 0.5, 0.25, &Seed::new(2)).unwrap();
        assert_eq!(idx.groups().len(), 3);
        for (i, p) in pts.iter().enumerate() {
            let a = idx.query(p).unwrap().answer.unwrap();
            assert!(braun_blanquet(&pts[a], p).unwrap().above(0.25), "query {i}");
        }
    }

    #[test]
    fn planted_queries_all_modes() {
        let mut rng = Seed::new(3).rng();
        let d = 400;
        // r = 4 at n = 200: w = 8 gives all subsets, w = 14 self-concatenation, w = 40 Turán.
        for (w, mode) in [(8usize, "all"), (14, "concat"), (40, "turan")] {
            let pts: Vec<SetPoint> = (0..200).map(|_| SetPoint::from_sorted(d, random_subset(d, w, &mut rng))).collect();
            let idx = build_similarity_index(pts.clone(), d, 0.5, 0.25, &Seed::new(4)).unwrap();
            let p = &idx.groups()[0].params;
            let got = match p.mode {
                SimMode::AllSubsets => "all",
                SimMode::SelfConcatenated { .. } => "concat",
                SimMode::Turan => "turan",
            };
            assert_eq!(got, mode);
            for _ in 0..200 {
                let x = &pts[rng.gen_range(0..pts.len())];
                let q = planted(x, w.div_ceil(2), d, &mut rng);
                let out = idx.query(&q).unwrap();
                let a = out.answer.expect("planted neighbour missed");
                assert!(braun_blanquet(&pts[a], &q).unwrap().above(0.25));
            }
        }
    }

    #[test]
    fn mixed_weights_and_far_queries() {
        let mut rng = Seed::new(5).rng();
        let d = 300;
        let pts: Vec<SetPoint> = (0..150)
            .map(|i| SetPoint::from_sorted(d, random_subset(d, [12, 16, 24][i % 3], &mut rng)))
            .collect();
        let idx = build_similarity_index(pts.clone(), d, 0.5, 0.2, &Seed::new(6)).unwrap();
        for _ in 0..200 {
            let wq = rng.gen_range(6..30);
            let q = SetPoint::from_sorted(d, random_subset(d, wq, &mut rng));
            let near = linear_scan_sets(&pts, &q, 0.5).unwrap();
            let out = idx.query_all(&q).unwrap();
            if !near.is_empty() {
                assert!(out.answer.is_some());
            }
            if let Some(a) = out.answer {
                assert!(braun_blanquet(&pts[a], &q).unwrap().above(0.2));
            }
        }
        let empty = SetPoint::new(d, []).unwrap();
        assert_eq!(idx.query(&empty).unwrap().answer, None);
    }

    #[test]
    fn explicit_params_check_weight() {
        let d = 100;
        let p = plan_similarity_params(10, d, 5, 0.5, 0.25).unwrap();
        let good = vec![SetPoint::new(d, [1, 2, 3, 4, 5]).unwrap()];
        let idx = build_similarity_index_with(good.clone(), &p, &Seed::new(0)).unwrap();
        assert_eq!(idx.query(&good[0]).unwrap().answer, Some(0));
        let bad = vec![SetPoint::new(d, [1, 2, 3]).unwrap()];
        assert!(build_similarity_index_with(bad, &p, &Seed::new(0)).is_err());
    }
}
