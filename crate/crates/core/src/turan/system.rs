//! Implicit Turán systems and their decoders.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::{turan_params, RoundDir, TuranParams};
use super::phf::{build_modular_family, PerfectHashFamily};
use crate::error::{Error, Result};
use crate::oracle::bounds::{binom, binom_f64, ln_binom};
use crate::seed::{tags, Seed};
use crate::splitter::{build_splitter, SplitterFamily};

pub const MAX_ATTEMPTS: usize = 64;
/// Largest number of `k`-sets enumerated by verification.
pub const MAX_VERIFY_SETS: u128 = 1_000_000;
/// Largest system materialized for mask-based verification.
pub const MAX_MATERIALIZE: usize = 2_000_000;

pub type Block = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Explicit block list.
    Base { blocks: Vec<Block> },
    /// All `r`-subsets of the universe.
    Complete,
    /// Blocks are unions of inner blocks placed on the parts of a splitter member.
    SplitterScaled { inner: Box<TuranSystem>, splitter: SplitterFamily },
    /// Preimages of inner blocks under `π ∘ h` for each member `h`.
    HashExtended { inner: Box<TuranSystem>, phf: PerfectHashFamily, perm: Vec<u32> },
    /// `σ` sends the universe (padded to `a` inner universes) to consecutive parts.
    PartitionExtended { inner: Box<TuranSystem>, parts: usize, perm: Vec<u32>, inverse: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuranSystem {
    n: usize,
    k: usize,
    r: usize,
    stage: Stage,
}

/// All `r`-subsets of the sorted slice `s`, in lexicographic order.
pub fn combinations(s: &[u32], r: usize) -> Vec<Block> {
    let mut out = Vec::new();
    if r > s.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.iter().map(|&i| s[i]).collect());
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + s.len() - r) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every way of picking one block from each list, merged and sorted.
fn product_union(lists: &[Vec<Block>], out: &mut Vec<Block>) {
    let mut idx = vec![0usize; lists.len()];
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    loop {
        let mut block: Block = idx.iter().zip(lists).flat_map(|(&i, l)| l[i].iter().copied()).collect();
        block.sort_unstable();
        out.push(block);
        let Some(p) = (0..lists.len()).find(|&p| idx[p] + 1 < lists[p].len()) else {
            return;
        };
        idx[p] += 1;
        for q in 0..p {
            idx[q] = 0;
        }
    }
}

fn sort_dedup(blocks: &mut Vec<Block>) {
    blocks.sort_unstable();
    blocks.dedup();
}

impl TuranSystem {
    pub fn complete(n: usize, k: usize, r: usize) -> Result<TuranSystem> {
        if r > k || k > n {
            return Err(Error::param(format!("need n >= k >= r, got ({n}, {k}, {r})")));
        }
        Ok(TuranSystem { n, k, r, stage: Stage::Complete })
    }

    /// System with an explicit block list; blocks are sorted and deduplicated.
    pub fn from_blocks(n: usize, k: usize, r: usize, blocks: Vec<Block>) -> Result<TuranSystem> {
        let mut blocks: Vec<Block> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        for b in &blocks {
            if b.len() != r || b.windows(2).any(|w| w[0] == w[1]) || b.iter().any(|&x| x as usize >= n) {
                return Err(Error::param(format!("block {b:?} is not an {r}-subset of [{n}]")));
            }
        }
        sort_dedup(&mut blocks);
        Ok(TuranSystem { n, k, r, stage: Stage::Base { blocks } })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn stage(&self) -> &Stage {
        &self.stage
    }

    pub fn stage_name(&self) -> &'static str {
        match self.stage {
            Stage::Base { .. } => "base",
            Stage::Complete => "complete",
            Stage::SplitterScaled { .. } => "splitter-scaled",
            Stage::HashExtended { .. } => "hash-extended",
            Stage::PartitionExtended { .. } => "partition-extended",
        }
    }

    pub fn inner(&self) -> Option<&TuranSystem> {
        match &self.stage {
            Stage::Base { .. } | Stage::Complete => None,
            Stage::SplitterScaled { inner, .. }
            | Stage::HashExtended { inner, .. }
            | Stage::PartitionExtended { inner, .. } => Some(inner),
        }
    }

    /// Stage names from the outermost inwards.
    pub fn stages(&self) -> Vec<&'static str> {
        let mut out = vec![self.stage_name()];
        let mut cur = self;
        while let Some(inner) = cur.inner() {
            out.push(inner.stage_name());
            cur = inner;
        }
        out
    }

    /// Size as composed from the stage sizes; exact except after perfect
    /// hashing, where it is the expectation bound `|H| |T| (n/m)^r`.
    pub fn size_bound(&self) -> f64 {
        match &self.stage {
            Stage::Base { blocks } => blocks.len() as f64,
            Stage::Complete => binom_f64(self.n as u64, self.r as u64),
            Stage::SplitterScaled { inner, splitter } => {
                splitter.len() as f64 * inner.size_bound().powi(splitter.parts() as i32)
            }
            Stage::HashExtended { inner, phf, .. } => {
                phf.len() as f64
                    * inner.size_bound()
                    * (self.n as f64 / phf.range() as f64).powi(self.r as i32)
            }
            Stage::PartitionExtended { inner, parts, .. } => *parts as f64 * inner.size_bound(),
        }
    }

    /// `χ` with `size = (n/k)^r e^χ`.
    pub fn chi(&self, size: f64) -> f64 {
        size.ln() - self.r as f64 * (self.n as f64 / self.k as f64).ln()
    }

    /// `(|S|/k)^r e^χ` for a given total size.
    pub fn expected_decode_bound(&self, s: usize, size: f64) -> f64 {
        size * (s as f64 / self.n as f64).powi(self.r as i32)
    }

    /// Exact mean of `|decode(S)|` over uniform `S` of size `s`, given the
    /// number of distinct blocks.
    pub fn mean_decode_size(&self, s: usize, size: usize) -> f64 {
        if s < self.r {
            return 0.0;
        }
        size as f64 * (ln_binom(s as u64, self.r as u64) - ln_binom(self.n as u64, self.r as u64)).exp()
    }

    /// All blocks contained in the sorted set `s`, sorted and deduplicated.
    pub fn decode(&self, s: &[u32]) -> Vec<Block> {
        let mut out = Vec::new();
        self.decode_raw(s, &mut out);
        sort_dedup(&mut out);
        out
    }

    fn decode_raw(&self, s: &[u32], out: &mut Vec<Block>) {
        if s.len() < self.r {
            return;
        }
        match &self.stage {
            Stage::Complete => out.extend(combinations(s, self.r)),
            Stage::Base { blocks } => {
                let mut mask = vec![false; self.n];
                for &x in s {
                    mask[x as usize] = true;
                }
                out.extend(blocks.iter().filter(|b| b.iter().all(|&x| mask[x as usize])).cloned());
            }
            Stage::SplitterScaled { inner, splitter } => {
                let mut found = Vec::new();
                for i in 0..splitter.len() {
                    let parts = splitter.part_indices(i);
                    let h = splitter.function(i);
                    let mut local: Vec<Vec<u32>> = vec![Vec::new(); parts.len()];
                    for &x in s {
                        local[h[x as usize] as usize].push(x);
                    }
                    if local.iter().any(|l| l.len() < inner.r) {
                        continue;
                    }
                    let lists: Vec<Vec<Block>> = local
                        .iter()
                        .zip(&parts)
                        .map(|(xs, part)| {
                            let sub: Vec<u32> = xs
                                .iter()
                                .map(|&x| part.binary_search(&(x as usize)).unwrap() as u32)
                                .collect();
                            inner
                                .decode(&sub)
                                .into_iter()
                                .map(|b| b.into_iter().map(|j| part[j as usize] as u32).collect())
                                .collect()
                        })
                        .collect();
                    product_union(&lists, &mut found);
                }
                sort_dedup(&mut found);
                out.extend(found);
            }
            Stage::HashExtended { inner, phf, perm } => {
                let mut found = Vec::new();
                for i in 0..phf.len() {
                    let mut pre: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
                    for &x in s {
                        pre.entry(perm[phf.eval(i, x) as usize]).or_default().push(x);
                    }
                    if pre.len() < self.r {
                        continue;
                    }
                    let image: Vec<u32> = pre.keys().copied().collect();
                    for block in inner.decode(&image) {
                        let lists: Vec<Vec<Block>> =
                            block.iter().map(|e| pre[e].iter().map(|&x| vec![x]).collect()).collect();
                        product_union(&lists, &mut found);
                    }
                }
                sort_dedup(&mut found);
                out.extend(found);
            }
            Stage::PartitionExtended { inner, parts, perm, inverse } => {
                let m = inner.n;
                let mut local: Vec<Vec<u32>> = vec![Vec::new(); *parts];
                for &x in s {
                    let t = perm[x as usize] as usize;
                    local[t / m].push((t % m) as u32);
                }
                for (p, sub) in local.iter_mut().enumerate() {
                    if sub.len() < self.r {
                        continue;
                    }
                    sub.sort_unstable();
                    for block in inner.decode(sub) {
                        let mut b: Block =
                            block.iter().map(|&j| inverse[p * m + j as usize]).collect();
                        b.sort_unstable();
                        out.push(b);
                    }
                }
            }
        }
    }

    /// `decode([n])`, guarded by `max` on the size bound.
    pub fn materialize(&self, max: usize) -> Result<Vec<Block>> {
        if self.size_bound() > max as f64 * 4.0 {
            return Err(Error::CostGuard(format!(
                "materializing about {:.3e} blocks (limit {max})",
                self.size_bound()
            )));
        }
        let all: Vec<u32> = (0..self.n as u32).collect();
        let blocks = self.decode(&all);
        if blocks.len() > max {
            return Err(Error::CostGuard(format!("materialized {} blocks (limit {max})", blocks.len())));
        }
        Ok(blocks)
    }
}

/// Sorted `k`-subsets of `[n]` in colexicographic order.
fn colex_sets(n: usize, k: usize) -> Vec<u128> {
    let mut out = Vec::new();
    if k == 0 {
        out.push(0);
        return out;
    }
    let mut v: u128 = (1u128 << k) - 1;
    let limit = 1u128 << n;
    while v < limit {
        out.push(v);
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

fn mask(block: &[u32]) -> u128 {
    block.iter().fold(0u128, |m, &x| m | 1u128 << x)
}

/// True iff every `k`-subset of `[n]` contains a block of `sys`.
pub fn verify_system(sys: &TuranSystem, n: usize, k: usize) -> Result<bool> {
    if n != sys.n {
        return Err(Error::Dimension { expected: sys.n, got: n });
    }
    if k > n {
        return Ok(true);
    }
    let total = binom(n as u64, k as u64).unwrap_or(u128::MAX);
    if total > MAX_VERIFY_SETS {
        return Err(Error::CostGuard(format!("verifying C({n}, {k}) = {total} sets")));
    }
    if n < 128 {
        if let Ok(blocks) = sys.materialize(MAX_MATERIALIZE) {
            let masks: Vec<u128> = blocks.iter().map(|b| mask(b)).collect();
            return Ok(colex_sets(n, k).par_iter().all(|&kset| masks.iter().any(|&b| b & kset == b)));
        }
    }
    let sets = combinations(&(0..n as u32).collect::<Vec<_>>(), k);
    Ok(sets.par_iter().all(|kset| !sys.decode(kset).is_empty()))
}

/// `ℓ = C(n,r)/C(k,r) (1 + ln C(n,k))`.
pub fn base_sample_size(n: usize, k: usize, r: usize) -> f64 {
    let ratio = (ln_binom(n as u64, r as u64) - ln_binom(k as u64, r as u64)).exp();
    ratio * (1.0 + ln_binom(n as u64, k as u64))
}

/// Sampled and verified `(n, k, r)` system; all `r`-subsets when sampling
/// would not be smaller.
pub fn build_base_system(n: usize, k: usize, r: usize, seed: &Seed) -> Result<TuranSystem> {
    if !(n >= k && k >= r && r >= 1) {
        return Err(Error::param(format!("need n >= k >= r >= 1, got ({n}, {k}, {r})")));
    }
    let ell = base_sample_size(n, k, r).ceil();
    if ell >= binom_f64(n as u64, r as u64) {
        return TuranSystem::complete(n, k, r);
    }
    if n >= 128 || binom(n as u64, k as u64).map_or(true, |c| c > MAX_VERIFY_SETS) {
        return Err(Error::CostGuard(format!("verifying a sampled ({n}, {k}, {r}) system")));
    }
    let ell = ell as usize;
    let universe: Vec<u32> = (0..n as u32).collect();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seed.derive(tags::ATTEMPT + attempt as u64).rng();
        let blocks = (0..ell)
            .map(|_| universe.choose_multiple(&mut rng, r).copied().collect())
            .collect();
        let sys = TuranSystem::from_blocks(n, k, r, blocks)?;
        if verify_system(&sys, n, k)? {
            return Ok(sys);
        }
    }
    Err(Error::Construction { what: format!("base ({n}, {k}, {r}) system"), attempts: MAX_ATTEMPTS })
}

/// `(b n, b k, b r)` system from an `(n, k, r)` system.
pub fn splitter_scale(sys: TuranSystem, b: usize) -> Result<TuranSystem> {
    if b == 0 {
        return Err(Error::param("splitter scaling needs b >= 1"));
    }
    if b == 1 {
        return Ok(sys);
    }
    let splitter = build_splitter(b * sys.n, b)?;
    Ok(TuranSystem {
        n: b * sys.n,
        k: b * sys.k,
        r: b * sys.r,
        stage: Stage::SplitterScaled { inner: Box::new(sys), splitter },
    })
}

/// `(n_out, k, r)` system from an `(m, k, r)` system with `m >= k^2` or
/// `n_out <= m`, through a certified perfect hash family `[n_out] -> [m]`.
pub fn hash_extend(sys: TuranSystem, n_out: usize, seed: &Seed) -> Result<TuranSystem> {
    let phf = build_modular_family(n_out, sys.k, sys.n)?;
    hash_extend_with(sys, phf, seed)
}

pub fn hash_extend_with(sys: TuranSystem, phf: PerfectHashFamily, seed: &Seed) -> Result<TuranSystem> {
    if phf.range() != sys.n || phf.k() != sys.k {
        return Err(Error::param(format!(
            "hash family into [{}] for {}-sets does not fit a ({}, {}, {}) system",
            phf.range(),
            phf.k(),
            sys.n,
            sys.k,
            sys.r
        )));
    }
    let mut perm: Vec<u32> = (0..sys.n as u32).collect();
    perm.shuffle(&mut seed.rng());
    Ok(TuranSystem {
        n: phf.domain(),
        k: sys.k,
        r: sys.r,
        stage: Stage::HashExtended { inner: Box::new(sys), phf, perm },
    })
}

/// `(n, a k, r)` system from an `(m, k, r)` system, with `ceil(n/a) = m`.
pub fn partition_extend(sys: TuranSystem, a: usize, n: usize, seed: &Seed) -> Result<TuranSystem> {
    if a == 0 {
        return Err(Error::param("partitioning needs a >= 1"));
    }
    if n.div_ceil(a) != sys.n {
        return Err(Error::Divisibility { what: "padded partition universe", value: n, divisor: a });
    }
    let n_pad = a * sys.n;
    let mut perm: Vec<u32> = (0..n_pad as u32).collect();
    perm.shuffle(&mut seed.rng());
    let mut inverse = vec![0u32; n_pad];
    for (x, &t) in perm.iter().enumerate() {
        inverse[t as usize] = x as u32;
    }
    Ok(TuranSystem {
        n,
        k: a * sys.k,
        r: sys.r,
        stage: Stage::PartitionExtended { inner: Box::new(sys), parts: a, perm, inverse },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuranBuild {
    pub system: TuranSystem,
    pub params: TuranParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TuranOptions {
    pub dir: RoundDir,
    /// Replace stages 1-3 by all `r`-subsets when they coincide.
    pub shortcut: bool,
}

impl Default for TuranOptions {
    fn default() -> Self {
        TuranOptions { dir: RoundDir::Up, shortcut: true }
    }
}

/// The composed `(n, k, r)` system; `n > k > r^{3/2}`.
pub fn build_turan(n: usize, k: usize, r: usize, seed: &Seed) -> Result<TuranBuild> {
    build_turan_with(n, k, r, TuranOptions::default(), seed)
}

pub fn build_turan_with(n: usize, k: usize, r: usize, opts: TuranOptions, seed: &Seed) -> Result<TuranBuild> {
    if !(k as f64 > (r as f64).powf(1.5)) {
        return Err(Error::param(format!("need k > r^1.5, got k = {k}, r = {r}")));
    }
    let mut params = turan_params(n, k, r, opts.dir)?;
    let seed = seed.derive(tags::TURAN);
    if params.r_adj == 1 {
        params.trace.push("r = 1: all singletons".into());
        return Ok(TuranBuild { system: TuranSystem::complete(n, params.k_adj, 1)?, params });
    }
    let upper = if opts.shortcut && params.collapses() {
        params.trace.push(format!("k/a = r: stages 1-3 are all {}-subsets of [{}]", params.r_adj, params.part));
        TuranSystem::complete(params.part, params.unit, params.r_adj)?
    } else {
        let (bn, bq, b) = (params.base_n(), params.q, params.b);
        let base = match build_base_system(bn, bq, b, &seed.derive(tags::TURAN_BASE)) {
            Ok(sys) => sys,
            Err(Error::CostGuard(msg)) => {
                params.trace.push(format!("base system not verifiable ({msg}); using all {b}-subsets"));
                TuranSystem::complete(bn, bq, b)?
            }
            Err(e) => return Err(e),
        };
        let scaled = splitter_scale(base, b)?;
        hash_extend(scaled, params.part, &seed.derive(tags::TURAN_HASH_PERM))?
    };
    let system = partition_extend(upper, params.a, n, &seed.derive(tags::TURAN_PARTITION))?;
    Ok(TuranBuild { system, params })
}

/// Uniform random `s`-subset of `[n]`, sorted.
pub fn random_subset(n: usize, s: usize, rng: &mut impl Rng) -> Vec<u32> {
    let mut v: Vec<u32> = rand::seq::index::sample(rng, n, s).into_iter().map(|x| x as u32).collect();
    v.sort_unstable();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn brute_filter(blocks: &[Block], s: &[u32]) -> Vec<Block> {
        blocks.iter().filter(|b| b.iter().all(|x| s.contains(x))).cloned().collect()
    }

    fn check_decode(sys: &TuranSystem, trials: usize, seed: u64) {
        let all = sys.materialize(MAX_MATERIALIZE).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let s = random_subset(sys.n(), rng.gen_range(0..=sys.n()), &mut rng);
            let got = sys.decode(&s);
            assert_eq!(got, brute_filter(&all, &s), "S = {s:?}");
            assert!(got.iter().all(|b| b.len() == sys.r()));
            let mut u = s.clone();
            u.extend(random_subset(sys.n(), 3.min(sys.n()), &mut rng));
            u.sort_unstable();
            u.dedup();
            let bigger = sys.decode(&u);
            assert!(got.iter().all(|b| bigger.binary_search(b).is_ok()), "not monotone");
        }
    }

    #[test]
    fn combination_counts() {
        let s: Vec<u32> = (0..7).collect();
        for r in 0..=8 {
            let c = combinations(&s, r);
            assert_eq!(c.len() as u128, binom(7, r as u64).unwrap_or(0));
            assert!(c.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(colex_sets(6, 3).len(), 20);
        assert_eq!(colex_sets(5, 0), vec![0]);
    }

    #[test]
    fn verify_examples() {
        let sys = TuranSystem::from_blocks(4, 3, 2, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(verify_system(&sys, 4, 3).unwrap());
        let one = TuranSystem::from_blocks(4, 3, 2, vec![vec![0, 1]]).unwrap();
        assert!(!verify_system(&one, 4, 3).unwrap());
        let empty = TuranSystem::from_blocks(5, 5, 2, vec![]).unwrap();
        assert!(!verify_system(&empty, 5, 5).unwrap());
        assert!(TuranSystem::from_blocks(4, 3, 2, vec![vec![0, 4]]).is_err());
    }

    #[test]
    fn no_single_block_covers_4_3() {
        // Every 2-block family of size 1 misses some 3-set; some pair of blocks works.
        let pairs = combinations(&[0, 1, 2, 3], 2);
        for p in &pairs {
            let sys = TuranSystem::from_blocks(4, 3, 2, vec![p.clone()]).unwrap();
            assert!(!verify_system(&sys, 4, 3).unwrap());
        }
        let any_two = pairs.iter().enumerate().any(|(i, a)| {
            pairs[i + 1..].iter().any(|b| {
                let sys = TuranSystem::from_blocks(4, 3, 2, vec![a.clone(), b.clone()]).unwrap();
                verify_system(&sys, 4, 3).unwrap()
            })
        });
        assert!(any_two);
    }

    #[test]
    fn base_systems() {
        for (n, k, r) in [(4usize, 3usize, 2usize), (6, 4, 2), (8, 4, 2), (10, 5, 3), (7, 7, 7)] {
            let sys = build_base_system(n, k, r, &Seed::new(n as u64)).unwrap();
            assert!(verify_system(&sys, n, k).unwrap());
            if let Stage::Base { blocks } = sys.stage() {
                assert!(blocks.len() as f64 <= base_sample_size(n, k, r).ceil());
            }
            check_decode(&sys, 30, 1);
        }
        assert_eq!(build_base_system(6, 4, 4, &Seed::new(0)).unwrap().stage(), &Stage::Complete);
    }

    #[test]
    fn splitter_scaling() {
        let base = TuranSystem::from_blocks(4, 3, 2, vec![vec![0, 1], vec![2, 3], vec![1, 2]]).unwrap();
        assert!(verify_system(&base, 4, 3).unwrap());
        assert_eq!(splitter_scale(base.clone(), 1).unwrap(), base);
        let scaled = splitter_scale(base.clone(), 2).unwrap();
        assert_eq!((scaled.n(), scaled.k(), scaled.r()), (8, 6, 4));
        assert!(verify_system(&scaled, 8, 6).unwrap());
        if let Stage::SplitterScaled { splitter, .. } = scaled.stage() {
            assert_eq!(scaled.size_bound(), (splitter.len() * 9) as f64);
        }
        check_decode(&scaled, 200, 2);
    }

    #[test]
    fn hash_extension() {
        let inner = TuranSystem::complete(9, 3, 2).unwrap();
        let sys = hash_extend(inner, 14, &Seed::new(5)).unwrap();
        assert_eq!((sys.n(), sys.k(), sys.r()), (14, 3, 2));
        assert!(verify_system(&sys, 14, 3).unwrap());
        assert!(sys.decode(&[3]).is_empty());
        check_decode(&sys, 200, 3);

        let base = build_base_system(8, 2, 1, &Seed::new(1)).unwrap();
        let scaled = splitter_scale(base, 2).unwrap();
        assert_eq!((scaled.n(), scaled.k(), scaled.r()), (16, 4, 2));
        let hashed = hash_extend(scaled, 20, &Seed::new(2)).unwrap();
        assert!(verify_system(&hashed, 20, 4).unwrap());
        check_decode(&hashed, 100, 4);
    }

    #[test]
    fn partition_extension() {
        let inner = build_base_system(4, 2, 2, &Seed::new(9)).unwrap();
        assert_eq!(partition_extend(inner.clone(), 1, 4, &Seed::new(0)).unwrap().decode(&[0, 1, 2, 3]).len(), 6);
        let sys = partition_extend(inner.clone(), 2, 8, &Seed::new(4)).unwrap();
        assert_eq!((sys.n(), sys.k(), sys.r()), (8, 4, 2));
        assert!(verify_system(&sys, 8, 4).unwrap());
        check_decode(&sys, 200, 5);
        let padded = partition_extend(inner.clone(), 2, 7, &Seed::new(4)).unwrap();
        assert!(verify_system(&padded, 7, 4).unwrap());
        assert!(partition_extend(inner, 2, 10, &Seed::new(4)).is_err());
    }

    #[test]
    fn composed_systems_verify() {
        for (n, k, r) in [(12usize, 6usize, 2usize), (12, 6, 3), (16, 8, 3), (20, 9, 4)] {
            for shortcut in [true, false] {
                let opts = TuranOptions { dir: RoundDir::Up, shortcut };
                let built = build_turan_with(n, k, r, opts, &Seed::new(7)).unwrap();
                let sys = &built.system;
                assert!(verify_system(sys, n, k).unwrap(), "({n},{k},{r}) shortcut={shortcut}");
                let all = sys.materialize(MAX_MATERIALIZE).unwrap();
                let volume = binom_f64(n as u64, sys.r() as u64) / binom_f64(k as u64, sys.r() as u64);
                assert!(all.len() as f64 >= volume.floor());
                check_decode(sys, 50, 6);
            }
        }
    }

    #[test]
    fn shortcut_matches_full_construction() {
        let full = build_turan_with(12, 6, 3, TuranOptions { dir: RoundDir::Up, shortcut: false }, &Seed::new(3))
            .unwrap();
        let short = build_turan_with(12, 6, 3, TuranOptions { dir: RoundDir::Up, shortcut: true }, &Seed::new(3))
            .unwrap();
        assert_eq!(full.system.stages(), vec!["partition-extended", "hash-extended", "splitter-scaled", "complete"]);
        assert_eq!(short.system.stages(), vec!["partition-extended", "complete"]);
        assert_eq!(full.system.materialize(100_000).unwrap(), short.system.materialize(100_000).unwrap());
    }

    #[test]
    fn mean_decode_size_matches() {
        let built = build_turan(40, 9, 2, &Seed::new(11)).unwrap();
        let sys = &built.system;
        let size = sys.materialize(MAX_MATERIALIZE).unwrap().len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let s = 12;
        let trials = 2000;
        let total: usize = (0..trials).map(|_| sys.decode(&random_subset(40, s, &mut rng)).len()).sum();
        let mean = total as f64 / trials as f64;
        let expected = sys.mean_decode_size(s, size);
        assert!((mean - expected).abs() <= 0.1 * expected + 0.05, "{mean} vs {expected}");
        assert!(mean <= sys.expected_decode_bound(s, size as f64) * 1.1);
    }

    #[test]
    fn precondition_errors() {
        assert!(build_turan(20, 5, 3, &Seed::new(0)).is_err());
        assert!(build_turan(6, 6, 2, &Seed::new(0)).is_err());
        assert!(build_base_system(3, 4, 2, &Seed::new(0)).is_err());
        let big = TuranSystem::complete(60, 30, 2).unwrap();
        assert!(matches!(verify_system(&big, 60, 30), Err(Error::CostGuard(_))));
    }
}
