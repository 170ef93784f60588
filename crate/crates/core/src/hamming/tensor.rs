//! Splitter-tensored codes on `{0,1}^B`.
//!
//! For a splitter `Π` of `[B]` into `l = B/b` parts and an inner code `A` on
//! `{0,1}^b`, the code holds one word per `(π, j_1..j_l)`: on part `k` of
//! `π` it equals `A[j_k]`. It is never materialized; decoding `x` takes, for
//! each `π`, the inner words near each projection of `x` and emits their
//! product.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitvec::BitVector;
use crate::error::{check_dim, Error, Result};
use crate::hamming::inner::InnerCode;
use crate::splitter::{build_splitter, SplitterFamily};

/// Opaque bucket key.
pub type FilterId = u128;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct TensorRepr {
    inner: InnerCode,
    splitter: SplitterFamily,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TensorRepr", into = "TensorRepr")]
pub struct TensoredCode {
    repr: TensorRepr,
    /// `part_idx[π][k]`: coordinates of part `k` under function `π`.
    part_idx: Vec<Vec<Vec<usize>>>,
    /// `|A|^k` for `k = 0..=l`.
    radix: Vec<u128>,
}

impl TryFrom<TensorRepr> for TensoredCode {
    type Error = Error;

    fn try_from(repr: TensorRepr) -> Result<Self> {
        let b = repr.inner.dim();
        let fam = &repr.splitter;
        if fam.part_size() != b {
            return Err(Error::param(format!(
                "splitter parts of size {} do not match inner dimension {b}",
                fam.part_size()
            )));
        }
        let l = fam.parts();
        let a = repr.inner.len() as u128;
        let mut radix = vec![1u128; l + 1];
        for k in 1..=l {
            radix[k] = radix[k - 1]
                .checked_mul(a)
                .ok_or_else(|| Error::param("code size overflows 128-bit filter ids"))?;
        }
        radix[l]
            .checked_mul(fam.len() as u128)
            .ok_or_else(|| Error::param("code size overflows 128-bit filter ids"))?;
        let part_idx = (0..fam.len()).map(|i| fam.part_indices(i)).collect();
        Ok(TensoredCode {
            repr,
            part_idx,
            radix,
        })
    }
}

impl From<TensoredCode> for TensorRepr {
    fn from(c: TensoredCode) -> Self {
        c.repr
    }
}

/// Tensors `inner` over `[B]` with a freshly built splitter.
pub fn build_tensored_code(inner: InnerCode, block: usize) -> Result<TensoredCode> {
    let b = inner.dim();
    if block == 0 || block % b != 0 {
        return Err(Error::Divisibility {
            what: "outer block length",
            value: block,
            divisor: b,
        });
    }
    let splitter = build_splitter(block, block / b)?;
    TensoredCode::with_splitter(inner, splitter)
}

impl TensoredCode {
    pub fn with_splitter(inner: InnerCode, splitter: SplitterFamily) -> Result<Self> {
        if splitter.dummies() != 0 {
            return Err(Error::param("tensored code needs an unpadded splitter"));
        }
        TensorRepr { inner, splitter }.try_into()
    }

    pub fn inner(&self) -> &InnerCode {
        &self.repr.inner
    }

    pub fn splitter(&self) -> &SplitterFamily {
        &self.repr.splitter
    }

    /// Outer length `B`.
    pub fn block(&self) -> usize {
        self.repr.splitter.domain()
    }

    pub fn parts(&self) -> usize {
        self.repr.splitter.parts()
    }

    /// Every decoded word lies within this distance of the input.
    pub fn outer_radius(&self) -> usize {
        self.parts() * self.repr.inner.radius()
    }

    /// `|Π| |A|^l`.
    pub fn size(&self) -> u128 {
        self.radix[self.parts()] * self.repr.splitter.len() as u128
    }

    pub fn encode(&self, pi: usize, tuple: &[u32]) -> FilterId {
        debug_assert_eq!(tuple.len(), self.parts());
        let mut id = pi as u128 * self.radix[self.parts()];
        for (k, &j) in tuple.iter().enumerate() {
            id += j as u128 * self.radix[k];
        }
        id
    }

    pub fn decode_id(&self, id: FilterId) -> (usize, Vec<u32>) {
        let l = self.parts();
        let pi = (id / self.radix[l]) as usize;
        let mut rest = id % self.radix[l];
        let a = self.repr.inner.len() as u128;
        let tuple = (0..l)
            .map(|_| {
                let j = (rest % a) as u32;
                rest /= a;
                j
            })
            .collect();
        (pi, tuple)
    }

    /// The codeword with the given id.
    pub fn codeword(&self, id: FilterId) -> BitVector {
        let (pi, tuple) = self.decode_id(id);
        let mut out = BitVector::zeros(self.block());
        for (k, &j) in tuple.iter().enumerate() {
            let w = self.repr.inner.words()[j as usize];
            for (pos, &x) in self.part_idx[pi][k].iter().enumerate() {
                if (w >> pos) & 1 == 1 {
                    out.set(x, true);
                }
            }
        }
        out
    }

    /// All `(id, word)` pairs; for tiny codes only.
    pub fn materialize(&self, max_words: u128) -> Result<Vec<(FilterId, BitVector)>> {
        if self.size() > max_words {
            return Err(Error::CostGuard(format!(
                "materializing {} words (limit {max_words})",
                self.size()
            )));
        }
        Ok((0..self.size()).map(|id| (id, self.codeword(id))).collect())
    }

    fn near_lists(&self, x: &BitVector, pi: usize, lists: &mut [Vec<u32>]) -> bool {
        for (k, idx) in self.part_idx[pi].iter().enumerate() {
            let v = x.gather_u64(idx) as u32;
            self.repr.inner.near(v, &mut lists[k]);
            if lists[k].is_empty() {
                return false;
            }
        }
        true
    }

    /// Ids of the decoded words, in increasing order.
    pub fn decode(&self, x: &BitVector) -> Result<Vec<FilterId>> {
        let mut out = Vec::new();
        self.decode_into(x, &mut out)?;
        Ok(out)
    }

    pub fn decode_into(&self, x: &BitVector, out: &mut Vec<FilterId>) -> Result<()> {
        check_dim(self.block(), x.len())?;
        out.clear();
        let mut lists = vec![Vec::new(); self.parts()];
        for pi in 0..self.part_idx.len() {
            self.push_part(x, pi, &mut lists, out);
        }
        debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
        Ok(())
    }

    /// The decoded ids under splitter function `pi` alone, ascending.
    pub fn decode_part_into(&self, x: &BitVector, pi: usize, out: &mut Vec<FilterId>) -> Result<()> {
        check_dim(self.block(), x.len())?;
        if pi >= self.part_idx.len() {
            return Err(Error::param(format!("splitter function {pi} out of {}", self.part_idx.len())));
        }
        out.clear();
        self.push_part(x, pi, &mut vec![Vec::new(); self.parts()], out);
        Ok(())
    }

    fn push_part(&self, x: &BitVector, pi: usize, lists: &mut [Vec<u32>], out: &mut Vec<FilterId>) {
        let l = self.parts();
        if !self.near_lists(x, pi, lists) {
            return;
        }
        let base = pi as u128 * self.radix[l];
        // Odometer over the product, most significant part last so ids ascend.
        let mut pos = vec![0usize; l];
        loop {
            let mut id = base;
            for k in 0..l {
                id += lists[k][pos[k]] as u128 * self.radix[k];
            }
            out.push(id);
            let mut k = 0;
            while k < l {
                pos[k] += 1;
                if pos[k] < lists[k].len() {
                    break;
                }
                pos[k] = 0;
                k += 1;
            }
            if k == l {
                break;
            }
        }
    }

    /// `|decode(x)|` without enumerating it.
    pub fn decode_count(&self, x: &BitVector) -> Result<u128> {
        check_dim(self.block(), x.len())?;
        let mut total = 0u128;
        for idx_parts in &self.part_idx {
            let mut prod = 1u128;
            for idx in idx_parts {
                prod = prod.saturating_mul(self.repr.inner.near_count(x.gather_u64(idx) as u32) as u128);
                if prod == 0 {
                    break;
                }
            }
            total = total.saturating_add(prod);
        }
        Ok(total)
    }
}

/// Largest outer length accepted by [`first_uncovered_pair`].
pub const MAX_PAIR_CHECK_BLOCK: usize = 16;

/// Some pair `(x, y)` with `dist(x, y) <= r` whose decodes are disjoint,
/// checked over all of `{0,1}^B`. Decodes are compared one splitter
/// function at a time (ids of different functions never coincide), skipping
/// pairs an earlier function already covered.
pub fn first_uncovered_pair(code: &TensoredCode, r: usize) -> Result<Option<(u64, u64)>> {
    let b = code.block();
    if b > MAX_PAIR_CHECK_BLOCK {
        return Err(Error::CostGuard(format!("exhaustive pair check at B = {b}")));
    }
    let masks = crate::hamming::inner::ball_masks(b, r.min(b));
    if (masks.len() as u64) << b > 1 << 32 {
        return Err(Error::CostGuard(format!("pair check over 2^{b} x {} pairs", masks.len())));
    }
    let words = masks.len().div_ceil(64);
    // open[x] bit j: pair (x, x ^ masks[j]) not yet covered.
    let mut open: Vec<Vec<u64>> = (0..1usize << b)
        .map(|_| {
            let mut row = vec![u64::MAX; words];
            if masks.len() % 64 != 0 {
                row[words - 1] = (1u64 << (masks.len() % 64)) - 1;
            }
            row
        })
        .collect();
    for pi in 0..code.splitter().len() {
        let decoded = (0..1u64 << b)
            .into_par_iter()
            .map(|x| {
                let mut out = Vec::new();
                code.decode_part_into(&BitVector::from_u64(x, b), pi, &mut out)?;
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let remaining: usize = open
            .par_iter_mut()
            .enumerate()
            .map(|(x, row)| {
                for (j, &m) in masks.iter().enumerate() {
                    if row[j / 64] >> (j % 64) & 1 == 1 && sorted_intersect(&decoded[x], &decoded[x ^ m as usize]) {
                        row[j / 64] &= !(1u64 << (j % 64));
                    }
                }
                row.iter().map(|w| w.count_ones() as usize).sum::<usize>()
            })
            .sum();
        if remaining == 0 {
            return Ok(None);
        }
    }
    Ok(open.iter().enumerate().find_map(|(x, row)| {
        (0..masks.len())
            .find(|&j| row[j / 64] >> (j % 64) & 1 == 1)
            .map(|j| (x as u64, x as u64 ^ masks[j] as u64))
    }))
}

fn sorted_intersect(a: &[FilterId], b: &[FilterId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamming::inner::{build_inner_code, inner_radius};
    use crate::seed::Seed;
    use rand::SeedableRng;

    fn tiny_code() -> TensoredCode {
        let inner = InnerCode::full_cube(4, 2, 1).unwrap();
        build_tensored_code(inner, 8).unwrap()
    }

    #[test]
    fn single_part_equals_inner() {
        let inner = build_inner_code(6, 2, 2, &Seed::new(4)).unwrap();
        let code = build_tensored_code(inner.clone(), 6).unwrap();
        assert_eq!(code.size(), inner.len() as u128);
        let words: Vec<BitVector> = code.materialize(1 << 20).unwrap().into_iter().map(|(_, w)| w).collect();
        let expected: Vec<BitVector> = (0..inner.len()).map(|j| inner.word(j)).collect();
        assert_eq!(words, expected);
    }

    #[test]
    fn materialized_restrictions() {
        let code = tiny_code();
        let fam = code.splitter().clone();
        assert_eq!(code.size(), fam.len() as u128 * 16 * 16);
        let mut distinct_ids = std::collections::BTreeSet::new();
        for (id, w) in code.materialize(1 << 20).unwrap() {
            distinct_ids.insert(id);
            let (pi, tuple) = code.decode_id(id);
            assert_eq!(code.encode(pi, &tuple), id);
            let parts = fam.part_indices(pi);
            for (k, idx) in parts.iter().enumerate() {
                assert_eq!(w.gather(idx), code.inner().word(tuple[k] as usize));
            }
        }
        assert_eq!(distinct_ids.len() as u128, code.size());
    }

    #[test]
    fn codeword_decodes_itself() {
        let code = tiny_code();
        for id in (0..code.size()).step_by(37) {
            let c = code.codeword(id);
            assert!(code.decode(&c).unwrap().contains(&id));
        }
    }

    #[test]
    fn exhaustive_pairs_b4_b8() {
        // r = 2 with the splitter guaranteeing each part receives at most one difference.
        let code = build_tensored_code(InnerCode::full_cube(4, 1, 1).unwrap(), 8).unwrap();
        let decoded: Vec<Vec<FilterId>> =
            (0..256u64).map(|x| code.decode(&BitVector::from_u64(x, 8)).unwrap()).collect();
        for x in 0..256usize {
            for y in 0..256usize {
                if ((x ^ y) as u32).count_ones() <= 2 {
                    let (a, b) = (&decoded[x], &decoded[y]);
                    assert!(a.iter().any(|id| b.binary_search(id).is_ok()), "x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn pair_checker() {
        let code = build_tensored_code(InnerCode::full_cube(4, 1, 1).unwrap(), 8).unwrap();
        assert_eq!(first_uncovered_pair(&code, 2).unwrap(), None);
        // Five differences put three in some part, beyond 2t = 2.
        assert!(first_uncovered_pair(&code, 5).unwrap().is_some());
        let sparse = InnerCode::from_words(4, 1, 1, vec![0]).unwrap();
        let code = build_tensored_code(sparse, 4).unwrap();
        let (x, y) = first_uncovered_pair(&code, 1).unwrap().unwrap();
        assert!((x ^ y).count_ones() <= 1);
    }

    #[test]
    fn soundness_radius() {
        let inner = build_inner_code(5, 2, 2, &Seed::new(11)).unwrap();
        let code = build_tensored_code(inner, 10).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = BitVector::random(10, &mut rng);
            for id in code.decode(&x).unwrap() {
                assert!(code.codeword(id).dist(&x) <= code.outer_radius());
            }
        }
    }

    #[test]
    fn expected_decode_size_monte_carlo() {
        let code = tiny_code();
        let words: Vec<BitVector> = code.materialize(1 << 20).unwrap().into_iter().map(|(_, w)| w).collect();
        // Pr[0 ∈ C(x)] for uniform x: fraction of x whose decode contains id 0.
        let all: Vec<Vec<FilterId>> = (0..256u64).map(|x| code.decode(&BitVector::from_u64(x, 8)).unwrap()).collect();
        let p0 = all.iter().filter(|d| d.contains(&0)).count() as f64 / 256.0;
        let expected = code.size() as f64 * p0;
        assert!(words.len() as u128 == code.size());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let samples: Vec<f64> = (0..1000)
            .map(|_| code.decode(&BitVector::random(8, &mut rng)).unwrap().len() as f64)
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        let se = (var / samples.len() as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * se + 1e-9, "mean {mean} expected {expected} se {se}");
    }

    #[test]
    fn count_matches_enumeration() {
        let inner = build_inner_code(6, 2, inner_radius(6, 0.5), &Seed::new(2)).unwrap();
        let code = build_tensored_code(inner, 12).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x = BitVector::random(12, &mut rng);
            let ids = code.decode(&x).unwrap();
            assert_eq!(ids.len() as u128, code.decode_count(&x).unwrap());
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), ids.len());
        }
    }

    #[test]
    fn errors() {
        let inner = InnerCode::full_cube(4, 1, 1).unwrap();
        assert!(matches!(build_tensored_code(inner.clone(), 6), Err(Error::Divisibility { .. })));
        let code = build_tensored_code(inner, 8).unwrap();
        assert!(matches!(code.decode(&BitVector::zeros(7)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn serde_round_trip() {
        let code = tiny_code();
        let bytes = bincode::serialize(&code).unwrap();
        let back: TensoredCode = bincode::deserialize(&bytes).unwrap();
        assert_eq!(back, code);
        assert_eq!(bincode::serialize(&back).unwrap(), bytes);
    }
}
