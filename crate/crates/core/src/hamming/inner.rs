//! Covering codes on `{0,1}^b`.
//!
//! A code `A` covers radius pairs `(r_b, t_b)` when every pair `x, y` with
//! `dist(x, y) <= r_b` has some word within `t_b` of both. Codes are found
//! by sampling uniform words and checking every pair exhaustively, or by a
//! deterministic greedy set cover.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::oracle::bounds::{ball_intersection_unguarded, ball_volume};
use crate::seed::{tags, Seed};

/// Largest inner dimension handled at all.
pub const MAX_INNER_DIM: usize = 20;
/// Largest inner dimension for exhaustive verification.
pub const MAX_VERIFY_DIM: usize = 16;
pub const MAX_ATTEMPTS: usize = 64;
/// Near-word tables larger than this many entries fall back to scanning.
const MAX_TABLE_ENTRIES: u128 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerMode {
    Sampled,
    Greedy,
}

/// Inner radius `ceil(b/2 - s' sqrt(b)/2)`, clamped to `[0, b]`.
pub fn inner_radius(b: usize, s_prime: f64) -> usize {
    radius_with_divisor(b, s_prime, 2.0)
}

/// The alternative radius `ceil(b/2 - s' sqrt(b)/4)`.
pub fn inner_radius_quarter(b: usize, s_prime: f64) -> usize {
    radius_with_divisor(b, s_prime, 4.0)
}

fn radius_with_divisor(b: usize, s_prime: f64, div: f64) -> usize {
    let t = b as f64 / 2.0 - s_prime * (b as f64).sqrt() / div;
    (t - 1e-9).ceil().clamp(0.0, b as f64) as usize
}

/// Probability that a uniform word covers the worst pair at distance `<= r`.
pub fn capture_probability(b: usize, r: usize, t: usize) -> f64 {
    (0..=r)
        .map(|d| ball_intersection_unguarded(b as u64, d as u64, t as i64))
        .min()
        .unwrap() as f64
        / 2f64.powi(b as i32)
}

/// Ordered pairs `(x, y)` with `dist(x, y) <= r`.
pub fn pair_count(b: usize, r: usize) -> u128 {
    (1u128 << b) * ball_volume(b as u64, r as i64)
}

/// Number of sampled words per attempt: `ceil(ln(2N) / p)`, which makes the
/// union bound over all `N` ordered pairs at most `1/2`.
pub fn sampling_budget(b: usize, r: usize, t: usize) -> u128 {
    let p = capture_probability(b, r, t);
    if p <= 0.0 {
        return u128::MAX;
    }
    let n = pair_count(b, r) as f64;
    ((2.0 * n).ln() / p).ceil() as u128
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct InnerRepr {
    b: usize,
    r_b: usize,
    t_b: usize,
    words: Vec<u32>,
    mode: InnerMode,
    budget: u64,
    attempts: usize,
}

/// Verified inner code with a precomputed near-word table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "InnerRepr", into = "InnerRepr")]
pub struct InnerCode {
    repr: InnerRepr,
    near: Option<NearTable>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct NearTable {
    offsets: Vec<u32>,
    ids: Vec<u32>,
}

impl From<InnerRepr> for InnerCode {
    fn from(repr: InnerRepr) -> Self {
        let near = near_table(repr.b, repr.t_b, &repr.words);
        InnerCode { repr, near }
    }
}

impl From<InnerCode> for InnerRepr {
    fn from(c: InnerCode) -> Self {
        c.repr
    }
}

fn near_table(b: usize, t: usize, words: &[u32]) -> Option<NearTable> {
    let vol = ball_volume(b as u64, t as i64);
    let entries = words.len() as u128 * vol;
    if entries > MAX_TABLE_ENTRIES {
        return None;
    }
    let masks = ball_masks(b, t);
    let mut counts = vec![0u32; (1usize << b) + 1];
    for &a in words {
        for &m in &masks {
            counts[(a ^ m) as usize + 1] += 1;
        }
    }
    for i in 1..counts.len() {
        counts[i] += counts[i - 1];
    }
    let mut fill = counts.clone();
    let mut ids = vec![0u32; *counts.last().unwrap() as usize];
    for (j, &a) in words.iter().enumerate() {
        for &m in &masks {
            let x = (a ^ m) as usize;
            ids[fill[x] as usize] = j as u32;
            fill[x] += 1;
        }
    }
    // Word indices ascend within each list because words are visited in order.
    Some(NearTable {
        offsets: counts,
        ids,
    })
}

/// All masks of weight `<= r` in `b` bits, by increasing weight then value.
pub(crate) fn ball_masks(b: usize, r: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (0u32..1 << b)
        .filter(|m| m.count_ones() as usize <= r)
        .collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

impl InnerCode {
    /// Wraps an explicit word list (not verified).
    pub fn from_words(b: usize, r_b: usize, t_b: usize, words: Vec<u32>) -> Result<Self> {
        check_dims(b, r_b, t_b)?;
        if let Some(&w) = words.iter().find(|&&w| (w as u64) >> b != 0) {
            return Err(Error::param(format!("word {w:#x} exceeds {b} bits")));
        }
        let mut words = words;
        words.sort_unstable();
        words.dedup();
        Ok(InnerRepr {
            b,
            r_b,
            t_b,
            words,
            mode: InnerMode::Sampled,
            budget: 0,
            attempts: 0,
        }
        .into())
    }

    pub fn full_cube(b: usize, r_b: usize, t_b: usize) -> Result<Self> {
        check_dims(b, r_b, t_b)?;
        InnerCode::from_words(b, r_b, t_b, (0u32..1 << b).collect())
    }

    pub fn dim(&self) -> usize {
        self.repr.b
    }

    pub fn pair_radius(&self) -> usize {
        self.repr.r_b
    }

    pub fn radius(&self) -> usize {
        self.repr.t_b
    }

    pub fn words(&self) -> &[u32] {
        &self.repr.words
    }

    pub fn len(&self) -> usize {
        self.repr.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.repr.words.is_empty()
    }

    pub fn word(&self, j: usize) -> BitVector {
        BitVector::from_u64(self.repr.words[j] as u64, self.repr.b)
    }

    pub fn mode(&self) -> InnerMode {
        self.repr.mode
    }

    /// Words sampled per attempt (0 for greedy or explicit codes).
    pub fn budget(&self) -> u64 {
        self.repr.budget
    }

    /// Sampling attempts used, including the successful one.
    pub fn attempts(&self) -> usize {
        self.repr.attempts
    }

    /// Indices of the words within `t_b` of `x`, ascending.
    pub fn near(&self, x: u32, out: &mut Vec<u32>) {
        out.clear();
        match &self.near {
            Some(t) => {
                let (lo, hi) = (t.offsets[x as usize] as usize, t.offsets[x as usize + 1] as usize);
                out.extend_from_slice(&t.ids[lo..hi]);
            }
            None => {
                let t = self.repr.t_b as u32;
                out.extend(
                    self.repr
                        .words
                        .iter()
                        .enumerate()
                        .filter(|(_, &a)| (a ^ x).count_ones() <= t)
                        .map(|(j, _)| j as u32),
                );
            }
        }
    }

    pub fn near_count(&self, x: u32) -> usize {
        match &self.near {
            Some(t) => (t.offsets[x as usize + 1] - t.offsets[x as usize]) as usize,
            None => {
                let t = self.repr.t_b as u32;
                self.repr.words.iter().filter(|&&a| (a ^ x).count_ones() <= t).count()
            }
        }
    }

    pub fn verify(&self) -> Result<bool> {
        verify_inner_code(&self.repr.words, self.repr.b, self.repr.r_b, self.repr.t_b)
    }
}

fn check_dims(b: usize, r_b: usize, t_b: usize) -> Result<()> {
    if b == 0 || b > MAX_INNER_DIM {
        return Err(Error::param(format!("inner dimension {b} outside 1..={MAX_INNER_DIM}")));
    }
    if r_b > b || t_b > b {
        return Err(Error::param(format!("radii ({r_b}, {t_b}) exceed dimension {b}")));
    }
    Ok(())
}

/// Checks every pair at distance `<= r_b`; `b <= 16`.
pub fn verify_inner_code(words: &[u32], b: usize, r_b: usize, t_b: usize) -> Result<bool> {
    Ok(first_uncovered(words, b, r_b, t_b)?.is_none())
}

/// Some ordered pair at distance `<= r_b` that no word covers.
pub fn first_uncovered(words: &[u32], b: usize, r_b: usize, t_b: usize) -> Result<Option<(u32, u32)>> {
    if b > MAX_VERIFY_DIM {
        return Err(Error::CostGuard(format!(
            "exhaustive inner-code verification limited to b <= {MAX_VERIFY_DIM}, got {b}"
        )));
    }
    check_dims(b, r_b, t_b)?;
    if words.is_empty() {
        return Ok(Some((0, 0)));
    }
    let n_words = words.len().div_ceil(64);
    let cube = 1usize << b;
    let mut near = vec![0u64; cube * n_words];
    let t_masks = ball_masks(b, t_b);
    for (j, &a) in words.iter().enumerate() {
        for &m in &t_masks {
            near[(a ^ m) as usize * n_words + j / 64] |= 1 << (j % 64);
        }
    }
    let pair_masks = ball_masks(b, r_b);
    let row = |x: usize| &near[x * n_words..(x + 1) * n_words];
    let bad = (0..cube).into_par_iter().find_first(|&x| {
        let rx = row(x);
        pair_masks.iter().any(|&m| {
            let ry = row(x ^ m as usize);
            !rx.iter().zip(ry).any(|(a, b)| a & b != 0)
        })
    });
    Ok(bad.map(|x| {
        let rx = row(x);
        let m = pair_masks
            .iter()
            .find(|&&m| !rx.iter().zip(row(x ^ m as usize)).any(|(a, b)| a & b != 0))
            .unwrap();
        (x as u32, x as u32 ^ m)
    }))
}

/// Samples codes until one verifies.
pub fn build_inner_code(b: usize, r_b: usize, t_b: usize, seed: &Seed) -> Result<InnerCode> {
    check_dims(b, r_b, t_b)?;
    if t_b < r_b.div_ceil(2) {
        return Err(Error::param(format!(
            "radius {t_b} < ceil({r_b}/2): no word can cover a pair at distance {r_b}"
        )));
    }
    let budget = sampling_budget(b, r_b, t_b);
    let cube = 1u128 << b;
    if budget >= cube {
        // Covers by construction: for dist(x, y) <= r_b <= 2 t_b the word
        // halfway along a shortest path is within t_b of both.
        let mut code = InnerCode::full_cube(b, r_b, t_b)?;
        code.repr.budget = budget.min(u64::MAX as u128) as u64;
        code.repr.attempts = 1;
        return Ok(code);
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seed.derive(tags::ATTEMPT + attempt as u64).rng();
        let mut words: Vec<u32> = (0..budget).map(|_| rng.gen_range(0..cube as u32)).collect();
        words.sort_unstable();
        words.dedup();
        if verify_inner_code(&words, b, r_b, t_b)? {
            let mut code = InnerCode::from_words(b, r_b, t_b, words)?;
            code.repr.budget = budget as u64;
            code.repr.attempts = attempt + 1;
            return Ok(code);
        }
    }
    Err(Error::Construction {
        what: format!("inner code b={b} r={r_b} t={t_b}"),
        attempts: MAX_ATTEMPTS,
    })
}

/// Largest inner dimension accepted by [`greedy_inner_code`].
pub const MAX_GREEDY_DIM: usize = 12;

/// Deterministic lazy greedy set cover over all pairs at distance `<= r_b`.
pub fn greedy_inner_code(b: usize, r_b: usize, t_b: usize) -> Result<InnerCode> {
    check_dims(b, r_b, t_b)?;
    if b > MAX_GREEDY_DIM {
        return Err(Error::CostGuard(format!("greedy inner code limited to b <= {MAX_GREEDY_DIM}")));
    }
    if t_b < r_b.div_ceil(2) {
        return Err(Error::param(format!("radius {t_b} < ceil({r_b}/2)")));
    }
    let cube = 1usize << b;
    // Ordered pairs (x, x ^ m) for masks of weight 1..=r_b, or (x, x) when r_b = 0.
    let pair_masks: Vec<u32> = if r_b == 0 {
        vec![0]
    } else {
        ball_masks(b, r_b).into_iter().filter(|&m| m != 0).collect()
    };
    let mask_pos: std::collections::HashMap<u32, usize> =
        pair_masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let t_masks = ball_masks(b, t_b);
    let mut covered = vec![false; cube * pair_masks.len()];
    let mut remaining = covered.len();
    let t = t_b as u32;

    let gain = |a: u32, covered: &[bool]| -> usize {
        let mut g = 0;
        for &mz in &t_masks {
            let z = a ^ mz;
            for (k, &m) in pair_masks.iter().enumerate() {
                let y = z ^ m;
                if (y ^ a).count_ones() <= t && !covered[z as usize * pair_masks.len() + k] {
                    g += 1;
                }
            }
        }
        g
    };

    let mut heap: BinaryHeap<(usize, Reverse<u32>)> =
        (0..cube as u32).map(|a| (gain(a, &covered), Reverse(a))).collect();
    let mut words = Vec::new();
    while remaining > 0 {
        let (stale, Reverse(a)) = heap.pop().expect("full cube covers every pair");
        let g = gain(a, &covered);
        if g == 0 {
            continue;
        }
        if g < stale {
            heap.push((g, Reverse(a)));
            continue;
        }
        words.push(a);
        for &mz in &t_masks {
            let z = a ^ mz;
            for (k, &m) in pair_masks.iter().enumerate() {
                let y = z ^ m;
                if (y ^ a).count_ones() <= t {
                    let idx = z as usize * pair_masks.len() + k;
                    if !covered[idx] {
                        covered[idx] = true;
                        remaining -= 1;
                    }
                    let back = y as usize * pair_masks.len() + mask_pos[&m];
                    if !covered[back] {
                        covered[back] = true;
                        remaining -= 1;
                    }
                }
            }
        }
    }
    let mut code = InnerCode::from_words(b, r_b, t_b, words)?;
    code.repr.mode = InnerMode::Greedy;
    Ok(code)
}

/// `ceil(N / most pairs one word can cover)`: no code can be smaller.
pub fn size_lower_bound(b: usize, r_b: usize, t_b: usize) -> u128 {
    let per_word: u128 = (0..=r_b).map(|d| pairs_in_ball(b, d, t_b)).sum();
    let total = pair_count(b, r_b);
    if per_word == 0 {
        return u128::MAX;
    }
    total.div_ceil(per_word)
}

/// Ordered pairs `(z, y)` at distance exactly `d` with both inside a fixed radius-`t` ball.
fn pairs_in_ball(b: usize, d: usize, t: usize) -> u128 {
    let pairs = crate::oracle::bounds::binom(b as u64, d as u64).unwrap();
    ball_intersection_unguarded(b as u64, d as u64, t as i64) * pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitvec::BitVector;

    fn brute_covers(words: &[u32], b: usize, r: usize, t: usize) -> bool {
        let ws: Vec<BitVector> = words.iter().map(|&w| BitVector::from_u64(w as u64, b)).collect();
        for x in 0..1u64 << b {
            for y in 0..1u64 << b {
                let (xv, yv) = (BitVector::from_u64(x, b), BitVector::from_u64(y, b));
                if xv.dist(&yv) <= r && !ws.iter().any(|a| a.dist(&xv) <= t && a.dist(&yv) <= t) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn full_cube_examples() {
        let cube: Vec<u32> = (0..16).collect();
        assert!(verify_inner_code(&cube, 4, 2, 1).unwrap());
        assert!(verify_inner_code(&cube, 4, 0, 0).unwrap());
        let missing_one: Vec<u32> = (1..16).collect();
        assert!(!verify_inner_code(&missing_one, 4, 0, 0).unwrap());
        assert!(!verify_inner_code(&[0], 4, 2, 1).unwrap());
        assert_eq!(first_uncovered(&[0], 4, 2, 1).unwrap().map(|(x, y)| (x ^ y).count_ones() <= 2), Some(true));
        let code = build_inner_code(4, 0, 0, &Seed::new(1)).unwrap();
        assert_eq!(code.len(), 16);
        // Full cubes are accepted unverified; check that this is sound.
        for b in 1..=10 {
            for r in 0..=b {
                let cube: Vec<u32> = (0..1u32 << b).collect();
                assert!(verify_inner_code(&cube, b, r, r.div_ceil(2)).unwrap(), "b={b} r={r}");
            }
        }
    }

    #[test]
    fn verifier_matches_brute_force() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let b = rng.gen_range(1..=6);
            let r = rng.gen_range(0..=b);
            let t = rng.gen_range(0..=b);
            let n = rng.gen_range(1..=(1 << b));
            let words: Vec<u32> = (0..n).map(|_| rng.gen_range(0..1u32 << b)).collect();
            assert_eq!(
                verify_inner_code(&words, b, r, t).unwrap(),
                brute_covers(&words, b, r, t),
                "b={b} r={r} t={t} words={words:?}"
            );
        }
    }

    #[test]
    fn cost_guard_and_preconditions() {
        assert!(matches!(verify_inner_code(&[0], 17, 1, 8), Err(Error::CostGuard(_))));
        assert!(matches!(build_inner_code(6, 4, 1, &Seed::new(0)), Err(Error::Parameter(_))));
        assert!(InnerCode::from_words(3, 1, 1, vec![8]).is_err());
    }

    #[test]
    fn sampled_b6_against_greedy_oracle() {
        let (b, r, t) = (6, 2, 2);
        let greedy = greedy_inner_code(b, r, t).unwrap();
        assert!(greedy.verify().unwrap());
        assert!(brute_covers(greedy.words(), b, r, t));
        let lb = size_lower_bound(b, r, t);
        assert!(greedy.len() as u128 >= lb);
        for s in 0..10 {
            let code = build_inner_code(b, r, t, &Seed::new(s)).unwrap();
            assert!(code.verify().unwrap());
            assert!(code.len() as u128 >= lb);
            assert!(code.len() as u128 <= sampling_budget(b, r, t));
        }
    }

    #[test]
    fn sampling_succeeds_at_constant_rate() {
        // Single-attempt success rate over 100 seeds at the sampling budget.
        let cases = [(6usize, 2usize, 2usize), (8, 2, 3), (10, 3, 4)];
        for (b, r, t) in cases {
            let budget = sampling_budget(b, r, t);
            let mut ok = 0;
            for s in 0..100u64 {
                let mut rng = Seed::new(s).rng();
                let words: Vec<u32> = (0..budget).map(|_| rng.gen_range(0..1u32 << b)).collect();
                if verify_inner_code(&words, b, r, t).unwrap() {
                    ok += 1;
                }
            }
            assert!(ok >= 50, "b={b} r={r} t={t}: {ok}/100");
        }
    }

    #[test]
    fn near_lists() {
        let code = build_inner_code(8, 2, 3, &Seed::new(3)).unwrap();
        let mut out = Vec::new();
        for x in [0u32, 17, 255] {
            code.near(x, &mut out);
            let expected: Vec<u32> = (0..code.len() as u32)
                .filter(|&j| (code.words()[j as usize] ^ x).count_ones() <= 3)
                .collect();
            assert_eq!(out, expected);
            assert_eq!(code.near_count(x), expected.len());
        }
    }

    #[test]
    fn radii() {
        assert_eq!(inner_radius(16, 1.0), 6);
        assert_eq!(inner_radius_quarter(16, 1.0), 7);
        assert_eq!(inner_radius(4, 0.0), 2);
        assert_eq!(inner_radius(4, 10.0), 0);
    }

    #[test]
    fn serde_rebuilds_table() {
        let code = build_inner_code(6, 2, 2, &Seed::new(9)).unwrap();
        let bytes = bincode::serialize(&code).unwrap();
        let back: InnerCode = bincode::deserialize(&bytes).unwrap();
        assert_eq!(back, code);
    }
}
