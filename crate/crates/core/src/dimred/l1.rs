//! Embedding ℓ1 into Hamming space with deterministic distortion bounds.
//!
//! 1. A grid of side `L = 2r(n+1)` is shifted per dimension so every stored
//!    point is more than `r` from a cell boundary; points within `r` of a
//!    stored point therefore share its cell.
//! 2. Local coordinates are scaled by `s = d / (2 e r)` with `e = ε/4` and
//!    rounded, moving any pair distance by at most `ε r / 2`.
//! 3. Each scaled coordinate `v` becomes `⟨⌊v/R⌋, ⌊(v+1)/R⌋, …, ⌊(v+R-1)/R⌋⟩`
//!    with `R = ⌈c r s⌉`, whose Hamming distance is exactly `min(|v1-v2|, R)`.
//! 4. Each symbol is replaced by a word of a random code whose pairwise
//!    distances are verified to lie in `(1 ± ε/3) k / 2`.
//!
//! With `U = s k / 2`, pairs at ℓ1 distance `<= r` land within `(1+ε) r U`
//! and same-cell pairs at distance `>= cr` at least `(1-ε) c r U` apart.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitvec::BitVector;
use crate::error::{check_dim, Error, Result};
use crate::seed::{tags, Seed};

pub const MAX_ATTEMPTS: usize = 64;
/// Largest number of code words whose pairwise distances are verified.
pub const MAX_CODE_WORDS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellMode {
    /// Cells are kept apart by the caller (one structure per cell).
    Separate,
    /// Each embedding is prefixed with `R` copies of a per-cell code word.
    Prefix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Embedding {
    d: usize,
    r: f64,
    c: f64,
    eps: f64,
    side: f64,
    offsets: Vec<f64>,
    scale: f64,
    max_coord: u64,
    unary_len: usize,
    alphabet: usize,
    code_len: usize,
    code: Vec<BitVector>,
    mode: CellMode,
    /// Sorted cells holding stored points (prefix mode only).
    cells: Vec<Vec<i64>>,
    attempts: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedded {
    pub cell: Vec<i64>,
    pub bits: BitVector,
}

/// `h(v) = ⟨⌊v/R⌋, ⌊(v+1)/R⌋, …, ⌊(v+R-1)/R⌋⟩`.
pub fn unary(v: u64, r: usize) -> Vec<u64> {
    (0..r as u64).map(|j| (v + j) / r as u64).collect()
}

/// Offset in `[0, side)` at the middle of the largest cyclic gap between
/// the coordinates taken modulo `side`.
pub fn sweep_offset(coords: &[f64], side: f64) -> f64 {
    if coords.is_empty() {
        return 0.0;
    }
    let mut pos: Vec<f64> = coords.iter().map(|x| x.rem_euclid(side)).collect();
    pos.sort_by(f64::total_cmp);
    let mut best = (side - pos[pos.len() - 1] + pos[0], pos[pos.len() - 1]);
    for w in pos.windows(2) {
        let gap = w[1] - w[0];
        if gap > best.0 {
            best = (gap, w[0]);
        }
    }
    (best.1 + best.0 / 2.0).rem_euclid(side)
}

pub fn build_l1_embedding(
    points: &[Vec<f64>],
    d: usize,
    r: f64,
    c: f64,
    eps: f64,
    seed: &Seed,
) -> Result<L1Embedding> {
    build_l1_embedding_with_mode(points, d, r, c, eps, CellMode::Separate, seed)
}

pub fn build_l1_embedding_with_mode(
    points: &[Vec<f64>],
    d: usize,
    r: f64,
    c: f64,
    eps: f64,
    mode: CellMode,
    seed: &Seed,
) -> Result<L1Embedding> {
    if points.is_empty() {
        return Err(Error::param("embedding needs at least one point"));
    }
    if d == 0 || !(r > 0.0) || !(c >= 1.0) || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!(
            "need d >= 1, r > 0, c >= 1, 0 < ε < 1; got d = {d}, r = {r}, c = {c}, ε = {eps}"
        )));
    }
    for p in points {
        check_dim(d, p.len())?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("non-finite coordinate"));
        }
    }
    let n = points.len();
    let side = 2.0 * r * (n as f64 + 1.0);
    let offsets: Vec<f64> = (0..d)
        .map(|i| {
            let coords: Vec<f64> = points.iter().map(|p| p[i]).collect();
            sweep_offset(&coords, side)
        })
        .collect();
    let round_eps = eps / 4.0;
    let code_eps = eps / 3.0;
    let scale = d as f64 / (2.0 * round_eps * r);
    let max_coord = (side * scale).ceil() as u64;
    let unary_len = (c * r * scale - 1e-9).ceil() as usize;
    let alphabet = ((max_coord + unary_len as u64 - 1) / unary_len as u64 + 1) as usize;
    let code_len = (4.0 / (code_eps * code_eps) * (4.0 * n as f64).ln()).ceil() as usize;

    let mut emb = L1Embedding {
        d,
        r,
        c,
        eps,
        side,
        offsets,
        scale,
        max_coord,
        unary_len,
        alphabet,
        code_len,
        code: Vec::new(),
        mode,
        cells: Vec::new(),
        attempts: 0,
    };
    for p in points {
        let cell = emb.cell_of(p);
        for (i, &k) in cell.iter().enumerate() {
            let local = p[i] - emb.offsets[i] - k as f64 * side;
            let clearance = local.min(side - local);
            if clearance <= r {
                return Err(Error::Verification(format!(
                    "grid offset leaves clearance {clearance} <= r in dimension {i}"
                )));
            }
        }
        if mode == CellMode::Prefix {
            emb.cells.push(cell);
        }
    }
    emb.cells.sort();
    emb.cells.dedup();
    // One extra word stands for every cell without stored points.
    let words = match mode {
        CellMode::Separate => alphabet,
        CellMode::Prefix => alphabet + emb.cells.len() + 1,
    };
    let (code, attempts) = build_distance_code(words, code_len, code_eps, &seed.derive(tags::L1_CODE))?;
    emb.code = code;
    emb.attempts = attempts;
    Ok(emb)
}

/// Random code of `words` words of length `k` with all pairwise distances
/// in `[(1-e)k/2, (1+e)k/2]`, by rejection sampling.
pub fn build_distance_code(words: usize, k: usize, e: f64, seed: &Seed) -> Result<(Vec<BitVector>, usize)> {
    if words > MAX_CODE_WORDS {
        return Err(Error::CostGuard(format!(
            "distance code with {words} words (limit {MAX_CODE_WORDS})"
        )));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seed.derive(tags::ATTEMPT + attempt as u64).rng();
        let code: Vec<BitVector> = (0..words).map(|_| BitVector::random(k, &mut rng)).collect();
        if verify_distance_code(&code, e) {
            return Ok((code, attempt + 1));
        }
    }
    Err(Error::Construction {
        what: format!("distance code ({words} words, length {k})"),
        attempts: MAX_ATTEMPTS,
    })
}

pub fn verify_distance_code(code: &[BitVector], e: f64) -> bool {
    let Some(k) = code.first().map(|w| w.len()) else {
        return true;
    };
    let lo = (1.0 - e) * k as f64 / 2.0;
    let hi = (1.0 + e) * k as f64 / 2.0;
    (0..code.len()).into_par_iter().all(|i| {
        code[i + 1..].iter().all(|w| {
            let dist = code[i].dist(w) as f64;
            lo <= dist && dist <= hi
        })
    })
}

impl L1Embedding {
    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Multiplier applied to coordinates before rounding.
    pub fn coordinate_scale(&self) -> f64 {
        self.scale
    }

    /// Largest scaled coordinate `M`.
    pub fn max_coord(&self) -> u64 {
        self.max_coord
    }

    /// Unary length `R`.
    pub fn unary_len(&self) -> usize {
        self.unary_len
    }

    pub fn code_len(&self) -> usize {
        self.code_len
    }

    pub fn code(&self) -> &[BitVector] {
        &self.code
    }

    pub fn mode(&self) -> CellMode {
        self.mode
    }

    pub fn attempts(&self) -> usize {
        self.attempts
    }

    /// Output length in bits.
    pub fn output_len(&self) -> usize {
        let prefix = if self.mode == CellMode::Prefix { self.unary_len } else { 0 };
        (prefix + self.d * self.unary_len) * self.code_len
    }

    /// Hamming units per unit of ℓ1 distance: `U = s k / 2`.
    pub fn unit(&self) -> f64 {
        self.scale * self.code_len as f64 / 2.0
    }

    /// Embedded pairs at ℓ1 distance `<= r` are at most this far apart.
    pub fn near_bound(&self) -> f64 {
        (1.0 + self.eps) * self.r * self.unit()
    }

    /// Same-cell pairs at ℓ1 distance `>= cr` are at least this far apart.
    pub fn far_bound(&self) -> f64 {
        (1.0 - self.eps) * self.c * self.r * self.unit()
    }

    pub fn cell_of(&self, x: &[f64]) -> Vec<i64> {
        x.iter()
            .zip(&self.offsets)
            .map(|(&v, &o)| ((v - o) / self.side).floor() as i64)
            .collect()
    }

    /// Scaled, rounded local coordinates.
    pub fn scaled(&self, x: &[f64]) -> Result<(Vec<i64>, Vec<u64>)> {
        check_dim(self.d, x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("non-finite coordinate"));
        }
        let cell = self.cell_of(x);
        let v = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                let local = xi - self.offsets[i] - cell[i] as f64 * self.side;
                ((local * self.scale).round().max(0.0) as u64).min(self.max_coord)
            })
            .collect();
        Ok((cell, v))
    }

    pub fn embed_point(&self, x: &[f64]) -> Result<Embedded> {
        let (cell, v) = self.scaled(x)?;
        let k = self.code_len;
        let mut parts = Vec::with_capacity(self.output_len() / k.max(1));
        if self.mode == CellMode::Prefix {
            let idx = match self.cells.binary_search(&cell) {
                Ok(i) => self.alphabet + i,
                Err(_) => self.alphabet + self.cells.len(),
            };
            parts.extend(std::iter::repeat(self.code[idx].clone()).take(self.unary_len));
        }
        for &vi in &v {
            for sym in unary(vi, self.unary_len) {
                parts.push(self.code[sym as usize].clone());
            }
        }
        Ok(Embedded {
            cell,
            bits: BitVector::concat(&parts),
        })
    }

    /// Hamming distance of two embeddings; `None` when separate-mode cells differ.
    pub fn distance(&self, a: &Embedded, b: &Embedded) -> Option<usize> {
        if self.mode == CellMode::Separate && a.cell != b.cell {
            return None;
        }
        Some(a.bits.dist(&b.bits))
    }
}
