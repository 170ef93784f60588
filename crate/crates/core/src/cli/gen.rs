//! Random datasets with planted near neighbours.
//!
//! Query `i` is derived from a uniformly chosen stored point: Hamming queries
//! flip exactly `r` coordinates, set queries keep `ceil(b1 w)` of the `w`
//! elements, and ℓ1 queries move by an ℓ1 step of length at most `r`.

use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::Rng;

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::formats::{write_truth, Dataset, TruthRow};
use crate::seed::{tags, Seed};
use crate::setpoint::{braun_blanquet, SetPoint};

/// Points, queries and the planted `(query, point, value)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub data: Dataset,
    pub queries: Dataset,
    pub truth: Vec<TruthRow>,
}

impl Generated {
    /// Writes `out`, `out.queries` and `out.truth`.
    pub fn write(&self, out: &Path) -> Result<()> {
        self.data.write_path(out)?;
        self.queries.write_path(&sidecar(out, "queries"))?;
        let file = std::fs::File::create(sidecar(out, "truth"))?;
        write_truth(std::io::BufWriter::new(file), &self.truth)
    }
}

pub fn sidecar(out: &Path, ext: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn streams(seed: &Seed) -> (rand_chacha::ChaCha8Rng, rand_chacha::ChaCha8Rng) {
    let root = seed.derive(tags::GEN);
    (root.derive(0).rng(), root.derive(1).rng())
}

pub fn planted_hamming(n: usize, d: usize, r: usize, queries: usize, seed: &Seed) -> Result<Generated> {
    if n == 0 || d == 0 || r > d {
        return Err(Error::param(format!("need n, d >= 1 and r <= d, got n = {n}, d = {d}, r = {r}")));
    }
    let (mut prng, mut qrng) = streams(seed);
    let points: Vec<BitVector> = (0..n).map(|_| BitVector::random(d, &mut prng)).collect();
    let mut qs = Vec::with_capacity(queries);
    let mut truth = Vec::with_capacity(queries);
    for i in 0..queries {
        let target = qrng.gen_range(0..n);
        let mut q = points[target].clone();
        for j in sample(&mut qrng, d, r) {
            q.flip(j);
        }
        truth.push(TruthRow { query: i, point: target, value: r as f64 });
        qs.push(q);
    }
    Ok(Generated {
        data: Dataset::Hamming { d, points },
        queries: Dataset::Hamming { d, points: qs },
        truth,
    })
}

/// Elements a planted set query shares with its target.
pub fn shared_elements(w: usize, b1: f64) -> usize {
    ((b1 * w as f64) - 1e-9).ceil().max(0.0) as usize
}

pub fn planted_sets(n: usize, d: usize, w: usize, b1: f64, queries: usize, seed: &Seed) -> Result<Generated> {
    if !(0.0 < b1 && b1 <= 1.0) {
        return Err(Error::param(format!("need 0 < b1 <= 1, got {b1}")));
    }
    let keep = shared_elements(w, b1);
    if n == 0 || w == 0 || d < 2 * w - keep {
        return Err(Error::param(format!("need n, w >= 1 and d >= 2w - ceil(b1 w), got n = {n}, d = {d}, w = {w}")));
    }
    let (mut prng, mut qrng) = streams(seed);
    let random_set = |rng: &mut rand_chacha::ChaCha8Rng| {
        let mut e: Vec<u32> = sample(rng, d, w).into_iter().map(|x| x as u32).collect();
        e.sort_unstable();
        SetPoint::from_sorted(d, e)
    };
    let points: Vec<SetPoint> = (0..n).map(|_| random_set(&mut prng)).collect();
    let mut qs = Vec::with_capacity(queries);
    let mut truth = Vec::with_capacity(queries);
    for i in 0..queries {
        let target = qrng.gen_range(0..n);
        let t = points[target].elements();
        let mut e: Vec<u32> = sample(&mut qrng, w, keep).into_iter().map(|j| t[j]).collect();
        let outside: Vec<u32> = (0..d as u32).filter(|x| !points[target].contains(*x)).collect();
        e.extend(sample(&mut qrng, outside.len(), w - keep).into_iter().map(|j| outside[j]));
        let q = SetPoint::new(d, e)?;
        let value = braun_blanquet(&points[target], &q)?.value();
        truth.push(TruthRow { query: i, point: target, value });
        qs.push(q);
    }
    Ok(Generated {
        data: Dataset::Sets { d, points },
        queries: Dataset::Sets { d, points: qs },
        truth,
    })
}

/// Points uniform in `[0, 100 r)^d`.
pub fn planted_l1(n: usize, d: usize, r: f64, queries: usize, seed: &Seed) -> Result<Generated> {
    if n == 0 || d == 0 || !(r > 0.0) {
        return Err(Error::param(format!("need n, d >= 1 and r > 0, got n = {n}, d = {d}, r = {r}")));
    }
    let (mut prng, mut qrng) = streams(seed);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| prng.gen_range(0.0..100.0 * r)).collect())
        .collect();
    let mut qs = Vec::with_capacity(queries);
    let mut truth = Vec::with_capacity(queries);
    for i in 0..queries {
        let target = qrng.gen_range(0..n);
        let weights: Vec<f64> = (0..d).map(|_| qrng.gen_range(0.0..1.0f64)).collect();
        let total: f64 = weights.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        let len = r * qrng.gen_range(0.0..=1.0);
        let q: Vec<f64> = points[target]
            .iter()
            .zip(&weights)
            .map(|(&x, &wt)| {
                let step = len * wt / total;
                if qrng.gen_bool(0.5) { x + step } else { x - step }
            })
            .collect();
        let value: f64 = q.iter().zip(&points[target]).map(|(a, b)| (a - b).abs()).sum();
        truth.push(TruthRow { query: i, point: target, value });
        qs.push(q);
    }
    Ok(Generated {
        data: Dataset::L1 { d, points },
        queries: Dataset::L1 { d, points: qs },
        truth,
    })
}
