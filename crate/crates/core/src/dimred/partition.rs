//! Permutation partitioning.
//!
//! The coordinates are shuffled and cut into `S` consecutive blocks of
//! length `B`. The block distances sum to `dist(x, y)`, so one of them is at
//! most `dist(x, y) / S`. When `B` does not divide `d`, the input is padded
//! with zero coordinates that are shuffled along with the real ones.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bitvec::BitVector;
use crate::error::{check_dim, Error, Result};
use crate::seed::Seed;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReduction {
    d: usize,
    block: usize,
    outputs: usize,
    /// `position[k]` is the input coordinate placed at output position `k`,
    /// or `u32::MAX` for a padding coordinate.
    position: Vec<u32>,
}

/// `B = ceil(2 ε^-2 (d / (cr)) ln n)`.
pub fn partition_block(d: usize, r: usize, c: f64, eps: f64, n: usize) -> usize {
    let b = 2.0 / (eps * eps) * (d as f64 / (c * r as f64)) * (n.max(2) as f64).ln();
    (b - 1e-9).ceil().max(1.0) as usize
}

pub fn build_partition_reduction(
    d: usize,
    r: usize,
    c: f64,
    eps: f64,
    n: usize,
    seed: &Seed,
) -> Result<PartitionReduction> {
    if r < 1 || r > d || !(c > 1.0) || !(eps > 0.0) {
        return Err(Error::param(format!(
            "need d >= r >= 1, c > 1, ε > 0; got d = {d}, r = {r}, c = {c}, ε = {eps}"
        )));
    }
    let block = partition_block(d, r, c, eps, n);
    if block > d {
        return Err(Error::param(format!("block length {block} exceeds dimension {d}")));
    }
    PartitionReduction::with_block(d, block, seed)
}

impl PartitionReduction {
    /// `ceil(d / block)` blocks over a random shuffle of the padded input.
    pub fn with_block(d: usize, block: usize, seed: &Seed) -> Result<PartitionReduction> {
        if block == 0 || d == 0 {
            return Err(Error::param("dimension and block length must be positive"));
        }
        let outputs = d.div_ceil(block);
        let padded = outputs * block;
        let mut position: Vec<u32> = (0..padded)
            .map(|k| if k < d { k as u32 } else { u32::MAX })
            .collect();
        position.shuffle(&mut seed.rng());
        Ok(PartitionReduction {
            d,
            block,
            outputs,
            position,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn padded_dim(&self) -> usize {
        self.position.len()
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Input coordinates of block `i`, in output order (`u32::MAX` = padding).
    pub fn block_coordinates(&self, i: usize) -> &[u32] {
        &self.position[i * self.block..(i + 1) * self.block]
    }

    pub fn apply_block(&self, i: usize, x: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.block);
        for (k, &p) in self.block_coordinates(i).iter().enumerate() {
            if p != u32::MAX && x.get(p as usize) {
                out.set(k, true);
            }
        }
        out
    }

    pub fn apply(&self, x: &BitVector) -> Result<Vec<BitVector>> {
        check_dim(self.d, x.len())?;
        Ok((0..self.outputs).map(|i| self.apply_block(i, x)).collect())
    }

    /// Lower bound each block distance of a pair at distance `>= cr` exceeds
    /// with probability at least `1 - 1/n`.
    pub fn far_bound(&self, cr: f64, eps: f64) -> f64 {
        (1.0 - eps) * cr * self.block as f64 / self.padded_dim() as f64
    }

    /// `(num, den)` with `min_i dist(f_i(x), f_i(y)) <= dist(x, y) * num / den`.
    pub fn contraction(&self) -> (usize, usize) {
        (self.block, self.padded_dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn blocks_partition_the_input() {
        let red = PartitionReduction::with_block(100, 16, &Seed::new(4)).unwrap();
        assert_eq!((red.outputs(), red.padded_dim()), (7, 112));
        let mut seen: Vec<u32> = (0..red.outputs())
            .flat_map(|i| red.block_coordinates(i).to_vec())
            .filter(|&p| p != u32::MAX)
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..100).collect::<Vec<u32>>());
    }

    #[test]
    fn distances_add_up() {
        let red = PartitionReduction::with_block(256, 40, &Seed::new(5)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = BitVector::random(256, &mut rng);
            let mut y = x.clone();
            for _ in 0..rng.gen_range(0..80) {
                y.flip(rng.gen_range(0..256));
            }
            let fx = red.apply(&x).unwrap();
            let fy = red.apply(&y).unwrap();
            let dists: Vec<usize> = fx.iter().zip(&fy).map(|(a, b)| a.dist(b)).collect();
            assert_eq!(dists.iter().sum::<usize>(), x.dist(&y));
            let (num, den) = red.contraction();
            assert!(dists.iter().min().unwrap() * den <= x.dist(&y) * num);
            if x == y {
                assert!(dists.iter().all(|&d| d == 0));
            }
        }
    }

    #[test]
    fn block_length_formula() {
        let b = partition_block(256, 16, 2.0, 0.5, 4096);
        let expected = 2.0 / 0.25 * (256.0 / 32.0) * 4096f64.ln();
        assert_eq!(b, expected.ceil() as usize);
        assert!(build_partition_reduction(256, 16, 2.0, 0.5, 4096, &Seed::new(0)).is_err());
        let red = build_partition_reduction(4096, 512, 2.0, 0.5, 4096, &Seed::new(0)).unwrap();
        assert_eq!(red.block(), partition_block(4096, 512, 2.0, 0.5, 4096));
        assert!(red.apply(&BitVector::zeros(5)).is_err());
    }
}
