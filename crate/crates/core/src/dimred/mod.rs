//! One-sided dimensionality reductions for Hamming space and an ℓ1 embedding.

pub mod l1;
pub mod partition;
pub mod xor;

use serde::{Deserialize, Serialize};

use crate::bitvec::BitVector;
use crate::error::{check_dim, Result};

pub use l1::{build_l1_embedding, build_l1_embedding_with_mode, unary, CellMode, Embedded, L1Embedding};
pub use partition::{build_partition_reduction, partition_block, PartitionReduction};
pub use xor::{build_xor_reduction, xor_sizes, XorLayout, XorReduction};

pub fn apply_xor(red: &XorReduction, x: &BitVector) -> Result<Vec<BitVector>> {
    red.apply(x)
}

pub fn apply_partition(red: &PartitionReduction, x: &BitVector) -> Result<Vec<BitVector>> {
    red.apply(x)
}

pub fn embed_point(emb: &L1Embedding, x: &[f64]) -> Result<Embedded> {
    emb.embed_point(x)
}

/// A reduction from `{0,1}^d` to `S` functions into `{0,1}^B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HammingReduction {
    Xor(XorReduction),
    Partition(PartitionReduction),
}

impl HammingReduction {
    pub fn input_dim(&self) -> usize {
        match self {
            HammingReduction::Xor(r) => r.input_dim(),
            HammingReduction::Partition(r) => r.input_dim(),
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            HammingReduction::Xor(r) => r.outputs(),
            HammingReduction::Partition(r) => r.outputs(),
        }
    }

    pub fn block(&self) -> usize {
        match self {
            HammingReduction::Xor(r) => r.block(),
            HammingReduction::Partition(r) => r.block(),
        }
    }

    pub fn apply(&self, x: &BitVector) -> Result<Vec<BitVector>> {
        match self {
            HammingReduction::Xor(r) => r.apply(x),
            HammingReduction::Partition(r) => r.apply(x),
        }
    }

    pub fn apply_block(&self, i: usize, x: &BitVector) -> Result<BitVector> {
        match self {
            HammingReduction::Xor(r) => r.apply_block(i, x),
            HammingReduction::Partition(r) => {
                check_dim(r.input_dim(), x.len())?;
                Ok(r.apply_block(i, x))
            }
        }
    }

    pub fn contraction(&self) -> (usize, usize) {
        match self {
            HammingReduction::Xor(r) => r.contraction(),
            HammingReduction::Partition(r) => r.contraction(),
        }
    }

    /// Radius that one of the outputs of every pair at distance `<= r` falls within.
    pub fn near_radius(&self, r: usize) -> usize {
        let (num, den) = self.contraction();
        r * num / den
    }
}

/// Property 1: some output pair is at distance `<= dist(x, y) * num / den`.
pub fn contraction_holds(fx: &[BitVector], fy: &[BitVector], dist: usize, (num, den): (usize, usize)) -> bool {
    fx.iter().zip(fy).any(|(a, b)| a.dist(b) * den <= dist * num)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Seed;
    use proptest::prelude::*;

    fn reductions() -> Vec<HammingReduction> {
        vec![
            HammingReduction::Xor(XorReduction::with_block(300, 10, 2.0, 0.5, 0.01, 16, &Seed::new(1)).unwrap()),
            HammingReduction::Xor(XorReduction::with_block(300, 10, 2.0, 0.5, 0.01, 100, &Seed::new(2)).unwrap()),
            HammingReduction::Partition(PartitionReduction::with_block(300, 16, &Seed::new(3)).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn one_sided_property(seed in any::<u64>(), flips in prop::collection::vec(0usize..300, 0..120)) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = BitVector::random(300, &mut rng);
            let mut y = x.clone();
            for f in flips {
                y.flip(f);
            }
            let dist = x.dist(&y);
            for red in reductions() {
                let fx = red.apply(&x).unwrap();
                let fy = red.apply(&y).unwrap();
                prop_assert_eq!(fx.len(), red.outputs());
                prop_assert!(fx.iter().all(|v| v.len() == red.block()));
                prop_assert!(contraction_holds(&fx, &fy, dist, red.contraction()));
                let best = fx.iter().zip(&fy).map(|(a, b)| a.dist(b)).min().unwrap();
                prop_assert!(best <= red.near_radius(dist));
            }
        }
    }
}
