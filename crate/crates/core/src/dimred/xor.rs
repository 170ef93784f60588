//! Xor-bucketing reduction.
//!
//! Coordinates are thrown into `m` buckets by a random `h : [d] -> [m]`;
//! `g(x)_i` is the parity of `x` over bucket `i`. Parities never increase
//! distances, and `g(x)` is cut into `S = m / B` consecutive blocks, so the
//! block distances sum to at most `dist(x, y)` and one of them is at most
//! `dist(x, y) / S`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitvec::BitVector;
use crate::error::{check_dim, Error, Result};
use crate::seed::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum XorLayout {
    /// `B >= d`: each output is the input itself.
    Identity,
    /// `m <= B < d`: one output, `g(x)` repeated `copies` times.
    Replicated { copies: usize },
    /// `B < m`: `S = m / B` consecutive blocks of `g(x)`.
    Blocks,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XorReduction {
    d: usize,
    m: usize,
    block: usize,
    outputs: usize,
    layout: XorLayout,
    /// Requested and effective (after rounding `m`) values of ε.
    eps: f64,
    eps_adjusted: f64,
    delta: f64,
    bucket: Vec<u32>,
}

/// `(m, B)` before rounding: `m = ceil(3cr/ε)`, `B = ceil(27 ε^-3 ln(1/δ))`.
pub fn xor_sizes(r: usize, c: f64, eps: f64, delta: f64) -> (usize, usize) {
    let cr = c * r as f64;
    let m = (3.0 * cr / eps - 1e-9).ceil() as usize;
    let b = (27.0 / eps.powi(3) * (1.0 / delta).ln() - 1e-9).ceil() as usize;
    (m.max(1), b.max(1))
}

pub fn build_xor_reduction(
    d: usize,
    r: usize,
    c: f64,
    eps: f64,
    delta: f64,
    seed: &Seed,
) -> Result<XorReduction> {
    check_params(d, r, c)?;
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("need 0 < ε, δ < 1, got ε = {eps}, δ = {delta}")));
    }
    let (m, block) = xor_sizes(r, c, eps, delta);
    if 1.0 / delta < m as f64 - 1e-9 {
        return Err(Error::param(format!("1/δ = {} is below m = {m}", 1.0 / delta)));
    }
    XorReduction::with_block(d, r, c, eps, delta, block, seed)
}

fn check_params(d: usize, r: usize, c: f64) -> Result<()> {
    if r < 1 || !(c > 1.0) || c * r as f64 > d as f64 + 1e-9 {
        return Err(Error::param(format!(
            "need d >= cr > r >= 1, got d = {d}, r = {r}, c = {c}"
        )));
    }
    Ok(())
}

impl XorReduction {
    /// Reduction with a caller-chosen block length; `m = ceil(3cr/ε)` is
    /// rounded up to a multiple of `block`.
    pub fn with_block(
        d: usize,
        r: usize,
        c: f64,
        eps: f64,
        delta: f64,
        block: usize,
        seed: &Seed,
    ) -> Result<XorReduction> {
        check_params(d, r, c)?;
        if block == 0 {
            return Err(Error::param("block length must be positive"));
        }
        let (m, _) = xor_sizes(r, c, eps, delta);
        let cr = c * r as f64;
        if block >= d {
            return Ok(XorReduction {
                d,
                m: d,
                block: d,
                outputs: 1,
                layout: XorLayout::Identity,
                eps,
                eps_adjusted: eps,
                delta,
                bucket: (0..d as u32).collect(),
            });
        }
        let (m_eff, outputs, layout, out_block) = if block >= m {
            let copies = block.div_ceil(m);
            (m, 1, XorLayout::Replicated { copies }, copies * m)
        } else {
            let s = m.div_ceil(block);
            (s * block, s, XorLayout::Blocks, block)
        };
        let mut rng = seed.rng();
        let bucket = (0..d).map(|_| rng.gen_range(0..m_eff as u32)).collect();
        Ok(XorReduction {
            d,
            m: m_eff,
            block: out_block,
            outputs,
            layout,
            eps,
            eps_adjusted: (3.0 * cr / m_eff as f64).min(eps),
            delta,
            bucket,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    /// Number of buckets after rounding.
    pub fn buckets(&self) -> usize {
        self.m
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn layout(&self) -> XorLayout {
        self.layout
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eps_adjusted(&self) -> f64 {
        self.eps_adjusted
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn bucket_map(&self) -> &[u32] {
        &self.bucket
    }

    /// The full parity vector `g(x)` of length `m`.
    pub fn parity(&self, x: &BitVector) -> Result<BitVector> {
        check_dim(self.d, x.len())?;
        let mut g = BitVector::zeros(self.m);
        for j in x.ones_iter() {
            g.flip(self.bucket[j] as usize);
        }
        Ok(g)
    }

    /// Output `i` alone.
    pub fn apply_block(&self, i: usize, x: &BitVector) -> Result<BitVector> {
        let g = self.parity(x)?;
        Ok(match self.layout {
            XorLayout::Identity => g,
            XorLayout::Replicated { copies } => BitVector::concat(&vec![g; copies]),
            XorLayout::Blocks => {
                let idx: Vec<usize> = (i * self.block..(i + 1) * self.block).collect();
                g.gather(&idx)
            }
        })
    }

    pub fn apply(&self, x: &BitVector) -> Result<Vec<BitVector>> {
        let g = self.parity(x)?;
        Ok(match self.layout {
            XorLayout::Identity => vec![g],
            XorLayout::Replicated { copies } => vec![BitVector::concat(&vec![g; copies])],
            XorLayout::Blocks => (0..self.outputs)
                .map(|i| {
                    let idx: Vec<usize> = (i * self.block..(i + 1) * self.block).collect();
                    g.gather(&idx)
                })
                .collect(),
        })
    }

    /// Lower bound that each block distance of a pair at distance `>= cr`
    /// exceeds with probability at least `1 - δ`.
    pub fn far_bound(&self, cr: f64) -> f64 {
        (1.0 - self.eps_adjusted) * cr * self.block as f64 / self.m as f64
    }

    /// `(num, den)` with `min_i dist(f_i(x), f_i(y)) <= dist(x, y) * num / den` for all `x, y`.
    pub fn contraction(&self) -> (usize, usize) {
        (self.block, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn sample_red() -> XorReduction {
        build_xor_reduction(2048, 150, 2.0, 0.9, 1.0 / 1024.0, &Seed::new(3)).unwrap()
    }

    #[test]
    fn sizes_and_layout() {
        let red = sample_red();
        assert_eq!(xor_sizes(150, 2.0, 0.9, 1.0 / 1024.0), (1000, 257));
        assert_eq!(red.layout(), XorLayout::Blocks);
        assert_eq!((red.block(), red.outputs(), red.buckets()), (257, 4, 1028));
        assert!(red.eps_adjusted() <= red.eps());
    }

    #[test]
    fn identity_when_block_covers_input() {
        let red = build_xor_reduction(256, 16, 2.0, 0.5, 1e-3, &Seed::new(1)).unwrap();
        assert_eq!(red.layout(), XorLayout::Identity);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let x = BitVector::random(256, &mut rng);
        assert_eq!(red.apply(&x).unwrap(), vec![x]);
    }

    #[test]
    fn replicated_layout() {
        let red = XorReduction::with_block(512, 8, 2.0, 0.5, 0.01, 120, &Seed::new(2)).unwrap();
        assert_eq!(red.layout(), XorLayout::Replicated { copies: 2 });
        assert_eq!(red.block(), 192);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let x = BitVector::random(512, &mut rng);
            let y = BitVector::random(512, &mut rng);
            let (num, den) = red.contraction();
            let fx = red.apply(&x).unwrap();
            let fy = red.apply(&y).unwrap();
            assert!(fx[0].dist(&fy[0]) * den <= x.dist(&y) * num);
        }
    }

    #[test]
    fn zeros_and_single_coordinate() {
        let red = sample_red();
        for out in red.apply(&BitVector::zeros(2048)).unwrap() {
            assert_eq!(out.weight(), 0);
        }
        for j in [0usize, 77, 2047] {
            let mut x = BitVector::zeros(2048);
            x.set(j, true);
            let outs = red.apply(&x).unwrap();
            let bucket = red.bucket_map()[j] as usize;
            for (i, o) in outs.iter().enumerate() {
                let expected = usize::from(bucket / red.block() == i);
                assert_eq!(o.weight(), expected);
            }
        }
    }

    #[test]
    fn parity_never_expands() {
        let red = sample_red();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let x = BitVector::random(2048, &mut rng);
            let mut y = x.clone();
            for _ in 0..rng.gen_range(0..400) {
                y.flip(rng.gen_range(0..2048));
            }
            let d = x.dist(&y);
            assert!(red.parity(&x).unwrap().dist(&red.parity(&y).unwrap()) <= d);
            let fx = red.apply(&x).unwrap();
            let fy = red.apply(&y).unwrap();
            let min = fx.iter().zip(&fy).map(|(a, b)| a.dist(b)).min().unwrap();
            assert!(min * red.outputs() <= d);
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(build_xor_reduction(20, 16, 2.0, 0.5, 1e-3, &Seed::new(0)).is_err());
        assert!(build_xor_reduction(256, 16, 2.0, 0.5, 0.5, &Seed::new(0)).is_err());
        assert!(build_xor_reduction(256, 0, 2.0, 0.5, 1e-3, &Seed::new(0)).is_err());
        assert!(build_xor_reduction(256, 4, 1.0, 0.5, 1e-3, &Seed::new(0)).is_err());
        let red = sample_red();
        assert!(red.apply(&BitVector::zeros(10)).is_err());
    }
}
