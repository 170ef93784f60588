//! Efficiently decodable Turán systems: families of `r`-subsets ("blocks")
//! of `[n]` such that every `k`-subset contains a block.
//!
//! Built in four stages: a sampled base system, scaled with splitters,
//! extended to a large universe with perfect hashing and finally with a
//! random partition.

pub mod params;
pub mod phf;
pub mod system;

use std::io::{BufRead, Write};

pub use params::{turan_params, RoundDir, TuranParams};
pub use phf::{build_perfect_hash_family, sample_perfect_hash_family, PerfectHashFamily, PhfKind};
pub use system::{
    build_base_system, build_turan, build_turan_with, combinations, hash_extend, hash_extend_with,
    partition_extend, random_subset, splitter_scale, verify_system, Block, Stage, TuranBuild, TuranOptions, TuranSystem,
};

use crate::error::{Error, Result};
use crate::seed::splitmix;

/// 128-bit identifier of a block; collisions only merge buckets.
pub fn block_id(block: &[u32]) -> u128 {
    let (mut hi, mut lo) = (0x243f_6a88_85a3_08d3u64, 0x1319_8a2e_0370_7344u64);
    for &x in block {
        hi = splitmix(hi ^ x as u64);
        lo = splitmix(lo.wrapping_add(hi) ^ (x as u64).rotate_left(32));
    }
    (hi as u128) << 64 | lo as u128
}

/// `turan n=<n> k=<k> r=<r>` followed by one sorted block per line.
pub fn write_dump(w: &mut impl Write, n: usize, k: usize, r: usize, blocks: &[Block]) -> Result<()> {
    writeln!(w, "turan n={n} k={k} r={r}")?;
    for b in blocks {
        let line: Vec<String> = b.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_dump(rd: impl BufRead) -> Result<(usize, usize, usize, Vec<Block>)> {
    let mut lines = rd.lines();
    let header = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })??;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("turan") {
        return Err(Error::Parse { line: 1, msg: format!("expected `turan` header, got {header:?}") });
    }
    let mut get = |name: &str| -> Result<usize> {
        fields
            .next()
            .and_then(|f| f.strip_prefix(name))
            .and_then(|v| v.parse().ok())
            .ok_or(Error::Parse { line: 1, msg: format!("missing {name}<value>") })
    };
    let (n, k, r) = (get("n=")?, get("k=")?, get("r=")?);
    let mut blocks = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let block: Block = line
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: i + 2, msg: e.to_string() })?;
        if block.len() != r || block.iter().any(|&x| x as usize >= n) || block.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse { line: i + 2, msg: format!("not a sorted {r}-subset of [{n}]") });
        }
        blocks.push(block);
    }
    Ok((n, k, r, blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Seed;

    #[test]
    fn dump_round_trip() {
        let built = build_turan(12, 6, 3, &Seed::new(1)).unwrap();
        let sys = &built.system;
        let blocks = sys.materialize(100_000).unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, sys.n(), sys.k(), sys.r(), &blocks).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("turan n=12 k=4 r=4\n0 1 2 3\n"));
        let (n, k, r, back) = read_dump(&buf[..]).unwrap();
        assert_eq!((n, k, r), (12, 4, 4));
        assert_eq!(back, blocks);
        assert!(read_dump(&b"turan n=4 k=2 r=2\n0 5\n"[..]).is_err());
        assert!(read_dump(&b"blocks n=4\n"[..]).is_err());
    }

    #[test]
    fn block_ids_distinct() {
        let blocks = combinations(&(0..20).collect::<Vec<u32>>(), 3);
        let mut ids: Vec<u128> = blocks.iter().map(|b| block_id(b)).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), blocks.len());
        assert_ne!(block_id(&[1, 2]), block_id(&[2, 1]));
    }
}
