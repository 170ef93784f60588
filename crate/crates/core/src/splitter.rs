//! Balanced splitter families.
//!
//! A family of functions `[B] -> [l]`, every part of size exactly `B / l`,
//! such that any subset `S` of `[B]` is cut by some member into parts of
//! size `floor(|S|/l)` or `ceil(|S|/l)`.
//!
//! Construction, with `f` the smallest prime factor of `l`:
//!
//! * `f = 2`: the `B/2 + 1` cyclic windows `[t, t + B/2)`. Moving the window
//!   one step changes its count by at most one, and windows `0` and `B/2`
//!   are complementary, so some window holds half of `S`.
//! * odd prime `f`: a window of width `B/f` at each of the `B` cyclic
//!   offsets, with the remaining coordinates (in cyclic order after the
//!   window) split into `f - 1` parts recursively. The window count averages
//!   `|S|/f` over the offsets and moves by at most one, so every value
//!   between `floor` and `ceil` of that average is hit.
//! * composite `l`: split into `f` parts as above, then split each part into
//!   `l/f` parts with every combination of sub-functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of functions a build may produce.
pub const DEFAULT_MAX_FUNCTIONS: u128 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitterFamily {
    domain: usize,
    original_domain: usize,
    parts: usize,
    functions: Vec<Vec<u16>>,
}

impl SplitterFamily {
    /// Domain size after padding (a multiple of `parts`).
    pub fn domain(&self) -> usize {
        self.domain
    }

    /// Domain size requested by the caller; coordinates past it are dummies.
    pub fn original_domain(&self) -> usize {
        self.original_domain
    }

    pub fn dummies(&self) -> usize {
        self.domain - self.original_domain
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn part_size(&self) -> usize {
        self.domain / self.parts
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn function(&self, i: usize) -> &[u16] {
        &self.functions[i]
    }

    pub fn functions(&self) -> &[Vec<u16>] {
        &self.functions
    }

    /// Coordinates of each part of function `i`, increasing within a part.
    pub fn part_indices(&self, i: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::with_capacity(self.part_size()); self.parts];
        for (x, &label) in self.functions[i].iter().enumerate() {
            out[label as usize].push(x);
        }
        out
    }

    /// True if function `i` cuts `s` into parts of floor/ceil size.
    pub fn splits(&self, i: usize, s: &[usize]) -> bool {
        let mut counts = vec![0usize; self.parts];
        let h = &self.functions[i];
        for &x in s {
            counts[h[x] as usize] += 1;
        }
        let lo = s.len() / self.parts;
        let hi = s.len().div_ceil(self.parts);
        counts.iter().all(|&c| lo <= c && c <= hi)
    }
}

/// Number of functions the construction yields before deduplication.
pub fn estimated_size(domain: usize, parts: usize) -> u128 {
    if parts <= 1 {
        return 1;
    }
    let f = smallest_prime_factor(parts);
    let base = if f == 2 {
        (domain / 2 + 1) as u128
    } else {
        (domain as u128).saturating_mul(estimated_size(domain - domain / f, f - 1))
    };
    let sub = estimated_size(domain / f, parts / f);
    base.saturating_mul(sub.saturating_pow(f as u32))
}

pub fn build_splitter(domain: usize, parts: usize) -> Result<SplitterFamily> {
    build_splitter_with_guard(domain, parts, DEFAULT_MAX_FUNCTIONS)
}

pub fn build_splitter_with_guard(
    domain: usize,
    parts: usize,
    max_functions: u128,
) -> Result<SplitterFamily> {
    validate(domain, parts)?;
    if domain % parts != 0 {
        return Err(Error::Divisibility {
            what: "splitter domain",
            value: domain,
            divisor: parts,
        });
    }
    construct(domain, domain, parts, max_functions)
}

/// Like [`build_splitter`] but pads the domain up to a multiple of `parts`.
pub fn build_splitter_padded(domain: usize, parts: usize) -> Result<SplitterFamily> {
    validate(domain, parts)?;
    let padded = domain.div_ceil(parts) * parts;
    construct(padded, domain, parts, DEFAULT_MAX_FUNCTIONS)
}

fn validate(domain: usize, parts: usize) -> Result<()> {
    if parts == 0 {
        return Err(Error::param("splitter needs at least one part"));
    }
    if parts > domain {
        return Err(Error::param(format!(
            "cannot split a domain of {domain} into {parts} parts"
        )));
    }
    if parts > u16::MAX as usize + 1 {
        return Err(Error::param("too many splitter parts"));
    }
    Ok(())
}

fn construct(
    domain: usize,
    original_domain: usize,
    parts: usize,
    max_functions: u128,
) -> Result<SplitterFamily> {
    let est = estimated_size(domain, parts);
    if est > max_functions {
        return Err(Error::CostGuard(format!(
            "splitter ({domain}, {parts}) would have {est} functions (limit {max_functions})"
        )));
    }
    let mut functions = generate(domain, parts);
    functions.sort_unstable();
    functions.dedup();
    Ok(SplitterFamily {
        domain,
        original_domain,
        parts,
        functions,
    })
}

fn smallest_prime_factor(n: usize) -> usize {
    (2..).find(|p| n % p == 0 || p * p > n).map_or(n, |p| if n % p == 0 { p } else { n })
}

fn generate(domain: usize, parts: usize) -> Vec<Vec<u16>> {
    if parts == 1 {
        return vec![vec![0; domain]];
    }
    let f = smallest_prime_factor(parts);
    let base = if f == 2 {
        halving_windows(domain)
    } else {
        peeled_windows(domain, f)
    };
    if f == parts {
        return base;
    }
    let sub_parts = parts / f;
    let sub = generate(domain / f, sub_parts);
    let mut out = Vec::new();
    for h in &base {
        let mut members = vec![Vec::with_capacity(domain / f); f];
        for (x, &label) in h.iter().enumerate() {
            members[label as usize].push(x);
        }
        let mut choice = vec![0usize; f];
        loop {
            let mut g = vec![0u16; domain];
            for (j, mem) in members.iter().enumerate() {
                let s = &sub[choice[j]];
                for (pos, &x) in mem.iter().enumerate() {
                    g[x] = (j * sub_parts) as u16 + s[pos];
                }
            }
            out.push(g);
            let mut k = 0;
            while k < f {
                choice[k] += 1;
                if choice[k] < sub.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == f {
                break;
            }
        }
    }
    out
}

fn halving_windows(domain: usize) -> Vec<Vec<u16>> {
    let half = domain / 2;
    (0..=half)
        .map(|t| {
            let mut h = vec![1u16; domain];
            for i in 0..half {
                h[(t + i) % domain] = 0;
            }
            h
        })
        .collect()
}

fn peeled_windows(domain: usize, p: usize) -> Vec<Vec<u16>> {
    let width = domain / p;
    let rest = generate(domain - width, p - 1);
    let mut out = Vec::with_capacity(domain * rest.len());
    for t in 0..domain {
        for r in &rest {
            let mut h = vec![0u16; domain];
            for (pos, &label) in r.iter().enumerate() {
                h[(t + width + pos) % domain] = label + 1;
            }
            out.push(h);
        }
    }
    out
}

/// Lowest-index member that splits `s`.
pub fn find_split(fam: &SplitterFamily, s: &[usize]) -> Result<usize> {
    if let Some(&bad) = s.iter().find(|&&x| x >= fam.domain) {
        return Err(Error::OutOfRange {
            index: bad,
            dim: fam.domain,
        });
    }
    (0..fam.len())
        .find(|&i| fam.splits(i, s))
        .ok_or_else(|| Error::Verification(format!("no member splits {s:?}")))
}

/// Exhaustive check over all `2^B` subsets; `B <= 24`.
pub fn verify_exhaustive(fam: &SplitterFamily) -> Result<()> {
    let b = fam.domain;
    if b > 24 {
        return Err(Error::CostGuard(format!("exhaustive splitter check at B={b}")));
    }
    let size = fam.part_size();
    for (i, h) in fam.functions.iter().enumerate() {
        let mut counts = vec![0usize; fam.parts];
        for &label in h {
            counts[label as usize] += 1;
        }
        if counts.iter().any(|&c| c != size) {
            return Err(Error::Verification(format!("function {i} is unbalanced: {counts:?}")));
        }
    }
    // Part labels packed as per-part bit masks make each subset check a few popcounts.
    let masks: Vec<Vec<u32>> = fam
        .functions
        .iter()
        .map(|h| {
            let mut m = vec![0u32; fam.parts];
            for (x, &label) in h.iter().enumerate() {
                m[label as usize] |= 1 << x;
            }
            m
        })
        .collect();
    for s in 0u32..(1u32 << b) {
        let w = s.count_ones() as usize;
        let (lo, hi) = (w / fam.parts, w.div_ceil(fam.parts));
        let ok = masks.iter().any(|m| {
            m.iter().all(|&pm| {
                let c = (pm & s).count_ones() as usize;
                lo <= c && c <= hi
            })
        });
        if !ok {
            return Err(Error::Verification(format!("subset {s:#b} is not split")));
        }
    }
    Ok(())
}
