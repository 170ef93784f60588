//! Perfect hash families `[n] -> [m]`: every `k`-subset of `[n]` is mapped
//! injectively by some member.
//!
//! The default family is `h_α(x) = ((α x) mod p) mod m` for all `α` in
//! `1..p`, with `p >= n` prime. For a pair `x != y`, `h_α` collides only when
//! `α(x - y) mod p` is one of the at most `2 floor((p-1)/m)` nonzero multiples
//! of `m` (mod `p`) in `(-p, p)`, each of which fixes `α`. When
//! `C(k,2) * 2 floor((p-1)/m) < p - 1` every `k`-set has an injective member.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::bounds::binom;
use crate::seed::{tags, Seed};

pub const MAX_ATTEMPTS: usize = 64;
/// Largest number of `k`-sets enumerated by exhaustive verification.
pub const MAX_VERIFY_SETS: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhfKind {
    /// `n <= m`: the single function `x -> x`.
    Identity,
    /// `x -> ((α x) mod p) mod m` for each listed `α`.
    Modular { p: u64, alphas: Vec<u64> },
    /// Explicit tables, sampled and verified.
    Tables(Vec<Vec<u32>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerfectHashFamily {
    domain: usize,
    range: usize,
    k: usize,
    kind: PhfKind,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= p {
        if p % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

/// Smallest prime `p >= domain` for which the modular family is certified.
pub fn modular_prime(domain: usize, k: usize, range: usize) -> u64 {
    let pairs = (k * k.saturating_sub(1) / 2) as u64;
    let mut p = (domain as u64).max(2);
    loop {
        if is_prime(p) && pairs * 2 * ((p - 1) / range as u64) < p - 1 {
            return p;
        }
        p += 1;
    }
}

fn check(domain: usize, k: usize, range: usize) -> Result<()> {
    if domain == 0 || k == 0 || range < k || k > domain {
        return Err(Error::param(format!(
            "perfect hashing needs 1 <= k <= n and k <= m; got n = {domain}, k = {k}, m = {range}"
        )));
    }
    Ok(())
}

/// Certified family into `[k^2]`.
pub fn build_perfect_hash_family(domain: usize, k: usize) -> Result<PerfectHashFamily> {
    build_modular_family(domain, k, k * k)
}

pub fn build_modular_family(domain: usize, k: usize, range: usize) -> Result<PerfectHashFamily> {
    check(domain, k, range)?;
    if domain > range && k * (k - 1) >= range {
        return Err(Error::param(format!(
            "modular hashing of {k}-sets needs m > k(k-1), got m = {range}"
        )));
    }
    let kind = if domain <= range {
        PhfKind::Identity
    } else if k == 1 {
        PhfKind::Modular { p: modular_prime(domain, 1, range), alphas: vec![1] }
    } else {
        let p = modular_prime(domain, k, range);
        PhfKind::Modular { p, alphas: (1..p).collect() }
    };
    Ok(PerfectHashFamily { domain, range, k, kind })
}

/// Random tables, `size` of them, resampled until exhaustive verification
/// passes (requires `C(n, k) <= MAX_VERIFY_SETS`).
pub fn sample_perfect_hash_family(
    domain: usize,
    k: usize,
    range: usize,
    size: usize,
    seed: &Seed,
) -> Result<PerfectHashFamily> {
    check(domain, k, range)?;
    if binom(domain as u64, k as u64).map_or(true, |c| c > MAX_VERIFY_SETS) {
        return Err(Error::CostGuard(format!("verifying C({domain}, {k}) sets")));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seed.derive(tags::ATTEMPT + attempt as u64).rng();
        let tables = (0..size.max(1))
            .map(|_| (0..domain).map(|_| rng.gen_range(0..range as u32)).collect())
            .collect();
        let fam = PerfectHashFamily { domain, range, k, kind: PhfKind::Tables(tables) };
        if fam.verify()? {
            return Ok(fam);
        }
    }
    Err(Error::Construction {
        what: format!("perfect hash family [{domain}] -> [{range}] for {k}-sets"),
        attempts: MAX_ATTEMPTS,
    })
}

/// `k^4 ln n` functions suffice for the construction cited by the analysis.
pub fn size_budget(domain: usize, k: usize) -> f64 {
    (k as f64).powi(4) * (domain.max(2) as f64).ln()
}

impl PerfectHashFamily {
    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> &PhfKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            PhfKind::Identity => 1,
            PhfKind::Modular { alphas, .. } => alphas.len(),
            PhfKind::Tables(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn eval(&self, i: usize, x: u32) -> u32 {
        match &self.kind {
            PhfKind::Identity => x,
            PhfKind::Modular { p, alphas } => ((alphas[i] * x as u64 % p) % self.range as u64) as u32,
            PhfKind::Tables(t) => t[i][x as usize],
        }
    }

    pub fn injective_on(&self, i: usize, s: &[u32]) -> bool {
        let mut seen: Vec<u32> = s.iter().map(|&x| self.eval(i, x)).collect();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// Lowest-index member injective on `s`.
    pub fn find_injective(&self, s: &[u32]) -> Option<usize> {
        (0..self.len()).find(|&i| self.injective_on(i, s))
    }

    /// Exhaustive check over all `k`-subsets of the domain.
    pub fn verify(&self) -> Result<bool> {
        let total = binom(self.domain as u64, self.k as u64);
        if total.map_or(true, |c| c > MAX_VERIFY_SETS) {
            return Err(Error::CostGuard(format!("verifying C({}, {}) sets", self.domain, self.k)));
        }
        let sets = super::system::combinations(&(0..self.domain as u32).collect::<Vec<_>>(), self.k);
        Ok(sets.par_iter().all(|s| self.find_injective(s).is_some()))
    }

    /// Random spot check over `trials` uniformly chosen `k`-sets.
    pub fn spot_check(&self, trials: usize, seed: &Seed) -> bool {
        let mut rng = seed.rng();
        let universe: Vec<u32> = (0..self.domain as u32).collect();
        (0..trials).all(|_| {
            let s: Vec<u32> =
                rand::seq::index::sample(&mut rng, universe.len(), self.k).into_iter().map(|i| i as u32).collect();
            self.find_injective(&s).is_some()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_sets() {
        let fam = build_perfect_hash_family(50, 1).unwrap();
        assert_eq!(fam.len(), 1);
        assert!(fam.verify().unwrap());
    }

    #[test]
    fn small_modular_family_exhaustive() {
        let fam = build_perfect_hash_family(6, 2).unwrap();
        assert_eq!(fam.range(), 4);
        assert_eq!(fam.kind(), &PhfKind::Modular { p: 7, alphas: (1..7).collect() });
        assert!(fam.verify().unwrap());
        assert!((fam.len() as f64) <= size_budget(6, 2));
    }

    #[test]
    fn modular_families_verify() {
        for (n, k) in [(20usize, 3usize), (30, 4), (40, 3), (17, 2), (60, 2)] {
            let fam = build_perfect_hash_family(n, k).unwrap();
            assert!(fam.verify().unwrap(), "n={n} k={k}");
            for i in 0..fam.len() {
                for x in 0..n as u32 {
                    assert!((fam.eval(i, x) as usize) < fam.range());
                }
            }
        }
    }

    #[test]
    fn identity_when_domain_fits() {
        let fam = build_perfect_hash_family(9, 3).unwrap();
        assert_eq!(fam.kind(), &PhfKind::Identity);
        assert!(fam.verify().unwrap());
    }

    #[test]
    fn sampled_family() {
        let fam = sample_perfect_hash_family(12, 3, 9, 8, &Seed::new(3)).unwrap();
        assert!(fam.verify().unwrap());
        assert!(fam.spot_check(100, &Seed::new(1)));
        let bad = PerfectHashFamily {
            domain: 4,
            range: 4,
            k: 2,
            kind: PhfKind::Tables(vec![vec![0, 0, 1, 2]]),
        };
        assert!(!bad.verify().unwrap());
    }

    #[test]
    fn prime_condition() {
        for (n, k, m) in [(100usize, 5usize, 25usize), (10, 3, 9), (1000, 9, 81)] {
            let p = modular_prime(n, k, m);
            assert!(p as usize >= n && is_prime(p));
            assert!(((k * (k - 1) / 2) as u64) * 2 * ((p - 1) / m as u64) < p - 1);
        }
    }
}
