//! Sorted subsets of a finite universe.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack for comparing an exact ratio against a floating point threshold.
pub(crate) const THRESHOLD_EPS: f64 = 1e-9;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SetPoint {
    universe: usize,
    elements: Vec<u32>,
}

impl SetPoint {
    /// Builds a set from arbitrary elements; duplicates are rejected.
    pub fn new(universe: usize, elements: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut elements: Vec<u32> = elements.into_iter().collect();
        elements.sort_unstable();
        for w in elements.windows(2) {
            if w[0] == w[1] {
                return Err(Error::param(format!("duplicate element {}", w[0])));
            }
        }
        if let Some(&last) = elements.last() {
            if last as usize >= universe {
                return Err(Error::OutOfRange {
                    index: last as usize,
                    dim: universe,
                });
            }
        }
        Ok(SetPoint { universe, elements })
    }

    /// Wraps an already strictly increasing, in-range list.
    pub fn from_sorted(universe: usize, elements: Vec<u32>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(elements.last().map_or(true, |&e| (e as usize) < universe));
        SetPoint { universe, elements }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn weight(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, e: u32) -> bool {
        self.elements.binary_search(&e).is_ok()
    }

    pub fn intersection_size(&self, other: &SetPoint) -> usize {
        intersection_size(&self.elements, &other.elements)
    }

    pub fn is_subset_of(&self, other: &SetPoint) -> bool {
        is_sorted_subset(&self.elements, &other.elements)
    }
}

impl fmt::Debug for SetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetPoint[{}]{:?}", self.universe, self.elements)
    }
}

pub(crate) fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// True when sorted `a` is a subset of sorted `b`.
pub(crate) fn is_sorted_subset(a: &[u32], b: &[u32]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// Exact Braun-Blanquet similarity `shared / max_weight`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Similarity {
    pub shared: usize,
    pub max_weight: usize,
}

impl Similarity {
    pub fn value(&self) -> f64 {
        self.shared as f64 / self.max_weight as f64
    }

    pub fn at_least(&self, b: f64) -> bool {
        self.shared as f64 >= b * self.max_weight as f64 - THRESHOLD_EPS
    }

    pub fn above(&self, b: f64) -> bool {
        self.shared as f64 > b * self.max_weight as f64 + THRESHOLD_EPS
    }
}

impl PartialOrd for Similarity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let l = self.shared as u128 * other.max_weight as u128;
        let r = other.shared as u128 * self.max_weight as u128;
        Some(l.cmp(&r))
    }
}

pub fn braun_blanquet(x: &SetPoint, y: &SetPoint) -> Result<Similarity> {
    crate::error::check_dim(x.universe, y.universe)?;
    let max_weight = x.weight().max(y.weight());
    if max_weight == 0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(Similarity {
        shared: x.intersection_size(y),
        max_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(d: usize, e: &[u32]) -> SetPoint {
        SetPoint::new(d, e.iter().copied()).unwrap()
    }

    #[test]
    fn similarity_examples() {
        let s = braun_blanquet(&set(8, &[1, 2]), &set(8, &[1, 2])).unwrap();
        assert_eq!(s.value(), 1.0);
        let s = braun_blanquet(&set(8, &[1, 2]), &set(8, &[3, 4])).unwrap();
        assert_eq!(s.shared, 0);
        let (x, y) = (set(8, &[1, 2]), set(8, &[2, 3]));
        let shared = x.elements().iter().filter(|e| y.elements().contains(e)).count();
        let s = braun_blanquet(&x, &y).unwrap();
        assert_eq!((s.shared, s.max_weight), (shared, 2));
        assert_eq!(s.partial_cmp(&Similarity { shared: 1, max_weight: 2 }), Some(Ordering::Equal));
    }

    #[test]
    fn similarity_errors() {
        assert!(matches!(
            braun_blanquet(&set(4, &[]), &set(4, &[])),
            Err(Error::UndefinedSimilarity)
        ));
        assert!(braun_blanquet(&set(4, &[1]), &set(5, &[1])).is_err());
        assert!(SetPoint::new(4, [1, 1]).is_err());
        assert!(SetPoint::new(4, [4]).is_err());
    }

    #[test]
    fn equal_weight_threshold_equivalence() {
        let d = 10;
        let thresholds = [0.25, 0.3, 0.5, 2.0 / 3.0, 0.75, 1.0];
        let by_weight: Vec<Vec<SetPoint>> = {
            let mut groups = vec![Vec::new(); d + 1];
            for mask in 0u32..1 << d {
                let s = SetPoint::new(d, (0..d as u32).filter(|i| mask >> i & 1 == 1)).unwrap();
                groups[s.weight()].push(s);
            }
            groups
        };
        for (w, group) in by_weight.iter().enumerate().skip(1) {
            for x in group {
                for y in group {
                    let sim = braun_blanquet(x, y).unwrap();
                    let inter = intersection_size(x.elements(), y.elements());
                    for &b in &thresholds {
                        assert_eq!(sim.value() >= b - 1e-12, inter as f64 >= b * w as f64 - 1e-9);
                        assert_eq!(sim.at_least(b), inter as f64 >= b * w as f64 - 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn subset_helpers() {
        assert!(is_sorted_subset(&[1, 3], &[0, 1, 2, 3]));
        assert!(!is_sorted_subset(&[1, 4], &[0, 1, 2, 3]));
        assert!(is_sorted_subset(&[], &[]));
        assert_eq!(intersection_size(&[1, 2, 5], &[2, 5, 7]), 2);
    }
}
