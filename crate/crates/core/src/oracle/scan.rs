//! Linear-scan ground truth.

use crate::bitvec::BitVector;
use crate::error::{check_dim, Result};
use crate::setpoint::{braun_blanquet, SetPoint};

/// Ids of all points within Hamming distance `max_dist` of `q`.
pub fn linear_scan_hamming(points: &[BitVector], q: &BitVector, max_dist: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        check_dim(p.len(), q.len())?;
        if p.dist(q) <= max_dist {
            out.push(i);
        }
    }
    Ok(out)
}

/// Ids of all sets whose similarity with `q` is at least `min_sim`.
pub fn linear_scan_sets(points: &[SetPoint], q: &SetPoint, min_sim: f64) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if p.weight() == 0 && q.weight() == 0 {
            continue;
        }
        if braun_blanquet(p, q)?.at_least(min_sim) {
            out.push(i);
        }
    }
    Ok(out)
}

/// Minimum distance from `q` to any point, with the lowest id attaining it.
pub fn nearest_hamming(points: &[BitVector], q: &BitVector) -> Option<(usize, usize)> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.dist(q), i))
        .min()
        .map(|(d, i)| (i, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn naive_dist(a: &BitVector, b: &BitVector) -> usize {
        (0..a.len()).filter(|&i| a.get(i) != b.get(i)).count()
    }

    #[test]
    fn contains_query_and_empty() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<BitVector> = (0..20).map(|_| BitVector::random(40, &mut rng)).collect();
        assert!(linear_scan_hamming(&pts, &pts[7], 0).unwrap().contains(&7));
        assert!(linear_scan_hamming(&[], &pts[0], 40).unwrap().is_empty());
        assert!(linear_scan_hamming(&pts, &BitVector::zeros(3), 1).is_err());
    }

    #[test]
    fn double_computation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<BitVector> = (0..200).map(|_| BitVector::random(70, &mut rng)).collect();
        for _ in 0..20 {
            let q = BitVector::random(70, &mut rng);
            let t = rng.gen_range(25..40);
            let expected: Vec<usize> = (0..pts.len()).filter(|&i| naive_dist(&pts[i], &q) <= t).collect();
            assert_eq!(linear_scan_hamming(&pts, &q, t).unwrap(), expected);
        }
        let sets: Vec<SetPoint> = (0..100)
            .map(|_| SetPoint::new(30, (0..30u32).filter(|_| rng.gen_bool(0.3))).unwrap())
            .collect();
        let q = &sets[3];
        let got = linear_scan_sets(&sets, q, 0.5).unwrap();
        let expected: Vec<usize> = (0..sets.len())
            .filter(|&i| {
                let shared = sets[i].elements().iter().filter(|e| q.elements().contains(e)).count();
                let m = sets[i].weight().max(q.weight());
                m > 0 && 2 * shared >= m
            })
            .collect();
        assert_eq!(got, expected);
        assert!(got.contains(&3) || q.weight() == 0);
    }

    #[test]
    fn nearest() {
        let pts = vec![BitVector::from_u64(0b1111, 4), BitVector::from_u64(0b0001, 4)];
        assert_eq!(nearest_hamming(&pts, &BitVector::zeros(4)), Some((1, 1)));
        assert_eq!(nearest_hamming(&[], &BitVector::zeros(4)), None);
    }
}
