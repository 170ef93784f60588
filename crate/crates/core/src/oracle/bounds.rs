//! Exact binomial arithmetic and analytic bounds.
//!
//! Integer quantities are computed exactly in `u128` (enough for every
//! binomial with `n <= 120` that the checks need). Chains of inequalities
//! are compared in log space with a relative tolerance of `1e-12`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHAIN_TOLERANCE: f64 = 1e-12;

/// Largest dimension accepted by [`ball_intersection_count`].
pub const MAX_EXACT_BALL_DIM: usize = 30;

/// Exact binomial coefficient, `None` on overflow.
pub fn binom(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) is divisible by (i + 1) because the result is C(n, i + 1) * (i + 1).
        c = c.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(c)
}

/// `ln C(n, k)`, exact to double precision for any size.
pub fn ln_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if let Some(c) = binom(n, k) {
        return (c as f64).ln();
    }
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

pub fn binom_f64(n: u64, k: u64) -> f64 {
    ln_binom(n, k).exp()
}

/// Natural-log binary entropy.
pub fn entropy(p: f64) -> f64 {
    let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
    h(p) + h(1.0 - p)
}

/// Number of points in a radius-`t` Hamming ball in `{0,1}^d`.
pub fn ball_volume(d: u64, t: i64) -> u128 {
    if t < 0 {
        return 0;
    }
    (0..=(t as u64).min(d)).map(|j| binom(d, j).expect("ball volume overflow")).sum()
}

/// `|{z : dist(z,x) <= t, dist(z,y) <= t}|` for any `x, y` at distance `r`.
///
/// A point `z` that flips `i` of the `r` coordinates where `x` and `y`
/// differ and `j` of the others is at distance `i + j` from `x` and
/// `r - i + j` from `y`.
pub fn ball_intersection_count(d: usize, r: usize, t: i64) -> Result<u128> {
    if d > MAX_EXACT_BALL_DIM {
        return Err(Error::CostGuard(format!(
            "exact ball intersection limited to d <= {MAX_EXACT_BALL_DIM}, got {d}"
        )));
    }
    if r > d {
        return Err(Error::param(format!("r = {r} exceeds d = {d}")));
    }
    Ok(ball_intersection_unguarded(d as u64, r as u64, t))
}

pub(crate) fn ball_intersection_unguarded(d: u64, r: u64, t: i64) -> u128 {
    let mut total = 0u128;
    for i in 0..=r {
        let ci = binom(r, i).unwrap();
        for j in 0..=(d - r) {
            let (i_, j_, r_) = (i as i64, j as i64, r as i64);
            if i_ + j_ <= t && j_ - i_ <= t - r_ {
                total += ci * binom(d - r, j).unwrap();
            }
        }
    }
    total
}

/// Probability that a uniform `z` lies within `t` of both ends of a pair at distance `r`.
pub fn pair_capture_probability(d: usize, r: usize, t: i64) -> f64 {
    ball_intersection_unguarded(d as u64, r as u64, t) as f64 / 2f64.powi(d as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub quantity: String,
    pub inputs: Vec<(String, f64)>,
    pub exact: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    /// Every term of the inequality chain, smallest first (natural values).
    pub chain: Vec<f64>,
    pub holds: bool,
}

fn chain_holds(log_terms: &[f64]) -> bool {
    log_terms.windows(2).all(|w| {
        let tol = CHAIN_TOLERANCE * w[0].abs().max(w[1].abs()).max(1.0);
        w[0] <= w[1] + tol
    })
}

/// The chain
/// `(n/m)^k <= (n/m)^k e^{(n-m)k(k-1)/(2nm)} <= C(n,k)/C(m,k) <= e^{nH(k/n) - mH(k/m)} <= (n/m)^k e^{k^2/m}`.
pub fn binom_ratio_bounds(n: u64, m: u64, k: u64) -> Result<BoundsReport> {
    if !(n >= m && m >= k) {
        return Err(Error::param(format!("need n >= m >= k, got ({n}, {m}, {k})")));
    }
    let inputs = vec![("n".into(), n as f64), ("m".into(), m as f64), ("k".into(), k as f64)];
    if k == 0 {
        return Ok(BoundsReport {
            quantity: "binomial_ratio".into(),
            inputs,
            exact: Some(1.0),
            lower: 1.0,
            upper: 1.0,
            chain: vec![1.0; 5],
            holds: true,
        });
    }
    let (nf, mf, kf) = (n as f64, m as f64, k as f64);
    let base = kf * (nf / mf).ln();
    let t1 = base;
    let t2 = base + (nf - mf) / (nf * mf) * kf * (kf - 1.0) / 2.0;
    let t3 = ln_binom(n, k) - ln_binom(m, k);
    let t4 = nf * entropy(kf / nf) - mf * entropy(kf / mf);
    let t5 = base + kf * kf / mf;
    let logs = [t1, t2, t3, t4, t5];
    Ok(BoundsReport {
        quantity: "binomial_ratio".into(),
        inputs,
        exact: Some(t3.exp()),
        lower: t1.exp(),
        upper: t5.exp(),
        chain: logs.iter().map(|t| t.exp()).collect(),
        holds: chain_holds(&logs),
    })
}

/// Radius `d/2 - s sqrt(d)/2` used by the ball-intersection bounds, rounded down.
pub fn bounds_radius(d: usize, s: f64) -> i64 {
    let t = d as f64 / 2.0 - s * (d as f64).sqrt() / 2.0;
    (t + 1e-9).floor() as i64
}

/// `(7/(8d)) e^{-s^2/(2(1-r/d))} <= I 2^{-d} <= e^{-s^2/(2(1-r/d))}`,
/// valid for `1 <= s <= d^{1/4}/2` and `r < d/2`.
pub fn ball_intersection_bounds(d: usize, r: usize, s: f64) -> Result<BoundsReport> {
    let s_max = (d as f64).powf(0.25) / 2.0;
    if !(s >= 1.0 && s <= s_max + 1e-12) {
        return Err(Error::param(format!(
            "s = {s} outside [1, d^(1/4)/2 = {s_max}]"
        )));
    }
    if 2 * r >= d {
        return Err(Error::param(format!("need r < d/2, got r = {r}, d = {d}")));
    }
    let t = bounds_radius(d, s);
    let count = ball_intersection_count(d, r, t)?;
    let exact = count as f64 / 2f64.powi(d as i32);
    let e = (-s * s / (2.0 * (1.0 - r as f64 / d as f64))).exp();
    let lower = 7.0 / (8.0 * d as f64) * e;
    let upper = e;
    let logs = [lower.ln(), exact.ln(), upper.ln()];
    Ok(BoundsReport {
        quantity: "ball_intersection".into(),
        inputs: vec![
            ("d".into(), d as f64),
            ("r".into(), r as f64),
            ("s".into(), s),
            ("t".into(), t as f64),
        ],
        exact: Some(exact),
        lower,
        upper,
        chain: vec![lower, exact, upper],
        holds: exact > 0.0 && chain_holds(&logs),
    })
}

/// `ceil(C(n,r) / C(k,r))`, the minimum size of any Turán `(n,k,r)` system.
pub fn turan_volume_bound(n: u64, k: u64, r: u64) -> Result<u128> {
    if !(n >= k && k >= r) {
        return Err(Error::param(format!("need n >= k >= r, got ({n}, {k}, {r})")));
    }
    match (binom(n, r), binom(k, r)) {
        (Some(a), Some(b)) => Ok(a.div_ceil(b)),
        _ => Ok((ln_binom(n, r) - ln_binom(k, r)).exp().ceil() as u128),
    }
}

/// Values of `s` checked for dimension `d`: integers and quarter steps in
/// range plus the upper boundary itself.
pub fn valid_s_grid(d: usize) -> Vec<f64> {
    let s_max = (d as f64).powf(0.25) / 2.0;
    let mut out = Vec::new();
    let mut s = 1.0;
    while s <= s_max + 1e-12 {
        out.push(s);
        s += 0.25;
    }
    if s_max >= 1.0 && out.last().map_or(true, |&l| (s_max - l).abs() > 1e-12) {
        out.push(s_max);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_intersection(d: usize, r: usize, t: i64) -> u128 {
        let x = 0u32;
        let y = (1u32 << r) - 1;
        (0u32..1 << d)
            .filter(|z| ((z ^ x).count_ones() as i64) <= t && ((z ^ y).count_ones() as i64) <= t)
            .count() as u128
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(4, 2), Some(6));
        assert_eq!(binom(60, 30), Some(118264581564861424));
        assert_eq!(binom(3, 5), Some(0));
        assert_eq!(binom(0, 0), Some(1));
        assert!((ln_binom(1000, 500) - 689.467261567851).abs() < 1e-9);
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(ball_intersection_count(4, 2, 2).unwrap(), brute_intersection(4, 2, 2));
        assert_eq!(ball_intersection_count(4, 2, 2).unwrap(), 8);
        for d in 0..=10usize {
            for t in 0..=d as i64 {
                assert_eq!(ball_intersection_count(d, 0, t).unwrap(), ball_volume(d as u64, t));
            }
            for t in (0..).take_while(|t| 2 * t < d as i64) {
                assert_eq!(ball_intersection_count(d, d, t).unwrap(), 0);
            }
        }
        assert!(ball_intersection_count(31, 2, 2).is_err());
    }

    #[test]
    fn intersection_matches_enumeration() {
        for d in 1..=12usize {
            for r in 0..=d {
                for t in -1..=d as i64 {
                    assert_eq!(
                        ball_intersection_count(d, r, t).unwrap(),
                        brute_intersection(d, r, t),
                        "d={d} r={r} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn intersection_monotone_in_radius() {
        for d in 1..=20usize {
            for r in 0..=d {
                let counts: Vec<u128> = (0..=d as i64)
                    .map(|t| ball_intersection_count(d, r, t).unwrap())
                    .collect();
                assert!(counts.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn ratio_examples() {
        let rep = binom_ratio_bounds(4, 2, 2).unwrap();
        assert!(rep.holds);
        assert!((rep.exact.unwrap() - 6.0).abs() < 1e-9);
        assert!((rep.lower - 4.0).abs() < 1e-9);
        assert!((rep.upper - 4.0 * 2f64.exp()).abs() < 1e-9);
        let rep = binom_ratio_bounds(9, 5, 0).unwrap();
        assert!(rep.chain.iter().all(|&v| v == 1.0));
        let rep = binom_ratio_bounds(7, 7, 3).unwrap();
        assert!(rep.chain[..4].iter().all(|&v| (v - 1.0).abs() < 1e-12), "{:?}", rep.chain);
        assert!((rep.chain[4] - (9.0f64 / 7.0).exp()).abs() < 1e-12);
        assert!(binom_ratio_bounds(3, 4, 1).is_err());
    }

    #[test]
    fn volume_bound_examples() {
        assert_eq!(turan_volume_bound(4, 3, 2).unwrap(), 2);
        assert_eq!(turan_volume_bound(9, 5, 0).unwrap(), 1);
        assert_eq!(turan_volume_bound(9, 9, 4).unwrap(), 1);
        assert!(turan_volume_bound(3, 4, 1).is_err());
    }

    #[test]
    fn ball_bounds_preconditions() {
        assert!(ball_intersection_bounds(16, 3, 0.5).is_err());
        assert!(ball_intersection_bounds(16, 3, 1.5).is_err());
        assert!(ball_intersection_bounds(16, 8, 1.0).is_err());
        let rep = ball_intersection_bounds(16, 3, 1.0).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert_eq!(valid_s_grid(16), vec![1.0]);
        assert!(valid_s_grid(15).is_empty());
    }
}
