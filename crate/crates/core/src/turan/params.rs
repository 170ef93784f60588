//! Integral stage parameters for the four-stage construction.
//!
//! With `b = sqrt(r)` and `q = r / ln(r^{3/2})` the stages are
//! `(b q^2, q, b)` (base), `((bq)^2, bq, r)` (splitters),
//! `(n/a, bq, r)` (perfect hashing) and `(n, a b q, r)` (partitioning),
//! where `a = floor(k / (bq))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoundDir {
    /// `r` rounded up to the next perfect square.
    Up,
    /// `r` rounded down to the previous perfect square.
    Down,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuranParams {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub dir: RoundDir,
    /// Block size after rounding to a perfect square.
    pub r_adj: usize,
    /// `b = sqrt(r_adj)`, also the base block size `r'`.
    pub b: usize,
    /// Base covering size `k' = q`.
    pub q: usize,
    /// `k / a = b q`.
    pub unit: usize,
    pub a: usize,
    /// `k` rounded down to a multiple of `unit`.
    pub k_adj: usize,
    /// Universe of each partition part, `ceil(n / a)`.
    pub part: usize,
    /// `a * part`; coordinates past `n` are dummies.
    pub n_pad: usize,
    /// Real-valued `a = k r^{-3/2} ln(r^{3/2})` before rounding.
    pub a_real: f64,
    pub trace: Vec<String>,
}

impl TuranParams {
    /// Base universe `n' = b q^2`.
    pub fn base_n(&self) -> usize {
        self.b * self.q * self.q
    }

    /// Range of the perfect hash family, `(k/a)^2`.
    pub fn hash_range(&self) -> usize {
        self.unit * self.unit
    }

    /// Stages 1-3 collapse to all `r`-subsets when `k/a = r`.
    pub fn collapses(&self) -> bool {
        self.unit == self.r_adj
    }
}

fn square_round(r: usize, dir: RoundDir) -> usize {
    let s = (r as f64).sqrt().floor() as usize;
    let s = (s.saturating_sub(1)..=s + 1).filter(|v| v * v <= r).max().unwrap_or(0);
    match dir {
        RoundDir::Down => s * s,
        RoundDir::Up if s * s == r => r,
        RoundDir::Up => (s + 1) * (s + 1),
    }
}

pub fn turan_params(n: usize, k: usize, r: usize, dir: RoundDir) -> Result<TuranParams> {
    if !(r >= 1 && k > r && n > k) {
        return Err(Error::param(format!("need n > k > r >= 1, got ({n}, {k}, {r})")));
    }
    let mut trace = Vec::new();
    let mut dir = dir;
    let mut r_adj = square_round(r, dir);
    if r_adj > k {
        trace.push(format!("r = {r} rounded up to {r_adj} exceeds k = {k}; rounding down"));
        dir = RoundDir::Down;
        r_adj = square_round(r, dir);
    }
    if r_adj != r {
        trace.push(format!("r = {r} -> {r_adj} (perfect square)"));
    }
    let b = (r_adj as f64).sqrt().round() as usize;
    let (q, a_real) = if r_adj == 1 {
        (1, f64::NAN)
    } else {
        let ln = (r_adj as f64).powf(1.5).ln();
        let q_real = r_adj as f64 / ln;
        let mut q = (q_real.round() as usize).max(b);
        if q != q_real.round() as usize {
            trace.push(format!("q = {q_real:.3} raised to b = {b}"));
        }
        if q * b > k {
            q = k / b;
            trace.push(format!("q capped at floor(k / b) = {q}"));
        }
        trace.push(format!("q = r / ln(r^1.5) = {q_real:.3} -> {q}"));
        (q, k as f64 * (r_adj as f64).powf(-1.5) * ln)
    };
    let unit = b * q;
    let a = k / unit;
    let k_adj = a * unit;
    if k_adj != k {
        trace.push(format!("k = {k} -> {k_adj} (multiple of k/a = {unit})"));
    }
    let part = n.div_ceil(a);
    let n_pad = a * part;
    if n_pad != n {
        trace.push(format!("n = {n} padded to {n_pad} (multiple of a = {a})"));
    }
    Ok(TuranParams {
        n,
        k,
        r,
        dir,
        r_adj,
        b,
        q,
        unit,
        a,
        k_adj,
        part,
        n_pad,
        a_real,
        trace,
    })
}
