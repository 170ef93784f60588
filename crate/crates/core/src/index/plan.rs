//! Parameter planning.
//!
//! Hamming: the asymptotic parameters of the analysis are evaluated and
//! checked, then a concrete layout `(B = b l, S, r', t)` is chosen by
//! minimizing the predicted per-query work `F + n P` over small inner
//! dimensions, where `F` is the number of filters per point and `P` the
//! probability that a random point shares a filter with the query.
//!
//! Similarity: `r = ceil(ln n / ln(1/b2))`, `k = floor(b1 w)` and the case
//! split between all `k`-subsets, self-concatenation and a Turán system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamming::inner::{
    capture_probability, inner_radius, pair_count, sampling_budget, InnerMode, MAX_GREEDY_DIM,
    MAX_INNER_DIM, MAX_VERIFY_DIM,
};
use crate::oracle::bounds::{ball_volume, binom_f64, ln_binom};
use crate::splitter::estimated_size;
use crate::turan::{turan_params, RoundDir};

/// Inner verification work (pairs times bitset words).
pub const MAX_VERIFY_WORK: f64 = 5e8;
/// Words in the verification bitset table.
pub const MAX_VERIFY_WORDS: f64 = (1u64 << 25) as f64;
pub const MAX_SPLITTER: f64 = 1e5;
/// Total bucket entries `n F`.
pub const MAX_ENTRIES: f64 = 2e7;
/// Feasibility constant in `s^2 <= K B / sqrt(b)`.
pub const FEASIBILITY_K: f64 = 1.0;
/// Constant in the corollary assumption `r/d >= κ (ln n)^{-1/6}`.
pub const COROLLARY_KAPPA: f64 = 1.0 / 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// `ε = (ln n)^{-1/4}`, xor reduction by default.
    Theorem,
    /// `ε = (ln n)^{-1/3}`, partition reduction by default.
    Corollary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionKind {
    Xor,
    Partition,
}

impl Mode {
    pub fn default_reduction(self) -> ReductionKind {
        match self {
            Mode::Theorem => ReductionKind::Xor,
            Mode::Corollary => ReductionKind::Partition,
        }
    }
}

/// Planner knobs; `None` lets the cost model choose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammingConfig {
    pub mode: Mode,
    pub reduction: Option<ReductionKind>,
    pub inner_dim: Option<usize>,
    pub parts: Option<usize>,
    pub inner_radius: Option<usize>,
    pub inner_mode: InnerMode,
}

impl Default for HammingConfig {
    fn default() -> Self {
        HammingConfig {
            mode: Mode::Theorem,
            reduction: None,
            inner_dim: None,
            parts: None,
            inner_radius: None,
            inner_mode: InnerMode::Sampled,
        }
    }
}

/// Real-valued quantities from the analysis, before any rounding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammingTheory {
    pub eps: f64,
    /// `B = 27 ε^-3 ln n` (xor) or `2 ε^-2 (d/(cr)) ln n` (partition).
    pub block: f64,
    /// `b = log_4 n`.
    pub inner_dim: f64,
    /// `x = cr'/B`.
    pub ratio: f64,
    /// `s^2 = 2 ((1-x)/x) ln n`.
    pub s_sq: f64,
    /// `B / sqrt(b)`; feasibility needs `s^2 <= K` times this.
    pub s_sq_limit: f64,
    /// `1/c` (theorem) or `(1 - cr/d)/(c(1 - r/d))` (corollary).
    pub rho: f64,
    /// `(ln n)^{-1/4}` or `(ln n)^{-1/3} d/r`.
    pub overhead: f64,
}

/// The concrete layout the index is built with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammingLayout {
    /// Block length `B = b l`.
    pub block: usize,
    pub inner_dim: usize,
    pub parts: usize,
    /// Number of substructures `S`.
    pub outputs: usize,
    /// Xor buckets `m` after rounding (0 for partition).
    pub buckets: usize,
    /// Near radius inside a block, `floor(r / S)`.
    pub r_prime: usize,
    /// Pair radius of the inner code, `ceil(r'/l)`.
    pub inner_pair_radius: usize,
    pub inner_radius: usize,
    /// ε used by the xor reduction.
    pub eps: f64,
    pub delta: f64,
    pub inner_mode: InnerMode,
    /// Predicted filters per point `F`.
    pub filters: f64,
    /// Predicted probability that a random point collides with a query.
    pub collision: f64,
    /// `F + n P`.
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammingParams {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub c: f64,
    pub mode: Mode,
    pub reduction: ReductionKind,
    pub theory: HammingTheory,
    pub layout: HammingLayout,
    pub trace: Vec<String>,
}

impl HammingParams {
    /// Largest distance accepted as an answer, `floor(cr)`.
    pub fn far_radius(&self) -> usize {
        (self.c * self.r as f64 + 1e-9).floor() as usize
    }
}

pub fn mode_eps(mode: Mode, n: usize) -> f64 {
    let ln = (n.max(3) as f64).ln();
    match mode {
        Mode::Theorem => ln.powf(-0.25),
        Mode::Corollary => ln.powf(-1.0 / 3.0),
    }
}

fn check_hamming(n: usize, d: usize, r: usize, c: f64) -> Result<()> {
    if n == 0 || r == 0 || !(c > 1.0) || c * r as f64 > d as f64 / 2.0 + 1e-9 {
        return Err(Error::param(format!(
            "need n >= 1, r >= 1, c > 1, cr <= d/2; got n = {n}, d = {d}, r = {r}, c = {c}"
        )));
    }
    Ok(())
}

pub fn hamming_theory(n: usize, d: usize, r: usize, c: f64, mode: Mode, red: ReductionKind) -> HammingTheory {
    let ln = (n.max(3) as f64).ln();
    let eps = mode_eps(mode, n);
    let cr = c * r as f64;
    let (block, ratio) = match red {
        ReductionKind::Xor => (27.0 * eps.powi(-3) * ln, eps / 3.0),
        ReductionKind::Partition => (2.0 * eps.powi(-2) * (d as f64 / cr) * ln, cr / d as f64),
    };
    let inner_dim = ln / 4f64.ln();
    let s_sq = 2.0 * (1.0 - ratio) / ratio * ln;
    let (rho, overhead) = match mode {
        Mode::Theorem => (1.0 / c, ln.powf(-0.25)),
        Mode::Corollary => {
            let rd = r as f64 / d as f64;
            ((1.0 - c * rd) / (c * (1.0 - rd)), ln.powf(-1.0 / 3.0) / rd)
        }
    };
    HammingTheory {
        eps,
        block,
        inner_dim,
        ratio,
        s_sq,
        s_sq_limit: block / inner_dim.sqrt(),
        rho,
        overhead,
    }
}

pub fn plan_hamming_params(n: usize, d: usize, r: usize, c: f64, mode: Mode) -> Result<HammingParams> {
    plan_hamming_with(n, d, r, c, &HammingConfig { mode, ..HammingConfig::default() })
}

pub fn plan_hamming_with(n: usize, d: usize, r: usize, c: f64, cfg: &HammingConfig) -> Result<HammingParams> {
    check_hamming(n, d, r, c)?;
    let mode = cfg.mode;
    let reduction = cfg.reduction.unwrap_or(mode.default_reduction());
    let theory = hamming_theory(n, d, r, c, mode, reduction);
    let mut trace = Vec::new();
    if theory.s_sq > FEASIBILITY_K * theory.s_sq_limit {
        return Err(Error::param(format!(
            "s^2 = {:.2} exceeds B/sqrt(b) = {:.2}",
            theory.s_sq, theory.s_sq_limit
        )));
    }
    if mode == Mode::Corollary {
        let need = COROLLARY_KAPPA * (n.max(3) as f64).ln().powf(-1.0 / 6.0);
        if (r as f64) / (d as f64) < need {
            return Err(Error::param(format!(
                "corollary mode needs r/d >= {need:.4}, got {:.4}",
                r as f64 / d as f64
            )));
        }
    }
    trace.push(format!(
        "theory: ε = {:.4}, B = {:.1}, b = {:.2}, s^2 = {:.2} <= {:.2}",
        theory.eps, theory.block, theory.inner_dim, theory.s_sq, theory.s_sq_limit
    ));
    let layout = choose_layout(n, d, r, c, reduction, theory.eps, cfg, &mut trace)?;
    Ok(HammingParams {
        n,
        d,
        r,
        c,
        mode,
        reduction,
        theory,
        layout,
        trace,
    })
}

/// `(S, m, r')` for block `B`, or `None` if the reduction cannot use it.
fn reduction_shape(d: usize, r: usize, c: f64, red: ReductionKind, eps: f64, block: usize) -> Option<(usize, usize, usize)> {
    match red {
        ReductionKind::Partition => {
            if block > d {
                return None;
            }
            let s = d.div_ceil(block);
            Some((s, 0, r * block / (s * block)))
        }
        ReductionKind::Xor => {
            let m = (3.0 * c * r as f64 / eps - 1e-9).ceil() as usize;
            if block >= d {
                (block == d).then_some((1, d, r))
            } else if block >= m {
                (block % m == 0).then_some((1, m, r * block / m))
            } else {
                let s = m.div_ceil(block);
                Some((s, s * block, r * block / (s * block)))
            }
        }
    }
}

struct Candidate {
    layout: HammingLayout,
}

/// Near-word table entries an inner code may need.
pub const MAX_TABLE_ENTRIES: f64 = (1u64 << 26) as f64;

/// Per-output-bit agreement probability of two uniform random inputs:
/// constant bits (empty xor buckets, padding) always agree.
fn bit_agreement(d: usize, red: ReductionKind, shape: (usize, usize, usize), block: usize) -> f64 {
    let constant = match red {
        ReductionKind::Xor if block >= d => 0.0,
        ReductionKind::Xor => (1.0 - 1.0 / shape.1.max(1) as f64).powi(d as i32),
        ReductionKind::Partition => 1.0 - d as f64 / (shape.0 * block) as f64,
    };
    (1.0 + constant) / 2.0
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    n: usize,
    eps: f64,
    b: usize,
    l: usize,
    t: usize,
    shape: (usize, usize, usize),
    agree: f64,
    inner_mode: InnerMode,
) -> Option<Candidate> {
    let (s, m, r_prime) = shape;
    let block = b * l;
    let r_b = r_prime.div_ceil(l);
    if b > MAX_INNER_DIM || r_b > b || t > b || t < r_b.div_ceil(2) {
        return None;
    }
    if capture_probability(b, r_b, t) <= 0.0 {
        return None;
    }
    let cube = 2f64.powi(b as i32);
    let (words, full) = match inner_mode {
        InnerMode::Sampled => {
            let budget = sampling_budget(b, r_b, t) as f64;
            if budget >= cube {
                (cube, true)
            } else {
                (cube * (1.0 - (-budget / cube).exp()), false)
            }
        }
        // The greedy code size is unknown in advance; plan with the full cube.
        InnerMode::Greedy => (cube, false),
    };
    let vol = ball_volume(b as u64, t as i64) as f64;
    if words * vol > MAX_TABLE_ENTRIES {
        return None;
    }
    if !full {
        // Sampled and greedy codes are verified exhaustively.
        let verify_words = cube * (words / 64.0).ceil();
        let verify_work = pair_count(b, r_b) as f64 * (words / 64.0).ceil();
        if b > MAX_VERIFY_DIM || verify_work > MAX_VERIFY_WORK || verify_words > MAX_VERIFY_WORDS {
            return None;
        }
    }
    if inner_mode == InnerMode::Greedy && b > MAX_GREEDY_DIM {
        return None;
    }
    let splitter = estimated_size(block, l) as f64;
    if splitter > MAX_SPLITTER {
        return None;
    }
    let frac = vol / cube;
    let per_part = words * frac;
    let filters = s as f64 * splitter * per_part.powi(l as i32);
    if n as f64 * filters > MAX_ENTRIES {
        return None;
    }
    let common = words * frac * frac * (2.0 * agree).powi(b as i32);
    let collision = (s as f64 * (splitter * common.powi(l as i32)).min(1.0)).min(1.0);
    let cost = filters + n as f64 * collision;
    Some(Candidate {
        layout: HammingLayout {
            block,
            inner_dim: b,
            parts: l,
            outputs: s,
            buckets: m,
            r_prime,
            inner_pair_radius: r_b,
            inner_radius: t,
            eps,
            delta: 1.0 / (n.max(m).max(2) as f64),
            inner_mode,
            filters,
            collision,
            cost,
        },
    })
}

/// Inner radius from the far threshold `c(1-ε) r'` at block length `B`.
fn formula_radius(n: usize, c: f64, eps: f64, b: usize, l: usize, r_prime: usize) -> Option<usize> {
    if r_prime == 0 {
        return Some(0);
    }
    let block = (b * l) as f64;
    let x = c * (1.0 - eps) * r_prime as f64 / block;
    if x >= 1.0 {
        return None;
    }
    let s = (2.0 * (1.0 - x) / x * (n.max(3) as f64).ln()).sqrt();
    Some(inner_radius(b, s * (b as f64 / block).sqrt()))
}

#[allow(clippy::too_many_arguments)]
fn choose_layout(
    n: usize,
    d: usize,
    r: usize,
    c: f64,
    red: ReductionKind,
    eps: f64,
    cfg: &HammingConfig,
    trace: &mut Vec<String>,
) -> Result<HammingLayout> {
    let dims: Vec<usize> = match cfg.inner_dim {
        Some(b) => vec![b],
        None => (2..=MAX_INNER_DIM).collect(),
    };
    let parts: Vec<usize> = match cfg.parts {
        Some(l) => vec![l],
        None => vec![1, 2, 4],
    };
    let mut best: Option<HammingLayout> = None;
    for &b in &dims {
        for &l in &parts {
            let Some(shape) = reduction_shape(d, r, c, red, eps, b * l) else { continue };
            let r_b = shape.2.div_ceil(l);
            let t_min = r_b.div_ceil(2);
            let radii: Vec<usize> = match cfg.inner_radius {
                Some(t) => vec![t],
                None => {
                    let t = formula_radius(n, c, eps, b, l, shape.2).map_or(t_min, |t| t.max(t_min));
                    let mut v = vec![t_min.min(b), t.min(b)];
                    v.dedup();
                    v
                }
            };
            for t in radii {
                let agree = bit_agreement(d, red, shape, b * l);
                let Some(cand) = evaluate(n, eps, b, l, t, shape, agree, cfg.inner_mode) else { continue };
                let better = match &best {
                    None => true,
                    Some(cur) => {
                        let key = |x: &HammingLayout| (x.cost, x.filters, x.inner_dim, x.parts, x.inner_radius);
                        let (a, z) = (key(&cand.layout), key(cur));
                        a.partial_cmp(&z) == Some(std::cmp::Ordering::Less)
                    }
                };
                if better {
                    best = Some(cand.layout);
                }
            }
        }
    }
    let layout = best.ok_or_else(|| {
        Error::param(format!("no feasible layout for n = {n}, d = {d}, r = {r}, c = {c}"))
    })?;
    trace.push(format!(
        "layout: B = {} = {} x {}, S = {}, r' = floor({r}/S) = {}, r_b = {}, t = {}",
        layout.block, layout.inner_dim, layout.parts, layout.outputs, layout.r_prime,
        layout.inner_pair_radius, layout.inner_radius
    ));
    if red == ReductionKind::Xor && layout.buckets > 0 {
        trace.push(format!("xor buckets m = ceil(3cr/ε) -> {}", layout.buckets));
    }
    if red == ReductionKind::Partition && d % layout.block != 0 {
        trace.push(format!("d = {d} padded to {}", layout.outputs * layout.block));
    }
    trace.push(format!(
        "predicted filters/point {:.1}, collision probability {:.2e}, cost {:.1}",
        layout.filters, layout.collision, layout.cost
    ));
    Ok(layout)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimMode {
    /// `k <= r`: every `k`-subset is a block.
    AllSubsets,
    /// `r < k <= r^{3/2}`: sets are repeated `copies` times before the Turán system.
    SelfConcatenated { copies: usize },
    Turan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityParams {
    pub n: usize,
    pub d: usize,
    pub w: usize,
    pub b1: f64,
    pub b2: f64,
    /// `ceil(ln n / ln(1/b2))`.
    pub r: usize,
    /// `max(1, floor(b1 w))`.
    pub k: usize,
    pub mode: SimMode,
    /// Rounding direction of the Turán block size (Turán modes only).
    pub dir: RoundDir,
    /// `ln(1/b1) / ln(1/b2)`.
    pub rho: f64,
    /// Predicted blocks decoded per stored point.
    pub blocks_per_point: f64,
    pub trace: Vec<String>,
}

impl SimilarityParams {
    /// Universe, weight and `k` after self-concatenation.
    pub fn expanded(&self) -> (usize, usize, usize) {
        match self.mode {
            SimMode::SelfConcatenated { copies } => (self.d * copies, self.w * copies, self.k * copies),
            _ => (self.d, self.w, self.k),
        }
    }
}

fn check_similarity(n: usize, d: usize, w: usize, b1: f64, b2: f64) -> Result<()> {
    if n == 0 || w == 0 || w > d || !(0.0 < b2 && b2 < b1 && b1 < 1.0) {
        return Err(Error::param(format!(
            "need n >= 1, 1 <= w <= d, 0 < b2 < b1 < 1; got n = {n}, d = {d}, w = {w}, b1 = {b1}, b2 = {b2}"
        )));
    }
    Ok(())
}

/// Mean number of blocks of the planned system inside a random `w`-set.
fn turan_blocks_per_point(d: usize, w: usize, k: usize, r: usize, dir: RoundDir) -> Option<(f64, RoundDir, usize)> {
    let p = turan_params(d, k, r, dir).ok()?;
    let size = if p.collapses() || p.r_adj == 1 {
        p.a as f64 * binom_f64(p.part as u64, p.r_adj as u64)
    } else {
        // Splitter and hashing stages contribute their expectation bound.
        let splitter = estimated_size(p.hash_range(), p.b).max(1) as f64;
        let base = binom_f64(p.base_n() as u64, p.b as u64);
        let hashed = splitter * base.powi(p.b as i32) * (p.part as f64 / p.hash_range() as f64).powi(p.r_adj as i32);
        let phf = crate::turan::phf::modular_prime(p.part, p.unit, p.hash_range()) as f64;
        p.a as f64 * phf.max(1.0) * hashed.max(binom_f64(p.part as u64, p.r_adj as u64))
    };
    let frac = (ln_binom(w as u64, p.r_adj as u64) - ln_binom(d as u64, p.r_adj as u64)).exp();
    Some((size * frac, p.dir, p.r_adj))
}

pub fn plan_similarity_params(n: usize, d: usize, w: usize, b1: f64, b2: f64) -> Result<SimilarityParams> {
    check_similarity(n, d, w, b1, b2)?;
    let ln_n = (n.max(2) as f64).ln();
    let r = ((ln_n / (1.0 / b2).ln()) - 1e-9).ceil().max(1.0) as usize;
    // Intersections are integers >= b1 w > 0, so k = 1 is always covered.
    let k = ((b1 * w as f64 + 1e-9).floor() as usize).max(1);
    let mut trace = vec![format!("r = ceil(ln n / ln(1/b2)) = {r}, k = max(1, floor(b1 w)) = {k}")];
    let rho = (1.0 / b1).ln() / (1.0 / b2).ln();
    let r15 = (r as f64).powf(1.5);
    let (mode, dir, blocks) = if k <= r {
        trace.push(format!("k <= r: all {k}-subsets"));
        (SimMode::AllSubsets, RoundDir::Up, binom_f64(w as u64, k as u64))
    } else {
        let copies = if (k as f64) <= r15 { (r15 / k as f64).floor() as usize + 1 } else { 1 };
        let (de, we, ke) = (d * copies, w * copies, k * copies);
        if ke >= de {
            (SimMode::AllSubsets, RoundDir::Up, binom_f64(w as u64, k as u64))
        } else {
            let mut best: Option<(f64, RoundDir, usize)> = None;
            for dir in [RoundDir::Up, RoundDir::Down] {
                if let Some(c) = turan_blocks_per_point(de, we, ke, r, dir) {
                    trace.push(format!("round {:?}: r -> {}, predicted {:.3e} blocks/point", c.1, c.2, c.0));
                    if best.map_or(true, |b| c.0 < b.0) {
                        best = Some(c);
                    }
                }
            }
            let (blocks, dir, _) =
                best.ok_or_else(|| Error::param(format!("no Turán system for ({de}, {ke}, {r})")))?;
            if copies > 1 {
                trace.push(format!("k <= r^1.5: sets repeated {copies} times"));
                (SimMode::SelfConcatenated { copies }, dir, blocks)
            } else {
                (SimMode::Turan, dir, blocks)
            }
        }
    };
    Ok(SimilarityParams {
        n,
        d,
        w,
        b1,
        b2,
        r,
        k,
        mode,
        dir,
        rho,
        blocks_per_point: blocks,
        trace,
    })
}
