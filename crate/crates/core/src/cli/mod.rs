//! Batch front end: `gen`, `build`, `query`, `bench` and `verify`.
//!
//! CSV outputs have fixed columns: [`QueryRow`] for `query`,
//! [`BenchRecord`] for `bench` and [`VerifyRow`] for `verify`.

pub mod bench;
pub mod gen;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{read_truth, Dataset, TruthRow};
use crate::index::{
    build_hamming_index, build_similarity_index, load, plan_hamming_with, predicted_entries, save, HammingConfig,
    LsfIndex, Mode, QueryOutcome, ReductionKind, SimMode,
};
use crate::seed::Seed;
use crate::setpoint::braun_blanquet;

pub use bench::{fit_exponent, run_bench, BenchKind, BenchRecord, BenchSpec};
pub use gen::{planted_hamming, planted_l1, planted_sets, sidecar, Generated};
pub use verify::{run_suite, Suite, VerifyOptions, VerifyRow};

#[derive(Debug, Parser)]
#[command(name = "lvlsf", version, about = "Near-neighbour indexes with no false negatives")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random dataset with planted neighbours: <out>, <out>.queries, <out>.truth.
    Gen(GenArgs),
    /// Build an index and save it as an LVLSF1 container.
    Build(BuildArgs),
    /// Run queries against a saved index and report each answer as CSV.
    Query(QueryArgs),
    /// Generate, build and query at several n; one CSV row per n.
    Bench(BenchArgs),
    /// Exhaustive and statistical verification suites; one CSV row per case.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Hamming,
    Sets,
    L1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Theorem,
    Corollary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReductionArg {
    Xor,
    Partition,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Theorem => Mode::Theorem,
            ModeArg::Corollary => Mode::Corollary,
        }
    }
}

impl From<ReductionArg> for ReductionKind {
    fn from(r: ReductionArg) -> ReductionKind {
        match r {
            ReductionArg::Xor => ReductionKind::Xor,
            ReductionArg::Partition => ReductionKind::Partition,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// Set weight (sets only).
    #[arg(long)]
    pub w: Option<usize>,
    /// Planted distance (hamming, l1).
    #[arg(long)]
    pub r: Option<f64>,
    /// Planted similarity (sets).
    #[arg(long)]
    pub b1: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub queries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Index parameters shared by `build` and `bench`.
#[derive(Clone, Debug, Args)]
pub struct IndexArgs {
    /// Near radius (hamming).
    #[arg(long)]
    pub r: Option<usize>,
    /// Approximation factor (hamming).
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value = "theorem")]
    pub mode: ModeArg,
    /// Defaults to xor in theorem mode and partition in corollary mode.
    #[arg(long, value_enum)]
    pub reduction: Option<ReductionArg>,
    /// Near similarity (sets).
    #[arg(long)]
    pub b1: Option<f64>,
    /// Far similarity (sets).
    #[arg(long)]
    pub b2: Option<f64>,
    /// Largest number of bucket entries the planner may predict.
    #[arg(long)]
    pub cost_guard: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub index: IndexArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    /// Planted pairs; queries listed here must be answered.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Comma-separated data set sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long)]
    pub d: usize,
    /// Set weight (sets).
    #[arg(long)]
    pub w: Option<usize>,
    #[command(flatten)]
    pub index: IndexArgs,
    #[arg(long, default_value_t = 1000)]
    pub queries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Largest exhaustive size (splitter domain, covering block, Turán n).
    #[arg(long)]
    pub max: Option<usize>,
    /// Random pairs per statistical check.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Cases whose enumeration exceeds this many steps are skipped.
    #[arg(long)]
    pub cost_guard: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Process entry point; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lvlsf: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen_cmd(&a),
        Command::Build(a) => {
            let data = Dataset::read_path(&a.data)?;
            let index = build_index(data, &a.index, &Seed::new(a.seed))?;
            save(&index, &a.out)?;
            eprintln!("{}: {} points, {} entries, {}", a.out.display(), index.len(), index.entries(), describe(&index));
            Ok(())
        }
        Command::Query(a) => {
            let index = load(&a.index)?;
            let queries = Dataset::read_path(&a.queries)?;
            let truth = match &a.truth {
                Some(p) => Some(read_truth(std::io::BufReader::new(std::fs::File::open(p)?))?),
                None => None,
            };
            let rows = query_rows(&index, &queries, truth.as_deref())?;
            write_csv(a.out.as_deref(), &rows)?;
            let wrong = rows.iter().filter(|r| !r.correct).count();
            if wrong > 0 {
                return Err(Error::Verification(format!("{wrong} of {} queries answered incorrectly", rows.len())));
            }
            Ok(())
        }
        Command::Bench(a) => {
            let spec = bench_spec(&a)?;
            let rows = run_bench(&spec)?;
            write_csv(a.out.as_deref(), &rows)?;
            match rows.iter().find(|r| r.recall < 1.0) {
                Some(r) => Err(Error::Verification(format!("recall {} at n = {}", r.recall, r.n))),
                None => Ok(()),
            }
        }
        Command::Verify(a) => {
            let opts = VerifyOptions { max: a.max, pairs: a.pairs, cost_guard: a.cost_guard, seed: Seed::new(a.seed) };
            let rows = run_suite(a.suite, &opts)?;
            write_csv(a.out.as_deref(), &rows)?;
            let failed: Vec<String> = rows
                .iter()
                .filter(|r| r.status == verify::Status::Fail)
                .map(|r| format!("{}/{}", r.suite, r.case))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Error::Verification(format!("{} failing cases: {}", failed.len(), failed.join(", "))))
            }
        }
    }
}

fn gen_cmd(a: &GenArgs) -> Result<()> {
    let seed = Seed::new(a.seed);
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::param(format!("--{name} is required for {:?}", a.kind)));
    let g = match a.kind {
        Kind::Hamming => {
            let r = need(a.r, "r")?;
            if r < 0.0 || r.fract() != 0.0 {
                return Err(Error::param(format!("hamming radius must be a non-negative integer, got {r}")));
            }
            planted_hamming(a.n, a.d, r as usize, a.queries, &seed)?
        }
        Kind::Sets => {
            let w = a.w.ok_or_else(|| Error::param("--w is required for sets"))?;
            planted_sets(a.n, a.d, w, need(a.b1, "b1")?, a.queries, &seed)?
        }
        Kind::L1 => planted_l1(a.n, a.d, need(a.r, "r")?, a.queries, &seed)?,
    };
    g.write(&a.out)
}

fn bench_spec(a: &BenchArgs) -> Result<BenchSpec> {
    let kind = match a.kind {
        Kind::Hamming => BenchKind::Hamming {
            r: a.index.r.ok_or_else(|| Error::param("--r is required for hamming"))?,
            c: a.index.c,
            cfg: hamming_config(&a.index),
        },
        Kind::Sets => BenchKind::Sets {
            w: a.w.ok_or_else(|| Error::param("--w is required for sets"))?,
            b1: a.index.b1.ok_or_else(|| Error::param("--b1 is required for sets"))?,
            b2: a.index.b2.ok_or_else(|| Error::param("--b2 is required for sets"))?,
        },
        Kind::L1 => return Err(Error::param("bench supports hamming and sets")),
    };
    Ok(BenchSpec {
        kind,
        ns: a.n.clone(),
        d: a.d,
        queries: a.queries,
        seed: Seed::new(a.seed),
        colliding: true,
        cost_guard: a.index.cost_guard,
    })
}

pub fn hamming_config(a: &IndexArgs) -> HammingConfig {
    HammingConfig {
        mode: a.mode.into(),
        reduction: a.reduction.map(Into::into),
        ..HammingConfig::default()
    }
}

fn guard(predicted: f64, limit: Option<u64>) -> Result<()> {
    match limit {
        Some(g) if predicted > g as f64 => Err(Error::CostGuard(format!(
            "about {predicted:.3e} bucket entries predicted, guard is {g}"
        ))),
        _ => Ok(()),
    }
}

/// Plans and builds an index for a Hamming or set dataset.
pub fn build_index(data: Dataset, a: &IndexArgs, seed: &Seed) -> Result<LsfIndex> {
    match data {
        Dataset::Hamming { d, points } => {
            let r = a.r.ok_or_else(|| Error::param("--r is required for hamming data"))?;
            let params = plan_hamming_with(points.len(), d, r, a.c, &hamming_config(a))?;
            guard(points.len() as f64 * params.layout.filters, a.cost_guard)?;
            Ok(LsfIndex::Hamming(build_hamming_index(points, &params, seed)?))
        }
        Dataset::Sets { d, points } => {
            let b1 = a.b1.ok_or_else(|| Error::param("--b1 is required for set data"))?;
            let b2 = a.b2.ok_or_else(|| Error::param("--b2 is required for set data"))?;
            if a.cost_guard.is_some() {
                guard(predicted_entries(&points, d, b1, b2)?, a.cost_guard)?;
            }
            Ok(LsfIndex::Similarity(build_similarity_index(points, d, b1, b2, seed)?))
        }
        Dataset::L1 { .. } => Err(Error::param("l1 data must be embedded into Hamming space before indexing")),
    }
}

/// One-line parameter summary.
pub fn describe(index: &LsfIndex) -> String {
    match index {
        LsfIndex::Hamming(h) => {
            let p = h.params();
            let l = &p.layout;
            format!(
                "{} S={} B={} b={} l={} r'={} t={} r={} c={}",
                format!("{:?}/{:?}", p.mode, p.reduction).to_lowercase(),
                l.outputs,
                l.block,
                l.inner_dim,
                l.parts,
                l.r_prime,
                l.inner_radius,
                p.r,
                p.c
            )
        }
        LsfIndex::Similarity(s) => {
            let (b1, b2) = s.thresholds();
            let groups: Vec<String> = s
                .groups()
                .iter()
                .map(|g| {
                    let p = &g.params;
                    let mode = match p.mode {
                        SimMode::AllSubsets => "all".to_string(),
                        SimMode::SelfConcatenated { copies } => format!("concat{copies}"),
                        SimMode::Turan => format!("turan-{:?}", p.dir).to_lowercase(),
                    };
                    format!("w={} r={} k={} {mode}", p.w, p.r, p.k)
                })
                .collect();
            format!("b1={b1} b2={b2} {}", groups.join("; "))
        }
    }
}

/// Per-query report of `query`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRow {
    pub query: usize,
    pub answer: Option<usize>,
    /// Distance or similarity of the answer.
    pub value: Option<f64>,
    pub candidates: usize,
    pub filters: usize,
    /// Linear scan found a stored point within the near threshold.
    pub near_exists: bool,
    /// Planted neighbour from the truth file.
    pub planted: Option<usize>,
    /// The answer passes the far threshold, and one exists whenever a near point does.
    pub correct: bool,
}

/// Answers every query and checks it against a linear scan.
pub fn query_rows(index: &LsfIndex, queries: &Dataset, truth: Option<&[TruthRow]>) -> Result<Vec<QueryRow>> {
    let n = queries.len();
    let mut planted = vec![None; n];
    for t in truth.unwrap_or_default() {
        if t.query >= n || t.point >= index.len() {
            return Err(Error::param(format!("truth row ({}, {}) out of range", t.query, t.point)));
        }
        planted[t.query] = Some(t.point);
    }
    let mut rows = Vec::with_capacity(n);
    match (index, queries) {
        (LsfIndex::Hamming(h), Dataset::Hamming { points: qs, .. }) => {
            let (r, far) = (h.params().r, h.params().far_radius());
            for (i, q) in qs.iter().enumerate() {
                let out = h.query(q)?;
                let near_exists = h.points().iter().any(|p| p.dist(q) <= r);
                let value = out.answer.map(|a| h.points()[a].dist(q));
                let ok = value.map_or(!near_exists, |v| v <= far);
                rows.push(row(i, &out, value.map(|v| v as f64), near_exists, planted[i], ok));
            }
        }
        (LsfIndex::Similarity(s), Dataset::Sets { points: qs, .. }) => {
            let (b1, b2) = s.thresholds();
            for (i, q) in qs.iter().enumerate() {
                let out = s.query(q)?;
                let near_exists = crate::oracle::linear_scan_sets(s.points(), q, b1)?.first().is_some();
                let sim = match out.answer {
                    Some(a) => Some(braun_blanquet(&s.points()[a], q)?),
                    None => None,
                };
                let ok = sim.map_or(!near_exists, |v| v.above(b2));
                rows.push(row(i, &out, sim.map(|v| v.value()), near_exists, planted[i], ok));
            }
        }
        _ => {
            return Err(Error::param(format!("{} queries against a {} index", queries.kind(), index.kind())));
        }
    }
    Ok(rows)
}

fn row(query: usize, out: &QueryOutcome, value: Option<f64>, near_exists: bool, planted: Option<usize>, ok: bool) -> QueryRow {
    QueryRow {
        query,
        answer: out.answer,
        value,
        candidates: out.candidates,
        filters: out.filters,
        near_exists,
        planted,
        correct: ok && (planted.is_none() || out.answer.is_some()),
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes `rows` with a header line to `out`, or to standard output.
pub fn write_csv<T: Serialize>(out: Option<&Path>, rows: &[T]) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(input: impl std::io::Read) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("lvlsf".to_string()).chain(s.split_whitespace().map(String::from)).collect()
    }

    #[test]
    fn query_rows_round_trip() {
        let rows = vec![
            QueryRow { query: 0, answer: Some(3), value: Some(2.0), candidates: 4, filters: 9, near_exists: true, planted: Some(3), correct: true },
            QueryRow { query: 1, answer: None, value: None, candidates: 0, filters: 9, near_exists: false, planted: None, correct: true },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.csv");
        write_csv(Some(&p), &rows).unwrap();
        let back: Vec<QueryRow> = read_csv(std::fs::File::open(&p).unwrap()).unwrap();
        assert_eq!(back, rows);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("query,answer,value,candidates,filters,near_exists,planted,correct\n"));
    }

    #[test]
    fn gen_build_query_hamming() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("h.txt");
        let idx = dir.path().join("h.idx");
        let out = dir.path().join("q.csv");
        let d = data.display();
        assert_eq!(main_with(args(&format!("gen --kind hamming --n 200 --d 64 --r 4 --queries 50 --seed 3 --out {d}"))), 0);
        assert_eq!(main_with(args(&format!("build --data {d} --out {} --r 4 --seed 1", idx.display()))), 0);
        let q = format!(
            "query --index {} --queries {d}.queries --truth {d}.truth --out {}",
            idx.display(),
            out.display()
        );
        assert_eq!(main_with(args(&q)), 0);
        let rows: Vec<QueryRow> = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
        assert_eq!(rows.len(), 50);
        assert!(rows.iter().all(|r| r.correct && r.answer.is_some() && r.candidates >= 1 && r.near_exists));
    }

    #[test]
    fn gen_build_query_sets() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("s.txt");
        let idx = dir.path().join("s.idx");
        let out = dir.path().join("q.csv");
        let d = data.display();
        assert_eq!(main_with(args(&format!("gen --kind sets --n 150 --d 300 --w 16 --b1 0.5 --queries 40 --out {d}"))), 0);
        assert_eq!(main_with(args(&format!("build --data {d} --out {} --b1 0.5 --b2 0.25", idx.display()))), 0);
        let q = format!("query --index {} --queries {d}.queries --truth {d}.truth --out {}", idx.display(), out.display());
        assert_eq!(main_with(args(&q)), 0);
        let rows: Vec<QueryRow> = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
        assert!(rows.iter().all(|r| r.correct && r.value.unwrap() > 0.25));
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("l.txt");
        let d = data.display();
        assert_eq!(main_with(args(&format!("gen --kind l1 --n 20 --d 3 --r 1.5 --queries 5 --out {d}"))), 0);
        let idx = dir.path().join("l.idx");
        assert_eq!(main_with(args(&format!("build --data {d} --out {}", idx.display()))), 2);
        assert_eq!(main_with(args(&format!("gen --kind sets --n 20 --d 30 --out {d}"))), 2);
        assert_eq!(main_with(args("gen --kind nope --n 1 --d 1 --out x")), 2);
        let h = dir.path().join("h.txt");
        assert_eq!(main_with(args(&format!("gen --kind hamming --n 500 --d 64 --r 4 --out {}", h.display()))), 0);
        let guarded = format!("build --data {} --out {} --r 4 --cost-guard 10", h.display(), idx.display());
        assert_eq!(main_with(args(&guarded)), 3);
        assert_eq!(main_with(args(&format!("query --index {} --queries {d}", dir.path().join("missing").display()))), 1);
    }

    #[test]
    fn truth_mismatch_is_reported() {
        let g = planted_hamming(50, 32, 2, 5, &Seed::new(1)).unwrap();
        let Dataset::Hamming { d, points } = g.data.clone() else { unreachable!() };
        let a = IndexArgs { r: Some(2), c: 2.0, mode: ModeArg::Theorem, reduction: None, b1: None, b2: None, cost_guard: None };
        let index = build_index(Dataset::Hamming { d, points }, &a, &Seed::new(0)).unwrap();
        let rows = query_rows(&index, &g.queries, Some(&g.truth)).unwrap();
        assert!(rows.iter().all(|r| r.correct));
        let far = Dataset::Hamming { d: 32, points: vec![crate::BitVector::ones(32); 1] };
        let rows = query_rows(&index, &far, Some(&[TruthRow { query: 0, point: 0, value: 0.0 }])).unwrap();
        assert_eq!(rows[0].correct, rows[0].answer.is_some());
        assert!(query_rows(&index, &g.data, Some(&[TruthRow { query: 99, point: 0, value: 0.0 }])).is_err());
    }
}
