//! Text point files.
//!
//! ```text
//! hamming d=<d> n=<n>      sets d=<d> n=<n>          l1 d=<d> n=<n>
//! <hex per line>           <sorted ints per line>    <d reals per line>
//! ```

use std::io::{BufRead, Write};

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::setpoint::SetPoint;

#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    Hamming { d: usize, points: Vec<BitVector> },
    Sets { d: usize, points: Vec<SetPoint> },
    L1 { d: usize, points: Vec<Vec<f64>> },
}

impl Dataset {
    pub fn kind(&self) -> &'static str {
        match self {
            Dataset::Hamming { .. } => "hamming",
            Dataset::Sets { .. } => "sets",
            Dataset::L1 { .. } => "l1",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Dataset::Hamming { d, .. } | Dataset::Sets { d, .. } | Dataset::L1 { d, .. } => *d,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Hamming { points, .. } => points.len(),
            Dataset::Sets { points, .. } => points.len(),
            Dataset::L1 { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} d={} n={}", self.kind(), self.dim(), self.len())?;
        match self {
            Dataset::Hamming { points, .. } => {
                for p in points {
                    writeln!(out, "{}", p.to_hex())?;
                }
            }
            Dataset::Sets { points, .. } => {
                for p in points {
                    let line: Vec<String> = p.elements().iter().map(|e| e.to_string()).collect();
                    writeln!(out, "{}", line.join(" "))?;
                }
            }
            Dataset::L1 { points, .. } => {
                for p in points {
                    let line: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
                    writeln!(out, "{}", line.join(" "))?;
                }
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Dataset> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = header?;
        let (kind, d, n) = parse_header(&header)?;
        let mut body = Vec::with_capacity(n);
        for (i, line) in lines {
            let line = line?;
            if body.len() == n {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("more than n={n} points"),
                });
            }
            body.push((i + 1, line));
        }
        if body.len() != n {
            return Err(Error::Parse {
                line: body.len() + 2,
                msg: format!("expected {n} points, found {}", body.len()),
            });
        }
        let at = |line: usize| move |e: Error| Error::Parse {
            line,
            msg: e.to_string(),
        };
        Ok(match kind.as_str() {
            "hamming" => Dataset::Hamming {
                d,
                points: body
                    .iter()
                    .map(|(l, s)| BitVector::from_hex(s, d).map_err(at(*l)))
                    .collect::<Result<_>>()?,
            },
            "sets" => Dataset::Sets {
                d,
                points: body
                    .iter()
                    .map(|(l, s)| parse_set(s, d).map_err(at(*l)))
                    .collect::<Result<_>>()?,
            },
            "l1" => Dataset::L1 {
                d,
                points: body
                    .iter()
                    .map(|(l, s)| parse_reals(s, d).map_err(at(*l)))
                    .collect::<Result<_>>()?,
            },
            other => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("unknown kind {other:?}"),
                })
            }
        })
    }

    pub fn read_path(path: &std::path::Path) -> Result<Dataset> {
        let f = std::fs::File::open(path)?;
        Dataset::read(std::io::BufReader::new(f))
    }

    pub fn write_path(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn parse_header(line: &str) -> Result<(String, usize, usize)> {
    let err = |msg: String| Error::Parse { line: 1, msg };
    let mut parts = line.split_whitespace();
    let kind = parts
        .next()
        .ok_or_else(|| err("empty header".into()))?
        .to_string();
    let (mut d, mut n) = (None, None);
    for p in parts {
        let (key, value) = p
            .split_once('=')
            .ok_or_else(|| err(format!("malformed field {p:?}")))?;
        let value: usize = value
            .parse()
            .map_err(|_| err(format!("malformed number in {p:?}")))?;
        match key {
            "d" => d = Some(value),
            "n" => n = Some(value),
            _ => return Err(err(format!("unknown field {key:?}"))),
        }
    }
    Ok((
        kind,
        d.ok_or_else(|| err("missing d".into()))?,
        n.ok_or_else(|| err("missing n".into()))?,
    ))
}

fn parse_set(line: &str, d: usize) -> Result<SetPoint> {
    let elems = line
        .split_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| Error::param(format!("bad element {t:?}")))
        })
        .collect::<Result<Vec<u32>>>()?;
    if elems.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("elements must be strictly increasing"));
    }
    SetPoint::new(d, elems)
}

fn parse_reals(line: &str, d: usize) -> Result<Vec<f64>> {
    let v = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::param(format!("bad real {t:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    crate::error::check_dim(d, v.len())?;
    Ok(v)
}

/// One line of a truth sidecar: query index, stored point index, and the
/// distance (Hamming, ℓ1) or similarity (sets) between them.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthRow {
    pub query: usize,
    pub point: usize,
    pub value: f64,
}

pub fn write_truth<W: Write>(mut out: W, rows: &[TruthRow]) -> Result<()> {
    for r in rows {
        writeln!(out, "{} {} {}", r.query, r.point, r.value)?;
    }
    Ok(())
}

pub fn read_truth<R: BufRead>(input: R) -> Result<Vec<TruthRow>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = || Error::Parse {
            line: i + 1,
            msg: format!("malformed truth row {line:?}"),
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err());
        }
        rows.push(TruthRow {
            query: f[0].parse().map_err(|_| err())?,
            point: f[1].parse().map_err(|_| err())?,
            value: f[2].parse().map_err(|_| err())?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(ds: &Dataset) -> Dataset {
        let mut buf = Vec::new();
        ds.write(&mut buf).unwrap();
        Dataset::read(&buf[..]).unwrap()
    }

    #[test]
    fn hamming_round_trip() {
        let ds = Dataset::Hamming {
            d: 10,
            points: vec![
                BitVector::from_bit_str("1000000001").unwrap(),
                BitVector::zeros(10),
            ],
        };
        assert_eq!(round_trip(&ds), ds);
        let mut buf = Vec::new();
        ds.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "hamming d=10 n=2\n102\n000\n");
    }

    #[test]
    fn sets_and_l1_round_trip() {
        let ds = Dataset::Sets {
            d: 20,
            points: vec![SetPoint::new(20, [1, 5, 19]).unwrap(), SetPoint::new(20, []).unwrap()],
        };
        assert_eq!(round_trip(&ds), ds);
        let ds = Dataset::L1 {
            d: 2,
            points: vec![vec![0.5, -3.25], vec![1e-3, 7.0]],
        };
        assert_eq!(round_trip(&ds), ds);
    }

    #[test]
    fn malformed_inputs() {
        assert!(Dataset::read(&b"hamming d=4\n0\n"[..]).is_err());
        assert!(Dataset::read(&b"hamming d=4 n=2\n0\n"[..]).is_err());
        assert!(Dataset::read(&b"sets d=4 n=1\n2 1\n"[..]).is_err());
        assert!(Dataset::read(&b"sets d=4 n=1\n1 4\n"[..]).is_err());
        assert!(Dataset::read(&b"l1 d=2 n=1\n1.0\n"[..]).is_err());
        assert!(Dataset::read(&b"cube d=2 n=0\n"[..]).is_err());
        match Dataset::read(&b"hamming d=4 n=2\n0\nz\n"[..]) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truth_round_trip() {
        let rows = vec![
            TruthRow { query: 0, point: 3, value: 2.0 },
            TruthRow { query: 1, point: 0, value: 0.5 },
        ];
        let mut buf = Vec::new();
        write_truth(&mut buf, &rows).unwrap();
        assert_eq!(read_truth(&buf[..]).unwrap(), rows);
    }
}
