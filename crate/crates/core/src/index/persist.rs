//! `LVLSF1` container: magic, a length-prefixed header holding the
//! parameters and rounding traces, then the length-prefixed index body.
//! Both parts are bincode; every collection is a `Vec`, so encoding is
//! deterministic.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::plan::{HammingParams, SimilarityParams};
use super::LsfIndex;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"LVLSF1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParamsBlock {
    Hamming(HammingParams),
    Similarity(Vec<SimilarityParams>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub params: ParamsBlock,
    pub traces: Vec<String>,
}

impl Header {
    pub fn of(index: &LsfIndex) -> Header {
        match index {
            LsfIndex::Hamming(h) => Header {
                params: ParamsBlock::Hamming(h.params().clone()),
                traces: h.params().trace.clone(),
            },
            LsfIndex::Similarity(s) => {
                let params: Vec<SimilarityParams> = s.groups().iter().map(|g| g.params.clone()).collect();
                let traces = params
                    .iter()
                    .flat_map(|p| p.trace.iter().map(move |t| format!("w = {}: {t}", p.w)))
                    .collect();
                Header { params: ParamsBlock::Similarity(params), traces }
            }
        }
    }
}

fn encode<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    bincode::serialize(v).map_err(|e| Error::Format(e.to_string()))
}

fn write_section(w: &mut impl Write, bytes: &[u8]) -> Result<()> {
    w.write_all(&(bytes.len() as u64).to_le_bytes())?;
    w.write_all(bytes)?;
    Ok(())
}

fn read_section(r: &mut impl Read) -> Result<Vec<u8>> {
    let mut len = [0u8; 8];
    r.read_exact(&mut len).map_err(|e| Error::Format(format!("truncated container: {e}")))?;
    let len = u64::from_le_bytes(len);
    let mut buf = Vec::new();
    r.take(len).read_to_end(&mut buf)?;
    if buf.len() as u64 != len {
        return Err(Error::Format(format!("section of {len} bytes truncated to {}", buf.len())));
    }
    Ok(buf)
}

pub fn write_index(w: &mut impl Write, index: &LsfIndex) -> Result<()> {
    w.write_all(MAGIC)?;
    write_section(w, &encode(&Header::of(index))?)?;
    write_section(w, &encode(index)?)?;
    Ok(())
}

pub fn read_index(r: &mut impl Read) -> Result<(Header, LsfIndex)> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic).map_err(|_| Error::Format("missing LVLSF1 magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let header: Header =
        bincode::deserialize(&read_section(r)?).map_err(|e| Error::Format(format!("header: {e}")))?;
    let index: LsfIndex =
        bincode::deserialize(&read_section(r)?).map_err(|e| Error::Format(format!("body: {e}")))?;
    if Header::of(&index) != header {
        return Err(Error::Format("header does not match index body".into()));
    }
    Ok((header, index))
}

pub fn to_bytes(index: &LsfIndex) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_index(&mut out, index)?;
    Ok(out)
}

pub fn save(index: &LsfIndex, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_index(&mut f, index)?;
    f.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<LsfIndex> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    Ok(read_index(&mut f)?.1)
}
