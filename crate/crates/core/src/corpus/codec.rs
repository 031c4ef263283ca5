//! Binary index format.
//!
//! ```text
//! magic            4 bytes  "PSXI"
//! format version   u16 LE   FORMAT_VERSION
//! tokenizer rules  u16 LE   TOKENIZER_VERSION at write time
//! total_tokens     varint
//! vocab_len        varint
//! vocab_len times: varint byte length, UTF-8 bytes        (term id order)
//! vocab_len times: varint count, count varint gaps         (postings)
//! doc_count        varint, doc_count varint gaps           (document starts)
//! trailer          4 bytes  "IEND"
//! ```
//!
//! Varints are unsigned LEB128. A gap list stores its first value as is and
//! every later value as the difference from its predecessor.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{CorpusIndex, TOKENIZER_VERSION};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PSXI";
pub const FORMAT_VERSION: u16 = 1;
const TRAILER: &[u8; 4] = b"IEND";

fn write_varint<W: Write>(w: &mut W, mut v: u64) -> std::io::Result<()> {
    let mut buf = [0u8; 10];
    let mut n = 0;
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            buf[n] = byte;
            n += 1;
            break;
        }
        buf[n] = byte | 0x80;
        n += 1;
    }
    w.write_all(&buf[..n])
}

fn read_varint<R: Read>(r: &mut R) -> Result<u64> {
    let mut out = 0u64;
    let mut shift = 0;
    loop {
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte).map_err(truncated)?;
        if shift >= 64 {
            return Err(Error::Format("varint overflow".into()));
        }
        out |= u64::from(byte[0] & 0x7f) << shift;
        if byte[0] & 0x80 == 0 {
            return Ok(out);
        }
        shift += 7;
    }
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("unexpected end of data".into())
    } else {
        Error::Io(e)
    }
}

fn write_gaps<W: Write>(w: &mut W, values: &[u32]) -> std::io::Result<()> {
    write_varint(w, values.len() as u64)?;
    let mut prev = 0u32;
    for (i, &v) in values.iter().enumerate() {
        let gap = if i == 0 { v } else { v - prev };
        write_varint(w, u64::from(gap))?;
        prev = v;
    }
    Ok(())
}

fn read_gaps<R: Read>(r: &mut R, limit: usize) -> Result<Vec<u32>> {
    let count = read_varint(r)? as usize;
    if count > limit {
        return Err(Error::Format(format!(
            "list of {count} entries exceeds {limit}"
        )));
    }
    let mut out = Vec::with_capacity(count);
    let mut prev = 0u64;
    for i in 0..count {
        let gap = read_varint(r)?;
        if i > 0 && gap == 0 {
            return Err(Error::Format("list is not strictly increasing".into()));
        }
        let v = if i == 0 { gap } else { prev + gap };
        if v > u64::from(u32::MAX) {
            return Err(Error::Format("position overflow".into()));
        }
        out.push(v as u32);
        prev = v;
    }
    Ok(out)
}

impl CorpusIndex {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&TOKENIZER_VERSION.to_le_bytes())?;
        write_varint(&mut w, self.total_tokens() as u64)?;
        write_varint(&mut w, self.vocabulary_len() as u64)?;
        for term in &self.terms {
            write_varint(&mut w, term.len() as u64)?;
            w.write_all(term.as_bytes())?;
        }
        for list in &self.postings {
            write_gaps(&mut w, list)?;
        }
        write_gaps(&mut w, &self.doc_starts)?;
        w.write_all(TRAILER)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let mut word = [0u8; 2];
        r.read_exact(&mut word).map_err(truncated)?;
        let version = u16::from_le_bytes(word);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {version}"
            )));
        }
        r.read_exact(&mut word).map_err(truncated)?;
        let tokenizer = u16::from_le_bytes(word);
        if tokenizer != TOKENIZER_VERSION {
            return Err(Error::Format(format!(
                "index built with tokenizer rules v{tokenizer}, this build uses v{TOKENIZER_VERSION}"
            )));
        }
        let total = read_varint(&mut r)? as usize;
        if total > u32::MAX as usize {
            return Err(Error::Format("token count overflow".into()));
        }
        let vocab = read_varint(&mut r)? as usize;
        if vocab > total {
            return Err(Error::Format("vocabulary larger than corpus".into()));
        }
        let mut terms = Vec::with_capacity(vocab);
        for _ in 0..vocab {
            let len = read_varint(&mut r)? as usize;
            if len > 1 << 20 {
                return Err(Error::Format("term longer than 1 MiB".into()));
            }
            let mut bytes = vec![0u8; len];
            r.read_exact(&mut bytes).map_err(truncated)?;
            let term = String::from_utf8(bytes)
                .map_err(|e| Error::Format(format!("term is not UTF-8: {e}")))?;
            terms.push(term);
        }
        let mut postings = Vec::with_capacity(vocab);
        for _ in 0..vocab {
            postings.push(read_gaps(&mut r, total)?);
        }
        let docs = read_gaps(&mut r, total)?;
        let mut trailer = [0u8; 4];
        r.read_exact(&mut trailer).map_err(truncated)?;
        if &trailer != TRAILER {
            return Err(Error::Format("missing trailer".into()));
        }
        CorpusIndex::from_parts(terms, postings, total, docs)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
