//! Binary persistence for [`SimIndex`].
//!
//! Layout (all integers little-endian, strings are a `u32` byte length
//! followed by UTF-8 bytes):
//!
//! ```text
//! magic        7 bytes  "UVAIDX1"
//! corpus_hash  string
//! df_cutoff    u64      (u64::MAX when disabled)
//! n_atoms      u32
//! n_tokens     u32
//! n_tokens × { token string, n_postings u32, n_postings × atom u32 }
//! ```
//!
//! Tokens appear in ascending byte order and postings are ascending atom ids
//! in the corpus' dense numbering (atoms sorted by AUI).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{IndexOptions, SimIndex};
use crate::corpus::AtomId;
use crate::error::{Error, Result};

pub const INDEX_MAGIC: &[u8; 7] = b"UVAIDX1";

pub fn write_index(index: &SimIndex, path: &Path) -> Result<()> {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut w = BufWriter::new(file);
    encode(index, &mut w).map_err(|e| Error::io(ctx(), e))?;
    w.flush().map_err(|e| Error::io(ctx(), e))
}

fn encode(index: &SimIndex, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(INDEX_MAGIC)?;
    put_str(w, index.corpus_hash())?;
    let cutoff = index.options().df_cutoff.map_or(u64::MAX, |c| c as u64);
    w.write_all(&cutoff.to_le_bytes())?;
    put_u32(w, index.n_atoms() as u32)?;
    put_u32(w, index.vocabulary().len() as u32)?;
    for (token, list) in index.vocabulary().iter().zip(index.raw_postings()) {
        put_str(w, token)?;
        put_u32(w, list.len() as u32)?;
        for atom in list {
            put_u32(w, atom.0)?;
        }
    }
    Ok(())
}

pub fn read_index(path: &Path) -> Result<SimIndex> {
    let ctx = || format!("reading {}", path.display());
    let file = File::open(path).map_err(|e| Error::io(ctx(), e))?;
    let mut r = BufReader::new(file);
    let bad = |what: &str| Error::Validation(format!("{}: {what}", path.display()));

    let mut magic = [0u8; 7];
    r.read_exact(&mut magic)
        .map_err(|_| bad("truncated header"))?;
    if &magic != INDEX_MAGIC {
        return Err(bad("not a UVAIDX1 index file"));
    }
    let truncated = |_| bad("truncated index body");
    let corpus_hash = get_str(&mut r).map_err(truncated)?;
    let cutoff = get_u64(&mut r).map_err(truncated)?;
    let n_atoms = get_u32(&mut r).map_err(truncated)? as usize;
    let n_tokens = get_u32(&mut r).map_err(truncated)? as usize;
    let mut vocabulary = Vec::with_capacity(n_tokens.min(1 << 20));
    let mut postings = Vec::with_capacity(n_tokens.min(1 << 20));
    for _ in 0..n_tokens {
        vocabulary.push(get_str(&mut r).map_err(truncated)?);
        let n = get_u32(&mut r).map_err(truncated)? as usize;
        let mut list = Vec::with_capacity(n.min(n_atoms));
        for _ in 0..n {
            list.push(AtomId(get_u32(&mut r).map_err(truncated)?));
        }
        postings.push(list);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io(ctx(), e))? != 0 {
        return Err(bad("trailing bytes after index body"));
    }
    let options = IndexOptions {
        df_cutoff: (cutoff != u64::MAX).then_some(cutoff as usize),
    };
    SimIndex::from_parts(corpus_hash, options, vocabulary, postings, n_atoms)
}

fn put_u32(w: &mut impl Write, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_str(w: &mut impl Write, s: &str) -> std::io::Result<()> {
    put_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn get_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_str(r: &mut impl Read) -> std::io::Result<String> {
    let n = get_u32(r)? as usize;
    let mut b = vec![0u8; n];
    r.read_exact(&mut b)?;
    String::from_utf8(b).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::testing::corpus_of;

    #[test]
    fn round_trip_and_rejects_garbage() {
        let corpus = corpus_of(&[
            ("A1", "lung cancer", "C1"),
            ("A2", "skin cancer", "C2"),
            ("A3", "fracture", "C3"),
        ]);
        let index = SimIndex::build(&corpus);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        write_index(&index, &path).unwrap();
        assert_eq!(read_index(&path).unwrap(), index);

        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..7], b"UVAIDX1");
        std::fs::write(&path, &bytes[..bytes.len() - 2]).unwrap();
        assert!(matches!(read_index(&path), Err(Error::Validation(_))));
        std::fs::write(&path, b"NOTANIDX").unwrap();
        assert!(matches!(read_index(&path), Err(Error::Validation(_))));
    }
}
