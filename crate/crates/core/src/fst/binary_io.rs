//! Versioned little-endian binary serialization.
//!
//! Layout (version 1): magic `WFST`, u32 version, i64 start (-1 for none),
//! u64 state count, the final-weight array as f64 (`+inf` for non-final),
//! then per state a u32 arc count followed by `(u32, u32, f64, u32)` arcs.
//! Symbol tables are stored separately; the binary body round-trips with the
//! text format through them.

use super::{Arc, StateId, SymbolTable, Wfst};
use crate::{Error, Result, Weight};
use std::io::{Read, Write};
use std::sync::Arc as SharedArc;

const MAGIC: &[u8; 4] = b"WFST";
const VERSION: u32 = 1;

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.inner.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn i64(&mut self) -> Result<i64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b)?;
        Ok(i64::from_le_bytes(b))
    }
    fn f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }
}

/// Writes the binary form of a transducer.
pub fn write_binary<W: Write>(fst: &Wfst, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let start = fst.start().map(|s| s as i64).unwrap_or(-1);
    w.write_all(&start.to_le_bytes())?;
    w.write_all(&(fst.num_states() as u64).to_le_bytes())?;
    for s in fst.states() {
        w.write_all(&fst.final_weight(s).value().to_le_bytes())?;
    }
    for s in fst.states() {
        let arcs = fst.arcs(s);
        w.write_all(&(arcs.len() as u32).to_le_bytes())?;
        for a in arcs {
            w.write_all(&a.ilabel.to_le_bytes())?;
            w.write_all(&a.olabel.to_le_bytes())?;
            w.write_all(&a.weight.value().to_le_bytes())?;
            w.write_all(&a.nextstate.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a binary transducer and attaches the given symbol tables. Returns a
/// frozen value.
pub fn read_binary<R: Read>(
    r: R,
    isyms: SharedArc<SymbolTable>,
    osyms: SharedArc<SymbolTable>,
) -> Result<Wfst> {
    let mut rd = Reader { inner: r };
    let mut magic = [0u8; 4];
    rd.inner.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadBinary("bad magic, not a WFST file".into()));
    }
    let version = rd.u32()?;
    if version != VERSION {
        return Err(Error::BadBinary(format!("unsupported version {version}")));
    }
    let start = rd.i64()?;
    let n_states = rd.u64()? as usize;
    let mut fst = Wfst::new(isyms, osyms);
    for _ in 0..n_states {
        fst.add_state();
    }
    for s in 0..n_states {
        let w = rd.f64()?;
        if w != f64::INFINITY {
            fst.set_final(s as StateId, Weight(w))?;
        }
    }
    for s in 0..n_states {
        let n_arcs = rd.u32()? as usize;
        for _ in 0..n_arcs {
            let ilabel = rd.u32()?;
            let olabel = rd.u32()?;
            let weight = Weight(rd.f64()?);
            let nextstate = rd.u32()?;
            if nextstate as usize >= n_states {
                return Err(Error::BadBinary(format!(
                    "arc target {nextstate} out of range"
                )));
            }
            fst.add_arc(s as StateId, Arc::new(ilabel, olabel, weight, nextstate))?;
        }
    }
    if start >= 0 {
        if start as usize >= n_states {
            return Err(Error::BadBinary(format!("start {start} out of range")));
        }
        fst.set_start(start as StateId)?;
    }
    Ok(fst.freeze())
}

/// Convenience wrapper writing to a file path.
pub fn write_binary_file(fst: &Wfst, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_binary(fst, std::io::BufWriter::new(file))
}

/// Convenience wrapper reading from a file path.
pub fn read_binary_file(
    path: &std::path::Path,
    isyms: SharedArc<SymbolTable>,
    osyms: SharedArc<SymbolTable>,
) -> Result<Wfst> {
    let file = std::fs::File::open(path)?;
    read_binary(std::io::BufReader::new(file), isyms, osyms)
}
