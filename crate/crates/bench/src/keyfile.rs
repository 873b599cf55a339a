//! Key files: newline-delimited decimal text, or a binary form of an
//! 8-byte magic, one width byte, then little-endian keys of `width / 8`
//! bytes each.

use std::io::{BufRead, Write};

use fusion_core::Width;

use crate::error::{BenchError, Result};

pub const MAGIC: &[u8; 8] = b"FUSKEYS\0";

pub fn write_text<W: Write>(mut out: W, keys: &[u64]) -> Result<()> {
    for k in keys {
        writeln!(out, "{k}")?;
    }
    Ok(())
}

pub fn read_text<R: BufRead>(input: R, width: Width) -> Result<Vec<u64>> {
    let mut keys = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let k: u64 = line
            .parse()
            .map_err(|e| BenchError::KeyFile(format!("line {}: {e}", lineno + 1)))?;
        if !width.fits(k) {
            return Err(BenchError::KeyFile(format!("line {}: {k} exceeds {width} bits", lineno + 1)));
        }
        keys.push(k);
    }
    Ok(keys)
}

pub fn write_binary<W: Write>(mut out: W, keys: &[u64], width: Width) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&[width.bits() as u8])?;
    let bytes = width.bits() as usize / 8;
    for &k in keys {
        if !width.fits(k) {
            return Err(BenchError::KeyFile(format!("{k} exceeds {width} bits")));
        }
        out.write_all(&k.to_le_bytes()[..bytes])?;
    }
    Ok(())
}

/// Returns the stored width and the keys.
pub fn read_binary(data: &[u8]) -> Result<(Width, Vec<u64>)> {
    if data.len() < 9 || &data[..8] != MAGIC {
        return Err(BenchError::KeyFile("missing magic header".into()));
    }
    let width = Width::new(data[8] as u32).map_err(|e| BenchError::KeyFile(e.to_string()))?;
    let bytes = width.bits() as usize / 8;
    let body = &data[9..];
    if !body.len().is_multiple_of(bytes) {
        return Err(BenchError::KeyFile(format!(
            "body of {} bytes is not a multiple of {bytes}",
            body.len()
        )));
    }
    let keys = body
        .chunks_exact(bytes)
        .map(|c| {
            let mut buf = [0u8; 8];
            buf[..bytes].copy_from_slice(c);
            u64::from_le_bytes(buf)
        })
        .collect();
    Ok((width, keys))
}

/// Reads either format, detecting binary by its magic.
pub fn read_any(data: &[u8], width: Width) -> Result<Vec<u64>> {
    if data.starts_with(MAGIC) {
        let (stored, keys) = read_binary(data)?;
        if stored != width {
            return Err(BenchError::KeyFile(format!("file holds {stored}-bit keys, expected {width}")));
        }
        Ok(keys)
    } else {
        read_text(data, width)
    }
}
