//! Optional binary cache of RO-34 oracle results.
//!
//! Record format: 12 bytes little-endian, 4-byte input pattern followed by
//! the 8-byte binary64 bit pattern of the 34-bit round-to-odd result.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub fn write_cache(path: &Path, records: &[(u32, f64)]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for &(input, result) in records {
        w.write_all(&input.to_le_bytes())?;
        w.write_all(&result.to_bits().to_le_bytes())?;
    }
    w.flush()
}

pub fn read_cache(path: &Path) -> io::Result<Vec<(u32, f64)>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    let mut rec = [0u8; 12];
    loop {
        match r.read_exact(&mut rec) {
            Ok(()) => {
                let input = u32::from_le_bytes(rec[0..4].try_into().unwrap());
                let bits = u64::from_le_bytes(rec[4..12].try_into().unwrap());
                out.push((input, f64::from_bits(bits)));
            }
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
