//! `CQNLS-FIELD v1` files: a magic line, a JSON header line
//! `{"n":..,"half_width":..}`, then `n*n` little-endian `f64` pairs (re, im)
//! in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Field2D, GridSpec};
use crate::error::{Error, Result};

pub const FIELD_MAGIC: &str = "CQNLS-FIELD v1";

#[derive(Serialize, Deserialize)]
struct Header {
    n: usize,
    half_width: f64,
}

pub fn write_field_to(u: &Field2D, mut w: impl Write) -> Result<()> {
    let header = Header {
        n: u.grid().n(),
        half_width: u.grid().half_width(),
    };
    writeln!(w, "{FIELD_MAGIC}")?;
    writeln!(
        w,
        "{}",
        serde_json::to_string(&header).expect("header serializes")
    )?;
    for z in u.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_from(r: impl Read) -> Result<Field2D> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim_end() != FIELD_MAGIC {
        return Err(Error::Format(format!(
            "bad magic line {:?}",
            line.trim_end()
        )));
    }
    line.clear();
    r.read_line(&mut line)?;
    let header: Header =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Format(format!("header: {e}")))?;
    let grid = GridSpec::new(header.n, header.half_width)?;
    let mut bytes = vec![0u8; grid.len() * 16];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("payload: {e}")))?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Field2D::new(grid, values)
}

pub fn write_field(u: &Field2D, path: impl AsRef<Path>) -> Result<()> {
    write_field_to(u, BufWriter::new(File::create(path)?))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field2D> {
    read_field_from(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_bit_exact() {
        let grid = GridSpec::new(16, 2.5).unwrap();
        let u = Field2D::from_fn(grid, |x, y| Complex64::new(x, -y));
        let mut buf = Vec::new();
        write_field_to(&u, &mut buf).unwrap();
        let header_end = b"CQNLS-FIELD v1\n{\"n\":16,\"half_width\":2.5}\n";
        assert_eq!(&buf[..header_end.len()], header_end);
        assert_eq!(buf.len(), header_end.len() + 256 * 16);
        let first = f64::from_le_bytes(
            buf[header_end.len()..header_end.len() + 8]
                .try_into()
                .unwrap(),
        );
        assert_eq!(first, -2.5);
        assert_eq!(read_field_from(&buf[..]).unwrap(), u);
    }

    #[test]
    fn rejects_corrupt_files() {
        assert!(read_field_from(&b"NOPE\n{}\n"[..]).is_err());
        assert!(
            read_field_from(&b"CQNLS-FIELD v1\n{\"n\":16,\"half_width\":1.0}\n\x00\x00"[..])
                .is_err()
        );
        assert!(read_field_from(&b"CQNLS-FIELD v1\n{\"n\":15,\"half_width\":1.0}\n"[..]).is_err());
    }
}
