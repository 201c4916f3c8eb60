//! IPMX binary matrix format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "IPMX"
//! 4       1     version (1)
//! 5       1     dtype (1 = f32, 2 = f64)
//! 6       8     rows, u64 little-endian
//! 14      8     cols, u64 little-endian
//! 22      ...   rows * cols values, row-major, little-endian
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{Error, Matrix, Result};

pub const IPMX_MAGIC: [u8; 4] = *b"IPMX";
pub const IPMX_VERSION: u8 = 1;
const HEADER_LEN: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IpmxDtype {
    /// Values are rounded to the nearest `f32` on write and widened back on
    /// read.
    F32,
    #[default]
    F64,
}

impl IpmxDtype {
    fn code(self) -> u8 {
        match self {
            IpmxDtype::F32 => 1,
            IpmxDtype::F64 => 2,
        }
    }

    fn width(self) -> usize {
        match self {
            IpmxDtype::F32 => 4,
            IpmxDtype::F64 => 8,
        }
    }
}

struct Header {
    dtype: IpmxDtype,
    rows: usize,
    cols: usize,
}

fn parse_header(h: &[u8; HEADER_LEN]) -> Result<Header> {
    let magic: [u8; 4] = h[0..4].try_into().unwrap();
    if magic != IPMX_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if h[4] != IPMX_VERSION {
        return Err(Error::UnsupportedVersion(h[4]));
    }
    let dtype = match h[5] {
        1 => IpmxDtype::F32,
        2 => IpmxDtype::F64,
        other => return Err(Error::UnsupportedDtype(other)),
    };
    let rows = u64::from_le_bytes(h[6..14].try_into().unwrap());
    let cols = u64::from_le_bytes(h[14..22].try_into().unwrap());
    let invalid = || Error::InvalidShape { rows: rows as usize, cols: cols as usize, len: 0 };
    let rows = usize::try_from(rows).map_err(|_| invalid())?;
    let cols = usize::try_from(cols).map_err(|_| invalid())?;
    if rows == 0 || cols == 0 || rows.checked_mul(cols).and_then(|n| n.checked_mul(8)).is_none() {
        return Err(invalid());
    }
    Ok(Header { dtype, rows, cols })
}

/// Reads header and payload from any byte stream. The stream must end right
/// after the payload.
pub fn decode_ipmx<R: Read>(mut r: R) -> Result<Matrix> {
    let io = |e| Error::io("<stream>", e);
    let mut h = [0u8; HEADER_LEN];
    let got = read_full(&mut r, &mut h).map_err(io)?;
    if got < 4 {
        return Err(Error::Truncated { expected: HEADER_LEN as u64, found: got as u64 });
    }
    let magic: [u8; 4] = h[0..4].try_into().unwrap();
    if magic != IPMX_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if got < HEADER_LEN {
        return Err(Error::Truncated { expected: HEADER_LEN as u64, found: got as u64 });
    }
    let header = parse_header(&h)?;
    let count = header.rows * header.cols;
    let width = header.dtype.width();
    let expected = (count * width) as u64;

    let mut data = Vec::with_capacity(count);
    let mut buf = vec![0u8; (1 << 16) * width];
    let mut read_bytes = 0u64;
    while data.len() < count {
        let want = ((count - data.len()) * width).min(buf.len());
        let got = read_full(&mut r, &mut buf[..want]).map_err(io)?;
        read_bytes += got as u64;
        if got < want {
            return Err(Error::Truncated { expected, found: read_bytes });
        }
        match header.dtype {
            IpmxDtype::F64 => {
                data.extend(buf[..want].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())))
            }
            IpmxDtype::F32 => {
                data.extend(buf[..want].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64))
            }
        }
    }
    let extra = std::io::copy(&mut r, &mut std::io::sink()).map_err(io)?;
    if extra > 0 {
        return Err(Error::TrailingData(extra));
    }
    Matrix::new(header.rows, header.cols, data)
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

pub fn encode_ipmx<W: Write>(matrix: &Matrix, dtype: IpmxDtype, mut w: W) -> std::io::Result<()> {
    w.write_all(&IPMX_MAGIC)?;
    w.write_all(&[IPMX_VERSION, dtype.code()])?;
    w.write_all(&(matrix.rows() as u64).to_le_bytes())?;
    w.write_all(&(matrix.cols() as u64).to_le_bytes())?;
    match dtype {
        IpmxDtype::F64 => {
            for v in matrix.as_slice() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        IpmxDtype::F32 => {
            for v in matrix.as_slice() {
                w.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
    }
    w.flush()
}

pub fn read_ipmx(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode_ipmx(BufReader::with_capacity(1 << 20, file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Writes `matrix` to `path`. With [`IpmxDtype::F64`] the file reads back
/// bit-identical.
pub fn write_ipmx(matrix: &Matrix, path: impl AsRef<Path>, dtype: IpmxDtype) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    encode_ipmx(matrix, dtype, BufWriter::with_capacity(1 << 20, file)).map_err(|e| Error::io(path, e))
}
