//! `CSEM` binary array container.
//!
//! Little-endian layout: magic `CSEM`, version u16, dtype code u8, ndim u8,
//! dims as u32 each, row-major payload, trailing CRC-32 of the payload
//! bytes. Write/read round-trips are bit-exact for every dtype.

use crate::error::{Error, Result};
use num_complex::{Complex32, Complex64};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"CSEM";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    F32 = 0,
    F64 = 1,
    C32 = 2,
    C64 = 3,
}

impl DType {
    pub fn element_size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F64 => 8,
            DType::C32 => 8,
            DType::C64 => 16,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(DType::F32),
            1 => Ok(DType::F64),
            2 => Ok(DType::C32),
            3 => Ok(DType::C64),
            _ => Err(Error::Container(format!("unknown dtype code {code}"))),
        }
    }
}

/// In-memory view of a container: dims plus one of the four payload types.
/// Complex payloads are interleaved (re, im) on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum ArrayData {
    F32(Vec<u32>, Vec<f32>),
    F64(Vec<u32>, Vec<f64>),
    C32(Vec<u32>, Vec<Complex32>),
    C64(Vec<u32>, Vec<Complex64>),
}

impl ArrayData {
    pub fn dims(&self) -> &[u32] {
        match self {
            ArrayData::F32(d, _)
            | ArrayData::F64(d, _)
            | ArrayData::C32(d, _)
            | ArrayData::C64(d, _) => d,
        }
    }

    pub fn dtype(&self) -> DType {
        match self {
            ArrayData::F32(..) => DType::F32,
            ArrayData::F64(..) => DType::F64,
            ArrayData::C32(..) => DType::C32,
            ArrayData::C64(..) => DType::C64,
        }
    }

    pub fn element_count(&self) -> usize {
        self.dims().iter().map(|&d| d as usize).product()
    }

    fn len(&self) -> usize {
        match self {
            ArrayData::F32(_, v) => v.len(),
            ArrayData::F64(_, v) => v.len(),
            ArrayData::C32(_, v) => v.len(),
            ArrayData::C64(_, v) => v.len(),
        }
    }

    pub fn as_f64(&self) -> Result<&[f64]> {
        match self {
            ArrayData::F64(_, v) => Ok(v),
            other => Err(Error::Container(format!(
                "expected f64 payload, found {:?}",
                other.dtype()
            ))),
        }
    }

    pub fn as_c64(&self) -> Result<&[Complex64]> {
        match self {
            ArrayData::C64(_, v) => Ok(v),
            other => Err(Error::Container(format!(
                "expected c64 payload, found {:?}",
                other.dtype()
            ))),
        }
    }

    fn payload_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() * self.dtype().element_size());
        match self {
            ArrayData::F32(_, v) => {
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            ArrayData::F64(_, v) => {
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            ArrayData::C32(_, v) => {
                for x in v {
                    out.extend_from_slice(&x.re.to_le_bytes());
                    out.extend_from_slice(&x.im.to_le_bytes());
                }
            }
            ArrayData::C64(_, v) => {
                for x in v {
                    out.extend_from_slice(&x.re.to_le_bytes());
                    out.extend_from_slice(&x.im.to_le_bytes());
                }
            }
        }
        out
    }

    fn from_payload(dtype: DType, dims: Vec<u32>, bytes: &[u8]) -> Self {
        match dtype {
            DType::F32 => ArrayData::F32(
                dims,
                bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
            DType::F64 => ArrayData::F64(
                dims,
                bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
            DType::C32 => ArrayData::C32(
                dims,
                bytes
                    .chunks_exact(8)
                    .map(|c| {
                        Complex32::new(
                            f32::from_le_bytes(c[0..4].try_into().unwrap()),
                            f32::from_le_bytes(c[4..8].try_into().unwrap()),
                        )
                    })
                    .collect(),
            ),
            DType::C64 => ArrayData::C64(
                dims,
                bytes
                    .chunks_exact(16)
                    .map(|c| {
                        Complex64::new(
                            f64::from_le_bytes(c[0..8].try_into().unwrap()),
                            f64::from_le_bytes(c[8..16].try_into().unwrap()),
                        )
                    })
                    .collect(),
            ),
        }
    }
}

/// CRC-32 (IEEE 802.3, reflected, as used by zlib) of `bytes`.
pub fn crc32(bytes: &[u8]) -> u32 {
    const POLY: u32 = 0xedb88320;
    let mut crc = 0xffffffffu32;
    for &b in bytes {
        crc ^= b as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (POLY & mask);
        }
    }
    !crc
}

pub fn write_array(path: &Path, array: &ArrayData) -> Result<()> {
    if array.len() != array.element_count() {
        return Err(Error::Container(format!(
            "payload has {} elements but dims {:?} require {}",
            array.len(),
            array.dims(),
            array.element_count()
        )));
    }
    let payload = array.payload_bytes();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[array.dtype() as u8])?;
    let dims = array.dims();
    if dims.len() > u8::MAX as usize {
        return Err(Error::Container("too many dimensions".into()));
    }
    w.write_all(&[dims.len() as u8])?;
    for &d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    w.write_all(&payload)?;
    w.write_all(&crc32(&payload).to_le_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_array(path: &Path) -> Result<ArrayData> {
    let mut r = BufReader::new(
        File::open(path).map_err(|e| Error::MissingInput(format!("{}: {e}", path.display())))?,
    );
    let mut header = [0u8; 8];
    r.read_exact(&mut header)
        .map_err(|_| Error::Container(format!("{}: truncated header", path.display())))?;
    if header[0..4] != MAGIC {
        return Err(Error::Container(format!(
            "{}: bad magic {:02x?}",
            path.display(),
            &header[0..4]
        )));
    }
    let version = u16::from_le_bytes(header[4..6].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Container(format!(
            "{}: unsupported version {version}",
            path.display()
        )));
    }
    let dtype = DType::from_code(header[6])?;
    let ndim = header[7] as usize;
    let mut dim_bytes = vec![0u8; 4 * ndim];
    r.read_exact(&mut dim_bytes)
        .map_err(|_| Error::Container(format!("{}: truncated dims", path.display())))?;
    let dims: Vec<u32> = dim_bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let count: usize = dims.iter().map(|&d| d as usize).product();
    let mut payload = vec![0u8; count * dtype.element_size()];
    r.read_exact(&mut payload)
        .map_err(|_| Error::Container(format!("{}: truncated payload", path.display())))?;
    let mut crc_bytes = [0u8; 4];
    r.read_exact(&mut crc_bytes)
        .map_err(|_| Error::Container(format!("{}: missing checksum", path.display())))?;
    let stored = u32::from_le_bytes(crc_bytes);
    let computed = crc32(&payload);
    if stored != computed {
        return Err(Error::CrcMismatch { stored, computed });
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Container(format!(
            "{}: {} trailing bytes after checksum",
            path.display(),
            rest.len()
        )));
    }
    Ok(ArrayData::from_payload(dtype, dims, &payload))
}
