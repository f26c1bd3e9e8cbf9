//! `.chim` binary layout, little-endian throughout.
//!
//! ```text
//! header (26 bytes)
//!   magic               [u8; 4]  "CHIM"
//!   version             u16      1
//!   sample_count        u32
//!   m                   u16      subcarriers
//!   n                   u16      slots
//!   normalization_scale f64      0 = unnormalized
//!   label_block_length  u32      bytes in the label block
//! label block
//!   type_count          u16
//!   type_count x { len: u16, utf8: [u8; len] }   first-appearance order
//!   sample_count x { type_id: u16, speed_kmh: f32 }
//! payload
//!   sample_count x m x n x 2 f32: per sample, plane 0 (real) row-major,
//!   then plane 1 (imaginary) row-major
//! ```

use std::io::Write;
use std::path::Path;

use super::{Dataset, DatasetError};
use crate::image::ChannelLabel;

pub const MAGIC: [u8; 4] = *b"CHIM";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetHeader {
    pub magic: [u8; 4],
    pub version: u16,
    pub sample_count: u32,
    pub m: u16,
    pub n: u16,
    pub normalization_scale: f64,
    pub label_block_length: u32,
}

impl DatasetHeader {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.magic);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&self.sample_count.to_le_bytes());
        out.extend_from_slice(&self.m.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.normalization_scale.to_le_bytes());
        out.extend_from_slice(&self.label_block_length.to_le_bytes());
    }

    /// Payload length in bytes implied by the header.
    pub fn payload_len(&self) -> u64 {
        self.sample_count as u64 * self.m as u64 * self.n as u64 * 2 * 4
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8], DatasetError> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| DatasetError::Corruption(format!("truncated while reading {what} at byte {}", self.pos)))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u16(&mut self, what: &str) -> Result<u16, DatasetError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32, DatasetError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f32(&mut self, what: &str) -> Result<f32, DatasetError> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64, DatasetError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

fn encode_labels(labels: &[ChannelLabel]) -> Result<Vec<u8>, DatasetError> {
    let mut types: Vec<&str> = Vec::new();
    let mut ids = Vec::with_capacity(labels.len());
    for label in labels {
        let id = match types.iter().position(|t| *t == label.channel_type) {
            Some(id) => id,
            None => {
                types.push(&label.channel_type);
                types.len() - 1
            }
        };
        ids.push(u16::try_from(id).map_err(|_| DatasetError::InvalidArgument("more than 65535 channel types".into()))?);
    }
    let mut out = Vec::new();
    out.extend_from_slice(&(types.len() as u16).to_le_bytes());
    for name in &types {
        let len = u16::try_from(name.len())
            .map_err(|_| DatasetError::InvalidArgument(format!("channel type name too long: {name}")))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(name.as_bytes());
    }
    for (id, label) in ids.iter().zip(labels) {
        out.extend_from_slice(&id.to_le_bytes());
        out.extend_from_slice(&label.user_speed.to_le_bytes());
    }
    Ok(out)
}

/// Serializes a dataset to its exact on-disk bytes.
pub fn encode(dataset: &Dataset) -> Result<Vec<u8>, DatasetError> {
    let sample_count =
        u32::try_from(dataset.len()).map_err(|_| DatasetError::InvalidArgument("more than u32::MAX samples".into()))?;
    let labels = encode_labels(dataset.labels())?;
    let header = DatasetHeader {
        magic: MAGIC,
        version: FORMAT_VERSION,
        sample_count,
        m: dataset.m() as u16,
        n: dataset.n() as u16,
        normalization_scale: dataset.scale(),
        label_block_length: u32::try_from(labels.len())
            .map_err(|_| DatasetError::InvalidArgument("label block exceeds 4 GiB".into()))?,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + labels.len() + header.payload_len() as usize);
    header.encode(&mut out);
    out.extend_from_slice(&labels);
    for v in dataset.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_header(bytes: &[u8]) -> Result<DatasetHeader, DatasetError> {
    if bytes.len() >= 4 && bytes[..4] != MAGIC {
        return Err(DatasetError::Format(format!(
            "bad magic {:?}, expected \"CHIM\"",
            &bytes[..4]
        )));
    }
    let mut cur = Cursor { bytes, pos: 0 };
    let magic: [u8; 4] = cur.take(4, "magic")?.try_into().unwrap();
    let version = cur.u16("version")?;
    if version != FORMAT_VERSION {
        return Err(DatasetError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    Ok(DatasetHeader {
        magic,
        version,
        sample_count: cur.u32("sample count")?,
        m: cur.u16("m")?,
        n: cur.u16("n")?,
        normalization_scale: cur.f64("normalization scale")?,
        label_block_length: cur.u32("label block length")?,
    })
}

/// Parses and validates a complete `.chim` image.
pub fn decode(bytes: &[u8]) -> Result<Dataset, DatasetError> {
    let header = decode_header(bytes)?;
    if header.m == 0 || header.n == 0 {
        return Err(DatasetError::Format(format!(
            "zero grid dimension {}x{}",
            header.m, header.n
        )));
    }
    let expected = HEADER_LEN as u64 + header.label_block_length as u64 + header.payload_len();
    if (bytes.len() as u64) < expected {
        return Err(DatasetError::Corruption(format!(
            "file has {} bytes, header declares {expected}",
            bytes.len()
        )));
    }
    if bytes.len() as u64 > expected {
        return Err(DatasetError::Corruption(format!(
            "{} trailing bytes after declared payload",
            bytes.len() as u64 - expected
        )));
    }

    let block_end = HEADER_LEN + header.label_block_length as usize;
    let mut cur = Cursor {
        bytes: &bytes[..block_end],
        pos: HEADER_LEN,
    };
    let type_count = cur.u16("type count")?;
    let mut types = Vec::with_capacity(type_count as usize);
    for _ in 0..type_count {
        let len = cur.u16("type name length")? as usize;
        let name = std::str::from_utf8(cur.take(len, "type name")?)
            .map_err(|_| DatasetError::Format("channel type name is not UTF-8".into()))?;
        types.push(name.to_string());
    }
    let mut labels = Vec::with_capacity(header.sample_count as usize);
    for i in 0..header.sample_count {
        let id = cur.u16("label type id")? as usize;
        let speed = cur.f32("label speed")?;
        let channel_type = types
            .get(id)
            .ok_or_else(|| DatasetError::Corruption(format!("sample {i} has unknown type id {id}")))?;
        labels.push(
            ChannelLabel::new(channel_type.clone(), speed)
                .map_err(|e| DatasetError::Corruption(format!("sample {i}: {e}")))?,
        );
    }
    if cur.pos != block_end {
        return Err(DatasetError::Corruption(format!(
            "label block declares {} bytes but records use {}",
            header.label_block_length,
            cur.pos - HEADER_LEN
        )));
    }

    let data = bytes[block_end..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Dataset::from_parts(
        header.m as usize,
        header.n as usize,
        header.normalization_scale,
        labels,
        data,
    )
}

/// Writes atomically: a temporary file in the target directory is renamed
/// over `path` once complete.
pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let bytes = encode(dataset)?;
    let io_err = |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(&bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}
