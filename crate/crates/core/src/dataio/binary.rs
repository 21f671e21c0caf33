//! DFEL binary feature files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "DFEL" | version u32 | n_samples u64 | n_dims u64 | n_classes u32
//! provenance: count u32, then per span: name_len u16, name, start u64, end u64
//! class names: count u32, then per name: name_len u16, name
//! labels: n_samples × u32           (only when n_classes > 0)
//! values: n_samples × n_dims × f32  (row-major)
//! ```

use std::fs;
use std::path::Path;

use super::matrix::{DimSpan, FeatureMatrix};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DFEL";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode_features(fm: &FeatureMatrix) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(64 + fm.values().len() * 4 + fm.n_samples() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(fm.n_samples() as u64).to_le_bytes());
    buf.extend_from_slice(&(fm.n_dims() as u64).to_le_bytes());
    buf.extend_from_slice(&(fm.n_classes() as u32).to_le_bytes());

    buf.extend_from_slice(&(fm.provenance().len() as u32).to_le_bytes());
    for span in fm.provenance() {
        put_text(&mut buf, &span.backbone)?;
        buf.extend_from_slice(&span.start.to_le_bytes());
        buf.extend_from_slice(&span.end.to_le_bytes());
    }

    let names = fm.labels().map(|l| l.names.as_slice()).unwrap_or(&[]);
    buf.extend_from_slice(&(names.len() as u32).to_le_bytes());
    for name in names {
        put_text(&mut buf, name)?;
    }
    if let Some(labels) = fm.labels() {
        for l in &labels.indices {
            buf.extend_from_slice(&l.to_le_bytes());
        }
    }
    for v in fm.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(buf)
}

fn put_text(buf: &mut Vec<u8>, text: &str) -> Result<()> {
    let len = u16::try_from(text.len())
        .map_err(|_| Error::Input(format!("name longer than {} bytes", u16::MAX)))?;
    buf.extend_from_slice(&len.to_le_bytes());
    buf.extend_from_slice(text.as_bytes());
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Corruption(format!("file truncated while reading {what} at byte {}", self.pos))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn text(&mut self, what: &str) -> Result<String> {
        let len = self.u16(what)? as usize;
        let raw = self.take(len, what)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Corruption(format!("{what} is not valid UTF-8")))
    }
}

pub fn decode_features(bytes: &[u8]) -> Result<FeatureMatrix> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing DFEL magic bytes".into()));
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let n_samples = r.u64("sample count")?;
    let n_dims = r.u64("dimension count")?;
    let n_classes = r.u32("class count")?;

    let n_spans = r.u32("provenance count")?;
    let mut provenance = Vec::new();
    for _ in 0..n_spans {
        let backbone = r.text("provenance name")?;
        let start = r.u64("provenance start")?;
        let end = r.u64("provenance end")?;
        provenance.push(DimSpan { backbone, start, end });
    }
    let n_names = r.u32("class-name count")?;
    let mut names = Vec::new();
    for _ in 0..n_names {
        names.push(r.text("class name")?);
    }
    if n_classes == 0 && n_names > 0 {
        return Err(Error::Corruption("class names present in an unlabeled file".into()));
    }

    let n = usize::try_from(n_samples).map_err(|_| Error::Corruption("sample count overflows".into()))?;
    let m = usize::try_from(n_dims).map_err(|_| Error::Corruption("dimension count overflows".into()))?;
    let labels = if n_classes > 0 {
        let raw = r.take(n.checked_mul(4).ok_or_else(|| Error::Corruption("label block overflows".into()))?, "labels")?;
        Some(raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect::<Vec<_>>())
    } else {
        None
    };
    let value_bytes = n
        .checked_mul(m)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::Corruption("value block overflows".into()))?;
    let raw = r.take(value_bytes, "values")?;
    let values: Vec<f32> = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    if r.pos != bytes.len() {
        return Err(Error::Corruption(format!("{} trailing bytes after values", bytes.len() - r.pos)));
    }

    let fm = FeatureMatrix::new(n, m, values, provenance).map_err(as_corruption)?;
    match labels {
        Some(indices) => fm.with_labels(indices, n_classes, names).map_err(as_corruption),
        None => Ok(fm),
    }
}

fn as_corruption(e: Error) -> Error {
    match e {
        Error::Input(msg) | Error::Dimension(msg) => Error::Corruption(msg),
        other => other,
    }
}

pub fn write_features(fm: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_features(fm)?)?;
    Ok(())
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    decode_features(&fs::read(path)?)
}
