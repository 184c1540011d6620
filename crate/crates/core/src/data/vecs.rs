//! The `.fvecs` / `.bvecs` / `.ivecs` containers: each record is a
//! little-endian `i32` dimension followed by that many components
//! (`f32`, `u8` or `i32`).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vectors::VectorSet;

/// Row-major integer matrix, as stored in `.ivecs` ground-truth files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub data: Vec<i32>,
    pub n: usize,
    pub d: usize,
}

impl IntMatrix {
    pub fn row(&self, i: usize) -> &[i32] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

/// Splits a container into `(d, payload records)`, checking every header.
fn records<'b>(path: &Path, bytes: &'b [u8], elem: usize) -> Result<(usize, Vec<&'b [u8]>)> {
    if bytes.is_empty() {
        return Err(Error::format(path, "empty file"));
    }
    let mut out = Vec::new();
    let mut d0 = None;
    let mut pos = 0;
    while pos < bytes.len() {
        let header =
            bytes.get(pos..pos + 4).ok_or_else(|| Error::format(path, format!("truncated header at byte {pos}")))?;
        let d = i32::from_le_bytes(header.try_into().expect("4 bytes"));
        if d <= 0 {
            return Err(Error::format(path, format!("record {} has dimension {d}", out.len())));
        }
        let d = d as usize;
        match d0 {
            None => d0 = Some(d),
            Some(first) if first != d => {
                return Err(Error::format(path, format!("record {} has dimension {d}, expected {first}", out.len())))
            }
            _ => {}
        }
        let start = pos + 4;
        let end = start + d * elem;
        let payload =
            bytes.get(start..end).ok_or_else(|| Error::format(path, format!("record {} is truncated", out.len())))?;
        out.push(payload);
        pos = end;
    }
    Ok((d0.expect("at least one record"), out))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn to_vector_set(path: &Path, data: Vec<f32>, d: usize) -> Result<VectorSet> {
    if let Some(i) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::format(path, format!("non-finite component in record {}", i / d)));
    }
    VectorSet::new(data, d).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_fvecs(path: impl AsRef<Path>) -> Result<VectorSet> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let (d, recs) = records(path, &bytes, 4)?;
    let data = recs
        .iter()
        .flat_map(|r| r.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    to_vector_set(path, data, d)
}

/// Byte vectors, widened to `f32`.
pub fn read_bvecs(path: impl AsRef<Path>) -> Result<VectorSet> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let (d, recs) = records(path, &bytes, 1)?;
    let data = recs.iter().flat_map(|r| r.iter().map(|&b| b as f32)).collect();
    to_vector_set(path, data, d)
}

pub fn read_ivecs(path: impl AsRef<Path>) -> Result<IntMatrix> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let (d, recs) = records(path, &bytes, 4)?;
    let data: Vec<i32> = recs
        .iter()
        .flat_map(|r| r.chunks_exact(4).map(|c| i32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    Ok(IntMatrix { n: recs.len(), d, data })
}

/// Dispatches on the extension: `.fvecs` or `.bvecs`.
pub fn read_vectors(path: impl AsRef<Path>) -> Result<VectorSet> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("fvecs") => read_fvecs(path),
        Some("bvecs") => read_bvecs(path),
        _ => Err(Error::format(path, "expected a .fvecs or .bvecs file")),
    }
}

fn write_records<T, F>(path: &Path, rows: impl Iterator<Item = T>, d: usize, mut put: F) -> Result<()>
where
    F: FnMut(&mut BufWriter<fs::File>, T) -> std::io::Result<()>,
{
    let io = |e| Error::io(path, e);
    let d = i32::try_from(d).map_err(|_| Error::format(path, "dimension exceeds i32"))?;
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    for row in rows {
        w.write_all(&d.to_le_bytes()).map_err(io)?;
        put(&mut w, row).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_fvecs(path: impl AsRef<Path>, data: &VectorSet) -> Result<()> {
    write_records(path.as_ref(), data.rows(), data.dim(), |w, row| {
        row.iter().try_for_each(|x| w.write_all(&x.to_le_bytes()))
    })
}

/// Fails unless every component is an integer in `0..=255`.
pub fn write_bvecs(path: impl AsRef<Path>, data: &VectorSet) -> Result<()> {
    let path = path.as_ref();
    if data.as_slice().iter().any(|&x| x.fract() != 0.0 || !(0.0..=255.0).contains(&x)) {
        return Err(Error::format(path, "bvecs components must be integers in 0..=255"));
    }
    write_records(path, data.rows(), data.dim(), |w, row| {
        let bytes: Vec<u8> = row.iter().map(|&x| x as u8).collect();
        w.write_all(&bytes)
    })
}

pub fn write_ivecs(path: impl AsRef<Path>, m: &IntMatrix) -> Result<()> {
    write_records(path.as_ref(), (0..m.n).map(|i| m.row(i)), m.d, |w, row| {
        row.iter().try_for_each(|x| w.write_all(&x.to_le_bytes()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn record(d: i32, payload: &[u8]) -> Vec<u8> {
        let mut b = d.to_le_bytes().to_vec();
        b.extend_from_slice(payload);
        b
    }

    fn floats(xs: &[f32]) -> Vec<u8> {
        xs.iter().flat_map(|x| x.to_le_bytes()).collect()
    }

    #[test]
    fn hand_built_fvecs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("one.fvecs");
        fs::write(&p, record(2, &floats(&[1.0, 2.0]))).unwrap();
        let v = read_fvecs(&p).unwrap();
        assert_eq!((v.len(), v.dim()), (1, 2));
        assert_eq!(v.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.fvecs");
        let cases: Vec<Vec<u8>> = vec![
            vec![],
            record(0, &[]),
            record(-3, &[]),
            record(2, &floats(&[1.0])),
            [record(2, &floats(&[1.0, 2.0])), record(3, &floats(&[1.0, 2.0, 3.0]))].concat(),
            record(1, &floats(&[f32::NAN])),
            record(1, &floats(&[f32::INFINITY])),
            [record(1, &floats(&[1.0])), vec![1, 0]].concat(),
        ];
        for bytes in cases {
            fs::write(&p, &bytes).unwrap();
            assert!(matches!(read_fvecs(&p), Err(Error::Format { .. })), "{bytes:?}");
        }
        assert!(matches!(read_fvecs(dir.path().join("missing.fvecs")), Err(Error::Io { .. })));
    }

    #[test]
    fn round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dir = tempfile::tempdir().unwrap();
        let data: Vec<f32> = (0..100 * 16).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let v = VectorSet::new(data, 16).unwrap();
        let p = dir.path().join("r.fvecs");
        write_fvecs(&p, &v).unwrap();
        let back = read_vectors(&p).unwrap();
        let bits = |s: &[f32]| s.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.as_slice()), bits(v.as_slice()));

        let bytes: Vec<f32> = (0..40 * 8).map(|_| rng.gen_range(0..=255u8) as f32).collect();
        let b = VectorSet::new(bytes, 8).unwrap();
        let p = dir.path().join("r.bvecs");
        write_bvecs(&p, &b).unwrap();
        assert_eq!(fs::metadata(&p).unwrap().len(), 40 * (4 + 8));
        assert_eq!(read_vectors(&p).unwrap().as_slice(), b.as_slice());
        assert!(write_bvecs(&p, &v).is_err());

        let m = IntMatrix { data: (0..30).map(|i| i * 7 - 50).collect(), n: 10, d: 3 };
        let p = dir.path().join("r.ivecs");
        write_ivecs(&p, &m).unwrap();
        assert_eq!(read_ivecs(&p).unwrap(), m);
        assert!(read_vectors(dir.path().join("r.txt")).is_err());
    }
}
