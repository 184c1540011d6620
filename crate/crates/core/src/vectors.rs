//! Dense, immutable vector storage.

use crate::error::{Error, Result};

/// Row-major `n x d` matrix of input vectors. Vector id `i` is row `i`.
///
/// Payloads are stored as `f32`; norms are cached as `f64` and every
/// similarity accumulates in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    data: Vec<f32>,
    n: usize,
    d: usize,
    norms: Vec<f64>,
}

impl VectorSet {
    /// Builds a set from a flat row-major buffer.
    pub fn new(data: Vec<f32>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        if data.is_empty() {
            return Err(Error::Empty("vector set has no vectors"));
        }
        if !data.len().is_multiple_of(d) {
            return Err(Error::param(format!("buffer of length {} is not a multiple of d = {d}", data.len())));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        let n = data.len() / d;
        let norms = data.chunks_exact(d).map(norm).collect();
        Ok(Self { data, n, d, norms })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).ok_or(Error::Empty("vector set has no vectors"))?;
        let mut data = Vec::with_capacity(rows.len() * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, actual: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, d)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Row `id`. Panics if out of range; use [`VectorSet::get`] for a checked lookup.
    pub fn row(&self, id: usize) -> &[f32] {
        &self.data[id * self.d..(id + 1) * self.d]
    }

    pub fn get(&self, id: usize) -> Result<&[f32]> {
        if id < self.n {
            Ok(self.row(id))
        } else {
            Err(Error::InvalidId { id, n: self.n })
        }
    }

    pub fn norm(&self, id: usize) -> f64 {
        self.norms[id]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.d)
    }

    /// New set holding the given rows, in the given order.
    pub fn select(&self, ids: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(ids.len() * self.d);
        for &id in ids {
            data.extend_from_slice(self.get(id)?);
        }
        Self::new(data, self.d)
    }

    /// Column slice `[start, start + width)` of every row, as a new set.
    pub fn columns(&self, start: usize, width: usize) -> Result<Self> {
        if width == 0 || start + width > self.d {
            return Err(Error::param(format!("column range {start}..{} outside dimension {}", start + width, self.d)));
        }
        let data = self.rows().flat_map(|r| r[start..start + width].iter().copied()).collect();
        Self::new(data, width)
    }
}

pub(crate) fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
}

pub(crate) fn dot(u: &[f32], v: &[f32]) -> f64 {
    u.iter().zip(v).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum()
}

pub(crate) fn squared_distance(u: &[f32], v: &[f32]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(&a, &b)| {
            let t = f64::from(a) - f64::from(b);
            t * t
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_ragged_input() {
        assert!(matches!(VectorSet::new(vec![1.0, f32::NAN], 2), Err(Error::NonFinite(1))));
        assert!(VectorSet::new(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(VectorSet::new(vec![], 2).is_err());
        assert!(VectorSet::new(vec![1.0], 0).is_err());
        assert!(VectorSet::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn rows_norms_and_slicing() {
        let vs = VectorSet::from_rows(&[[3.0f32, 4.0, 0.0, 1.0], [0.0, 0.0, 2.0, 2.0]]).unwrap();
        assert_eq!(vs.len(), 2);
        assert_eq!(vs.dim(), 4);
        assert_eq!(vs.row(1), &[0.0, 0.0, 2.0, 2.0]);
        assert!((vs.norm(0) - 26f64.sqrt()).abs() < 1e-12);
        let left = vs.columns(0, 2).unwrap();
        assert_eq!(left.row(0), &[3.0, 4.0]);
        assert!((left.norm(0) - 5.0).abs() < 1e-12);
        let picked = vs.select(&[1, 0]).unwrap();
        assert_eq!(picked.row(0), vs.row(1));
        assert!(matches!(vs.get(2), Err(Error::InvalidId { id: 2, n: 2 })));
    }
}
