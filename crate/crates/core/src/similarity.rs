//! Nonnegative similarity functions between a query and input vectors.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vectors::{dot, norm, squared_distance, VectorSet};

/// Similarity function `sigma(u, v) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Similarity {
    /// `1 + cos(u, v)`, in `[0, 2]`.
    OnePlusCosine,
    /// `1 / (||u - v|| + delta)`.
    ReciprocalEuclidean { delta: f64 },
    /// `max(<u, v>, 0)`. Negative inner products are clamped and counted.
    DotProduct,
}

impl Similarity {
    pub fn reciprocal_euclidean(delta: f64) -> Result<Self> {
        let s = Similarity::ReciprocalEuclidean { delta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Similarity::ReciprocalEuclidean { delta } if !(delta > 0.0 && delta.is_finite()) => {
                Err(Error::param(format!("reciprocal-euclidean needs delta > 0, got {delta}")))
            }
            _ => Ok(()),
        }
    }

    /// Binds this function to a query, validating and caching its norm.
    pub fn scorer<'a>(&self, query: &'a [f32], data: &'a VectorSet) -> Result<QueryScorer<'a>> {
        QueryScorer::new(*self, query, data)
    }
}

impl fmt::Display for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Similarity::OnePlusCosine => f.write_str("one-plus-cosine"),
            Similarity::ReciprocalEuclidean { delta } => write!(f, "reciprocal-euclidean:{delta}"),
            Similarity::DotProduct => f.write_str("dot-product"),
        }
    }
}

impl FromStr for Similarity {
    type Err = Error;

    /// Accepts `one-plus-cosine`, `dot-product`, `reciprocal-euclidean` (delta 0.01)
    /// or `reciprocal-euclidean:<delta>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("one-plus-cosine" | "cosine", None) => Ok(Similarity::OnePlusCosine),
            ("dot-product" | "dot", None) => Ok(Similarity::DotProduct),
            ("reciprocal-euclidean" | "euclidean", None) => Similarity::reciprocal_euclidean(0.01),
            ("reciprocal-euclidean" | "euclidean", Some(a)) => {
                let delta = a.parse().map_err(|_| Error::param(format!("bad delta {a:?}")))?;
                Similarity::reciprocal_euclidean(delta)
            }
            _ => Err(Error::param(format!("unknown similarity {s:?}"))),
        }
    }
}

fn check_finite(v: &[f32]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(pos) => Err(Error::NonFinite(pos)),
        None => Ok(()),
    }
}

/// `sigma(u, v)` for two free-standing vectors.
pub fn similarity(kind: Similarity, u: &[f32], v: &[f32]) -> Result<f64> {
    kind.validate()?;
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), actual: v.len() });
    }
    check_finite(u)?;
    check_finite(v)?;
    Ok(match kind {
        Similarity::OnePlusCosine => {
            let (nu, nv) = (norm(u), norm(v));
            if nu == 0.0 || nv == 0.0 {
                return Err(Error::ZeroVector);
            }
            one_plus_cosine(dot(u, v), nu, nv)
        }
        Similarity::ReciprocalEuclidean { delta } => 1.0 / (squared_distance(u, v).sqrt() + delta),
        Similarity::DotProduct => dot(u, v).max(0.0),
    })
}

fn one_plus_cosine(dot: f64, nu: f64, nv: f64) -> f64 {
    (1.0 + dot / (nu * nv)).clamp(0.0, 2.0)
}

/// A similarity function bound to one query over one [`VectorSet`].
///
/// Scoring is per-query and single-threaded; the clamp counter records how
/// many dot products were negative and clamped to zero.
#[derive(Debug)]
pub struct QueryScorer<'a> {
    kind: Similarity,
    query: &'a [f32],
    query_norm: f64,
    data: &'a VectorSet,
    clamped: Cell<usize>,
}

impl<'a> QueryScorer<'a> {
    pub fn new(kind: Similarity, query: &'a [f32], data: &'a VectorSet) -> Result<Self> {
        kind.validate()?;
        if query.len() != data.dim() {
            return Err(Error::DimensionMismatch { expected: data.dim(), actual: query.len() });
        }
        check_finite(query)?;
        let query_norm = norm(query);
        if kind == Similarity::OnePlusCosine && query_norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self { kind, query, query_norm, data, clamped: Cell::new(0) })
    }

    pub fn kind(&self) -> Similarity {
        self.kind
    }

    pub fn query(&self) -> &'a [f32] {
        self.query
    }

    pub fn data(&self) -> &'a VectorSet {
        self.data
    }

    /// `sigma(q, v_id)`.
    pub fn score(&self, id: usize) -> Result<f64> {
        let v = self.data.get(id)?;
        Ok(match self.kind {
            Similarity::OnePlusCosine => {
                let nv = self.data.norm(id);
                if nv == 0.0 {
                    return Err(Error::ZeroVector);
                }
                one_plus_cosine(dot(self.query, v), self.query_norm, nv)
            }
            Similarity::ReciprocalEuclidean { delta } => 1.0 / (squared_distance(self.query, v).sqrt() + delta),
            Similarity::DotProduct => {
                let raw = dot(self.query, v);
                if raw < 0.0 {
                    self.clamped.set(self.clamped.get() + 1);
                    0.0
                } else {
                    raw
                }
            }
        })
    }

    /// Number of negative dot products clamped to zero so far.
    pub fn clamped(&self) -> usize {
        self.clamped.get()
    }
}
