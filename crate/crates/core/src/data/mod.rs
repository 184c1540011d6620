//! Dataset ingestion and generation.

mod attrfile;
mod kmeans;
mod synth;
mod vecs;

use std::fmt;
use std::path::Path;

use serde::Serialize;

pub use attrfile::{format_attrs, read_attrs, read_attrs_for, write_attrs};
pub use kmeans::{cluster_attrs, kmeans, KMeans, KMeansConfig};
pub use synth::{gaussian_mixture, prob_attrs, split_dataset, Split, PROB_ATTRS_C};
pub use vecs::{read_bvecs, read_fvecs, read_ivecs, read_vectors, write_bvecs, write_fvecs, write_ivecs, IntMatrix};

use crate::attributes::AttributeTable;
use crate::error::{Error, Result};
use crate::selection::Corpus;
use crate::similarity::Similarity;

/// Similarity function and default smoothing for a family of datasets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: String,
    pub similarity: Similarity,
    pub eta: f64,
}

impl Preset {
    pub const NAMES: [&'static str; 6] = ["arxiv", "sift1m", "amazon", "deep1b", "synthetic", "synthetic-psweep"];

    pub fn named(name: &str) -> Result<Self> {
        let (similarity, eta) = match name {
            "arxiv" | "sift1m" => (Similarity::ReciprocalEuclidean { delta: 0.01 }, 0.01),
            "amazon" | "deep1b" => (Similarity::OnePlusCosine, 50.0),
            "synthetic" => (Similarity::OnePlusCosine, 0.01),
            "synthetic-psweep" => (Similarity::OnePlusCosine, 1e-4),
            other => {
                return Err(Error::Config(format!("unknown preset `{other}` (known: {})", Self::NAMES.join(", "))))
            }
        };
        Ok(Self { name: name.to_string(), similarity, eta })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}, eta = {})", self.name, self.similarity, self.eta)
    }
}

/// Base vectors with their attributes, a query set, and the preset in force.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub base: crate::vectors::VectorSet,
    pub queries: crate::vectors::VectorSet,
    pub attrs: AttributeTable,
    pub preset: Preset,
}

impl DatasetBundle {
    pub fn new(
        base: crate::vectors::VectorSet,
        queries: crate::vectors::VectorSet,
        attrs: AttributeTable,
        preset: Preset,
    ) -> Result<Self> {
        if base.dim() != queries.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), actual: queries.dim() });
        }
        if attrs.num_vectors() != base.len() {
            return Err(Error::Config(format!(
                "attribute table covers {} vectors, base has {}",
                attrs.num_vectors(),
                base.len()
            )));
        }
        Ok(Self { base, queries, attrs, preset })
    }

    /// Loads `base` and its attribute file. Without a query file the base is
    /// split 4:1 with `split_seed` and the attributes follow the base part.
    pub fn load(base: &Path, queries: Option<&Path>, attrs: &Path, preset: Preset, split_seed: u64) -> Result<Self> {
        let data = read_vectors(base)?;
        let table = read_attrs_for(attrs, data.len())?;
        match queries {
            Some(q) => Self::new(data, read_vectors(q)?, table, preset),
            None => {
                let split = split_dataset(&data, split_seed)?;
                let attrs = table.select(&split.base_ids)?;
                Self::new(split.base, split.queries, attrs, preset)
            }
        }
    }

    /// Gaussian-mixture base and queries with skewed `prob_attrs` labels.
    pub fn synthetic(spec: &SyntheticSpec) -> Result<Self> {
        let all = gaussian_mixture(spec.n_base + spec.n_queries, spec.dim, spec.centers, spec.spread, spec.seed)?;
        let base = all.select(&(0..spec.n_base).collect::<Vec<_>>())?;
        let queries = all.select(&(spec.n_base..spec.n_base + spec.n_queries).collect::<Vec<_>>())?;
        let attrs = prob_attrs(spec.n_base, spec.seed ^ 0xA77)?;
        Self::new(base, queries, attrs, Preset::named(&spec.preset)?)
    }

    pub fn corpus(&self) -> Corpus<'_> {
        Corpus::new(&self.base, &self.attrs, self.preset.similarity).expect("bundle is consistent")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub n_base: usize,
    pub n_queries: usize,
    pub dim: usize,
    pub centers: usize,
    pub spread: f32,
    pub seed: u64,
    pub preset: String,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { n_base: 50_000, n_queries: 100, dim: 32, centers: 50, spread: 1.0, seed: 7, preset: "synthetic".into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::VectorSet;

    #[test]
    fn presets() {
        assert_eq!(Preset::named("sift1m").unwrap().similarity, Similarity::ReciprocalEuclidean { delta: 0.01 });
        assert_eq!(Preset::named("deep1b").unwrap().eta, 50.0);
        assert_eq!(Preset::named("synthetic-psweep").unwrap().eta, 1e-4);
        for name in Preset::NAMES {
            assert!(Preset::named(name).is_ok());
        }
        assert!(matches!(Preset::named("mnist"), Err(Error::Config(_))));
    }

    #[test]
    fn load_with_and_without_queries() {
        let dir = tempfile::tempdir().unwrap();
        let data = gaussian_mixture(20, 4, 2, 3.0, 1).unwrap();
        let labels: Vec<usize> = (0..20).map(|i| i % 3).collect();
        let attrs = AttributeTable::single(3, &labels).unwrap();
        let (b, a, q) = (dir.path().join("b.fvecs"), dir.path().join("a.txt"), dir.path().join("q.fvecs"));
        write_fvecs(&b, &data).unwrap();
        write_attrs(&a, &attrs).unwrap();
        let preset = Preset::named("synthetic").unwrap();
        let split = DatasetBundle::load(&b, None, &a, preset.clone(), 5).unwrap();
        assert_eq!((split.base.len(), split.queries.len()), (16, 4));
        let ids = split_dataset(&data, 5).unwrap().base_ids;
        assert!((0..16).all(|i| split.attrs.label(i) == ids[i] % 3));

        write_fvecs(&q, &data.select(&[0, 1]).unwrap()).unwrap();
        let full = DatasetBundle::load(&b, Some(&q), &a, preset.clone(), 0).unwrap();
        assert_eq!(full.queries.len(), 2);
        let narrow = VectorSet::new(vec![1.0; 6], 3).unwrap();
        write_fvecs(&q, &narrow).unwrap();
        assert!(DatasetBundle::load(&b, Some(&q), &a, preset, 0).is_err());
    }

    #[test]
    fn synthetic_bundle() {
        let spec = SyntheticSpec { n_base: 500, n_queries: 10, ..Default::default() };
        let b = DatasetBundle::synthetic(&spec).unwrap();
        assert_eq!((b.base.len(), b.queries.len(), b.attrs.num_attributes()), (500, 10, 20));
        assert_eq!(b.corpus().len(), 500);
    }
}
