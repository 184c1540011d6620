use serde::Serialize;

use crate::attributes::AttributeTable;
use crate::error::{Error, Result};
use crate::similarity::{QueryScorer, Similarity};
use crate::vectors::VectorSet;
use crate::welfare::{self, WelfareParams};

/// Borrowed view of everything a query runs against: vectors, attributes and
/// the similarity function.
#[derive(Debug, Clone, Copy)]
pub struct Corpus<'a> {
    pub vectors: &'a VectorSet,
    pub attrs: &'a AttributeTable,
    pub similarity: Similarity,
}

impl<'a> Corpus<'a> {
    pub fn new(vectors: &'a VectorSet, attrs: &'a AttributeTable, similarity: Similarity) -> Result<Self> {
        if vectors.len() != attrs.num_vectors() {
            return Err(Error::Config(format!(
                "attribute table covers {} vectors but the set has {}",
                attrs.num_vectors(),
                vectors.len()
            )));
        }
        similarity.validate()?;
        Ok(Self { vectors, attrs, similarity })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn num_attributes(&self) -> usize {
        self.attrs.num_attributes()
    }

    pub fn scorer(&self, query: &'a [f32]) -> Result<QueryScorer<'a>> {
        QueryScorer::new(self.similarity, query, self.vectors)
    }
}

/// The result of a search: selected ids in selection order, with the
/// utilities and welfare they induce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub ids: Vec<usize>,
    pub utilities: Vec<f64>,
    pub objective: f64,
    pub params: WelfareParams,
    /// Fewer than the requested `k` vectors could be selected.
    pub truncated: bool,
}

impl Selection {
    /// Scores `ids` and evaluates the configured welfare.
    pub fn evaluate(
        scorer: &QueryScorer<'_>,
        attrs: &AttributeTable,
        ids: Vec<usize>,
        params: WelfareParams,
        truncated: bool,
    ) -> Result<Self> {
        let utilities = welfare::utilities(scorer, &ids, attrs)?;
        Ok(Self::from_utilities(ids, utilities, params, truncated))
    }

    pub(crate) fn from_utilities(ids: Vec<usize>, utilities: Vec<f64>, params: WelfareParams, truncated: bool) -> Self {
        let objective = welfare::welfare_unchecked(&utilities, params);
        Self { ids, utilities, objective, params, truncated }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// `log NSW` of the selection at the configured `eta`, whatever `p` is.
    pub fn log_nsw(&self) -> f64 {
        welfare::log_nsw_unchecked(&self.utilities, self.params.eta())
    }

    /// Welfare of the same selection under other parameters.
    pub fn welfare_at(&self, params: WelfareParams) -> f64 {
        welfare::welfare_unchecked(&self.utilities, params)
    }

    /// `|S ∩ D_l|` for every attribute.
    pub fn counts(&self, attrs: &AttributeTable) -> Vec<usize> {
        let mut counts = vec![0; attrs.num_attributes()];
        for &id in &self.ids {
            for &a in attrs.of(id) {
                counts[a] += 1;
            }
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_recomputes_objective() {
        let data = VectorSet::from_rows(&[[1.0f32, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let attrs = AttributeTable::single(2, &[0, 1, 1]).unwrap();
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let q = [1.0f32, 2.0];
        let scorer = corpus.scorer(&q).unwrap();
        let params = WelfareParams::new(0.0, 1.0).unwrap();
        let s = Selection::evaluate(&scorer, &attrs, vec![0, 2], params, false).unwrap();
        assert_eq!(s.utilities, vec![1.0, 3.0]);
        assert!((s.objective - 8f64.sqrt()).abs() < 1e-12);
        assert!((s.log_nsw() - s.objective.ln()).abs() < 1e-12);
        assert_eq!(s.counts(&attrs), vec![1, 1]);
        let am = s.welfare_at(WelfareParams::new(1.0, 1.0).unwrap());
        assert!((am - 3.0).abs() < 1e-12);
    }

    #[test]
    fn corpus_requires_matching_sizes() {
        let data = VectorSet::from_rows(&[[1.0f32], [2.0]]).unwrap();
        let attrs = AttributeTable::single(1, &[0]).unwrap();
        assert!(Corpus::new(&data, &attrs, Similarity::DotProduct).is_err());
    }
}
