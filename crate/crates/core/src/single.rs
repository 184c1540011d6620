//! Exact solvers for the single-attribute setting.
//!
//! Both solvers prefetch `min(k, |D_l|)` neighbors per attribute from an
//! oracle and then run `k` greedy rounds. Each round takes the next vector
//! of the attribute stream with the best marginal gain in the per-attribute
//! transform `F` (log for Nash, `x^p` for `p > 0`, `-x^p` for `p < 0`).
//! Because every stream's marginals are monotone in the right direction,
//! the greedy result is optimal when the oracle is exact and
//! `alpha`-approximate under an `alpha`-approximate oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{NeighborOracle, RankedList};
use crate::selection::Selection;
use crate::welfare::{self, WelfareParams};

/// An attribute's ranked neighbors plus how many of them are selected.
#[derive(Debug, Clone)]
pub struct AttributeStream {
    pub ranked: RankedList,
    taken: usize,
    cumsum: f64,
}

impl AttributeStream {
    pub fn new(ranked: RankedList) -> Self {
        Self { ranked, taken: 0, cumsum: 0.0 }
    }

    pub fn taken(&self) -> usize {
        self.taken
    }

    /// Running utility `w_l` of the selected prefix.
    pub fn utility(&self) -> f64 {
        self.cumsum
    }

    pub fn is_exhausted(&self) -> bool {
        self.taken == self.ranked.len()
    }

    fn next_similarity(&self) -> Option<f64> {
        self.ranked.entries.get(self.taken).map(|e| e.similarity)
    }

    fn advance(&mut self) -> usize {
        let e = self.ranked.entries[self.taken];
        self.taken += 1;
        self.cumsum += e.similarity;
        e.id
    }

    /// Sum of the first `i` similarities.
    pub fn prefix_sum(&self, i: usize) -> f64 {
        self.ranked.entries[..i].iter().map(|e| e.similarity).sum()
    }

    /// `F_l(i)`: `ln(prefix + eta)` for Nash, `(prefix + eta)^p` otherwise.
    pub fn objective_term(&self, i: usize, params: WelfareParams) -> f64 {
        let x = self.prefix_sum(i) + params.eta();
        if params.is_nash() {
            x.ln()
        } else {
            welfare::pow(x, params.p())
        }
    }
}

/// Work counters of the greedy phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GreedyStats {
    pub rounds: usize,
    pub marginal_evaluations: usize,
}

/// Runs up to `k` greedy rounds over the streams. Equal gains go to the
/// larger similarity, then the lowest stream index; exhausted streams drop out. Returns the selected ids in
/// order; fewer than `k` means every stream ran dry.
pub fn greedy_over_streams(
    streams: &mut [AttributeStream],
    k: usize,
    params: WelfareParams,
) -> (Vec<usize>, GreedyStats) {
    let mut ids = Vec::with_capacity(k);
    let mut stats = GreedyStats::default();
    while ids.len() < k {
        let mut best: Option<(usize, f64, f64)> = None;
        for (idx, stream) in streams.iter().enumerate() {
            let Some(s) = stream.next_similarity() else {
                continue;
            };
            stats.marginal_evaluations += 1;
            let gain = params.gain(stream.utility(), s);
            if best.is_none_or(|(_, g, bs)| gain > g || (gain == g && s > bs)) {
                best = Some((idx, gain, s));
            }
        }
        let Some((idx, _, _)) = best else { break };
        stats.rounds += 1;
        ids.push(streams[idx].advance());
    }
    (ids, stats)
}

fn prefetch(oracle: &dyn NeighborOracle, query: &[f32], k: usize) -> Result<Vec<AttributeStream>> {
    let corpus = oracle.corpus();
    corpus.attrs.require_single_attribute()?;
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    (0..corpus.num_attributes()).map(|a| oracle.topk(query, a, k).map(AttributeStream::new)).collect()
}

fn assemble(streams: &[AttributeStream], ids: Vec<usize>, k: usize, params: WelfareParams) -> Selection {
    let utilities = streams.iter().map(AttributeStream::utility).collect();
    let truncated = ids.len() < k;
    Selection::from_utilities(ids, utilities, params, truncated)
}

/// Nash-welfare search: maximizes `NSW` over size-`k` subsets, exactly when
/// `oracle` is exact.
pub fn nash_ann(oracle: &dyn NeighborOracle, query: &[f32], k: usize, eta: f64) -> Result<Selection> {
    nash_ann_with_stats(oracle, query, k, eta).map(|(s, _)| s)
}

pub fn nash_ann_with_stats(
    oracle: &dyn NeighborOracle,
    query: &[f32],
    k: usize,
    eta: f64,
) -> Result<(Selection, GreedyStats)> {
    let params = WelfareParams::nash(eta)?;
    let mut streams = prefetch(oracle, query, k)?;
    let (ids, stats) = greedy_over_streams(&mut streams, k, params);
    Ok((assemble(&streams, ids, k, params), stats))
}

/// p-mean welfare search. `p = 0` runs [`nash_ann`].
pub fn p_mean_ann(oracle: &dyn NeighborOracle, query: &[f32], k: usize, params: WelfareParams) -> Result<Selection> {
    p_mean_ann_with_stats(oracle, query, k, params).map(|(s, _)| s)
}

pub fn p_mean_ann_with_stats(
    oracle: &dyn NeighborOracle,
    query: &[f32],
    k: usize,
    params: WelfareParams,
) -> Result<(Selection, GreedyStats)> {
    if params.is_nash() {
        return nash_ann_with_stats(oracle, query, k, params.eta());
    }
    let mut streams = prefetch(oracle, query, k)?;
    let (ids, stats) = greedy_over_streams(&mut streams, k, params);
    Ok((assemble(&streams, ids, k, params), stats))
}

/// Prefetched streams for `query`, exposed for property checks on `F_l`.
pub fn attribute_streams(oracle: &dyn NeighborOracle, query: &[f32], k: usize) -> Result<Vec<AttributeStream>> {
    prefetch(oracle, query, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::AttributeTable;
    use crate::oracle::{exact_topk, ExactScan};
    use crate::selection::Corpus;
    use crate::similarity::Similarity;
    use crate::vectors::VectorSet;

    /// One-dimensional dot-product corpus: vector `i` has similarity `sims[i]` to query `[1]`.
    fn scalar_corpus(sims: &[f32], labels: &[usize], c: usize) -> (VectorSet, AttributeTable) {
        let rows: Vec<[f32; 1]> = sims.iter().map(|&s| [s]).collect();
        (VectorSet::from_rows(&rows).unwrap(), AttributeTable::single(c, labels).unwrap())
    }

    #[test]
    fn equal_similarity_spreads_across_attributes() {
        let labels: Vec<usize> = (0..12).map(|i| i % 6).collect();
        let (data, attrs) = scalar_corpus(&[1.0; 12], &labels, 6);
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let oracle = ExactScan::new(corpus);
        let s = nash_ann(&oracle, &[1.0], 4, 1.0).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.counts(&attrs).iter().all(|&c| c <= 1));
        assert!(!s.truncated);
    }

    #[test]
    fn one_relevant_attribute_takes_everything() {
        let labels = [0, 1, 1, 1, 2, 1];
        let sims = [0.0, 1.0, 1.0, 1.0, 0.0, 1.0];
        let (data, attrs) = scalar_corpus(&sims, &labels, 3);
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let s = nash_ann(&ExactScan::new(corpus), &[1.0], 3, 1.0).unwrap();
        assert_eq!(s.counts(&attrs), vec![0, 3, 0]);
    }

    #[test]
    fn truncates_when_data_runs_out() {
        let (data, attrs) = scalar_corpus(&[0.5, 0.4, 0.3], &[0, 1, 1], 3);
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let s = nash_ann(&ExactScan::new(corpus), &[1.0], 5, 1.0).unwrap();
        assert!(s.truncated);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn rejects_multi_attribute_tables_and_bad_k() {
        let data = VectorSet::from_rows(&[[1.0f32], [2.0]]).unwrap();
        let attrs = AttributeTable::new(2, vec![vec![0, 1], vec![1]]).unwrap();
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        assert!(matches!(nash_ann(&ExactScan::new(corpus), &[1.0], 1, 1.0), Err(Error::Config(_))));
        let attrs = AttributeTable::single(2, &[0, 1]).unwrap();
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        assert!(nash_ann(&ExactScan::new(corpus), &[1.0], 0, 1.0).is_err());
        assert!(nash_ann(&ExactScan::new(corpus), &[1.0], 1, 0.0).is_err());
    }

    #[test]
    fn p_one_is_plain_top_k() {
        let sims = [0.9, 0.85, 0.2, 0.8, 0.1, 0.7, 0.65];
        let labels = [0, 0, 1, 0, 1, 2, 0];
        let (data, attrs) = scalar_corpus(&sims, &labels, 3);
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let s = p_mean_ann(&ExactScan::new(corpus), &[1.0], 4, WelfareParams::new(1.0, 0.01).unwrap()).unwrap();
        let mut ids = s.ids.clone();
        ids.sort_unstable();
        assert_eq!(ids, vec![0, 1, 3, 5]);
    }

    #[test]
    fn greedy_phase_is_k_rounds_over_live_streams() {
        let labels: Vec<usize> = (0..40).map(|i| i % 5).collect();
        let sims: Vec<f32> = (0..40).map(|i| 1.0 / (1.0 + i as f32)).collect();
        let (data, attrs) = scalar_corpus(&sims, &labels, 5);
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let (s, stats) = nash_ann_with_stats(&ExactScan::new(corpus), &[1.0], 6, 0.1).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(stats.rounds, 6);
        assert!(stats.marginal_evaluations <= 6 * 5);
    }

    #[test]
    fn utilities_match_recomputation() {
        let sims = [0.3, 0.6, 0.2, 0.8, 0.5];
        let (data, attrs) = scalar_corpus(&sims, &[0, 1, 0, 1, 2], 3);
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let s = nash_ann(&ExactScan::new(corpus), &[1.0], 3, 0.5).unwrap();
        let scorer = corpus.scorer(&[1.0]).unwrap();
        let recomputed = crate::welfare::utilities(&scorer, &s.ids, &attrs).unwrap();
        for (a, b) in s.utilities.iter().zip(&recomputed) {
            assert!((a - b).abs() <= 1e-9 * b.max(1.0));
        }
        let w = crate::welfare::welfare(&s.utilities, s.params).unwrap();
        assert!((w - s.objective).abs() <= 1e-9 * w);
    }

    #[test]
    fn stream_terms() {
        let (data, attrs) = scalar_corpus(&[0.5, 0.25], &[0, 0], 1);
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let stream = AttributeStream::new(exact_topk(&corpus, &[1.0], 0, 2).unwrap());
        let nash = WelfareParams::nash(1.0).unwrap();
        assert!((stream.objective_term(2, nash) - 1.75f64.ln()).abs() < 1e-12);
        let half = WelfareParams::new(0.5, 1.0).unwrap();
        assert!((stream.objective_term(1, half) - 1.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(stream.objective_term(0, half), 1.0);
    }
}
