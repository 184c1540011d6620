//! Reference retrieval strategies: plain top-k, the per-attribute capped
//! top-k (`Div-ANN`), and the fetch-then-diversify heuristic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::multi::CandidatePool;
use crate::oracle::{scan_topk, Neighbor, NeighborOracle, RankedList};
use crate::selection::{Corpus, Selection};
use crate::single::{greedy_over_streams, AttributeStream, GreedyStats};
use crate::welfare::WelfareParams;

/// What [`top_k`] ranks over.
#[derive(Debug, Clone, Copy)]
pub enum Scope<'p> {
    Full,
    Pool(&'p CandidatePool),
}

/// The `k` most similar vectors, ties by ascending id. `params` only sets
/// how the objective of the result is reported.
pub fn top_k(
    corpus: &Corpus<'_>,
    query: &[f32],
    k: usize,
    params: WelfareParams,
    scope: Scope<'_>,
) -> Result<Selection> {
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    let scorer = corpus.scorer(query)?;
    let ids: Vec<usize> = match scope {
        Scope::Full => scan_topk(&scorer, 0..corpus.len(), k)?.into_iter().map(|e| e.id).collect(),
        Scope::Pool(pool) => pool.entries().iter().take(k).map(|e| e.id).collect(),
    };
    let truncated = ids.len() < k;
    Selection::evaluate(&scorer, corpus.attrs, ids, params, truncated)
}

/// Maximum total similarity subject to at most `kprime` vectors per
/// attribute (single-attribute tables). Exact: keep the top `min(k, kprime)`
/// of each attribute, then the global top-`k` of that capped union.
pub fn div_ann(
    oracle: &dyn NeighborOracle,
    query: &[f32],
    k: usize,
    kprime: usize,
    params: WelfareParams,
) -> Result<Selection> {
    let corpus = oracle.corpus();
    corpus.attrs.require_single_attribute()?;
    if k == 0 || kprime == 0 {
        return Err(Error::param("k and kprime must be at least 1"));
    }
    let per_attribute = kprime.min(k);
    let mut union = Vec::new();
    for a in 0..corpus.num_attributes() {
        union.extend(oracle.topk(query, a, per_attribute)?.entries);
    }
    union.sort_by(crate::oracle::Neighbor::rank_cmp);
    union.truncate(k);
    let truncated = union.len() < k;
    let ids = union.iter().map(|e| e.id).collect();
    let scorer = corpus.scorer(query)?;
    Selection::evaluate(&scorer, corpus.attrs, ids, params, truncated)
}

/// Result of [`fetch_union`] with pool coverage diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct FetchUnionOutcome {
    pub selection: Selection,
    pub pool_size: usize,
    /// Distinct attributes represented in the pool; an upper bound on the
    /// diversity the selection can reach.
    pub pool_distinct_attributes: usize,
    pub stats: GreedyStats,
}

/// Fetches the global top-`l`, then runs the single-attribute welfare greedy
/// restricted to that pool (Nash for `p = 0`, p-mean otherwise).
pub fn fetch_union(
    corpus: &Corpus<'_>,
    query: &[f32],
    k: usize,
    l: usize,
    params: WelfareParams,
) -> Result<FetchUnionOutcome> {
    corpus.attrs.require_single_attribute()?;
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    if l < k {
        return Err(Error::param(format!("pool size L = {l} must be at least k = {k}")));
    }
    let scorer = corpus.scorer(query)?;
    let mut pool =
        (0..corpus.len()).map(|id| Ok(Neighbor { id, similarity: scorer.score(id)? })).collect::<Result<Vec<_>>>()?;
    // Only membership in the top L matters here; the greedy takes at most k
    // from any one attribute, so each bucket only needs its own top k sorted.
    if pool.len() > l {
        pool.select_nth_unstable_by(l - 1, Neighbor::rank_cmp);
        pool.truncate(l);
    }
    let pool_size = pool.len();
    let mut buckets: Vec<RankedList> =
        (0..corpus.num_attributes()).map(|attribute| RankedList { attribute, entries: Vec::new() }).collect();
    for e in pool {
        buckets[corpus.attrs.label(e.id)].entries.push(e);
    }
    for b in &mut buckets {
        if b.entries.len() > k {
            b.entries.select_nth_unstable_by(k - 1, Neighbor::rank_cmp);
            b.entries.truncate(k);
        }
        b.entries.sort_by(Neighbor::rank_cmp);
    }
    let pool_distinct_attributes = buckets.iter().filter(|b| !b.is_empty()).count();
    let mut streams: Vec<AttributeStream> = buckets.into_iter().map(AttributeStream::new).collect();
    let (ids, stats) = greedy_over_streams(&mut streams, k, params);
    let utilities = streams.iter().map(AttributeStream::utility).collect();
    let truncated = ids.len() < k;
    Ok(FetchUnionOutcome {
        selection: Selection::from_utilities(ids, utilities, params, truncated),
        pool_size,
        pool_distinct_attributes,
        stats,
    })
}
