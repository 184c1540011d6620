//! Per-attribute top-k neighbor oracles.
//!
//! Solvers only see the [`NeighborOracle`] trait: given a query, an
//! attribute `l` and a count `k`, return up to `k` members of `D_l` ranked by
//! similarity. [`ExactScan`] is the exact brute-force oracle. [`AlphaDegraded`]
//! is a synthetic approximate oracle for test harnesses: its `i`-th result is
//! at least `alpha` times as similar as the true `i`-th neighbor.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::selection::Corpus;
use crate::similarity::QueryScorer;

/// One scored vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: usize,
    pub similarity: f64,
}

impl Neighbor {
    /// Ranking order: higher similarity first, then lower id.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other.similarity.total_cmp(&self.similarity).then(self.id.cmp(&other.id))
    }
}

/// Members of `D_l` sorted by similarity descending, ties by ascending id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedList {
    pub attribute: usize,
    pub entries: Vec<Neighbor>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.id).collect()
    }
}

/// Source of per-attribute nearest neighbors. Implementations must be
/// deterministic for a given `(query, attribute, k)`.
pub trait NeighborOracle: Sync {
    fn corpus(&self) -> &Corpus<'_>;

    fn topk(&self, query: &[f32], attribute: usize, k: usize) -> Result<RankedList>;
}

/// Max-heap entry whose top is the worst-ranked neighbor kept so far.
struct Worst(Neighbor);

impl PartialEq for Worst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Worst {}

impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0)
    }
}

/// Top-`k` of `ids` under `scorer` via a bounded heap over one linear scan.
pub fn scan_topk<I>(scorer: &QueryScorer<'_>, ids: I, k: usize) -> Result<Vec<Neighbor>>
where
    I: IntoIterator<Item = usize>,
{
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut heap: BinaryHeap<Worst> = BinaryHeap::with_capacity(k + 1);
    for id in ids {
        let cand = Neighbor { id, similarity: scorer.score(id)? };
        if heap.len() < k {
            heap.push(Worst(cand));
        } else if let Some(top) = heap.peek() {
            if cand.rank_cmp(&top.0) == Ordering::Less {
                heap.pop();
                heap.push(Worst(cand));
            }
        }
    }
    Ok(heap.into_sorted_vec().into_iter().map(|w| w.0).collect())
}

fn check_request(corpus: &Corpus<'_>, attribute: usize, k: usize) -> Result<()> {
    let c = corpus.num_attributes();
    if attribute >= c {
        return Err(Error::InvalidAttribute { attribute, c });
    }
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    Ok(())
}

/// Exact top-`min(k, |D_l|)` of `D_l`. An empty `D_l` yields an empty list.
pub fn exact_topk(corpus: &Corpus<'_>, query: &[f32], attribute: usize, k: usize) -> Result<RankedList> {
    check_request(corpus, attribute, k)?;
    let scorer = corpus.scorer(query)?;
    let entries = scan_topk(&scorer, corpus.attrs.members(attribute).iter().copied(), k)?;
    Ok(RankedList { attribute, entries })
}

/// Brute-force exact oracle.
#[derive(Debug, Clone, Copy)]
pub struct ExactScan<'a> {
    corpus: Corpus<'a>,
}

impl<'a> ExactScan<'a> {
    pub fn new(corpus: Corpus<'a>) -> Self {
        Self { corpus }
    }
}

impl NeighborOracle for ExactScan<'_> {
    fn corpus(&self) -> &Corpus<'_> {
        &self.corpus
    }

    fn topk(&self, query: &[f32], attribute: usize, k: usize) -> Result<RankedList> {
        exact_topk(&self.corpus, query, attribute, k)
    }
}

/// Degradation factor and seed of [`AlphaDegraded`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaOracleConfig {
    alpha: f64,
    seed: u64,
}

impl AlphaOracleConfig {
    pub fn new(alpha: f64, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(Self { alpha, seed })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// FNV-1a over the query's bit patterns; stable across runs and platforms.
fn query_hash(query: &[f32]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in query {
        for b in x.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Synthetic `alpha`-approximate top-k.
///
/// Rank `i` is filled by a random not-yet-chosen member whose similarity is
/// at least `alpha` times the true `i`-th similarity; the top `i` true
/// neighbors always qualify, so a pick exists. The chosen set, re-sorted,
/// then satisfies the per-rank bound. Randomness derives from
/// `(seed, query, attribute)` only.
pub fn alpha_topk(
    corpus: &Corpus<'_>,
    query: &[f32],
    attribute: usize,
    k: usize,
    cfg: AlphaOracleConfig,
) -> Result<RankedList> {
    check_request(corpus, attribute, k)?;
    if cfg.alpha == 1.0 {
        return exact_topk(corpus, query, attribute, k);
    }
    let scorer = corpus.scorer(query)?;
    let members = corpus.attrs.members(attribute);
    let all = scan_topk(&scorer, members.iter().copied(), members.len())?;
    let take = k.min(all.len());
    let mut rng =
        ChaCha8Rng::seed_from_u64(splitmix(cfg.seed ^ splitmix(query_hash(query) ^ splitmix(attribute as u64))));
    let mut used = vec![false; all.len()];
    let mut picked = Vec::with_capacity(take);
    let mut eligible = Vec::new();
    for rank in 0..take {
        let bound = cfg.alpha * all[rank].similarity;
        eligible.clear();
        eligible.extend((0..all.len()).filter(|&j| !used[j] && all[j].similarity >= bound));
        let &j = eligible.choose(&mut rng).expect("the true top-(rank+1) always contains an unused member");
        used[j] = true;
        picked.push(all[j]);
    }
    picked.sort_by(Neighbor::rank_cmp);
    Ok(RankedList { attribute, entries: picked })
}

/// Oracle wrapper around [`alpha_topk`].
#[derive(Debug, Clone, Copy)]
pub struct AlphaDegraded<'a> {
    corpus: Corpus<'a>,
    cfg: AlphaOracleConfig,
}

impl<'a> AlphaDegraded<'a> {
    pub fn new(corpus: Corpus<'a>, cfg: AlphaOracleConfig) -> Self {
        Self { corpus, cfg }
    }
}

impl NeighborOracle for AlphaDegraded<'_> {
    fn corpus(&self) -> &Corpus<'_> {
        &self.corpus
    }

    fn topk(&self, query: &[f32], attribute: usize, k: usize) -> Result<RankedList> {
        alpha_topk(&self.corpus, query, attribute, k, self.cfg)
    }
}
