//! Greedy solvers for the multi-attribute setting, run over a candidate pool.
//!
//! With `eta = 1`, `f(S) = log NSW(S)` is monotone, submodular and
//! `f(empty) = 0`, so marginal-gain greedy is a `(1 - 1/e)`-approximation.
//! The p-mean variant uses the same machinery with `M_p^p` gains and carries
//! no guarantee.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{scan_topk, Neighbor};
use crate::selection::{Corpus, Selection};
use crate::welfare::WelfareParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolSource {
    /// Every input vector.
    FullScan,
    /// The top-`L` of the whole set from a union retrieval.
    UnionOracle,
}

/// Candidate vectors with their similarity to one query, best first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidatePool {
    entries: Vec<Neighbor>,
    source: PoolSource,
}

impl CandidatePool {
    /// Sorts and validates `entries` (ids must be distinct).
    pub fn new(mut entries: Vec<Neighbor>, source: PoolSource) -> Result<Self> {
        entries.sort_by(Neighbor::rank_cmp);
        let mut ids: Vec<usize> = entries.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("candidate pool ids must be distinct"));
        }
        Ok(Self { entries, source })
    }

    /// Top-`l` of the whole corpus by exact scan.
    pub fn fetch(corpus: &Corpus<'_>, query: &[f32], l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::param("pool size L must be at least 1"));
        }
        let scorer = corpus.scorer(query)?;
        let entries = scan_topk(&scorer, 0..corpus.len(), l)?;
        Ok(Self { entries, source: PoolSource::UnionOracle })
    }

    /// The whole corpus as a pool.
    pub fn all(corpus: &Corpus<'_>, query: &[f32]) -> Result<Self> {
        let scorer = corpus.scorer(query)?;
        let entries = scan_topk(&scorer, 0..corpus.len(), corpus.len())?;
        Ok(Self { entries, source: PoolSource::FullScan })
    }

    pub fn entries(&self) -> &[Neighbor] {
        &self.entries
    }

    pub fn source(&self) -> PoolSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct attributes carried by pool members.
    pub fn distinct_attributes(&self, corpus: &Corpus<'_>) -> usize {
        let mut seen = vec![false; corpus.num_attributes()];
        for e in &self.entries {
            for &a in corpus.attrs.of(e.id) {
                seen[a] = true;
            }
        }
        seen.into_iter().filter(|&s| s).count()
    }

    fn check(&self, corpus: &Corpus<'_>) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Empty("candidate pool"));
        }
        let ids: Vec<usize> = self.entries.iter().map(|e| e.id).collect();
        corpus.attrs.check_ids(&ids)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PoolGreedyStats {
    pub rounds: usize,
    pub gain_evaluations: usize,
}

/// Marginal gain of adding `e` given current utilities `u`, scaled by `1/c`.
fn gain(corpus: &Corpus<'_>, u: &[f64], e: &Neighbor, params: WelfareParams) -> f64 {
    let sum: f64 = corpus.attrs.of(e.id).iter().map(|&a| params.gain(u[a], e.similarity)).sum();
    sum / u.len() as f64
}

/// Heap entry: a (possibly stale) gain upper bound for pool position `pos`.
#[derive(Debug)]
struct Bound {
    gain: f64,
    pos: usize,
    round: usize,
}

impl PartialEq for Bound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Bound {}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then_with(|| other.pos.cmp(&self.pos))
    }
}

/// Lazy marginal-gain greedy over the pool. Per-attribute gains only shrink
/// as utilities grow, so a stale gain is an upper bound and an entry that
/// is still on top after re-evaluation is the true argmax. Ties go to the
/// earlier pool position.
pub fn pool_greedy(
    corpus: &Corpus<'_>,
    pool: &CandidatePool,
    k: usize,
    params: WelfareParams,
) -> Result<(Selection, PoolGreedyStats)> {
    pool.check(corpus)?;
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    let mut u = vec![0.0; corpus.num_attributes()];
    let mut stats = PoolGreedyStats::default();
    let mut heap: BinaryHeap<Bound> = pool
        .entries
        .iter()
        .enumerate()
        .map(|(pos, e)| Bound { gain: gain(corpus, &u, e, params), pos, round: 0 })
        .collect();
    stats.gain_evaluations = pool.len();
    let mut ids = Vec::with_capacity(k);
    while ids.len() < k {
        let Some(top) = heap.pop() else { break };
        let round = ids.len();
        if top.round == round {
            let e = &pool.entries[top.pos];
            for &a in corpus.attrs.of(e.id) {
                u[a] += e.similarity;
            }
            ids.push(e.id);
            stats.rounds += 1;
        } else {
            stats.gain_evaluations += 1;
            heap.push(Bound { gain: gain(corpus, &u, &pool.entries[top.pos], params), pos: top.pos, round });
        }
    }
    let truncated = ids.len() < k;
    Ok((Selection::from_utilities(ids, u, params, truncated), stats))
}

/// Plain greedy recomputing every gain every round; the reference for [`pool_greedy`].
pub fn pool_greedy_naive(
    corpus: &Corpus<'_>,
    pool: &CandidatePool,
    k: usize,
    params: WelfareParams,
) -> Result<Selection> {
    pool.check(corpus)?;
    let mut u = vec![0.0; corpus.num_attributes()];
    let mut taken = vec![false; pool.len()];
    let mut ids = Vec::with_capacity(k);
    while ids.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for (pos, e) in pool.entries.iter().enumerate() {
            if taken[pos] {
                continue;
            }
            let g = gain(corpus, &u, e, params);
            if best.is_none_or(|(_, b)| g > b) {
                best = Some((pos, g));
            }
        }
        let Some((pos, _)) = best else { break };
        taken[pos] = true;
        let e = &pool.entries[pos];
        for &a in corpus.attrs.of(e.id) {
            u[a] += e.similarity;
        }
        ids.push(e.id);
    }
    let truncated = ids.len() < k;
    Ok(Selection::from_utilities(ids, u, params, truncated))
}

/// Greedy `log NSW` maximization over the pool.
pub fn multi_nash_ann(corpus: &Corpus<'_>, pool: &CandidatePool, k: usize, eta: f64) -> Result<Selection> {
    pool_greedy(corpus, pool, k, WelfareParams::nash(eta)?).map(|(s, _)| s)
}

/// Greedy over the pool maximizing the increase of `M_p^p` (`p > 0`) or its
/// decrease (`p < 0`). `p = 0` runs [`multi_nash_ann`].
pub fn multi_p_mean_ann(
    corpus: &Corpus<'_>,
    pool: &CandidatePool,
    k: usize,
    params: WelfareParams,
) -> Result<Selection> {
    pool_greedy(corpus, pool, k, params).map(|(s, _)| s)
}

/// Most-similar-first over the pool, skipping any vector that would push
/// one of its attributes above `kprime` selected vectors. May stall short of
/// `k`, in which case the selection is marked truncated.
pub fn multi_div_ann(
    corpus: &Corpus<'_>,
    pool: &CandidatePool,
    k: usize,
    kprime: usize,
    params: WelfareParams,
) -> Result<Selection> {
    pool.check(corpus)?;
    if kprime == 0 || k == 0 {
        return Err(Error::param("k and kprime must be at least 1"));
    }
    let mut counts = vec![0usize; corpus.num_attributes()];
    let mut u = vec![0.0; corpus.num_attributes()];
    let mut ids = Vec::with_capacity(k);
    for e in &pool.entries {
        if ids.len() == k {
            break;
        }
        let attrs = corpus.attrs.of(e.id);
        if attrs.iter().any(|&a| counts[a] >= kprime) {
            continue;
        }
        for &a in attrs {
            counts[a] += 1;
            u[a] += e.similarity;
        }
        ids.push(e.id);
    }
    let truncated = ids.len() < k;
    Ok(Selection::from_utilities(ids, u, params, truncated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::AttributeTable;
    use crate::reference::Instance;
    use crate::similarity::Similarity;
    use crate::vectors::VectorSet;
    use crate::welfare::log_nsw;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(sims: &[f32]) -> VectorSet {
        let rows: Vec<[f32; 1]> = sims.iter().map(|&s| [s]).collect();
        VectorSet::from_rows(&rows).unwrap()
    }

    #[test]
    fn pool_of_exactly_k_is_returned_whole() {
        let data = scalar(&[0.5, 0.9, 0.1]);
        let attrs = AttributeTable::new(2, vec![vec![0], vec![0, 1], vec![1]]).unwrap();
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let pool = CandidatePool::all(&corpus, &[1.0]).unwrap();
        let mut s = multi_nash_ann(&corpus, &pool, 3, 1.0).unwrap();
        s.ids.sort_unstable();
        assert_eq!(s.ids, vec![0, 1, 2]);
        assert!(!s.truncated);
        let short = multi_nash_ann(&corpus, &pool, 5, 1.0).unwrap();
        assert!(short.truncated);
    }

    #[test]
    fn empty_pool_and_duplicate_ids_are_rejected() {
        let data = scalar(&[0.5]);
        let attrs = AttributeTable::single(1, &[0]).unwrap();
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let empty = CandidatePool::new(vec![], PoolSource::UnionOracle).unwrap();
        assert!(multi_nash_ann(&corpus, &empty, 1, 1.0).is_err());
        let n = Neighbor { id: 0, similarity: 0.5 };
        assert!(CandidatePool::new(vec![n, n], PoolSource::UnionOracle).is_err());
    }

    #[test]
    fn p_one_takes_pool_top_k_and_k_one_takes_best_gain() {
        // One attribute per class, so every vector carries the same number of
        // attributes and the p = 1 gain is proportional to similarity.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let atb: Vec<Vec<usize>> = (0..30).map(|_| vec![rng.gen_range(0..3), rng.gen_range(3..6)]).collect();
        let attrs = AttributeTable::new(6, atb).unwrap().with_class_sizes(&[3, 3]).unwrap();
        let data = VectorSet::new((0..30 * 4).map(|_| rng.gen_range(-1.0..1.0f32)).collect(), 4).unwrap();
        let corpus = Corpus::new(&data, &attrs, Similarity::OnePlusCosine).unwrap();
        let q = [0.3f32, -0.2, 0.9, 0.1];
        let pool = CandidatePool::fetch(&corpus, &q, 20).unwrap();
        let s = multi_p_mean_ann(&corpus, &pool, 6, WelfareParams::new(1.0, 1.0).unwrap()).unwrap();
        let top: Vec<usize> = pool.entries()[..6].iter().map(|e| e.id).collect();
        assert_eq!(s.ids, top);

        let params = WelfareParams::new(-2.0, 1.0).unwrap();
        let one = multi_p_mean_ann(&corpus, &pool, 1, params).unwrap();
        let u = vec![0.0; 6];
        let best = pool
            .entries()
            .iter()
            .rev()
            .max_by(|a, b| gain(&corpus, &u, a, params).total_cmp(&gain(&corpus, &u, b, params)))
            .unwrap();
        assert_eq!(one.ids, vec![best.id]);
    }

    #[test]
    fn p_one_single_attribute_equals_pool_top_k() {
        let data = scalar(&[0.9, 0.3, 0.8, 0.7, 0.2]);
        let attrs = AttributeTable::single(2, &[0, 1, 0, 0, 1]).unwrap();
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let pool = CandidatePool::all(&corpus, &[1.0]).unwrap();
        let s = multi_p_mean_ann(&corpus, &pool, 3, WelfareParams::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(s.ids, vec![0, 2, 3]);
    }

    #[test]
    fn negative_p_spreads_on_equal_similarities() {
        let labels: Vec<Vec<usize>> = (0..12).map(|i| vec![i % 4, 4 + (i / 4) % 3]).collect();
        let data = scalar(&[1.0; 12]);
        let attrs = AttributeTable::new(7, labels).unwrap().with_class_sizes(&[4, 3]).unwrap();
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let pool = CandidatePool::all(&corpus, &[1.0]).unwrap();
        let spread = multi_p_mean_ann(&corpus, &pool, 4, WelfareParams::new(-10.0, 1.0).unwrap()).unwrap();
        let nash = multi_nash_ann(&corpus, &pool, 4, 1.0).unwrap();
        let entropy = |s: &Selection| {
            let counts = s.counts(&attrs);
            let n = s.len() as f64;
            counts[..4].iter().filter(|&&c| c > 0).map(|&c| -(c as f64 / n) * (c as f64 / n).ln()).sum::<f64>()
        };
        assert!(entropy(&spread) >= entropy(&nash) - 1e-9);
        assert!((entropy(&spread) - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn div_cap_examples() {
        // Six vectors, three attributes, sigma 9..4, the hand-built stall instance:
        // vectors 0 and 1 share attribute 0, every later vector also carries 0 or 1.
        let data = scalar(&[9.0, 8.0, 7.0, 6.0, 5.0, 4.0]);
        let attrs =
            AttributeTable::new(3, vec![vec![0], vec![1], vec![0, 2], vec![1, 2], vec![0, 1], vec![0]]).unwrap();
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct).unwrap();
        let pool = CandidatePool::all(&corpus, &[1.0]).unwrap();
        let params = WelfareParams::default();
        let stalled = multi_div_ann(&corpus, &pool, 3, 1, params).unwrap();
        assert_eq!(stalled.ids, vec![0, 1]);
        assert!(stalled.truncated);
        let open = multi_div_ann(&corpus, &pool, 3, 3, params).unwrap();
        assert_eq!(open.ids, vec![0, 1, 2]);
        assert!(multi_div_ann(&corpus, &pool, 3, 0, params).is_err());
    }

    #[test]
    fn log_nsw_is_monotone_submodular_and_zero_on_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let inst = Instance::random_multi(&mut rng, 12, 5, 3, 3);
            let corpus = inst.corpus();
            let scorer = corpus.scorer(&inst.query).unwrap();
            let f = |ids: &[usize]| {
                let u = crate::welfare::utilities(&scorer, ids, corpus.attrs).unwrap();
                log_nsw(&u, 1.0).unwrap()
            };
            assert_eq!(f(&[]), 0.0);
            let t: Vec<usize> = (0..12).filter(|_| rng.gen_bool(0.5)).collect();
            let s: Vec<usize> = t.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            let Some(w) = (0..12).find(|i| !t.contains(i)) else { continue };
            let with = |set: &[usize]| {
                let mut v = set.to_vec();
                v.push(w);
                v
            };
            let ds = f(&with(&s)) - f(&s);
            let dt = f(&with(&t)) - f(&t);
            assert!(ds >= dt - 1e-12 && dt >= -1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lazy_greedy_matches_naive(seed in any::<u64>(), p_idx in 0usize..4, k in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = Instance::random_multi(&mut rng, 25, 6, 3, 4);
            let corpus = inst.corpus();
            let pool = CandidatePool::fetch(&corpus, &inst.query, 18).unwrap();
            let params = WelfareParams::new([0.0, 0.5, -1.0, -10.0][p_idx], 1.0).unwrap();
            let (lazy, stats) = pool_greedy(&corpus, &pool, k, params).unwrap();
            let naive = pool_greedy_naive(&corpus, &pool, k, params).unwrap();
            prop_assert_eq!(&lazy.ids, &naive.ids);
            prop_assert_eq!(stats.rounds, k);
        }
    }
}
