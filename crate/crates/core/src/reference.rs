//! Brute-force reference solvers and instance generators.
//!
//! Everything here is deliberately slow and simple: it exists to certify the
//! fast solvers on instances small enough to enumerate, and to build the
//! set-packing reduction that shows the multi-attribute problem is NP-hard.

use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::attributes::AttributeTable;
use crate::error::{Error, Result};
use crate::selection::Corpus;
use crate::similarity::Similarity;
use crate::vectors::VectorSet;
use crate::welfare::{self, WelfareParams};

/// Largest subset count [`brute_force_opt`] will enumerate.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Revolving-door enumeration of `t`-subsets of `[0, n)`: consecutive
/// subsets differ by exactly one element leaving and one entering.
#[derive(Debug, Clone)]
pub struct RevolvingDoor {
    // c[1..=t] is the current subset (ascending), c[t + 1] = n is a sentinel.
    c: Vec<usize>,
    t: usize,
    state: DoorState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DoorState {
    Fresh,
    Running,
    Done,
}

impl RevolvingDoor {
    pub fn new(n: usize, t: usize) -> Self {
        assert!(t <= n, "subset size {t} exceeds universe {n}");
        let mut c = Vec::with_capacity(t + 2);
        c.push(0);
        c.extend(0..t);
        c.push(n);
        Self { c, t, state: DoorState::Fresh }
    }

    /// Current subset, ascending.
    pub fn current(&self) -> &[usize] {
        &self.c[1..=self.t]
    }

    /// Advances to the next subset; false once every subset was visited.
    pub fn advance(&mut self) -> bool {
        match self.state {
            DoorState::Done => return false,
            DoorState::Fresh => {
                self.state = DoorState::Running;
                return true;
            }
            DoorState::Running => {}
        }
        let t = self.t;
        let n = self.c[t + 1];
        if t == 0 || t == n {
            self.state = DoorState::Done;
            return false;
        }
        let c = &mut self.c;
        let mut j;
        let mut try_decrease;
        if t % 2 == 1 {
            if c[1] + 1 < c[2] {
                c[1] += 1;
                return true;
            }
            j = 2;
            try_decrease = true;
        } else {
            if c[1] > 0 {
                c[1] -= 1;
                return true;
            }
            j = 2;
            try_decrease = false;
        }
        loop {
            if j > t {
                self.state = DoorState::Done;
                return false;
            }
            if try_decrease {
                if c[j] >= j {
                    c[j] = c[j - 1];
                    c[j - 1] = j - 2;
                    return true;
                }
                j += 1;
                try_decrease = false;
            } else {
                if c[j] + 1 < c[j + 1] {
                    c[j - 1] = c[j];
                    c[j] += 1;
                    return true;
                }
                j += 1;
                try_decrease = true;
            }
        }
    }
}

/// Elements of `a` not in `b`, both ascending.
fn difference(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            out.push(x);
        }
    }
}

/// Optimal subset found by enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceOpt {
    /// Maximizer, ascending ids.
    pub ids: Vec<usize>,
    /// `log NSW` when `p = 0`, else `M_p`.
    pub value: f64,
    pub params: WelfareParams,
}

impl BruteForceOpt {
    /// The optimum on the welfare scale (`NSW` for `p = 0`).
    pub fn welfare(&self) -> f64 {
        if self.params.is_nash() {
            self.value.exp()
        } else {
            self.value
        }
    }
}

const RESYNC_EVERY: usize = 1024;

/// Exhaustive maximization of welfare over all size-`k` subsets.
///
/// Subsets are walked in revolving-door order with incremental utility
/// updates (periodically recomputed from scratch); any candidate within
/// rounding of the incumbent is re-scored exactly. Ties go to the
/// lexicographically smallest id list.
pub fn brute_force_opt(corpus: &Corpus<'_>, query: &[f32], k: usize, params: WelfareParams) -> Result<BruteForceOpt> {
    let n = corpus.len();
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    let k = k.min(n);
    if binomial(n, k) > ENUMERATION_LIMIT {
        return Err(Error::GuardExceeded { n, k, limit: ENUMERATION_LIMIT });
    }
    let scorer = corpus.scorer(query)?;
    let sims = (0..n).map(|i| scorer.score(i)).collect::<Result<Vec<_>>>()?;
    let attrs = corpus.attrs;
    let eta = params.eta();
    let c = attrs.num_attributes();

    let fill = |ids: &[usize], u: &mut Vec<f64>| {
        u.iter_mut().for_each(|x| *x = 0.0);
        for &i in ids {
            for &a in attrs.of(i) {
                u[a] += sims[i];
            }
        }
    };
    let score = |u: &[f64]| u.iter().map(|&x| params.transform(x.max(0.0) + eta)).sum::<f64>();

    let mut door = RevolvingDoor::new(n, k);
    door.advance();
    let mut u = vec![0.0; c];
    fill(door.current(), &mut u);
    let mut best_ids = door.current().to_vec();
    let mut best = score(&u);
    let mut prev = best_ids.clone();
    let mut scratch = vec![0.0; c];
    let (mut gone, mut came) = (Vec::new(), Vec::new());
    let mut step = 0usize;
    while door.advance() {
        let cur = door.current();
        step += 1;
        if step.is_multiple_of(RESYNC_EVERY) {
            fill(cur, &mut u);
        } else {
            difference(&prev, cur, &mut gone);
            difference(cur, &prev, &mut came);
            for &i in &gone {
                for &a in attrs.of(i) {
                    u[a] -= sims[i];
                }
            }
            for &i in &came {
                for &a in attrs.of(i) {
                    u[a] += sims[i];
                }
            }
        }
        let approx = score(&u);
        if approx >= best - 1e-9 * best.abs().max(1.0) {
            fill(cur, &mut scratch);
            let exact = score(&scratch);
            let better = match exact.total_cmp(&best) {
                Ordering::Greater => true,
                Ordering::Equal => cur < best_ids.as_slice(),
                Ordering::Less => false,
            };
            if better {
                best = exact;
                best_ids.clear();
                best_ids.extend_from_slice(cur);
            }
        }
        prev.clear();
        prev.extend_from_slice(cur);
    }

    fill(&best_ids, &mut u);
    let value =
        if params.is_nash() { welfare::log_nsw_unchecked(&u, eta) } else { welfare::welfare_unchecked(&u, params) };
    Ok(BruteForceOpt { ids: best_ids, value, params })
}

/// Exact Regular Set Packing: are there `k` pairwise-disjoint sets among
/// `sets`, each of size `tau`, over the universe `[0, n)`?
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErspInstance {
    pub n: usize,
    pub tau: usize,
    pub sets: Vec<Vec<usize>>,
    pub k: usize,
}

impl ErspInstance {
    pub fn new(n: usize, tau: usize, sets: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        if n == 0 || tau == 0 || k == 0 || sets.is_empty() {
            return Err(Error::param("ERSP instance needs n, tau, k >= 1 and at least one set"));
        }
        let mut sets = sets;
        for set in &mut sets {
            set.sort_unstable();
            set.dedup();
            if set.len() != tau || set.iter().any(|&e| e >= n) {
                return Err(Error::param(format!("set {set:?} is not a {tau}-subset of [0, {n})")));
            }
        }
        Ok(Self { n, tau, sets, k })
    }

    /// Random instance with `n <= max_n` and `tau <= max_tau`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_n: usize, max_tau: usize) -> Self {
        let n = rng.gen_range(2..=max_n.max(2));
        let tau = rng.gen_range(1..=max_tau.min(n).max(1));
        let m = rng.gen_range(2..=8);
        let sets: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let mut s = sample(rng, n, tau).into_vec();
                s.sort_unstable();
                s
            })
            .collect();
        let k_max = m.min((n / tau).max(1) + 1);
        let k = rng.gen_range(1..=k_max.max(1));
        Self::new(n, tau, sets, k).expect("generated instance is valid")
    }

    /// Whether `k` pairwise-disjoint sets exist, by direct enumeration.
    pub fn has_packing(&self) -> bool {
        fn search(sets: &[Vec<usize>], start: usize, need: usize, used: &mut Vec<bool>) -> bool {
            if need == 0 {
                return true;
            }
            for i in start..sets.len() {
                if sets.len() - i < need {
                    break;
                }
                if sets[i].iter().all(|&e| !used[e]) {
                    sets[i].iter().for_each(|&e| used[e] = true);
                    let found = search(sets, i + 1, need - 1, used);
                    sets[i].iter().for_each(|&e| used[e] = false);
                    if found {
                        return true;
                    }
                }
            }
            false
        }
        self.k <= self.sets.len() && search(&self.sets, 0, self.k, &mut vec![false; self.n])
    }
}

/// The search instance built from an [`ErspInstance`].
#[derive(Debug, Clone)]
pub struct ErspReduction {
    pub vectors: VectorSet,
    pub attrs: AttributeTable,
    pub query: Vec<f32>,
    pub similarity: Similarity,
    pub params: WelfareParams,
    pub k: usize,
    /// `tau k ln 2 / c`: a size-`k` selection reaches `log NSW >= threshold`
    /// exactly when the sets admit a packing.
    pub threshold: f64,
}

impl ErspReduction {
    pub fn corpus(&self) -> Corpus<'_> {
        Corpus::new(&self.vectors, &self.attrs, self.similarity).expect("reduction is consistent")
    }
}

/// Builds the reduction: one attribute per universe element, one vector
/// `(1/tau) 1_S` per set, the all-ones query, dot-product similarity (every
/// vector scores 1) and `eta = 1`.
///
/// Vectors are stored as `f32`, so for `tau` not a power of two each
/// similarity is 1 up to `f32` rounding of `1/tau`.
pub fn ersp_to_nanns(inst: &ErspInstance) -> ErspReduction {
    let n = inst.n;
    let w = 1.0 / inst.tau as f32;
    let mut data = vec![0.0f32; inst.sets.len() * n];
    for (row, set) in inst.sets.iter().enumerate() {
        for &e in set {
            data[row * n + e] = w;
        }
    }
    let vectors = VectorSet::new(data, n).expect("reduction vectors are finite");
    let attrs = AttributeTable::new(n, inst.sets.clone()).expect("sets are nonempty subsets of [0, n)");
    ErspReduction {
        vectors,
        attrs,
        query: vec![1.0; n],
        similarity: Similarity::DotProduct,
        params: WelfareParams::nash(1.0).expect("eta = 1 is valid"),
        k: inst.k,
        threshold: inst.tau as f64 * inst.k as f64 * std::f64::consts::LN_2 / n as f64,
    }
}

/// `x ln(1 + a/x)`.
pub fn log_ineq_lhs(a: f64, x: f64) -> f64 {
    x * (a / x).ln_1p()
}

/// Sweeps `x` over a geometric grid on `(0, a]` (from `a` down to `1e-12 a`)
/// and checks `x ln(1 + a/x) <= a ln 2`, with equality only at `x = a`.
pub fn log_ineq_check(a: f64, samples: usize) -> bool {
    assert!(a > 0.0 && a.is_finite(), "a must be positive");
    let bound = a * std::f64::consts::LN_2;
    let steps = samples.max(2) - 1;
    (0..=steps).all(|j| {
        let x = a * 10f64.powf(-12.0 * j as f64 / steps as f64);
        let lhs = log_ineq_lhs(a, x);
        if (x - a).abs() <= 1e-9 * a {
            lhs <= bound + 1e-12 && (lhs - bound).abs() <= 1e-9 * bound.max(1.0)
        } else {
            lhs < bound
        }
    })
}

/// A self-contained query instance for property checks.
#[derive(Debug, Clone)]
pub struct Instance {
    pub vectors: VectorSet,
    pub attrs: AttributeTable,
    pub query: Vec<f32>,
    pub similarity: Similarity,
}

impl Instance {
    pub fn corpus(&self) -> Corpus<'_> {
        Corpus::new(&self.vectors, &self.attrs, self.similarity).expect("instance is consistent")
    }

    /// Random single-attribute instance: `n` Gaussian-ish vectors in `d`
    /// dimensions with uniform labels over `c` attributes (some may be empty).
    pub fn random_single<R: Rng + ?Sized>(rng: &mut R, n: usize, c: usize, d: usize) -> Self {
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let attrs = AttributeTable::single(c, &labels).expect("labels are in range");
        Self::random_with(rng, attrs, d)
    }

    /// Random multi-attribute instance: each vector gets `1..=max_atb` distinct attributes.
    pub fn random_multi<R: Rng + ?Sized>(rng: &mut R, n: usize, c: usize, max_atb: usize, d: usize) -> Self {
        let atb: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let m = rng.gen_range(1..=max_atb.min(c).max(1));
                sample(rng, c, m).into_vec()
            })
            .collect();
        let attrs = AttributeTable::new(c, atb).expect("attributes are in range");
        Self::random_with(rng, attrs, d)
    }

    fn random_with<R: Rng + ?Sized>(rng: &mut R, attrs: AttributeTable, d: usize) -> Self {
        let n = attrs.num_vectors();
        let coord = |rng: &mut R| -> f32 {
            let x: f32 = rng.gen_range(-1.0..1.0);
            if x == 0.0 {
                0.5
            } else {
                x
            }
        };
        let data: Vec<f32> = (0..n * d).map(|_| coord(rng)).collect();
        let query: Vec<f32> = (0..d).map(|_| coord(rng)).collect();
        let similarity = if rng.gen_bool(0.5) {
            Similarity::OnePlusCosine
        } else {
            Similarity::ReciprocalEuclidean { delta: rng.gen_range(0.01..1.0) }
        };
        Self { vectors: VectorSet::new(data, d).expect("coordinates are finite"), attrs, query, similarity }
    }
}
