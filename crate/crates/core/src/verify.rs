//! Randomized property suites behind `nash-nns verify`: solver optimality and
//! approximation bounds against exhaustive enumeration, the marginal-gain
//! lemmas, the hardness reduction, and hand-built examples.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attributes::AttributeTable;
use crate::baselines::div_ann;
use crate::error::{Error, Result};
use crate::metrics::{approx_ratio, recall};
use crate::multi::{multi_nash_ann, CandidatePool};
use crate::oracle::{AlphaDegraded, AlphaOracleConfig, ExactScan, Neighbor, RankedList};
use crate::reference::{brute_force_opt, ersp_to_nanns, log_ineq_check, log_ineq_lhs, ErspInstance, Instance};
use crate::selection::Corpus;
use crate::similarity::Similarity;
use crate::single::{nash_ann, p_mean_ann, AttributeStream};
use crate::vectors::VectorSet;
use crate::welfare::{log_nsw, welfare, WelfareParams};

pub const PMEAN_EXPONENTS: [f64; 5] = [-10.0, -1.0, -0.5, 0.5, 1.0];
pub const DEFAULT_ALPHAS: [f64; 2] = [0.5, 0.9];
const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Optimality,
    Pmean,
    Alpha,
    Submodular,
    Lemmas,
    Examples,
    Ersp,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] =
        [Suite::Optimality, Suite::Pmean, Suite::Alpha, Suite::Submodular, Suite::Lemmas, Suite::Examples, Suite::Ersp];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Optimality => "optimality",
            Suite::Pmean => "pmean",
            Suite::Alpha => "alpha",
            Suite::Submodular => "submodular",
            Suite::Lemmas => "lemmas",
            Suite::Examples => "examples",
            Suite::Ersp => "ersp",
            Suite::All => "all",
        }
    }

    /// Trials used when none are requested.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Optimality | Suite::Pmean => 500,
            Suite::Alpha => 200,
            Suite::Submodular => 300,
            Suite::Lemmas => 10_000,
            Suite::Ersp => 100,
            Suite::Examples | Suite::All => 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub trials: Option<usize>,
    pub seed: u64,
    pub alphas: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { suite: Suite::All, trials: None, seed: 0, alphas: DEFAULT_ALPHAS.to_vec() }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: usize,
    pub violations: usize,
    /// First few violations, for the report.
    pub failures: Vec<String>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checks > 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<11} {:>7} checks {:>4} violations  {:.2}s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.checks,
            self.violations,
            self.seconds
        )?;
        for msg in &self.failures {
            write!(f, "\n    {msg}")?;
        }
        Ok(())
    }
}

const MAX_FAILURES: usize = 5;

struct Tally {
    name: String,
    checks: usize,
    violations: usize,
    failures: Vec<String>,
    start: Instant,
}

impl Tally {
    fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), checks: 0, violations: 0, failures: vec![], start: Instant::now() }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(msg());
            }
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.name,
            checks: self.checks,
            violations: self.violations,
            failures: self.failures,
            seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Runs the selected suite (or all of them) and returns one report each.
pub fn run(cfg: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    let suites: Vec<Suite> = if cfg.suite == Suite::All { Suite::EACH.to_vec() } else { vec![cfg.suite] };
    suites
        .into_iter()
        .map(|s| {
            let trials = cfg.trials.unwrap_or(s.default_trials());
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ s as u64);
            match s {
                Suite::Optimality => optimality(&mut rng, trials),
                Suite::Pmean => pmean_optimality(&mut rng, trials),
                Suite::Alpha => alpha_bound(&mut rng, trials, &cfg.alphas),
                Suite::Submodular => submodular_bound(&mut rng, trials),
                Suite::Lemmas => lemmas(&mut rng, trials),
                Suite::Examples => examples(),
                Suite::Ersp => ersp(&mut rng, trials),
                Suite::All => unreachable!("expanded above"),
            }
        })
        .collect()
}

/// Small single-attribute instance: `n <= 20`, `c <= 6`, `k <= 5`.
pub fn small_single_instance<R: Rng>(rng: &mut R) -> (Instance, usize) {
    let n = rng.gen_range(2..=20);
    let c = rng.gen_range(1..=6);
    let d = rng.gen_range(2..=6);
    let k = rng.gen_range(1..=5usize.min(n));
    (Instance::random_single(rng, n, c, d), k)
}

pub const ETAS: [f64; 3] = [0.01, 1.0, 50.0];

pub fn optimality<R: Rng>(rng: &mut R, trials: usize) -> Result<SuiteReport> {
    let mut t = Tally::new("optimality");
    for trial in 0..trials {
        let (inst, k) = small_single_instance(rng);
        let eta = ETAS[trial % ETAS.len()];
        let corpus = inst.corpus();
        let got = nash_ann(&ExactScan::new(corpus), &inst.query, k, eta)?;
        let opt = brute_force_opt(&corpus, &inst.query, k, WelfareParams::nash(eta)?)?;
        t.check(rel_close(got.objective, opt.welfare(), REL_TOL), || {
            format!("trial {trial}: NSW {} vs optimum {} (k = {k}, eta = {eta})", got.objective, opt.welfare())
        });
    }
    Ok(t.finish())
}

pub fn pmean_optimality<R: Rng>(rng: &mut R, trials: usize) -> Result<SuiteReport> {
    let mut t = Tally::new("pmean");
    for trial in 0..trials {
        let (inst, k) = small_single_instance(rng);
        let eta = ETAS[trial % ETAS.len()];
        let corpus = inst.corpus();
        let oracle = ExactScan::new(corpus);
        for p in PMEAN_EXPONENTS {
            let params = WelfareParams::new(p, eta)?;
            let got = p_mean_ann(&oracle, &inst.query, k, params)?;
            let opt = brute_force_opt(&corpus, &inst.query, k, params)?;
            t.check(rel_close(got.objective, opt.welfare(), REL_TOL), || {
                format!("trial {trial}: p = {p}: M_p {} vs optimum {}", got.objective, opt.welfare())
            });
        }
    }
    Ok(t.finish())
}

pub fn alpha_bound<R: Rng>(rng: &mut R, trials: usize, alphas: &[f64]) -> Result<SuiteReport> {
    let mut t = Tally::new("alpha");
    for trial in 0..trials {
        let (inst, k) = small_single_instance(rng);
        let eta = ETAS[trial % ETAS.len()];
        let corpus = inst.corpus();
        for &alpha in alphas {
            let oracle = AlphaDegraded::new(corpus, AlphaOracleConfig::new(alpha, rng.gen())?);
            for p in [0.0, 0.5, -1.0] {
                let params = WelfareParams::new(p, eta)?;
                let got = p_mean_ann(&oracle, &inst.query, k, params)?;
                let opt = brute_force_opt(&corpus, &inst.query, k, params)?.welfare();
                t.check(got.objective >= alpha * opt * (1.0 - 1e-12), || {
                    format!("trial {trial}: alpha = {alpha}, p = {p}: {} < {alpha} x {opt}", got.objective)
                });
            }
        }
    }
    Ok(t.finish())
}

pub fn submodular_bound<R: Rng>(rng: &mut R, trials: usize) -> Result<SuiteReport> {
    let mut t = Tally::new("submodular");
    let factor = 1.0 - (-1.0f64).exp();
    for trial in 0..trials {
        let n = rng.gen_range(2..=16);
        let c = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=4usize.min(n));
        let d = rng.gen_range(2..=5);
        let inst = Instance::random_multi(rng, n, c, 3, d);
        let corpus = inst.corpus();
        let pool = CandidatePool::all(&corpus, &inst.query)?;
        let got = multi_nash_ann(&corpus, &pool, k, 1.0)?.log_nsw();
        let opt = brute_force_opt(&corpus, &inst.query, k, WelfareParams::nash(1.0)?)?.value;
        t.check(factor * opt <= got + 1e-12 && got <= opt + 1e-9, || {
            format!("trial {trial}: log NSW {got} outside [{}, {opt}]", factor * opt)
        });
    }
    Ok(t.finish())
}

fn random_stream<R: Rng>(rng: &mut R) -> AttributeStream {
    let len = rng.gen_range(2..=12);
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    let mut sims: Vec<f64> = (0..len).map(|_| scale * rng.gen::<f64>()).collect();
    sims.sort_by(|a, b| b.total_cmp(a));
    let entries = sims.into_iter().enumerate().map(|(id, similarity)| Neighbor { id, similarity }).collect();
    AttributeStream::new(RankedList { attribute: 0, entries })
}

/// Marginals `F(i) - F(i-1)` of a stream.
fn marginals(s: &AttributeStream, params: WelfareParams) -> Vec<f64> {
    let f: Vec<f64> = (0..=s.ranked.len()).map(|i| s.objective_term(i, params)).collect();
    f.windows(2).map(|w| w[1] - w[0]).collect()
}

pub fn lemmas<R: Rng>(rng: &mut R, trials: usize) -> Result<SuiteReport> {
    let mut t = Tally::new("lemmas");
    let eta = |rng: &mut R| 10f64.powf(rng.gen_range(-3.0..2.0));
    // F is concave for log and 0 < p <= 1: marginals never increase.
    for (label, pick) in [("log", None), ("p in (0,1]", Some(true)), ("p < 0", Some(false))] {
        for trial in 0..trials {
            let s = random_stream(rng);
            let p = match pick {
                None => 0.0,
                Some(true) => rng.gen_range(0.01..=1.0),
                Some(false) => -rng.gen_range(0.01..10.0),
            };
            let params = WelfareParams::new(p, eta(rng))?;
            let m = marginals(&s, params);
            let slack = 1e-12 * m.iter().fold(1.0f64, |a, x| a.max(x.abs()));
            let ok = m.windows(2).all(|w| if p < 0.0 { w[1] >= w[0] - slack } else { w[1] <= w[0] + slack });
            t.check(ok, || format!("{label} trial {trial}: marginals {m:?} (p = {p})"));
        }
    }
    // log NSW at eta = 1 is monotone and submodular over random multi-attribute sets.
    for trial in 0..trials {
        let n = rng.gen_range(3..=12);
        let c = rng.gen_range(1..=5);
        let inst = Instance::random_multi(rng, n, c, 3, 3);
        let corpus = inst.corpus();
        let scorer = corpus.scorer(&inst.query)?;
        let f =
            |ids: &[usize]| -> Result<f64> { log_nsw(&crate::welfare::utilities(&scorer, ids, corpus.attrs)?, 1.0) };
        let w = rng.gen_range(0..n);
        let others: Vec<usize> = (0..n).filter(|&i| i != w).collect();
        let big: Vec<usize> = others.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let small: Vec<usize> = big.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let with = |s: &[usize]| s.iter().copied().chain([w]).collect::<Vec<_>>();
        let gain_small = f(&with(&small))? - f(&small)?;
        let gain_big = f(&with(&big))? - f(&big)?;
        t.check(gain_small >= gain_big - 1e-12 && gain_big >= -1e-12, || {
            format!("submodularity trial {trial}: gains {gain_small} (S) vs {gain_big} (T)")
        });
    }
    t.check(f_empty_is_zero()?, || "log NSW of the empty set at eta = 1 is not 0".into());
    // x ln(1 + a/x) <= a ln 2 on (0, a], equality at x = a.
    for trial in 0..trials {
        let a = 10f64.powf(rng.gen_range(-6.0..6.0));
        let x = a * rng.gen_range(1e-9..=1.0);
        let lhs = log_ineq_lhs(a, x);
        t.check(lhs <= a * std::f64::consts::LN_2 + 1e-12, || {
            format!("log inequality trial {trial}: a = {a}, x = {x}")
        });
    }
    for a in [1e-3, 1.0, 7.3, 1e3] {
        t.check(log_ineq_check(a, 10_000), || format!("log inequality grid failed at a = {a}"));
    }
    // Counts-matched optimality: no subset with the same per-attribute counts does better.
    for trial in 0..(trials / 100).max(1) {
        let (n, c) = (rng.gen_range(4..=10), rng.gen_range(1..=4));
        let inst = Instance::random_single(rng, n, c, 3);
        let corpus = inst.corpus();
        let k = rng.gen_range(1..=4usize.min(corpus.len()));
        let params = WelfareParams::nash(eta(rng))?;
        let got = p_mean_ann(&ExactScan::new(corpus), &inst.query, k, params)?;
        let counts = got.counts(corpus.attrs);
        let scorer = corpus.scorer(&inst.query)?;
        let n = corpus.len();
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << n) {
            let ids: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if ids.len() != got.len() {
                continue;
            }
            let mut c = vec![0; corpus.num_attributes()];
            ids.iter().for_each(|&i| c[corpus.attrs.label(i)] += 1);
            if c == counts {
                best = best.max(welfare(&crate::welfare::utilities(&scorer, &ids, corpus.attrs)?, params)?);
            }
        }
        t.check(got.objective >= best * (1.0 - REL_TOL), || {
            format!("size-match trial {trial}: {} < {best}", got.objective)
        });
    }
    Ok(t.finish())
}

fn f_empty_is_zero() -> Result<bool> {
    Ok(log_nsw(&[0.0; 4], 1.0)? == 0.0)
}

fn scalar_corpus(sims: &[f32]) -> VectorSet {
    let rows: Vec<[f32; 1]> = sims.iter().map(|&s| [s]).collect();
    VectorSet::from_rows(&rows).expect("finite scalars")
}

/// Hand-built instances with known answers.
pub fn examples() -> Result<SuiteReport> {
    let mut t = Tally::new("examples");
    let q = [1.0f32];

    // Complete diversity: equal similarities, one attribute per vector.
    for (c, per, k) in [(5, 3, 5), (8, 2, 4), (6, 4, 3)] {
        let data = scalar_corpus(&vec![1.0; c * per]);
        let labels: Vec<usize> = (0..c * per).map(|i| i % c).collect();
        let attrs = AttributeTable::single(c, &labels)?;
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct)?;
        for eta in ETAS {
            let s = nash_ann(&ExactScan::new(corpus), &q, k, eta)?;
            t.check(s.len() == k && s.counts(&attrs).iter().all(|&x| x <= 1), || {
                format!("complete diversity: counts {:?} (c = {c}, k = {k}, eta = {eta})", s.counts(&attrs))
            });
        }
    }
    // Complete relevance: only one attribute has nonzero similarity.
    for (c, star, k) in [(4, 2, 3), (3, 0, 5), (6, 5, 2)] {
        let per = k + 2;
        let labels: Vec<usize> = (0..c * per).map(|i| i % c).collect();
        let sims: Vec<f32> = labels.iter().map(|&l| if l == star { 1.0 } else { 0.0 }).collect();
        let data = scalar_corpus(&sims);
        let attrs = AttributeTable::single(c, &labels)?;
        let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct)?;
        for eta in ETAS {
            let s = nash_ann(&ExactScan::new(corpus), &q, k, eta)?;
            t.check(s.ids.iter().all(|&i| labels[i] == star) && s.len() == k, || {
                format!("complete relevance: picked {:?} (star = {star}, eta = {eta})", s.ids)
            });
        }
    }
    // Div-ANN caps.
    let data = scalar_corpus(&[9.0, 8.0, 7.0, 6.0, 5.0, 4.0]);
    let attrs = AttributeTable::single(3, &[0, 0, 1, 1, 2, 2])?;
    let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct)?;
    let oracle = ExactScan::new(corpus);
    let one = div_ann(&oracle, &q, 4, 1, WelfareParams::default())?;
    t.check(one.ids == [0, 2, 4] && one.truncated, || format!("div k'=1: {:?}", one.ids));
    let two = div_ann(&oracle, &q, 4, 2, WelfareParams::default())?;
    t.check(two.ids == [0, 1, 2, 3] && !two.truncated, || format!("div k'=2: {:?}", two.ids));

    // Relevance can be near perfect with zero recall.
    let k = 10;
    let mut sims = vec![1.0f32; k];
    sims.extend(std::iter::repeat_n(0.99f32, k));
    let data = scalar_corpus(&sims);
    let labels: Vec<usize> = (0..2 * k).map(|i| if i < k { 0 } else { i - k + 1 }).collect();
    let attrs = AttributeTable::single(k + 1, &labels)?;
    let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct)?;
    let diverse: Vec<usize> = (k..2 * k).collect();
    let ratio = approx_ratio(&corpus, &q, &diverse, k)?;
    let rec = recall(&diverse, &(0..k).collect::<Vec<_>>())?;
    t.check(rel_close(ratio, 0.99, 1e-6) && rec == 0.0, || format!("ratio {ratio}, recall {rec}"));

    // Welfare of fixed utilities.
    let cases =
        [(vec![1.0, 1.0], 0.0, 1.0, 2.0), (vec![1.0, 3.0], 1.0, 1.0, 3.0), (vec![1.0, 3.0], -1.0, 1.0, 8.0 / 3.0)];
    for (u, p, eta, want) in cases {
        let got = welfare(&u, WelfareParams::new(p, eta)?)?;
        t.check(rel_close(got, want, 1e-12), || format!("welfare {u:?} p = {p}: {got} vs {want}"));
    }

    // Reduction examples.
    let red = [
        (4, 2, vec![vec![0, 1], vec![2, 3]], 2, true),
        (4, 2, vec![vec![0, 1], vec![1, 2], vec![2, 3]], 2, true),
        (3, 2, vec![vec![0, 1], vec![1, 2]], 2, false),
    ];
    for (n, tau, sets, k, packs) in red {
        let inst = ErspInstance::new(n, tau, sets, k)?;
        let r = ersp_to_nanns(&inst);
        let opt = brute_force_opt(&r.corpus(), &r.query, r.k, r.params)?.value;
        let ok = if packs { opt >= r.threshold - 1e-12 } else { opt < r.threshold - 1e-12 };
        t.check(ok && inst.has_packing() == packs, || format!("ERSP {inst:?}: max {opt} vs W {}", r.threshold));
    }
    Ok(t.finish())
}

pub fn ersp<R: Rng>(rng: &mut R, trials: usize) -> Result<SuiteReport> {
    let mut t = Tally::new("ersp");
    for trial in 0..trials {
        let inst = ErspInstance::random(rng, 12, 3);
        let r = ersp_to_nanns(&inst);
        let opt = brute_force_opt(&r.corpus(), &r.query, r.k, r.params)?.value;
        let packs = inst.has_packing();
        let reaches = opt >= r.threshold - 1e-12;
        t.check(packs == reaches, || {
            format!("trial {trial}: packing {packs} but max log NSW {opt} vs W {} ({inst:?})", r.threshold)
        });
    }
    Ok(t.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_at_small_sizes() {
        let cfg = VerifyConfig { trials: Some(20), seed: 3, ..Default::default() };
        for r in run(&cfg).unwrap() {
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn tally_reports_failures() {
        let mut t = Tally::new("x");
        for i in 0..10 {
            t.check(i % 2 == 0, || format!("odd {i}"));
        }
        let r = t.finish();
        assert_eq!((r.checks, r.violations, r.failures.len()), (10, 5, 5));
        assert!(!r.passed());
        assert!(r.to_string().starts_with("FAIL"));
    }
}
