//! Query-batch runner behind `nash-nns run`: option resolution, parallel
//! execution with per-query timing, and CSV/JSON reporting.
//!
//! Latency covers the solver call only (oracle retrieval plus selection) and
//! excludes dataset loading and metric computation. QPS is the number of
//! queries over the wall time of the solve phase.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{div_ann, fetch_union, top_k, Scope};
use crate::data::{DatasetBundle, Preset};
use crate::error::{Error, Result};
use crate::metrics::{LogBase, MetricsReport, Summary};
use crate::multi::{multi_div_ann, multi_p_mean_ann, CandidatePool};
use crate::oracle::{AlphaDegraded, AlphaOracleConfig, ExactScan, NeighborOracle};
use crate::selection::{Corpus, Selection};
use crate::single::p_mean_ann;
use crate::welfare::WelfareParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Ann,
    Div,
    Nash,
    Pmean,
    MultiNash,
    MultiPmean,
    MultiDiv,
    FetchUnion,
}

impl Algo {
    pub const ALL: [Algo; 8] = [
        Algo::Ann,
        Algo::Div,
        Algo::Nash,
        Algo::Pmean,
        Algo::MultiNash,
        Algo::MultiPmean,
        Algo::MultiDiv,
        Algo::FetchUnion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Ann => "ann",
            Algo::Div => "div",
            Algo::Nash => "nash",
            Algo::Pmean => "pmean",
            Algo::MultiNash => "multi-nash",
            Algo::MultiPmean => "multi-pmean",
            Algo::MultiDiv => "multi-div",
            Algo::FetchUnion => "fetch-union",
        }
    }

    fn takes_p(self) -> bool {
        matches!(self, Algo::Pmean | Algo::MultiPmean | Algo::FetchUnion)
    }

    fn takes_eta(self) -> bool {
        !matches!(self, Algo::Ann | Algo::Div | Algo::MultiDiv)
    }

    fn takes_kprime(self) -> bool {
        matches!(self, Algo::Div | Algo::MultiDiv)
    }

    fn takes_pool(self) -> bool {
        matches!(self, Algo::FetchUnion | Algo::MultiNash | Algo::MultiPmean | Algo::MultiDiv)
    }

    fn takes_alpha(self) -> bool {
        matches!(self, Algo::Div | Algo::Nash | Algo::Pmean)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Parses `-10,-1,0.5` into a list of exponents.
/// Fetch-union pool size per requested neighbor when `--pool-L` is absent.
pub const DEFAULT_POOL_PER_K: usize = 200;

pub fn parse_p_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad p value `{x}`: {e}"))))
        .collect()
}

/// Every run setting, each optional so that command-line flags, a config
/// file and preset defaults can be layered.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub preset: Option<String>,
    pub base: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub attrs: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub summary_json: Option<PathBuf>,
    pub algo: Option<Algo>,
    pub k: Option<usize>,
    pub p: Option<Vec<f64>>,
    pub eta: Option<f64>,
    pub kprime: Option<usize>,
    pub pool_l: Option<usize>,
    pub alpha: Option<f64>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub max_queries: Option<usize>,
    pub log2: Option<bool>,
    pub timing: Option<bool>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| Error::Config(format!("bad value `{value}` for `{key}`: {e}")))
}

impl RunOptions {
    /// `key=value` lines; `#` starts a comment line. Keys use the long flag
    /// names, with `-` or `_`.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut o = RunOptions::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim().replace('_', "-").to_ascii_lowercase(), value.trim());
            match key.as_str() {
                "preset" => o.preset = Some(value.to_string()),
                "base" => o.base = Some(value.into()),
                "queries" => o.queries = Some(value.into()),
                "attrs" => o.attrs = Some(value.into()),
                "out" => o.out = Some(value.into()),
                "summary-json" => o.summary_json = Some(value.into()),
                "algo" => o.algo = Some(value.parse()?),
                "k" => o.k = Some(parse_value(&key, value)?),
                "p" => o.p = Some(parse_p_list(value)?),
                "eta" => o.eta = Some(parse_value(&key, value)?),
                "kprime" => o.kprime = Some(parse_value(&key, value)?),
                "pool-l" => o.pool_l = Some(parse_value(&key, value)?),
                "alpha" => o.alpha = Some(parse_value(&key, value)?),
                "threads" => o.threads = Some(parse_value(&key, value)?),
                "seed" => o.seed = Some(parse_value(&key, value)?),
                "max-queries" => o.max_queries = Some(parse_value(&key, value)?),
                "log2" => o.log2 = Some(parse_value(&key, value)?),
                "timing" => o.timing = Some(parse_value(&key, value)?),
                other => return Err(Error::Config(format!("config line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        Ok(o)
    }

    pub fn read_config(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_config(&text)
    }

    /// Fields set in `self` win over `fallback`.
    pub fn or(self, fallback: RunOptions) -> RunOptions {
        RunOptions {
            preset: self.preset.or(fallback.preset),
            base: self.base.or(fallback.base),
            queries: self.queries.or(fallback.queries),
            attrs: self.attrs.or(fallback.attrs),
            out: self.out.or(fallback.out),
            summary_json: self.summary_json.or(fallback.summary_json),
            algo: self.algo.or(fallback.algo),
            k: self.k.or(fallback.k),
            p: self.p.or(fallback.p),
            eta: self.eta.or(fallback.eta),
            kprime: self.kprime.or(fallback.kprime),
            pool_l: self.pool_l.or(fallback.pool_l),
            alpha: self.alpha.or(fallback.alpha),
            threads: self.threads.or(fallback.threads),
            seed: self.seed.or(fallback.seed),
            max_queries: self.max_queries.or(fallback.max_queries),
            log2: self.log2.or(fallback.log2),
            timing: self.timing.or(fallback.timing),
        }
    }

    /// Checks flag compatibility and fills the remaining gaps from the
    /// preset.
    pub fn resolve(&self, preset: &Preset) -> Result<RunConfig> {
        let algo = self.algo.ok_or_else(|| Error::Config("--algo is required".into()))?;
        let reject = |set: bool, flag: &str| -> Result<()> {
            if set {
                Err(Error::Config(format!("{flag} does not apply to --algo {algo}")))
            } else {
                Ok(())
            }
        };
        reject(self.p.is_some() && !algo.takes_p(), "--p")?;
        reject(self.eta.is_some() && !algo.takes_eta(), "--eta")?;
        reject(self.kprime.is_some() && !algo.takes_kprime(), "--kprime")?;
        reject(self.pool_l.is_some() && !algo.takes_pool(), "--pool-L")?;
        reject(self.alpha.is_some() && !algo.takes_alpha(), "--alpha")?;

        let k = self.k.unwrap_or(10);
        if k == 0 {
            return Err(Error::Config("--k must be at least 1".into()));
        }
        let p = match (algo, &self.p) {
            (Algo::Pmean | Algo::MultiPmean, None) => return Err(Error::Config(format!("--algo {algo} requires --p"))),
            (_, Some(ps)) if ps.is_empty() => return Err(Error::Config("--p is empty".into())),
            (_, Some(ps)) => ps.clone(),
            (Algo::FetchUnion | Algo::Nash | Algo::MultiNash, None) => vec![0.0],
            _ => vec![],
        };
        let eta = self.eta.unwrap_or(preset.eta);
        for &pv in &p {
            WelfareParams::new(pv, eta).map_err(|e| Error::Config(e.to_string()))?;
        }
        if algo.takes_kprime() && self.kprime.is_none() {
            return Err(Error::Config(format!("--algo {algo} requires --kprime")));
        }
        let pool_l = match algo {
            Algo::FetchUnion => Some(self.pool_l.unwrap_or(DEFAULT_POOL_PER_K * k)),
            _ => self.pool_l,
        };
        if self.kprime == Some(0) {
            return Err(Error::Config("--kprime must be at least 1".into()));
        }
        if let Some(l) = pool_l {
            if l < k {
                return Err(Error::Config(format!("--pool-L {l} is smaller than --k {k}")));
            }
        }
        let seed = self.seed.unwrap_or(0);
        let alpha = self
            .alpha
            .map(|a| AlphaOracleConfig::new(a, seed).map_err(|e| Error::Config(e.to_string())))
            .transpose()?;
        let threads = self.threads.unwrap_or(1);
        if threads == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        Ok(RunConfig {
            algo,
            k,
            p,
            eta,
            kprime: self.kprime,
            pool_l,
            alpha,
            threads,
            seed,
            max_queries: self.max_queries,
            log_base: if self.log2.unwrap_or(false) { LogBase::Two } else { LogBase::Natural },
            timing: self.timing.unwrap_or(true),
        })
    }
}

/// Fully resolved settings for one batch (or one batch per `p`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub algo: Algo,
    pub k: usize,
    /// Empty for algorithms without an exponent.
    pub p: Vec<f64>,
    pub eta: f64,
    pub kprime: Option<usize>,
    pub pool_l: Option<usize>,
    #[serde(skip)]
    pub alpha: Option<AlphaOracleConfig>,
    pub threads: usize,
    pub seed: u64,
    pub max_queries: Option<usize>,
    #[serde(skip)]
    pub log_base: LogBase,
    pub timing: bool,
}

impl RunConfig {
    pub fn new(algo: Algo, k: usize) -> Self {
        Self {
            algo,
            k,
            p: if algo.takes_p() { vec![0.0] } else { vec![] },
            eta: crate::welfare::DEFAULT_ETA,
            kprime: None,
            pool_l: None,
            alpha: None,
            threads: 1,
            seed: 0,
            max_queries: None,
            log_base: LogBase::Natural,
            timing: true,
        }
    }
}

/// One query's outcome.
#[derive(Debug, Clone, Serialize)]
pub struct QueryRecord {
    pub query_id: usize,
    pub ids: Vec<usize>,
    pub truncated: bool,
    pub latency_us: f64,
    pub metrics: MetricsReport,
}

/// All queries of one batch at one `p`.
#[derive(Debug, Clone, Serialize)]
pub struct BatchResult {
    pub algo: Algo,
    pub k: usize,
    pub p: Option<f64>,
    pub eta: Option<f64>,
    pub kprime: Option<usize>,
    pub pool_l: Option<usize>,
    pub records: Vec<QueryRecord>,
    pub wall_seconds: f64,
    pub qps: f64,
    pub p999_latency_us: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub algo: Algo,
    pub k: usize,
    pub p: Option<f64>,
    pub queries: usize,
    pub approx_ratio: Summary,
    pub recall: Summary,
    pub entropy: Summary,
    pub inverse_simpson: Summary,
    pub distinct_count: Summary,
    pub truncated: usize,
    pub latency_us: Summary,
    pub qps: f64,
    pub p999_latency_us: f64,
}

impl BatchResult {
    fn column(&self, f: impl Fn(&QueryRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    pub fn summary(&self) -> BatchSummary {
        BatchSummary {
            algo: self.algo,
            k: self.k,
            p: self.p,
            queries: self.records.len(),
            approx_ratio: Summary::of(&self.column(|r| r.metrics.approx_ratio)),
            recall: Summary::of(&self.column(|r| r.metrics.recall)),
            entropy: Summary::of(&self.column(|r| r.metrics.entropy)),
            inverse_simpson: Summary::of(&self.column(|r| r.metrics.inverse_simpson)),
            distinct_count: Summary::of(&self.column(|r| r.metrics.distinct_count as f64)),
            truncated: self.records.iter().filter(|r| r.truncated).count(),
            latency_us: Summary::of(&self.column(|r| r.latency_us)),
            qps: self.qps,
            p999_latency_us: self.p999_latency_us,
        }
    }
}

/// Nearest-rank percentile of unsorted samples.
pub fn percentile(samples: &[f64], q: f64) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let rank = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len());
    s[rank - 1]
}

fn solve(
    corpus: &Corpus<'_>,
    oracle: &dyn NeighborOracle,
    query: &[f32],
    cfg: &RunConfig,
    p: Option<f64>,
) -> Result<Selection> {
    let params = WelfareParams::new(p.unwrap_or(0.0), cfg.eta)?;
    let pool = || match cfg.pool_l {
        Some(l) => CandidatePool::fetch(corpus, query, l),
        None => CandidatePool::all(corpus, query),
    };
    match cfg.algo {
        Algo::Ann => top_k(corpus, query, cfg.k, params, Scope::Full),
        Algo::Div => div_ann(oracle, query, cfg.k, cfg.kprime.expect("resolved"), params),
        Algo::Nash | Algo::Pmean => p_mean_ann(oracle, query, cfg.k, params),
        Algo::MultiNash | Algo::MultiPmean => multi_p_mean_ann(corpus, &pool()?, cfg.k, params),
        Algo::MultiDiv => multi_div_ann(corpus, &pool()?, cfg.k, cfg.kprime.expect("resolved"), params),
        Algo::FetchUnion => {
            fetch_union(corpus, query, cfg.k, cfg.pool_l.expect("resolved"), params).map(|o| o.selection)
        }
    }
}

/// Runs every query (capped by `max_queries`) once per `p`, on a pool of
/// `cfg.threads` workers. Records come back in query order.
pub fn run_batch(bundle: &DatasetBundle, cfg: &RunConfig) -> Result<Vec<BatchResult>> {
    let corpus = bundle.corpus();
    let single = !matches!(cfg.algo, Algo::MultiNash | Algo::MultiPmean | Algo::MultiDiv);
    if single {
        corpus.attrs.require_single_attribute()?;
    }
    let exact = ExactScan::new(corpus);
    let degraded = cfg.alpha.map(|a| AlphaDegraded::new(corpus, a));
    let oracle: &dyn NeighborOracle = match &degraded {
        Some(d) => d,
        None => &exact,
    };
    let nq = cfg.max_queries.map_or(bundle.queries.len(), |m| m.min(bundle.queries.len()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let ps: Vec<Option<f64>> = if cfg.p.is_empty() { vec![None] } else { cfg.p.iter().copied().map(Some).collect() };
    let mut out = Vec::with_capacity(ps.len());
    for p in ps {
        let start = Instant::now();
        let solved: Vec<(Selection, f64)> = pool.install(|| {
            (0..nq)
                .into_par_iter()
                .map(|qi| {
                    let t = Instant::now();
                    let sel = solve(&corpus, oracle, bundle.queries.row(qi), cfg, p)?;
                    Ok((sel, t.elapsed().as_secs_f64() * 1e6))
                })
                .collect::<Result<_>>()
        })?;
        let wall = start.elapsed().as_secs_f64();
        let records: Vec<QueryRecord> = pool.install(|| {
            solved
                .into_par_iter()
                .enumerate()
                .map(|(qi, (sel, latency_us))| {
                    let metrics =
                        MetricsReport::compute(&corpus, bundle.queries.row(qi), &sel.ids, cfg.k, cfg.log_base)?;
                    Ok(QueryRecord { query_id: qi, truncated: sel.truncated, ids: sel.ids, latency_us, metrics })
                })
                .collect::<Result<_>>()
        })?;
        let latencies: Vec<f64> = records.iter().map(|r| r.latency_us).collect();
        out.push(BatchResult {
            algo: cfg.algo,
            k: cfg.k,
            p,
            eta: cfg.algo.takes_eta().then_some(cfg.eta),
            kprime: cfg.kprime,
            pool_l: cfg.pool_l,
            qps: if wall > 0.0 { nq as f64 / wall } else { f64::INFINITY },
            p999_latency_us: percentile(&latencies, 0.999),
            wall_seconds: wall,
            records,
        });
    }
    Ok(out)
}

const BASE_HEADER: [&str; 11] = [
    "query_id",
    "algo",
    "k",
    "p",
    "eta",
    "kprime",
    "approx_ratio",
    "recall",
    "entropy",
    "inverse_simpson",
    "distinct_count",
];
const TAIL_HEADER: [&str; 4] = ["truncated", "latency_us", "qps", "p999_latency_us"];

/// The CSV header for a table with `classes` attribute classes (per-class
/// columns appear only when there are at least two).
pub fn csv_header(classes: usize) -> Vec<String> {
    let mut h: Vec<String> = BASE_HEADER.iter().map(|s| s.to_string()).collect();
    if classes > 1 {
        for c in 0..classes {
            h.push(format!("class{c}_entropy"));
            h.push(format!("class{c}_inverse_simpson"));
        }
    }
    h.extend(TAIL_HEADER.iter().map(|s| s.to_string()));
    h
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one row per query followed by `mean`, `stddev` and `stderr` rows
/// for each batch. Timing columns are left empty when `timing` is off, which
/// makes the output reproducible byte for byte.
pub fn write_csv<W: Write>(w: W, batches: &[BatchResult], classes: usize, timing: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(csv_header(classes))?;
    let per_class = classes > 1;
    for b in batches {
        let lead = |id: String| vec![id, b.algo.to_string(), b.k.to_string(), opt(b.p), opt(b.eta), opt(b.kprime)];
        for r in &b.records {
            let m = &r.metrics;
            let mut row = lead(r.query_id.to_string());
            row.extend([
                m.approx_ratio.to_string(),
                m.recall.to_string(),
                m.entropy.to_string(),
                m.inverse_simpson.to_string(),
                m.distinct_count.to_string(),
            ]);
            if per_class {
                for c in m.per_class.as_deref().unwrap_or(&[]) {
                    row.push(c.entropy.to_string());
                    row.push(c.inverse_simpson.to_string());
                }
            }
            row.push(r.truncated.to_string());
            row.push(if timing { r.latency_us.to_string() } else { String::new() });
            row.extend([String::new(), String::new()]);
            out.write_record(&row)?;
        }
        let s = b.summary();
        let class_cols: Vec<(Summary, Summary)> = if per_class {
            (0..classes)
                .map(|c| {
                    let pick = |f: fn(&crate::metrics::ClassMetrics) -> f64| {
                        Summary::of(&b.column(|r| r.metrics.per_class.as_ref().map_or(f64::NAN, |v| f(&v[c]))))
                    };
                    (pick(|m| m.entropy), pick(|m| m.inverse_simpson))
                })
                .collect()
        } else {
            vec![]
        };
        type Stat = fn(&Summary) -> f64;
        let stats: [(&str, Stat); 3] = [("mean", |s| s.mean), ("stddev", |s| s.stddev), ("stderr", |s| s.stderr)];
        for (label, f) in stats {
            let mut row = lead(label.to_string());
            for m in [&s.approx_ratio, &s.recall, &s.entropy, &s.inverse_simpson, &s.distinct_count] {
                row.push(f(m).to_string());
            }
            for (e, i) in &class_cols {
                row.push(f(e).to_string());
                row.push(f(i).to_string());
            }
            row.push(if label == "mean" { s.truncated.to_string() } else { String::new() });
            if timing {
                row.push(f(&s.latency_us).to_string());
                if label == "mean" {
                    row.extend([s.qps.to_string(), s.p999_latency_us.to_string()]);
                } else {
                    row.extend([String::new(), String::new()]);
                }
            } else {
                row.extend([String::new(), String::new(), String::new()]);
            }
            out.write_record(&row)?;
        }
    }
    out.flush().map_err(|e| Error::io("<csv output>", e))
}

/// Batch summaries as pretty JSON, keyed by algorithm and `p`.
pub fn summaries_json(cfg: &RunConfig, batches: &[BatchResult]) -> Result<String> {
    #[derive(Serialize)]
    struct Report<'a> {
        config: &'a RunConfig,
        batches: Vec<BatchSummary>,
    }
    let report = Report { config: cfg, batches: batches.iter().map(BatchResult::summary).collect() };
    serde_json::to_string_pretty(&report).map_err(|e| Error::Config(format!("json: {e}")))
}

/// Collects a `p -> mean` table for a sweep; handy for monotonicity checks.
pub fn sweep_means(batches: &[BatchResult], f: impl Fn(&BatchSummary) -> f64) -> BTreeMap<String, f64> {
    batches.iter().map(|b| (opt(b.p), f(&b.summary()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SyntheticSpec;

    fn bundle() -> DatasetBundle {
        DatasetBundle::synthetic(&SyntheticSpec {
            n_base: 600,
            n_queries: 12,
            dim: 8,
            centers: 5,
            ..Default::default()
        })
        .unwrap()
    }

    fn opts(algo: Algo) -> RunOptions {
        RunOptions { algo: Some(algo), k: Some(5), ..Default::default() }
    }

    #[test]
    fn config_file_and_precedence() {
        let text = "# sweep\nalgo = pmean\np=-1, 0.5\nk=7\nthreads=2\npool_L=50\nlog2=true\n";
        let file = RunOptions::parse_config(text).unwrap();
        assert_eq!(file.p, Some(vec![-1.0, 0.5]));
        assert_eq!(file.pool_l, Some(50));
        let flags = RunOptions { k: Some(3), ..Default::default() };
        let merged = flags.or(file);
        assert_eq!((merged.k, merged.threads), (Some(3), Some(2)));
        let preset = Preset::named("synthetic").unwrap();
        assert!(merged.resolve(&preset).is_err(), "pool-L does not apply to pmean");
        let cfg = RunOptions { pool_l: None, ..merged }.resolve(&preset).unwrap();
        assert_eq!((cfg.k, cfg.eta, cfg.log_base), (3, 0.01, LogBase::Two));
        assert!(RunOptions::parse_config("k 3").is_err());
        assert!(RunOptions::parse_config("colour=red").is_err());
        assert!(RunOptions::parse_config("algo=fastest").is_err());
    }

    #[test]
    fn incompatible_flags() {
        let preset = Preset::named("synthetic").unwrap();
        let bad = [
            RunOptions { kprime: Some(2), ..opts(Algo::Nash) },
            RunOptions { p: Some(vec![0.5]), ..opts(Algo::Ann) },
            RunOptions { eta: Some(1.0), ..opts(Algo::Div) },
            opts(Algo::Div),
            opts(Algo::Pmean),
            RunOptions { pool_l: Some(3), ..opts(Algo::FetchUnion) },
            RunOptions { p: Some(vec![2.0]), ..opts(Algo::Pmean) },
            RunOptions { alpha: Some(0.5), ..opts(Algo::Ann) },
            RunOptions { alpha: Some(1.5), ..opts(Algo::Nash) },
            RunOptions { k: Some(0), ..opts(Algo::Ann) },
            RunOptions::default(),
        ];
        for o in bad {
            assert!(matches!(o.resolve(&preset), Err(Error::Config(_))), "{o:?}");
        }
        assert!(opts(Algo::Ann).resolve(&preset).is_ok());
        assert!(RunOptions { pool_l: Some(40), ..opts(Algo::MultiNash) }.resolve(&preset).is_ok());
        assert_eq!(opts(Algo::FetchUnion).resolve(&preset).unwrap().pool_l, Some(1000));
    }

    #[test]
    fn ann_rows_are_exact_and_pmean_one_matches() {
        let b = bundle();
        let preset = b.preset.clone();
        let ann = run_batch(&b, &opts(Algo::Ann).resolve(&preset).unwrap()).unwrap();
        assert!(ann[0].records.iter().all(|r| (r.metrics.approx_ratio - 1.0).abs() < 1e-12));
        let pm = RunOptions { p: Some(vec![1.0]), ..opts(Algo::Pmean) }.resolve(&preset).unwrap();
        let pm = run_batch(&b, &pm).unwrap();
        for (a, p) in ann[0].records.iter().zip(&pm[0].records) {
            let (mut x, mut y) = (a.ids.clone(), p.ids.clone());
            x.sort_unstable();
            y.sort_unstable();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn csv_is_thread_independent_without_timing() {
        let b = bundle();
        let render = |threads| {
            let o = RunOptions {
                p: Some(vec![-1.0, 0.0, 1.0]),
                threads: Some(threads),
                timing: Some(false),
                ..opts(Algo::Pmean)
            };
            let cfg = o.resolve(&b.preset).unwrap();
            let mut buf = Vec::new();
            write_csv(&mut buf, &run_batch(&b, &cfg).unwrap(), 1, cfg.timing).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let one = render(1);
        assert_eq!(one, render(1));
        assert_eq!(one, render(4));
        let lines: Vec<&str> = one.lines().collect();
        assert_eq!(lines[0], csv_header(1).join(","));
        assert_eq!(lines.len(), 1 + 3 * (12 + 3));
        assert!(lines[13].starts_with("mean,pmean,5,-1,"));
    }

    #[test]
    fn multi_class_columns() {
        let b = bundle();
        let attrs = crate::data::cluster_attrs(&b.base, 3, 1, Some(2)).unwrap();
        let mb = DatasetBundle::new(b.base.clone(), b.queries.clone(), attrs, b.preset.clone()).unwrap();
        let cfg = RunOptions { pool_l: Some(100), ..opts(Algo::MultiNash) }.resolve(&mb.preset).unwrap();
        let res = run_batch(&mb, &cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &res, 2, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.contains("class1_inverse_simpson"));
        let width = header.split(',').count();
        assert!(text.lines().all(|l| l.split(',').count() == width));
        assert!(run_batch(&mb, &opts(Algo::Nash).resolve(&mb.preset).unwrap()).is_err());
        let json = summaries_json(&cfg, &res).unwrap();
        assert!(json.contains("\"qps\""));
    }

    #[test]
    fn percentiles() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(percentile(&xs, 0.999), 999.0);
        assert_eq!(percentile(&xs, 1.0), 1000.0);
        assert_eq!(percentile(&[5.0], 0.999), 5.0);
        assert!(percentile(&[], 0.5).is_nan());
    }
}
