//! FetchUnion: one global top-L fetch, then welfare greedy inside the pool.
//! Small pools are cheap but may not contain every attribute.
//!
//! cargo run --release --example fetch_union

use std::time::Instant;

use nash_nns::baselines::fetch_union;
use nash_nns::data::{DatasetBundle, SyntheticSpec};
use nash_nns::metrics::{LogBase, MetricsReport};
use nash_nns::single::p_mean_ann;
use nash_nns::{ExactScan, WelfareParams};

fn main() -> nash_nns::Result<()> {
    let bundle = DatasetBundle::synthetic(&SyntheticSpec { n_base: 20_000, n_queries: 20, ..Default::default() })?;
    let corpus = bundle.corpus();
    let params = WelfareParams::new(0.5, bundle.preset.eta)?;
    let k = 10;

    let t = Instant::now();
    let mut ratio = 0.0;
    for q in bundle.queries.rows() {
        let s = p_mean_ann(&ExactScan::new(corpus), q, k, params)?;
        ratio += MetricsReport::compute(&corpus, q, &s.ids, k, LogBase::Natural)?.approx_ratio;
    }
    println!("p-mean exact      ratio {:.4}  {:?}", ratio / 20.0, t.elapsed());

    for l in [10, 50, 200, 1_000, 20_000] {
        let t = Instant::now();
        let (mut ratio, mut entropy, mut coverage) = (0.0, 0.0, 0.0);
        for q in bundle.queries.rows() {
            let out = fetch_union(&corpus, q, k, l, params)?;
            let m = MetricsReport::compute(&corpus, q, &out.selection.ids, k, LogBase::Natural)?;
            ratio += m.approx_ratio;
            entropy += m.entropy;
            coverage += out.pool_distinct_attributes as f64;
        }
        println!(
            "fetch-union L={l:<6} ratio {:.4}  entropy {:.3}  attrs in pool {:.1}  {:?}",
            ratio / 20.0,
            entropy / 20.0,
            coverage / 20.0,
            t.elapsed()
        );
    }
    Ok(())
}
