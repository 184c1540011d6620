//! Nash-welfare search next to plain top-k on a small skewed dataset.
//!
//! cargo run --example nash_quickstart

use nash_nns::baselines::{top_k, Scope};
use nash_nns::data::{DatasetBundle, SyntheticSpec};
use nash_nns::metrics::{LogBase, MetricsReport};
use nash_nns::single::nash_ann;
use nash_nns::{ExactScan, WelfareParams};

fn main() -> nash_nns::Result<()> {
    let spec = SyntheticSpec { n_base: 5_000, n_queries: 3, ..Default::default() };
    let bundle = DatasetBundle::synthetic(&spec)?;
    let corpus = bundle.corpus();
    let oracle = ExactScan::new(corpus);
    let k = 10;
    let eta = bundle.preset.eta;

    for (qi, query) in bundle.queries.rows().enumerate() {
        let plain = top_k(&corpus, query, k, WelfareParams::nash(eta)?, Scope::Full)?;
        let nash = nash_ann(&oracle, query, k, eta)?;
        for (name, sel) in [("top-k", &plain), ("nash", &nash)] {
            let m = MetricsReport::compute(&corpus, query, &sel.ids, k, LogBase::Natural)?;
            println!(
                "query {qi} {name:>5}: attrs {:?}  ratio {:.3}  entropy {:.3}  log NSW {:.3}",
                sel.ids.iter().map(|&i| bundle.attrs.label(i)).collect::<Vec<_>>(),
                m.approx_ratio,
                m.entropy,
                sel.log_nsw()
            );
        }
    }
    Ok(())
}
