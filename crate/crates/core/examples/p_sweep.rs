//! Sweeping the p-mean exponent trades relevance for diversity.
//!
//! cargo run --release --example p_sweep

use nash_nns::bench::{run_batch, Algo, RunConfig};
use nash_nns::data::{DatasetBundle, SyntheticSpec};

fn main() -> nash_nns::Result<()> {
    let spec = SyntheticSpec { n_base: 20_000, n_queries: 50, preset: "synthetic-psweep".into(), ..Default::default() };
    let bundle = DatasetBundle::synthetic(&spec)?;
    let cfg = RunConfig {
        p: vec![-10.0, -1.0, -0.5, 0.0, 0.5, 1.0],
        eta: bundle.preset.eta,
        threads: 4,
        ..RunConfig::new(Algo::Pmean, 10)
    };
    println!("{:>6} {:>10} {:>10} {:>10}", "p", "ratio", "entropy", "distinct");
    for batch in run_batch(&bundle, &cfg)? {
        let s = batch.summary();
        println!(
            "{:>6} {:>10.4} {:>10.4} {:>10.2}",
            s.p.unwrap_or(0.0),
            s.approx_ratio.mean,
            s.entropy.mean,
            s.distinct_count.mean
        );
    }
    Ok(())
}
