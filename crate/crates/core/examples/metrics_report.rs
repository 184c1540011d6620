//! Relevance and diversity metrics, including a case where the
//! approximation ratio is high while recall is zero.
//!
//! cargo run --example metrics_report

use nash_nns::metrics::{entropy, inverse_simpson, LogBase, MetricsReport, Summary};
use nash_nns::{AttributeTable, Corpus, Similarity, VectorSet};

fn main() -> nash_nns::Result<()> {
    let k = 10;
    // ten near-duplicates at similarity 1.0 in one attribute, ten diverse ones at 0.99
    let mut sims = vec![[1.0f32]; k];
    sims.extend(vec![[0.99f32]; k]);
    let labels: Vec<usize> = (0..2 * k).map(|i| if i < k { 0 } else { i - k + 1 }).collect();
    let data = VectorSet::from_rows(&sims)?;
    let attrs = AttributeTable::single(k + 1, &labels)?;
    let corpus = Corpus::new(&data, &attrs, Similarity::DotProduct)?;

    let crowded: Vec<usize> = (0..k).collect();
    let diverse: Vec<usize> = (k..2 * k).collect();
    let mut ratios = vec![];
    for (name, ids) in [("crowded", &crowded), ("diverse", &diverse)] {
        let m = MetricsReport::compute(&corpus, &[1.0], ids, k, LogBase::Natural)?;
        println!(
            "{name}: ratio {:.3} recall {:.2} entropy {:.3} ({:.3} bits) inverse Simpson {:.2} distinct {}",
            m.approx_ratio,
            m.recall,
            m.entropy,
            entropy(ids, &attrs, None, LogBase::Two)?,
            inverse_simpson(ids, &attrs, None)?,
            m.distinct_count
        );
        ratios.push(m.approx_ratio);
    }
    let s = Summary::of(&ratios);
    println!("ratio mean {:.4} stddev {:.4} stderr {:.4}", s.mean, s.stddev, s.stderr);
    Ok(())
}
