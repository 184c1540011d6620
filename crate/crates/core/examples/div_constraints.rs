//! Hard per-attribute caps versus the soft balancing of Nash welfare.
//!
//! cargo run --example div_constraints

use nash_nns::baselines::div_ann;
use nash_nns::single::nash_ann;
use nash_nns::{AttributeTable, Corpus, ExactScan, Similarity, VectorSet, WelfareParams};

fn main() -> nash_nns::Result<()> {
    // one-dimensional vectors so that dot-product similarity is the value itself
    let sims = [9.0f32, 8.5, 8.0, 7.5, 3.0, 2.5, 1.0];
    let labels = [0, 0, 0, 0, 1, 1, 2];
    let rows: Vec<[f32; 1]> = sims.iter().map(|&s| [s]).collect();
    let data = VectorSet::from_rows(&rows)?;
    let attrs = AttributeTable::single(3, &labels)?;
    let oracle = ExactScan::new(Corpus::new(&data, &attrs, Similarity::DotProduct)?);
    let q = [1.0f32];

    for kprime in 1..=3 {
        let s = div_ann(&oracle, &q, 4, kprime, WelfareParams::default())?;
        println!("div k'={kprime}: {:?} counts {:?} truncated {}", s.ids, s.counts(&attrs), s.truncated);
    }
    for eta in [0.01, 1.0, 50.0] {
        let s = nash_ann(&oracle, &q, 4, eta)?;
        println!("nash eta={eta:<5}: {:?} counts {:?}", s.ids, s.counts(&attrs));
    }
    Ok(())
}
