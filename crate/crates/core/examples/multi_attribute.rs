//! Multi-attribute search: each vector carries one cluster id per slice of
//! its dimensions, and the greedy solvers balance all of them at once.
//!
//! cargo run --release --example multi_attribute

use nash_nns::data::{cluster_attrs, gaussian_mixture};
use nash_nns::metrics::{LogBase, MetricsReport};
use nash_nns::multi::{multi_div_ann, multi_nash_ann, multi_p_mean_ann, pool_greedy, CandidatePool};
use nash_nns::{Corpus, Similarity, WelfareParams};

fn main() -> nash_nns::Result<()> {
    let data = gaussian_mixture(4_000, 16, 12, 2.0, 3)?;
    // four classes (one per 4-dimensional slice) of five clusters each
    let attrs = cluster_attrs(&data, 5, 11, Some(4))?;
    let corpus = Corpus::new(&data, &attrs, Similarity::OnePlusCosine)?;
    let query = data.row(17).to_vec();
    let k = 8;

    let pool = CandidatePool::fetch(&corpus, &query, 400)?;
    println!(
        "pool of {} covers {} of {} attributes",
        pool.len(),
        pool.distinct_attributes(&corpus),
        attrs.num_attributes()
    );

    let (nash, stats) = pool_greedy(&corpus, &pool, k, WelfareParams::nash(1.0)?)?;
    println!("lazy greedy: {} rounds, {} gain evaluations", stats.rounds, stats.gain_evaluations);
    let runs = [
        ("multi-nash", multi_nash_ann(&corpus, &pool, k, 1.0)?),
        ("multi-pmean p=-2", multi_p_mean_ann(&corpus, &pool, k, WelfareParams::new(-2.0, 1.0)?)?),
        ("multi-div k'=2", multi_div_ann(&corpus, &pool, k, 2, WelfareParams::default())?),
    ];
    assert_eq!(nash.ids, runs[0].1.ids);
    for (name, sel) in runs {
        let m = MetricsReport::compute(&corpus, &query, &sel.ids, k, LogBase::Natural)?;
        let per_class: Vec<String> =
            m.per_class.unwrap_or_default().iter().map(|c| format!("{:.2}", c.entropy)).collect();
        println!("{name:>17}: ratio {:.3}  per-class entropy [{}]", m.approx_ratio, per_class.join(", "));
    }
    Ok(())
}
