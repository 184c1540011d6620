//! Running the exact solvers over a degraded neighbor oracle, and plugging
//! in an oracle of your own.
//!
//! cargo run --release --example approximate_oracle

use nash_nns::oracle::{exact_topk, NeighborOracle, RankedList};
use nash_nns::reference::{brute_force_opt, Instance};
use nash_nns::single::p_mean_ann;
use nash_nns::{AlphaDegraded, AlphaOracleConfig, Corpus, WelfareParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exact retrieval that counts how often it is asked.
struct Counting<'a> {
    corpus: Corpus<'a>,
    calls: std::sync::atomic::AtomicUsize,
}

impl NeighborOracle for Counting<'_> {
    fn corpus(&self) -> &Corpus<'_> {
        &self.corpus
    }

    fn topk(&self, query: &[f32], attribute: usize, k: usize) -> nash_nns::Result<RankedList> {
        self.calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        exact_topk(&self.corpus, query, attribute, k)
    }
}

fn main() -> nash_nns::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = Instance::random_single(&mut rng, 18, 4, 6);
    let corpus = inst.corpus();
    let k = 4;
    for p in [0.0, 0.5, -1.0] {
        let params = WelfareParams::new(p, 0.1)?;
        let opt = brute_force_opt(&corpus, &inst.query, k, params)?.welfare();
        for alpha in [1.0, 0.9, 0.5] {
            let oracle = AlphaDegraded::new(corpus, AlphaOracleConfig::new(alpha, 99)?);
            let got = p_mean_ann(&oracle, &inst.query, k, params)?.objective;
            println!("p={p:<4} alpha={alpha:<3} welfare/opt {:.4} (bound {alpha})", got / opt);
        }
    }
    let counting = Counting { corpus, calls: Default::default() };
    p_mean_ann(&counting, &inst.query, k, WelfareParams::default())?;
    println!("custom oracle answered {} per-attribute requests", counting.calls.into_inner());
    Ok(())
}
