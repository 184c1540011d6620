//! The set-packing reduction: a size-k selection reaches the threshold
//! log NSW exactly when the sets contain k pairwise-disjoint members.
//!
//! cargo run --release --example ersp_reduction

use nash_nns::reference::{brute_force_opt, ersp_to_nanns, ErspInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> nash_nns::Result<()> {
    let fixed = ErspInstance::new(6, 2, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![4, 5]], 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let instances = std::iter::once(fixed).chain((0..8).map(|_| ErspInstance::random(&mut rng, 10, 3)));
    for inst in instances {
        let r = ersp_to_nanns(&inst);
        let opt = brute_force_opt(&r.corpus(), &r.query, r.k, r.params)?;
        println!(
            "n={:<2} tau={} m={} k={}  packing {:<5}  max log NSW {:.6} vs W {:.6}  best sets {:?}",
            inst.n,
            inst.tau,
            inst.sets.len(),
            inst.k,
            inst.has_packing(),
            opt.value,
            r.threshold,
            opt.ids
        );
    }
    Ok(())
}
