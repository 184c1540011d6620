//! Synthetic vectors, skewed random attributes, and the 4:1 base/query split.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::attributes::AttributeTable;
use crate::error::{Error, Result};
use crate::vectors::VectorSet;

pub const PROB_ATTRS_C: usize = 20;
const POPULAR: usize = 3;
const POPULAR_MASS: f64 = 0.9;

/// Single-attribute table over 20 attributes: with probability 0.9 a vector's
/// attribute is uniform over {0, 1, 2}, otherwise uniform over {3, ..., 19}.
pub fn prob_attrs(n: usize, seed: u64) -> Result<AttributeTable> {
    if n == 0 {
        return Err(Error::Empty("prob_attrs needs n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> =
        (0..n)
            .map(|_| {
                if rng.gen_bool(POPULAR_MASS) {
                    rng.gen_range(0..POPULAR)
                } else {
                    rng.gen_range(POPULAR..PROB_ATTRS_C)
                }
            })
            .collect();
    AttributeTable::single(PROB_ATTRS_C, &labels)
}

/// Shuffles ids with `seed` and returns `(base, queries)` with `⌈4n/5⌉` base
/// vectors. The id lists are returned too so attributes can follow the split.
pub fn split_dataset(data: &VectorSet, seed: u64) -> Result<Split> {
    let n = data.len();
    if n < 5 {
        return Err(Error::param(format!("cannot split {n} vectors 4:1 (need at least 5)")));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_base = (4 * n).div_ceil(5);
    let query_ids = ids.split_off(n_base);
    Ok(Split { base: data.select(&ids)?, queries: data.select(&query_ids)?, base_ids: ids, query_ids })
}

#[derive(Debug, Clone)]
pub struct Split {
    pub base: VectorSet,
    pub queries: VectorSet,
    pub base_ids: Vec<usize>,
    pub query_ids: Vec<usize>,
}

/// `n` points from an isotropic Gaussian mixture: `centers` means drawn from
/// N(0, spread²) per coordinate, unit noise around each.
pub fn gaussian_mixture(n: usize, d: usize, centers: usize, spread: f32, seed: u64) -> Result<VectorSet> {
    if n == 0 || d == 0 || centers == 0 {
        return Err(Error::param("gaussian_mixture needs n, d, centers >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0f32, 1.0).expect("valid normal");
    let means: Vec<f32> = (0..centers * d).map(|_| spread * unit.sample(&mut rng)).collect();
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let m = rng.gen_range(0..centers);
        data.extend(means[m * d..(m + 1) * d].iter().map(|&mu| mu + unit.sample(&mut rng)));
    }
    VectorSet::new(data, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn prob_attrs_mass_and_determinism() {
        let t = prob_attrs(100_000, 11).unwrap();
        let popular = (0..100_000).filter(|&i| t.label(i) < 3).count() as f64 / 1e5;
        assert!((popular - 0.9).abs() <= 0.01, "{popular}");
        assert_eq!(t.num_attributes(), 20);
        assert!((3..20).all(|a| !t.members(a).is_empty()));
        assert_eq!(prob_attrs(500, 3).unwrap(), prob_attrs(500, 3).unwrap());
        let one = prob_attrs(1, 0).unwrap();
        assert!(one.label(0) < 20);
        assert!(prob_attrs(0, 0).is_err());
    }

    #[test]
    fn split_sizes_and_disjointness() {
        let data = gaussian_mixture(10, 3, 2, 5.0, 1).unwrap();
        let s = split_dataset(&data, 4).unwrap();
        assert_eq!((s.base.len(), s.queries.len()), (8, 2));
        let all: HashSet<usize> = s.base_ids.iter().chain(&s.query_ids).copied().collect();
        assert_eq!(all.len(), 10);
        assert_eq!(s.base.row(0), data.row(s.base_ids[0]));
        assert_eq!(split_dataset(&data, 4).unwrap().base_ids, s.base_ids);
        assert_eq!(split_dataset(&gaussian_mixture(7, 2, 1, 1.0, 0).unwrap(), 0).unwrap().base.len(), 6);

        let big = gaussian_mixture(100, 2, 1, 1.0, 0).unwrap();
        let (a, b) = (split_dataset(&big, 1).unwrap(), split_dataset(&big, 2).unwrap());
        assert_ne!(a.query_ids, b.query_ids);
        for s in [a, b] {
            let q: HashSet<_> = s.query_ids.iter().collect();
            assert!(s.base_ids.iter().all(|i| !q.contains(i)));
            assert_eq!(s.base_ids.len() + s.query_ids.len(), 100);
        }
        assert!(split_dataset(&gaussian_mixture(4, 2, 1, 1.0, 0).unwrap(), 0).is_err());
    }

    #[test]
    fn mixture_is_seeded() {
        let a = gaussian_mixture(50, 4, 3, 2.0, 8).unwrap();
        assert_eq!(a.as_slice(), gaussian_mixture(50, 4, 3, 2.0, 8).unwrap().as_slice());
        assert_ne!(a.as_slice(), gaussian_mixture(50, 4, 3, 2.0, 9).unwrap().as_slice());
    }
}
