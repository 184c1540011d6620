//! Lloyd's k-means with k-means++ seeding, used to derive cluster attributes.
//!
//! The assignment step runs in parallel but every reduction (inertia, centroid
//! sums) is folded sequentially in point order, so results do not depend on
//! the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attributes::AttributeTable;
use crate::error::{Error, Result};
use crate::vectors::VectorSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub max_iter: usize,
    /// Stop once the relative inertia change drops below this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { max_iter: 50, tol: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct KMeans {
    pub c: usize,
    pub d: usize,
    /// Row-major `c × d`.
    pub centroids: Vec<f64>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

fn dist2(x: &[f32], center: &[f64]) -> f64 {
    x.iter().zip(center).map(|(&a, &b)| (a as f64 - b).powi(2)).sum()
}

fn nearest(x: &[f32], centroids: &[f64], d: usize) -> (usize, f64) {
    centroids.chunks_exact(d).enumerate().map(|(j, ctr)| (j, dist2(x, ctr))).fold((0, f64::INFINITY), |best, cur| {
        if cur.1 < best.1 {
            cur
        } else {
            best
        }
    })
}

fn seed_plus_plus(data: &VectorSet, c: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (n, d) = (data.len(), data.dim());
    let mut chosen = vec![false; n];
    let mut centroids = Vec::with_capacity(c * d);
    let first = rng.gen_range(0..n);
    chosen[first] = true;
    centroids.extend(data.row(first).iter().map(|&x| x as f64));
    let mut d2: Vec<f64> = (0..n).into_par_iter().map(|i| dist2(data.row(i), &centroids[..d])).collect();
    for _ in 1..c {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if r < w {
                        break;
                    }
                    r -= w;
                }
            }
            pick.expect("positive mass")
        } else {
            // all remaining points coincide with a center
            (0..n).find(|&i| !chosen[i]).expect("c <= n")
        };
        chosen[next] = true;
        let start = centroids.len();
        centroids.extend(data.row(next).iter().map(|&x| x as f64));
        let ctr = &centroids[start..];
        d2.par_iter_mut().enumerate().for_each(|(i, w)| *w = w.min(dist2(data.row(i), ctr)));
    }
    centroids
}

pub fn kmeans(data: &VectorSet, c: usize, seed: u64, cfg: KMeansConfig) -> Result<KMeans> {
    let (n, d) = (data.len(), data.dim());
    if c == 0 || c > n {
        return Err(Error::param(format!("cluster count {c} must be in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_plus_plus(data, c, &mut rng);
    let mut labels = vec![0usize; n];
    let mut prev = f64::INFINITY;
    let mut inertia = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let assigned: Vec<(usize, f64)> = (0..n).into_par_iter().map(|i| nearest(data.row(i), &centroids, d)).collect();
        inertia = assigned.iter().map(|a| a.1).sum();
        labels.iter_mut().zip(&assigned).for_each(|(l, a)| *l = a.0);

        let mut sums = vec![0.0f64; c * d];
        let mut counts = vec![0usize; c];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            sums[l * d..(l + 1) * d].iter_mut().zip(data.row(i)).for_each(|(s, &x)| *s += x as f64);
        }
        // an empty cluster takes over the point worst served by its centroid
        let mut dist: Vec<f64> = assigned.iter().map(|a| a.1).collect();
        for j in 0..c {
            if counts[j] > 0 {
                continue;
            }
            let far = (0..n).filter(|&i| counts[labels[i]] > 1).fold(None, |best: Option<usize>, i| match best {
                Some(b) if dist[b] >= dist[i] => Some(b),
                _ => Some(i),
            });
            let Some(i) = far else { break };
            let old = labels[i];
            counts[old] -= 1;
            sums[old * d..(old + 1) * d].iter_mut().zip(data.row(i)).for_each(|(s, &x)| *s -= x as f64);
            labels[i] = j;
            counts[j] = 1;
            sums[j * d..(j + 1) * d].iter_mut().zip(data.row(i)).for_each(|(s, &x)| *s = x as f64);
            dist[i] = 0.0;
        }
        for j in 0..c {
            if counts[j] > 0 {
                let inv = 1.0 / counts[j] as f64;
                centroids[j * d..(j + 1) * d]
                    .iter_mut()
                    .zip(&sums[j * d..(j + 1) * d])
                    .for_each(|(ctr, &s)| *ctr = s * inv);
            }
        }
        let converged = prev.is_finite() && (prev == 0.0 || (prev - inertia).abs() / prev < cfg.tol);
        prev = inertia;
        if converged {
            break;
        }
    }
    Ok(KMeans { c, d, centroids, labels, inertia, iterations })
}

fn chunk_seed(seed: u64, chunk: usize) -> u64 {
    seed ^ (chunk as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Cluster ids as attributes. With `chunks = Some(m)` the dimensions are cut
/// into `m` equal slices, each clustered on its own into `c` attributes, giving
/// a one-per-class table over `c·m` attributes.
pub fn cluster_attrs(data: &VectorSet, c: usize, seed: u64, chunks: Option<usize>) -> Result<AttributeTable> {
    if c < 2 {
        return Err(Error::param("cluster attributes need c >= 2"));
    }
    let n = data.len();
    if c > n {
        return Err(Error::param(format!("c = {c} exceeds the number of vectors {n}")));
    }
    let labels_of = |part: &VectorSet, s: u64| -> Result<Vec<usize>> {
        if c == n {
            return Ok((0..n).collect());
        }
        Ok(kmeans(part, c, s, KMeansConfig::default())?.labels)
    };
    match chunks {
        None => AttributeTable::single(c, &labels_of(data, seed)?),
        Some(m) => {
            let d = data.dim();
            if m == 0 || !d.is_multiple_of(m) {
                return Err(Error::param(format!("dimension {d} is not divisible into {m} chunks")));
            }
            let width = d / m;
            let mut atb = vec![Vec::with_capacity(m); n];
            for chunk in 0..m {
                let part = data.columns(chunk * width, width)?;
                for (row, l) in atb.iter_mut().zip(labels_of(&part, chunk_seed(seed, chunk))?) {
                    row.push(chunk * c + l);
                }
            }
            AttributeTable::new(c * m, atb)?.with_class_sizes(&vec![c; m])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(n_per: usize, d: usize, centers: &[f32], seed: u64) -> (VectorSet, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0f32, 1.0).unwrap();
        let mut data = Vec::new();
        let mut truth = Vec::new();
        for i in 0..n_per * centers.len() {
            let b = i % centers.len();
            truth.push(b);
            data.extend((0..d).map(|_| centers[b] + noise.sample(&mut rng)));
        }
        (VectorSet::new(data, d).unwrap(), truth)
    }

    /// Exact partition agreement (adjusted Rand index 1) up to relabeling.
    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        use std::collections::HashMap;
        let mut fwd = HashMap::new();
        let mut back = HashMap::new();
        a.iter().zip(b).all(|(x, y)| *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
    }

    #[test]
    fn separated_blobs_recovered() {
        let (data, truth) = blobs(200, 4, &[0.0, 10.0], 1);
        let t = cluster_attrs(&data, 2, 3, None).unwrap();
        let labels: Vec<usize> = (0..data.len()).map(|i| t.label(i)).collect();
        assert!(same_partition(&labels, &truth));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let (data, _) = blobs(300, 6, &[0.0, 2.0, 4.0, 6.0], 9);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| kmeans(&data, 5, 42, KMeansConfig::default()).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.inertia.to_bits(), b.inertia.to_bits());
        assert!(a.iterations <= 50);
    }

    #[test]
    fn shapes_and_edges() {
        let (data, _) = blobs(5, 8, &[0.0, 5.0], 2);
        let t = cluster_attrs(&data, 10, 0, None).unwrap();
        assert_eq!((0..10).map(|i| t.label(i)).collect::<Vec<_>>(), (0..10).collect::<Vec<_>>());
        let t = cluster_attrs(&data, 3, 0, Some(4)).unwrap();
        assert_eq!(t.num_attributes(), 12);
        assert_eq!(t.class_sizes(), Some(vec![3, 3, 3, 3]));
        assert!(t.is_one_per_class());
        assert!(cluster_attrs(&data, 3, 0, Some(3)).is_err());
        assert!(cluster_attrs(&data, 11, 0, None).is_err());
        assert!(cluster_attrs(&data, 1, 0, None).is_err());
    }

    #[test]
    fn duplicates_leave_no_empty_cluster() {
        let rows = vec![[1.0f32, 1.0]; 6].into_iter().chain([[5.0, 5.0], [5.0, 5.0]]).collect::<Vec<_>>();
        let data = VectorSet::from_rows(&rows).unwrap();
        let km = kmeans(&data, 4, 7, KMeansConfig::default()).unwrap();
        let mut seen = km.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 4);
    }
}
