use std::collections::HashMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::UtteranceVector;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    /// Cluster id for each input vector, by input position.
    pub assignments: Vec<usize>,
    pub seed: u64,
    pub iterations: usize,
}

impl ClusterModel {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Lloyd's k-means.
///
/// Initial centroids are `k` distinct input vectors drawn without
/// replacement by a ChaCha rng seeded with `seed`. Assignment ties go to the
/// lowest cluster index. Iterates until assignments stop changing or
/// [`MAX_ITERATIONS`] is hit. A cluster left empty takes over the point
/// farthest from its current centroid (taken from a cluster with more than
/// one member).
pub fn cluster(vectors: &[UtteranceVector], k: usize, seed: u64) -> Result<ClusterModel> {
    if k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    let distinct = distinct_indices(vectors);
    if k > distinct.len() {
        return Err(Error::Config(format!(
            "k = {k} exceeds the {} distinct vectors available",
            distinct.len()
        )));
    }
    let points: Vec<&[f64]> = vectors.iter().map(|v| v.values()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> = index::sample(&mut rng, distinct.len(), k)
        .into_iter()
        .map(|i| points[distinct[i]].to_vec())
        .collect();

    let mut assignments: Vec<usize> = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut next = assign(&points, &centroids);
        repair_empty(&points, &mut centroids, &mut next);
        if next == assignments {
            break;
        }
        assignments = next;
        centroids = means(&points, &assignments, &centroids);
    }

    Ok(ClusterModel {
        k,
        centroids,
        assignments,
        seed,
        iterations,
    })
}

/// Positions of the first occurrence of each distinct vector.
fn distinct_indices(vectors: &[UtteranceVector]) -> Vec<usize> {
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let key: Vec<u64> = v.values().iter().map(|x| x.to_bits()).collect();
        seen.entry(key).or_insert_with(|| {
            out.push(i);
            i
        });
    }
    out
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(point, centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn assign(points: &[&[f64]], centroids: &[Vec<f64>]) -> Vec<usize> {
    points.iter().map(|p| nearest(p, centroids)).collect()
}

fn repair_empty(points: &[&[f64]], centroids: &mut [Vec<f64>], assignments: &mut [usize]) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..points.len())
            .filter(|&i| sizes[assignments[i]] > 1)
            .map(|i| (i, squared_distance(points[i], &centroids[assignments[i]])))
            .fold(None::<(usize, f64)>, |best, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        // With k <= distinct points some cluster always has a spare member.
        if let Some((i, _)) = donor {
            sizes[assignments[i]] -= 1;
            assignments[i] = empty;
            sizes[empty] = 1;
            centroids[empty] = points[i].to_vec();
        }
    }
}

fn means(points: &[&[f64]], assignments: &[usize], previous: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = points.first().map_or(0, |p| p.len());
    let mut sums = vec![vec![0.0; dim]; previous.len()];
    let mut counts = vec![0usize; previous.len()];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p.iter()) {
            *s += x;
        }
    }
    sums.into_iter()
        .zip(counts)
        .zip(previous)
        .map(|((mut s, n), prev)| {
            if n == 0 {
                return prev.clone();
            }
            s.iter_mut().for_each(|x| *x /= n as f64);
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::embed;

    fn vecs(texts: &[&str]) -> Vec<UtteranceVector> {
        texts.iter().map(|t| embed(t)).collect()
    }

    #[test]
    fn k_one_puts_everything_together() {
        let m = cluster(&vecs(&["a b", "c d", "e"]), 1, 3).unwrap();
        assert_eq!(m.assignments, [0, 0, 0]);
    }

    #[test]
    fn too_many_clusters() {
        let v = vecs(&["same", "same", "other"]);
        assert!(matches!(cluster(&v, 3, 0), Err(Error::Config(_))));
        assert!(cluster(&v, 0, 0).is_err());
        assert!(cluster(&[], 1, 0).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let v = vecs(&[
            "open account",
            "open new account",
            "close account",
            "hello",
            "hi there",
            "bye",
        ]);
        for seed in 0..10 {
            assert_eq!(cluster(&v, 3, seed).unwrap(), cluster(&v, 3, seed).unwrap());
        }
    }

    #[test]
    fn duplicate_groups_form_pure_clusters() {
        let v = vecs(&[
            "book a table",
            "book a table",
            "pay the bill",
            "book a table",
            "pay the bill",
        ]);
        for seed in 0..20 {
            let m = cluster(&v, 2, seed).unwrap();
            let a = &m.assignments;
            assert_eq!(a[0], a[1]);
            assert_eq!(a[0], a[3]);
            assert_eq!(a[2], a[4]);
            assert_ne!(a[0], a[2]);
        }
    }

    #[test]
    fn every_cluster_non_empty() {
        let v = vecs(&["a", "a", "a", "a", "b", "c"]);
        for seed in 0..20 {
            let m = cluster(&v, 3, seed).unwrap();
            assert!(m.sizes().iter().all(|&s| s > 0), "{:?}", m.sizes());
            assert!(m.centroids.iter().flatten().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn repair_moves_farthest_point() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![5.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let mut centroids = vec![vec![0.0], vec![100.0]];
        let mut assignments = vec![0, 0, 0];
        repair_empty(&refs, &mut centroids, &mut assignments);
        assert_eq!(assignments, [0, 0, 1]);
        assert_eq!(centroids[1], [5.0]);
    }
}
