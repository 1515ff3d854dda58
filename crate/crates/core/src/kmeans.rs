//! Seeded Lloyd iteration used to pick prototype examples per cluster.
//!
//! Everything is deterministic in the seed: initial centroids are distinct
//! data points, assignment ties go to the lower cluster index, and a
//! cluster that loses all its points is reseeded to the data point farthest
//! from the cluster's previous position (skipping points that coincide with
//! another current centroid, so the reseed cannot immediately collapse back
//! into a duplicate).

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMeansError {
    /// k must be between 1 and the number of points.
    InvalidK { k: usize, points: usize },
    DimensionMismatch { expected: usize, got: usize },
}

impl core::fmt::Display for KMeansError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            KMeansError::InvalidK { k, points } => {
                write!(f, "cannot form {k} clusters from {points} points")
            }
            KMeansError::DimensionMismatch { expected, got } => {
                write!(f, "point has dimension {got}, expected {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for KMeansError {}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cluster `data` into `k` groups and return, per cluster, the index of the
/// data point nearest the final centroid (ties to the smaller index).
pub fn kmeans_prototypes(
    data: &[Vec<f64>],
    k: usize,
    max_iters: usize,
    seed: u64,
) -> Result<Vec<usize>, KMeansError> {
    let n = data.len();
    if k == 0 || k > n {
        return Err(KMeansError::InvalidK { k, points: n });
    }
    let dim = data[0].len();
    if let Some(bad) = data.iter().find(|p| p.len() != dim) {
        return Err(KMeansError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = rand::seq::index::sample(&mut rng, n, k);
    let mut centroids: Vec<Vec<f64>> = init.iter().map(|i| data[i].clone()).collect();

    let mut assignment = alloc::vec![usize::MAX; n];
    for _ in 0..max_iters {
        let mut changed = false;
        for (p, point) in data.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = dist2(point, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignment[p] != best {
                assignment[p] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }

        let mut sums = alloc::vec![alloc::vec![0.0; dim]; k];
        let mut counts = alloc::vec![0usize; k];
        for (p, point) in data.iter().enumerate() {
            let c = assignment[p];
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(point) {
                *s += x;
            }
        }
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(k);
        for c in 0..k {
            if counts[c] > 0 {
                next.push(sums[c].iter().map(|s| s / counts[c] as f64).collect());
            } else {
                next.push(Vec::new()); // reseeded below
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let prev = &centroids[c];
            let taken = |p: &[f64], next: &[Vec<f64>]| {
                next.iter().any(|q| !q.is_empty() && dist2(p, q) == 0.0)
            };
            let mut pick = None;
            let mut pick_d = -1.0;
            for (p, point) in data.iter().enumerate() {
                if taken(point, &next) {
                    continue;
                }
                let d = dist2(point, prev);
                if d > pick_d {
                    pick_d = d;
                    pick = Some(p);
                }
            }
            // Every point may coincide with a centroid when k exceeds the
            // number of distinct points; fall back to the plain farthest.
            let p = pick.unwrap_or_else(|| {
                let mut far = 0;
                let mut far_d = -1.0;
                for (p, point) in data.iter().enumerate() {
                    let d = dist2(point, prev);
                    if d > far_d {
                        far_d = d;
                        far = p;
                    }
                }
                far
            });
            next[c] = data[p].clone();
        }
        centroids = next;
    }

    Ok(centroids
        .iter()
        .map(|centroid| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (p, point) in data.iter().enumerate() {
                let d = dist2(point, centroid);
                if d < best_d {
                    best_d = d;
                    best = p;
                }
            }
            best
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn planted() -> Vec<Vec<f64>> {
        let mut data = Vec::new();
        for _ in 0..4 {
            data.push(alloc::vec![1.0, 1.0]);
        }
        for _ in 0..4 {
            data.push(alloc::vec![10.0, 1.0]);
        }
        for _ in 0..4 {
            data.push(alloc::vec![1.0, 10.0]);
        }
        data
    }

    #[test]
    fn recovers_planted_clusters_across_seeds() {
        let data = planted();
        for seed in 0..100u64 {
            let medoids = kmeans_prototypes(&data, 3, 100, seed).unwrap();
            let groups: BTreeSet<usize> = medoids.iter().map(|&m| m / 4).collect();
            assert_eq!(groups.len(), 3, "seed {seed} picked {medoids:?}");
        }
    }

    #[test]
    fn is_deterministic_in_the_seed() {
        let data = planted();
        assert_eq!(
            kmeans_prototypes(&data, 3, 100, 9).unwrap(),
            kmeans_prototypes(&data, 3, 100, 9).unwrap()
        );
    }

    #[test]
    fn k_equal_to_n_returns_every_point() {
        let data = alloc::vec![alloc::vec![0.0], alloc::vec![5.0]];
        let mut medoids = kmeans_prototypes(&data, 2, 10, 0).unwrap();
        medoids.sort_unstable();
        assert_eq!(medoids, alloc::vec![0, 1]);
    }

    #[test]
    fn rejects_bad_k_and_ragged_data() {
        let data = alloc::vec![alloc::vec![0.0]];
        assert_eq!(
            kmeans_prototypes(&data, 0, 10, 0),
            Err(KMeansError::InvalidK { k: 0, points: 1 })
        );
        assert_eq!(
            kmeans_prototypes(&data, 2, 10, 0),
            Err(KMeansError::InvalidK { k: 2, points: 1 })
        );
        let ragged = alloc::vec![alloc::vec![0.0], alloc::vec![0.0, 1.0]];
        assert_eq!(
            kmeans_prototypes(&ragged, 1, 10, 0),
            Err(KMeansError::DimensionMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn medoid_is_nearest_point_with_smaller_index_on_ties() {
        let data = alloc::vec![
            alloc::vec![0.0, 0.0],
            alloc::vec![0.0, 0.0],
            alloc::vec![4.0, 0.0],
        ];
        let medoids = kmeans_prototypes(&data, 1, 10, 3).unwrap();
        // Centroid is the mean; the duplicate pair is nearest, index 0 wins.
        assert_eq!(medoids, alloc::vec![0]);
    }
}
