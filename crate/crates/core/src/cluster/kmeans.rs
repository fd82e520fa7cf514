//! Lloyd's algorithm with k-means++ seeding, multiple restarts, and
//! deterministic tie-breaking throughout.

use nalgebra::DMatrix;
use rand::Rng;

use super::{row_dist_sq, validate_points, ClusterLabels};
use crate::rng::stream_rng;
use crate::Result;

/// Solver settings for [`kmeans`].
#[derive(Debug, Clone, Copy)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative objective-change threshold for declaring convergence.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 300,
            tol: 1e-8,
        }
    }
}

/// Finished k-means run: the best restart by (objective, restart index).
#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub labels: ClusterLabels,
    pub centroids: DMatrix<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub restarts_used: usize,
}

/// Clusters the rows of `points` into `k` groups.
///
/// Each restart draws its k-means++ initialization from an independent RNG
/// stream derived from `seed`, so results are reproducible and independent
/// of evaluation order. The best restart is chosen by objective value with
/// the restart index as tie-breaker.
pub fn kmeans(
    points: &DMatrix<f64>,
    k: usize,
    config: &KMeansConfig,
    seed: u64,
) -> Result<KMeansResult> {
    validate_points(points, k)?;
    let restarts = config.restarts.max(1);

    let mut best: Option<KMeansResult> = None;
    for restart in 0..restarts {
        let run = lloyd_run(points, k, config, seed, restart)?;
        let better = match &best {
            None => true,
            Some(b) => run.objective < b.objective,
        };
        if better {
            best = Some(run);
        }
    }
    let mut result = best.expect("at least one restart");
    result.restarts_used = restarts;
    Ok(result)
}

fn lloyd_run(
    points: &DMatrix<f64>,
    k: usize,
    config: &KMeansConfig,
    seed: u64,
    restart: usize,
) -> Result<KMeansResult> {
    let n = points.nrows();
    let m = points.ncols();
    let mut rng = stream_rng(seed, restart as u64);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut labels = vec![0u32; n];
    let mut prev_objective = f64::INFINITY;
    let mut iterations = 0;

    for iter in 0..config.max_iters.max(1) {
        iterations = iter + 1;

        // Assignment step; nearest centroid, ties to the lowest index.
        let mut objective = 0.0;
        for i in 0..n {
            let mut best_c = 0usize;
            let mut best_d = row_dist_sq(points, i, &centroids, 0);
            for c in 1..k {
                let d = row_dist_sq(points, i, &centroids, c);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            labels[i] = best_c as u32;
            objective += best_d;
        }
        debug_assert!(
            objective <= prev_objective * (1.0 + 1e-12) + 1e-12,
            "Lloyd objective increased: {prev_objective} -> {objective}"
        );

        // Update step.
        let mut counts = vec![0usize; k];
        let mut sums: DMatrix<f64> = DMatrix::zeros(k, m);
        for i in 0..n {
            let c = labels[i] as usize;
            counts[c] += 1;
            for j in 0..m {
                sums[(c, j)] += points[(i, j)];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..m {
                    centroids[(c, j)] = sums[(c, j)] / counts[c] as f64;
                }
            }
        }

        // Empty-cluster repair: reseed each empty cluster at the point
        // farthest from its centroid, taken from a cluster that can spare it.
        let mut stolen = vec![false; n];
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far_i = None;
            let mut far_d = -1.0;
            for i in 0..n {
                let owner = labels[i] as usize;
                if stolen[i] || counts[owner] < 2 {
                    continue;
                }
                let d = row_dist_sq(points, i, &centroids, owner);
                if d > far_d {
                    far_d = d;
                    far_i = Some(i);
                }
            }
            if let Some(i) = far_i {
                counts[labels[i] as usize] -= 1;
                counts[c] = 1;
                labels[i] = c as u32;
                stolen[i] = true;
                for j in 0..m {
                    centroids[(c, j)] = points[(i, j)];
                }
            }
        }

        let improved = prev_objective - objective;
        if improved.abs() <= config.tol * prev_objective.max(1e-300) && iter > 0 {
            break;
        }
        prev_objective = objective;
    }

    // Recompute the objective against the final centroids so the reported
    // value matches the returned (labels, centroids) pair exactly.
    let cluster_labels = ClusterLabels::from_labels(labels, k)?;
    let objective = super::mse_criterion(points, &cluster_labels, &centroids)?;
    Ok(KMeansResult {
        labels: cluster_labels,
        centroids,
        objective,
        iterations,
        restarts_used: 1,
    })
}

/// k-means++ seeding: first center uniform, later centers drawn with
/// probability proportional to squared distance from the nearest center.
fn plus_plus_init(points: &DMatrix<f64>, k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let m = points.ncols();
    let mut centers = DMatrix::zeros(k, m);
    let first = rng.gen_range(0..n);
    for j in 0..m {
        centers[(0, j)] = points[(first, j)];
    }

    let mut dist_sq = vec![0.0f64; n];
    for i in 0..n {
        dist_sq[i] = row_dist_sq(points, i, &centers, 0);
    }
    for c in 1..k {
        let total: f64 = dist_sq.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dist_sq.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass is zero (duplicate points): uniform draw.
            rng.gen_range(0..n)
        };
        for j in 0..m {
            centers[(c, j)] = points[(pick, j)];
        }
        for i in 0..n {
            let d = row_dist_sq(points, i, &centers, c);
            if d < dist_sq[i] {
                dist_sq[i] = d;
            }
        }
    }
    centers
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_clouds(n_each: usize, spread: f64, gap: f64, seed: u64) -> DMatrix<f64> {
        let mut rng = stream_rng(seed, 0);
        let mut points = DMatrix::zeros(2 * n_each, 2);
        for i in 0..2 * n_each {
            let offset = if i < n_each { 0.0 } else { gap };
            points[(i, 0)] = offset + spread * (rng.gen::<f64>() - 0.5);
            points[(i, 1)] = spread * (rng.gen::<f64>() - 0.5);
        }
        points
    }

    #[test]
    fn separated_clouds_recovered_exactly() {
        let points = two_clouds(20, 0.2, 100.0, 3);
        let result = kmeans(&points, 2, &KMeansConfig::default(), 9).unwrap();
        let first = result.labels.label(0);
        for i in 0..20 {
            assert_eq!(result.labels.label(i), first);
        }
        for i in 20..40 {
            assert_ne!(result.labels.label(i), first);
        }
    }

    #[test]
    fn identical_points_give_zero_objective() {
        let points = DMatrix::from_element(8, 2, 3.5);
        let result = kmeans(&points, 2, &KMeansConfig::default(), 4).unwrap();
        assert_relative_eq!(result.objective, 0.0);
        assert_eq!(result.labels.n(), 8);
    }

    #[test]
    fn objective_matches_mse_criterion() {
        let points = two_clouds(15, 1.0, 5.0, 8);
        let result = kmeans(&points, 2, &KMeansConfig::default(), 2).unwrap();
        let recomputed =
            super::super::mse_criterion(&points, &result.labels, &result.centroids).unwrap();
        assert_relative_eq!(result.objective, recomputed, max_relative = 1e-9);
    }

    #[test]
    fn deterministic_across_calls() {
        let points = two_clouds(25, 2.0, 3.0, 5);
        let a = kmeans(&points, 3, &KMeansConfig::default(), 13).unwrap();
        let b = kmeans(&points, 3, &KMeansConfig::default(), 13).unwrap();
        assert_eq!(a.labels.labels(), b.labels.labels());
        assert_relative_eq!(a.objective, b.objective);
    }

    #[test]
    fn rejects_more_clusters_than_points() {
        let points = DMatrix::zeros(2, 2);
        assert!(kmeans(&points, 3, &KMeansConfig::default(), 0).is_err());
    }

    #[test]
    fn rejects_non_finite_points() {
        let mut points = DMatrix::zeros(4, 2);
        points[(1, 1)] = f64::NAN;
        assert!(kmeans(&points, 2, &KMeansConfig::default(), 0).is_err());
    }

    #[test]
    fn no_cluster_returned_empty() {
        // Three tight groups but k=4 forces a split somewhere.
        let mut points = DMatrix::zeros(12, 1);
        for i in 0..12 {
            points[(i, 0)] = (i / 4) as f64 * 10.0 + 0.01 * (i % 4) as f64;
        }
        let result = kmeans(&points, 4, &KMeansConfig::default(), 1).unwrap();
        let counts = result.labels.counts();
        assert!(counts.iter().all(|&c| c > 0), "empty cluster in {counts:?}");
    }

    #[test]
    fn matches_exhaustive_partition_oracle() {
        // Global optimum over all 2-partitions of 12 points; k-means with
        // default restarts should attain it on instances this small.
        let points = two_clouds(6, 2.0, 4.0, 17);
        let n = points.nrows();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << (n - 1)) {
            let labels: Vec<u32> = (0..n).map(|i| (mask >> i) & 1).collect();
            let mut centroids = DMatrix::zeros(2, 2);
            let mut counts = [0usize; 2];
            for i in 0..n {
                let c = labels[i] as usize;
                counts[c] += 1;
                for j in 0..2 {
                    centroids[(c, j)] += points[(i, j)];
                }
            }
            if counts.contains(&0) {
                continue;
            }
            for c in 0..2 {
                for j in 0..2 {
                    centroids[(c, j)] /= counts[c] as f64;
                }
            }
            let labels = ClusterLabels::from_labels(labels, 2).unwrap();
            let obj = super::super::mse_criterion(&points, &labels, &centroids).unwrap();
            if obj < best {
                best = obj;
            }
        }
        let result = kmeans(&points, 2, &KMeansConfig::default(), 23).unwrap();
        assert!(
            result.objective <= best + 1e-9,
            "kmeans {} vs exhaustive {}",
            result.objective,
            best
        );
    }
}
