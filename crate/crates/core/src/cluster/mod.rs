//! Clustering of embedded nodes: k-means with k-means++ seeding and a
//! full-covariance Gaussian mixture model, plus the mean-square-error
//! criterion both are judged by.

mod gmm;
mod kmeans;

pub use gmm::{gmm, GmmConfig, GmmResult};
pub use kmeans::{kmeans, KMeansConfig, KMeansResult};

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Cluster assignment for N points: labels in 0..k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    labels: Vec<u32>,
    k: usize,
}

impl ClusterLabels {
    /// Builds labels, validating every entry lies in 0..k. Empty clusters
    /// are permitted: k records how many cluster ids were available.
    pub fn from_labels(labels: Vec<u32>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("cluster count k must be at least 1"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= k) {
            return Err(Error::invalid(format!(
                "label {bad} out of range for k = {k}"
            )));
        }
        Ok(Self { labels, k })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    /// Number of points carrying each label.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.k];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }
}

impl From<&crate::graph::CommunityAssignment> for ClusterLabels {
    fn from(assignment: &crate::graph::CommunityAssignment) -> Self {
        Self {
            labels: assignment.labels().to_vec(),
            k: assignment.k(),
        }
    }
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn mse_criterion(
    points: &DMatrix<f64>,
    labels: &ClusterLabels,
    centroids: &DMatrix<f64>,
) -> Result<f64> {
    if labels.n() != points.nrows() {
        return Err(Error::mismatch(format!(
            "{} labels for {} points",
            labels.n(),
            points.nrows()
        )));
    }
    if centroids.ncols() != points.ncols() {
        return Err(Error::mismatch(format!(
            "centroid dimension {} does not match point dimension {}",
            centroids.ncols(),
            points.ncols()
        )));
    }
    if labels.k() > centroids.nrows() {
        return Err(Error::invalid(format!(
            "labels reference {} clusters but only {} centroids given",
            labels.k(),
            centroids.nrows()
        )));
    }
    let mut total = 0.0;
    for i in 0..points.nrows() {
        let c = labels.label(i) as usize;
        let mut dist_sq = 0.0;
        for j in 0..points.ncols() {
            let diff = points[(i, j)] - centroids[(c, j)];
            dist_sq += diff * diff;
        }
        total += dist_sq;
    }
    Ok(total)
}

/// Squared Euclidean distance between row `i` of `points` and row `c` of
/// `centers`.
pub(crate) fn row_dist_sq(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    let mut acc = 0.0;
    for j in 0..points.ncols() {
        let diff = points[(i, j)] - centers[(c, j)];
        acc += diff * diff;
    }
    acc
}

pub(crate) fn validate_points(points: &DMatrix<f64>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("cluster count k must be at least 1"));
    }
    if points.nrows() < k {
        return Err(Error::invalid(format!(
            "cannot split {} points into {} clusters",
            points.nrows(),
            k
        )));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("points contain NaN or infinite entries"));
    }
    Ok(())
}
