//! Scree-based choice of the embedding dimension: the two-segment Gaussian
//! profile likelihood elbow criterion.

use crate::{Error, Result};

/// Smallest pooled variance admitted when a segment is constant; keeps the
/// log-likelihood finite for degenerate screes.
const VARIANCE_FLOOR: f64 = 1e-30;

/// Picks the split of a nonincreasing singular-value scree that maximizes
/// the two-segment Gaussian profile log-likelihood, returning the size of
/// the leading segment (the suggested dimension). Ties go to the smaller
/// split; candidate splits run from 1 to min(max_k, len − 1).
pub fn choose_k_profile_likelihood(sigma: &[f64], max_k: usize) -> Result<usize> {
    if sigma.len() < 3 {
        return Err(Error::invalid(format!(
            "profile likelihood needs at least 3 values, got {}",
            sigma.len()
        )));
    }
    if max_k == 0 {
        return Err(Error::invalid("max_k must be at least 1"));
    }
    for w in sigma.windows(2) {
        if w[1] > w[0] + 1e-12 * w[0].abs().max(1.0) {
            return Err(Error::invalid(format!(
                "scree must be nonincreasing, found {} before {}",
                w[0], w[1]
            )));
        }
    }

    let n = sigma.len();
    let upper = max_k.min(n - 1);
    let mut best_q = 1;
    let mut best_ll = f64::NEG_INFINITY;
    for q in 1..=upper {
        let ll = split_log_likelihood(sigma, q);
        if ll > best_ll {
            best_ll = ll;
            best_q = q;
        }
    }
    Ok(best_q)
}

/// Profile log-likelihood of splitting the scree after `q` values: each
/// segment gets its own Gaussian mean, the variance is pooled across both
/// (maximum-likelihood, i.e. divide by n).
fn split_log_likelihood(sigma: &[f64], q: usize) -> f64 {
    let n = sigma.len() as f64;
    let (head, tail) = sigma.split_at(q);
    let ss = |seg: &[f64]| -> f64 {
        if seg.is_empty() {
            return 0.0;
        }
        let mean = seg.iter().sum::<f64>() / seg.len() as f64;
        seg.iter().map(|&x| (x - mean) * (x - mean)).sum()
    };
    let pooled = ((ss(head) + ss(tail)) / n).max(VARIANCE_FLOOR);
    -0.5 * n * ((2.0 * std::f64::consts::PI * pooled).ln() + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_gap_found() {
        assert_eq!(
            choose_k_profile_likelihood(&[10.0, 9.9, 0.1, 0.09, 0.08], 5).unwrap(),
            2
        );
    }

    #[test]
    fn three_cluster_scree_found() {
        assert_eq!(
            choose_k_profile_likelihood(&[10.0, 9.5, 9.0, 1.0, 0.9, 0.8], 5).unwrap(),
            3
        );
    }

    #[test]
    fn matches_exhaustive_split_oracle_on_geometric_decay() {
        let sigma: Vec<f64> = (0..12).map(|i| 8.0 * 0.6f64.powi(i)).collect();
        let max_k = 5;
        let chosen = choose_k_profile_likelihood(&sigma, max_k).unwrap();
        assert!((1..=max_k).contains(&chosen));
        // Independent oracle: recompute every split's likelihood directly.
        let mut best = (1, f64::NEG_INFINITY);
        for q in 1..=max_k {
            let ll = split_log_likelihood(&sigma, q);
            if ll > best.1 {
                best = (q, ll);
            }
        }
        assert_eq!(chosen, best.0);
    }

    #[test]
    fn constant_scree_is_handled() {
        // All segments have zero variance; the floor keeps likelihoods
        // finite and the tie rule picks the smallest split.
        assert_eq!(choose_k_profile_likelihood(&[5.0, 5.0, 5.0, 5.0], 3).unwrap(), 1);
    }

    #[test]
    fn max_k_truncates_the_search() {
        let sigma = [10.0, 9.5, 9.0, 1.0, 0.9, 0.8];
        assert_eq!(choose_k_profile_likelihood(&sigma, 2).unwrap(), 2);
    }

    #[test]
    fn rejects_short_and_increasing_input() {
        assert!(choose_k_profile_likelihood(&[2.0, 1.0], 2).is_err());
        assert!(choose_k_profile_likelihood(&[1.0, 2.0, 3.0], 2).is_err());
    }
}
