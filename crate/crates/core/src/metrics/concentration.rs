//! Monte Carlo checks that the doubled-adjacency gram matrices concentrate
//! around their means within the theory's Frobenius bounds.

use nalgebra::DMatrix;
use rand::Rng;

use super::bounds::{t_constants, TConstants};
use crate::graph::{doubled_adjacency, sample_sbm, BlockModel, CommunityAssignment, CorePeripheryParams};
use crate::rng::stream_rng;
use crate::{Error, Result};

/// Number of independent graphs averaged into the reference estimate of
/// E(ÃÃᵀ) and E(ÃᵀÃ).
pub const REFERENCE_SAMPLES: usize = 1000;

/// Which deviation bound the check compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcentrationBound {
    /// √(2N⁷ log N), valid for any block model.
    General,
    /// √2·T̃_i·√(N⁵ log N), the sharper two-block core-periphery bound
    /// (T̃₁ for ÃÃᵀ, T̃₂ for ÃᵀÃ).
    CorePeriphery,
}

/// Violation counts from a concentration run.
#[derive(Debug, Clone)]
pub struct ConcentrationReport {
    pub violations_gram_left: usize,
    pub violations_gram_right: usize,
    pub bound_used: ConcentrationBound,
}

/// Frobenius deviation bound √(2N⁷ log N) for either gram matrix of a
/// general block model.
pub fn general_gram_threshold(n: usize) -> f64 {
    let nf = n as f64;
    (2.0 * nf.powi(7) * nf.ln()).sqrt()
}

/// Core-periphery deviation bounds (left gram, right gram):
/// √2·T̃₁·√(N⁵ log N) and √2·T̃₂·√(N⁵ log N). Tighter than the general
/// bound exactly when T̃_i < N.
pub fn core_gram_thresholds(t: &TConstants, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let scale = (nf.powi(5) * nf.ln()).sqrt();
    (
        2f64.sqrt() * t.ttilde1 * scale,
        2f64.sqrt() * t.ttilde2 * scale,
    )
}

/// Shared-column covariance of two doubled-adjacency entries:
/// Cov(Ã_uw, Ã_vw) = Σ_l Q_ul Q_vl Q_lw (1 − Q_lw), which is a sum of
/// nonnegative terms. This analytic correction is exposed for verification;
/// the check below estimates the gram expectations by Monte Carlo instead
/// of assembling these terms.
pub fn gram_entry_covariance(q: &DMatrix<f64>, u: usize, v: usize, w: usize) -> f64 {
    let n = q.nrows();
    let mut acc = 0.0;
    for l in 0..n {
        acc += q[(u, l)] * q[(v, l)] * q[(l, w)] * (1.0 - q[(l, w)]);
    }
    acc
}

/// Samples `replicates` graphs from the model with a fixed assignment and
/// counts how many of their gram matrices ÃÃᵀ and ÃᵀÃ deviate (in Frobenius
/// norm) from a Monte Carlo reference mean by more than the applicable
/// bound. Core-periphery models use the sharper T̃ bounds; everything else
/// falls back to the general bound. The reference mean comes from
/// [`REFERENCE_SAMPLES`] graphs on seed streams disjoint from the
/// replicates'.
pub fn concentration_check(
    model: &BlockModel,
    assignment: &CommunityAssignment,
    replicates: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if replicates == 0 {
        return Err(Error::invalid("concentration check needs at least one replicate"));
    }
    let n = assignment.n();
    if n == 0 {
        return Err(Error::invalid("empty assignment"));
    }

    let (bound_used, threshold_left, threshold_right) =
        match CorePeripheryParams::from_block_model(model) {
            Some(params) => {
                let nf = n as f64;
                let pi: Vec<f64> = assignment.sizes().iter().map(|&s| s as f64 / nf).collect();
                let t = t_constants(&params, &pi, n)?;
                let (left, right) = core_gram_thresholds(&t, n);
                (ConcentrationBound::CorePeriphery, left, right)
            }
            None => {
                let g = general_gram_threshold(n);
                (ConcentrationBound::General, g, g)
            }
        };

    let mut master = stream_rng(seed, 0);
    let sample_seeds: Vec<u64> = (0..REFERENCE_SAMPLES + replicates)
        .map(|_| master.gen())
        .collect();

    let mut sum_left = DMatrix::zeros(n, n);
    let mut sum_right = DMatrix::zeros(n, n);
    for &s in &sample_seeds[..REFERENCE_SAMPLES] {
        let (left, right) = sample_grams(model, assignment, s)?;
        sum_left += left;
        sum_right += right;
    }
    let mean_left = sum_left / REFERENCE_SAMPLES as f64;
    let mean_right = sum_right / REFERENCE_SAMPLES as f64;

    let mut violations_gram_left = 0;
    let mut violations_gram_right = 0;
    for &s in &sample_seeds[REFERENCE_SAMPLES..] {
        let (left, right) = sample_grams(model, assignment, s)?;
        if (left - &mean_left).norm() > threshold_left {
            violations_gram_left += 1;
        }
        if (right - &mean_right).norm() > threshold_right {
            violations_gram_right += 1;
        }
    }
    Ok(ConcentrationReport {
        violations_gram_left,
        violations_gram_right,
        bound_used,
    })
}

fn sample_grams(
    model: &BlockModel,
    assignment: &CommunityAssignment,
    seed: u64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let a = sample_sbm(model, assignment, seed)?;
    let atilde = doubled_adjacency(&a).to_dense();
    let left = &atilde * atilde.transpose();
    let right = atilde.transpose() * &atilde;
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn even_assignment(n: usize) -> CommunityAssignment {
        let labels: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
        CommunityAssignment::from_labels(labels, 2).unwrap()
    }

    #[test]
    fn deterministic_model_never_deviates() {
        // All probabilities 1: every sample is the complete graph.
        let model = BlockModel::new(DMatrix::from_element(2, 2, 1.0), vec![0.5, 0.5], true).unwrap();
        let report = concentration_check(&model, &even_assignment(16), 5, 3).unwrap();
        assert_eq!(report.violations_gram_left, 0);
        assert_eq!(report.violations_gram_right, 0);
        assert_eq!(report.bound_used, ConcentrationBound::General);
    }

    #[test]
    fn core_model_uses_sharper_bound() {
        let model = CorePeripheryParams::new(0.8, 0.48, 0.48, 0.24)
            .unwrap()
            .to_block_model(0.5, true)
            .unwrap();
        let report = concentration_check(&model, &even_assignment(30), 5, 7).unwrap();
        assert_eq!(report.bound_used, ConcentrationBound::CorePeriphery);
        assert_eq!(report.violations_gram_left, 0);
        assert_eq!(report.violations_gram_right, 0);
    }

    #[test]
    fn core_threshold_tighter_than_general_when_ttilde_below_n() {
        let params = CorePeripheryParams::new(0.08, 0.048, 0.048, 0.024).unwrap();
        let n = 100;
        let t = t_constants(&params, &[0.5, 0.5], n).unwrap();
        assert!(t.ttilde1 < n as f64);
        let (left, right) = core_gram_thresholds(&t, n);
        let general = general_gram_threshold(n);
        assert!(left < general);
        assert!(right < general);
        // The comparison is exactly T̃_i vs N.
        assert_relative_eq!(
            general / left,
            n as f64 / t.ttilde1,
            max_relative = 1e-12
        );
    }

    #[test]
    fn covariance_terms_are_nonnegative() {
        // Enumerate every (u,v,w) on a small expected matrix.
        let mut q = DMatrix::zeros(6, 6);
        let mut state = 1u64;
        for i in 0..6 {
            for j in 0..6 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                q[(i, j)] = ((state >> 40) as f64) / ((1u64 << 24) as f64);
            }
        }
        for u in 0..6 {
            for v in 0..6 {
                for w in 0..6 {
                    assert!(gram_entry_covariance(&q, u, v, w) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_zero_replicates() {
        let model = BlockModel::new(DMatrix::from_element(2, 2, 0.5), vec![0.5, 0.5], true).unwrap();
        assert!(concentration_check(&model, &even_assignment(10), 0, 1).is_err());
    }
}
