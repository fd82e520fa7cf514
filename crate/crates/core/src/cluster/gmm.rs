//! Full-covariance Gaussian mixture fitted by EM, initialized from k-means.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::{kmeans, validate_points, ClusterLabels, KMeansConfig};
use crate::{Error, Result};

/// Solver settings for [`gmm`].
#[derive(Debug, Clone, Copy)]
pub struct GmmConfig {
    pub max_iters: usize,
    /// Relative log-likelihood change threshold for convergence.
    pub tol: f64,
    /// Ridge added to every covariance (`+reg·I`) to keep it positive
    /// definite when a component collapses.
    pub reg: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-7,
            reg: 1e-6,
        }
    }
}

/// Fitted mixture: MAP labels plus the component parameters.
#[derive(Debug, Clone)]
pub struct GmmResult {
    pub labels: ClusterLabels,
    pub means: DMatrix<f64>,
    pub covariances: Vec<DMatrix<f64>>,
    pub weights: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
}

/// Fits a k-component full-covariance Gaussian mixture to the rows of
/// `points` and returns the MAP assignment.
pub fn gmm(points: &DMatrix<f64>, k: usize, config: &GmmConfig, seed: u64) -> Result<GmmResult> {
    validate_points(points, k)?;
    let n = points.nrows();
    let m = points.ncols();

    // Hard k-means initialization.
    let init = kmeans(points, k, &KMeansConfig::default(), seed)?;
    let mut resp = DMatrix::zeros(n, k);
    for i in 0..n {
        resp[(i, init.labels.label(i) as usize)] = 1.0;
    }

    let mut means = DMatrix::zeros(k, m);
    let mut covariances = vec![DMatrix::zeros(m, m); k];
    let mut weights = vec![0.0; k];
    m_step(
        points,
        &resp,
        config.reg,
        &mut means,
        &mut covariances,
        &mut weights,
    );

    let mut log_likelihood = f64::NEG_INFINITY;
    let mut iterations = 0;
    for iter in 0..config.max_iters.max(1) {
        iterations = iter + 1;
        let ll = e_step(points, &means, &covariances, &weights, &mut resp)?;
        debug_assert!(
            ll + 1e-8 * (1.0 + ll.abs()) >= log_likelihood || iter == 0,
            "EM log-likelihood decreased: {log_likelihood} -> {ll}"
        );
        let converged = iter > 0
            && (ll - log_likelihood).abs() <= config.tol * log_likelihood.abs().max(1e-12);
        log_likelihood = ll;
        if converged {
            break;
        }
        m_step(
            points,
            &resp,
            config.reg,
            &mut means,
            &mut covariances,
            &mut weights,
        );
    }

    // MAP labels from the final responsibilities.
    let mut labels = vec![0u32; n];
    for i in 0..n {
        let mut best = 0usize;
        for c in 1..k {
            if resp[(i, c)] > resp[(i, best)] {
                best = c;
            }
        }
        labels[i] = best as u32;
    }
    Ok(GmmResult {
        labels: ClusterLabels::from_labels(labels, k)?,
        means,
        covariances,
        weights,
        log_likelihood,
        iterations,
    })
}

/// One E-step: fills `resp` with posterior component probabilities and
/// returns the observed-data log-likelihood.
fn e_step(
    points: &DMatrix<f64>,
    means: &DMatrix<f64>,
    covariances: &[DMatrix<f64>],
    weights: &[f64],
    resp: &mut DMatrix<f64>,
) -> Result<f64> {
    let n = points.nrows();
    let m = points.ncols();
    let k = weights.len();
    let log_norm = (m as f64) * (2.0 * std::f64::consts::PI).ln();

    struct CompDensity {
        chol: Cholesky<f64, nalgebra::Dyn>,
        log_det: f64,
        log_weight: f64,
    }
    let mut comps = Vec::with_capacity(k);
    for c in 0..k {
        let chol = cholesky_with_ridge(&covariances[c])?;
        let log_det = 2.0
            * (0..m)
                .map(|j| chol.l_dirty()[(j, j)].ln())
                .sum::<f64>();
        comps.push(CompDensity {
            chol,
            log_det,
            log_weight: weights[c].max(1e-300).ln(),
        });
    }

    let mut total_ll = 0.0;
    let mut log_probs = vec![0.0f64; k];
    for i in 0..n {
        for (c, comp) in comps.iter().enumerate() {
            let mut diff = DVector::zeros(m);
            for j in 0..m {
                diff[j] = points[(i, j)] - means[(c, j)];
            }
            let solved = comp.chol.solve(&diff);
            let maha = diff.dot(&solved);
            log_probs[c] = comp.log_weight - 0.5 * (log_norm + comp.log_det + maha);
        }
        let max_lp = log_probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = log_probs.iter().map(|lp| (lp - max_lp).exp()).sum();
        let lse = max_lp + sum_exp.ln();
        total_ll += lse;
        for c in 0..k {
            resp[(i, c)] = (log_probs[c] - lse).exp();
        }
    }
    Ok(total_ll)
}

/// One M-step: weighted MLE of weights, means, and covariances (with the
/// ridge applied). Components whose responsibility mass vanishes keep their
/// previous mean and covariance.
fn m_step(
    points: &DMatrix<f64>,
    resp: &DMatrix<f64>,
    reg: f64,
    means: &mut DMatrix<f64>,
    covariances: &mut [DMatrix<f64>],
    weights: &mut [f64],
) {
    let n = points.nrows();
    let m = points.ncols();
    let k = weights.len();
    for c in 0..k {
        let mass: f64 = (0..n).map(|i| resp[(i, c)]).sum();
        weights[c] = mass / n as f64;
        if mass < 1e-10 {
            continue;
        }
        for j in 0..m {
            let s: f64 = (0..n).map(|i| resp[(i, c)] * points[(i, j)]).sum();
            means[(c, j)] = s / mass;
        }
        let mut cov = DMatrix::zeros(m, m);
        for i in 0..n {
            let r = resp[(i, c)];
            if r == 0.0 {
                continue;
            }
            for a in 0..m {
                let da = points[(i, a)] - means[(c, a)];
                for b in a..m {
                    let v = r * da * (points[(i, b)] - means[(c, b)]);
                    cov[(a, b)] += v;
                }
            }
        }
        for a in 0..m {
            for b in a..m {
                let v = cov[(a, b)] / mass;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
            cov[(a, a)] += reg;
        }
        covariances[c] = cov;
    }
}

/// Cholesky factorization with escalating extra ridge as a fallback; the
/// configured regularization normally keeps the factorization well-defined.
fn cholesky_with_ridge(cov: &DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(chol) = Cholesky::new(cov.clone()) {
        return Ok(chol);
    }
    let m = cov.nrows();
    let scale = cov.diagonal().amax().max(1e-12);
    let mut ridge = 1e-10 * scale;
    for _ in 0..6 {
        let mut bumped = cov.clone();
        for j in 0..m {
            bumped[(j, j)] += ridge;
        }
        if let Some(chol) = Cholesky::new(bumped) {
            return Ok(chol);
        }
        ridge *= 100.0;
    }
    Err(Error::degenerate(
        "covariance not positive definite even after ridge escalation",
    ))
}
