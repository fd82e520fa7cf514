//! Population-level matrices and densities for a block model: the expected
//! adjacency Q = ZBZᵀ, its square Q̃ = QQ, the compressed B̃ = B·diag(n)·B,
//! and the canonical latent-position factorization.

use nalgebra::DMatrix;

use super::{AdjacencyMatrix, BlockModel, CommunityAssignment};
use crate::error::{Error, Result};
use crate::spectral::dense_svd_sorted;

/// Expected matrices of an SBM under a fixed assignment.
///
/// `q` is block-constant with Q_ij = B[τ(i), τ(j)] for every ordered pair
/// (diagonal included — Q is the population matrix of the model, not of the
/// loop-free sample). `qtilde` is the exact dense product Q·Q and `btilde`
/// the K×K compression B·diag(n)·B.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedMatrices {
    pub q: DMatrix<f64>,
    pub qtilde: DMatrix<f64>,
    pub btilde: DMatrix<f64>,
}

pub fn expected_matrices(
    model: &BlockModel,
    assignment: &CommunityAssignment,
) -> Result<ExpectedMatrices> {
    if model.k() != assignment.k() {
        return Err(Error::mismatch(format!(
            "model has {} blocks, assignment has {}",
            model.k(),
            assignment.k()
        )));
    }
    let n = assignment.n();
    let b = model.b();
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = b[(assignment.label(i), assignment.label(j))];
        }
    }
    let qtilde = &q * &q;
    let btilde = btilde_matrix(b, assignment.sizes());
    Ok(ExpectedMatrices { q, qtilde, btilde })
}

/// B̃ = B·diag(sizes)·B with real-valued sizes.
pub(crate) fn btilde_matrix(b: &DMatrix<f64>, sizes: &[usize]) -> DMatrix<f64> {
    let sizes_f: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    btilde_matrix_f(b, &sizes_f)
}

pub(crate) fn btilde_matrix_f(b: &DMatrix<f64>, sizes: &[f64]) -> DMatrix<f64> {
    let k = b.nrows();
    let dn = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(sizes));
    let _ = k;
    b * dn * b
}

/// Edge density: m/(N(N−1)) for directed graphs, 2m/(N(N−1)) for
/// undirected. Both reduce to stored-entry count over N(N−1).
pub fn edge_density(a: &AdjacencyMatrix) -> Result<f64> {
    let n = a.n();
    if n < 2 {
        return Err(Error::invalid("density needs at least 2 nodes"));
    }
    Ok(a.nnz() as f64 / (n as f64 * (n - 1) as f64))
}

/// Expected edge density πᵀBπ of the model; for a 2-block core-periphery
/// model this is π₁²p + π₁π₂q + π₁π₂r + π₂²s.
pub fn expected_density(model: &BlockModel) -> f64 {
    let b = model.b();
    let pi = model.pi();
    let mut acc = 0.0;
    for a in 0..model.k() {
        for c in 0..model.k() {
            acc += pi[a] * pi[c] * b[(a, c)];
        }
    }
    acc
}

/// B = s × R for a density scale `s` and a ratio matrix R with R[0,0] = 1
/// as the baseline entry.
pub fn scaled_block_matrix(s: f64, ratios: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&s) || s.is_nan() {
        return Err(Error::invalid(format!("density scale s = {s} out of [0, 1]")));
    }
    if ratios.nrows() != ratios.ncols() {
        return Err(Error::mismatch("ratio matrix must be square".to_string()));
    }
    if ratios.iter().any(|&x| x < 0.0 || x.is_nan()) {
        return Err(Error::invalid("ratio entries must be nonnegative"));
    }
    if (ratios[(0, 0)] - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "ratio baseline R[0,0] must be 1, got {}",
            ratios[(0, 0)]
        )));
    }
    let b = ratios * s;
    if b.iter().any(|&x| x > 1.0) {
        return Err(Error::invalid(format!(
            "s = {s} pushes a block probability above 1"
        )));
    }
    Ok(b)
}

/// Canonical latent positions (X, Y) with ⟨X_i, Y_j⟩ = B[τ(i), τ(j)]:
/// factorize B = L Λ Rᵀ at its numerical rank d, set ν = L_d Λ_d^{1/2},
/// μ = R_d Λ_d^{1/2}, and replicate rows per node.
pub fn latent_positions(
    model: &BlockModel,
    assignment: &CommunityAssignment,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if model.k() != assignment.k() {
        return Err(Error::mismatch(format!(
            "model has {} blocks, assignment has {}",
            model.k(),
            assignment.k()
        )));
    }
    let b = model.b();
    let (l, sigma, r) = dense_svd_sorted(b);
    // Numerical rank: singular values above 1e-10 σ₁.
    let d = if sigma.is_empty() || sigma[0] <= 0.0 {
        0
    } else {
        sigma.iter().filter(|&&s| s > 1e-10 * sigma[0]).count()
    };
    if d == 0 {
        return Err(Error::degenerate("B has numerical rank 0"));
    }
    let k = model.k();
    let mut nu = DMatrix::zeros(k, d);
    let mut mu = DMatrix::zeros(k, d);
    for j in 0..d {
        let scale = sigma[j].sqrt();
        for a in 0..k {
            nu[(a, j)] = l[(a, j)] * scale;
            mu[(a, j)] = r[(a, j)] * scale;
        }
    }
    // The factorization must reproduce B; a rank cut that loses mass means
    // the tolerance split a genuinely tiny singular value and the caller
    // should not trust dot products.
    let recon = &nu * mu.transpose();
    let max_err = (&recon - b).amax();
    if max_err > 1e-10 {
        return Err(Error::degenerate(format!(
            "latent factorization reconstructs B only to {max_err:.3e}"
        )));
    }
    let n = assignment.n();
    let mut x = DMatrix::zeros(n, d);
    let mut y = DMatrix::zeros(n, d);
    for i in 0..n {
        let a = assignment.label(i);
        for j in 0..d {
            x[(i, j)] = nu[(a, j)];
            y[(i, j)] = mu[(a, j)];
        }
    }
    Ok((x, y))
}
