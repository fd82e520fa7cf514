//! Misclustering-rate bounds for DASE and ASE and the constants they are
//! built from.
//!
//! The bounds have the shape const·log N/(sep²·(gap·π̃)⁵·N) where `sep` is a
//! latent-position separation and `gap` a scaled smallest informative
//! singular value. All constants here are computed once from a block model
//! and then swept over N by the bound evaluators; the core-periphery T
//! constants are size-free ratios, so a single [`BoundConstants`] is valid
//! across the whole sweep.

use nalgebra::DMatrix;

use crate::graph::{btilde_matrix_f, BlockModel, CorePeripheryParams};
use crate::spectral::dense::dense_svd_sorted;
use crate::{Error, Result};

/// Core-periphery variance-proxy constants.
///
/// `t1`/`t2` (and their doubled counterparts) are the bracketed sums over
/// the two groups; `t` and `ttilde` are the size-normalized combinations
/// T = (T₁²+T₂²)/N² and T̃ = (T̃₁²+T̃₂²)/N², which do not depend on N.
#[derive(Debug, Clone, Copy)]
pub struct TConstants {
    pub t1: f64,
    pub t2: f64,
    pub t: f64,
    pub ttilde1: f64,
    pub ttilde2: f64,
    pub ttilde: f64,
}

/// Evaluates the core-periphery T constants at network size `n` with group
/// proportions `pi`.
pub fn t_constants(params: &CorePeripheryParams, pi: &[f64], n: usize) -> Result<TConstants> {
    if pi.len() != 2 {
        return Err(Error::invalid(format!(
            "core-periphery constants need 2 proportions, got {}",
            pi.len()
        )));
    }
    let (pi1, pi2) = (pi[0], pi[1]);
    if !(pi1 > 0.0 && pi2 > 0.0) || (pi1 + pi2 - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "proportions ({pi1}, {pi2}) must be positive and sum to 1"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("network size must be positive"));
    }
    let (p, q, r, s) = (params.p, params.q, params.r, params.s);
    let nf = n as f64;
    let n1 = pi1 * nf;
    let n2 = pi2 * nf;

    // The group-2 summand is shared between the two doubled-gram sums.
    let g2 = 1.0 - (pi1 * q * r + pi2 * s * s).powi(2);
    let ttilde1 = n1 * (1.0 - (pi1 * p * r + pi2 * r * s).powi(2)) + n2 * g2;
    let ttilde2 = n1 * (1.0 - (pi1 * p * q + pi2 * q * s).powi(2)) + n2 * g2;
    let t1 = n1 * (1.0 - r * r) + n2 * (1.0 - s * s);
    let t2 = n1 * (1.0 - q * q) + n2 * (1.0 - s * s);
    Ok(TConstants {
        t1,
        t2,
        t: (t1 * t1 + t2 * t2) / (nf * nf),
        ttilde1,
        ttilde2,
        ttilde: (ttilde1 * ttilde1 + ttilde2 * ttilde2) / (nf * nf),
    })
}

/// Which method a core-periphery bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    Dase,
    Ase,
}

/// Model-derived constants feeding the bound formulas.
///
/// `beta_hat` and `btilde` describe the doubled block matrix B̃ = B·diag(n)·B
/// (the DASE side); `beta` and `b` describe B itself (the ASE side). The
/// core-periphery `t` constants are present only when the model has the
/// two-block core-periphery ordering.
#[derive(Debug, Clone)]
pub struct BoundConstants {
    /// λ_d(B)/N.
    pub b: f64,
    /// λ_d(B̃)/N.
    pub btilde: f64,
    /// Row separation of B's latent positions (min over pairs of the larger
    /// of the source/target separations).
    pub beta: f64,
    /// β̃/N with β̃ the analogous separation for B̃.
    pub beta_hat: f64,
    /// Smallest group proportion.
    pub pi_min: f64,
    /// Core-periphery constants when the model qualifies.
    pub t: Option<TConstants>,
}

/// Minimum over block pairs of the larger of the left/right latent-row
/// separations, given the d-truncated SVD factors of a block matrix.
fn min_max_separation(nu: &DMatrix<f64>, mu: &DMatrix<f64>) -> f64 {
    let k = nu.nrows();
    let mut best = f64::INFINITY;
    for u in 0..k {
        for v in (u + 1)..k {
            let mut left = 0.0;
            let mut right = 0.0;
            for j in 0..nu.ncols() {
                let dl = nu[(u, j)] - nu[(v, j)];
                let dr = mu[(u, j)] - mu[(v, j)];
                left += dl * dl;
                right += dr * dr;
            }
            let sep = left.sqrt().max(right.sqrt());
            if sep < best {
                best = sep;
            }
        }
    }
    best
}

/// Latent positions ν = L_d Λ_d^{1/2}, μ = R_d Λ_d^{1/2} of a block matrix,
/// truncated at rank `d`.
fn latent_factors(m: &DMatrix<f64>, d: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let (l, sigma, r) = dense_svd_sorted(m);
    let k = m.nrows();
    let mut nu = DMatrix::zeros(k, d);
    let mut mu = DMatrix::zeros(k, d);
    for j in 0..d {
        let w = sigma[j].max(0.0).sqrt();
        for i in 0..k {
            nu[(i, j)] = l[(i, j)] * w;
            mu[(i, j)] = r[(i, j)] * w;
        }
    }
    (nu, mu)
}

/// Computes all bound constants from a block model and realized (or
/// expected) block sizes.
pub fn bound_constants_from_model(model: &BlockModel, sizes: &[f64]) -> Result<BoundConstants> {
    let k = model.k();
    if k < 2 {
        return Err(Error::invalid(
            "bound constants need at least two blocks to measure separation",
        ));
    }
    if sizes.len() != k {
        return Err(Error::mismatch(format!("{} sizes for {k} blocks", sizes.len())));
    }
    if sizes.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::invalid("block sizes must be positive"));
    }
    let n: f64 = sizes.iter().sum();

    let (_, sigma_b, _) = dense_svd_sorted(model.b());
    let d = sigma_b.iter().filter(|&&s| s > 1e-10 * sigma_b[0].max(1e-300)).count();
    if d == 0 {
        return Err(Error::degenerate("block matrix is zero"));
    }

    let btilde_mat = btilde_matrix_f(model.b(), sizes);
    let (_, sigma_bt, _) = dense_svd_sorted(&btilde_mat);
    if sigma_bt[d - 1] <= 1e-10 * sigma_bt[0].max(1e-300) {
        return Err(Error::degenerate(format!(
            "doubled block matrix lost rank: needs {d}, largest ratio {:.2e}",
            sigma_bt[d - 1] / sigma_bt[0].max(1e-300)
        )));
    }

    let (nu_t, mu_t) = latent_factors(&btilde_mat, d);
    let beta_tilde = min_max_separation(&nu_t, &mu_t);
    let (nu, mu) = latent_factors(model.b(), d);
    let beta = min_max_separation(&nu, &mu);

    let pi_realized: Vec<f64> = sizes.iter().map(|&s| s / n).collect();
    let t = CorePeripheryParams::from_block_model(model)
        .map(|params| t_constants(&params, &pi_realized, n.round() as usize))
        .transpose()?;

    Ok(BoundConstants {
        b: sigma_b[d - 1] / n,
        btilde: sigma_bt[d - 1] / n,
        beta,
        beta_hat: beta_tilde / n,
        pi_min: pi_realized.iter().cloned().fold(f64::INFINITY, f64::min),
        t,
    })
}

fn require_positive(value: f64, name: &str) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(format!("bound constant {name} = {value} must be positive")))
    }
}

/// General-network DASE misclustering bound:
/// 288·log N/(β̂²(b̃π̃)⁵N) for directed graphs, numerator 144 undirected.
pub fn bound_general_dase(constants: &BoundConstants, n: usize, directed: bool) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("bound needs N ≥ 2"));
    }
    let beta_hat = require_positive(constants.beta_hat, "beta_hat")?;
    let btilde = require_positive(constants.btilde, "btilde")?;
    let pi_min = require_positive(constants.pi_min, "pi_min")?;
    let numerator = if directed { 288.0 } else { 144.0 };
    let nf = n as f64;
    Ok(numerator * nf.ln() / (beta_hat * beta_hat * (btilde * pi_min).powi(5) * nf))
}

/// Core-periphery misclustering bounds:
/// DASE → 144·T̃·log N/(β̂²(b̃π̃)⁵N); ASE → 216·T·log N/(β²(bπ̃)⁵).
///
/// The DASE bound keeps the 1/N factor, so its ratio to the ASE bound decays
/// exactly like 1/N.
pub fn bound_core(constants: &BoundConstants, n: usize, method: BoundMethod) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("bound needs N ≥ 2"));
    }
    let t = constants.t.as_ref().ok_or_else(|| {
        Error::invalid("core-periphery bound requires a two-block core-periphery model")
    })?;
    let pi_min = require_positive(constants.pi_min, "pi_min")?;
    let nf = n as f64;
    match method {
        BoundMethod::Dase => {
            let beta_hat = require_positive(constants.beta_hat, "beta_hat")?;
            let btilde = require_positive(constants.btilde, "btilde")?;
            let ttilde = require_positive(t.ttilde, "Ttilde")?;
            Ok(144.0 * ttilde * nf.ln() / (beta_hat * beta_hat * (btilde * pi_min).powi(5) * nf))
        }
        BoundMethod::Ase => {
            let beta = require_positive(constants.beta, "beta")?;
            let b = require_positive(constants.b, "b")?;
            let tt = require_positive(t.t, "T")?;
            Ok(216.0 * tt * nf.ln() / (beta * beta * (b * pi_min).powi(5)))
        }
    }
}
