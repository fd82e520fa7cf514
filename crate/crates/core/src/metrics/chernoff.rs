//! Size-adjusted Chernoff information between block distributions in an
//! embedding space, with closed-form block moments for ASE and DASE.

use nalgebra::DMatrix;

use crate::graph::BlockModel;
use crate::spectral::dense::dense_svd_sorted;
use crate::{Error, Result};

/// Block-level mean matrix M, variance matrix C, and block proportions
/// feeding the Chernoff computation.
#[derive(Debug, Clone)]
pub struct ChernoffInputs {
    m: DMatrix<f64>,
    c: DMatrix<f64>,
    pi: Vec<f64>,
}

impl ChernoffInputs {
    /// Validates shapes, strictly positive variances, and proportions that
    /// form a probability vector.
    pub fn new(m: DMatrix<f64>, c: DMatrix<f64>, pi: Vec<f64>) -> Result<Self> {
        let k = m.nrows();
        if k == 0 || m.ncols() != k {
            return Err(Error::invalid("mean matrix must be square and nonempty"));
        }
        if c.nrows() != k || c.ncols() != k {
            return Err(Error::mismatch(format!(
                "variance matrix is {}×{}, mean matrix is {k}×{k}",
                c.nrows(),
                c.ncols()
            )));
        }
        if pi.len() != k {
            return Err(Error::mismatch(format!(
                "{} proportions for {k} blocks",
                pi.len()
            )));
        }
        if c.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::degenerate(
                "block variance matrix must be strictly positive",
            ));
        }
        if pi.iter().any(|&p| !(p > 0.0) || p >= 1.0) && k > 1 {
            return Err(Error::invalid("proportions must lie in (0,1)"));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("proportions sum to {total}, not 1")));
        }
        Ok(Self { m, c, pi })
    }

    pub fn k(&self) -> usize {
        self.m.nrows()
    }

    pub fn mean(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn variance(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn proportions(&self) -> &[f64] {
        &self.pi
    }
}

/// Block moments of the adjacency embedding: M = B and C = B⊙(1−B).
///
/// Errors when any entry of B is exactly 0 or 1, since a Bernoulli with zero
/// variance makes the within-pair covariance matrix singular.
pub fn ase_block_moments(b: &DMatrix<f64>, pi: &[f64]) -> Result<ChernoffInputs> {
    if b.iter().any(|&p| p == 0.0 || p == 1.0) {
        return Err(Error::degenerate(
            "block probability exactly 0 or 1 gives zero variance",
        ));
    }
    let c = b.map(|p| p * (1.0 - p));
    ChernoffInputs::new(b.clone(), c, pi.to_vec())
}

/// Block moments of the doubled-adjacency embedding in closed form.
///
/// Entries of Ã are sums of independent Bernoulli products, so
/// M̃_ab = Σ_c n_c B_ac B_cb and C̃_ab = Σ_c n_c B_ac B_cb (1 − B_ac B_cb),
/// computed directly from (B, block sizes) without materializing Ã.
pub fn dase_block_moments(model: &BlockModel, sizes: &[f64]) -> Result<ChernoffInputs> {
    let k = model.k();
    if sizes.len() != k {
        return Err(Error::mismatch(format!(
            "{} sizes for {k} blocks",
            sizes.len()
        )));
    }
    if sizes.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::invalid("block sizes must be positive"));
    }
    let b = model.b();
    let mut m = DMatrix::zeros(k, k);
    let mut c = DMatrix::zeros(k, k);
    for a in 0..k {
        for bb in 0..k {
            let mut mean = 0.0;
            let mut var = 0.0;
            for mid in 0..k {
                let p = b[(a, mid)] * b[(mid, bb)];
                mean += sizes[mid] * p;
                var += sizes[mid] * p * (1.0 - p);
            }
            m[(a, bb)] = mean;
            c[(a, bb)] = var;
        }
    }
    let total: f64 = sizes.iter().sum();
    let pi: Vec<f64> = sizes.iter().map(|&s| s / total).collect();
    ChernoffInputs::new(m, c, pi)
}

/// Size-adjusted Chernoff information:
/// min over block pairs (k,l) of sup_{t∈(0,1)} of
/// (t(1−t)/2)·eᵀ M Π S_kl(t)⁻¹ M e with e = e_k − e_l and
/// S_kl(t) = (1−t)·diag(C_k) + t·diag(C_l).
///
/// The inner maximization scans a 64-point grid and refines the best
/// bracket by golden-section search to |Δt| < 1e-8.
pub fn chernoff_information(inputs: &ChernoffInputs) -> Result<f64> {
    let k = inputs.k();
    if k < 2 {
        return Err(Error::invalid(
            "Chernoff information needs at least two blocks",
        ));
    }
    let (_, sigma, _) = dense_svd_sorted(inputs.mean());
    if sigma[k - 1] <= 1e-12 * sigma[0].max(1e-300) {
        return Err(Error::degenerate("mean block matrix is rank deficient"));
    }

    let mut ci = f64::INFINITY;
    for a in 0..k {
        for b in (a + 1)..k {
            let value = pair_supremum(inputs, a, b);
            if value < ci {
                ci = value;
            }
        }
    }
    Ok(ci)
}

fn pair_supremum(inputs: &ChernoffInputs, a: usize, b: usize) -> f64 {
    let k = inputs.k();
    let m = inputs.mean();
    let c = inputs.variance();
    let pi = inputs.proportions();

    // e = e_a − e_b; right = M e, left = Mᵀ e.
    let mut right = vec![0.0; k];
    let mut left = vec![0.0; k];
    for i in 0..k {
        right[i] = m[(i, a)] - m[(i, b)];
        left[i] = m[(a, i)] - m[(b, i)];
    }

    let f = |t: f64| -> f64 {
        let mut quad = 0.0;
        for i in 0..k {
            let s = (1.0 - t) * c[(a, i)] + t * c[(b, i)];
            quad += left[i] * pi[i] * right[i] / s;
        }
        0.5 * t * (1.0 - t) * quad
    };

    // 64 interior grid points bracket the maximum.
    const GRID: usize = 64;
    let mut best_i = 0;
    let mut best_f = f64::NEG_INFINITY;
    let ts: Vec<f64> = (0..GRID).map(|i| (i as f64 + 1.0) / (GRID as f64 + 1.0)).collect();
    for (i, &t) in ts.iter().enumerate() {
        let v = f(t);
        if v > best_f {
            best_f = v;
            best_i = i;
        }
    }
    let mut lo = if best_i == 0 { 1e-9 } else { ts[best_i - 1] };
    let mut hi = if best_i + 1 == GRID { 1.0 - 1e-9 } else { ts[best_i + 1] };

    // Golden-section ascent on the bracket.
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > 1e-8 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    f(0.5 * (lo + hi)).max(best_f)
}
