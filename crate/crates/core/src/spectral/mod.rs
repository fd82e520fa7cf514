//! Truncated singular value and symmetric eigenvalue computation.
//!
//! Small problems (any dimension ≤ 256) are solved by a dense
//! decomposition; larger ones by thick-restart Lanczos applied to the Gram
//! operator (for SVD) or to the matrix itself (symmetric eigenproblems).
//! All paths share the same deterministic sign convention, so results are
//! reproducible bit-for-bit for a fixed seed.

pub(crate) mod dense;
mod lanczos;

pub(crate) use dense::{canonical_sign_flip, dense_symmetric_eigen_sorted};
pub use dense::dense_svd_sorted;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use lanczos::{lanczos_symmetric, LanczosOptions, SymOp};

/// Problems at or below this dimension are solved densely; the iterative
/// path takes over above it.
pub const DENSE_CUTOFF: usize = 256;

/// Default relative residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default restart budget for the iterative path.
pub const DEFAULT_MAX_RESTARTS: usize = 1000;

/// A real matrix exposed through its action on vectors. Implementations
/// must make `apply_transpose` the exact adjoint of `apply`.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// y = M x.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// y = Mᵀ x.
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]);

    /// Materializes the operator column by column. Dense-matrix
    /// implementations should override this with a cheap copy.
    fn to_dense(&self) -> DMatrix<f64> {
        let (nr, nc) = (self.nrows(), self.ncols());
        let mut m = DMatrix::zeros(nr, nc);
        let mut e = vec![0.0; nc];
        let mut col = vec![0.0; nr];
        for j in 0..nc {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..nr {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let xv = nalgebra::DVector::from_column_slice(x);
        let yv = self * xv;
        y.copy_from_slice(yv.as_slice());
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let xv = nalgebra::DVector::from_column_slice(x);
        let yv = self.transpose() * xv;
        y.copy_from_slice(yv.as_slice());
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}

/// Top-d singular triplets of a matrix: U (N×d), σ nonincreasing, V (N×d),
/// plus the largest measured relative residual
/// max_k max(‖Mv_k − σ_k u_k‖, ‖Mᵀu_k − σ_k v_k‖) / σ₁.
#[derive(Debug, Clone)]
pub struct SingularTriplets {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
    pub residual: f64,
}

/// Which end of the spectrum a symmetric eigensolve targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Largest,
    Smallest,
}

/// Eigenpairs of a symmetric operator: values ordered by the requested end
/// (largest-first or smallest-first), orthonormal vectors as columns, and
/// the largest measured relative residual ‖Mx − λx‖ / scale.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub residual: f64,
}

/// Computes the top-d singular triplets of `m`, deterministic given `seed`.
///
/// Sign convention: each pair (u_k, v_k) is flipped so the entry of largest
/// absolute value in u_k is positive (ties broken by lowest index).
pub fn truncated_svd(
    m: &dyn LinearOperator,
    d: usize,
    tol: f64,
    seed: u64,
) -> Result<SingularTriplets> {
    let (nr, nc) = (m.nrows(), m.ncols());
    let min_dim = nr.min(nc);
    if d == 0 || d > min_dim {
        return Err(Error::invalid(format!(
            "rank target d = {d} out of range for a {nr}×{nc} matrix"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance {tol} must be positive")));
    }

    if nr.max(nc) <= DENSE_CUTOFF {
        return Ok(dense_truncated_svd(&m.to_dense(), d));
    }

    // Iterative path: Lanczos on the Gram operator MᵀM gives right vectors
    // and σ²; left vectors come from u_k = M v_k / σ_k. Convergence is
    // tightened per pair so the derived left residual ‖Mᵀu_k − σ_k v_k‖
    // meets tol·σ₁ (it equals the Gram residual divided by σ_k).
    let gram = RightGram { m };
    let opts = LanczosOptions {
        d,
        which: Which::Largest,
        max_restarts: DEFAULT_MAX_RESTARTS,
        tol_for_pair: &|theta: f64, scale: f64| {
            tol * (scale * theta.max(0.0)).sqrt().max(scale * 1e-6)
        },
    };
    let eig = lanczos_symmetric(&gram, &opts, seed)?;

    let mut sigma = Vec::with_capacity(d);
    let mut u = DMatrix::zeros(nr, d);
    let v = eig.vectors;
    let mut mv = vec![0.0; nr];
    for k in 0..d {
        let vk: Vec<f64> = v.column(k).iter().copied().collect();
        m.apply(&vk, &mut mv);
        let norm = norm2(&mv);
        sigma.push(norm);
        if norm > 0.0 {
            for i in 0..nr {
                u[(i, k)] = mv[i] / norm;
            }
        }
    }
    // Left vectors inherit a small mutual overlap from finite Gram
    // residuals; a Gram-Schmidt pass restores orthonormality without moving
    // any converged direction meaningfully. Zero-σ columns get a
    // deterministic orthonormal completion.
    orthonormalize_columns(&mut u);
    let mut u = u;
    let mut v = v;
    for k in 0..d {
        let flipped = {
            let mut col: Vec<f64> = u.column(k).iter().copied().collect();
            let f = canonical_sign_flip(&mut col);
            if f {
                for i in 0..nr {
                    u[(i, k)] = -u[(i, k)];
                }
            }
            f
        };
        if flipped {
            for i in 0..v.nrows() {
                v[(i, k)] = -v[(i, k)];
            }
        }
    }
    let residual = measure_svd_residual(m, &u, &sigma, &v);
    Ok(SingularTriplets {
        u,
        sigma,
        v,
        residual,
    })
}

/// Computes d eigenpairs at the requested end of a symmetric operator's
/// spectrum, deterministic given `seed`. Symmetry is verified (densely for
/// small inputs, by random adjoint probes for operators).
pub fn symmetric_eigs(
    m: &dyn LinearOperator,
    d: usize,
    which: Which,
    tol: f64,
    seed: u64,
) -> Result<EigenPairs> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::mismatch(format!(
            "symmetric solve needs a square operator, got {}×{}",
            n,
            m.ncols()
        )));
    }
    if d == 0 || d > n {
        return Err(Error::invalid(format!(
            "eigenpair count d = {d} out of range for n = {n}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance {tol} must be positive")));
    }

    if n <= DENSE_CUTOFF {
        let dense = m.to_dense();
        let scale = dense.amax().max(1.0);
        if (&dense - dense.transpose()).amax() > 1e-10 * scale {
            return Err(Error::invalid(
                "operator is not symmetric within 1e-10".to_string(),
            ));
        }
        return Ok(dense_symmetric_eigs(&dense, d, which));
    }

    check_adjoint_probes(m, seed)?;
    let op = SymWrap { m };
    let opts = LanczosOptions {
        d,
        which,
        max_restarts: DEFAULT_MAX_RESTARTS,
        tol_for_pair: &|_, scale: f64| tol * scale.max(f64::MIN_POSITIVE),
    };
    let eig = lanczos_symmetric(&op, &opts, seed)?;
    let mut vectors = eig.vectors;
    for k in 0..d {
        let mut col: Vec<f64> = vectors.column(k).iter().copied().collect();
        if canonical_sign_flip(&mut col) {
            for i in 0..n {
                vectors[(i, k)] = -vectors[(i, k)];
            }
        }
    }
    let residual = measure_eig_residual(m, &eig.values, &vectors);
    Ok(EigenPairs {
        values: eig.values,
        vectors,
        residual,
    })
}

fn dense_truncated_svd(m: &DMatrix<f64>, d: usize) -> SingularTriplets {
    let (u_full, sigma_full, v_full) = dense_svd_sorted(m);
    let nr = m.nrows();
    let nc = m.ncols();
    let mut u = DMatrix::zeros(nr, d);
    let mut v = DMatrix::zeros(nc, d);
    let mut sigma = Vec::with_capacity(d);
    for k in 0..d {
        sigma.push(sigma_full[k]);
        let mut ucol: Vec<f64> = u_full.column(k).iter().copied().collect();
        let flip = canonical_sign_flip(&mut ucol);
        for i in 0..nr {
            u[(i, k)] = ucol[i];
        }
        for i in 0..nc {
            v[(i, k)] = if flip {
                -v_full[(i, k)]
            } else {
                v_full[(i, k)]
            };
        }
    }
    let residual = measure_svd_residual(m, &u, &sigma, &v);
    SingularTriplets {
        u,
        sigma,
        v,
        residual,
    }
}

fn dense_symmetric_eigs(m: &DMatrix<f64>, d: usize, which: Which) -> EigenPairs {
    let (values_desc, vectors_desc) = dense_symmetric_eigen_sorted(m);
    let n = m.nrows();
    let pick: Vec<usize> = match which {
        Which::Largest => (0..d).collect(),
        Which::Smallest => (0..d).map(|k| n - 1 - k).collect(),
    };
    let mut values = Vec::with_capacity(d);
    let mut vectors = DMatrix::zeros(n, d);
    for (out, &src) in pick.iter().enumerate() {
        values.push(values_desc[src]);
        let mut col: Vec<f64> = vectors_desc.column(src).iter().copied().collect();
        canonical_sign_flip(&mut col);
        for i in 0..n {
            vectors[(i, out)] = col[i];
        }
    }
    let residual = measure_eig_residual(m, &values, &vectors);
    EigenPairs {
        values,
        vectors,
        residual,
    }
}

/// Gram operator MᵀM for the iterative SVD path.
struct RightGram<'a> {
    m: &'a dyn LinearOperator,
}

impl SymOp for RightGram<'_> {
    fn n(&self) -> usize {
        self.m.ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut mid = vec![0.0; self.m.nrows()];
        self.m.apply(x, &mut mid);
        self.m.apply_transpose(&mid, y);
    }
}

struct SymWrap<'a> {
    m: &'a dyn LinearOperator,
}

impl SymOp for SymWrap<'_> {
    fn n(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.m.apply(x, y);
    }
}

/// Checks xᵀ(My) = (Mx)ᵀy on two deterministic pseudo-random probes.
fn check_adjoint_probes(m: &dyn LinearOperator, seed: u64) -> Result<()> {
    use rand::Rng;
    let n = m.nrows();
    let mut rng = crate::rng::stream_rng(seed, u64::MAX);
    for _ in 0..2 {
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let mut mx = vec![0.0; n];
        let mut my = vec![0.0; n];
        m.apply(&x, &mut mx);
        m.apply(&y, &mut my);
        let lhs: f64 = x.iter().zip(&my).map(|(a, b)| a * b).sum();
        let rhs: f64 = mx.iter().zip(&y).map(|(a, b)| a * b).sum();
        let scale = norm2(&mx) * norm2(&y) + norm2(&my) * norm2(&x);
        if (lhs - rhs).abs() > 1e-10 * scale.max(1.0) {
            return Err(Error::invalid(
                "operator failed the symmetry probe (xᵀMy ≠ yᵀMx)".to_string(),
            ));
        }
    }
    Ok(())
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|&v| v * v).sum::<f64>().sqrt()
}

/// Modified Gram-Schmidt over columns; zero columns are replaced by a
/// deterministic orthonormal completion from canonical basis vectors.
fn orthonormalize_columns(u: &mut DMatrix<f64>) {
    let (n, d) = (u.nrows(), u.ncols());
    for k in 0..d {
        for prev in 0..k {
            let dot: f64 = (0..n).map(|i| u[(i, prev)] * u[(i, k)]).sum();
            for i in 0..n {
                u[(i, k)] -= dot * u[(i, prev)];
            }
        }
        let norm: f64 = (0..n).map(|i| u[(i, k)] * u[(i, k)]).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for i in 0..n {
                u[(i, k)] /= norm;
            }
        } else {
            // Deterministic completion: first canonical vector with a
            // nontrivial component orthogonal to the earlier columns.
            'basis: for b in 0..n {
                let mut cand = vec![0.0; n];
                cand[b] = 1.0;
                for prev in 0..k {
                    let dot: f64 = (0..n).map(|i| u[(i, prev)] * cand[i]).sum();
                    for i in 0..n {
                        cand[i] -= dot * u[(i, prev)];
                    }
                }
                let cn = norm2(&cand);
                if cn > 1e-3 {
                    for i in 0..n {
                        u[(i, k)] = cand[i] / cn;
                    }
                    break 'basis;
                }
            }
        }
    }
}

fn measure_svd_residual(
    m: &dyn LinearOperator,
    u: &DMatrix<f64>,
    sigma: &[f64],
    v: &DMatrix<f64>,
) -> f64 {
    let sigma1 = sigma.first().copied().unwrap_or(0.0);
    if sigma1 <= 0.0 {
        return 0.0;
    }
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut worst = 0.0f64;
    let mut mv = vec![0.0; nr];
    let mut mtu = vec![0.0; nc];
    for k in 0..sigma.len() {
        let vk: Vec<f64> = v.column(k).iter().copied().collect();
        let uk: Vec<f64> = u.column(k).iter().copied().collect();
        m.apply(&vk, &mut mv);
        let right: f64 = (0..nr)
            .map(|i| (mv[i] - sigma[k] * uk[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        m.apply_transpose(&uk, &mut mtu);
        let left: f64 = (0..nc)
            .map(|i| (mtu[i] - sigma[k] * vk[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(right.max(left));
    }
    worst / sigma1
}

fn measure_eig_residual(m: &dyn LinearOperator, values: &[f64], vectors: &DMatrix<f64>) -> f64 {
    let scale = values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if scale <= 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    let mut mx = vec![0.0; n];
    for (k, &lambda) in values.iter().enumerate() {
        let xk: Vec<f64> = vectors.column(k).iter().copied().collect();
        m.apply(&xk, &mut mx);
        let r: f64 = (0..n)
            .map(|i| (mx[i] - lambda * xk[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    worst / scale
}
