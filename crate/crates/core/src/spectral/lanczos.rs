//! Thick-restart Lanczos for symmetric operators.
//!
//! One solver serves both public entry points: the SVD path runs it on the
//! Gram operator MᵀM, the eigenpath on the matrix itself. The recurrence is
//! kept numerically honest by full two-pass reorthogonalization against the
//! whole basis (the classical three-term recurrence loses orthogonality as
//! soon as a Ritz value converges), and restarts keep a window of wanted
//! Ritz vectors plus the residual direction, so the projected matrix stays
//! exact: arrow head of converged values, tridiagonal tail of new steps.
//!
//! Everything is sequential and allocation patterns are fixed, so a fixed
//! seed reproduces results bit for bit.

use nalgebra::DMatrix;

use super::{dense_symmetric_eigen_sorted, Which};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Symmetric operator interface for the solver.
pub(crate) trait SymOp {
    fn n(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub(crate) struct LanczosOptions<'a> {
    pub d: usize,
    pub which: Which,
    pub max_restarts: usize,
    /// Absolute residual threshold for one Ritz pair, given (θ, spectral
    /// scale). The SVD path tightens this proportionally to √θ so the
    /// derived left singular residual meets its own tolerance.
    pub tol_for_pair: &'a dyn Fn(f64, f64) -> f64,
}

pub(crate) struct LanczosOutcome {
    /// Ritz values ordered with the wanted end first.
    pub values: Vec<f64>,
    /// Matching Ritz vectors as columns, orthonormal.
    pub vectors: DMatrix<f64>,
}

/// Fixed stream id for the solver's start vector, distinct from the streams
/// used by sampling and clustering.
const START_VECTOR_STREAM: u64 = 0x4c61_6e63;

pub(crate) fn lanczos_symmetric(
    op: &dyn SymOp,
    opts: &LanczosOptions,
    seed: u64,
) -> Result<LanczosOutcome> {
    let n = op.n();
    let d = opts.d;
    debug_assert!(d >= 1 && d <= n);

    let m_max = n.min((2 * d + 16).max(32));
    let keep = (d + 8).min(m_max.saturating_sub(4)).max(d);

    // Basis columns v_0..v_m; h holds the symmetric projected matrix with
    // one extra row/column of headroom for the trailing coupling β_m.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max + 1);
    let mut h = DMatrix::<f64>::zeros(m_max + 1, m_max + 1);
    let mut m = 0usize;

    basis.push(random_unit(n, seed));

    let mut best_rel = f64::INFINITY;
    let mut w = vec![0.0; n];

    for _restart in 0..opts.max_restarts {
        // ── extend the factorization to m_max columns ──
        while m < m_max {
            let j = m;
            op.apply(&basis[j], &mut w);
            // Two full passes: the first removes the bulk, the second the
            // roundoff the first left behind. Coefficients accumulate into
            // the projected matrix (both triangles — it is symmetric).
            for _pass in 0..2 {
                for i in 0..=j {
                    let c = dot(&basis[i], &w);
                    axpy(-c, &basis[i], &mut w);
                    h[(i, j)] += c;
                }
            }
            for i in 0..j {
                h[(j, i)] = h[(i, j)];
            }
            let beta = norm2(&w);
            // Record the new coupling only in row j+1: the matching upper
            // entry h[(j, j+1)] is produced by the accumulation loop when
            // column j+1 is processed (c = ⟨v_j, A v_{j+1}⟩ = β), so writing
            // it here as well would double every off-diagonal coupling.
            if beta > 1e-300 {
                h[(j + 1, j)] = beta;
                let inv = 1.0 / beta;
                basis.push(w.iter().map(|&x| x * inv).collect());
            } else {
                // Invariant subspace: restart the recurrence in a fresh
                // deterministic direction with zero coupling.
                h[(j + 1, j)] = 0.0;
                basis.push(fresh_direction(n, &basis));
            }
            m += 1;
        }

        // ── Ritz analysis of the projected m×m block ──
        let hm = h.view((0, 0), (m, m)).into_owned();
        let (theta_desc, y_desc) = dense_symmetric_eigen_sorted(&hm);
        let scale = theta_desc
            .first()
            .map(|&a| a.abs())
            .unwrap_or(0.0)
            .max(theta_desc.last().map(|&a| a.abs()).unwrap_or(0.0));
        let wanted: Vec<usize> = match opts.which {
            Which::Largest => (0..m).collect(),
            Which::Smallest => (0..m).rev().collect(),
        };

        let beta_tail = h[(m, m - 1)];
        let ritz_residual = |src: usize| (beta_tail * y_desc[(m - 1, src)]).abs();

        let mut worst = 0.0f64;
        let mut converged = true;
        for &src in wanted.iter().take(d) {
            let r = ritz_residual(src);
            worst = worst.max(if scale > 0.0 { r / scale } else { 0.0 });
            if r > (opts.tol_for_pair)(theta_desc[src], scale) {
                converged = false;
            }
        }
        best_rel = best_rel.min(worst);

        if converged || m == n {
            let mut values = Vec::with_capacity(d);
            let mut vectors = DMatrix::zeros(n, d);
            for (out, &src) in wanted.iter().take(d).enumerate() {
                values.push(theta_desc[src]);
                let col = combine(&basis, &y_desc, src, m);
                for i in 0..n {
                    vectors[(i, out)] = col[i];
                }
            }
            return Ok(LanczosOutcome { values, vectors });
        }

        // ── thick restart: wanted Ritz window + residual direction ──
        let mut new_basis: Vec<Vec<f64>> = Vec::with_capacity(m_max + 1);
        for &src in wanted.iter().take(keep) {
            new_basis.push(combine(&basis, &y_desc, src, m));
        }
        new_basis.push(basis[m].clone());
        // One Gram-Schmidt pass to scrub accumulated drift before building
        // on this basis again.
        for k in 0..new_basis.len() {
            let (head, tail) = new_basis.split_at_mut(k);
            let vk = &mut tail[0];
            for prev in head.iter() {
                let c = dot(prev, vk);
                axpy(-c, prev, vk);
            }
            let nv = norm2(vk);
            if nv > 1e-300 {
                let inv = 1.0 / nv;
                vk.iter_mut().for_each(|x| *x *= inv);
            }
        }

        h.fill(0.0);
        for (i, &src) in wanted.iter().take(keep).enumerate() {
            h[(i, i)] = theta_desc[src];
        }
        basis = new_basis;
        m = keep;
    }

    Err(Error::NonConvergence {
        residual: best_rel,
        iterations: opts.max_restarts,
    })
}

/// x = V[:, 0..m] · y[:, src].
fn combine(basis: &[Vec<f64>], y: &DMatrix<f64>, src: usize, m: usize) -> Vec<f64> {
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for (j, base) in basis.iter().enumerate().take(m) {
        let c = y[(j, src)];
        if c != 0.0 {
            axpy(c, base, &mut out);
        }
    }
    out
}

fn random_unit(n: usize, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = stream_rng(seed, START_VECTOR_STREAM);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let nv = norm2(&v);
    // A zero draw across n entries is not a practical event, but stay total.
    if nv > 0.0 {
        v.iter_mut().for_each(|x| *x /= nv);
    } else {
        v[0] = 1.0;
    }
    v
}

/// First canonical basis vector with a substantial component orthogonal to
/// `basis`, normalized; zero vector if the basis already spans the space.
fn fresh_direction(n: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    for b in 0..n {
        let mut cand = vec![0.0; n];
        cand[b] = 1.0;
        for v in basis {
            let c = dot(v, &cand);
            axpy(-c, v, &mut cand);
        }
        let nc = norm2(&cand);
        if nc > 1e-3 {
            cand.iter_mut().for_each(|x| *x /= nc);
            return cand;
        }
    }
    vec![0.0; n]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}
