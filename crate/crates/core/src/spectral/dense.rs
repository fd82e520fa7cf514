//! Dense decompositions with deterministic ordering: thin wrappers over
//! nalgebra's SVD and symmetric eigendecomposition that sort results
//! (neither is guaranteed ordered upstream) and the shared sign convention.

use nalgebra::DMatrix;

/// Full SVD M = U Σ Vᵀ with singular values sorted nonincreasing.
/// Returns (U: nr×k, σ: len k, V: nc×k) with k = min(nr, nc). Signs are the
/// factorization's own; callers canonicalize per retained pair.
pub fn dense_svd_sorted(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = m.clone().svd(true, true);
    let u_raw = svd.u.expect("u requested");
    let vt_raw = svd.v_t.expect("v_t requested");
    let sigma_raw: Vec<f64> = svd.singular_values.iter().copied().collect();
    let k = sigma_raw.len();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        sigma_raw[b]
            .partial_cmp(&sigma_raw[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let (nr, nc) = (m.nrows(), m.ncols());
    let mut u = DMatrix::zeros(nr, k);
    let mut v = DMatrix::zeros(nc, k);
    let mut sigma = Vec::with_capacity(k);
    for (out, &src) in order.iter().enumerate() {
        sigma.push(sigma_raw[src]);
        for i in 0..nr {
            u[(i, out)] = u_raw[(i, src)];
        }
        for i in 0..nc {
            v[(i, out)] = vt_raw[(src, i)];
        }
    }
    (u, sigma, v)
}

/// Full symmetric eigendecomposition with eigenvalues sorted nonincreasing.
pub fn dense_symmetric_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let vals_raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let n = vals_raw.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        vals_raw[b]
            .partial_cmp(&vals_raw[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (out, &src) in order.iter().enumerate() {
        values.push(vals_raw[src]);
        for i in 0..n {
            vectors[(i, out)] = eig.eigenvectors[(i, src)];
        }
    }
    (values, vectors)
}

/// Flips `col` in place so its entry of largest absolute value is positive,
/// ties broken by lowest index. Returns whether a flip happened; callers
/// with paired vectors (u, v) flip the partner on `true`.
pub fn canonical_sign_flip(col: &mut [f64]) -> bool {
    let mut best_idx = 0usize;
    let mut best_abs = 0.0f64;
    for (i, &x) in col.iter().enumerate() {
        let a = x.abs();
        if a > best_abs {
            best_abs = a;
            best_idx = i;
        }
    }
    if best_abs > 0.0 && col[best_idx] < 0.0 {
        for x in col.iter_mut() {
            *x = -*x;
        }
        true
    } else {
        false
    }
}
