//! Solver validation against independent decompositions: planted spectra,
//! the symmetric augmented matrix [[0, M], [Mᵀ, 0]], nalgebra's dense
//! eigensolver, and the closed-form spectrum bounds for population matrices.

use dase_core::graph::{
    doubled_adjacency, sample_assignment, sample_sbm, BlockModel, CommunityAssignment,
};
use dase_core::rng::seeded_rng;
use dase_core::spectral::{symmetric_eigs, truncated_svd, Which, DEFAULT_TOL};
use nalgebra::DMatrix;
use rand::Rng;

/// Random orthogonal factor via QR of a Gaussian matrix.
fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = seeded_rng(seed);
    let g = DMatrix::from_fn(n, n, |_, _| {
        // Box-Muller from two uniforms.
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    });
    g.qr().q()
}

/// A 300×300 matrix with a planted, well-separated spectrum forces the
/// iterative path (the dense fallback stops at 256) and admits an exact
/// oracle: the singular values and subspaces are known by construction.
#[test]
fn iterative_svd_recovers_planted_spectrum() {
    let n = 300;
    let u0 = random_orthogonal(n, 11);
    let v0 = random_orthogonal(n, 13);
    let mut sigma0 = vec![0.0; n];
    let head = [300.0, 150.0, 80.0, 40.0, 20.0, 10.0];
    for (i, s) in sigma0.iter_mut().enumerate() {
        *s = if i < head.len() {
            head[i]
        } else {
            1.0 - (i - head.len()) as f64 / n as f64
        };
    }
    let m = &u0 * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sigma0.clone())) * v0.transpose();

    let d = 4;
    let svd = truncated_svd(&m, d, DEFAULT_TOL, 99).unwrap();
    for k in 0..d {
        let rel = (svd.sigma[k] - sigma0[k]).abs() / sigma0[0];
        assert!(rel < 1e-8, "sigma[{k}] = {} vs planted {}", svd.sigma[k], sigma0[k]);
        // Well-separated values mean each singular vector is determined up
        // to sign; compare through the inner product with the planted one.
        let mut dot_u = 0.0;
        let mut dot_v = 0.0;
        for i in 0..n {
            dot_u += svd.u[(i, k)] * u0[(i, k)];
            dot_v += svd.v[(i, k)] * v0[(i, k)];
        }
        assert!(dot_u.abs() > 1.0 - 1e-9, "u[{k}] misaligned: |dot| = {}", dot_u.abs());
        assert!(dot_v.abs() > 1.0 - 1e-9, "v[{k}] misaligned: |dot| = {}", dot_v.abs());
        // Signs must be consistent between the two sides.
        assert!(
            (dot_u > 0.0) == (dot_v > 0.0),
            "u/v sign mismatch at pair {k}"
        );
    }
    assert!(svd.residual <= DEFAULT_TOL);
}

/// Against a sampled two-step walk matrix the iterative solver must satisfy
/// the defining residual equations computed with the dense matrix.
#[test]
fn iterative_svd_satisfies_residual_equations_on_walk_matrix() {
    let model = BlockModel::new(
        nalgebra::dmatrix![0.08, 0.048; 0.048, 0.024],
        vec![0.5, 0.5],
        true,
    )
    .unwrap();
    let assignment = sample_assignment(model.pi(), 300, 21).unwrap();
    let a = sample_sbm(&model, &assignment, 22).unwrap();
    let doubled = doubled_adjacency(&a);
    let dense = doubled.to_dense();

    let d = 4;
    let svd = truncated_svd(&dense, d, DEFAULT_TOL, 5).unwrap();

    // Independent full decomposition for the values.
    let oracle = dense.clone().svd(false, false);
    let mut sig: Vec<f64> = oracle.singular_values.iter().copied().collect();
    sig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    for k in 0..d {
        let rel = (svd.sigma[k] - sig[k]).abs() / sig[0];
        assert!(rel < 1e-7, "sigma[{k}] = {} vs oracle {}", svd.sigma[k], sig[k]);
    }

    // Defining equations, immune to any spectral-gap concerns.
    for k in 0..d {
        let uk = svd.u.column(k);
        let vk = svd.v.column(k);
        let r1 = (&dense * vk - svd.sigma[k] * uk).norm();
        let r2 = (dense.transpose() * uk - svd.sigma[k] * vk).norm();
        assert!(r1 <= 1e-6 * sig[0], "‖Mv−σu‖ = {r1} at pair {k}");
        assert!(r2 <= 1e-6 * sig[0], "‖Mᵀu−σv‖ = {r2} at pair {k}");
    }

    // Orthonormality of both bases.
    let utu = svd.u.transpose() * &svd.u;
    let vtv = svd.v.transpose() * &svd.v;
    assert!((utu - DMatrix::identity(d, d)).amax() < 1e-8);
    assert!((vtv - DMatrix::identity(d, d)).amax() < 1e-8);
}

/// The singular values of M are exactly the positive eigenvalues of the
/// symmetric augmented matrix [[0, M], [Mᵀ, 0]] — a decomposition that never
/// touches any SVD code path.
#[test]
fn singular_values_match_augmented_matrix_eigenvalues() {
    let n = 80;
    let mut rng = seeded_rng(17);
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));

    let d = 6;
    let svd = truncated_svd(&m, d, DEFAULT_TOL, 3).unwrap();

    let mut aug = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, n + j)] = m[(i, j)];
            aug[(n + j, i)] = m[(i, j)];
        }
    }
    let mut eig: Vec<f64> = aug.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());

    for k in 0..d {
        let rel = (svd.sigma[k] - eig[k]).abs() / eig[0];
        assert!(
            rel < 1e-8,
            "sigma[{k}] = {} vs augmented eigenvalue {}",
            svd.sigma[k],
            eig[k]
        );
    }
}

#[test]
fn symmetric_eigensolver_matches_dense_oracle_above_dense_cutoff() {
    let n = 300;
    let mut rng = seeded_rng(29);
    let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let sym = (&raw + raw.transpose()) * 0.5;

    let mut oracle: Vec<f64> = sym.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    oracle.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let scale = oracle[0].abs().max(oracle[n - 1].abs());

    let top = symmetric_eigs(&sym, 5, Which::Largest, DEFAULT_TOL, 31).unwrap();
    for k in 0..5 {
        assert!(
            (top.values[k] - oracle[k]).abs() < 1e-7 * scale,
            "largest[{k}] = {} vs {}",
            top.values[k],
            oracle[k]
        );
        let x = top.vectors.column(k);
        let resid = (&sym * x - top.values[k] * x).norm();
        assert!(resid < 1e-6 * scale, "residual {resid} at largest[{k}]");
    }

    let bottom = symmetric_eigs(&sym, 5, Which::Smallest, DEFAULT_TOL, 37).unwrap();
    for k in 0..5 {
        let want = oracle[n - 1 - k];
        assert!(
            (bottom.values[k] - want).abs() < 1e-7 * scale,
            "smallest[{k}] = {} vs {}",
            bottom.values[k],
            want
        );
        let x = bottom.vectors.column(k);
        let resid = (&sym * x - bottom.values[k] * x).norm();
        assert!(resid < 1e-6 * scale, "residual {resid} at smallest[{k}]");
    }
}

/// Population walk matrices obey closed-form spectrum bounds: every entry of
/// Q̃ is at most N so σ₁(Q̃) ≤ N², and the d-th value is at least
/// n_min·σ_d(B̃) = π̃·b̃·N². Checked on 20 random two-block models.
#[test]
fn population_walk_matrix_spectrum_bounds() {
    let mut rng = seeded_rng(43);
    let mut checked = 0;
    while checked < 20 {
        let p: f64 = rng.gen_range(0.5..0.95);
        let q: f64 = rng.gen_range(0.2..0.45);
        let r: f64 = rng.gen_range(0.2..0.45);
        let s: f64 = rng.gen_range(0.01..0.15);
        let b = nalgebra::dmatrix![p, q; r, s];
        if (p * s - q * r).abs() < 1e-3 {
            continue; // keep B safely full-rank so d = 2 below
        }
        let n1 = rng.gen_range(20..60usize);
        let n2 = rng.gen_range(20..60usize);
        let n = n1 + n2;

        let mut labels = vec![0u32; n];
        for l in labels.iter_mut().skip(n1) {
            *l = 1;
        }
        let assignment = CommunityAssignment::from_labels(labels, 2).unwrap();
        let model = BlockModel::new(b.clone(), vec![0.5, 0.5], true).unwrap();
        let expected = dase_core::graph::expected_matrices(&model, &assignment).unwrap();

        let svd = expected.qtilde.clone().svd(false, false);
        let mut sig: Vec<f64> = svd.singular_values.iter().copied().collect();
        sig.sort_by(|x, y| y.partial_cmp(x).unwrap());

        let nf = n as f64;
        assert!(
            sig[0] <= nf * nf * (1.0 + 1e-9),
            "sigma1 = {} above N² = {}",
            sig[0],
            nf * nf
        );

        let btilde_svd = expected.btilde.clone().svd(false, false);
        let mut bt: Vec<f64> = btilde_svd.singular_values.iter().copied().collect();
        bt.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let btilde_min = bt[1] / nf;
        let pi_min = (n1.min(n2) as f64) / nf;
        let floor = pi_min * btilde_min * nf * nf;
        assert!(
            sig[1] >= floor * (1.0 - 1e-9),
            "sigma2 = {} below π̃·b̃·N² = {floor} for (p,q,r,s)=({p},{q},{r},{s})",
            sig[1]
        );
        checked += 1;
    }
}

/// Two identical calls must agree bit for bit, including on the iterative
/// path where restart behavior could otherwise drift.
#[test]
fn solver_outputs_are_bitwise_deterministic() {
    let model = BlockModel::new(
        nalgebra::dmatrix![0.08, 0.048; 0.048, 0.024],
        vec![0.5, 0.5],
        true,
    )
    .unwrap();
    let assignment = sample_assignment(model.pi(), 300, 61).unwrap();
    let a = sample_sbm(&model, &assignment, 62).unwrap();
    let dense = doubled_adjacency(&a).to_dense();

    let first = truncated_svd(&dense, 3, DEFAULT_TOL, 64).unwrap();
    let second = truncated_svd(&dense, 3, DEFAULT_TOL, 64).unwrap();
    assert_eq!(first.sigma, second.sigma);
    for (x, y) in first.u.iter().zip(second.u.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    for (x, y) in first.v.iter().zip(second.v.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }

    let sym = (&dense + dense.transpose()) * 0.5;
    let e1 = symmetric_eigs(&sym, 3, Which::Largest, DEFAULT_TOL, 65).unwrap();
    let e2 = symmetric_eigs(&sym, 3, Which::Largest, DEFAULT_TOL, 65).unwrap();
    assert_eq!(e1.values, e2.values);
    for (x, y) in e1.vectors.iter().zip(e2.vectors.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

/// An exactly rank-2 block-constant matrix above the dense cutoff: the
/// iterative path must reconstruct it from two triplets, and the discarded
/// part of the spectrum is numerically zero.
#[test]
fn rank_two_population_matrix_reconstructs_from_two_triplets() {
    let model = BlockModel::new(
        nalgebra::dmatrix![0.08, 0.048; 0.048, 0.024],
        vec![0.5, 0.5],
        true,
    )
    .unwrap();
    let assignment = sample_assignment(model.pi(), 300, 71).unwrap();
    let expected = dase_core::graph::expected_matrices(&model, &assignment).unwrap();

    let svd = truncated_svd(&expected.q, 2, DEFAULT_TOL, 73).unwrap();
    let approx = &svd.u
        * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(svd.sigma.clone()))
        * svd.v.transpose();
    let err = (&approx - &expected.q).norm() / expected.q.norm();
    assert!(err < 1e-6, "rank-2 reconstruction error {err}");

    let oracle = expected.q.clone().svd(false, false);
    let mut sig: Vec<f64> = oracle.singular_values.iter().copied().collect();
    sig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    assert!(sig[2] <= 1e-8 * sig[0], "sigma3 = {} not negligible", sig[2]);
}
