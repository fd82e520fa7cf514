//! Brute-force oracles for the block-moment closed forms and the Chernoff
//! objective, a large-sample mixture recovery check, and property tests for
//! the agreement metrics and the bound constants.

use dase_core::cluster::{gmm, ClusterLabels, GmmConfig};
use dase_core::graph::{BlockModel, CommunityAssignment, CorePeripheryParams};
use dase_core::metrics::{
    ase_block_moments, chernoff_information, dase_block_moments, misclustering, nmi, t_constants,
};
use dase_core::rng::seeded_rng;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

/// Builds the N×K block-indicator matrix for contiguous blocks of the given
/// sizes.
fn indicator(sizes: &[usize]) -> DMatrix<f64> {
    let n: usize = sizes.iter().sum();
    let mut z = DMatrix::zeros(n, sizes.len());
    let mut row = 0;
    for (block, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            z[(row, block)] = 1.0;
            row += 1;
        }
    }
    z
}

/// The closed-form walk moments must equal what a dense construction gives:
/// build Q = ZBZᵀ, square it, and read off block-representative entries; the
/// variance analogue sums w ↦ Q_uw·Q_wv·(1 − Q_uw·Q_wv) directly.
#[test]
fn walk_moments_match_dense_brute_force() {
    let mut rng = seeded_rng(101);
    for case in 0..8 {
        let k = if case % 3 == 2 { 3 } else { 2 };
        let directed = case % 2 == 0;
        let mut b = DMatrix::from_fn(k, k, |_, _| rng.gen_range(0.05..0.95));
        if !directed {
            b = (&b + b.transpose()) * 0.5;
        }
        let sizes: Vec<usize> = (0..k).map(|_| rng.gen_range(10..25usize)).collect();
        let n: usize = sizes.iter().sum();
        let sizes_f: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();

        let model = BlockModel::new(b.clone(), vec![1.0 / k as f64; k], directed).unwrap();
        let inputs = dase_block_moments(&model, &sizes_f).unwrap();

        let z = indicator(&sizes);
        let q = &z * &b * z.transpose();
        let qq = &q * &q;

        // First row index of each block.
        let mut starts = vec![0usize; k];
        for block in 1..k {
            starts[block] = starts[block - 1] + sizes[block - 1];
        }

        for a in 0..k {
            for bb in 0..k {
                let (u, v) = (starts[a], starts[bb]);
                let mean_oracle = qq[(u, v)];
                let mut var_oracle = 0.0;
                for w in 0..n {
                    let pw = q[(u, w)] * q[(w, v)];
                    var_oracle += pw * (1.0 - pw);
                }
                let mean = inputs.mean()[(a, bb)];
                let var = inputs.variance()[(a, bb)];
                assert!(
                    (mean - mean_oracle).abs() <= 1e-12 * mean_oracle.abs().max(1.0),
                    "mean[{a}][{bb}] = {mean} vs dense {mean_oracle}"
                );
                assert!(
                    (var - var_oracle).abs() <= 1e-12 * var_oracle.abs().max(1.0),
                    "var[{a}][{bb}] = {var} vs dense {var_oracle}"
                );
            }
        }

        let total: f64 = sizes_f.iter().sum();
        for (block, &size) in sizes_f.iter().enumerate() {
            assert!((inputs.proportions()[block] - size / total).abs() < 1e-15);
        }
    }
}

/// Independent implementation of the Chernoff objective through explicit
/// matrix algebra (diagonal inverse via `try_inverse`) on a fine grid.
fn chernoff_grid_oracle(m: &DMatrix<f64>, c: &DMatrix<f64>, pi: &[f64]) -> f64 {
    let k = m.nrows();
    let pi_mat = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(pi));
    let mut overall = f64::INFINITY;
    for a in 0..k {
        for b in (a + 1)..k {
            let mut e = nalgebra::DVector::zeros(k);
            e[a] = 1.0;
            e[b] = -1.0;
            let mut best = f64::NEG_INFINITY;
            for step in 1..2000 {
                let t = step as f64 / 2000.0;
                let s = DMatrix::from_fn(k, k, |i, j| {
                    if i == j {
                        (1.0 - t) * c[(a, i)] + t * c[(b, i)]
                    } else {
                        0.0
                    }
                });
                let s_inv = s.try_inverse().unwrap();
                let g = m * &pi_mat * s_inv * m;
                let value = 0.5 * t * (1.0 - t) * (e.transpose() * &g * &e)[(0, 0)];
                if value > best {
                    best = value;
                }
            }
            if best < overall {
                overall = best;
            }
        }
    }
    overall
}

#[test]
fn chernoff_matches_matrix_algebra_grid_oracle() {
    let b = nalgebra::dmatrix![0.8, 0.48; 0.48, 0.24];
    let pi = [0.5, 0.5];

    let ase = ase_block_moments(&b, &pi).unwrap();
    let got = chernoff_information(&ase).unwrap();
    let oracle = chernoff_grid_oracle(ase.mean(), ase.variance(), &pi);
    assert!(
        (got - oracle).abs() < 1e-5 * oracle,
        "adjacency objective {got} vs grid oracle {oracle}"
    );

    let model = BlockModel::new(b, pi.to_vec(), true).unwrap();
    let dase = dase_block_moments(&model, &[500.0, 500.0]).unwrap();
    let got = chernoff_information(&dase).unwrap();
    let oracle = chernoff_grid_oracle(dase.mean(), dase.variance(), &pi);
    assert!(
        (got - oracle).abs() < 1e-5 * oracle,
        "walk objective {got} vs grid oracle {oracle}"
    );

    // The asymmetric case exercises the left/right distinction in the
    // quadratic form.
    let b = nalgebra::dmatrix![0.7, 0.2; 0.5, 0.1];
    let model = BlockModel::new(b, vec![0.3, 0.7], true).unwrap();
    let dase = dase_block_moments(&model, &[120.0, 280.0]).unwrap();
    let got = chernoff_information(&dase).unwrap();
    let oracle = chernoff_grid_oracle(dase.mean(), dase.variance(), &[0.3, 0.7]);
    assert!(
        (got - oracle).abs() < 1e-5 * oracle,
        "asymmetric objective {got} vs grid oracle {oracle}"
    );
}

/// Large-sample mixture fit: planted two-component Gaussian data, means
/// recovered within three standard errors and labels near-perfect.
#[test]
fn gaussian_mixture_recovers_planted_components_at_scale() {
    let n = 4000;
    let mut rng = seeded_rng(211);
    let mut points = DMatrix::zeros(n, 2);
    let mut truth = vec![0u32; n];
    let centers = [(0.0, 0.0), (4.0, 4.0)];
    let mut counts = [0usize; 2];
    for i in 0..n {
        let block = usize::from(rng.gen::<f64>() < 0.6);
        truth[i] = block as u32;
        counts[block] += 1;
        let (cx, cy) = centers[block];
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        points[(i, 0)] = cx + radius * angle.cos();
        points[(i, 1)] = cy + radius * angle.sin();
    }

    let fit = gmm(&points, 2, &GmmConfig::default(), 5).unwrap();
    let truth = ClusterLabels::from_labels(truth, 2).unwrap();
    let wrong = misclustering(&truth, &fit.labels).unwrap();
    assert!(
        wrong.rate < 0.02,
        "mixture misclustering rate {} too high",
        wrong.rate
    );

    // Match fitted components to planted ones through the permutation the
    // misclustering search found, then compare moments.
    for est in 0..2 {
        let planted = wrong.best_perm[est] as usize;
        let (cx, cy) = centers[planted];
        // Unit-variance components: the mean of n_k draws has SE 1/√n_k.
        // A small floor absorbs the bias from the ~0.3% of overlap mass.
        let tol = (3.0 / (counts[planted] as f64).sqrt()).max(0.03);
        assert!(
            (fit.means[(est, 0)] - cx).abs() < tol,
            "component {est} mean x {} vs {cx}",
            fit.means[(est, 0)]
        );
        assert!(
            (fit.means[(est, 1)] - cy).abs() < tol,
            "component {est} mean y {} vs {cy}",
            fit.means[(est, 1)]
        );
        let weight_target = counts[planted] as f64 / n as f64;
        assert!(
            (fit.weights[est] - weight_target).abs() < 0.03,
            "component {est} weight {} vs {weight_target}",
            fit.weights[est]
        );
    }
}

fn labels_strategy() -> impl Strategy<Value = (Vec<u32>, usize)> {
    (2usize..40, 1usize..5).prop_flat_map(|(n, k)| {
        (
            proptest::collection::vec(0u32..k as u32, n),
            Just(k),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Mutual information is symmetric in its arguments, bounded by [0,1],
    /// and exactly 1 against itself.
    #[test]
    fn mutual_information_properties((raw_a, ka) in labels_strategy(), (raw_b, kb) in labels_strategy()) {
        let n = raw_a.len().min(raw_b.len());
        let a = ClusterLabels::from_labels(raw_a[..n].to_vec(), ka).unwrap();
        let b = ClusterLabels::from_labels(raw_b[..n].to_vec(), kb).unwrap();

        let ab = nmi(&a, &b).unwrap();
        let ba = nmi(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12, "asymmetry: {ab} vs {ba}");
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(nmi(&a, &a).unwrap(), 1.0);
    }

    /// Relabeling one side by any permutation of its label alphabet must not
    /// change the score, and scoring a partition against its own relabeling
    /// is exact agreement.
    #[test]
    fn relabeling_does_not_change_agreement(
        (raw, k) in labels_strategy(),
        rot in 1usize..5,
    ) {
        let a = ClusterLabels::from_labels(raw.clone(), k).unwrap();
        let rotated: Vec<u32> = raw.iter().map(|&l| (l + rot as u32) % k as u32).collect();
        let b = ClusterLabels::from_labels(rotated, k).unwrap();

        prop_assert_eq!(nmi(&a, &b).unwrap(), 1.0);
        let wrong = misclustering(&a, &b).unwrap();
        prop_assert_eq!(wrong.count, 0);
        prop_assert_eq!(wrong.rate, 0.0);
    }

    /// Misclustering counts are symmetric: the optimal matching of a
    /// confusion table and of its transpose recover the same overlap.
    #[test]
    fn misclustering_count_is_symmetric((raw_a, ka) in labels_strategy(), (raw_b, kb) in labels_strategy()) {
        let n = raw_a.len().min(raw_b.len());
        let a = ClusterLabels::from_labels(raw_a[..n].to_vec(), ka).unwrap();
        let b = ClusterLabels::from_labels(raw_b[..n].to_vec(), kb).unwrap();
        let ab = misclustering(&a, &b).unwrap();
        let ba = misclustering(&b, &a).unwrap();
        prop_assert_eq!(ab.count, ba.count);
        prop_assert!((0.0..=1.0).contains(&ab.rate));
    }

    /// The normalized separation constants stay inside their closed-form
    /// range: each per-side term is in (0, N] and the combined constants in
    /// (0, 2], for any parameter set obeying the core-periphery ordering.
    #[test]
    fn separation_constants_stay_in_range(
        p in 0.3f64..0.95,
        qf in 0.2f64..0.9,
        rf in 0.2f64..0.9,
        sf in 0.1f64..0.9,
        pi1 in 0.05f64..0.95,
    ) {
        let q = p * qf;
        let r = p * rf;
        let s = q.min(r) * sf;
        let params = CorePeripheryParams::new(p, q, r, s).unwrap();
        let n = 1000;
        let t = t_constants(&params, &[pi1, 1.0 - pi1], n).unwrap();

        prop_assert!(t.t1 > 0.0 && t.t1 <= n as f64 + 1e-9);
        prop_assert!(t.t2 > 0.0 && t.t2 <= n as f64 + 1e-9);
        prop_assert!(t.ttilde1 > 0.0 && t.ttilde1 <= n as f64 + 1e-9);
        prop_assert!(t.ttilde2 > 0.0 && t.ttilde2 <= n as f64 + 1e-9);
        prop_assert!(t.t > 0.0 && t.t <= 2.0 + 1e-12, "t = {}", t.t);
        prop_assert!(t.ttilde > 0.0 && t.ttilde <= 2.0 + 1e-12, "ttilde = {}", t.ttilde);
    }

    /// Two-step walk moments are always valid Chernoff inputs whenever B has
    /// no degenerate entries: positive variances, proportions on the simplex.
    #[test]
    fn walk_moments_are_valid_chernoff_inputs(
        b00 in 0.05f64..0.95,
        b01 in 0.05f64..0.95,
        b10 in 0.05f64..0.95,
        b11 in 0.05f64..0.95,
        n1 in 10usize..200,
        n2 in 10usize..200,
    ) {
        let b = nalgebra::dmatrix![b00, b01; b10, b11];
        let model = BlockModel::new(b, vec![0.5, 0.5], true).unwrap();
        let inputs = dase_block_moments(&model, &[n1 as f64, n2 as f64]).unwrap();
        prop_assert!(inputs.variance().iter().all(|&v| v > 0.0));
        let total: f64 = inputs.proportions().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        // Means are bounded by N, matching the walk-count range.
        let n = (n1 + n2) as f64;
        prop_assert!(inputs.mean().iter().all(|&m| m >= 0.0 && m <= n));
    }
}

/// Spot check that the assignment type agrees with the labels type about
/// counting, through the conversion used everywhere downstream.
#[test]
fn assignment_conversion_preserves_counts() {
    let assignment =
        CommunityAssignment::from_labels(vec![0, 1, 0, 1, 1, 0, 0], 2).unwrap();
    let labels = ClusterLabels::from(&assignment);
    assert_eq!(labels.counts(), vec![4, 3]);
    assert_eq!(assignment.sizes(), &[4, 3]);
}
