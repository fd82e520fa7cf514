//! Evaluation flow for ingested real networks.
//!
//! Each method embeds the graph once and clusters it under many seeds; the
//! representative partition is the best fit (lowest k-means objective or
//! highest GMM likelihood). Separability is then summarized by the Chernoff
//! information of plug-in block moments — Bernoulli moments of A for the
//! adjacency-based methods, empirical walk-count moments of AA for the
//! doubled embedding — so the two embeddings are compared on the matrices
//! they actually decompose.

use nalgebra::DMatrix;
use rand::Rng;

use anyhow::Result;
use dase_core::cluster::{gmm, kmeans, ClusterLabels, GmmConfig, KMeansConfig};
use dase_core::embed::{ase_embedding, dase_embedding, laplacian_sc_embedding, ImplicitDoubled};
use dase_core::graph::{doubled_adjacency, edge_density, AdjacencyMatrix};
use dase_core::metrics::{
    chernoff_information, choose_k_profile_likelihood, misclustering, nmi, ChernoffInputs,
};
use dase_core::rng::stream_rng;
use dase_core::spectral::{truncated_svd, DEFAULT_TOL};
use serde::Serialize;

use crate::config::{ClustererChoice, MethodChoice};

#[derive(Debug, Clone)]
pub struct RealEvalOptions {
    pub methods: Vec<MethodChoice>,
    pub clusterer: ClustererChoice,
    /// Number of clusters fit to each embedding.
    pub k: usize,
    /// Embedding dimension for the adjacency and walk embeddings.
    pub d: usize,
    pub scaled: bool,
    pub seed: u64,
    /// Clustering repetitions per method; one embedding, many seeds.
    pub reseeds: usize,
}

impl Default for RealEvalOptions {
    fn default() -> Self {
        Self {
            methods: vec![MethodChoice::Sc, MethodChoice::Ase, MethodChoice::Dase],
            clusterer: ClustererChoice::Kmeans,
            k: 2,
            d: 2,
            scaled: true,
            seed: 0,
            reseeds: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodEvaluation {
    pub method: String,
    /// Agreement with ground truth over the clustering reseeds; absent
    /// when no truth labels were supplied.
    pub nmi_mean: Option<f64>,
    pub nmi_std: Option<f64>,
    /// Misclustering rate of the representative partition against truth.
    pub misclustering_rate: Option<f64>,
    /// Plug-in Chernoff information of the representative partition;
    /// absent when the empirical moments are degenerate (an empty block,
    /// or a block pair with no variation).
    pub chernoff_information: Option<f64>,
    pub cluster_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RealDatasetReport {
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub density: f64,
    pub directed: bool,
    pub per_method: Vec<MethodEvaluation>,
    /// Mean-NMI quotient doubled/adjacency when both were evaluated.
    pub nmi_ratio: Option<f64>,
    /// Chernoff-information quotient doubled/adjacency.
    pub ci_ratio: Option<f64>,
    /// Rank suggested by the profile-likelihood elbow of the walk spectrum.
    pub suggested_k: Option<usize>,
}

pub fn evaluate_real(
    dataset: &str,
    a: &AdjacencyMatrix,
    ground_truth: Option<&ClusterLabels>,
    opts: &RealEvalOptions,
) -> Result<RealDatasetReport> {
    if opts.reseeds == 0 {
        anyhow::bail!("at least one clustering reseed is required");
    }
    if let Some(truth) = ground_truth {
        if truth.n() != a.n() {
            anyhow::bail!(
                "ground truth labels {} nodes, graph has {}",
                truth.n(),
                a.n()
            );
        }
    }

    let doubled = doubled_adjacency(a);
    let mut per_method = Vec::with_capacity(opts.methods.len());
    for (index, &method) in opts.methods.iter().enumerate() {
        let mut rng = stream_rng(opts.seed, index as u64);
        let embed_seed: u64 = rng.gen();
        let embedding = match method {
            MethodChoice::Sc => laplacian_sc_embedding(a, opts.k, embed_seed)?,
            MethodChoice::Ase => ase_embedding(a, opts.d, opts.scaled, embed_seed)?,
            MethodChoice::Dase => dase_embedding(a, opts.d, opts.scaled, embed_seed)?,
        };

        let mut best: Option<(f64, ClusterLabels)> = None;
        let mut agreements = Vec::new();
        for _ in 0..opts.reseeds {
            let cluster_seed: u64 = rng.gen();
            let (labels, score) = match opts.clusterer {
                ClustererChoice::Kmeans => {
                    let fit = kmeans(&embedding.coords, opts.k, &KMeansConfig::default(), cluster_seed)?;
                    (fit.labels, fit.objective)
                }
                ClustererChoice::Gmm => {
                    let fit = gmm(&embedding.coords, opts.k, &GmmConfig::default(), cluster_seed)?;
                    (fit.labels, -fit.log_likelihood)
                }
            };
            if let Some(truth) = ground_truth {
                agreements.push(nmi(truth, &labels)?);
            }
            if best.as_ref().map_or(true, |(s, _)| score < *s) {
                best = Some((score, labels));
            }
        }
        let (_, representative) = best.expect("reseeds >= 1");

        let ci = match method {
            MethodChoice::Sc | MethodChoice::Ase => adjacency_plugin_ci(a, &representative),
            MethodChoice::Dase => walk_plugin_ci(&doubled, &representative),
        };
        let rate = ground_truth
            .and_then(|truth| misclustering(truth, &representative).ok())
            .map(|m| m.rate);
        per_method.push(MethodEvaluation {
            method: method.name().to_string(),
            nmi_mean: (!agreements.is_empty()).then(|| mean(&agreements)),
            nmi_std: (!agreements.is_empty()).then(|| sample_std(&agreements)),
            misclustering_rate: rate,
            chernoff_information: ci,
            cluster_sizes: representative.counts(),
        });
    }

    let find = |choice: MethodChoice| {
        opts.methods
            .iter()
            .position(|&m| m == choice)
            .map(|i| &per_method[i])
    };
    let ratio = |f: fn(&MethodEvaluation) -> Option<f64>| match (find(MethodChoice::Dase), find(MethodChoice::Ase)) {
        (Some(dase), Some(ase)) => match (f(dase), f(ase)) {
            (Some(num), Some(den)) if den > 0.0 => Some(num / den),
            _ => None,
        },
        _ => None,
    };
    let nmi_ratio = ratio(|e| e.nmi_mean);
    let ci_ratio = ratio(|e| e.chernoff_information);

    Ok(RealDatasetReport {
        dataset: dataset.to_string(),
        n: a.n(),
        m: a.edge_count(),
        density: edge_density(a)?,
        directed: a.directed(),
        per_method,
        nmi_ratio,
        ci_ratio,
        suggested_k: suggest_k(a, opts.seed),
    })
}

/// Plug-in Chernoff information of the Bernoulli block moments of A under
/// the given partition: means are between-block edge frequencies over
/// ordered off-diagonal pairs, variances the matching Bernoulli variances.
fn adjacency_plugin_ci(a: &AdjacencyMatrix, labels: &ClusterLabels) -> Option<f64> {
    let k = labels.k();
    let mut sums = DMatrix::<f64>::zeros(k, k);
    for i in 0..a.n() {
        let u = labels.label(i) as usize;
        for &j in a.row(i) {
            sums[(u, labels.label(j as usize) as usize)] += 1.0;
        }
    }
    finish_plugin_ci(labels, sums, None)
}

/// Same plug-in construction on the walk-count matrix AA. Entries are
/// integers, so second moments accumulate exactly; absent entries are
/// zeros counted through the pair totals.
fn walk_plugin_ci(doubled: &dase_core::graph::DoubledAdjacency, labels: &ClusterLabels) -> Option<f64> {
    let k = labels.k();
    let mut sums = DMatrix::<f64>::zeros(k, k);
    let mut sumsq = DMatrix::<f64>::zeros(k, k);
    for i in 0..doubled.n() {
        let u = labels.label(i) as usize;
        let (cols, vals) = doubled.row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            if j as usize == i {
                continue;
            }
            let v = labels.label(j as usize) as usize;
            let w = w as f64;
            sums[(u, v)] += w;
            sumsq[(u, v)] += w * w;
        }
    }
    finish_plugin_ci(labels, sums, Some(sumsq))
}

/// Divides pairwise sums by ordered off-diagonal pair counts and hands the
/// moments to the Chernoff computation. `sumsq` = None means Bernoulli
/// entries, where the variance is determined by the mean.
fn finish_plugin_ci(
    labels: &ClusterLabels,
    sums: DMatrix<f64>,
    sumsq: Option<DMatrix<f64>>,
) -> Option<f64> {
    let k = labels.k();
    let counts = labels.counts();
    let mut mean = DMatrix::<f64>::zeros(k, k);
    let mut var = DMatrix::<f64>::zeros(k, k);
    for u in 0..k {
        for v in 0..k {
            let pairs = counts[u] * counts[v] - if u == v { counts[u] } else { 0 };
            if pairs == 0 {
                return None;
            }
            let m = sums[(u, v)] / pairs as f64;
            mean[(u, v)] = m;
            var[(u, v)] = match &sumsq {
                Some(sq) => sq[(u, v)] / pairs as f64 - m * m,
                None => m * (1.0 - m),
            };
        }
    }
    let n: usize = counts.iter().sum();
    let pi: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let inputs = ChernoffInputs::new(mean, var, pi).ok()?;
    chernoff_information(&inputs).ok()
}

/// Ranks the walk matrix by the profile-likelihood elbow of its leading
/// singular values.
fn suggest_k(a: &AdjacencyMatrix, seed: u64) -> Option<usize> {
    let lead = 12.min(a.n().saturating_sub(1));
    if lead < 3 {
        return None;
    }
    let op = ImplicitDoubled::new(a);
    let svd = truncated_svd(&op, lead, DEFAULT_TOL, stream_rng(seed, u64::MAX).gen()).ok()?;
    choose_k_profile_likelihood(&svd.sigma, lead - 1).ok()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}
