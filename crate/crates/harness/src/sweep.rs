//! Replicated simulation sweeps and deterministic Chernoff sweeps.
//!
//! Replicates run in a rayon pool but are collected in index order and every
//! replicate derives its own RNG stream from (master seed, grid index,
//! replicate index), so results are byte-identical regardless of thread
//! count. Solver failures are recorded in the replicate log and excluded
//! from the aggregates with a count — never silently dropped.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use dase_core::cluster::{gmm, kmeans, ClusterLabels, GmmConfig, KMeansConfig};
use dase_core::embed::{ase_embedding, dase_embedding, laplacian_sc_embedding};
use dase_core::graph::{
    expected_density, sample_assignment, sample_sbm, AdjacencyMatrix, BlockModel,
    CommunityAssignment,
};
use dase_core::metrics::{ase_block_moments, chernoff_information, dase_block_moments, nmi};
use dase_core::rng::{grid_stream, stream_rng};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ClustererChoice, ExperimentConfig, GridPoint, MethodChoice, Scenario};

/// Replicate index reserved for the shared assignment in fixed-assignment
/// mode; ordinary replicates are numbered from zero and never reach it.
const FIXED_ASSIGNMENT_REP: usize = u32::MAX as usize;

/// Aggregated result for one (grid point, method) cell.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub n: usize,
    pub s: f64,
    pub pi1: f64,
    /// Expected edge density of the model at this grid point.
    pub density: f64,
    pub method: String,
    pub clusterer: String,
    pub mean_nmi: f64,
    pub std_nmi: f64,
    pub mean_runtime_s: f64,
    /// Number of successful replicates the aggregates cover.
    pub replicates: usize,
    pub failures: usize,
}

/// One replicate × method record, kept verbatim so aggregates can be audited.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRecord {
    pub grid_index: usize,
    pub n: usize,
    pub s: f64,
    pub pi1: f64,
    pub method: String,
    pub replicate: usize,
    pub nmi: Option<f64>,
    pub runtime_s: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SummaryRow>,
    pub log: Vec<ReplicateRecord>,
}

/// Deterministic Chernoff-information values at one grid point.
#[derive(Debug, Clone, Serialize)]
pub struct ChernoffRow {
    pub n: usize,
    pub s: f64,
    pub pi1: f64,
    pub density: f64,
    pub ci_ase: f64,
    pub ci_dase: f64,
    pub ci_ratio: f64,
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    if config.scenario == Scenario::ChernoffSweep {
        bail!("chernoff_sweep has no replicates; use run_chernoff_sweep");
    }
    let points = config.points()?;

    let mut rows = Vec::new();
    let mut log = Vec::new();
    for (grid_index, point) in points.iter().enumerate() {
        let model = config.model_at(point)?;
        let shared_assignment = if config.fixed_assignment {
            let mut rng = stream_rng(
                config.master_seed,
                grid_stream(grid_index, FIXED_ASSIGNMENT_REP),
            );
            let seed = rng.gen();
            Some(sample_assignment(model.pi(), point.n, seed)?)
        } else {
            None
        };

        let replicate_results: Vec<Vec<ReplicateRecord>> = (0..config.replicates)
            .into_par_iter()
            .map(|rep| {
                run_replicate(
                    config,
                    grid_index,
                    point,
                    &model,
                    shared_assignment.as_ref(),
                    rep,
                )
            })
            .collect();

        for method in &config.methods {
            let name = method.name();
            let cell: Vec<&ReplicateRecord> = replicate_results
                .iter()
                .flatten()
                .filter(|r| r.method == name)
                .collect();
            let ok: Vec<&&ReplicateRecord> =
                cell.iter().filter(|r| r.error.is_none()).collect();
            let failures = cell.len() - ok.len();
            let nmis: Vec<f64> = ok.iter().filter_map(|r| r.nmi).collect();
            let runtimes: Vec<f64> = ok.iter().filter_map(|r| r.runtime_s).collect();
            rows.push(SummaryRow {
                scenario: config.scenario.name().to_string(),
                n: point.n,
                s: point.s,
                pi1: point.pi1,
                density: expected_density(&model),
                method: name.to_string(),
                clusterer: config.clusterer.name().to_string(),
                mean_nmi: mean(&nmis),
                std_nmi: sample_std(&nmis),
                mean_runtime_s: mean(&runtimes),
                replicates: nmis.len(),
                failures,
            });
        }
        for mut records in replicate_results {
            log.append(&mut records);
        }
    }
    Ok(SweepOutput { rows, log })
}

/// A sweep over the core proportion π₁; everything else follows `run_sweep`.
pub fn run_ratio_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    let mut config = config.clone();
    config.scenario = Scenario::RatioSweep;
    run_sweep(&config)
}

/// Chernoff information on the sweep grid — closed-form block moments, no
/// sampling. Expected block sizes π_i·N feed the walk-moment construction.
pub fn run_chernoff_sweep(config: &ExperimentConfig) -> Result<Vec<ChernoffRow>> {
    config.validate()?;
    let mut config = config.clone();
    config.scenario = Scenario::ChernoffSweep;
    let points = config.points()?;

    let mut rows = Vec::with_capacity(points.len());
    for point in &points {
        let model = config.model_at(point)?;
        let ci_ase = chernoff_information(&ase_block_moments(model.b(), model.pi())?)
            .with_context(|| format!("adjacency Chernoff information at n = {}", point.n))?;
        let sizes: Vec<f64> = model.pi().iter().map(|&p| p * point.n as f64).collect();
        let ci_dase = chernoff_information(&dase_block_moments(&model, &sizes)?)
            .with_context(|| format!("walk Chernoff information at n = {}", point.n))?;
        rows.push(ChernoffRow {
            n: point.n,
            s: point.s,
            pi1: point.pi1,
            density: expected_density(&model),
            ci_ase,
            ci_dase,
            ci_ratio: ci_dase / ci_ase,
        });
    }
    Ok(rows)
}

fn run_replicate(
    config: &ExperimentConfig,
    grid_index: usize,
    point: &GridPoint,
    model: &BlockModel,
    shared_assignment: Option<&CommunityAssignment>,
    rep: usize,
) -> Vec<ReplicateRecord> {
    let mut rng = stream_rng(config.master_seed, grid_stream(grid_index, rep));
    let assignment_seed: u64 = rng.gen();
    let graph_seed: u64 = rng.gen();
    let embed_seed: u64 = rng.gen();
    let cluster_seed: u64 = rng.gen();

    let record = |method: MethodChoice, outcome: Result<(f64, f64)>| {
        let (nmi, runtime, error) = match outcome {
            Ok((value, seconds)) => (Some(value), Some(seconds), None),
            Err(err) => (None, None, Some(format!("{err:#}"))),
        };
        ReplicateRecord {
            grid_index,
            n: point.n,
            s: point.s,
            pi1: point.pi1,
            method: method.name().to_string(),
            replicate: rep,
            nmi,
            runtime_s: runtime,
            error,
        }
    };

    // Sampling failures (degenerate assignment draws) abort the whole
    // replicate: every method shares the sample, so each records the error.
    let prepared: Result<(CommunityAssignment, AdjacencyMatrix)> = (|| {
        let assignment = match shared_assignment {
            Some(shared) => shared.clone(),
            None => sample_assignment(model.pi(), point.n, assignment_seed)?,
        };
        let graph = sample_sbm(model, &assignment, graph_seed)?;
        Ok((assignment, graph))
    })();
    let (assignment, graph) = match prepared {
        Ok(pair) => pair,
        Err(err) => {
            let message = format!("{err:#}");
            return config
                .methods
                .iter()
                .map(|&m| record(m, Err(anyhow::anyhow!(message.clone()))))
                .collect();
        }
    };
    let truth = ClusterLabels::from(&assignment);

    config
        .methods
        .iter()
        .map(|&method| {
            let outcome = run_method(config, method, &graph, &truth, embed_seed, cluster_seed);
            record(method, outcome)
        })
        .collect()
}

/// Embeds and clusters one sampled graph; the reported runtime covers
/// exactly those two stages.
fn run_method(
    config: &ExperimentConfig,
    method: MethodChoice,
    graph: &AdjacencyMatrix,
    truth: &ClusterLabels,
    embed_seed: u64,
    cluster_seed: u64,
) -> Result<(f64, f64)> {
    let start = Instant::now();
    let embedding = match method {
        MethodChoice::Sc => laplacian_sc_embedding(graph, config.k, embed_seed)?,
        MethodChoice::Ase => ase_embedding(graph, config.d, config.scaled, embed_seed)?,
        MethodChoice::Dase => dase_embedding(graph, config.d, config.scaled, embed_seed)?,
    };
    let labels = match config.clusterer {
        ClustererChoice::Kmeans => {
            kmeans(&embedding.coords, config.k, &KMeansConfig::default(), cluster_seed)?.labels
        }
        ClustererChoice::Gmm => {
            gmm(&embedding.coords, config.k, &GmmConfig::default(), cluster_seed)?.labels
        }
    };
    let runtime = start.elapsed().as_secs_f64();
    let agreement = nmi(truth, &labels)?;
    Ok((agreement, runtime))
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
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

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        let mut config = ExperimentConfig::new(Scenario::SizeSweep);
        config.n_grid = Some(vec![120]);
        config.s = Some(0.4);
        config.replicates = 3;
        config.methods = vec![MethodChoice::Ase, MethodChoice::Dase];
        config.master_seed = 5;
        config
    }

    #[test]
    fn sweep_rows_follow_grid_then_method_order() {
        let mut config = tiny_config();
        config.n_grid = Some(vec![60, 120]);
        let out = run_sweep(&config).unwrap();
        assert_eq!(out.rows.len(), 4);
        assert_eq!(out.rows[0].n, 60);
        assert_eq!(out.rows[0].method, "ase");
        assert_eq!(out.rows[1].n, 60);
        assert_eq!(out.rows[1].method, "dase");
        assert_eq!(out.rows[2].n, 120);
        assert_eq!(out.log.len(), 2 * 3 * 2);
    }

    #[test]
    fn aggregates_match_direct_recomputation_from_the_log() {
        let out = run_sweep(&tiny_config()).unwrap();
        for row in &out.rows {
            let values: Vec<f64> = out
                .log
                .iter()
                .filter(|r| r.method == row.method && r.n == row.n && r.error.is_none())
                .filter_map(|r| r.nmi)
                .collect();
            assert_eq!(values.len(), row.replicates);
            assert!((mean(&values) - row.mean_nmi).abs() < 1e-15);
            assert!((sample_std(&values) - row.std_nmi).abs() < 1e-15);
        }
    }

    #[test]
    fn reruns_are_identical_and_single_replicate_has_zero_std() {
        let mut config = tiny_config();
        config.replicates = 1;
        let first = run_sweep(&config).unwrap();
        let second = run_sweep(&config).unwrap();
        assert_eq!(first.rows.len(), second.rows.len());
        for (a, b) in first.rows.iter().zip(&second.rows) {
            assert_eq!(a.mean_nmi.to_bits(), b.mean_nmi.to_bits());
            assert_eq!(a.std_nmi, 0.0);
            assert_eq!(a.replicates, 1);
            assert_eq!(a.failures, 0);
        }
    }

    #[test]
    fn fixed_assignment_reuses_one_partition_per_grid_point() {
        let mut config = tiny_config();
        config.fixed_assignment = true;
        config.replicates = 2;
        // With a shared assignment and a well-separated dense model, both
        // replicates cluster the same ground truth; the sweep must still
        // differ across replicates through the resampled graphs.
        let out = run_sweep(&config).unwrap();
        assert!(out.rows.iter().all(|r| r.failures == 0));
    }

    #[test]
    fn chernoff_sweep_is_deterministic_and_rejects_replicated_path() {
        let mut config = ExperimentConfig::new(Scenario::ChernoffSweep);
        config.n_grid = Some(vec![200, 400]);
        let rows = run_chernoff_sweep(&config).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.ci_dase > 0.0 && row.ci_ase > 0.0);
            assert!((row.ci_ratio - row.ci_dase / row.ci_ase).abs() < 1e-15);
        }
        let again = run_chernoff_sweep(&config).unwrap();
        assert_eq!(rows[0].ci_dase.to_bits(), again[0].ci_dase.to_bits());
        assert!(run_sweep(&config).is_err());
    }

    #[test]
    fn dense_well_separated_model_is_fully_recovered() {
        let mut config = ExperimentConfig::new(Scenario::SizeSweep);
        config.n_grid = Some(vec![150]);
        config.s = Some(0.9);
        config.ratios = vec![vec![1.0, 0.1], vec![0.1, 0.8]];
        config.replicates = 2;
        config.methods = vec![MethodChoice::Sc, MethodChoice::Ase, MethodChoice::Dase];
        let out = run_sweep(&config).unwrap();
        for row in &out.rows {
            assert!(
                row.mean_nmi > 0.99,
                "{} mean NMI {} on a trivially separable model",
                row.method,
                row.mean_nmi
            );
        }
    }
}
