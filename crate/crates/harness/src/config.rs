//! Experiment configuration: a JSON-serializable description of a sweep
//! (which quantity varies, over which grid, with which methods) plus the
//! model parameters shared by all scenarios.
//!
//! Scenario defaults mirror the simulation study this harness reproduces:
//! 50 replicates, d = K = 2, the ratio matrix [[1, .6], [.6, .3]], density
//! scale 0.05 for size sweeps, N = 1000 for density and ratio sweeps.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use dase_core::graph::{scaled_block_matrix, BlockModel};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Fixed N, density scale s varies.
    DensitySweep,
    /// Fixed s, N varies.
    SizeSweep,
    /// Fixed N and s, core proportion π₁ varies.
    RatioSweep,
    /// Deterministic Chernoff information over an N grid (or π₁ grid when
    /// one is given).
    ChernoffSweep,
    /// Placeholder for configs that describe a dataset evaluation; sweeps
    /// reject it and point at the `evaluate` flow instead.
    RealData,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::DensitySweep => "density_sweep",
            Scenario::SizeSweep => "size_sweep",
            Scenario::RatioSweep => "ratio_sweep",
            Scenario::ChernoffSweep => "chernoff_sweep",
            Scenario::RealData => "real_data",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Sc,
    Ase,
    Dase,
}

impl MethodChoice {
    pub fn name(self) -> &'static str {
        match self {
            MethodChoice::Sc => "sc",
            MethodChoice::Ase => "ase",
            MethodChoice::Dase => "dase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ClustererChoice {
    Kmeans,
    Gmm,
}

impl ClustererChoice {
    pub fn name(self) -> &'static str {
        match self {
            ClustererChoice::Kmeans => "kmeans",
            ClustererChoice::Gmm => "gmm",
        }
    }
}

/// One resolved grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub s: f64,
    pub pi1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Ratio matrix R (row-major); the block matrix is B = s·R.
    #[serde(default = "default_ratios")]
    pub ratios: Vec<Vec<f64>>,
    /// Fixed density scale, where the scenario does not sweep it.
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub s_grid: Option<Vec<f64>>,
    /// Fixed node count, where the scenario does not sweep it.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
    /// Fixed core proportion π₁.
    #[serde(default)]
    pub pi1: Option<f64>,
    #[serde(default)]
    pub pi1_grid: Option<Vec<f64>>,
    #[serde(default = "default_true")]
    pub directed: bool,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodChoice>,
    #[serde(default = "default_clusterer")]
    pub clusterer: ClustererChoice,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Embedding rank.
    #[serde(default = "default_two")]
    pub d: usize,
    /// Cluster count.
    #[serde(default = "default_two")]
    pub k: usize,
    #[serde(default = "default_true")]
    pub scaled: bool,
    /// Keep one community assignment per grid point instead of resampling
    /// it every replicate.
    #[serde(default)]
    pub fixed_assignment: bool,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_ratios() -> Vec<Vec<f64>> {
    vec![vec![1.0, 0.6], vec![0.6, 0.3]]
}

fn default_true() -> bool {
    true
}

fn default_methods() -> Vec<MethodChoice> {
    vec![MethodChoice::Sc, MethodChoice::Ase, MethodChoice::Dase]
}

fn default_clusterer() -> ClustererChoice {
    ClustererChoice::Kmeans
}

fn default_replicates() -> usize {
    50
}

fn default_two() -> usize {
    2
}

impl ExperimentConfig {
    /// A blank config for the given scenario with every field at its
    /// scenario default.
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            ratios: default_ratios(),
            s: None,
            s_grid: None,
            n: None,
            n_grid: None,
            pi1: None,
            pi1_grid: None,
            directed: true,
            methods: default_methods(),
            clusterer: default_clusterer(),
            replicates: default_replicates(),
            d: 2,
            k: 2,
            scaled: true,
            fixed_assignment: false,
            master_seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).context("parsing experiment config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            bail!("replicates must be at least 1");
        }
        if self.methods.is_empty() {
            bail!("at least one embedding method is required");
        }
        if self.d == 0 || self.k == 0 {
            bail!("d and k must be positive");
        }
        let k = self.ratios.len();
        if k == 0 || self.ratios.iter().any(|row| row.len() != k) {
            bail!("ratio matrix must be square and nonempty");
        }
        for grid in [self.s_grid.as_deref().unwrap_or(&[])].into_iter() {
            if grid.iter().any(|&s| !(s > 0.0)) {
                bail!("density grid entries must be positive");
            }
        }
        Ok(())
    }

    pub fn ratio_matrix(&self) -> DMatrix<f64> {
        let k = self.ratios.len();
        DMatrix::from_fn(k, k, |i, j| self.ratios[i][j])
    }

    /// Resolves the sweep grid, applying scenario defaults for anything the
    /// config leaves unset.
    pub fn points(&self) -> Result<Vec<GridPoint>> {
        let n_fixed = self.n.unwrap_or(1000);
        let pi1_fixed = self.pi1.unwrap_or(0.5);
        let points: Vec<GridPoint> = match self.scenario {
            Scenario::DensitySweep => {
                let grid = self
                    .s_grid
                    .clone()
                    .unwrap_or_else(|| (1..=10).map(|i| i as f64 / 100.0).collect());
                grid.into_iter()
                    .map(|s| GridPoint { n: n_fixed, s, pi1: pi1_fixed })
                    .collect()
            }
            Scenario::SizeSweep => {
                let s = self.s.unwrap_or(0.05);
                let grid = self
                    .n_grid
                    .clone()
                    .unwrap_or_else(|| (1..=10).map(|i| i * 200).collect());
                grid.into_iter()
                    .map(|n| GridPoint { n, s, pi1: pi1_fixed })
                    .collect()
            }
            Scenario::RatioSweep => {
                let s = self.s.unwrap_or(0.08);
                let grid = self
                    .pi1_grid
                    .clone()
                    .unwrap_or_else(|| (1..=9).map(|i| i as f64 / 10.0).collect());
                grid.into_iter()
                    .map(|pi1| GridPoint { n: n_fixed, s, pi1 })
                    .collect()
            }
            Scenario::ChernoffSweep => {
                let s = self.s.unwrap_or(0.8);
                if let Some(grid) = &self.pi1_grid {
                    grid.iter()
                        .map(|&pi1| GridPoint { n: n_fixed, s, pi1 })
                        .collect()
                } else {
                    let grid = self
                        .n_grid
                        .clone()
                        .unwrap_or_else(|| (1..=10).map(|i| i * 200).collect());
                    grid.into_iter()
                        .map(|n| GridPoint { n, s, pi1: pi1_fixed })
                        .collect()
                }
            }
            Scenario::RealData => {
                bail!("the real_data scenario is evaluated through the dataset flow, not a sweep")
            }
        };
        if points.is_empty() {
            bail!("sweep grid is empty");
        }
        Ok(points)
    }

    /// The block model at one grid point.
    pub fn model_at(&self, point: &GridPoint) -> Result<BlockModel> {
        let b = scaled_block_matrix(point.s, &self.ratio_matrix())
            .with_context(|| format!("building B at s = {}", point.s))?;
        let k = self.ratios.len();
        let pi = if k == 2 {
            vec![point.pi1, 1.0 - point.pi1]
        } else {
            vec![1.0 / k as f64; k]
        };
        BlockModel::new(b, pi, self.directed).context("building block model")
    }
}
