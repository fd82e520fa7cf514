//! Generative model and graph construction: stochastic block models, the
//! core-periphery parameterization, sampled adjacency matrices, the doubled
//! adjacency matrix, and expected (population) matrices.

mod expected;
mod sample;
mod sparse;

pub use expected::{
    edge_density, expected_density, expected_matrices, latent_positions, scaled_block_matrix,
    ExpectedMatrices,
};
pub(crate) use expected::btilde_matrix_f;
pub use sample::{sample_assignment, sample_sbm};
pub use sparse::{AdjacencyMatrix, DoubledAdjacency};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Stochastic block model parameters: a K×K edge-probability matrix `B`,
/// group proportions `π`, and directedness.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    b: DMatrix<f64>,
    pi: Vec<f64>,
    directed: bool,
}

impl BlockModel {
    pub fn new(b: DMatrix<f64>, pi: Vec<f64>, directed: bool) -> Result<Self> {
        if b.nrows() != b.ncols() {
            return Err(Error::mismatch(format!(
                "B must be square, got {}×{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if b.nrows() != pi.len() {
            return Err(Error::mismatch(format!(
                "B is {}×{} but pi has {} entries",
                b.nrows(),
                b.nrows(),
                pi.len()
            )));
        }
        if pi.is_empty() {
            return Err(Error::invalid("model needs at least one block"));
        }
        if b.iter().any(|&x| !(0.0..=1.0).contains(&x) || x.is_nan()) {
            return Err(Error::invalid("B entries must lie in [0, 1]"));
        }
        if pi.iter().any(|&x| x <= 0.0 || x.is_nan()) {
            return Err(Error::invalid("pi entries must be strictly positive"));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("pi must sum to 1, got {total}")));
        }
        if !directed {
            for i in 0..b.nrows() {
                for j in (i + 1)..b.ncols() {
                    if (b[(i, j)] - b[(j, i)]).abs() > 1e-12 {
                        return Err(Error::invalid("undirected model requires symmetric B"));
                    }
                }
            }
        }
        Ok(BlockModel { b, pi, directed })
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn directed(&self) -> bool {
        self.directed
    }
}

/// Core-periphery edge probabilities: within-core `p`, core→periphery `q`,
/// periphery→core `r`, within-periphery `s`, with the defining ordering
/// s < q, r < p (a dense core, a sparse periphery, intermediate cross links).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorePeripheryParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl CorePeripheryParams {
    pub fn new(p: f64, q: f64, r: f64, s: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q), ("r", r), ("s", s)] {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::invalid(format!("{name} = {v} is not a probability")));
            }
        }
        if !(s < q && s < r && q < p && r < p) {
            return Err(Error::invalid(format!(
                "core-periphery ordering s < q, r < p violated: p={p}, q={q}, r={r}, s={s}"
            )));
        }
        Ok(CorePeripheryParams { p, q, r, s })
    }

    /// The 2×2 block matrix [[p, q], [r, s]] with block 0 as the core.
    pub fn block_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.p, self.q, self.r, self.s])
    }

    /// Full block model with core proportion `pi1`. Undirected models
    /// require q = r (symmetric cross-block probability).
    pub fn to_block_model(&self, pi1: f64, directed: bool) -> Result<BlockModel> {
        if !(0.0..1.0).contains(&pi1) || pi1 <= 0.0 {
            return Err(Error::invalid(format!("pi1 = {pi1} must lie in (0, 1)")));
        }
        if !directed && (self.q - self.r).abs() > 1e-12 {
            return Err(Error::invalid("undirected core-periphery model needs q = r"));
        }
        BlockModel::new(self.block_matrix(), vec![pi1, 1.0 - pi1], directed)
    }

    /// Reads (p, q, r, s) off a 2-block model if the ordering holds.
    pub fn from_block_model(model: &BlockModel) -> Option<Self> {
        if model.k() != 2 {
            return None;
        }
        let b = model.b();
        Self::new(b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]).ok()
    }
}

/// Block membership of N nodes: 0-based labels and per-block sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityAssignment {
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl CommunityAssignment {
    /// Wraps explicit labels (values in 0..k). Blocks may be empty here —
    /// sampled assignments guarantee nonempty blocks, hand-built ones need
    /// not.
    pub fn from_labels(labels: Vec<u32>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            if l as usize >= k {
                return Err(Error::invalid(format!("label {l} out of range for k = {k}")));
            }
            sizes[l as usize] += 1;
        }
        Ok(CommunityAssignment { labels, sizes })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    /// n_i = #{u : τ(u) = i}.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// min_i n_i / N, the minimum block proportion π̃.
    pub fn min_proportion(&self) -> f64 {
        let n = self.n().max(1);
        *self.sizes.iter().min().unwrap() as f64 / n as f64
    }

    /// Node ids grouped by block, ascending within each block.
    pub fn nodes_by_block(&self) -> Vec<Vec<u32>> {
        let mut groups = vec![Vec::new(); self.k()];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l as usize].push(i as u32);
        }
        groups
    }
}

/// Computes the doubled adjacency matrix Ã = AA. Entry (i, j) is the exact
/// number of two-step walks i → k → j; the diagonal is kept as computed
/// (Ã_ii counts 2-cycles through i, which for undirected graphs is the
/// degree of i).
pub fn doubled_adjacency(a: &AdjacencyMatrix) -> DoubledAdjacency {
    let (indptr, indices, values) = a.square();
    DoubledAdjacency::from_parts(a.n(), a.directed(), indptr, indices, values)
}
