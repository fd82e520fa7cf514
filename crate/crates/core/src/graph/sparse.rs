//! Sparse matrix storage for graphs.
//!
//! Two concrete CSR types rather than a generic one: the binary adjacency
//! matrix `A` (pattern only — every stored entry is 1) and its integer-valued
//! square `Ã = AA` whose entries count two-step walks. Both stay sparse:
//! sampled block-model graphs and the real networks this crate targets are
//! far below full density, and `Ã` of a sparse graph is usually still sparse.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Binary N×N adjacency matrix in compressed sparse row form.
///
/// Invariants: zero diagonal, entries in {0,1}, column indices sorted and
/// unique within each row, symmetric pattern iff `directed` is false.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    n: usize,
    directed: bool,
    indptr: Vec<usize>,
    indices: Vec<u32>,
}

impl AdjacencyMatrix {
    /// Builds from a list of edges. Each edge is an ordered pair `(i, j)`,
    /// i ≠ j; for undirected graphs pass each edge once in either orientation
    /// and the mirrored entry is added automatically. Duplicate edges
    /// collapse to a single entry.
    pub fn from_edges(n: usize, directed: bool, edges: &[(u32, u32)]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(if directed { edges.len() } else { 2 * edges.len() });
        for &(i, j) in edges {
            if i as usize >= n || j as usize >= n {
                return Err(Error::invalid(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at node {i}")));
            }
            pairs.push((i, j));
            if !directed {
                pairs.push((j, i));
            }
        }
        Ok(Self::from_pairs_dedup(n, directed, pairs))
    }

    /// Builds from pairs already known to be in range and loop-free.
    /// Used by the sampler, which guarantees both.
    pub(crate) fn from_pairs_dedup(n: usize, directed: bool, mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut indptr = vec![0usize; n + 1];
        for &(i, _) in &pairs {
            indptr[i as usize + 1] += 1;
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        let indices = pairs.iter().map(|&(_, j)| j).collect();
        AdjacencyMatrix {
            n,
            directed,
            indptr,
            indices,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Number of stored entries. For undirected graphs this is 2m (both
    /// orientations are stored); for directed graphs it is the edge count m.
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Edge count m: ordered pairs if directed, unordered pairs if not.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.nnz()
        } else {
            self.nnz() / 2
        }
    }

    /// Column indices of row `i`, sorted ascending.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.indices[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&(j as u32)).is_ok()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.row(i).len()).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &j in &self.indices {
            deg[j as usize] += 1;
        }
        deg
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for &j in self.row(i) {
                acc += x[j as usize];
            }
            y[i] = acc;
        }
    }

    /// y = Aᵀ x.
    pub fn matvec_t(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            let xi = x[i];
            if xi != 0.0 {
                for &j in self.row(i) {
                    y[j as usize] += xi;
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for &j in self.row(i) {
                m[(i, j as usize)] = 1.0;
            }
        }
        m
    }

    /// Exact sparse product A·A with integer accumulation: entry (i, j) is
    /// the number of two-step walks i → k → j.
    pub(crate) fn square(&self) -> (Vec<usize>, Vec<u32>, Vec<u32>) {
        let n = self.n;
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices: Vec<u32> = Vec::new();
        let mut values: Vec<u32> = Vec::new();
        indptr.push(0);

        // Sparse accumulator: counts scattered into a dense workspace, with a
        // touched-column list so clearing costs O(row nnz), not O(N).
        let mut acc = vec![0u32; n];
        let mut touched: Vec<u32> = Vec::new();
        for i in 0..n {
            touched.clear();
            for &k in self.row(i) {
                for &j in self.row(k as usize) {
                    if acc[j as usize] == 0 {
                        touched.push(j);
                    }
                    acc[j as usize] += 1;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                indices.push(j);
                values.push(acc[j as usize]);
                acc[j as usize] = 0;
            }
            indptr.push(indices.len());
        }
        (indptr, indices, values)
    }
}

/// Integer-valued N×N matrix `Ã = AA` in CSR form: entry (i, j) counts the
/// directed two-step walks i → k → j in the source graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledAdjacency {
    n: usize,
    /// Directedness of the generating adjacency matrix.
    directed: bool,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<u32>,
}

impl DoubledAdjacency {
    pub(crate) fn from_parts(
        n: usize,
        directed: bool,
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<u32>,
    ) -> Self {
        DoubledAdjacency {
            n,
            directed,
            indptr,
            indices,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Walk count for the pair (i, j); 0 if not stored.
    pub fn entry(&self, i: usize, j: usize) -> u32 {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        match self.indices[lo..hi].binary_search(&(j as u32)) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => 0,
        }
    }

    /// Sorted column indices and matching values of row `i`.
    pub fn row(&self, i: usize) -> (&[u32], &[u32]) {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn max_entry(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// y = Ã x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v as f64 * x[j as usize];
            }
            y[i] = acc;
        }
    }

    /// y = Ãᵀ x.
    pub fn matvec_t(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            let xi = x[i];
            if xi != 0.0 {
                let (cols, vals) = self.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    y[j as usize] += v as f64 * xi;
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j as usize)] = v as f64;
            }
        }
        m
    }
}
