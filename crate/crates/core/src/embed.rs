//! Node embeddings for community detection: adjacency spectral embedding
//! (ASE), doubled adjacency spectral embedding (DASE), and a normalized
//! Laplacian spectral-clustering baseline.
//!
//! ASE embeds the adjacency matrix directly. DASE embeds the doubled
//! adjacency Ã = AA, whose entries count directed two-step walks; its
//! leading singular subspace separates core-periphery blocks that plain
//! adjacency embeddings blur. For a directed graph both methods concatenate
//! the source and target factors into [Ũ_d Σ̃_d^{1/2} | Ṽ_d Σ̃_d^{1/2}]
//! (2d columns); undirected graphs keep the single factor Ũ_d Σ̃_d^{1/2}.
//! `scaled = false` drops the Σ^{1/2} weighting and returns bare
//! singular-vector rows, the form the consistency theory clusters.

use std::io::{self, Write};

use nalgebra::DMatrix;

use crate::graph::{AdjacencyMatrix, DoubledAdjacency};
use crate::spectral::{symmetric_eigs, truncated_svd, LinearOperator, Which, DEFAULT_TOL};
use crate::{Error, Result};

/// Which embedding produced a coordinate matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingMethod {
    /// Normalized Laplacian spectral clustering baseline.
    Sc,
    /// Adjacency spectral embedding.
    Ase,
    /// Doubled adjacency spectral embedding.
    Dase,
}

impl EmbeddingMethod {
    pub fn name(self) -> &'static str {
        match self {
            EmbeddingMethod::Sc => "sc",
            EmbeddingMethod::Ase => "ase",
            EmbeddingMethod::Dase => "dase",
        }
    }
}

/// Node coordinates produced by one of the embedding methods.
///
/// `coords` is N×m with m = d (undirected ASE/DASE), 2d (directed ASE/DASE),
/// or K (the Laplacian baseline, which ignores `scaled`).
#[derive(Debug, Clone)]
pub struct Embedding {
    pub coords: DMatrix<f64>,
    pub method: EmbeddingMethod,
    pub d: usize,
    pub scaled: bool,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    /// Writes the coordinates as CSV with header `node,coord_0,...,coord_{m-1}`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write!(out, "node")?;
        for j in 0..self.coords.ncols() {
            write!(out, ",coord_{j}")?;
        }
        writeln!(out)?;
        for i in 0..self.coords.nrows() {
            write!(out, "{i}")?;
            for j in 0..self.coords.ncols() {
                write!(out, ",{}", self.coords[(i, j)])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

impl LinearOperator for AdjacencyMatrix {
    fn nrows(&self) -> usize {
        self.n()
    }

    fn ncols(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_t(x, y);
    }

    fn to_dense(&self) -> DMatrix<f64> {
        AdjacencyMatrix::to_dense(self)
    }
}

impl LinearOperator for DoubledAdjacency {
    fn nrows(&self) -> usize {
        self.n()
    }

    fn ncols(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_t(x, y);
    }

    fn to_dense(&self) -> DMatrix<f64> {
        DoubledAdjacency::to_dense(self)
    }
}

/// Matrix-free view of Ã = AA: each product costs two sparse matvecs, so no
/// explicit squaring is needed to embed large graphs.
pub struct ImplicitDoubled<'a> {
    a: &'a AdjacencyMatrix,
    scratch_len: usize,
}

impl<'a> ImplicitDoubled<'a> {
    pub fn new(a: &'a AdjacencyMatrix) -> Self {
        Self {
            a,
            scratch_len: a.n(),
        }
    }
}

impl LinearOperator for ImplicitDoubled<'_> {
    fn nrows(&self) -> usize {
        self.scratch_len
    }

    fn ncols(&self) -> usize {
        self.scratch_len
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut t = vec![0.0; self.scratch_len];
        self.a.matvec(x, &mut t);
        self.a.matvec(&t, y);
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let mut t = vec![0.0; self.scratch_len];
        self.a.matvec_t(x, &mut t);
        self.a.matvec_t(&t, y);
    }
}

/// Spectral embedding of an arbitrary operator: top-d SVD, then either the
/// single left block (undirected) or the [left | right] concatenation
/// (directed), with optional Σ^{1/2} column scaling.
pub fn embed_operator(
    m: &dyn LinearOperator,
    directed: bool,
    method: EmbeddingMethod,
    d: usize,
    scaled: bool,
    seed: u64,
) -> Result<Embedding> {
    let svd = truncated_svd(m, d, DEFAULT_TOL, seed)?;
    let n = m.nrows();
    let cols = if directed { 2 * d } else { d };
    let mut coords = DMatrix::zeros(n, cols);
    let weights: Vec<f64> = svd.sigma.iter().map(|s| if scaled { s.sqrt() } else { 1.0 }).collect();
    for k in 0..d {
        for i in 0..n {
            coords[(i, k)] = svd.u[(i, k)] * weights[k];
        }
    }
    if directed {
        for k in 0..d {
            for i in 0..n {
                coords[(i, d + k)] = svd.v[(i, k)] * weights[k];
            }
        }
    }
    Ok(Embedding {
        coords,
        method,
        d,
        scaled,
    })
}

/// Doubled adjacency spectral embedding of a graph.
///
/// Computes the top-d SVD of Ã = AA without materializing it. Directed
/// graphs yield 2d columns [Ũ_d Σ̃_d^{1/2} | Ṽ_d Σ̃_d^{1/2}]; undirected
/// graphs yield Ũ_d Σ̃_d^{1/2}.
pub fn dase_embedding(a: &AdjacencyMatrix, d: usize, scaled: bool, seed: u64) -> Result<Embedding> {
    let op = ImplicitDoubled::new(a);
    embed_operator(&op, a.directed(), EmbeddingMethod::Dase, d, scaled, seed)
}

/// Adjacency spectral embedding: the same construction applied to A itself.
pub fn ase_embedding(a: &AdjacencyMatrix, d: usize, scaled: bool, seed: u64) -> Result<Embedding> {
    embed_operator(a, a.directed(), EmbeddingMethod::Ase, d, scaled, seed)
}

/// Symmetrized binary adjacency scaled by D^{-1/2} on both sides; degree-0
/// vertices get a zero scaling entry, so their rows and columns vanish.
struct NormalizedAdjacency {
    s: AdjacencyMatrix,
    dinv_sqrt: Vec<f64>,
}

impl LinearOperator for NormalizedAdjacency {
    fn nrows(&self) -> usize {
        self.s.n()
    }

    fn ncols(&self) -> usize {
        self.s.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let scaled: Vec<f64> = x
            .iter()
            .zip(&self.dinv_sqrt)
            .map(|(xi, di)| xi * di)
            .collect();
        self.s.matvec(&scaled, y);
        for (yi, di) in y.iter_mut().zip(&self.dinv_sqrt) {
            *yi *= di;
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.apply(x, y);
    }
}

/// Laplacian spectral clustering coordinates.
///
/// The graph is symmetrized ((A + Aᵀ)/2 thresholded to binary, i.e. an edge
/// in either direction counts) and embedded with the K eigenvectors of
/// D^{-1/2} A D^{-1/2} of largest eigenvalue — the same subspace as the K
/// smallest eigenvalues of the symmetric normalized Laplacian
/// L_sym = I − D^{-1/2} A D^{-1/2}. Rows are normalized to unit length;
/// rows of isolated vertices stay zero.
pub fn laplacian_sc_embedding(a: &AdjacencyMatrix, k: usize, seed: u64) -> Result<Embedding> {
    if a.nnz() == 0 {
        return Err(Error::degenerate(
            "Laplacian embedding of an all-zero graph",
        ));
    }
    let s = symmetrize_binary(a);
    let degrees = s.out_degrees();
    let dinv_sqrt: Vec<f64> = degrees
        .iter()
        .map(|&deg| if deg == 0 { 0.0 } else { 1.0 / (deg as f64).sqrt() })
        .collect();
    let op = NormalizedAdjacency { s, dinv_sqrt };
    let eig = symmetric_eigs(&op, k, Which::Largest, DEFAULT_TOL, seed)?;

    let n = a.n();
    let mut coords = DMatrix::zeros(n, k);
    for i in 0..n {
        let mut norm_sq = 0.0;
        for j in 0..k {
            let e = eig.vectors[(i, j)];
            coords[(i, j)] = e;
            norm_sq += e * e;
        }
        let norm = norm_sq.sqrt();
        if norm > 1e-12 {
            for j in 0..k {
                coords[(i, j)] /= norm;
            }
        } else {
            for j in 0..k {
                coords[(i, j)] = 0.0;
            }
        }
    }
    Ok(Embedding {
        coords,
        method: EmbeddingMethod::Sc,
        d: k,
        scaled: false,
    })
}

/// Union of edge directions as an undirected pattern-only matrix.
fn symmetrize_binary(a: &AdjacencyMatrix) -> AdjacencyMatrix {
    if !a.directed() {
        return a.clone();
    }
    let mut pairs = Vec::with_capacity(2 * a.nnz());
    for i in 0..a.n() {
        for &j in a.row(i) {
            pairs.push((i as u32, j));
            pairs.push((j, i as u32));
        }
    }
    AdjacencyMatrix::from_pairs_dedup(a.n(), false, pairs)
}
