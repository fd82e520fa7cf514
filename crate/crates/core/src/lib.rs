//! Community detection for core-periphery networks via doubled adjacency
//! spectral embedding (DASE), with adjacency spectral embedding (ASE) and
//! normalized-Laplacian spectral clustering as baselines.
//!
//! The pipeline mirrors the method it implements:
//!
//! 1. [`graph`] — stochastic block models, sampled graphs, the doubled
//!    adjacency matrix `Ã = AA` (two-step walk counts), and expected matrices.
//! 2. [`spectral`] — deterministic truncated SVD / symmetric eigensolver with
//!    a dense fallback and a thick-restart Lanczos path for large inputs.
//! 3. [`embed`] — node coordinate matrices for SC, ASE, and DASE.
//! 4. [`cluster`] — k-means (Lloyd with k-means++ seeding) and Gaussian
//!    mixture EM over embedding rows.
//! 5. [`metrics`] — NMI, permutation-minimized misclustering, Chernoff
//!    information for block models, closed-form misclustering bounds, and
//!    empirical concentration checks.
//!
//! Everything is deterministic given explicit seeds: sampling, solver starts,
//! and clustering restarts all derive independent counter-based RNG streams.

pub mod cluster;
pub mod embed;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
