//! Experiment orchestration around `dase-core`: configurable simulation
//! sweeps with replication and aggregation, deterministic Chernoff sweeps,
//! edge-list ingestion, real-data evaluation, and heatmap export. The `dase`
//! binary is a thin CLI over these modules.

pub mod config;
pub mod heatmap;
pub mod ingest;
pub mod real;
pub mod report;
pub mod sweep;
