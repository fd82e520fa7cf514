//! Adjacency heatmap export: the matrix reordered by cluster.
//!
//! Nodes are sorted by (cluster, total degree descending, original index),
//! so each diagonal block shows its densest rows first. The 0/1 matrix goes
//! to CSV; block boundaries and the node order go to a JSON sidecar for
//! whatever draws the figure.

use std::io::Write;

use anyhow::{bail, Result};
use dase_core::cluster::ClusterLabels;
use dase_core::graph::AdjacencyMatrix;
use serde::Serialize;

use crate::report::SCHEMA_VERSION;

/// Refuse to serialize matrices above this order — an n² text dump past
/// this point is a mistake, not a figure.
pub const MAX_HEATMAP_NODES: usize = 5000;

#[derive(Debug, Clone, Serialize)]
pub struct HeatmapSidecar {
    pub schema_version: u32,
    /// Row index where each cluster starts, in cluster order.
    pub boundaries: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Original node index at each reordered position.
    pub order: Vec<usize>,
}

pub fn heatmap_order(a: &AdjacencyMatrix, labels: &ClusterLabels) -> Result<HeatmapSidecar> {
    if labels.n() != a.n() {
        bail!("labels cover {} nodes, graph has {}", labels.n(), a.n());
    }
    if a.n() > MAX_HEATMAP_NODES {
        bail!(
            "{} nodes exceeds the heatmap limit of {MAX_HEATMAP_NODES}",
            a.n()
        );
    }
    let out = a.out_degrees();
    let extra_in = if a.directed() {
        Some(a.in_degrees())
    } else {
        None
    };
    let total = |i: usize| out[i] + extra_in.as_ref().map_or(0, |d| d[i]);

    let mut order: Vec<usize> = (0..a.n()).collect();
    order.sort_by_key(|&i| (labels.label(i), std::cmp::Reverse(total(i)), i));

    let sizes = labels.counts();
    let mut boundaries = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &size in &sizes {
        boundaries.push(start);
        start += size;
    }
    Ok(HeatmapSidecar {
        schema_version: SCHEMA_VERSION,
        boundaries,
        sizes,
        order,
    })
}

/// Writes the reordered adjacency matrix as comma-separated 0/1 rows.
pub fn write_heatmap_csv<W: Write>(mut w: W, a: &AdjacencyMatrix, order: &[usize]) -> Result<()> {
    if order.len() != a.n() {
        bail!("order covers {} nodes, graph has {}", order.len(), a.n());
    }
    let mut line = String::with_capacity(2 * a.n());
    for &i in order {
        line.clear();
        for (pos, &j) in order.iter().enumerate() {
            if pos > 0 {
                line.push(',');
            }
            line.push(if a.has_edge(i, j) { '1' } else { '0' });
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
