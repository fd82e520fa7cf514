//! Flat-file output: CSV tables for sweeps, labels, and embeddings, plus a
//! JSON envelope carrying a schema version.
//!
//! Floats are written with the shortest round-trip representation (`{}`),
//! so identical runs produce byte-identical files.

use std::io::{BufRead, BufReader, Read, Write};

use anyhow::{bail, Context, Result};
use dase_core::cluster::ClusterLabels;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::sweep::{ChernoffRow, ReplicateRecord, SummaryRow};

/// Bumped whenever a column set or JSON shape changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

pub const SUMMARY_HEADER: &str =
    "scenario,n,s,pi1,expected_density,method,clusterer,mean_nmi,std_nmi,mean_runtime_s,replicates,failures";
pub const REPLICATE_HEADER: &str = "grid_index,n,s,pi1,method,replicate,nmi,runtime_s,error";
pub const CHERNOFF_HEADER: &str = "n,s,pi1,expected_density,ci_ase,ci_dase,ci_ratio";
pub const LABELS_HEADER: &str = "node,block";

pub fn write_summary_csv<W: Write>(mut w: W, rows: &[SummaryRow]) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.scenario),
            r.n,
            r.s,
            r.pi1,
            r.density,
            csv_field(&r.method),
            csv_field(&r.clusterer),
            r.mean_nmi,
            r.std_nmi,
            r.mean_runtime_s,
            r.replicates,
            r.failures
        )?;
    }
    Ok(())
}

pub fn write_replicate_csv<W: Write>(mut w: W, log: &[ReplicateRecord]) -> Result<()> {
    writeln!(w, "{REPLICATE_HEADER}")?;
    for r in log {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.grid_index,
            r.n,
            r.s,
            r.pi1,
            csv_field(&r.method),
            r.replicate,
            optional(r.nmi),
            optional(r.runtime_s),
            csv_field(r.error.as_deref().unwrap_or(""))
        )?;
    }
    Ok(())
}

pub fn write_chernoff_csv<W: Write>(mut w: W, rows: &[ChernoffRow]) -> Result<()> {
    writeln!(w, "{CHERNOFF_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n, r.s, r.pi1, r.density, r.ci_ase, r.ci_dase, r.ci_ratio
        )?;
    }
    Ok(())
}

/// Serializes any report payload under a versioned envelope.
pub fn write_json_report<W: Write, T: Serialize>(mut w: W, payload: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        schema_version: u32,
        #[serde(flatten)]
        payload: &'a T,
    }
    serde_json::to_writer_pretty(
        &mut w,
        &Envelope {
            schema_version: SCHEMA_VERSION,
            payload,
        },
    )?;
    writeln!(w)?;
    Ok(())
}

pub fn write_labels_csv<W: Write>(mut w: W, labels: &ClusterLabels) -> Result<()> {
    writeln!(w, "{LABELS_HEADER}")?;
    for (node, &block) in labels.labels().iter().enumerate() {
        writeln!(w, "{node},{block}")?;
    }
    Ok(())
}

/// Reads a `node,block` table. Nodes must cover 0..n in order; blocks are
/// compacted by first appearance so files with any label alphabet load.
pub fn read_labels_csv<R: Read>(r: R) -> Result<ClusterLabels> {
    let reader = BufReader::new(r);
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end();
        if idx == 0 {
            if line != LABELS_HEADER {
                bail!("expected header `{LABELS_HEADER}`, found `{line}`");
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (node, block) = line
            .split_once(',')
            .with_context(|| format!("line {}: expected `node,block`", idx + 1))?;
        let node: usize = node
            .trim()
            .parse()
            .with_context(|| format!("line {}: bad node id `{node}`", idx + 1))?;
        if node != raw.len() {
            bail!(
                "line {}: node ids must be consecutive from 0, found {node}",
                idx + 1
            );
        }
        raw.push(block.trim().to_string());
    }
    if raw.is_empty() {
        bail!("label file contains no rows");
    }
    let mut alphabet: Vec<&str> = Vec::new();
    let mut labels = Vec::with_capacity(raw.len());
    for block in &raw {
        let id = match alphabet.iter().position(|&b| b == block) {
            Some(i) => i,
            None => {
                alphabet.push(block);
                alphabet.len() - 1
            }
        };
        labels.push(id as u32);
    }
    let k = alphabet.len();
    Ok(ClusterLabels::from_labels(labels, k)?)
}

/// Reads a `node,coord_0,...` table back into a coordinate matrix.
pub fn read_embedding_csv<R: Read>(r: R) -> Result<DMatrix<f64>> {
    let reader = BufReader::new(r);
    let mut width = 0usize;
    let mut values: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end();
        if idx == 0 {
            if !line.starts_with("node,coord_0") {
                bail!("expected header starting `node,coord_0`, found `{line}`");
            }
            width = line.split(',').count() - 1;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let node: usize = fields
            .next()
            .unwrap_or_default()
            .trim()
            .parse()
            .with_context(|| format!("line {}: bad node id", idx + 1))?;
        if node != rows {
            bail!("line {}: node ids must be consecutive from 0", idx + 1);
        }
        let mut seen = 0usize;
        for field in fields {
            values.push(
                field
                    .trim()
                    .parse()
                    .with_context(|| format!("line {}: bad coordinate `{field}`", idx + 1))?,
            );
            seen += 1;
        }
        if seen != width {
            bail!(
                "line {}: expected {width} coordinates, found {seen}",
                idx + 1
            );
        }
        rows += 1;
    }
    if rows == 0 {
        bail!("embedding file contains no rows");
    }
    Ok(DMatrix::from_row_slice(rows, width, &values))
}

fn optional(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Quotes a field only when it needs quoting, doubling embedded quotes.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
