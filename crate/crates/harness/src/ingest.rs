//! Edge-list ingestion for real networks.
//!
//! The accepted format is one edge per line, `source<TAB>target` with an
//! optional third weight column. Fields are tab-separated so node names may
//! contain spaces. `#` starts a comment line and blank lines are skipped.
//! The cleaning steps (self-loops, duplicate edges, nonpositive weights)
//! are counted rather than silently applied.
//!
//! Node identity: when every name is a canonical decimal (`0`, `17`, …)
//! the numbers are kept as the node ids, so a file that is already indexed
//! round-trips exactly and stays aligned with companion label files —
//! including isolated nodes below the maximum id. Otherwise names map to
//! 0-based ids in first-appearance order. A `# nodes: <count>` comment
//! pins the node count beyond the largest id seen, covering isolated
//! nodes at the tail.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use anyhow::{bail, Context, Result};
use dase_core::graph::AdjacencyMatrix;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub n: usize,
    /// Surviving edges: ordered pairs if directed, unordered pairs if not.
    pub m: usize,
    pub self_loops_dropped: usize,
    pub duplicates_collapsed: usize,
    pub nonpositive_dropped: usize,
}

#[derive(Debug, Clone)]
pub struct IngestedGraph {
    pub adjacency: AdjacencyMatrix,
    /// Original node names, indexed by the assigned 0-based ids.
    pub names: Vec<String>,
    pub stats: IngestStats,
}

pub fn parse_edge_list<R: Read>(input: R, directed: bool, binarize: bool) -> Result<IngestedGraph> {
    let reader = BufReader::new(input);
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut seen: HashMap<(u32, u32), ()> = HashMap::new();
    let mut stats = IngestStats::default();
    let mut declared_nodes: Option<usize> = None;

    let mut intern = |name: &str, names: &mut Vec<String>| -> u32 {
        *ids.entry(name.to_string()).or_insert_with(|| {
            names.push(name.to_string());
            (names.len() - 1) as u32
        })
    };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.with_context(|| format!("line {line_no}: read failed"))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(comment) = line.trim_start().strip_prefix('#') {
            if let Some(count) = comment.trim().strip_prefix("nodes:") {
                declared_nodes = Some(count.trim().parse().with_context(|| {
                    format!("line {line_no}: bad node count in `# nodes:` directive")
                })?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            bail!(
                "line {line_no}: expected `source<TAB>target[<TAB>weight]`, found {} field(s)",
                fields.len()
            );
        }
        let source = fields[0].trim();
        let target = fields[1].trim();
        if source.is_empty() || target.is_empty() {
            bail!("line {line_no}: empty node name");
        }
        let weight: f64 = match fields.get(2) {
            Some(raw) => raw
                .trim()
                .parse()
                .with_context(|| format!("line {line_no}: bad weight `{}`", raw.trim()))?,
            None => 1.0,
        };
        if !weight.is_finite() {
            bail!("line {line_no}: weight must be finite");
        }

        // Register both endpoints even when the edge itself is dropped, so
        // node counts match the source file.
        let i = intern(source, &mut names);
        let j = intern(target, &mut names);

        if weight <= 0.0 {
            stats.nonpositive_dropped += 1;
            continue;
        }
        if weight != 1.0 && !binarize {
            bail!(
                "line {line_no}: weight {weight} in binary mode; pass binarize to threshold weighted input"
            );
        }
        if i == j {
            stats.self_loops_dropped += 1;
            continue;
        }
        let key = if directed || i < j { (i, j) } else { (j, i) };
        if seen.insert(key, ()).is_some() {
            stats.duplicates_collapsed += 1;
            continue;
        }
        edges.push(key);
    }

    if names.is_empty() {
        bail!("input contains no edges");
    }
    let n = if let Some((n, remap)) = numeric_identity(&names, declared_nodes) {
        for edge in &mut edges {
            *edge = (remap[edge.0 as usize], remap[edge.1 as usize]);
        }
        names = (0..n).map(|i| i.to_string()).collect();
        n
    } else {
        let declared = declared_nodes.unwrap_or(0);
        while names.len() < declared {
            names.push(format!("node_{}", names.len()));
        }
        names.len()
    };
    let adjacency = AdjacencyMatrix::from_edges(n, directed, &edges)?;
    stats.n = adjacency.n();
    stats.m = adjacency.edge_count();
    Ok(IngestedGraph {
        adjacency,
        names,
        stats,
    })
}

/// Detects an already-indexed file: every name a canonical decimal (no
/// sign, no leading zeros), with an id space not wildly sparser than the
/// node count. Returns the node count and the intern-order → numeric-id
/// map. Canonical decimals are injective, so distinct names cannot
/// collide.
fn numeric_identity(names: &[String], declared: Option<usize>) -> Option<(usize, Vec<u32>)> {
    let mut remap = Vec::with_capacity(names.len());
    let mut max = 0usize;
    for name in names {
        if name.len() > 1 && name.starts_with('0') {
            return None;
        }
        let v: usize = name.parse().ok()?;
        if v >= u32::MAX as usize {
            return None;
        }
        remap.push(v as u32);
        max = max.max(v);
    }
    let n = (max + 1).max(declared.unwrap_or(0));
    // A sparse id space (say timestamps used as ids) would allocate huge
    // matrices; fall back to dense interned ids instead.
    if n > names.len().saturating_mul(10) + 1024 {
        return None;
    }
    Some((n, remap))
}

/// Writes the cleaned graph back out in the same tab-separated format,
/// one edge per line (unordered pairs once, as `i < j`). The leading
/// `# nodes:` directive keeps isolated nodes across a round trip.
pub fn write_edge_list<W: Write>(mut w: W, a: &AdjacencyMatrix) -> Result<()> {
    writeln!(w, "# nodes: {}", a.n())?;
    for i in 0..a.n() {
        for &j in a.row(i) {
            if !a.directed() && (j as usize) < i {
                continue;
            }
            writeln!(w, "{i}\t{j}")?;
        }
    }
    Ok(())
}

/// Writes the `index,name` table mapping assigned ids back to input names.
pub fn write_names_csv<W: Write>(mut w: W, names: &[String]) -> Result<()> {
    writeln!(w, "node,name")?;
    for (i, name) in names.iter().enumerate() {
        let quoted = if name.contains(',') || name.contains('"') {
            format!("\"{}\"", name.replace('"', "\"\""))
        } else {
            name.clone()
        };
        writeln!(w, "{i},{quoted}")?;
    }
    Ok(())
}
