//! Sampling: block assignments from π and adjacency matrices from the SBM.
//!
//! Edge sampling skips over failures geometrically instead of drawing one
//! Bernoulli per pair: within a row, columns belonging to one block share an
//! edge probability, so the gaps between successes are Geometric(p). This
//! makes sparse graphs cost O(edges) rather than O(N²) to sample, without
//! changing the distribution.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{AdjacencyMatrix, BlockModel, CommunityAssignment};
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Maximum attempts to draw an assignment with every block nonempty before
/// giving up. The theory assumes nonempty blocks; with π entries bounded
/// away from zero and N ≥ K a retry is already rare.
const MAX_ASSIGNMENT_RETRIES: usize = 100;

/// Draws N labels i.i.d. from categorical(π), resampling (bounded) until
/// every block is hit.
pub fn sample_assignment(pi: &[f64], n: usize, seed: u64) -> Result<CommunityAssignment> {
    let k = pi.len();
    if k == 0 {
        return Err(Error::invalid("pi must be nonempty"));
    }
    if n < k {
        return Err(Error::invalid(format!(
            "cannot fill {k} blocks with {n} nodes"
        )));
    }
    if pi.iter().any(|&x| x <= 0.0 || x.is_nan()) {
        return Err(Error::invalid("pi entries must be strictly positive"));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("pi must sum to 1, got {total}")));
    }

    // Cumulative distribution for inversion sampling.
    let mut cdf = Vec::with_capacity(k);
    let mut acc = 0.0;
    for &p in pi {
        acc += p;
        cdf.push(acc);
    }
    cdf[k - 1] = 1.0;

    let mut rng = seeded_rng(seed);
    for _ in 0..MAX_ASSIGNMENT_RETRIES {
        let labels: Vec<u32> = (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                cdf.partition_point(|&c| c <= u) as u32
            })
            .collect();
        let assignment = CommunityAssignment::from_labels(labels, k)?;
        if assignment.sizes().iter().all(|&s| s > 0) {
            return Ok(assignment);
        }
    }
    Err(Error::degenerate(format!(
        "failed to sample an assignment with all {k} blocks nonempty after {MAX_ASSIGNMENT_RETRIES} attempts"
    )))
}

/// Samples an adjacency matrix from the block model: independent
/// Bernoulli(B[τ(i), τ(j)]) edges over ordered pairs i ≠ j if directed,
/// over unordered pairs (mirrored) if undirected. The diagonal is zero.
pub fn sample_sbm(
    model: &BlockModel,
    assignment: &CommunityAssignment,
    seed: u64,
) -> Result<AdjacencyMatrix> {
    if model.k() != assignment.k() {
        return Err(Error::mismatch(format!(
            "model has {} blocks, assignment has {}",
            model.k(),
            assignment.k()
        )));
    }
    let n = assignment.n();
    let groups = assignment.nodes_by_block();
    let mut rng = seeded_rng(seed);
    let mut pairs: Vec<(u32, u32)> = Vec::new();

    for i in 0..n {
        let bi = assignment.label(i);
        for (bj, cols) in groups.iter().enumerate() {
            let p = model.b()[(bi, bj)];
            if model.directed() {
                sample_segment(cols, p, Some(i as u32), &mut rng, |j| {
                    pairs.push((i as u32, j))
                });
            } else {
                // Undirected: sample each unordered pair once, from the row
                // of its smaller endpoint. Columns are sorted, so the pairs
                // with j > i form a suffix.
                let start = cols.partition_point(|&j| j <= i as u32);
                sample_segment(&cols[start..], p, None, &mut rng, |j| {
                    pairs.push((i as u32, j));
                    pairs.push((j, i as u32));
                });
            }
        }
    }
    Ok(AdjacencyMatrix::from_pairs_dedup(
        n,
        model.directed(),
        pairs,
    ))
}

/// Runs a Bernoulli(p) trial per entry of `cols`, emitting successes.
/// Skips geometrically between successes; `exclude` (the diagonal) is
/// dropped on emission, which leaves all other trials untouched.
fn sample_segment(
    cols: &[u32],
    p: f64,
    exclude: Option<u32>,
    rng: &mut ChaCha8Rng,
    mut emit: impl FnMut(u32),
) {
    if cols.is_empty() || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for &j in cols {
            if Some(j) != exclude {
                emit(j);
            }
        }
        return;
    }
    let log_fail = (1.0 - p).ln();
    let mut pos = 0usize;
    while pos < cols.len() {
        // Geometric(p) count of failures before the next success.
        let u: f64 = rng.gen();
        let skip = ((1.0 - u).ln() / log_fail).floor();
        if skip >= (cols.len() - pos) as f64 {
            break;
        }
        pos += skip as usize;
        let j = cols[pos];
        if Some(j) != exclude {
            emit(j);
        }
        pos += 1;
    }
}
