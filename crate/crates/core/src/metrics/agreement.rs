//! Agreement between two cluster labelings: normalized mutual information
//! and the permutation-minimized misclustering count.

use crate::cluster::ClusterLabels;
use crate::{Error, Result};

/// Contingency table between two labelings of the same nodes.
#[derive(Debug, Clone)]
pub struct ConfusionTable {
    counts: Vec<Vec<usize>>,
    n: usize,
}

impl ConfusionTable {
    pub fn build(a: &ClusterLabels, b: &ClusterLabels) -> Result<Self> {
        if a.n() != b.n() {
            return Err(Error::mismatch(format!(
                "labelings cover {} vs {} nodes",
                a.n(),
                b.n()
            )));
        }
        let mut counts = vec![vec![0usize; b.k()]; a.k()];
        for i in 0..a.n() {
            counts[a.label(i) as usize][b.label(i) as usize] += 1;
        }
        Ok(Self { counts, n: a.n() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.counts.len()
    }

    pub fn cols(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn count(&self, i: usize, j: usize) -> usize {
        self.counts[i][j]
    }

    fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        let cols = self.cols();
        let mut sums = vec![0usize; cols];
        for row in &self.counts {
            for (j, &c) in row.iter().enumerate() {
                sums[j] += c;
            }
        }
        sums
    }

    /// True when each row and each column holds at most one nonzero cell,
    /// i.e. the two labelings induce the same partition up to renaming.
    fn is_permutation_like(&self) -> bool {
        for row in &self.counts {
            if row.iter().filter(|&&c| c > 0).count() > 1 {
                return false;
            }
        }
        for j in 0..self.cols() {
            if self.counts.iter().filter(|row| row[j] > 0).count() > 1 {
                return false;
            }
        }
        true
    }
}

fn entropy(sums: &[usize], n: f64) -> f64 {
    sums.iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information between two labelings, using the geometric
/// mean of the entropies and natural logarithms.
///
/// Equals exactly 1 when the partitions are identical up to label
/// permutation and 0 for independent labelings. If exactly one labeling
/// has zero entropy (a single occupied cluster) the result is 0; if both
/// do, the partitions coincide and the result is 1.
pub fn nmi(a: &ClusterLabels, b: &ClusterLabels) -> Result<f64> {
    let table = ConfusionTable::build(a, b)?;
    if table.n() == 0 {
        return Err(Error::invalid("NMI of empty labelings"));
    }
    if table.is_permutation_like() {
        return Ok(1.0);
    }
    let n = table.n() as f64;
    let row_sums = table.row_sums();
    let col_sums = table.col_sums();
    let ha = entropy(&row_sums, n);
    let hb = entropy(&col_sums, n);
    if ha == 0.0 || hb == 0.0 {
        // One side is a single cluster but the partitions differ.
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let joint = c as f64 / n;
            let ratio = (n * c as f64) / (row_sums[i] as f64 * col_sums[j] as f64);
            mi += joint * ratio.ln();
        }
    }
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// Result of minimizing label disagreements over cluster renamings.
#[derive(Debug, Clone)]
pub struct Misclustering {
    /// Number of nodes misassigned under the best renaming.
    pub count: usize,
    /// `count / N`.
    pub rate: f64,
    /// `best_perm[j]` is the truth label matched to estimated label `j`.
    pub best_perm: Vec<usize>,
}

/// Threshold below which permutations are enumerated exhaustively; larger
/// label counts go through the assignment solver.
const EXHAUSTIVE_K_LIMIT: usize = 8;

/// Minimum disagreement count between `truth` and `est` over all renamings
/// of the estimated labels.
pub fn misclustering(truth: &ClusterLabels, est: &ClusterLabels) -> Result<Misclustering> {
    let table = ConfusionTable::build(truth, est)?;
    if table.n() == 0 {
        return Err(Error::invalid("misclustering of empty labelings"));
    }
    let k = table.rows().max(table.cols());

    // Square matching matrix: matches[t][e] = nodes with truth label t and
    // estimated label e. Padding rows/columns stay zero.
    let mut matches = vec![vec![0usize; k]; k];
    for t in 0..table.rows() {
        for e in 0..table.cols() {
            matches[t][e] = table.count(t, e);
        }
    }

    let assignment = if k <= EXHAUSTIVE_K_LIMIT {
        exhaustive_max_assignment(&matches)
    } else {
        hungarian_max_assignment(&matches)
    };
    let matched: usize = assignment.iter().enumerate().map(|(t, &e)| matches[t][e]).sum();

    // Invert: best_perm[estimated label] = truth label.
    let mut best_perm = vec![0usize; table.cols()];
    for (t, &e) in assignment.iter().enumerate() {
        if e < best_perm.len() {
            best_perm[e] = t;
        }
    }
    let count = table.n() - matched;
    Ok(Misclustering {
        count,
        rate: count as f64 / table.n() as f64,
        best_perm,
    })
}

/// Exhaustive search over permutations in lexicographic order; the first
/// maximizer wins, so ties resolve deterministically.
fn exhaustive_max_assignment(matches: &[Vec<usize>]) -> Vec<usize> {
    let k = matches.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best_perm = perm.clone();
    let mut best_score = score(matches, &perm);
    while next_permutation(&mut perm) {
        let s = score(matches, &perm);
        if s > best_score {
            best_score = s;
            best_perm = perm.clone();
        }
    }
    best_perm
}

fn score(matches: &[Vec<usize>], perm: &[usize]) -> usize {
    perm.iter().enumerate().map(|(t, &e)| matches[t][e]).sum()
}

/// Standard in-place next lexicographic permutation; returns false after the
/// last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let k = perm.len();
    if k < 2 {
        return false;
    }
    let mut i = k - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = k - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Maximum-weight perfect matching on a square score matrix via the
/// potential-based augmenting-path method (O(k³)).
fn hungarian_max_assignment(matches: &[Vec<usize>]) -> Vec<usize> {
    let k = matches.len();
    let max_entry = matches
        .iter()
        .flat_map(|r| r.iter())
        .copied()
        .max()
        .unwrap_or(0) as i64;
    // Convert to a minimization problem.
    let cost: Vec<Vec<i64>> = matches
        .iter()
        .map(|row| row.iter().map(|&m| max_entry - m as i64).collect())
        .collect();

    // Potentials over rows (u) and columns (v); way[j] remembers the column
    // from which column j was reached during the augmenting search.
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut matched_row = vec![0usize; k + 1]; // column -> row (1-based rows)
    for row in 1..=k {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut min_v = vec![i64::MAX; k + 1];
        let mut used = vec![false; k + 1];
        let mut way = vec![0usize; k + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; k];
    for j in 1..=k {
        if matched_row[j] > 0 {
            assignment[matched_row[j] - 1] = j - 1;
        }
    }
    assignment
}
