//! Partition comparison indices over node-layer elements.

use std::collections::HashMap;

use crate::cluster::Partition;
use crate::error::{LartError, Result};

/// Joint counts of two labelings of the same elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    /// `(a, b) -> m_ab`
    counts: HashMap<(usize, usize), u64>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn new(p1: &Partition, p2: &Partition) -> Result<Self> {
        if p1.num_nodes() != p2.num_nodes() || p1.num_layers() != p2.num_layers() {
            return Err(LartError::DimensionMismatch(format!(
                "partitions cover different node-layer sets: N = {}, L = {} vs N = {}, L = {}",
                p1.num_nodes(),
                p1.num_layers(),
                p2.num_nodes(),
                p2.num_layers()
            )));
        }
        let mut counts = HashMap::new();
        let mut rows = vec![0; p1.num_communities()];
        let mut cols = vec![0; p2.num_communities()];
        for (&a, &b) in p1.labels().iter().zip(p2.labels()) {
            *counts.entry((a, b)).or_insert(0) += 1;
            rows[a] += 1;
            cols[b] += 1;
        }
        Ok(ContingencyTable {
            counts,
            rows,
            cols,
            total: p1.len() as u64,
        })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn row_marginals(&self) -> &[u64] {
        &self.rows
    }

    pub fn col_marginals(&self) -> &[u64] {
        &self.cols
    }

    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.counts.get(&(a, b)).copied().unwrap_or(0)
    }

    /// Whether the two labelings induce the same partition.
    pub fn is_identity(&self) -> bool {
        self.counts.len() == self.rows.len() && self.rows.len() == self.cols.len()
    }

    fn sorted_cells(&self) -> Vec<u64> {
        let mut cells: Vec<((usize, usize), u64)> =
            self.counts.iter().map(|(&k, &v)| (k, v)).collect();
        cells.sort_unstable_by_key(|&(k, _)| k);
        cells.into_iter().map(|(_, v)| v).collect()
    }
}

fn entropy(marginals: &[u64], total: f64) -> f64 {
    marginals
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I / √(H₁H₂)`.
///
/// When either entropy is zero the value is 1 for identical partitions and
/// 0 otherwise.
pub fn nmi(p1: &Partition, p2: &Partition) -> Result<f64> {
    let table = ContingencyTable::new(p1, p2)?;
    let n = table.total as f64;
    let h1 = entropy(&table.rows, n);
    let h2 = entropy(&table.cols, n);
    if h1 == 0.0 || h2 == 0.0 {
        return Ok(if table.is_identity() { 1.0 } else { 0.0 });
    }
    let mut cells: Vec<((usize, usize), u64)> = table.counts.iter().map(|(&k, &v)| (k, v)).collect();
    cells.sort_unstable_by_key(|&(k, _)| k);
    let mut mi = 0.0;
    for ((a, b), m) in cells {
        let m = m as f64;
        mi += (m / n) * (m * n / (table.rows[a] as f64 * table.cols[b] as f64)).ln();
    }
    Ok((mi / (h1 * h2).sqrt()).clamp(0.0, 1.0))
}

/// Generalized Fowlkes-Mallows index `T / √(PQ)` from pair counts.
///
/// When one side has no co-clustered pairs the value is 1 for identical
/// partitions and 0 otherwise.
pub fn fowlkes_mallows(p1: &Partition, p2: &Partition) -> Result<f64> {
    let table = ContingencyTable::new(p1, p2)?;
    let n = table.total as f64;
    let sum_sq = |xs: &[u64]| xs.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() - n;
    let t = sum_sq(&table.sorted_cells());
    let p = sum_sq(&table.rows);
    let q = sum_sq(&table.cols);
    if p == 0.0 || q == 0.0 {
        return Ok(if table.is_identity() { 1.0 } else { 0.0 });
    }
    Ok((t / (p * q).sqrt()).clamp(0.0, 1.0))
}
