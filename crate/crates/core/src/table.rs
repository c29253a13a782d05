use crate::error::{Error, Result};

/// Optimal costs `C(k, t)` and last-change backpointers for every
/// `1 <= k <= k_max` and `1 <= t <= n`.
///
/// Indices are 1-based. A change-point `j` means a segment ends right after
/// observation `j`. Entries with `t < k` are infeasible: their cost is `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct DpTable {
    n: usize,
    k_max: usize,
    cost: Vec<f64>,
    backpointer: Vec<usize>,
}

impl DpTable {
    pub(crate) fn new(n: usize, k_max: usize) -> Self {
        Self {
            n,
            k_max,
            cost: vec![f64::INFINITY; n * k_max],
            backpointer: vec![0; n * k_max],
        }
    }

    #[inline]
    fn slot(&self, k: usize, t: usize) -> usize {
        debug_assert!((1..=self.k_max).contains(&k) && (1..=self.n).contains(&t));
        (k - 1) * self.n + (t - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `C(k, t)`; panics when `k` or `t` is out of range.
    #[inline]
    pub fn cost(&self, k: usize, t: usize) -> f64 {
        self.cost[self.slot(k, t)]
    }

    /// Position `j` of the last change of the best `k`-segmentation of `1..=t`.
    #[inline]
    pub fn backpointer(&self, k: usize, t: usize) -> usize {
        self.backpointer[self.slot(k, t)]
    }

    /// Row `k` of the cost table, indexed by `t - 1`.
    pub fn cost_row(&self, k: usize) -> &[f64] {
        &self.cost[(k - 1) * self.n..k * self.n]
    }

    #[inline]
    pub(crate) fn set(&mut self, k: usize, t: usize, cost: f64, backpointer: usize) {
        let slot = self.slot(k, t);
        self.cost[slot] = cost;
        self.backpointer[slot] = backpointer;
    }

    /// The `k - 1` change-points of the best `k`-segmentation of the whole
    /// signal, strictly increasing.
    pub fn backtrack(&self, k: usize) -> Result<Vec<usize>> {
        self.backtrack_from(k, self.n)
    }

    /// Change-points of the best `k`-segmentation of the prefix `1..=t`.
    pub fn backtrack_from(&self, k: usize, t: usize) -> Result<Vec<usize>> {
        if k == 0 || k > self.k_max {
            return Err(Error::IndexOutOfRange(format!(
                "k = {k} outside 1..={}",
                self.k_max
            )));
        }
        if t < k || t > self.n {
            return Err(Error::IndexOutOfRange(format!(
                "prefix length {t} cannot hold {k} segments (n = {})",
                self.n
            )));
        }
        let mut changes = Vec::with_capacity(k - 1);
        let mut t = t;
        for kk in (2..=k).rev() {
            t = self.backpointer(kk, t);
            changes.push(t);
        }
        changes.reverse();
        Ok(changes)
    }
}

/// Segment boundaries `[(start, end)]` (1-based, inclusive) of a segmentation
/// of `1..=n` given by its change-points.
pub fn segments(n: usize, changes: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(changes.len() + 1);
    let mut start = 1;
    for &c in changes {
        out.push((start, c));
        start = c + 1;
    }
    out.push((start, n));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segments_from_changes() {
        assert_eq!(segments(5, &[2, 4]), vec![(1, 2), (3, 4), (5, 5)]);
        assert_eq!(segments(3, &[]), vec![(1, 3)]);
    }

    #[test]
    fn backtrack_range() {
        let table = DpTable::new(4, 2);
        assert!(table.backtrack(0).is_err());
        assert!(table.backtrack(3).is_err());
        assert_eq!(table.backtrack(1).unwrap(), Vec::<usize>::new());
    }
}
