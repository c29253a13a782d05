//! Reference `O(K·n²)` dynamic programme over prefix sums.
//!
//! `C(k, t) = min_{k-1 <= j < t} C(k-1, j) + cost(j+1..=t)`, ties to the
//! smallest `j`. Kept deliberately plain: it is the oracle the pruned engine
//! is checked against.

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::table::DpTable;

/// Cumulative sums with a leading zero, so `sum(i..=j) = cum[j] - cum[i-1]`.
///
/// Sums are carried as compensated `(hi, lo)` pairs, squares enter with their
/// exact rounding error, and segment costs are formed in double-double
/// arithmetic. Differences of long prefixes thus keep the precision of the
/// segment itself, even after a heavy-tailed outlier has inflated the totals.
#[derive(Debug, Clone)]
pub struct PrefixStats {
    loss: LossKind,
    cum_sum: Vec<(f64, f64)>,
    cum_sumsq: Vec<(f64, f64)>,
}

/// Neumaier step: adds `x` to the compensated pair `(hi, lo)`.
#[inline]
fn compensated_add((hi, lo): (f64, f64), x: f64) -> (f64, f64) {
    let sum = hi + x;
    let err = if hi.abs() >= x.abs() {
        (hi - sum) + x
    } else {
        (x - sum) + hi
    };
    (sum, lo + err)
}

/// `a - b` as a normalised `(hi, lo)` pair.
#[inline]
fn difference(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let hi = a.0 - b.0;
    let v = hi - a.0;
    let err = (a.0 - (hi - v)) + (-b.0 - v);
    let lo = err + (a.1 - b.1);
    let sum = hi + lo;
    (sum, lo - (sum - hi))
}

impl PrefixStats {
    pub fn new(signal: &[f64], loss: LossKind) -> Result<Self> {
        loss.validate(signal)?;
        let mut cum_sum = Vec::with_capacity(signal.len() + 1);
        let mut cum_sumsq = Vec::with_capacity(signal.len() + 1);
        let (mut s, mut q) = ((0.0, 0.0), (0.0, 0.0));
        cum_sum.push(s);
        cum_sumsq.push(q);
        for &y in signal {
            s = compensated_add(s, y);
            let sq = y * y;
            q = compensated_add(q, sq);
            q.1 += y.mul_add(y, -sq);
            cum_sum.push(s);
            cum_sumsq.push(q);
        }
        Ok(Self {
            loss,
            cum_sum,
            cum_sumsq,
        })
    }

    pub fn len(&self) -> usize {
        self.cum_sum.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    /// Optimal cost of the segment `i..=j` (1-based, inclusive).
    pub fn segment_cost(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 || i > j || j > self.len() {
            return Err(Error::IndexOutOfRange(format!(
                "segment {i}..={j} in a signal of length {}",
                self.len()
            )));
        }
        Ok(self.segment_cost_unchecked(i, j))
    }

    #[inline]
    fn segment_cost_unchecked(&self, i: usize, j: usize) -> f64 {
        let m = (j - i + 1) as f64;
        let (s, s_lo) = difference(self.cum_sum[j], self.cum_sum[i - 1]);
        match self.loss {
            LossKind::Quadratic => {
                if i == j {
                    return 0.0;
                }
                let (q, q_lo) = difference(self.cum_sumsq[j], self.cum_sumsq[i - 1]);
                // s²/m as hi + lo
                let p = s * s;
                let p_lo = s.mul_add(s, -p) + 2.0 * s * s_lo;
                let u = p / m;
                let u_lo = ((-u).mul_add(m, p) + p_lo) / m;
                ((q - u) + (q_lo - u_lo)).max(0.0)
            }
            LossKind::Poisson => {
                let s = s + s_lo;
                if s <= 0.0 {
                    0.0
                } else {
                    s - s * (s / m).ln()
                }
            }
        }
    }
}

/// Fills the full `k_max × n` table by the classical recursion.
pub fn classical_dp(signal: &[f64], loss: LossKind, k_max: usize) -> Result<DpTable> {
    let n = signal.len();
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    if k_max == 0 || k_max > n {
        return Err(Error::SegmentCount { k_max, n });
    }
    let stats = PrefixStats::new(signal, loss)?;
    let mut table = DpTable::new(n, k_max);
    for t in 1..=n {
        table.set(1, t, stats.segment_cost_unchecked(1, t), 0);
    }
    for k in 2..=k_max {
        for t in k..=n {
            let mut best = f64::INFINITY;
            let mut arg = k - 1;
            for j in (k - 1)..t {
                let candidate = table.cost(k - 1, j) + stats.segment_cost_unchecked(j + 1, t);
                if candidate < best {
                    best = candidate;
                    arg = j;
                }
            }
            table.set(k, t, best, arg);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: [f64; 4] = [0.0, 0.5, 0.4, -0.5];

    #[test]
    fn segment_costs_of_the_example() {
        let stats = PrefixStats::new(&EXAMPLE, LossKind::Quadratic).unwrap();
        assert!((stats.segment_cost(1, 2).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(stats.segment_cost(4, 4).unwrap(), 0.0);
        assert!((stats.segment_cost(1, 3).unwrap() - 0.14).abs() < 1e-15);
        assert!(stats.segment_cost(0, 2).is_err());
        assert!(stats.segment_cost(3, 2).is_err());
        assert!(stats.segment_cost(1, 5).is_err());
    }

    #[test]
    fn poisson_segment_cost() {
        let stats = PrefixStats::new(&[0.0, 0.0, 2.0, 4.0], LossKind::Poisson).unwrap();
        assert_eq!(stats.segment_cost(1, 2).unwrap(), 0.0);
        let expected = 6.0 - 6.0 * 3f64.ln();
        assert!((stats.segment_cost(3, 4).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn example_table() {
        let table = classical_dp(&EXAMPLE, LossKind::Quadratic, 2).unwrap();
        assert!((table.cost(2, 4) - 0.14).abs() < 1e-15);
        assert_eq!(table.backpointer(2, 4), 3);
        assert!((table.cost(2, 3) - 0.005).abs() < 1e-15);
        assert_eq!(table.backpointer(2, 3), 1);
        assert_eq!(table.backtrack(2).unwrap(), vec![3]);
    }

    #[test]
    fn every_point_its_own_segment() {
        let signal = [1.0, -3.0, 2.5, 7.0, 0.25];
        let table = classical_dp(&signal, LossKind::Quadratic, signal.len()).unwrap();
        assert_eq!(table.cost(5, 5), 0.0);
        assert_eq!(table.backtrack(5).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(
            classical_dp(&[], LossKind::Quadratic, 1),
            Err(Error::EmptySignal)
        );
        assert!(matches!(
            classical_dp(&EXAMPLE, LossKind::Quadratic, 5),
            Err(Error::SegmentCount { .. })
        ));
        assert!(matches!(
            classical_dp(&[1.0, -1.0], LossKind::Poisson, 1),
            Err(Error::NegativeObservation { .. })
        ));
    }

    #[test]
    fn three_segment_example() {
        // exhaustive: the six 3-segmentations of 5 points, best is {0,0}{10,10}{20}
        let signal = [0.0, 0.0, 10.0, 10.0, 20.0];
        let table = classical_dp(&signal, LossKind::Quadratic, 3).unwrap();
        assert_eq!(table.backtrack(3).unwrap(), vec![2, 4]);
        assert_eq!(table.cost(3, 5), 0.0);
    }
}
