//! Pruned dynamic programming with functional cost representation.
//!
//! For each number of segments `k >= 2` the engine sweeps the signal once,
//! keeping a list of candidate last change-points. Each candidate owns
//!
//! * its cost `h(μ) = C(k-1, t') + Σ_{i=t'+1}^{t} γ(y_i, μ)` as a [`CostFn`];
//! * its winning set: the values of μ for which it attains the lower envelope
//!   of all candidate costs.
//!
//! When position `t` is reached (candidate costs cover observations up to
//! `t - 1`), every candidate keeps only the part of its winning set where
//! `h(μ) <= C(k-1, t-1)`, the constant cost of opening a new segment right
//! after `t - 1`. Candidates whose set empties can never win again and are
//! dropped. The new candidate `t - 1` receives whatever remains of the
//! domain. Then `γ(y_t, ·)` is added to every live cost and `C(k, t)` is the
//! smallest candidate minimum.

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::loss::{CostFn, LossKind};
use crate::table::DpTable;

/// A live last-change candidate.
#[derive(Debug, Clone)]
pub struct Candidate {
    last_change: usize,
    cost: CostFn,
    set: IntervalSet,
}

impl Candidate {
    pub fn last_change(&self) -> usize {
        self.last_change
    }

    pub fn cost(&self) -> &CostFn {
        &self.cost
    }

    pub fn set(&self) -> &IntervalSet {
        &self.set
    }
}

/// Instrumentation for one `(k, t)` step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepTrace {
    pub k: usize,
    pub t: usize,
    /// Live candidates after the step.
    pub n_candidates: usize,
    /// Intervals summed over all live candidates' winning sets.
    pub n_intervals: usize,
    /// Candidates that existed before the step and were compared against the new one.
    pub updated: usize,
    /// Last-change positions dropped during this step.
    pub pruned: Vec<usize>,
}

impl StepTrace {
    /// Whether the interval count respects `intervals <= 2·candidates - 1`.
    pub fn within_interval_bound(&self) -> bool {
        self.n_candidates == 0 || self.n_intervals < 2 * self.n_candidates
    }
}

/// Receives every step of a pruned sweep, with the candidate list as it
/// stands after the step.
pub trait StepObserver {
    fn on_step(&mut self, step: &StepTrace, candidates: &[Candidate]);
}

impl StepObserver for () {
    #[inline]
    fn on_step(&mut self, _: &StepTrace, _: &[Candidate]) {}
}

impl StepObserver for Vec<StepTrace> {
    fn on_step(&mut self, step: &StepTrace, _: &[Candidate]) {
        self.push(step.clone());
    }
}

impl<F: FnMut(&StepTrace, &[Candidate])> StepObserver for F {
    fn on_step(&mut self, step: &StepTrace, candidates: &[Candidate]) {
        self(step, candidates)
    }
}

#[derive(Debug, Clone)]
pub struct PrunedResult {
    pub table: DpTable,
    /// One record per `(k, t)` with `k >= 2`, when tracing was requested.
    pub trace: Option<Vec<StepTrace>>,
}

impl PrunedResult {
    pub fn backtrack(&self, k: usize) -> Result<Vec<usize>> {
        self.table.backtrack(k)
    }
}

/// Runs the pruned sweep for every `k <= k_max`.
pub fn pruned_dp(
    signal: &[f64],
    loss: LossKind,
    k_max: usize,
    trace: bool,
) -> Result<PrunedResult> {
    if trace {
        let mut steps = Vec::new();
        let table = pruned_dp_observed(signal, loss, k_max, &mut steps)?;
        Ok(PrunedResult {
            table,
            trace: Some(steps),
        })
    } else {
        let table = pruned_dp_observed(signal, loss, k_max, &mut ())?;
        Ok(PrunedResult { table, trace: None })
    }
}

/// Same as [`pruned_dp`], streaming each step to `observer` instead of
/// collecting a trace.
pub fn pruned_dp_observed(
    signal: &[f64],
    loss: LossKind,
    k_max: usize,
    observer: &mut impl StepObserver,
) -> Result<DpTable> {
    let n = signal.len();
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    if k_max == 0 || k_max > n {
        return Err(Error::SegmentCount { k_max, n });
    }
    let domain = loss.domain(signal)?;
    let mut table = DpTable::new(n, k_max);

    // k = 1: running cost of the single segment 1..=t
    let mut running = loss.constant(0.0);
    for (i, &y) in signal.iter().enumerate() {
        running.accumulate(y);
        table.set(1, i + 1, running.minimum_in(&domain).1, 0);
    }

    let mut sweep = Sweep::new(domain);
    for k in 2..=k_max {
        sweep.run(signal, loss, k, &mut table, observer)?;
    }
    Ok(table)
}

/// Reusable buffers for the per-k sweep.
struct Sweep {
    domain: Interval,
    candidates: Vec<Candidate>,
    step: StepTrace,
}

impl Sweep {
    fn new(domain: Interval) -> Self {
        Self {
            domain,
            candidates: Vec::new(),
            step: StepTrace::default(),
        }
    }

    fn run(
        &mut self,
        signal: &[f64],
        loss: LossKind,
        k: usize,
        table: &mut DpTable,
        observer: &mut impl StepObserver,
    ) -> Result<()> {
        let domain = self.domain;
        self.candidates.clear();
        for t in k..=signal.len() {
            let y = signal[t - 1];
            let opening = table.cost(k - 1, t - 1);
            self.step.k = k;
            self.step.t = t;
            self.step.updated = self.candidates.len();
            self.step.pruned.clear();

            let mut fresh = IntervalSet::full(domain);
            let mut failure = None;
            let pruned = &mut self.step.pruned;
            self.candidates.retain_mut(|cand| {
                let better = match cand.cost.level_set(opening, &domain) {
                    Ok(i) => i,
                    Err(e) => {
                        failure = Some(e);
                        return true;
                    }
                };
                cand.set.intersect_in_place(better.as_ref());
                fresh.subtract_in_place(better.as_ref());
                if cand.set.is_empty() {
                    pruned.push(cand.last_change);
                    false
                } else {
                    true
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            if self.candidates.is_empty() && fresh.is_empty() {
                // Only reachable through rounding in the level sets: the
                // newest candidate then takes the whole domain.
                fresh = IntervalSet::full(domain);
            }
            if !fresh.is_empty() {
                self.candidates.push(Candidate {
                    last_change: t - 1,
                    cost: loss.constant(opening),
                    set: fresh,
                });
            }

            let mut best = f64::INFINITY;
            let mut arg = 0;
            let mut n_intervals = 0;
            for cand in &mut self.candidates {
                cand.cost.accumulate(y);
                let (_, value) = cand.cost.minimum_in(&domain);
                if value < best {
                    best = value;
                    arg = cand.last_change;
                }
                n_intervals += cand.set.len();
            }
            table.set(k, t, best, arg);

            self.step.n_candidates = self.candidates.len();
            self.step.n_intervals = n_intervals;
            observer.on_step(&self.step, &self.candidates);
        }
        Ok(())
    }
}

/// Equally spaced grid of `points` values spanning `domain`, endpoints included.
///
/// Point `i` is `lo + (hi - lo)·(i / (points - 1))`, so a grid of `p` points
/// is contained in a grid of `(p - 1)·m + 1` points bit for bit.
pub fn equally_spaced_grid(domain: &Interval, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5 * (domain.lo() + domain.hi())],
        _ => {
            let span = domain.hi() - domain.lo();
            let last = (points - 1) as f64;
            (0..points)
                .map(|i| (domain.lo() + span * (i as f64 / last)).min(domain.hi()))
                .collect()
        }
    }
}

/// Best grid value for one `k`: the heuristic cost, the grid value attaining
/// it and the last change-point it implies (0 for `k = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridFit {
    pub cost: f64,
    pub mu: f64,
    pub last_change: usize,
}

/// Finite-grid heuristic: for each grid value μ the envelope value is updated
/// by `H(t+1, μ) = min(H(t, μ), C(k-1, t)) + γ(y_{t+1}, μ)` and the result for
/// `k` is the smallest `H(n, μ)` over the grid. Entry `k - 1` of the returned
/// vector approximates `C(k, n)` from above.
pub fn grid_heuristic(
    signal: &[f64],
    loss: LossKind,
    k_max: usize,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let n = signal.len();
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    if k_max == 0 || k_max > n {
        return Err(Error::SegmentCount { k_max, n });
    }
    let exact = if k_max >= 2 {
        Some(pruned_dp(signal, loss, k_max - 1, false)?.table)
    } else {
        loss.validate(signal)?;
        None
    };
    Ok(grid_fits(signal, loss, k_max, grid, exact.as_ref())?
        .into_iter()
        .map(|fit| fit.cost)
        .collect())
}

/// Grid heuristic for every `k <= k_max`, reusing an exact table that covers
/// rows `1..k_max`.
pub fn grid_fits(
    signal: &[f64],
    loss: LossKind,
    k_max: usize,
    grid: &[f64],
    exact: Option<&DpTable>,
) -> Result<Vec<GridFit>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let domain = loss.domain(signal)?;
    if let Some(&mu) = grid.iter().find(|&&mu| !domain.contains(mu)) {
        return Err(Error::Config(format!(
            "grid value {mu} lies outside the domain {domain}"
        )));
    }
    let n = signal.len();
    let pick = |best: GridFit, fit: GridFit| if fit.cost < best.cost { fit } else { best };
    let none = GridFit {
        cost: f64::INFINITY,
        mu: f64::NAN,
        last_change: 0,
    };
    let mut out = Vec::with_capacity(k_max);
    out.push(
        grid.iter()
            .map(|&mu| GridFit {
                cost: signal.iter().map(|&y| loss.loss(y, mu)).sum::<f64>(),
                mu,
                last_change: 0,
            })
            .fold(none, pick),
    );
    if k_max >= 2 {
        let exact = exact
            .filter(|t| t.k_max() >= k_max - 1 && t.n() == n)
            .ok_or_else(|| {
                Error::Config("grid heuristic needs exact rows up to k_max - 1".into())
            })?;
        for k in 2..=k_max {
            let prev = exact.cost_row(k - 1);
            let best = grid
                .iter()
                .map(|&mu| {
                    let mut h = prev[k - 2] + loss.loss(signal[k - 1], mu);
                    let mut last_change = k - 1;
                    for t in (k + 1)..=n {
                        let opening = prev[t - 2];
                        if opening < h {
                            h = opening;
                            last_change = t - 1;
                        }
                        h += loss.loss(signal[t - 1], mu);
                    }
                    GridFit {
                        cost: h,
                        mu,
                        last_change,
                    }
                })
                .fold(none, pick);
            out.push(best);
        }
    }
    Ok(out)
}
