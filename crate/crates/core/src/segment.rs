//! One-call segmentation producing the serializable result document.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::classical::{classical_dp, PrefixStats};
use crate::error::{Error, Result};
use crate::io::TraceRow;
use crate::loss::LossKind;
use crate::pruned::{equally_spaced_grid, grid_fits, pruned_dp_observed, Candidate, StepTrace};
use crate::table::segments;

/// Largest `n` accepted by the classical algorithm unless overridden.
pub const DEFAULT_CLASSICAL_CAP: usize = 20_000;

/// Environment variable overriding [`DEFAULT_CLASSICAL_CAP`].
pub const CLASSICAL_CAP_ENV: &str = "FPSEG_CLASSICAL_CAP";

/// The classical cap from the environment, falling back to the default.
pub fn classical_cap_from_env() -> Result<usize> {
    match std::env::var(CLASSICAL_CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::Config(format!("{CLASSICAL_CAP_ENV} must be an integer, got {v:?}"))
        }),
        Err(_) => Ok(DEFAULT_CLASSICAL_CAP),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Pruned,
    Classical,
    /// Finite-grid heuristic over `points` equally spaced values of the domain.
    Grid {
        points: usize,
    },
}

pub const DEFAULT_GRID_POINTS: usize = 256;

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Pruned => "pruned",
            Algorithm::Classical => "classical",
            Algorithm::Grid { .. } => "grid",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pruned" => Ok(Algorithm::Pruned),
            "classical" => Ok(Algorithm::Classical),
            "grid" => Ok(Algorithm::Grid {
                points: DEFAULT_GRID_POINTS,
            }),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SegmentOptions {
    pub loss: LossKind,
    pub k_max: usize,
    pub algorithm: Algorithm,
    pub classical_cap: usize,
    /// Collect per-step trace rows (pruned only).
    pub trace: bool,
}

/// Best segmentation with `k` segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSegmentation {
    pub k: usize,
    /// `C(k, n)`, or the heuristic's upper bound for the grid algorithm.
    pub cost: f64,
    /// Last index (1-based) of every segment but the final one.
    pub change_points: Vec<usize>,
    /// Per-segment fitted parameter (the empirical mean for both losses).
    pub segment_means: Vec<f64>,
    /// Exact cost of `change_points`, reported by the grid algorithm only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refit_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentationOutput {
    pub n: usize,
    pub loss: LossKind,
    pub k_max: usize,
    pub algorithm: String,
    pub runtime_ms: f64,
    pub segmentations: Vec<KSegmentation>,
}

/// Per-segment means for a given set of change-points.
pub fn segment_means(signal: &[f64], change_points: &[usize]) -> Vec<f64> {
    segments(signal.len(), change_points)
        .into_iter()
        .map(|(i, j)| signal[i - 1..j].iter().sum::<f64>() / (j - i + 1) as f64)
        .collect()
}

/// Sum of optimal segment costs for a given segmentation.
pub fn segmentation_cost(stats: &PrefixStats, change_points: &[usize]) -> Result<f64> {
    segments(stats.len(), change_points)
        .into_iter()
        .map(|(i, j)| stats.segment_cost(i, j))
        .sum()
}

struct TraceCollector(Vec<TraceRow>);

impl crate::pruned::StepObserver for TraceCollector {
    fn on_step(&mut self, step: &StepTrace, _: &[Candidate]) {
        self.0.push(TraceRow::from(step));
    }
}

/// Runs the requested algorithm and assembles the result document. The
/// runtime covers the algorithm and backtracking only.
pub fn segment(
    signal: &[f64],
    options: &SegmentOptions,
) -> Result<(SegmentationOutput, Option<Vec<TraceRow>>)> {
    let n = signal.len();
    let SegmentOptions {
        loss,
        k_max,
        algorithm,
        classical_cap,
        trace,
    } = *options;
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    if k_max == 0 || k_max > n {
        return Err(Error::SegmentCount { k_max, n });
    }
    if trace && algorithm != Algorithm::Pruned {
        return Err(Error::Config(
            "tracing is only available for the pruned algorithm".into(),
        ));
    }
    if algorithm == Algorithm::Classical && n > classical_cap {
        return Err(Error::ClassicalCap {
            n,
            cap: classical_cap,
        });
    }
    let stats = PrefixStats::new(signal, loss)?;

    let started = Instant::now();
    let mut rows = None;
    let mut fits: Vec<(f64, Vec<usize>, Option<f64>)> = Vec::with_capacity(k_max);
    match algorithm {
        Algorithm::Pruned | Algorithm::Classical => {
            let table = if algorithm == Algorithm::Pruned {
                if trace {
                    let mut collector = TraceCollector(Vec::new());
                    let table = pruned_dp_observed(signal, loss, k_max, &mut collector)?;
                    rows = Some(collector.0);
                    table
                } else {
                    pruned_dp_observed(signal, loss, k_max, &mut ())?
                }
            } else {
                classical_dp(signal, loss, k_max)?
            };
            for k in 1..=k_max {
                fits.push((table.cost(k, n), table.backtrack(k)?, None));
            }
        }
        Algorithm::Grid { points } => {
            let domain = loss.domain(signal)?;
            let grid = equally_spaced_grid(&domain, points);
            let exact = if k_max >= 2 {
                Some(pruned_dp_observed(signal, loss, k_max - 1, &mut ())?)
            } else {
                None
            };
            for (i, fit) in grid_fits(signal, loss, k_max, &grid, exact.as_ref())?
                .into_iter()
                .enumerate()
            {
                let k = i + 1;
                let mut changes = match &exact {
                    Some(table) if k >= 2 => table.backtrack_from(k - 1, fit.last_change)?,
                    _ => Vec::new(),
                };
                if k >= 2 {
                    changes.push(fit.last_change);
                }
                let refit = segmentation_cost(&stats, &changes)?;
                fits.push((fit.cost, changes, Some(refit)));
            }
        }
    }
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;

    let segmentations = fits
        .into_iter()
        .enumerate()
        .map(|(i, (cost, change_points, refit_cost))| KSegmentation {
            k: i + 1,
            cost,
            segment_means: segment_means(signal, &change_points),
            change_points,
            refit_cost,
        })
        .collect();
    Ok((
        SegmentationOutput {
            n,
            loss,
            k_max,
            algorithm: algorithm.name().to_string(),
            runtime_ms,
            segmentations,
        },
        rows,
    ))
}
