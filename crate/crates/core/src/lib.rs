//! Exact multiple change-point segmentation under convex pointwise losses.
//!
//! The central routine is [`pruned_dp`], a dynamic programme that represents
//! every candidate last change-point by its cost as a function of the
//! last-segment parameter and drops candidates as soon as they can no longer
//! be optimal. [`classical_dp`] is the plain quadratic-time recursion kept as
//! an oracle.
//!
//! Change-points are reported as the 1-based index of the last observation of
//! each segment except the final one.

pub mod bench;
pub mod classical;
pub mod error;
pub mod interval;
pub mod io;
pub mod loss;
pub mod pruned;
pub mod segment;
pub mod sim;
pub mod table;

pub use bench::{run_bench, BenchConfig, BenchReport, BenchRow, RunStats};
pub use classical::{classical_dp, PrefixStats};
pub use error::{Error, Result};
pub use interval::{Interval, IntervalSet};
pub use loss::{CostFn, LossKind};
pub use pruned::{
    equally_spaced_grid, grid_fits, grid_heuristic, pruned_dp, pruned_dp_observed, Candidate,
    GridFit, PrunedResult, StepObserver, StepTrace,
};
pub use segment::{segment, Algorithm, SegmentOptions, SegmentationOutput};
pub use sim::{add_noise, generate_means, simulate, NoiseKind, Shape, SignalSpec};
pub use table::{segments, DpTable};
