//! Timing harness comparing the segmentation algorithms on simulated or
//! file-backed scenarios.
//!
//! Configuration is a line-oriented `key = value` file. Keys before the first
//! `[scenario]` header are global; each `[scenario]` block describes one input:
//!
//! ```text
//! algorithms = pruned, classical
//! k_max = 10
//! repetitions = 3
//! report = report.csv
//!
//! [scenario]
//! id = constant-gauss
//! shape = constant
//! n = 10000
//! noise = gaussian
//! seed = 1
//!
//! [scenario]
//! id = profile
//! input = profile.txt
//! format = floats
//! ```
//!
//! Simulated scenarios draw a fresh seed (`seed + rep`) for every repetition.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::classical::classical_dp;
use crate::error::{Error, Result};
use crate::io::{self, SignalFormat, TraceRow};
use crate::loss::LossKind;
use crate::pruned::{
    equally_spaced_grid, grid_fits, pruned_dp_observed, Candidate, StepObserver, StepTrace,
};
use crate::segment::{Algorithm, DEFAULT_CLASSICAL_CAP};
use crate::sim::{simulate, NoiseKind, Shape, SignalSpec};

pub const REPORT_HEADER: &str =
    "scenario,algorithm,n,k_max,rep,wall_ms,final_cost,max_candidates,max_intervals";

pub const SUMMARY_HEADER: &str = "scenario,algorithm,n,k_max,reps,median_wall_ms";

pub const TRACE_SUMMARY_HEADER: &str = "k,t,runs,max_candidates,max_intervals";

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Simulated(SignalSpec),
    File { path: PathBuf, format: SignalFormat },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub source: ScenarioSource,
}

impl Scenario {
    fn load(&self, rep: usize) -> Result<Vec<f64>> {
        match &self.source {
            ScenarioSource::Simulated(spec) => {
                let mut spec = spec.clone();
                spec.seed = spec.seed.wrapping_add(rep as u64);
                simulate(&spec)
            }
            ScenarioSource::File { path, format } => io::read_signal(path, format),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub scenarios: Vec<Scenario>,
    pub algorithms: Vec<Algorithm>,
    pub loss: LossKind,
    pub k_max: usize,
    pub repetitions: usize,
    pub trace: bool,
    /// Restricts trace files to these values of `k` (all when empty).
    pub trace_k: Vec<usize>,
    pub report: Option<PathBuf>,
    pub trace_dir: Option<PathBuf>,
    pub classical_cap: usize,
    /// Worker threads for independent (scenario, repetition) cells.
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            scenarios: Vec::new(),
            algorithms: vec![Algorithm::Pruned],
            loss: LossKind::Quadratic,
            k_max: 2,
            repetitions: 1,
            trace: false,
            trace_k: Vec::new(),
            report: None,
            trace_dir: None,
            classical_cap: DEFAULT_CLASSICAL_CAP,
            threads: 1,
        }
    }
}

fn config_error(line: usize, message: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {message}"))
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_error(line, format!("{key}: cannot parse {value:?}")))
}

fn parse_flag(line: usize, key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(config_error(
            line,
            format!("{key}: expected on/off, got {value:?}"),
        )),
    }
}

#[derive(Default)]
struct ScenarioDraft {
    line: usize,
    id: Option<String>,
    shape: Option<Shape>,
    n: Option<usize>,
    amplitude: Option<f64>,
    frequency: Option<f64>,
    level: Option<f64>,
    noise: Option<NoiseKind>,
    seed: Option<u64>,
    input: Option<PathBuf>,
    format: Option<SignalFormat>,
}

impl ScenarioDraft {
    fn finish(self, index: usize) -> Result<Scenario> {
        let id = self.id.unwrap_or_else(|| format!("scenario{}", index + 1));
        let source = match self.input {
            Some(path) => {
                if self.shape.is_some() || self.n.is_some() {
                    return Err(config_error(
                        self.line,
                        format!("scenario {id}: input excludes simulation keys"),
                    ));
                }
                ScenarioSource::File {
                    path,
                    format: self.format.unwrap_or(SignalFormat::Floats),
                }
            }
            None => {
                let spec = SignalSpec {
                    shape: self.shape.unwrap_or(Shape::Constant),
                    n: self.n.ok_or_else(|| {
                        config_error(self.line, format!("scenario {id}: missing n"))
                    })?,
                    amplitude: self.amplitude.unwrap_or(0.0),
                    frequency: self.frequency.unwrap_or(1.0),
                    level: self.level.unwrap_or(0.0),
                    noise: self.noise.unwrap_or(NoiseKind::Gaussian),
                    seed: self.seed.unwrap_or(0),
                };
                spec.validate()
                    .map_err(|e| config_error(self.line, format!("scenario {id}: {e}")))?;
                ScenarioSource::Simulated(spec)
            }
        };
        Ok(Scenario { id, source })
    }
}

impl BenchConfig {
    /// Parses the config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut config = BenchConfig::default();
        let mut drafts: Vec<ScenarioDraft> = Vec::new();
        let mut grid_points = None;
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if content.starts_with('[') {
                if content != "[scenario]" {
                    return Err(config_error(line, format!("unknown section {content}")));
                }
                drafts.push(ScenarioDraft {
                    line,
                    ..Default::default()
                });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_error(line, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(draft) = drafts.last_mut() {
                match key {
                    "id" => draft.id = Some(value.to_string()),
                    "shape" => {
                        draft.shape = Some(value.parse().map_err(|e| config_error(line, e))?)
                    }
                    "n" => draft.n = Some(parse_num(line, key, value)?),
                    "amplitude" => draft.amplitude = Some(parse_num(line, key, value)?),
                    "frequency" => draft.frequency = Some(parse_num(line, key, value)?),
                    "level" => draft.level = Some(parse_num(line, key, value)?),
                    "noise" => {
                        draft.noise = Some(value.parse().map_err(|e| config_error(line, e))?)
                    }
                    "seed" => draft.seed = Some(parse_num(line, key, value)?),
                    "input" => draft.input = Some(resolve(value)),
                    "format" => {
                        draft.format = Some(value.parse().map_err(|e| config_error(line, e))?)
                    }
                    _ => return Err(config_error(line, format!("unknown scenario key {key:?}"))),
                }
            } else {
                match key {
                    "algorithms" => {
                        config.algorithms = value
                            .split(',')
                            .map(|a| a.parse().map_err(|e| config_error(line, e)))
                            .collect::<Result<_>>()?;
                    }
                    "grid_size" => grid_points = Some(parse_num(line, key, value)?),
                    "loss" => config.loss = value.parse().map_err(|e| config_error(line, e))?,
                    "k_max" => config.k_max = parse_num(line, key, value)?,
                    "repetitions" => config.repetitions = parse_num(line, key, value)?,
                    "trace" => config.trace = parse_flag(line, key, value)?,
                    "trace_k" => {
                        config.trace_k = value
                            .split(',')
                            .map(|k| parse_num(line, key, k.trim()))
                            .collect::<Result<_>>()?;
                    }
                    "report" => config.report = Some(resolve(value)),
                    "trace_dir" => config.trace_dir = Some(resolve(value)),
                    "classical_cap" => config.classical_cap = parse_num(line, key, value)?,
                    "threads" => config.threads = parse_num(line, key, value)?,
                    _ => return Err(config_error(line, format!("unknown key {key:?}"))),
                }
            }
        }
        if let Some(points) = grid_points {
            for a in &mut config.algorithms {
                if let Algorithm::Grid { points: p } = a {
                    *p = points;
                }
            }
        }
        config.scenarios = drafts
            .into_iter()
            .enumerate()
            .map(|(i, d)| d.finish(i))
            .collect::<Result<_>>()?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::Config("no [scenario] blocks".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be >= 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        if self.trace && self.trace_dir.is_none() {
            return Err(Error::Config("trace = on needs trace_dir".into()));
        }
        for s in &self.scenarios {
            if let ScenarioSource::Simulated(spec) = &s.source {
                spec.validate()
                    .map_err(|e| Error::Config(format!("scenario {}: {e}", s.id)))?;
                if spec.n < self.k_max {
                    return Err(Error::Config(format!(
                        "scenario {}: n = {} is smaller than k_max = {}",
                        s.id, spec.n, self.k_max
                    )));
                }
                if self.algorithms.contains(&Algorithm::Classical) && spec.n > self.classical_cap {
                    return Err(Error::ClassicalCap {
                        n: spec.n,
                        cap: self.classical_cap,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub n: usize,
    pub k_max: usize,
    pub rep: usize,
    pub wall_ms: f64,
    /// `C(k_max, n)`, or the grid upper bound.
    pub final_cost: f64,
    pub max_candidates: Option<usize>,
    pub max_intervals: Option<usize>,
    /// Candidate comparisons summed over all steps (pruned only).
    pub candidate_updates: Option<u64>,
    /// Steps violating `intervals <= 2·candidates - 1` (pruned only).
    pub bound_violations: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// `|a - b| / max(|a|, |b|)`, 0 when both are 0.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{:.3},{},{},{}",
                r.scenario,
                r.algorithm,
                r.n,
                r.k_max,
                r.rep,
                r.wall_ms,
                r.final_cost,
                opt(&r.max_candidates),
                opt(&r.max_intervals)
            )
            .expect("writing to a String");
        }
        out
    }

    /// Median wall time per (scenario, algorithm), in first-seen order.
    pub fn medians(&self) -> Vec<(String, Algorithm, usize, usize, usize, f64)> {
        type Group = ((String, Algorithm), (usize, usize, Vec<f64>));
        let mut groups: Vec<Group> = Vec::new();
        for r in &self.rows {
            let key = (r.scenario.clone(), r.algorithm);
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, (_, _, times))) => times.push(r.wall_ms),
                None => groups.push((key, (r.n, r.k_max, vec![r.wall_ms]))),
            }
        }
        groups
            .into_iter()
            .map(|((s, a), (n, k, mut times))| (s, a, n, k, times.len(), median(&mut times)))
            .collect()
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for (s, a, n, k, reps, med) in self.medians() {
            writeln!(out, "{s},{a},{n},{k},{reps},{med:.3}").expect("writing to a String");
        }
        out
    }

    /// Classical and pruned runs on the same (scenario, rep) whose final costs
    /// differ by more than `tol` relative.
    pub fn agreement_violations(&self, tol: f64) -> Vec<String> {
        let mut exact: BTreeMap<(&str, usize), Vec<&BenchRow>> = BTreeMap::new();
        for r in &self.rows {
            if matches!(r.algorithm, Algorithm::Pruned | Algorithm::Classical) {
                exact.entry((&r.scenario, r.rep)).or_default().push(r);
            }
        }
        let mut out = Vec::new();
        for ((scenario, rep), rows) in exact {
            for pair in rows.windows(2) {
                let d = relative_difference(pair[0].final_cost, pair[1].final_cost);
                if d > tol {
                    out.push(format!(
                        "{scenario} rep {rep}: {} = {} vs {} = {} (relative {d:e})",
                        pair[0].algorithm,
                        pair[0].final_cost,
                        pair[1].algorithm,
                        pair[1].final_cost
                    ));
                }
            }
        }
        out
    }

    pub fn total_bound_violations(&self) -> u64 {
        self.rows.iter().filter_map(|r| r.bound_violations).sum()
    }
}

/// Streaming statistics of a pruned run, optionally keeping trace rows.
#[derive(Debug, Default)]
pub struct RunStats {
    pub max_candidates: usize,
    pub max_intervals: usize,
    pub candidate_updates: u64,
    pub steps: u64,
    pub candidate_sum: u64,
    pub bound_violations: u64,
    keep_rows: Option<Vec<usize>>,
    pub rows: Vec<TraceRow>,
}

impl RunStats {
    /// `keep`: `None` keeps no rows, `Some(&[])` keeps every row, otherwise
    /// only rows whose `k` is listed.
    pub fn new(keep: Option<&[usize]>) -> Self {
        Self {
            keep_rows: keep.map(<[usize]>::to_vec),
            ..Default::default()
        }
    }

    pub fn mean_candidates(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.candidate_sum as f64 / self.steps as f64
        }
    }
}

impl StepObserver for RunStats {
    fn on_step(&mut self, step: &StepTrace, _: &[Candidate]) {
        self.max_candidates = self.max_candidates.max(step.n_candidates);
        self.max_intervals = self.max_intervals.max(step.n_intervals);
        self.candidate_updates += step.updated as u64;
        self.candidate_sum += step.n_candidates as u64;
        self.steps += 1;
        if !step.within_interval_bound() {
            self.bound_violations += 1;
        }
        if let Some(keep) = &self.keep_rows {
            if keep.is_empty() || keep.contains(&step.k) {
                self.rows.push(TraceRow::from(step));
            }
        }
    }
}

struct CellOutput {
    rows: Vec<BenchRow>,
    traces: Vec<(PathBuf, Vec<TraceRow>)>,
}

fn run_cell(config: &BenchConfig, scenario: &Scenario, rep: usize) -> Result<CellOutput> {
    let signal = scenario.load(rep)?;
    let n = signal.len();
    let k_max = config.k_max;
    if k_max > n {
        return Err(Error::SegmentCount { k_max, n });
    }
    config.loss.validate(&signal)?;
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for &algorithm in &config.algorithms {
        let mut row = BenchRow {
            scenario: scenario.id.clone(),
            algorithm,
            n,
            k_max,
            rep,
            wall_ms: 0.0,
            final_cost: f64::NAN,
            max_candidates: None,
            max_intervals: None,
            candidate_updates: None,
            bound_violations: None,
        };
        match algorithm {
            Algorithm::Pruned => {
                let keep: Option<&[usize]> = config.trace.then_some(&config.trace_k);
                let mut stats = RunStats::new(keep);
                let started = Instant::now();
                let table = pruned_dp_observed(&signal, config.loss, k_max, &mut stats)?;
                row.wall_ms = started.elapsed().as_secs_f64() * 1e3;
                row.final_cost = table.cost(k_max, n);
                row.max_candidates = Some(stats.max_candidates);
                row.max_intervals = Some(stats.max_intervals);
                row.candidate_updates = Some(stats.candidate_updates);
                row.bound_violations = Some(stats.bound_violations);
                if let Some(dir) = &config.trace_dir {
                    if config.trace {
                        let path = dir.join(format!("{}.rep{rep}.trace.csv", scenario.id));
                        traces.push((path, std::mem::take(&mut stats.rows)));
                    }
                }
            }
            Algorithm::Classical => {
                if n > config.classical_cap {
                    return Err(Error::ClassicalCap {
                        n,
                        cap: config.classical_cap,
                    });
                }
                let started = Instant::now();
                let table = classical_dp(&signal, config.loss, k_max)?;
                row.wall_ms = started.elapsed().as_secs_f64() * 1e3;
                row.final_cost = table.cost(k_max, n);
            }
            Algorithm::Grid { points } => {
                let domain = config.loss.domain(&signal)?;
                let grid = equally_spaced_grid(&domain, points);
                let started = Instant::now();
                let exact = if k_max >= 2 {
                    Some(pruned_dp_observed(
                        &signal,
                        config.loss,
                        k_max - 1,
                        &mut (),
                    )?)
                } else {
                    None
                };
                let fits = grid_fits(&signal, config.loss, k_max, &grid, exact.as_ref())?;
                row.wall_ms = started.elapsed().as_secs_f64() * 1e3;
                row.final_cost = fits[k_max - 1].cost;
            }
        }
        rows.push(row);
    }
    Ok(CellOutput { rows, traces })
}

/// Runs every (scenario, repetition, algorithm) combination. Timings cover
/// the algorithms only; signals are generated or read beforehand and trace
/// files are written afterwards.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let cells: Vec<(&Scenario, usize)> = config
        .scenarios
        .iter()
        .flat_map(|s| (0..config.repetitions).map(move |rep| (s, rep)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outputs: Vec<CellOutput> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(s, rep)| run_cell(config, s, rep))
            .collect::<Result<_>>()
    })?;

    let mut report = BenchReport::default();
    for out in outputs {
        report.rows.extend(out.rows);
        for (path, rows) in out.traces {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            io::write_trace(&path, rows)?;
        }
    }
    Ok(report)
}

/// Writes the report CSV and, next to it, the per-group median summary.
pub fn write_report(report: &BenchReport, path: impl AsRef<Path>) -> Result<PathBuf> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, report.to_csv()).map_err(|e| Error::io(path, e))?;
    let summary = path.with_extension("summary.csv");
    fs::write(&summary, report.summary_csv()).map_err(|e| Error::io(&summary, e))?;
    Ok(summary)
}

/// Per-position maxima across several runs' traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceSummaryRow {
    pub k: usize,
    pub t: usize,
    pub runs: usize,
    pub max_candidates: usize,
    pub max_intervals: usize,
}

pub fn summarize_traces(traces: &[Vec<TraceRow>]) -> Result<Vec<TraceSummaryRow>> {
    if traces.is_empty() {
        return Err(Error::Config("no traces to summarize".into()));
    }
    let mut by_step: BTreeMap<(usize, usize), TraceSummaryRow> = BTreeMap::new();
    for trace in traces {
        for r in trace {
            let entry = by_step.entry((r.k, r.t)).or_insert(TraceSummaryRow {
                k: r.k,
                t: r.t,
                runs: 0,
                max_candidates: 0,
                max_intervals: 0,
            });
            entry.runs += 1;
            entry.max_candidates = entry.max_candidates.max(r.candidates);
            entry.max_intervals = entry.max_intervals.max(r.intervals);
        }
    }
    Ok(by_step.into_values().collect())
}

pub fn format_trace_summary(rows: &[TraceSummaryRow]) -> String {
    let mut out = String::from(TRACE_SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.k, r.t, r.runs, r.max_candidates, r.max_intervals
        )
        .expect("writing to a String");
    }
    out
}

/// Reads trace CSVs and returns their per-step maxima.
pub fn summarize_trace_files<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<TraceSummaryRow>> {
    let traces = paths
        .iter()
        .map(io::read_trace)
        .collect::<Result<Vec<_>>>()?;
    summarize_traces(&traces)
}
