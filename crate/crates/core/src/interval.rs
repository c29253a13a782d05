//! Finite unions of closed intervals inside a bounded domain.
//!
//! Winning sets of pruning candidates are stored as [`IntervalSet`]s. All
//! intervals are closed and a single point `[x, x]` is a valid interval.
//! Emptiness is structural: a set is empty only when it holds no interval,
//! never because its total length is small.

use std::fmt;

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Intersection of two closed intervals; `None` when they do not meet.
    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Nearest point of the interval to `x`.
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// Ordered, pairwise disjoint closed intervals contained in `domain`.
///
/// Canonical form: intervals sorted by strictly increasing `lo`, and two
/// intervals that touch or overlap are merged into one.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    domain: Interval,
    intervals: Vec<Interval>,
}

impl IntervalSet {
    /// The whole domain.
    pub fn full(domain: Interval) -> Self {
        Self {
            domain,
            intervals: vec![domain],
        }
    }

    pub fn empty(domain: Interval) -> Self {
        Self {
            domain,
            intervals: Vec::new(),
        }
    }

    /// Builds a canonical set from arbitrary intervals, clipping each to the domain.
    pub fn from_intervals(domain: Interval, intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut parts: Vec<Interval> = intervals
            .into_iter()
            .filter_map(|i| i.intersection(&domain))
            .collect();
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for part in parts {
            match merged.last_mut() {
                Some(last) if part.lo <= last.hi => last.hi = last.hi.max(part.hi),
                _ => merged.push(part),
            }
        }
        Self {
            domain,
            intervals: merged,
        }
    }

    #[inline]
    pub fn domain(&self) -> Interval {
        self.domain
    }

    #[inline]
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    /// Set intersection with a single interval. `None` stands for the empty interval.
    pub fn intersect(&self, other: Option<&Interval>) -> IntervalSet {
        let mut out = self.clone();
        out.intersect_in_place(other);
        out
    }

    /// Closure of the set difference with a single interval.
    ///
    /// Removing an interval strictly inside one piece splits it in two; the cut
    /// points stay in the result. A piece lying entirely inside `other`
    /// disappears, including degenerate points.
    pub fn subtract(&self, other: Option<&Interval>) -> IntervalSet {
        let mut out = self.clone();
        out.subtract_in_place(other);
        out
    }

    pub(crate) fn intersect_in_place(&mut self, other: Option<&Interval>) {
        match other {
            None => self.intervals.clear(),
            Some(cut) => self
                .intervals
                .retain_mut(|piece| match piece.intersection(cut) {
                    Some(kept) => {
                        *piece = kept;
                        true
                    }
                    None => false,
                }),
        }
    }

    pub(crate) fn subtract_in_place(&mut self, other: Option<&Interval>) {
        let Some(cut) = other else { return };
        // Fast exit when the cut misses every piece.
        let first = self.intervals.partition_point(|p| p.hi < cut.lo);
        if first == self.intervals.len() || self.intervals[first].lo > cut.hi {
            return;
        }
        let last = self.intervals.partition_point(|p| p.lo <= cut.hi);
        let mut replacement = Vec::with_capacity(2);
        let head = self.intervals[first];
        if head.lo < cut.lo {
            replacement.push(Interval {
                lo: head.lo,
                hi: cut.lo,
            });
        }
        let tail = self.intervals[last - 1];
        if tail.hi > cut.hi {
            replacement.push(Interval {
                lo: cut.hi,
                hi: tail.hi,
            });
        }
        self.intervals.splice(first..last, replacement);
    }

    /// Parses the textual form produced by `Display` (`∅` for the empty set).
    pub fn parse_in(domain: Interval, text: &str) -> Result<IntervalSet> {
        let text = text.trim();
        if text == "∅" || text.is_empty() {
            return Ok(Self::empty(domain));
        }
        let mut intervals = Vec::new();
        for part in text.split('∪') {
            let inner = part
                .trim()
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| Error::IntervalParse(format!("expected [lo,hi], got {part:?}")))?;
            let (lo, hi) = inner
                .split_once(',')
                .ok_or_else(|| Error::IntervalParse(format!("missing comma in {part:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::IntervalParse(format!("{s:?}: {e}")))
            };
            intervals.push(Interval::new(parse(lo)?, parse(hi)?)?);
        }
        Ok(Self::from_intervals(domain, intervals))
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("∅");
        }
        for (i, piece) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str("∪")?;
            }
            write!(f, "{piece}")?;
        }
        Ok(())
    }
}
