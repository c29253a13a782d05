//! Pointwise losses and candidate cost functions.
//!
//! A candidate cost `h(μ)` is stored through three coefficients:
//!
//! * quadratic: `a·(μ − m)² + v` in vertex form, where `a` counts accumulated
//!   observations, `m` is their mean and `v` the minimum value. Observations
//!   are folded in with Welford's update, so `v` never comes out of a
//!   difference of large sums;
//! * poisson: `s·μ − w·ln(μ) + c`, the negative log-likelihood without the
//!   `ln(y!)` term, where `s` counts observations and `w` is their sum.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Lower edge of the poisson domain when some observation is zero.
pub const POISSON_DOMAIN_FLOOR: f64 = 1e-10;

/// Absolute tolerance on μ for poisson level-set roots.
pub const POISSON_ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Quadratic,
    Poisson,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Quadratic => "quadratic",
            LossKind::Poisson => "poisson",
        }
    }

    /// Checks that every observation is admissible for this loss.
    pub fn validate(self, signal: &[f64]) -> Result<()> {
        if signal.is_empty() {
            return Err(Error::EmptySignal);
        }
        for (i, &y) in signal.iter().enumerate() {
            self.check_observation(i + 1, y)?;
        }
        Ok(())
    }

    fn check_observation(self, index: usize, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if self == LossKind::Poisson && y < 0.0 {
            return Err(Error::NegativeObservation { index, value: y });
        }
        Ok(())
    }

    /// The bounded μ range over which winning sets are tracked.
    ///
    /// Quadratic: `[min y, max y]`. Poisson: `[max(min y, floor), max(max y, floor)]`,
    /// with the floor keeping `ln μ` finite.
    pub fn domain(self, signal: &[f64]) -> Result<Interval> {
        self.validate(signal)?;
        let (lo, hi) = signal
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
                (lo.min(y), hi.max(y))
            });
        match self {
            LossKind::Quadratic => Interval::new(lo, hi),
            LossKind::Poisson => {
                Interval::new(lo.max(POISSON_DOMAIN_FLOOR), hi.max(POISSON_DOMAIN_FLOOR))
            }
        }
    }

    /// Loss of a single observation as a cost function of μ.
    pub fn point_cost(self, y: f64) -> Result<CostFn> {
        self.check_observation(1, y)?;
        Ok(self.point_cost_unchecked(y))
    }

    #[inline]
    pub(crate) fn point_cost_unchecked(self, y: f64) -> CostFn {
        match self {
            LossKind::Quadratic => CostFn::Quadratic {
                a: 1.0,
                m: y,
                v: 0.0,
            },
            LossKind::Poisson => CostFn::Poisson {
                s: 1.0,
                w: y,
                c: 0.0,
            },
        }
    }

    /// `γ(y, μ)` evaluated directly.
    pub fn loss(self, y: f64, mu: f64) -> f64 {
        match self {
            LossKind::Quadratic => (y - mu) * (y - mu),
            LossKind::Poisson => {
                if y == 0.0 {
                    mu
                } else {
                    mu - y * mu.ln()
                }
            }
        }
    }

    /// The constant function `c`.
    pub fn constant(self, c: f64) -> CostFn {
        match self {
            LossKind::Quadratic => CostFn::Quadratic {
                a: 0.0,
                m: 0.0,
                v: c,
            },
            LossKind::Poisson => CostFn::Poisson { s: 0.0, w: 0.0, c },
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadratic" | "gaussian" | "l2" => Ok(LossKind::Quadratic),
            "poisson" => Ok(LossKind::Poisson),
            other => Err(Error::Config(format!("unknown loss {other:?}"))),
        }
    }
}

/// A convex cost function of the last-segment parameter μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostFn {
    /// `a·(μ − m)² + v`, with `a >= 0`
    Quadratic { a: f64, m: f64, v: f64 },
    /// `s·μ − w·ln(μ) + c`
    Poisson { s: f64, w: f64, c: f64 },
}

impl CostFn {
    pub fn kind(&self) -> LossKind {
        match self {
            CostFn::Quadratic { .. } => LossKind::Quadratic,
            CostFn::Poisson { .. } => LossKind::Poisson,
        }
    }

    pub fn coefficients(&self) -> [f64; 3] {
        match *self {
            CostFn::Quadratic { a, m, v } => [a, m, v],
            CostFn::Poisson { s, w, c } => [s, w, c],
        }
    }

    pub fn add(&self, other: &CostFn) -> Result<CostFn> {
        match (*self, *other) {
            (
                CostFn::Quadratic { a, m, v },
                CostFn::Quadratic {
                    a: a2,
                    m: m2,
                    v: v2,
                },
            ) => {
                Ok(if a == 0.0 {
                    CostFn::Quadratic {
                        a: a2,
                        m: m2,
                        v: v + v2,
                    }
                } else if a2 == 0.0 {
                    CostFn::Quadratic { a, m, v: v + v2 }
                } else {
                    // symmetric in the two operands, so addition commutes exactly
                    let total = a + a2;
                    let d = m - m2;
                    CostFn::Quadratic {
                        a: total,
                        m: (a * m + a2 * m2) / total,
                        v: (v + v2) + a * a2 / total * (d * d),
                    }
                })
            }
            (
                CostFn::Poisson { s, w, c },
                CostFn::Poisson {
                    s: s2,
                    w: w2,
                    c: c2,
                },
            ) => Ok(CostFn::Poisson {
                s: s + s2,
                w: w + w2,
                c: c + c2,
            }),
            _ => Err(Error::LossMismatch),
        }
    }

    /// Adds `γ(y, ·)` in place. The caller guarantees `y` is admissible.
    #[inline]
    pub(crate) fn accumulate(&mut self, y: f64) {
        match self {
            CostFn::Quadratic { a, m, v } => {
                let d = y - *m;
                let total = *a + 1.0;
                *m += d / total;
                *v += d * d * (*a / total);
                *a = total;
            }
            CostFn::Poisson { s, w, .. } => {
                *s += 1.0;
                *w += y;
            }
        }
    }

    pub fn eval(&self, mu: f64) -> f64 {
        match *self {
            CostFn::Quadratic { a, m, v } => a * (mu - m) * (mu - m) + v,
            CostFn::Poisson { s, w, c } => {
                if w == 0.0 {
                    s * mu + c
                } else {
                    s * mu - w * mu.ln() + c
                }
            }
        }
    }

    /// Unconstrained minimum over μ, as `(argmin, value)`.
    ///
    /// For a poisson cost with `w = 0` the infimum `c` is approached as μ → 0
    /// and the reported argmin is 0.
    pub fn minimum(&self) -> Result<(f64, f64)> {
        match *self {
            CostFn::Quadratic { a, m, v } => Ok(if a > 0.0 { (m, v) } else { (0.0, v) }),
            CostFn::Poisson { s, w, c } => {
                if s > 0.0 {
                    if w == 0.0 {
                        Ok((0.0, c))
                    } else {
                        let mean = w / s;
                        Ok((mean, w - w * mean.ln() + c))
                    }
                } else if w == 0.0 {
                    Ok((0.0, c))
                } else {
                    Err(Error::DegenerateCost(
                        "poisson cost with s = 0 is unbounded",
                    ))
                }
            }
        }
    }

    /// Minimum over `domain`. When the unconstrained argmin falls outside the
    /// domain the cost is evaluated at the nearest domain edge, except for a
    /// poisson cost with `w = 0`, whose infimum `c` is reported at the left edge.
    #[inline]
    pub fn minimum_in(&self, domain: &Interval) -> (f64, f64) {
        match *self {
            CostFn::Quadratic { a, m, v } if a > 0.0 => {
                if domain.contains(m) {
                    (m, v)
                } else {
                    let at = domain.clamp(m);
                    (at, self.eval(at))
                }
            }
            CostFn::Poisson { s, w, c } if s > 0.0 => {
                if w == 0.0 {
                    return (domain.lo(), c);
                }
                let mean = w / s;
                if domain.contains(mean) {
                    (mean, w - w * mean.ln() + c)
                } else {
                    let at = domain.clamp(mean);
                    (at, self.eval(at))
                }
            }
            // constant or linear over a bounded domain
            _ => {
                let (l, h) = (self.eval(domain.lo()), self.eval(domain.hi()));
                if l <= h {
                    (domain.lo(), l)
                } else {
                    (domain.hi(), h)
                }
            }
        }
    }

    /// The closed interval `{μ ∈ domain | f(μ) ≤ level}`, or `None` when it is empty.
    pub fn level_set(&self, level: f64, domain: &Interval) -> Result<Option<Interval>> {
        let raw = match *self {
            CostFn::Quadratic { a, m, v } => {
                if a.is_nan() || a <= 0.0 {
                    return Err(Error::DegenerateCost("quadratic level set needs a > 0"));
                }
                let gap = level - v;
                (gap >= 0.0).then(|| {
                    let r = (gap / a).sqrt();
                    (m - r, m + r)
                })
            }
            CostFn::Poisson { s, w, c } => {
                if s.is_nan() || s <= 0.0 {
                    return Err(Error::DegenerateCost("poisson level set needs s > 0"));
                }
                if w == 0.0 {
                    // increasing line s·μ + c
                    let root = (level - c) / s;
                    (root >= domain.lo()).then(|| (domain.lo(), root))
                } else {
                    poisson_roots(s, w, c - level)
                }
            }
        };
        Ok(raw.and_then(|(lo, hi)| {
            Interval::new(lo, hi)
                .ok()
                .and_then(|i| i.intersection(domain))
        }))
    }
}

/// Roots of `s·μ − w·ln(μ) + d` (s, w > 0), smaller first.
fn poisson_roots(s: f64, w: f64, d: f64) -> Option<(f64, f64)> {
    let mean = w / s;
    let fmin = w - w * mean.ln() + d;
    if fmin > 0.0 || fmin.is_nan() {
        return None;
    }
    if fmin == 0.0 {
        return Some((mean, mean));
    }

    // Left root in x = ln μ, where g(x) = s·eˣ − w·x + d is convex and
    // behaves like −w·x as x → −∞.
    let x_mean = mean.ln();
    let mut x_lo = x_mean.min(d / w) - 1.0;
    while s * x_lo.exp() - w * x_lo + d <= 0.0 {
        x_lo -= 2.0 * (x_mean - x_lo).max(1.0);
    }
    let left = safeguarded_newton(
        |x| {
            let e = s * x.exp();
            (e - w * x + d, e - w)
        },
        x_lo,
        x_mean,
        x_lo,
        |x, step| x.exp() * step.abs() <= 0.25 * POISSON_ROOT_TOL,
    )
    .exp();

    // Right root in μ, bracketed by doubling.
    let mut mu_hi = 2.0 * mean;
    while s * mu_hi - w * mu_hi.ln() + d <= 0.0 {
        mu_hi *= 2.0;
    }
    let right = safeguarded_newton(
        |mu| (s * mu - w * mu.ln() + d, s - w / mu),
        mean,
        mu_hi,
        mu_hi,
        |_, step| step.abs() <= 0.25 * POISSON_ROOT_TOL,
    );
    Some((left.min(mean), right.max(mean)))
}

/// Newton iteration kept inside a sign-change bracket `[lo, hi]`, falling back to
/// bisection whenever the Newton step leaves the bracket.
fn safeguarded_newton(
    g: impl Fn(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    start: f64,
    converged: impl Fn(f64, f64) -> bool,
) -> f64 {
    let lo_sign = g(lo).0 > 0.0;
    let mut x = start;
    for _ in 0..200 {
        let (value, slope) = g(x);
        if value == 0.0 {
            return x;
        }
        if (value > 0.0) == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - value / slope;
        let next = if newton > lo.min(hi) && newton < lo.max(hi) && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = next - x;
        x = next;
        if converged(x, step) || next == lo || next == hi {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(a: f64, m: f64, v: f64) -> CostFn {
        CostFn::Quadratic { a, m, v }
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol
    }

    #[test]
    fn point_costs() {
        assert_eq!(
            LossKind::Quadratic.point_cost(0.5).unwrap(),
            quad(1.0, 0.5, 0.0)
        );
        assert_eq!(
            LossKind::Quadratic.point_cost(-2.0).unwrap(),
            quad(1.0, -2.0, 0.0)
        );
        assert_eq!(
            LossKind::Poisson.point_cost(3.0).unwrap(),
            CostFn::Poisson {
                s: 1.0,
                w: 3.0,
                c: 0.0
            }
        );
        assert!(matches!(
            LossKind::Quadratic.point_cost(f64::NAN),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            LossKind::Poisson.point_cost(-1.0),
            Err(Error::NegativeObservation { .. })
        ));
    }

    #[test]
    fn addition() {
        // (μ - 0.5)² + (μ - 0.4)² = 2(μ - 0.45)² + 0.005
        let sum = quad(1.0, 0.5, 0.0).add(&quad(1.0, 0.4, 0.0)).unwrap();
        let [a, m, v] = sum.coefficients();
        assert_eq!(a, 2.0);
        assert!(close(m, 0.45, 1e-15));
        assert!(close(v, 0.005, 1e-15));

        let f = quad(3.0, 1.5, -2.0);
        assert_eq!(f.add(&LossKind::Quadratic.constant(0.0)).unwrap(), f);
        assert_eq!(
            LossKind::Quadratic.constant(1.0).add(&f).unwrap(),
            quad(3.0, 1.5, -1.0)
        );

        let mut g = LossKind::Quadratic.constant(0.25);
        for y in [0.5, 0.4] {
            g.accumulate(y);
        }
        let [a, m, v] = g.coefficients();
        assert_eq!(a, 2.0);
        assert!(close(m, 0.45, 1e-15));
        assert!(close(v, 0.255, 1e-15));

        let p = CostFn::Poisson {
            s: 1.0,
            w: 2.0,
            c: 0.0,
        }
        .add(&CostFn::Poisson {
            s: 1.0,
            w: 0.0,
            c: 0.0,
        })
        .unwrap();
        assert_eq!(
            p,
            CostFn::Poisson {
                s: 2.0,
                w: 2.0,
                c: 0.0
            }
        );

        assert_eq!(
            f.add(&LossKind::Poisson.constant(0.0)),
            Err(Error::LossMismatch)
        );
    }

    #[test]
    fn minima() {
        assert_eq!(quad(2.0, 0.45, 0.005).minimum().unwrap(), (0.45, 0.005));
        assert_eq!(
            LossKind::Quadratic.constant(3.0).minimum().unwrap(),
            (0.0, 3.0)
        );

        let (arg, val) = CostFn::Poisson {
            s: 2.0,
            w: 6.0,
            c: 0.0,
        }
        .minimum()
        .unwrap();
        assert!(close(arg, 3.0, 1e-15));
        assert!(close(val, 6.0 - 6.0 * 3f64.ln(), 1e-14));

        assert!(CostFn::Poisson {
            s: 0.0,
            w: 1.0,
            c: 0.0
        }
        .minimum()
        .is_err());
    }

    #[test]
    fn minimum_matches_grid_scan() {
        // segment {0.5, 0.4}: scan μ over a fine grid
        let seg = [0.5, 0.4];
        let best = (0..=200_000)
            .map(|i| -1.0 + i as f64 * 1e-5)
            .map(|mu| seg.iter().map(|y| (y - mu) * (y - mu)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let pair = LossKind::Quadratic
            .point_cost(0.5)
            .unwrap()
            .add(&LossKind::Quadratic.point_cost(0.4).unwrap())
            .unwrap();
        let (_, val) = pair.minimum().unwrap();
        assert!(close(val, best, 1e-9));

        // poisson (s=2, w=6): two observations summing to 6
        let f = CostFn::Poisson {
            s: 2.0,
            w: 6.0,
            c: 0.0,
        };
        let (best_mu, best) = (1..=1_000_000)
            .map(|i| i as f64 * 1e-5)
            .map(|mu| (mu, 2.0 * mu - 6.0 * mu.ln()))
            .fold(
                (0.0, f64::INFINITY),
                |acc, p| if p.1 < acc.1 { p } else { acc },
            );
        let (arg, val) = f.minimum().unwrap();
        assert!(close(arg, best_mu, 1e-4));
        assert!(close(val, best, 1e-9));
    }

    #[test]
    fn minimum_in_poisson_zero_counts() {
        let f = CostFn::Poisson {
            s: 4.0,
            w: 0.0,
            c: 1.5,
        };
        let d = Interval::new(POISSON_DOMAIN_FLOOR, 3.0).unwrap();
        assert_eq!(f.minimum_in(&d), (POISSON_DOMAIN_FLOOR, 1.5));
    }

    #[test]
    fn level_sets_from_the_worked_example() {
        let d = Interval::new(-0.5, 0.5).unwrap();
        let s = quad(1.0, 0.5, 0.0).level_set(0.125, &d).unwrap().unwrap();
        assert!(close(s.lo(), 0.5 - 1.0 / (2.0 * 2f64.sqrt()), 1e-12));
        assert_eq!(s.hi(), 0.5);

        let s = quad(2.0, 0.45, 0.005).level_set(0.14, &d).unwrap().unwrap();
        assert!(close(s.lo(), (9.0 - 3.0 * 3f64.sqrt()) / 20.0, 1e-12));
        assert_eq!(s.hi(), 0.5);

        assert_eq!(quad(1.0, 0.0, 0.0).level_set(-1.0, &d).unwrap(), None);
        assert!(LossKind::Quadratic
            .constant(1.0)
            .level_set(2.0, &d)
            .is_err());
    }

    #[test]
    fn degenerate_domain_level_set() {
        let d = Interval::point(2.0);
        let f = quad(3.0, 2.0, 0.0);
        assert_eq!(f.level_set(0.0, &d).unwrap(), Some(d));
        assert_eq!(quad(1.0, 1.0, 0.0).level_set(0.5, &d).unwrap(), None);
    }

    #[test]
    fn poisson_level_set_residuals() {
        let d = Interval::new(POISSON_DOMAIN_FLOOR, 1e3).unwrap();
        for &(s, w, c, kappa) in &[
            (2.0, 6.0, 0.0, 0.0),
            (1.0, 1.0, 0.0, 5.0),
            (50.0, 3.0, 1.0, 20.0),
            (7.0, 700.0, -10.0, -2000.0),
        ] {
            let f = CostFn::Poisson { s, w, c };
            let i = f.level_set(kappa, &d).unwrap().unwrap();
            for e in [i.lo(), i.hi()] {
                if e != d.lo() && e != d.hi() {
                    let tol = 1e-9 * kappa.abs().max(1.0);
                    assert!((f.eval(e) - kappa).abs() <= tol, "f({e}) = {}", f.eval(e));
                }
            }
            assert!(f.eval(0.5 * (i.lo() + i.hi())) <= kappa);
        }
        // zero counts: increasing line
        let f = CostFn::Poisson {
            s: 2.0,
            w: 0.0,
            c: 1.0,
        };
        let i = f.level_set(3.0, &d).unwrap().unwrap();
        assert_eq!((i.lo(), i.hi()), (d.lo(), 1.0));
        assert_eq!(f.level_set(0.5, &d).unwrap(), None);
    }
}
