//! Exponent functions `p : [0,1] -> [1, M]` with cached essential bounds,
//! their essential ranges as closed sets, and conjugate exponents.

use crate::carrier::{Carrier, RangePart};
use crate::error::{Error, Result};
use crate::expr::Mono;
use crate::interval::{Interval, IntervalSet};
use crate::num::{cmp_eps, Real};
use crate::step::{Cell, StepFn};
use crate::tail::TailFamily;

/// Global cap on exponent values.
pub const EXPONENT_CAP: f64 = 64.0;

#[derive(Clone, Debug)]
pub struct ExponentFn<R> {
    carrier: Carrier<R>,
    p_minus: R,
    p_plus: R,
    /// False when the infinite tail forced conservative bounds.
    bounds_certified: bool,
}

impl<R: Real> ExponentFn<R> {
    pub fn new(carrier: Carrier<R>) -> Result<Self> {
        let eps = cmp_eps::<R>();
        let cap = R::c(EXPONENT_CAP);
        let full = full_domain::<R>();
        let b = carrier.ess_bounds(&full)?;
        if b.sup > cap + eps {
            return Err(Error::Invalid(format!(
                "exponent essential sup {} exceeds the cap {EXPONENT_CAP}",
                b.sup
            )));
        }
        let (p_minus, certified) = if b.certified {
            if b.inf < R::one() - eps {
                return Err(Error::Invalid(format!(
                    "exponent essential inf {} below 1",
                    b.inf
                )));
            }
            (b.inf, true)
        } else {
            // Conservative tail floor: verify every reachable probe stays at
            // or above 1, then clamp the uncertified infimum up to 1.
            verify_probes_at_least_one(&carrier)?;
            (b.inf.max(R::one()), false)
        };
        Ok(ExponentFn {
            carrier,
            p_minus,
            p_plus: b.sup,
            bounds_certified: certified,
        })
    }

    pub fn carrier(&self) -> &Carrier<R> {
        &self.carrier
    }

    pub fn p_minus(&self) -> R {
        self.p_minus
    }

    pub fn p_plus(&self) -> R {
        self.p_plus
    }

    pub fn bounds_certified(&self) -> bool {
        self.bounds_certified
    }

    pub fn eval(&self, t: R) -> Result<R> {
        self.carrier.eval(t)
    }

    pub fn monotonicity(&self) -> Mono {
        self.carrier.monotonicity()
    }

    /// Essential bounds restricted to `set`.
    pub fn ess_bounds_on(&self, set: &IntervalSet<R>) -> Result<(R, R)> {
        let b = self.carrier.ess_bounds(set)?;
        Ok((b.inf, b.sup))
    }

    pub fn essential_range(&self) -> Result<RangeSet<R>> {
        RangeSet::from_parts(self.carrier.range_parts()?)
    }

    /// Conjugate exponent at `t`: `p/(p-1)`, infinite when `p(t) = 1`.
    pub fn conjugate_at(&self, t: R) -> Result<ExtendedReal<R>> {
        let p = self.eval(t)?;
        Ok(conjugate_of(p))
    }

    /// `1/p*(t) = 1 - 1/p(t)`; zero when `p(t) = 1`. This is the exponent
    /// actually used in measure powers, keeping the `mu^{1/p*} = 1`
    /// convention at `p = 1` total.
    pub fn inv_conjugate_at(&self, t: R) -> Result<R> {
        let p = self.eval(t)?;
        Ok(R::one() - R::one() / p)
    }

    /// Value of `p` when it is constant (up to tolerance) on `set`.
    pub fn constant_on(&self, set: &IntervalSet<R>) -> Result<Option<R>> {
        let (lo, hi) = self.ess_bounds_on(set)?;
        if hi - lo <= R::c(1e-9) {
            Ok(Some(lo + (hi - lo) / R::c(2.0)))
        } else {
            Ok(None)
        }
    }

    /// Step approximation on a uniform grid of `n` cells, with the sup-norm
    /// error bound given by per-cell essential oscillation.
    pub fn step_approx(&self, n: usize) -> Result<(StepFn<R>, R)> {
        if n == 0 {
            return Err(Error::Invalid("grid must have at least one cell".into()));
        }
        let nn = R::from_usize(n).expect("small grid");
        let mut cells = Vec::with_capacity(n);
        let mut err = R::zero();
        for i in 0..n {
            let lo = R::from_usize(i).expect("small") / nn;
            let hi = R::from_usize(i + 1).expect("small") / nn;
            let set = IntervalSet::from_interval(Interval::new(lo, hi.min(R::one()))?);
            let (a, b) = self.ess_bounds_on(&set)?;
            let mid = a + (b - a) / R::c(2.0);
            err = err.max(b - a);
            cells.push(Cell {
                lo,
                hi: hi.min(R::one()),
                value: mid,
            });
        }
        Ok((StepFn::from_cells(cells)?, err / R::c(2.0)))
    }
}

pub fn full_domain<R: Real>() -> IntervalSet<R> {
    IntervalSet::from_interval(Interval::new(R::zero(), R::one()).expect("unit interval"))
}

fn verify_probes_at_least_one<R: Real>(carrier: &Carrier<R>) -> Result<()> {
    let eps = R::c(1e-9);
    if let Carrier::Tail(f) = carrier {
        probe_tail_at_least_one(f, eps)?;
    }
    // Prefix/step/expr probes across the unit interval.
    let n = 512usize;
    let nn = R::from_usize(n).expect("small");
    for i in 0..n {
        let t = R::from_usize(i).expect("small") / nn;
        if let Ok(v) = carrier.eval(t) {
            if v < R::one() - eps {
                return Err(Error::Invalid(format!("exponent value {v} below 1 at t={t}")));
            }
        }
    }
    Ok(())
}

fn probe_tail_at_least_one<R: Real>(f: &TailFamily<R>, eps: R) -> Result<()> {
    for n in f.n0()..(f.n0() + 1_000) {
        if f.value_at(n)? < R::one() - eps {
            return Err(Error::Invalid(format!("tail value below 1 at n={n}")));
        }
    }
    for n in [1_000_000u64, 1_000_000_000, 1_000_000_000_000_000] {
        if f.value_at(n)? < R::one() - eps {
            return Err(Error::Invalid(format!("tail value below 1 at n={n}")));
        }
    }
    Ok(())
}

pub fn conjugate_of<R: Real>(p: R) -> ExtendedReal<R> {
    if p <= R::one() + cmp_eps::<R>() {
        ExtendedReal::Infinite
    } else {
        ExtendedReal::Finite(p / (p - R::one()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal<R> {
    Finite(R),
    Infinite,
}

impl<R: Real> ExtendedReal<R> {
    pub fn finite(&self) -> Option<R> {
        match self {
            ExtendedReal::Finite(v) => Some(*v),
            ExtendedReal::Infinite => None,
        }
    }
}

/// Closed subset of `[1, M]`: isolated points plus closed intervals,
/// normalized (intervals merged, points not inside intervals).
#[derive(Clone, Debug, PartialEq)]
pub struct RangeSet<R> {
    points: Vec<R>,
    intervals: Vec<(R, R)>,
}

impl<R: Real> RangeSet<R> {
    pub fn from_parts(parts: Vec<RangePart<R>>) -> Result<Self> {
        let eps = cmp_eps::<R>();
        let mut points = Vec::new();
        let mut intervals: Vec<(R, R)> = Vec::new();
        for p in parts {
            match p {
                RangePart::Point(v) => points.push(v),
                RangePart::Segment(a, b) => {
                    if b < a {
                        return Err(Error::Invalid("inverted range segment".into()));
                    }
                    if b - a <= eps {
                        points.push(a);
                    } else {
                        intervals.push((a, b));
                    }
                }
            }
        }
        intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
        let mut merged: Vec<(R, R)> = Vec::new();
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a <= last.1 + eps => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        points.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        points.dedup_by(|x, y| (*x - *y).abs() <= eps);
        points.retain(|&v| !merged.iter().any(|&(a, b)| a - eps <= v && v <= b + eps));
        Ok(RangeSet {
            points,
            intervals: merged,
        })
    }

    pub fn points(&self) -> &[R] {
        &self.points
    }

    pub fn intervals(&self) -> &[(R, R)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.intervals.is_empty()
    }

    pub fn contains(&self, v: R) -> bool {
        let eps = cmp_eps::<R>();
        self.points.iter().any(|&p| (p - v).abs() <= eps)
            || self.intervals.iter().any(|&(a, b)| a - eps <= v && v <= b + eps)
    }

    pub fn min(&self) -> Option<R> {
        let mut m: Option<R> = None;
        for &p in &self.points {
            m = Some(m.map_or(p, |x| x.min(p)));
        }
        for &(a, _) in &self.intervals {
            m = Some(m.map_or(a, |x| x.min(a)));
        }
        m
    }

    pub fn max(&self) -> Option<R> {
        let mut m: Option<R> = None;
        for &p in &self.points {
            m = Some(m.map_or(p, |x| x.max(p)));
        }
        for &(_, b) in &self.intervals {
            m = Some(m.map_or(b, |x| x.max(b)));
        }
        m
    }

    /// Exact intersection test on the representation.
    pub fn intersects(&self, other: &RangeSet<R>) -> bool {
        let eps = cmp_eps::<R>();
        for &p in &self.points {
            if other.contains(p) {
                return true;
            }
        }
        for &p in &other.points {
            if self.contains(p) {
                return true;
            }
        }
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                if a.max(c) <= b.min(d) + eps {
                    return true;
                }
            }
        }
        false
    }
}
