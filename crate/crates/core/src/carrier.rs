//! A carrier is one of the three measurable-function representations used
//! for exponents and exponent differences: step, piecewise expression, or
//! tail family. This module centralizes evaluation, essential bounds,
//! essential-range pieces, monotonicity, and exact differences.

use crate::error::{Error, Result};
use crate::expr::{ExprNode, ExprPiecewise, Mono};
use crate::interval::{Interval, IntervalSet};
use crate::num::{cmp_eps, Real};
use crate::seq_expr::SequenceExpr;
use crate::step::{Cell, StepFn};
use crate::tail::{step_monotonicity, TailFamily, TailPrefix};

/// Window of explicit tail cells examined before the monotone-tail rule
/// takes over.
const TAIL_BOUND_WINDOW: u64 = 1_000;

/// Explicit tail values listed in essential-range output before the closure
/// interval.
const TAIL_RANGE_WINDOW: u64 = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum Carrier<R> {
    Step(StepFn<R>),
    Expr(ExprPiecewise<R>),
    Tail(TailFamily<R>),
}

/// Essential bounds of a carrier over a set. `certified` is false when the
/// infinite tail forced a conservative bound (infimum under-, supremum
/// over-estimated) instead of an exact one.
#[derive(Clone, Copy, Debug)]
pub struct Bounds<R> {
    pub inf: R,
    pub sup: R,
    pub certified: bool,
}

impl<R: Real> Bounds<R> {
    fn merge(self, other: Bounds<R>) -> Bounds<R> {
        Bounds {
            inf: self.inf.min(other.inf),
            sup: self.sup.max(other.sup),
            certified: self.certified && other.certified,
        }
    }
}

/// One component of an essential range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RangePart<R> {
    Point(R),
    Segment(R, R),
}

impl<R: Real> Carrier<R> {
    pub fn eval(&self, t: R) -> Result<R> {
        match self {
            Carrier::Step(f) => Ok(f.eval(t)),
            Carrier::Expr(f) => f.eval(t),
            Carrier::Tail(f) => f.eval(t),
        }
    }

    pub fn monotonicity(&self) -> Mono {
        match self {
            Carrier::Step(f) => step_monotonicity(f),
            Carrier::Expr(f) => f.monotonicity(512),
            Carrier::Tail(f) => f.monotonicity(),
        }
    }

    /// Interior breakpoints below `hi`, capped. For tails the prefix end and
    /// window cell endpoints are reported.
    pub fn breakpoints_below(&self, hi: R, cap: usize) -> Result<Vec<R>> {
        let mut out = Vec::new();
        match self {
            Carrier::Step(f) => {
                for c in f.cells() {
                    out.push(c.lo);
                    out.push(c.hi);
                }
            }
            Carrier::Expr(f) => {
                for (iv, _) in f.pieces() {
                    out.push(iv.lo());
                    out.push(iv.hi());
                }
            }
            Carrier::Tail(f) => {
                match f.prefix() {
                    TailPrefix::Step(p) => {
                        for c in p.cells() {
                            out.push(c.lo);
                            out.push(c.hi);
                        }
                    }
                    TailPrefix::Expr(p) => {
                        for (iv, _) in p.pieces() {
                            out.push(iv.lo());
                            out.push(iv.hi());
                        }
                    }
                }
                let mut n = f.n0();
                loop {
                    let x = f.x_at(n)?;
                    if x >= hi || out.len() >= cap {
                        break;
                    }
                    out.push(x);
                    n += 1;
                }
            }
        }
        out.retain(|&x| x < hi);
        out.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        out.dedup_by(|a, b| (*a - *b).abs() <= cmp_eps::<R>());
        Ok(out)
    }

    /// Essential infimum and supremum over `B` (positive measure required).
    pub fn ess_bounds(&self, set: &IntervalSet<R>) -> Result<Bounds<R>> {
        let eps = cmp_eps::<R>();
        if set.measure() <= eps {
            return Err(Error::NullSet("ess_bounds over a null set".into()));
        }
        match self {
            Carrier::Step(f) => step_bounds(f, set),
            Carrier::Expr(f) => expr_bounds(f, set),
            Carrier::Tail(f) => tail_bounds(f, set),
        }
    }

    /// Essential-range components over the full domain `[0,1)`.
    pub fn range_parts(&self) -> Result<Vec<RangePart<R>>> {
        match self {
            Carrier::Step(f) => {
                let mut parts: Vec<RangePart<R>> =
                    f.cells().iter().map(|c| RangePart::Point(c.value)).collect();
                if f.support_measure() < R::one() - cmp_eps::<R>() {
                    parts.push(RangePart::Point(R::zero()));
                }
                Ok(parts)
            }
            Carrier::Expr(f) => {
                let mut parts = Vec::new();
                let mut covered = R::zero();
                for (iv, node) in f.pieces() {
                    covered += iv.measure();
                    for seg in node.monotone_segments(iv, 1024)? {
                        let lo = seg.value_lo.min(seg.value_hi);
                        let hi = seg.value_lo.max(seg.value_hi);
                        if hi - lo <= cmp_eps::<R>() {
                            parts.push(RangePart::Point(lo));
                        } else {
                            parts.push(RangePart::Segment(lo, hi));
                        }
                    }
                }
                if covered < R::one() - cmp_eps::<R>() {
                    parts.push(RangePart::Point(R::zero()));
                }
                Ok(parts)
            }
            Carrier::Tail(f) => {
                let mut parts = match f.prefix() {
                    TailPrefix::Step(p) => Carrier::Step(p.clone()).range_parts()?,
                    TailPrefix::Expr(p) => Carrier::Expr(p.clone()).range_parts()?,
                };
                // Prefix coverage gaps were handled above against [0,1); the
                // zero point only applies if the prefix really has gaps below
                // the tail start, so recompute it honestly.
                parts.retain(|p| !matches!(p, RangePart::Point(z) if *z == R::zero()));
                let x0 = f.tail_start()?;
                let prefix_measure = match f.prefix() {
                    TailPrefix::Step(p) => p.support_measure(),
                    TailPrefix::Expr(p) => {
                        let mut m = R::zero();
                        for iv in p.domain() {
                            m += iv.measure();
                        }
                        m
                    }
                };
                if prefix_measure < x0 - cmp_eps::<R>() {
                    parts.push(RangePart::Point(R::zero()));
                }
                let end = f.n0() + TAIL_RANGE_WINDOW;
                for n in f.n0()..end {
                    parts.push(RangePart::Point(f.value_at(n)?));
                }
                // Closure of the remaining (infinite) value set.
                let rem = tail_remainder_bounds(f, end)?;
                parts.push(RangePart::Segment(rem.inf, rem.sup));
                Ok(parts)
            }
        }
    }

    /// Certified lower bound for the essential infimum over all of `[0,1)`.
    /// For tails that keep decreasing past the probe window this is the
    /// conservative floor (zero for nonnegative tails).
    pub fn ess_inf_floor(&self) -> Result<R> {
        let full = IntervalSet::from_interval(Interval::new(R::zero(), R::one()).expect("unit"));
        let b = self.ess_bounds(&full)?;
        Ok(b.inf)
    }
}

fn step_bounds<R: Real>(f: &StepFn<R>, set: &IntervalSet<R>) -> Result<Bounds<R>> {
    let eps = cmp_eps::<R>();
    let mut inf = R::infinity();
    let mut sup = R::neg_infinity();
    let mut covered = R::zero();
    for c in f.cells() {
        let iv = Interval::new(c.lo, c.hi).expect("valid cell");
        let m = set.intersect_interval(&iv).measure();
        if m > eps {
            inf = inf.min(c.value);
            sup = sup.max(c.value);
            covered += m;
        }
    }
    if covered < set.measure() - eps {
        // implicit zero on the uncovered part
        inf = inf.min(R::zero());
        sup = sup.max(R::zero());
    }
    Ok(Bounds {
        inf,
        sup,
        certified: true,
    })
}

fn expr_bounds<R: Real>(f: &ExprPiecewise<R>, set: &IntervalSet<R>) -> Result<Bounds<R>> {
    let eps = cmp_eps::<R>();
    let mut inf = R::infinity();
    let mut sup = R::neg_infinity();
    let mut covered = R::zero();
    for (iv, node) in f.pieces() {
        let within = set.intersect_interval(iv);
        for sub in within.intervals() {
            if sub.measure() <= eps {
                continue;
            }
            covered += sub.measure();
            for seg in node.monotone_segments(sub, 512)? {
                inf = inf.min(seg.value_lo.min(seg.value_hi));
                sup = sup.max(seg.value_lo.max(seg.value_hi));
            }
        }
    }
    if covered < set.measure() - eps {
        inf = inf.min(R::zero());
        sup = sup.max(R::zero());
    }
    Ok(Bounds {
        inf,
        sup,
        certified: true,
    })
}

/// Bounds of the tail values for cell indices `>= from`, using far samples
/// of the value sequence when the remainder is infinite.
fn tail_remainder_bounds<R: Real>(f: &TailFamily<R>, from: u64) -> Result<Bounds<R>> {
    let mono = f.values_monotonicity();
    let v_from = f.value_at(from)?;
    let far1 = f.values().eval(1_000_000_000)?;
    let far2 = f.values().eval(1_000_000_000_000_000)?;
    let plateau = (far1 - far2).abs() <= R::c(1e-9);
    match mono {
        Mono::NonIncreasing => {
            let inf = if plateau {
                far2 - R::c(1e-9)
            } else if far2 >= R::zero() {
                // Still decreasing at the far probes; the limit cannot be
                // certified, fall to the nonnegative floor.
                R::zero()
            } else {
                return Err(Error::Unsupported(
                    "tail values decrease without a certifiable floor".into(),
                ));
            };
            Ok(Bounds {
                inf,
                sup: v_from,
                certified: plateau,
            })
        }
        Mono::NonDecreasing => {
            let sup = if plateau {
                far2 + R::c(1e-9)
            } else {
                far2.max(v_from) + R::c(1e-6)
            };
            Ok(Bounds {
                inf: v_from,
                sup,
                certified: plateau,
            })
        }
        _ => Err(Error::Unsupported(
            "tail values not certified monotone on the verification window".into(),
        )),
    }
}

fn tail_bounds<R: Real>(f: &TailFamily<R>, set: &IntervalSet<R>) -> Result<Bounds<R>> {
    let eps = cmp_eps::<R>();
    let x0 = f.tail_start()?;
    let mut acc: Option<Bounds<R>> = None;
    let mut merge = |b: Bounds<R>| {
        acc = Some(match acc {
            Some(prev) => prev.merge(b),
            None => b,
        });
    };

    // Prefix portion.
    if x0 > eps {
        let prefix_region = IntervalSet::from_interval(Interval::new(R::zero(), x0).expect("x0>0"));
        let within = set.intersect(&prefix_region);
        if within.measure() > eps {
            let b = match f.prefix() {
                TailPrefix::Step(p) => step_bounds(p, &within)?,
                TailPrefix::Expr(p) => expr_bounds(p, &within)?,
            };
            merge(b);
        }
    }

    // Tail portion.
    let tail_region_hi = set
        .endpoints()
        .into_iter()
        .fold(R::zero(), R::max)
        .min(R::one());
    if tail_region_hi > x0 + eps {
        let mut n = f.n0();
        let mut reached_window_end = false;
        loop {
            let lo = f.x_at(n)?;
            if lo >= tail_region_hi - eps {
                // a set touching 1 still owns the (sub-resolution but
                // positive-measure) accumulation tail of cells near 1
                if tail_region_hi >= R::one() - eps {
                    reached_window_end = true;
                }
                break;
            }
            if n >= f.n0() + TAIL_BOUND_WINDOW {
                reached_window_end = true;
                break;
            }
            let hi = f.x_at(n + 1)?.min(R::one());
            if hi > lo {
                let cell = Interval::new(lo, hi).expect("increasing endpoints");
                if set.intersect_interval(&cell).measure() > eps {
                    let v = f.value_at(n)?;
                    merge(Bounds {
                        inf: v,
                        sup: v,
                        certified: true,
                    });
                }
            }
            n += 1;
        }
        if reached_window_end {
            // The set reaches past the probe window; only sets touching 1
            // can do that with positive remaining measure.
            merge(tail_remainder_bounds(f, n)?);
        }
    }

    acc.ok_or_else(|| Error::NullSet("set has no positive-measure overlap".into()))
}

/// Pointwise difference `a - b` as a carrier, exact where representable.
pub fn difference<R: Real>(a: &Carrier<R>, b: &Carrier<R>) -> Result<Carrier<R>> {
    match (a, b) {
        (Carrier::Step(f), Carrier::Step(g)) => {
            let cells = crate::step::common_cells(f, g)
                .into_iter()
                .map(|(lo, hi, x, y)| Cell {
                    lo,
                    hi,
                    value: x - y,
                })
                .collect();
            Ok(Carrier::Step(StepFn::from_cells(cells)?))
        }
        (Carrier::Expr(_), _) | (_, Carrier::Expr(_))
            if !matches!(a, Carrier::Tail(_)) && !matches!(b, Carrier::Tail(_)) =>
        {
            let fa = to_expr_piecewise(a)?;
            let fb = to_expr_piecewise(b)?;
            Ok(Carrier::Expr(expr_difference(&fa, &fb)?))
        }
        (Carrier::Tail(f), Carrier::Step(g)) => tail_minus_step(f, g).map(Carrier::Tail),
        _ => Err(Error::Unsupported(
            "difference of this carrier combination is not representable".into(),
        )),
    }
}

fn to_expr_piecewise<R: Real>(c: &Carrier<R>) -> Result<ExprPiecewise<R>> {
    match c {
        Carrier::Expr(f) => Ok(f.clone()),
        Carrier::Step(f) => {
            let pieces = f
                .cells()
                .iter()
                .map(|cell| {
                    Ok((
                        Interval::new(cell.lo, cell.hi)?,
                        ExprNode::constant(cell.value),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            ExprPiecewise::new(pieces)
        }
        Carrier::Tail(_) => Err(Error::Unsupported(
            "tail family cannot be lifted to a finite expression".into(),
        )),
    }
}

fn expr_difference<R: Real>(
    a: &ExprPiecewise<R>,
    b: &ExprPiecewise<R>,
) -> Result<ExprPiecewise<R>> {
    let eps = cmp_eps::<R>();
    let mut pts = Vec::new();
    for (iv, _) in a.pieces().iter().chain(b.pieces()) {
        pts.push(iv.lo());
        pts.push(iv.hi());
    }
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    pts.dedup_by(|x, y| (*x - *y).abs() <= eps);
    let mut pieces = Vec::new();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= eps {
            continue;
        }
        let mid = lo + (hi - lo) / R::c(2.0);
        let na = piece_node_at(a, mid);
        let nb = piece_node_at(b, mid);
        if na.is_none() && nb.is_none() {
            continue;
        }
        let na = na.unwrap_or_else(|| ExprNode::constant(R::zero()));
        let nb = nb.unwrap_or_else(|| ExprNode::constant(R::zero()));
        pieces.push((Interval::new(lo, hi)?, ExprNode::sub(na, nb)));
    }
    ExprPiecewise::new(pieces)
}

fn piece_node_at<R: Real>(f: &ExprPiecewise<R>, t: R) -> Option<ExprNode<R>> {
    f.pieces()
        .iter()
        .find(|(iv, _)| iv.contains(t))
        .map(|(_, n)| n.clone())
}

/// `tail - step`, requiring the step function to be constant from the tail
/// start on. When the last step breakpoint lies inside the tail region, tail
/// cells up to it are materialized into the (step) prefix first.
fn tail_minus_step<R: Real>(f: &TailFamily<R>, g: &StepFn<R>) -> Result<TailFamily<R>> {
    let eps = cmp_eps::<R>();
    let x0 = f.tail_start()?;
    let last_bp = g
        .cells()
        .iter()
        .flat_map(|c| [c.lo, c.hi])
        .filter(|&x| x < R::one() - eps)
        .fold(R::zero(), R::max);

    let (prefix_step, n_start) = if last_bp <= x0 + eps {
        let p = match f.prefix() {
            TailPrefix::Step(p) => p.clone(),
            TailPrefix::Expr(_) => {
                return Err(Error::Unsupported(
                    "tail-minus-step with an expression prefix is only supported when the step is constant beyond the tail start".into(),
                ))
            }
        };
        (p, f.n0())
    } else {
        // Materialize tail cells past the breakpoints into the prefix.
        let p = match f.prefix() {
            TailPrefix::Step(p) => p.clone(),
            TailPrefix::Expr(_) => {
                return Err(Error::Unsupported(
                    "cannot extend an expression prefix with materialized tail cells".into(),
                ))
            }
        };
        let mut cells: Vec<Cell<R>> = p.cells().to_vec();
        let mut n = f.n0();
        loop {
            let lo = f.x_at(n)?;
            if lo >= last_bp - eps {
                break;
            }
            if n > f.n0() + 100_000 {
                return Err(Error::Unsupported(
                    "step breakpoint too deep inside the tail".into(),
                ));
            }
            let hi = f.x_at(n + 1)?;
            cells.push(Cell {
                lo,
                hi,
                value: f.value_at(n)?,
            });
            n += 1;
        }
        (StepFn::from_cells(cells)?, n)
    };

    let new_x0 = f.x_at(n_start)?;
    // The step function must now be constant on [new_x0, 1).
    let tail_region = Interval::new(new_x0, R::one())?;
    let mut const_val: Option<R> = None;
    let mut covered = R::zero();
    for c in g.cells() {
        let iv = Interval::new(c.lo, c.hi).expect("valid");
        if let Some(sub) = iv.intersect(&tail_region) {
            if sub.measure() > eps {
                match const_val {
                    None => const_val = Some(c.value),
                    Some(v) if (v - c.value).abs() <= eps => {}
                    Some(_) => {
                        return Err(Error::Unsupported(
                            "step function is not constant on the tail region".into(),
                        ))
                    }
                }
                covered += sub.measure();
            }
        }
    }
    let cval = if covered < tail_region.measure() - eps {
        match const_val {
            None => R::zero(),
            Some(_) => {
                return Err(Error::Unsupported(
                    "step function is not constant on the tail region".into(),
                ))
            }
        }
    } else {
        const_val.unwrap_or(R::zero())
    };

    // Prefix difference restricted below new_x0.
    let g_prefix_cells: Vec<Cell<R>> = g
        .cells()
        .iter()
        .filter_map(|c| {
            let lo = c.lo;
            let hi = c.hi.min(new_x0);
            if hi > lo + eps {
                Some(Cell {
                    lo,
                    hi,
                    value: c.value,
                })
            } else {
                None
            }
        })
        .collect();
    let g_prefix = StepFn::from_cells(g_prefix_cells)?;
    let diff_prefix_cells = crate::step::common_cells(&prefix_step, &g_prefix)
        .into_iter()
        .map(|(lo, hi, x, y)| Cell {
            lo,
            hi,
            value: x - y,
        })
        .collect();
    let diff_prefix = StepFn::from_cells(diff_prefix_cells)?;

    TailFamily::new(
        TailPrefix::Step(diff_prefix),
        f.endpoints().clone(),
        SequenceExpr::sub(f.values().clone(), SequenceExpr::constant(cval)),
        n_start,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_step() -> StepFn<f64> {
        StepFn::from_cells(vec![
            Cell {
                lo: 0.0,
                hi: 0.5,
                value: 1.5,
            },
            Cell {
                lo: 0.5,
                hi: 1.0,
                value: 3.0,
            },
        ])
        .unwrap()
    }

    #[test]
    fn step_bounds_full_and_sub() {
        let c = Carrier::Step(two_step());
        let full = IntervalSet::from_interval(Interval::new(0.0, 1.0).unwrap());
        let b = c.ess_bounds(&full).unwrap();
        assert_eq!((b.inf, b.sup), (1.5, 3.0));
        let sub = IntervalSet::from_interval(Interval::new(0.6, 0.9).unwrap());
        let b = c.ess_bounds(&sub).unwrap();
        assert_eq!((b.inf, b.sup), (3.0, 3.0));
    }

    #[test]
    fn expr_bounds_monotone_endpoint_values() {
        // p(x) = 2 + (1-x): bounds (2, 3) on [0,1)
        let node: ExprNode<f64> = ExprNode::add(
            ExprNode::constant(2.0),
            ExprNode::sub(ExprNode::constant(1.0), ExprNode::x()),
        );
        let f = ExprPiecewise::single(Interval::new(0.0, 1.0).unwrap(), node).unwrap();
        let c = Carrier::Expr(f);
        let full = IntervalSet::from_interval(Interval::new(0.0, 1.0).unwrap());
        let b = c.ess_bounds(&full).unwrap();
        assert!((b.inf - 2.0).abs() < 1e-9);
        assert!((b.sup - 3.0).abs() < 1e-9);
    }

    #[test]
    fn null_set_rejected() {
        let c = Carrier::Step(two_step());
        assert!(c.ess_bounds(&IntervalSet::empty()).is_err());
    }

    #[test]
    fn step_difference_exact() {
        let p = two_step();
        let q = StepFn::constant(1.0).unwrap();
        let d = difference(&Carrier::Step(p), &Carrier::Step(q)).unwrap();
        assert_eq!(d.eval(0.25).unwrap(), 0.5);
        assert_eq!(d.eval(0.75).unwrap(), 2.0);
    }

    #[test]
    fn expr_minus_step_difference() {
        // (2 + (1-x)) - 2 = 1 - x
        let node: ExprNode<f64> = ExprNode::add(
            ExprNode::constant(2.0),
            ExprNode::sub(ExprNode::constant(1.0), ExprNode::x()),
        );
        let p = ExprPiecewise::single(Interval::new(0.0, 1.0).unwrap(), node).unwrap();
        let q = StepFn::constant(2.0).unwrap();
        let d = difference(&Carrier::Expr(p), &Carrier::Step(q)).unwrap();
        assert!((d.eval(0.25).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(d.monotonicity(), Mono::NonIncreasing);
    }
}
