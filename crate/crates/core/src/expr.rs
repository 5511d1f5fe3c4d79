//! Small expression grammar for analytic pieces: constants, `x`, arithmetic,
//! `pow`, `ln`. Deliberately restricted so derivative sign analysis and
//! monotone segmentation stay decidable.

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::num::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum ExprNode<R> {
    Const(R),
    X,
    Add(Box<ExprNode<R>>, Box<ExprNode<R>>),
    Sub(Box<ExprNode<R>>, Box<ExprNode<R>>),
    Mul(Box<ExprNode<R>>, Box<ExprNode<R>>),
    Div(Box<ExprNode<R>>, Box<ExprNode<R>>),
    Pow(Box<ExprNode<R>>, Box<ExprNode<R>>),
    Ln(Box<ExprNode<R>>),
}

/// Monotonicity classification of a function or carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mono {
    NonIncreasing,
    NonDecreasing,
    Neither,
    Unknown,
}

impl Mono {
    /// Combines verdicts of adjacent parts of one function.
    pub fn combine(self, other: Mono) -> Mono {
        use Mono::*;
        match (self, other) {
            (Unknown, _) | (_, Unknown) => Unknown,
            (Neither, _) | (_, Neither) => Neither,
            (NonIncreasing, NonIncreasing) => NonIncreasing,
            (NonDecreasing, NonDecreasing) => NonDecreasing,
            (NonIncreasing, NonDecreasing) | (NonDecreasing, NonIncreasing) => Neither,
        }
    }
}

/// Direction of an ordered value pair; flat pairs are reported as
/// `NonIncreasing` (compatible with either direction when combined).
pub fn pair_mono<R: Real>(a: R, b: R) -> Mono {
    let tol = R::c(1e-12);
    if b > a + tol {
        Mono::NonDecreasing
    } else {
        // strictly smaller or flat within tolerance: both are nonincreasing
        Mono::NonIncreasing
    }
}

// constructors mirror the node names; they are builders, not operator impls
#[allow(clippy::should_implement_trait)]
impl<R: Real> ExprNode<R> {
    pub fn constant(v: R) -> Self {
        ExprNode::Const(v)
    }

    pub fn x() -> Self {
        ExprNode::X
    }

    pub fn add(a: ExprNode<R>, b: ExprNode<R>) -> Self {
        match (&a, &b) {
            (ExprNode::Const(z), _) if *z == R::zero() => b,
            (_, ExprNode::Const(z)) if *z == R::zero() => a,
            _ => ExprNode::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: ExprNode<R>, b: ExprNode<R>) -> Self {
        match (&a, &b) {
            (_, ExprNode::Const(z)) if *z == R::zero() => a,
            _ => ExprNode::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: ExprNode<R>, b: ExprNode<R>) -> Self {
        match (&a, &b) {
            (ExprNode::Const(z), _) | (_, ExprNode::Const(z)) if *z == R::zero() => {
                ExprNode::Const(R::zero())
            }
            (ExprNode::Const(o), _) if *o == R::one() => b,
            (_, ExprNode::Const(o)) if *o == R::one() => a,
            _ => ExprNode::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: ExprNode<R>, b: ExprNode<R>) -> Self {
        ExprNode::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(base: ExprNode<R>, exponent: ExprNode<R>) -> Self {
        ExprNode::Pow(Box::new(base), Box::new(exponent))
    }

    pub fn ln(a: ExprNode<R>) -> Self {
        ExprNode::Ln(Box::new(a))
    }

    pub fn eval(&self, x: R) -> Result<R> {
        let v = match self {
            ExprNode::Const(c) => *c,
            ExprNode::X => x,
            ExprNode::Add(a, b) => a.eval(x)? + b.eval(x)?,
            ExprNode::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            ExprNode::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            ExprNode::Div(a, b) => {
                let d = b.eval(x)?;
                if d == R::zero() {
                    return Err(Error::EvalFailure(format!("division by zero at x={x}")));
                }
                a.eval(x)? / d
            }
            ExprNode::Pow(a, b) => {
                let base = a.eval(x)?;
                let e = b.eval(x)?;
                if base < R::zero() {
                    // Only integer exponents make sense for negative bases;
                    // reject to keep pointwise semantics unambiguous.
                    let rounded = e.round();
                    if (e - rounded).abs() > R::c(1e-9) {
                        return Err(Error::EvalFailure(format!(
                            "negative base {base} with non-integer exponent {e}"
                        )));
                    }
                    base.powf(rounded)
                } else {
                    base.powf(e)
                }
            }
            ExprNode::Ln(a) => {
                let v = a.eval(x)?;
                if v <= R::zero() {
                    return Err(Error::EvalFailure(format!(
                        "ln of nonpositive value {v} at x={x}"
                    )));
                }
                v.ln()
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::EvalFailure(format!("non-finite value at x={x}")))
        }
    }

    /// Symbolic derivative within the same grammar.
    pub fn deriv(&self) -> ExprNode<R> {
        use ExprNode as E;
        match self {
            E::Const(_) => E::Const(R::zero()),
            E::X => E::Const(R::one()),
            E::Add(a, b) => E::add(a.deriv(), b.deriv()),
            E::Sub(a, b) => E::sub(a.deriv(), b.deriv()),
            E::Mul(a, b) => E::add(
                E::mul(a.deriv(), (**b).clone()),
                E::mul((**a).clone(), b.deriv()),
            ),
            E::Div(a, b) => E::div(
                E::sub(
                    E::mul(a.deriv(), (**b).clone()),
                    E::mul((**a).clone(), b.deriv()),
                ),
                E::mul((**b).clone(), (**b).clone()),
            ),
            E::Pow(a, b) => {
                if let E::Const(c) = **b {
                    // d(a^c) = c a^(c-1) a', valid across sign changes of a.
                    E::mul(
                        E::Const(c),
                        E::mul(
                            E::pow((**a).clone(), E::Const(c - R::one())),
                            a.deriv(),
                        ),
                    )
                } else {
                    // d(a^b) = a^b * (b' ln a + b a'/a); requires a > 0.
                    let self_clone = E::pow((**a).clone(), (**b).clone());
                    let term1 = E::mul(b.deriv(), E::ln((**a).clone()));
                    let term2 = E::mul((**b).clone(), E::div(a.deriv(), (**a).clone()));
                    E::mul(self_clone, E::add(term1, term2))
                }
            }
            E::Ln(a) => E::div(a.deriv(), (**a).clone()),
        }
    }

    /// Samples the expression over `[lo, hi)` and fails on any undefined or
    /// non-finite value.
    pub fn validate_on(&self, iv: &Interval<R>, samples: usize) -> Result<()> {
        for x in sample_points(iv, samples) {
            self.eval(x)?;
        }
        Ok(())
    }
}

/// Interior sample points of `[lo, hi)`, including points very close to both
/// endpoints but never `hi` itself.
pub fn sample_points<R: Real>(iv: &Interval<R>, n: usize) -> Vec<R> {
    let lo = iv.lo();
    let len = iv.hi() - iv.lo();
    let mut pts = Vec::with_capacity(n + 1);
    let nn = R::from_usize(n).expect("small count");
    for i in 0..n {
        pts.push(lo + len * R::from_usize(i).expect("small") / nn);
    }
    pts.push(lo + len * R::c(1.0 - 1e-9));
    pts
}

/// A monotone segment of an expression piece.
#[derive(Clone, Copy, Debug)]
pub struct MonoSegment<R> {
    pub lo: R,
    pub hi: R,
    pub mono: Mono,
    /// Value near the left endpoint (limit from the right).
    pub value_lo: R,
    /// Value near the right endpoint (limit from the left).
    pub value_hi: R,
}

impl<R: Real> ExprNode<R> {
    /// Splits `[lo, hi)` into segments on which the derivative keeps one
    /// sign. Crossings are located by bisection on the derivative.
    pub fn monotone_segments(&self, iv: &Interval<R>, grid: usize) -> Result<Vec<MonoSegment<R>>> {
        let d = self.deriv();
        let tol = R::c(1e-11);
        let pts = sample_points(iv, grid);
        let signs: Vec<i8> = pts
            .iter()
            .map(|&x| {
                d.eval(x).map(|v| {
                    if v > tol {
                        1i8
                    } else if v < -tol {
                        -1i8
                    } else {
                        0i8
                    }
                })
            })
            .collect::<Result<_>>()
            .map_err(|e| Error::Unsupported(format!("derivative not evaluable: {e}")))?;

        // Breakpoints where the (nonzero) sign flips.
        let mut breaks = vec![iv.lo()];
        let mut last_nonzero = 0i8;
        for (i, &s) in signs.iter().enumerate() {
            if s != 0 && last_nonzero != 0 && s != last_nonzero {
                let mut a = pts[i - 1];
                let mut b = pts[i];
                for _ in 0..80 {
                    let mid = a + (b - a) / R::c(2.0);
                    let v = d.eval(mid).unwrap_or(R::zero());
                    if (v > R::zero()) == (s > 0) {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                breaks.push(a + (b - a) / R::c(2.0));
            }
            if s != 0 {
                last_nonzero = s;
            }
        }
        breaks.push(iv.hi());

        let mut segments = Vec::new();
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi - lo <= R::c(1e-13) {
                continue;
            }
            let seg = Interval::new(lo.max(R::zero()), hi.min(R::one()))
                .map_err(|e| Error::Unsupported(format!("degenerate segment: {e}")))?;
            let spts = sample_points(&seg, 64.min(grid));
            let mut mono = Mono::NonDecreasing;
            let mut any_up = false;
            let mut any_down = false;
            for &x in &spts {
                match d.eval(x) {
                    Ok(v) if v > tol => any_up = true,
                    Ok(v) if v < -tol => any_down = true,
                    Ok(_) => {}
                    Err(e) => {
                        return Err(Error::Unsupported(format!(
                            "derivative not evaluable: {e}"
                        )))
                    }
                }
            }
            if any_up && any_down {
                mono = Mono::Neither;
            } else if any_down {
                mono = Mono::NonIncreasing;
            }
            let value_lo = self.eval(lo)?;
            // Right endpoint may sit outside the half-open domain; take the
            // left limit, falling back to a point just inside.
            let value_hi = self
                .eval(hi)
                .or_else(|_| self.eval(lo + (hi - lo) * R::c(1.0 - 1e-12)))?;
            segments.push(MonoSegment {
                lo,
                hi,
                mono,
                value_lo,
                value_hi,
            });
        }
        Ok(segments)
    }

    /// Monotonicity verdict over an interval. Built on the symbolic
    /// derivative; expressions whose derivative cannot be evaluated yield
    /// `Unknown`.
    pub fn monotonicity(&self, iv: &Interval<R>, grid: usize) -> Mono {
        match self.monotone_segments(iv, grid) {
            Ok(segs) => {
                let any_up = segs.iter().any(|s| s.mono == Mono::NonDecreasing
                    && (s.value_hi - s.value_lo).abs() > R::c(1e-12));
                let any_down = segs.iter().any(|s| s.mono == Mono::NonIncreasing
                    && (s.value_hi - s.value_lo).abs() > R::c(1e-12));
                let any_neither = segs.iter().any(|s| s.mono == Mono::Neither);
                if any_neither || (any_up && any_down) {
                    Mono::Neither
                } else if any_down {
                    Mono::NonIncreasing
                } else if any_up {
                    Mono::NonDecreasing
                } else {
                    // flat
                    Mono::NonIncreasing
                }
            }
            Err(_) => Mono::Unknown,
        }
    }
}

/// Piecewise expression-defined function on disjoint intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprPiecewise<R> {
    pieces: Vec<(Interval<R>, ExprNode<R>)>,
}

impl<R: Real> ExprPiecewise<R> {
    pub fn new(mut pieces: Vec<(Interval<R>, ExprNode<R>)>) -> Result<Self> {
        pieces.sort_by(|a, b| a.0.lo().partial_cmp(&b.0.lo()).expect("finite"));
        for w in pieces.windows(2) {
            if w[1].0.lo() < w[0].0.hi() - crate::num::cmp_eps::<R>() {
                return Err(Error::Invalid("expression pieces overlap".into()));
            }
        }
        for (iv, node) in &pieces {
            node.validate_on(iv, 256)?;
        }
        Ok(ExprPiecewise { pieces })
    }

    pub fn single(iv: Interval<R>, node: ExprNode<R>) -> Result<Self> {
        ExprPiecewise::new(vec![(iv, node)])
    }

    pub fn pieces(&self) -> &[(Interval<R>, ExprNode<R>)] {
        &self.pieces
    }

    /// Evaluates at `t`; zero off the pieces.
    pub fn eval(&self, t: R) -> Result<R> {
        for (iv, node) in &self.pieces {
            if iv.contains(t) {
                return node.eval(t);
            }
        }
        Ok(R::zero())
    }

    pub fn domain(&self) -> Vec<Interval<R>> {
        self.pieces.iter().map(|(iv, _)| *iv).collect()
    }

    /// Monotonicity across all pieces including the junctions between them.
    pub fn monotonicity(&self, grid: usize) -> Mono {
        let mut verdict = Mono::NonIncreasing;
        let mut prev_end: Option<R> = None;
        for (iv, node) in &self.pieces {
            verdict = verdict.combine(node.monotonicity(iv, grid));
            let lo_val = match node.eval(iv.lo()) {
                Ok(v) => v,
                Err(_) => return Mono::Unknown,
            };
            if let Some(pe) = prev_end {
                verdict = verdict.combine(pair_mono::<R>(pe, lo_val));
            }
            prev_end = node
                .eval(iv.hi())
                .or_else(|_| node.eval(iv.lo() + (iv.hi() - iv.lo()) * R::c(1.0 - 1e-12)))
                .ok();
        }
        verdict
    }

    /// Last value before the end of the final piece.
    pub fn end_value(&self) -> Result<R> {
        let (iv, node) = self
            .pieces
            .last()
            .ok_or_else(|| Error::Invalid("empty piecewise expression".into()))?;
        node.eval(iv.hi())
            .or_else(|_| node.eval(iv.lo() + (iv.hi() - iv.lo()) * R::c(1.0 - 1e-12)))
    }
}
