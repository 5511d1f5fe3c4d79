//! Tail families: a prefix function on `[0, x_{n0})` followed by countably
//! many constant cells `[x_n, x_{n+1})` with values `v_n`, `x_n` increasing
//! to 1.

use crate::error::{Error, Result};
use crate::expr::{pair_mono, ExprPiecewise, Mono};
use crate::num::Real;
use crate::seq_expr::SequenceExpr;
use crate::step::StepFn;

/// Index search is capped; evaluation deeper in the tail is rejected.
pub const TAIL_INDEX_CAP: u64 = 1_000_000;

/// Window length used for monotonicity and endpoint certification.
pub const TAIL_WINDOW: u64 = 1_000;

#[derive(Clone, Debug, PartialEq)]
pub enum TailPrefix<R> {
    Step(StepFn<R>),
    Expr(ExprPiecewise<R>),
}

impl<R: Real> TailPrefix<R> {
    pub fn eval(&self, t: R) -> Result<R> {
        match self {
            TailPrefix::Step(f) => Ok(f.eval(t)),
            TailPrefix::Expr(f) => f.eval(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailFamily<R> {
    prefix: TailPrefix<R>,
    endpoints: SequenceExpr<R>,
    values: SequenceExpr<R>,
    n0: u64,
}

impl<R: Real> TailFamily<R> {
    pub fn new(
        prefix: TailPrefix<R>,
        endpoints: SequenceExpr<R>,
        values: SequenceExpr<R>,
        n0: u64,
    ) -> Result<Self> {
        if n0 == 0 {
            return Err(Error::Invalid("tail start index must be >= 1".into()));
        }
        endpoints.check_increasing_below_one(n0, 64)?;
        // Values must evaluate on a verification window.
        for n in n0..(n0 + 64) {
            values.eval(n)?;
        }
        Ok(TailFamily {
            prefix,
            endpoints,
            values,
            n0,
        })
    }

    pub fn prefix(&self) -> &TailPrefix<R> {
        &self.prefix
    }

    pub fn endpoints(&self) -> &SequenceExpr<R> {
        &self.endpoints
    }

    pub fn values(&self) -> &SequenceExpr<R> {
        &self.values
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn x_at(&self, n: u64) -> Result<R> {
        self.endpoints.eval(n)
    }

    pub fn value_at(&self, n: u64) -> Result<R> {
        self.values.eval(n)
    }

    /// Start of the tail region.
    pub fn tail_start(&self) -> Result<R> {
        self.x_at(self.n0)
    }

    /// Locates the cell index `n` with `x_n <= t < x_{n+1}` by galloping then
    /// bisecting. Errors with `Unsupported` past the index cap.
    pub fn locate(&self, t: R) -> Result<u64> {
        let x0 = self.tail_start()?;
        if t < x0 {
            return Err(Error::Invalid("point lies in the prefix".into()));
        }
        if t >= R::one() {
            return Err(Error::Invalid("point outside [0,1)".into()));
        }
        let mut lo = self.n0;
        let mut step = 1u64;
        let mut hi = lo + 1;
        loop {
            let xh = self.x_at(hi)?;
            if xh > t {
                break;
            }
            lo = hi;
            step = step.saturating_mul(2);
            hi = lo.saturating_add(step);
            if hi > TAIL_INDEX_CAP {
                return Err(Error::Unsupported(format!(
                    "tail index cap {TAIL_INDEX_CAP} exceeded near t={t}"
                )));
            }
        }
        // x_lo <= t < x_hi; bisect on indices.
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.x_at(mid)? <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    pub fn eval(&self, t: R) -> Result<R> {
        if t < R::zero() || t >= R::one() {
            return Err(Error::Invalid(format!("point {t} outside [0,1)")));
        }
        let x0 = self.tail_start()?;
        if t < x0 {
            self.prefix.eval(t)
        } else {
            self.value_at(self.locate(t)?)
        }
    }

    /// Monotonicity of the tail values on the verification window.
    pub fn values_monotonicity(&self) -> Mono {
        self.values.window_monotonicity(self.n0, TAIL_WINDOW)
    }

    /// Monotonicity of the whole function: prefix, junction, and tail window.
    pub fn monotonicity(&self) -> Mono {
        let tail = self.values_monotonicity();
        let prefix_mono = match &self.prefix {
            TailPrefix::Step(f) => step_monotonicity(f),
            TailPrefix::Expr(f) => f.monotonicity(512),
        };
        // Junction: last prefix value vs first tail value.
        let junction = match (self.junction_prefix_value(), self.value_at(self.n0)) {
            (Ok(a), Ok(b)) => pair_mono::<R>(a, b),
            _ => Mono::Unknown,
        };
        prefix_mono.combine(junction).combine(tail)
    }

    fn junction_prefix_value(&self) -> Result<R> {
        let x0 = self.tail_start()?;
        let just_before = x0 * R::c(1.0 - 1e-12);
        self.prefix.eval(just_before)
    }
}

/// Exact monotonicity of a step function by comparing consecutive cells,
/// counting implicit zero gaps between non-adjacent cells.
pub fn step_monotonicity<R: Real>(f: &StepFn<R>) -> Mono {
    let eps = crate::num::cmp_eps::<R>();
    let mut verdict = Mono::NonIncreasing;
    let mut prev: Option<(R, R)> = None; // (value, hi)
    for c in f.cells() {
        if let Some((pv, phi)) = prev {
            if c.lo - phi > eps {
                verdict = verdict
                    .combine(pair_mono::<R>(pv, R::zero()))
                    .combine(pair_mono::<R>(R::zero(), c.value));
            } else {
                verdict = verdict.combine(pair_mono::<R>(pv, c.value));
            }
        } else if c.lo > eps {
            // leading zero gap
            verdict = verdict.combine(pair_mono::<R>(R::zero(), c.value));
        }
        prev = Some((c.value, c.hi));
    }
    if let Some((pv, phi)) = prev {
        if R::one() - phi > eps {
            verdict = verdict.combine(pair_mono::<R>(pv, R::zero()));
        }
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::step::Cell;

    /// The worked decreasing tail: prefix 1 on [0, x_3), values 1/ln n from n0=3.
    pub fn slow_tail() -> TailFamily<f64> {
        let endpoints = SequenceExpr::sub(
            SequenceExpr::constant(1.0),
            SequenceExpr::pow(
                SequenceExpr::div(SequenceExpr::constant(1.0), SequenceExpr::n()),
                SequenceExpr::sub(SequenceExpr::n(), SequenceExpr::constant(1.0)),
            ),
        );
        let values = SequenceExpr::div(
            SequenceExpr::constant(1.0),
            SequenceExpr::ln(SequenceExpr::n()),
        );
        let x3 = 1.0 - (1.0f64 / 9.0);
        let prefix = TailPrefix::Step(
            StepFn::from_cells(vec![Cell {
                lo: 0.0,
                hi: x3,
                value: 1.0,
            }])
            .unwrap(),
        );
        TailFamily::new(prefix, endpoints, values, 3).unwrap()
    }

    #[test]
    fn eval_agrees_with_formula() {
        let f = slow_tail();
        // prefix
        assert_eq!(f.eval(0.25).unwrap(), 1.0);
        // inside cell n: [1-(1/n)^(n-1), 1-(1/(n+1))^n) has value 1/ln n
        for n in 3u64..12 {
            let lo = 1.0 - (1.0 / n as f64).powi(n as i32 - 1);
            let hi = 1.0 - (1.0 / (n as f64 + 1.0)).powi(n as i32);
            let mid = 0.5 * (lo + hi);
            assert!(
                (f.eval(mid).unwrap() - 1.0 / (n as f64).ln()).abs() < 1e-14,
                "n={n}"
            );
        }
    }

    #[test]
    fn locate_deep_point() {
        let f = slow_tail();
        let t = 1.0 - 2.0f64.powi(-40);
        let n = f.locate(t).unwrap();
        // n^(n-1) >= 2^40 at the located index
        assert!(f.x_at(n).unwrap() <= t && t < f.x_at(n + 1).unwrap());
    }

    #[test]
    fn whole_family_nonincreasing() {
        assert_eq!(slow_tail().monotonicity(), Mono::NonIncreasing);
    }

    #[test]
    fn increasing_junction_detected() {
        // prefix value 0.1 below the first tail value -> not monotone down
        let endpoints = SequenceExpr::sub(
            SequenceExpr::constant(1.0),
            SequenceExpr::div(SequenceExpr::constant(1.0), SequenceExpr::n()),
        );
        let values = SequenceExpr::div(
            SequenceExpr::constant(1.0),
            SequenceExpr::ln(SequenceExpr::n()),
        );
        let prefix = TailPrefix::Step(
            StepFn::from_cells(vec![Cell {
                lo: 0.0,
                hi: 0.5,
                value: 0.1,
            }])
            .unwrap(),
        );
        let f = TailFamily::new(prefix, endpoints, values, 2).unwrap();
        assert_eq!(f.monotonicity(), Mono::Neither);
    }
}
