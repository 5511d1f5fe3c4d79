//! Expressions over an integer index `n`, used for tail endpoints, tail
//! values, and series general terms.

use crate::error::{Error, Result};
use crate::expr::Mono;
use crate::num::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum SequenceExpr<R> {
    Const(R),
    N,
    Ln(Box<SequenceExpr<R>>),
    Add(Box<SequenceExpr<R>>, Box<SequenceExpr<R>>),
    Sub(Box<SequenceExpr<R>>, Box<SequenceExpr<R>>),
    Mul(Box<SequenceExpr<R>>, Box<SequenceExpr<R>>),
    Div(Box<SequenceExpr<R>>, Box<SequenceExpr<R>>),
    Pow(Box<SequenceExpr<R>>, Box<SequenceExpr<R>>),
}

// constructors mirror the node names; they are builders, not operator impls
#[allow(clippy::should_implement_trait)]
impl<R: Real> SequenceExpr<R> {
    pub fn constant(v: R) -> Self {
        SequenceExpr::Const(v)
    }

    pub fn n() -> Self {
        SequenceExpr::N
    }

    pub fn ln(a: SequenceExpr<R>) -> Self {
        SequenceExpr::Ln(Box::new(a))
    }

    pub fn add(a: SequenceExpr<R>, b: SequenceExpr<R>) -> Self {
        SequenceExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: SequenceExpr<R>, b: SequenceExpr<R>) -> Self {
        SequenceExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: SequenceExpr<R>, b: SequenceExpr<R>) -> Self {
        SequenceExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: SequenceExpr<R>, b: SequenceExpr<R>) -> Self {
        SequenceExpr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: SequenceExpr<R>, b: SequenceExpr<R>) -> Self {
        SequenceExpr::Pow(Box::new(a), Box::new(b))
    }

    /// When the expression has the form `1 - u(n)`, returns `u`: evaluating
    /// the complement directly keeps precision near 1 that the subtraction
    /// would round away.
    pub fn one_minus(&self) -> Option<&SequenceExpr<R>> {
        if let SequenceExpr::Sub(a, b) = self {
            if matches!(**a, SequenceExpr::Const(c) if c == R::one()) {
                return Some(b);
            }
        }
        None
    }

    pub fn eval(&self, n: u64) -> Result<R> {
        let v = match self {
            SequenceExpr::Const(c) => *c,
            SequenceExpr::N => R::from_index(n),
            SequenceExpr::Ln(a) => {
                let v = a.eval(n)?;
                if v <= R::zero() {
                    return Err(Error::EvalFailure(format!(
                        "ln of nonpositive value {v} at n={n}"
                    )));
                }
                v.ln()
            }
            SequenceExpr::Add(a, b) => a.eval(n)? + b.eval(n)?,
            SequenceExpr::Sub(a, b) => a.eval(n)? - b.eval(n)?,
            SequenceExpr::Mul(a, b) => a.eval(n)? * b.eval(n)?,
            SequenceExpr::Div(a, b) => {
                let d = b.eval(n)?;
                if d == R::zero() {
                    return Err(Error::EvalFailure(format!("division by zero at n={n}")));
                }
                a.eval(n)? / d
            }
            SequenceExpr::Pow(a, b) => {
                let base = a.eval(n)?;
                let e = b.eval(n)?;
                if base < R::zero() {
                    return Err(Error::EvalFailure(format!(
                        "negative base {base} at n={n}"
                    )));
                }
                base.powf(e)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::EvalFailure(format!("non-finite value at n={n}")))
        }
    }

    /// Window-based monotonicity classification on `n0 .. n0+window`.
    pub fn window_monotonicity(&self, n0: u64, window: u64) -> Mono {
        let tol = R::c(1e-12);
        let mut any_up = false;
        let mut any_down = false;
        let mut prev = match self.eval(n0) {
            Ok(v) => v,
            Err(_) => return Mono::Unknown,
        };
        for n in (n0 + 1)..(n0 + window) {
            let v = match self.eval(n) {
                Ok(v) => v,
                Err(_) => return Mono::Unknown,
            };
            if v > prev + tol {
                any_up = true;
            } else if v < prev - tol {
                any_down = true;
            }
            prev = v;
        }
        match (any_up, any_down) {
            (true, true) => Mono::Neither,
            (false, true) => Mono::NonIncreasing,
            (true, false) => Mono::NonDecreasing,
            (false, false) => Mono::NonIncreasing, // flat
        }
    }

    /// Verifies the sequence is strictly increasing with values below 1 on a
    /// window (tail endpoint discipline). Values may saturate at 1.0 in
    /// floating point for very deep indices, which is tolerated as equality.
    pub fn check_increasing_below_one(&self, n0: u64, window: u64) -> Result<()> {
        let mut prev = self.eval(n0)?;
        for n in (n0 + 1)..(n0 + window) {
            let v = self.eval(n)?;
            if v > R::one() {
                return Err(Error::Invalid(format!("endpoint above 1 at n={n}")));
            }
            if v < prev {
                return Err(Error::Invalid(format!(
                    "endpoints not increasing at n={n}: {prev} then {v}"
                )));
            }
            if v == prev && prev < R::one() {
                return Err(Error::Invalid(format!(
                    "endpoints stalled below 1 at n={n}"
                )));
            }
            prev = v;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// x_n = 1 - (1/n)^(n-1), the tail endpoints of the worked example family.
    pub fn slow_endpoints() -> SequenceExpr<f64> {
        SequenceExpr::sub(
            SequenceExpr::constant(1.0),
            SequenceExpr::pow(
                SequenceExpr::div(SequenceExpr::constant(1.0), SequenceExpr::n()),
                SequenceExpr::sub(SequenceExpr::n(), SequenceExpr::constant(1.0)),
            ),
        )
    }

    #[test]
    fn endpoint_formula_at_n2() {
        let x = slow_endpoints();
        assert!((x.eval(2).unwrap() - 0.5).abs() < 1e-15);
        assert!((x.eval(3).unwrap() - (1.0 - 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn endpoints_increase() {
        let x = slow_endpoints();
        x.check_increasing_below_one(2, 64).unwrap();
    }

    #[test]
    fn inverse_log_values_decrease() {
        // v_n = 1/ln(n)
        let v = SequenceExpr::div(
            SequenceExpr::constant(1.0),
            SequenceExpr::ln(SequenceExpr::n()),
        );
        assert_eq!(v.window_monotonicity(3, 1000), Mono::NonIncreasing);
    }

    #[test]
    fn eval_errors_are_reported() {
        let bad = SequenceExpr::ln(SequenceExpr::sub(
            SequenceExpr::constant(0.0),
            SequenceExpr::n(),
        ));
        assert!(bad.eval(1).is_err());
    }
}
