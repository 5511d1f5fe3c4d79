//! Built-in example instances: the slowly-vanishing-gap tail pair with its
//! endpoint generator, the power-gap family, and the two-band projection
//! family defaults.

use crate::dss::EmbeddingProblem;
use crate::error::{Error, Result};
use crate::exponent::ExponentFn;
use crate::expr::ExprNode;
use crate::projection::{build_two_band_family, TwoBandFamily};
use crate::seq_expr::SequenceExpr as Seq;
use crate::step::Cell;
use crate::tail::{TailFamily, TailPrefix};
use crate::{Carrier, ExponentFunction, SequenceExpr, StepFunction};

pub const CORPUS_NAMES: [&str; 3] = ["ejemp2", "power-family", "example24"];

/// Endpoint generator `x_n = 1 - (1/n)^{n-1}`.
pub fn ejemp2_x_gen() -> SequenceExpr {
    Seq::sub(
        Seq::constant(1.0),
        Seq::pow(
            Seq::div(Seq::constant(1.0), Seq::n()),
            Seq::sub(Seq::n(), Seq::constant(1.0)),
        ),
    )
}

/// Tail exponent `p = 1 + 1/ln(n)` on `[x_n, x_{n+1})`, constant
/// `1 + 1/ln(3)` on the prefix `[0, x_3)`; the gap to `q = 1` decreases to 0
/// while the inclusion stays disjointly strictly singular.
pub fn ejemp2_exponent() -> Result<ExponentFunction> {
    // the tail starts at n0 = 3: 1/ln(2) exceeds 1 and would break the
    // nonincreasing-gap shape at n = 2
    let x3 = 1.0 - (1.0f64 / 3.0).powi(2);
    let prefix_value = 1.0 + 1.0 / 3.0f64.ln();
    let prefix = TailPrefix::Step(StepFunction::from_cells(vec![Cell {
        lo: 0.0,
        hi: x3,
        value: prefix_value,
    }])?);
    let values = Seq::add(
        Seq::constant(1.0),
        Seq::div(Seq::constant(1.0), Seq::ln(Seq::n())),
    );
    let tail = TailFamily::new(prefix, ejemp2_x_gen(), values, 3)?;
    ExponentFn::new(Carrier::Tail(tail))
}

pub fn ejemp2_problem() -> Result<EmbeddingProblem<f64>> {
    let q = ExponentFn::new(Carrier::Step(StepFunction::constant(1.0)?))?;
    Ok(EmbeddingProblem::new(ejemp2_exponent()?, q))
}

/// `p(x) = q + (1 - x)^r` on `[0,1)` against the constant exponent `q`.
pub fn power_family_problem(r: f64, q: f64) -> Result<EmbeddingProblem<f64>> {
    if r < 1.0 {
        return Err(Error::Invalid("power-family exponent r must be >= 1".into()));
    }
    if q < 1.0 {
        return Err(Error::Invalid("power-family base q must be >= 1".into()));
    }
    let iv = crate::Interval::new(0.0, 1.0)?;
    let node = ExprNode::add(
        ExprNode::constant(q),
        ExprNode::pow(
            ExprNode::sub(ExprNode::constant(1.0), ExprNode::x()),
            ExprNode::constant(r),
        ),
    );
    let p = ExponentFn::new(Carrier::Expr(crate::ExprPiecewise::single(iv, node)?))?;
    let qf = ExponentFn::new(Carrier::Step(StepFunction::constant(q)?))?;
    Ok(EmbeddingProblem::new(p, qf))
}

/// Two-value exponent hosting both bands of the default two-band family.
pub fn example24_exponent() -> Result<ExponentFunction> {
    ExponentFn::new(Carrier::Step(StepFunction::from_cells(vec![
        Cell { lo: 0.0, hi: 0.5, value: 1.0 },
        Cell { lo: 0.5, hi: 1.0, value: 2.0 },
    ])?))
}

pub const EXAMPLE24_Q1: f64 = 1.0;
pub const EXAMPLE24_Q2: f64 = 2.0;
pub const EXAMPLE24_DELTA: f64 = 0.2;
pub const EXAMPLE24_ALPHA: f64 = 2.0;

/// Default two-band family truncated to `k_max` sets.
pub fn example24_family(k_max: usize) -> Result<TwoBandFamily<f64>> {
    build_two_band_family(
        &example24_exponent()?,
        EXAMPLE24_Q1,
        EXAMPLE24_Q2,
        EXAMPLE24_DELTA,
        EXAMPLE24_ALPHA,
        k_max,
    )
}
