//! Computations in variable exponent Lebesgue spaces on `[0,1]`: modulars,
//! Luxemburg norms, essential ranges, disjoint normalized sequences,
//! averaging projections, and decision procedures for disjoint strict
//! singularity of inclusions between two such spaces.

pub mod carrier;
pub mod corpus;
pub mod dss;
pub mod error;
pub mod expr;
pub mod exponent;
pub mod interval;
pub mod json;
pub mod modular;
pub mod num;
pub mod projection;
pub mod quad;
pub mod seq_expr;
pub mod sequence;
pub mod series;
pub mod step;
pub mod tail;

pub use error::{Error, Result};

/// Concrete `f64` aliases for the generic core types.
pub type Interval = interval::Interval<f64>;
pub type IntervalSet = interval::IntervalSet<f64>;
pub type StepFunction = step::StepFn<f64>;
pub type ExprPiecewise = expr::ExprPiecewise<f64>;
pub type ExprNode = expr::ExprNode<f64>;
pub type SequenceExpr = seq_expr::SequenceExpr<f64>;
pub type TailFamily = tail::TailFamily<f64>;
pub type TailPrefix = tail::TailPrefix<f64>;
pub type Carrier = carrier::Carrier<f64>;
pub type ExponentFunction = exponent::ExponentFn<f64>;
pub type RangeSet = exponent::RangeSet<f64>;
pub type PiecewiseFunction = modular::PwFun<f64>;
