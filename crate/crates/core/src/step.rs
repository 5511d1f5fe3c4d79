//! Step functions on `[0,1)`: finitely many constant pieces, implicit zero
//! elsewhere, exact refinement and decreasing rearrangement.

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::num::{cmp_eps, kahan_sum, Real};

/// One constant cell of a step function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell<R> {
    pub lo: R,
    pub hi: R,
    pub value: R,
}

/// A step function stored as sorted disjoint cells with nonzero values.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StepFn<R> {
    cells: Vec<Cell<R>>,
}

impl<R: Real> StepFn<R> {
    pub fn zero() -> Self {
        StepFn { cells: Vec::new() }
    }

    pub fn from_cells(mut cells: Vec<Cell<R>>) -> Result<Self> {
        let eps = cmp_eps::<R>();
        cells.retain(|c| c.value != R::zero());
        for c in &cells {
            if !(c.lo.is_finite() && c.hi.is_finite() && c.value.is_finite()) {
                return Err(Error::Invalid("non-finite cell".into()));
            }
            if c.lo >= c.hi || c.lo < R::zero() || c.hi > R::one() {
                return Err(Error::Invalid(format!(
                    "bad cell [{}, {}) in [0,1]",
                    c.lo, c.hi
                )));
            }
        }
        cells.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite"));
        let mut out: Vec<Cell<R>> = Vec::with_capacity(cells.len());
        for c in cells {
            if let Some(prev) = out.last_mut() {
                if c.lo < prev.hi - eps {
                    return Err(Error::Invalid("overlapping cells".into()));
                }
                if (c.lo - prev.hi).abs() <= eps && c.value == prev.value {
                    prev.hi = c.hi;
                    continue;
                }
            }
            out.push(c);
        }
        Ok(StepFn { cells: out })
    }

    pub fn from_pieces(pieces: Vec<(IntervalSet<R>, R)>) -> Result<Self> {
        let mut cells = Vec::new();
        for (set, value) in pieces {
            for iv in set.intervals() {
                cells.push(Cell {
                    lo: iv.lo(),
                    hi: iv.hi(),
                    value,
                });
            }
        }
        StepFn::from_cells(cells)
    }

    pub fn constant(value: R) -> Result<Self> {
        StepFn::from_cells(vec![Cell {
            lo: R::zero(),
            hi: R::one(),
            value,
        }])
    }

    /// Indicator of a set scaled by `value`.
    pub fn indicator(set: &IntervalSet<R>, value: R) -> Result<Self> {
        StepFn::from_pieces(vec![(set.clone(), value)])
    }

    pub fn cells(&self) -> &[Cell<R>] {
        &self.cells
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn eval(&self, t: R) -> R {
        match self.cells.binary_search_by(|c| {
            if t < c.lo {
                std::cmp::Ordering::Greater
            } else if t >= c.hi {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Equal
            }
        }) {
            Ok(i) => self.cells[i].value,
            Err(_) => R::zero(),
        }
    }

    pub fn support(&self) -> IntervalSet<R> {
        IntervalSet::new(
            self.cells
                .iter()
                .map(|c| Interval::new(c.lo, c.hi).expect("valid cell"))
                .collect(),
        )
        .expect("cells disjoint")
    }

    pub fn support_measure(&self) -> R {
        kahan_sum(self.cells.iter().map(|c| c.hi - c.lo))
    }

    pub fn max_abs(&self) -> R {
        self.cells
            .iter()
            .map(|c| c.value.abs())
            .fold(R::zero(), R::max)
    }

    pub fn scale(&self, c: R) -> StepFn<R> {
        if c == R::zero() {
            return StepFn::zero();
        }
        StepFn {
            cells: self
                .cells
                .iter()
                .map(|cell| Cell {
                    lo: cell.lo,
                    hi: cell.hi,
                    value: cell.value * c,
                })
                .collect(),
        }
    }

    pub fn abs(&self) -> StepFn<R> {
        StepFn {
            cells: self
                .cells
                .iter()
                .map(|cell| Cell {
                    lo: cell.lo,
                    hi: cell.hi,
                    value: cell.value.abs(),
                })
                .collect(),
        }
    }

    /// Pieces grouped by value, for the wire format.
    pub fn pieces(&self) -> Vec<(IntervalSet<R>, R)> {
        let mut out: Vec<(IntervalSet<R>, R)> = Vec::new();
        for c in &self.cells {
            let iv = Interval::new(c.lo, c.hi).expect("valid cell");
            match out.iter_mut().find(|(_, v)| *v == c.value) {
                Some((set, _)) => {
                    *set = set
                        .union_disjoint(&IntervalSet::from_interval(iv))
                        .expect("cells disjoint");
                }
                None => out.push((IntervalSet::from_interval(iv), c.value)),
            }
        }
        out
    }

    pub fn add(&self, other: &StepFn<R>) -> Result<StepFn<R>> {
        let cells = common_cells(self, other)
            .into_iter()
            .map(|(lo, hi, a, b)| Cell {
                lo,
                hi,
                value: a + b,
            })
            .collect();
        StepFn::from_cells(cells)
    }

    /// Pointwise product `self * other`.
    pub fn mul(&self, other: &StepFn<R>) -> Result<StepFn<R>> {
        let cells = common_cells(self, other)
            .into_iter()
            .map(|(lo, hi, a, b)| Cell {
                lo,
                hi,
                value: a * b,
            })
            .collect();
        StepFn::from_cells(cells)
    }

    /// Keeps cells with `|value| > threshold`.
    pub fn truncate_above(&self, threshold: R) -> StepFn<R> {
        StepFn {
            cells: self
                .cells
                .iter()
                .copied()
                .filter(|c| c.value.abs() > threshold)
                .collect(),
        }
    }

    /// The nonincreasing function on `[0,1)` equimeasurable with `self`.
    /// Requires a nonnegative function.
    pub fn decreasing_rearrangement(&self) -> Result<StepFn<R>> {
        for c in &self.cells {
            if c.value < R::zero() {
                return Err(Error::PreconditionViolation(
                    "decreasing rearrangement requires a nonnegative function".into(),
                ));
            }
        }
        let mut parts: Vec<(R, R)> = self.cells.iter().map(|c| (c.value, c.hi - c.lo)).collect();
        parts.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite values"));
        let mut cells = Vec::with_capacity(parts.len());
        let mut acc = R::zero();
        for (value, m) in parts {
            let hi = (acc + m).min(R::one());
            cells.push(Cell {
                lo: acc,
                hi,
                value,
            });
            acc = hi;
        }
        StepFn::from_cells(cells)
    }

    /// Distribution function `measure{ |f| > lambda }`.
    pub fn dist_above(&self, lambda: R) -> R {
        kahan_sum(
            self.cells
                .iter()
                .filter(|c| c.value.abs() > lambda)
                .map(|c| c.hi - c.lo),
        )
    }
}

/// Shared partition of two step functions: disjoint cells covering the union
/// of both supports, with the (possibly zero) value of each input per cell.
pub fn common_cells<R: Real>(f: &StepFn<R>, g: &StepFn<R>) -> Vec<(R, R, R, R)> {
    let eps = cmp_eps::<R>();
    let mut pts: Vec<R> = Vec::new();
    for c in f.cells().iter().chain(g.cells()) {
        pts.push(c.lo);
        pts.push(c.hi);
    }
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    pts.dedup_by(|a, b| (*a - *b).abs() <= eps);
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= eps {
            continue;
        }
        let mid = lo + (hi - lo) / R::c(2.0);
        let (a, b) = (f.eval(mid), g.eval(mid));
        if a != R::zero() || b != R::zero() {
            out.push((lo, hi, a, b));
        }
    }
    out
}

/// Re-expresses both inputs on a single shared partition; values are
/// unchanged pointwise.
pub fn refine<R: Real>(f: &StepFn<R>, g: &StepFn<R>) -> (StepFn<R>, StepFn<R>) {
    let cells = common_cells(f, g);
    let mk = |pick: fn(&(R, R, R, R)) -> R| {
        let cs: Vec<Cell<R>> = cells
            .iter()
            .map(|t| Cell {
                lo: t.0,
                hi: t.1,
                value: pick(t),
            })
            .collect();
        // Values come from evaluation, so cells stay disjoint; keep the split
        // cells instead of re-merging so both outputs share the partition.
        StepFn {
            cells: cs.into_iter().filter(|c| c.value != R::zero()).collect(),
        }
    };
    (mk(|t| t.2), mk(|t| t.3))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(cells: &[(f64, f64, f64)]) -> StepFn<f64> {
        StepFn::from_cells(
            cells
                .iter()
                .map(|&(lo, hi, value)| Cell { lo, hi, value })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn refine_nested_partitions() {
        let f = sf(&[(0.0, 1.0, 2.0)]);
        let g = sf(&[(0.0, 0.5, 1.0), (0.5, 1.0, 3.0)]);
        let (rf, rg) = refine(&f, &g);
        assert_eq!(rf.cells().len(), 2);
        assert_eq!(rg.cells().len(), 2);
        for t in [0.1, 0.3, 0.6, 0.9] {
            assert_eq!(rf.eval(t), f.eval(t));
            assert_eq!(rg.eval(t), g.eval(t));
        }
    }

    #[test]
    fn refine_endpoint_merge() {
        let f = sf(&[(0.0, 0.6, 1.0)]);
        let g = sf(&[(0.4, 1.0, 2.0)]);
        let cells = common_cells(&f, &g);
        let bounds: Vec<(f64, f64)> = cells.iter().map(|c| (c.0, c.1)).collect();
        assert_eq!(bounds, vec![(0.0, 0.4), (0.4, 0.6), (0.6, 1.0)]);
    }

    #[test]
    fn refine_idempotent_on_self() {
        let f = sf(&[(0.0, 0.25, 1.5), (0.5, 1.0, -2.0)]);
        let (a, b) = refine(&f, &f);
        for t in [0.0, 0.1, 0.3, 0.6, 0.99] {
            assert_eq!(a.eval(t), f.eval(t));
            assert_eq!(b.eval(t), f.eval(t));
        }
    }

    #[test]
    fn rearrangement_sorts_values() {
        let f = sf(&[(0.0, 0.5, 1.0), (0.5, 0.75, 3.0), (0.75, 1.0, 2.0)]);
        let fr = f.decreasing_rearrangement().unwrap();
        assert_eq!(fr.eval(0.1), 3.0);
        assert_eq!(fr.eval(0.3), 2.0);
        assert_eq!(fr.eval(0.7), 1.0);
        // equimeasurable
        for lam in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            assert!((f.dist_above(lam) - fr.dist_above(lam)).abs() < 1e-14);
        }
    }

    #[test]
    fn rearrangement_fixed_point_on_nonincreasing() {
        let f = sf(&[(0.0, 0.25, 3.0), (0.25, 0.5, 2.0), (0.5, 1.0, 1.0)]);
        let fr = f.decreasing_rearrangement().unwrap();
        for t in [0.05, 0.3, 0.8] {
            assert_eq!(fr.eval(t), f.eval(t));
        }
    }

    #[test]
    fn rearrangement_constant_identity() {
        let f = sf(&[(0.0, 1.0, 4.0)]);
        let fr = f.decreasing_rearrangement().unwrap();
        assert_eq!(fr.eval(0.5), 4.0);
    }

    #[test]
    fn truncate_keeps_large_cells() {
        let f = sf(&[(0.0, 0.1, 0.5), (0.2, 0.21, 10.0)]);
        let g = f.truncate_above(1.0);
        assert_eq!(g.cells().len(), 1);
        assert_eq!(g.eval(0.205), 10.0);
    }
}
