//! Half-open intervals `[lo, hi)` inside `[0, 1]` and finite disjoint unions.

use crate::error::{Error, Result};
use crate::num::{cmp_eps, kahan_sum, Real};

/// Half-open interval `[lo, hi)` with `0 <= lo < hi <= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<R> {
    lo: R,
    hi: R,
}

impl<R: Real> Interval<R> {
    pub fn new(lo: R, hi: R) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Invalid("interval endpoints must be finite".into()));
        }
        if lo < R::zero() || hi > R::one() {
            return Err(Error::Invalid(format!(
                "interval [{lo}, {hi}) not inside [0,1]"
            )));
        }
        if lo >= hi {
            return Err(Error::Invalid(format!(
                "interval [{lo}, {hi}) must have positive length"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> R {
        self.lo
    }

    pub fn hi(&self) -> R {
        self.hi
    }

    pub fn measure(&self) -> R {
        self.hi - self.lo
    }

    pub fn contains(&self, t: R) -> bool {
        self.lo <= t && t < self.hi
    }

    pub fn midpoint(&self) -> R {
        self.lo + (self.hi - self.lo) / R::c(2.0)
    }

    /// Intersection, `None` when the overlap is empty or degenerate.
    pub fn intersect(&self, other: &Interval<R>) -> Option<Interval<R>> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo < hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }
}

/// Finite union of pairwise disjoint half-open intervals, sorted by `lo`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct IntervalSet<R> {
    ivs: Vec<Interval<R>>,
}

impl<R: Real> IntervalSet<R> {
    pub fn empty() -> Self {
        IntervalSet { ivs: Vec::new() }
    }

    pub fn from_interval(iv: Interval<R>) -> Self {
        IntervalSet { ivs: vec![iv] }
    }

    /// Builds a set from intervals, sorting and merging touching pieces.
    /// Overlap beyond the comparison tolerance is rejected.
    pub fn new(mut ivs: Vec<Interval<R>>) -> Result<Self> {
        ivs.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite endpoints"));
        let eps = cmp_eps::<R>();
        let mut out: Vec<Interval<R>> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            match out.last_mut() {
                Some(prev) if iv.lo < prev.hi - eps => {
                    return Err(Error::Invalid(format!(
                        "intervals overlap: [{}, {}) and [{}, {})",
                        prev.lo, prev.hi, iv.lo, iv.hi
                    )));
                }
                Some(prev) if (iv.lo - prev.hi).abs() <= eps => {
                    prev.hi = iv.hi.max(prev.hi);
                }
                _ => out.push(iv),
            }
        }
        Ok(IntervalSet { ivs: out })
    }

    pub fn intervals(&self) -> &[Interval<R>] {
        &self.ivs
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn measure(&self) -> R {
        kahan_sum(self.ivs.iter().map(|iv| iv.measure()))
    }

    pub fn contains(&self, t: R) -> bool {
        // Intervals are sorted; partition point search.
        self.ivs
            .binary_search_by(|iv| {
                if t < iv.lo {
                    std::cmp::Ordering::Greater
                } else if t >= iv.hi {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    pub fn intersect_interval(&self, iv: &Interval<R>) -> IntervalSet<R> {
        let ivs = self
            .ivs
            .iter()
            .filter_map(|own| own.intersect(iv))
            .collect();
        IntervalSet { ivs }
    }

    pub fn intersect(&self, other: &IntervalSet<R>) -> IntervalSet<R> {
        let mut ivs = Vec::new();
        for iv in &other.ivs {
            ivs.extend(self.intersect_interval(iv).ivs);
        }
        IntervalSet { ivs }
    }

    /// Union of two sets assumed disjoint up to tolerance.
    pub fn union_disjoint(&self, other: &IntervalSet<R>) -> Result<IntervalSet<R>> {
        let mut ivs = self.ivs.clone();
        ivs.extend(other.ivs.iter().cloned());
        IntervalSet::new(ivs)
    }

    pub fn is_disjoint_from(&self, other: &IntervalSet<R>) -> bool {
        self.intersect(other).measure() <= cmp_eps::<R>()
    }

    /// Sorted list of all endpoints.
    pub fn endpoints(&self) -> Vec<R> {
        let mut out = Vec::with_capacity(2 * self.ivs.len());
        for iv in &self.ivs {
            out.push(iv.lo);
            out.push(iv.hi);
        }
        out
    }

    /// Carves `len` of measure out of this set, left to right, returning the
    /// carved subset and consuming it from `self`'s remaining capacity view.
    /// Used by deterministic leftmost-first packings.
    pub fn carve_leftmost(&mut self, len: R) -> Result<IntervalSet<R>> {
        let eps = cmp_eps::<R>();
        if len <= R::zero() {
            return Err(Error::Invalid("carve length must be positive".into()));
        }
        let mut need = len;
        let mut taken = Vec::new();
        let mut rest = Vec::new();
        let mut iter = self.ivs.iter();
        for iv in iter.by_ref() {
            if need <= eps {
                rest.push(*iv);
                continue;
            }
            let m = iv.measure();
            if m <= need + eps {
                taken.push(*iv);
                need -= m;
            } else {
                let cut = iv.lo + need;
                taken.push(Interval { lo: iv.lo, hi: cut });
                rest.push(Interval { lo: cut, hi: iv.hi });
                need = R::zero();
            }
        }
        if need > eps {
            return Err(Error::ConstructionFailure(format!(
                "cannot carve measure {len}: only {} available",
                self.measure()
            )));
        }
        self.ivs = rest;
        Ok(IntervalSet { ivs: taken })
    }
}

/// Checks pairwise disjointness of a family of sets.
pub fn pairwise_disjoint<R: Real>(sets: &[IntervalSet<R>]) -> bool {
    for (i, a) in sets.iter().enumerate() {
        for b in sets.iter().skip(i + 1) {
            if !a.is_disjoint_from(b) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval<f64> {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn measure_empty_is_zero() {
        assert_eq!(IntervalSet::<f64>::empty().measure(), 0.0);
    }

    #[test]
    fn measure_two_quarters() {
        let s = IntervalSet::new(vec![iv(0.0, 0.25), iv(0.5, 0.75)]).unwrap();
        assert!((s.measure() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_overlap() {
        assert!(IntervalSet::new(vec![iv(0.0, 0.6), iv(0.5, 1.0)]).is_err());
    }

    #[test]
    fn merges_touching() {
        let s = IntervalSet::new(vec![iv(0.0, 0.5), iv(0.5, 1.0)]).unwrap();
        assert_eq!(s.intervals().len(), 1);
        assert!((s.measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn contains_respects_half_open() {
        let s = IntervalSet::from_interval(iv(0.25, 0.5));
        assert!(s.contains(0.25));
        assert!(!s.contains(0.5));
        assert!(!s.contains(0.1));
    }

    #[test]
    fn carve_across_gap() {
        let mut s = IntervalSet::new(vec![iv(0.0, 0.1), iv(0.5, 0.7)]).unwrap();
        let got = s.carve_leftmost(0.15).unwrap();
        assert!((got.measure() - 0.15).abs() < 1e-14);
        assert!((s.measure() - 0.15).abs() < 1e-14);
        assert!(got.contains(0.05) && got.contains(0.52) && !got.contains(0.56));
    }

    #[test]
    fn disjointness_check() {
        let a = IntervalSet::from_interval(iv(0.0, 0.5));
        let b = IntervalSet::from_interval(iv(0.5, 1.0));
        let c = IntervalSet::from_interval(iv(0.4, 0.6));
        assert!(a.is_disjoint_from(&b));
        assert!(!a.is_disjoint_from(&c));
        assert!(pairwise_disjoint(&[a, b]));
    }
}
