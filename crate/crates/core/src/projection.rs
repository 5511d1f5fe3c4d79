//! Rank-per-set projections on step data: the orthogonal projection T_A
//! (normalized-indicator coefficients) and the averaging projection P_A,
//! plus empirical operator-norm lower bounds and the two-band family whose
//! orthogonal projection blows up.

use crate::carrier::Carrier;
use crate::error::{Error, Result};
use crate::exponent::ExponentFn;
use crate::interval::{pairwise_disjoint, IntervalSet};
use crate::modular::{luxemburg_norm, PwFun};
use crate::num::{cmp_eps, KahanSum, Real};
use crate::step::{Cell, StepFn};

#[derive(Clone, Debug)]
pub struct ProjectionSpec<R> {
    sets: Vec<IntervalSet<R>>,
    p: ExponentFn<R>,
    /// Exponent refined to step form once, reused by both operators.
    p_step: StepFn<R>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjOp {
    Orthogonal,
    Averaging,
}

impl<R: Real> ProjectionSpec<R> {
    pub fn new(sets: Vec<IntervalSet<R>>, p: ExponentFn<R>) -> Result<Self> {
        let eps = cmp_eps::<R>();
        if !pairwise_disjoint(&sets) {
            return Err(Error::Invalid("projection sets overlap".into()));
        }
        let mut total = R::zero();
        for s in &sets {
            if s.measure() <= eps {
                return Err(Error::NullSet("projection set with zero measure".into()));
            }
            total += s.measure();
        }
        if total > R::one() + R::c(1e-9) {
            return Err(Error::Invalid("projection sets exceed the unit measure".into()));
        }
        let p_step = match p.carrier() {
            Carrier::Step(f) => f.clone(),
            Carrier::Expr(_) => p.step_approx(4096)?.0,
            Carrier::Tail(_) => {
                return Err(Error::Unsupported(
                    "projections over tail exponents are not supported".into(),
                ))
            }
        };
        Ok(ProjectionSpec { sets, p, p_step })
    }

    pub fn sets(&self) -> &[IntervalSet<R>] {
        &self.sets
    }

    pub fn exponent(&self) -> &ExponentFn<R> {
        &self.p
    }

    /// Restriction to the first `k` sets.
    pub fn truncated(&self, k: usize) -> Result<ProjectionSpec<R>> {
        if k == 0 || k > self.sets.len() {
            return Err(Error::Invalid(format!("cannot truncate to {k} sets")));
        }
        Ok(ProjectionSpec {
            sets: self.sets[..k].to_vec(),
            p: self.p.clone(),
            p_step: self.p_step.clone(),
        })
    }

    /// Per-exponent-cell slices of a set, as (lo, hi, p-value).
    fn exponent_slices(&self, set: &IntervalSet<R>) -> Vec<(R, R, R)> {
        let eps = cmp_eps::<R>();
        let mut out = Vec::new();
        for pc in self.p_step.cells() {
            let iv = crate::interval::Interval::new(pc.lo, pc.hi).expect("valid cell");
            for sub in set.intersect_interval(&iv).intervals() {
                if sub.measure() > eps {
                    out.push((sub.lo(), sub.hi(), pc.value));
                }
            }
        }
        out
    }

    /// T_A(f): on each set, coefficient `\int f(s) mu^{-1/p*(s)} ds` applied
    /// to the normalized indicator `mu^{-1/p(t)} chi`. At p = 1 the
    /// conjugate power of the measure is 1.
    pub fn apply_orthogonal(&self, f: &StepFn<R>) -> Result<StepFn<R>> {
        let mut cells = Vec::new();
        for set in &self.sets {
            let m = set.measure();
            let slices = self.exponent_slices(set);
            let mut coef = KahanSum::new();
            for &(lo, hi, pv) in &slices {
                // integrate f * mu^{-(1 - 1/p)} over [lo, hi)
                let inv_conj = R::one() - R::one() / pv;
                let weight = m.powf(-inv_conj);
                for c in f.cells() {
                    let l = c.lo.max(lo);
                    let h = c.hi.min(hi);
                    if h > l {
                        coef.add(c.value * weight * (h - l));
                    }
                }
            }
            let coef = coef.value();
            for &(lo, hi, pv) in &slices {
                cells.push(Cell {
                    lo,
                    hi,
                    value: coef * m.powf(-R::one() / pv),
                });
            }
        }
        StepFn::from_cells(cells)
    }

    /// P_A(f): the mean of `f` over each set, applied to plain indicators.
    pub fn apply_averaging(&self, f: &StepFn<R>) -> Result<StepFn<R>> {
        let mut cells = Vec::new();
        for set in &self.sets {
            let m = set.measure();
            let mut int = KahanSum::new();
            for iv in set.intervals() {
                for c in f.cells() {
                    let l = c.lo.max(iv.lo());
                    let h = c.hi.min(iv.hi());
                    if h > l {
                        int.add(c.value * (h - l));
                    }
                }
            }
            let mean = int.value() / m;
            for iv in set.intervals() {
                cells.push(Cell {
                    lo: iv.lo(),
                    hi: iv.hi(),
                    value: mean,
                });
            }
        }
        StepFn::from_cells(cells)
    }

    pub fn apply(&self, op: ProjOp, f: &StepFn<R>) -> Result<StepFn<R>> {
        match op {
            ProjOp::Orthogonal => self.apply_orthogonal(f),
            ProjOp::Averaging => self.apply_averaging(f),
        }
    }
}

/// Largest norm ratio `||op f|| / ||f||` over a test family: a certified
/// lower bound for the operator norm.
pub fn opnorm_lower_bound<R: Real>(
    spec: &ProjectionSpec<R>,
    family: &[StepFn<R>],
    op: ProjOp,
    budget: usize,
) -> Result<R> {
    let mut best = R::zero();
    for f in family {
        let nf = luxemburg_norm(&PwFun::Step(f.clone()), spec.exponent(), budget)?;
        if nf <= cmp_eps::<R>() {
            return Err(Error::Invalid("test function with zero norm".into()));
        }
        let pf = spec.apply(op, f)?;
        let np = luxemburg_norm(&PwFun::Step(pf), spec.exponent(), budget)?;
        best = best.max(np / nf);
    }
    Ok(best)
}

/// Two-band family: sets `A_k = R_k \cup S_k` where the exponent sits near
/// `q2` on `R_k` and near `q1` on `S_k`, with polynomially decaying equal
/// measures. The orthogonal projection over this family is unbounded.
#[derive(Clone, Debug)]
pub struct TwoBandFamily<R> {
    pub q1: R,
    pub q2: R,
    pub delta: R,
    pub alpha: R,
    pub r_parts: Vec<IntervalSet<R>>,
    pub s_parts: Vec<IntervalSet<R>>,
    pub sets: Vec<IntervalSet<R>>,
    /// Common total band measure mu(R) = mu(S).
    pub band_measure: R,
}

/// Truncation point of the polynomial normalizer.
const NORMALIZER_CUTOFF: u64 = 1_000_000;

/// `sum_{n>=1} n^{-alpha}` as truncated sum plus integral-test tail bound;
/// the absolute error stays below the integral-test gap (< 1e-10 for the
/// cutoff used here and alpha >= 1.5).
fn polynomial_normalizer<R: Real>(alpha: R) -> R {
    let mut sum = KahanSum::new();
    for n in 1..=NORMALIZER_CUTOFF {
        sum.add(R::from_index(n).powf(-alpha));
    }
    // tail between N^{1-a}/(a-1) and (N+1)... use the midpoint of the
    // integral-test bracket
    let nf = R::from_index(NORMALIZER_CUTOFF);
    let upper = nf.powf(R::one() - alpha) / (alpha - R::one());
    let lower = (nf + R::one()).powf(R::one() - alpha) / (alpha - R::one());
    sum.add((upper + lower) / R::c(2.0));
    sum.value()
}

/// Preimage of the open band `(center - delta, center + delta)` under a
/// step exponent.
fn band_preimage<R: Real>(p: &StepFn<R>, center: R, delta: R) -> Result<IntervalSet<R>> {
    let mut ivs = Vec::new();
    for c in p.cells() {
        if (c.value - center).abs() < delta {
            ivs.push(crate::interval::Interval::new(c.lo, c.hi).expect("valid cell"));
        }
    }
    IntervalSet::new(ivs)
}

pub fn build_two_band_family<R: Real>(
    p: &ExponentFn<R>,
    q1: R,
    q2: R,
    delta: R,
    alpha: R,
    k_max: usize,
) -> Result<TwoBandFamily<R>> {
    if q1 >= q2 {
        return Err(Error::PreconditionViolation("q1 must be below q2".into()));
    }
    if delta <= R::zero() || delta >= (q2 - q1) / R::c(4.0) {
        return Err(Error::PreconditionViolation(format!(
            "delta {delta} outside (0, (q2-q1)/4)"
        )));
    }
    if alpha <= R::one() {
        return Err(Error::PreconditionViolation("alpha must exceed 1".into()));
    }
    if k_max == 0 {
        return Err(Error::Invalid("family must have at least one set".into()));
    }
    let p_step = match p.carrier() {
        Carrier::Step(f) => f.clone(),
        _ => {
            return Err(Error::Unsupported(
                "two-band construction requires a step exponent".into(),
            ))
        }
    };
    let mut r_band = band_preimage(&p_step, q2, delta)?;
    let mut s_band = band_preimage(&p_step, q1, delta)?;
    let eps = cmp_eps::<R>();
    if r_band.measure() <= eps {
        return Err(Error::BandEmpty(format!("no mass near q2 = {q2}")));
    }
    if s_band.measure() <= eps {
        return Err(Error::BandEmpty(format!("no mass near q1 = {q1}")));
    }
    let band_measure = r_band.measure().min(s_band.measure());
    let z = polynomial_normalizer(alpha);

    let mut r_parts = Vec::with_capacity(k_max);
    let mut s_parts = Vec::with_capacity(k_max);
    let mut sets = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let m = band_measure / z * R::from_usize(k).expect("small k").powf(-alpha);
        let rk = r_band.carve_leftmost(m)?;
        let sk = s_band.carve_leftmost(m)?;
        let ak = rk.union_disjoint(&sk)?;
        r_parts.push(rk);
        s_parts.push(sk);
        sets.push(ak);
    }
    Ok(TwoBandFamily {
        q1,
        q2,
        delta,
        alpha,
        r_parts,
        s_parts,
        sets,
        band_measure,
    })
}

/// Deterministic witness candidates for the norm-ratio probe: sums
/// `f = sum_k c_k chi_{X_k}` with `X_k` drawn from the low band, the high
/// band, or both, and coefficients from normalized-indicator or polynomial
/// rules. Fixed order decides ties.
pub fn two_band_test_family<R: Real>(fam: &TwoBandFamily<R>) -> Result<Vec<StepFn<R>>> {
    let mut out = Vec::new();
    let supports: [&[IntervalSet<R>]; 3] = [&fam.s_parts, &fam.r_parts, &fam.sets];
    for parts in supports {
        for rule in 0..5usize {
            let mut cells = Vec::new();
            for (i, set) in parts.iter().enumerate() {
                let k = R::from_usize(i + 1).expect("small");
                let m = set.measure();
                let c = match rule {
                    0 => m.powf(-R::one() / fam.q1),
                    1 => m.powf(-R::one() / fam.q2),
                    2 => R::one(),
                    3 => k,
                    _ => k * k,
                };
                for iv in set.intervals() {
                    cells.push(Cell {
                        lo: iv.lo(),
                        hi: iv.hi(),
                        value: c,
                    });
                }
            }
            out.push(StepFn::from_cells(cells)?);
        }
    }
    Ok(out)
}
