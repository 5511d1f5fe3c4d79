//! Disjoint normalized sequences, the associated Orlicz functions with
//! sandwich and index bounds, regularity of set families, Nakano
//! sequence-space coincidence, and modular-preserving truncation.

use crate::carrier::Carrier;
use crate::error::{Error, Result};
use crate::exponent::ExponentFn;
use crate::interval::{pairwise_disjoint, IntervalSet};
use crate::num::{cmp_eps, KahanSum, Real};
use crate::seq_expr::SequenceExpr;
use crate::series::{certify, SeriesStatus};
use crate::step::{common_cells, Cell, StepFn};

/// `g_k = chi_{A_k} / mu(A_k)^{1/p(t)}`: disjointly supported functions with
/// modular exactly 1 (the exponent cancels against the measure power).
pub fn build_gk<R: Real>(
    sets: &[IntervalSet<R>],
    p: &ExponentFn<R>,
) -> Result<Vec<StepFn<R>>> {
    let eps = cmp_eps::<R>();
    if !pairwise_disjoint(sets) {
        return Err(Error::Invalid("supports are not pairwise disjoint".into()));
    }
    let p_step = exponent_as_step(p)?;
    let mut out = Vec::with_capacity(sets.len());
    for a in sets {
        let m = a.measure();
        if m <= eps {
            return Err(Error::NullSet("empty support in the family".into()));
        }
        let mut cells = Vec::new();
        for pc in p_step.cells() {
            let iv = crate::interval::Interval::new(pc.lo, pc.hi).expect("valid cell");
            for sub in a.intersect_interval(&iv).intervals() {
                cells.push(Cell {
                    lo: sub.lo(),
                    hi: sub.hi(),
                    value: m.powf(-R::one() / pc.value),
                });
            }
        }
        let g = StepFn::from_cells(cells)?;
        if (g.support_measure() - m).abs() > R::c(1e-9) {
            return Err(Error::Unsupported(
                "exponent does not cover the support with step cells".into(),
            ));
        }
        out.push(g);
    }
    Ok(out)
}

fn exponent_as_step<R: Real>(p: &ExponentFn<R>) -> Result<StepFn<R>> {
    match p.carrier() {
        Carrier::Step(f) => Ok(f.clone()),
        Carrier::Expr(_) => Ok(p.step_approx(4096)?.0),
        Carrier::Tail(_) => Err(Error::Unsupported(
            "tail exponents are not refined to step form here".into(),
        )),
    }
}

/// Normalized convex function `psi(s) = sum coef_j s^{exp_j}`, a finite
/// power-sum with positive coefficients summing to 1.
#[derive(Clone, Debug)]
pub struct OrliczFn<R> {
    terms: Vec<(R, R)>,
}

impl<R: Real> OrliczFn<R> {
    fn new(terms: Vec<(R, R)>) -> Result<Self> {
        let f = OrliczFn { terms };
        f.check_convex_on_grid()?;
        Ok(f)
    }

    pub fn terms(&self) -> &[(R, R)] {
        &self.terms
    }

    pub fn eval(&self, s: R) -> R {
        if s == R::zero() {
            return R::zero();
        }
        let mut acc = KahanSum::new();
        for &(coef, e) in &self.terms {
            acc.add(coef * s.powf(e));
        }
        acc.value()
    }

    /// Second differences on a 1e-3 grid must be nonnegative up to slack.
    fn check_convex_on_grid(&self) -> Result<()> {
        let h = R::c(1e-3);
        let slack = R::c(-1e-8);
        let mut i = 1;
        while i < 999 {
            let s = h * R::from_usize(i).expect("small");
            let d2 = self.eval(s + h) - R::c(2.0) * self.eval(s) + self.eval(s - h);
            if d2 < slack {
                return Err(Error::Invalid(format!("not convex near s = {s}")));
            }
            i += 1;
        }
        Ok(())
    }
}

/// `psi(s) = (1/mu(A)) \int_A s^{p(t)} dt` for step exponents: one power
/// term per exponent value met in positive measure.
pub fn orlicz_psi_indicator<R: Real>(
    a: &IntervalSet<R>,
    p: &ExponentFn<R>,
) -> Result<OrliczFn<R>> {
    let eps = cmp_eps::<R>();
    let m = a.measure();
    if m <= eps {
        return Err(Error::NullSet("psi over a null set".into()));
    }
    let p_step = exponent_as_step(p)?;
    let mut terms: Vec<(R, R)> = Vec::new();
    for pc in p_step.cells() {
        let iv = crate::interval::Interval::new(pc.lo, pc.hi).expect("valid cell");
        let part = a.intersect_interval(&iv).measure();
        if part > eps {
            terms.push((part / m, pc.value));
        }
    }
    OrliczFn::new(terms)
}

/// `psi(s) = (1/rho(g)) sum_j \int_{A_j} s^{p(t)} |a_j|^{p(t)} dt` for a
/// step function `g` with positive modular.
pub fn orlicz_psi_general<R: Real>(g: &StepFn<R>, p: &ExponentFn<R>) -> Result<OrliczFn<R>> {
    let eps = cmp_eps::<R>();
    let p_step = exponent_as_step(p)?;
    let mut terms: Vec<(R, R)> = Vec::new();
    let mut rho = KahanSum::new();
    for (lo, hi, a, q) in common_cells(g, &p_step) {
        let a = a.abs();
        if a == R::zero() || hi - lo <= eps {
            continue;
        }
        let w = a.powf(q) * (hi - lo);
        rho.add(w);
        terms.push((w, q));
    }
    let rho = rho.value();
    if rho <= eps {
        return Err(Error::ZeroModular);
    }
    let terms = terms.into_iter().map(|(w, q)| (w / rho, q)).collect();
    OrliczFn::new(terms)
}

/// Checks the band sandwich `s^{q+1/k} <= psi(s) <= s^{q+1/(k+1)} <= s^q`
/// on a grid, after verifying the exponent really lives in the band on `A`.
pub fn psi_sandwich_check<R: Real>(
    a: &IntervalSet<R>,
    p: &ExponentFn<R>,
    q: R,
    k: u32,
    grid: usize,
) -> Result<bool> {
    let kf = R::from_u32(k).expect("small k");
    let band_lo = q + R::one() / (kf + R::one());
    let band_hi = q + R::one() / kf;
    let (inf, sup) = p.ess_bounds_on(a)?;
    let tol = R::c(1e-12);
    if inf < band_lo - tol || sup >= band_hi + tol {
        return Err(Error::PreconditionViolation(format!(
            "exponent [{inf}, {sup}] leaves the band [{band_lo}, {band_hi})"
        )));
    }
    let psi = orlicz_psi_indicator(a, p)?;
    let slack = R::c(1e-10);
    let n = grid.max(2);
    for i in 0..=n {
        let s = R::from_usize(i).expect("small") / R::from_usize(n).expect("small");
        let v = psi.eval(s);
        let lower = s.powf(band_hi);
        let upper = s.powf(band_lo);
        let cap = s.powf(q);
        if lower > v + slack || v > upper + slack || upper > cap + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Verifies the log-log derivative band `pMinus <= s psi'(s)/psi(s) <= pPlus`
/// by central finite differences.
pub fn orlicz_index_check<R: Real>(psi: &OrliczFn<R>, p_minus: R, p_plus: R) -> bool {
    let h = R::c(1e-6);
    let band_tol = R::c(1e-3);
    let mut i = 1usize;
    while i <= 99 {
        let s = R::c(0.01) * R::from_usize(i).expect("small");
        if s >= R::c(0.995) {
            break;
        }
        let up = psi.eval(s + h).ln();
        let dn = psi.eval(s - h).ln();
        let index = (up - dn) / ((s + h).ln() - (s - h).ln());
        if index < p_minus - band_tol || index > p_plus + band_tol {
            return false;
        }
        i += 1;
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trilean {
    True,
    False,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct RegularityReport<R> {
    pub verdict: Trilean,
    /// Smallest admissible constant for the finite family (when regular).
    pub constant: R,
    /// Per-set `mu(A_k)^{gap_k}` values.
    pub values: Vec<R>,
}

/// Regularity of a disjoint family: `mu(A_k)^{p+ - p-}` must stay inside
/// some fixed `(1/C, C)`. A finite family always admits some C, so the
/// verdict encodes the trend: values drifting monotonically toward 0 or
/// infinity across the family fail; mild drift is Unknown.
pub fn regularity_check<R: Real>(
    sets: &[IntervalSet<R>],
    p: &ExponentFn<R>,
) -> Result<RegularityReport<R>> {
    let eps = cmp_eps::<R>();
    if !pairwise_disjoint(sets) {
        return Err(Error::Invalid("supports are not pairwise disjoint".into()));
    }
    let mut values = Vec::with_capacity(sets.len());
    let mut worst = R::one();
    for a in sets {
        if a.measure() <= eps {
            return Err(Error::NullSet("empty set in the family".into()));
        }
        let (lo, hi) = p.ess_bounds_on(a)?;
        let v = a.measure().powf(hi - lo);
        worst = worst.max(v.max(R::one() / v));
        values.push(v);
    }
    // Drift detection on w_k = max(v, 1/v).
    let w: Vec<R> = values.iter().map(|&v| v.max(R::one() / v)).collect();
    let strictly_increasing = w.len() >= 4
        && w.windows(2).all(|p| p[1] > p[0] + eps);
    let verdict = if strictly_increasing {
        let growth = w[w.len() - 1] / w[0];
        if growth >= R::c(8.0) {
            Trilean::False
        } else {
            Trilean::Unknown
        }
    } else {
        Trilean::True
    };
    Ok(RegularityReport {
        verdict,
        constant: worst * (R::one() + R::c(1e-9)),
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coincidence {
    Coincide,
    Differ,
    Unknown,
}

/// Whether two Nakano sequence spaces given by exponent sequences coincide.
/// Classical criterion: coincidence iff `sum c^{p_n q_n / |p_n - q_n|}`
/// converges for some (equivalently all) 0 < c < 1; fixed at c = 1/2.
pub fn nakano_coincide<R: Real>(
    p_seq: &SequenceExpr<R>,
    q_seq: &SequenceExpr<R>,
    n0: u64,
) -> Coincidence {
    let half = R::c(0.5);
    let term = |n: u64| -> Result<R> {
        let p = p_seq.eval(n)?;
        let q = q_seq.eval(n)?;
        let gap = (p - q).abs();
        if gap <= cmp_eps::<R>() {
            return Ok(R::zero());
        }
        Ok(half.powf(p * q / gap))
    };
    // exactly coinciding exponents produce exact zero terms by the gap
    // convention above; the series engine refuses all-zero windows (they
    // are indistinguishable from underflow), so decide that case here
    let all_zero = (n0..n0 + crate::series::SERIES_WINDOW)
        .all(|n| matches!(term(n), Ok(v) if v == R::zero()));
    if all_zero {
        return Coincidence::Coincide;
    }
    match certify(&term, n0).status {
        SeriesStatus::Converges => Coincidence::Coincide,
        SeriesStatus::Diverges => Coincidence::Differ,
        SeriesStatus::Unknown => Coincidence::Unknown,
    }
}

/// Keeps the part of `f` above level `r` and bounds the modular of the
/// discarded part: `rho(f - g) <= mu(dropped support) * r^{p+}`.
pub fn truncate_above<R: Real>(
    f: &StepFn<R>,
    r: R,
    p: &ExponentFn<R>,
) -> Result<(StepFn<R>, R)> {
    if r <= R::zero() {
        return Err(Error::Invalid("threshold must be positive".into()));
    }
    let g = f.truncate_above(r);
    let dropped = f.support_measure() - g.support_measure();
    // dropped values satisfy |v| <= r, so |v|^{p(t)} <= r^{p-} when r <= 1
    // and <= r^{p+} when r >= 1
    let worst = if r <= R::one() {
        r.powf(p.p_minus())
    } else {
        r.powf(p.p_plus())
    };
    let bound = dropped.max(R::zero()) * worst;
    Ok((g, bound))
}
