//! Disjoint strict singularity (DSS) analysis for the inclusion
//! `L^{p(.)}[0,1] -> L^{q(.)}[0,1]`: sufficient criteria emitting
//! re-checkable certificates, necessary limit conditions, and an explicit
//! non-DSS witness construction with an equivalence constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::carrier::{difference, Carrier};
use crate::error::{Error, Result};
use crate::expr::Mono;
use crate::exponent::ExponentFn;
use crate::interval::{Interval, IntervalSet};
use crate::modular::{modular, PwFun};
use crate::num::{KahanSum, Real};
use crate::seq_expr::SequenceExpr;
use crate::sequence::build_gk;
use crate::series::{self, certify, SeriesStatus};
use crate::step::{Cell, StepFn};

pub const DEFAULT_BUDGET: usize = 100_000;
/// Deepest dyadic sample index for the limit probe.
pub const LIMIT_DEPTH: u32 = 90;
/// Number of coefficient vectors in a witness re-validation sweep.
pub const WITNESS_TRIALS: usize = 100;

/// Largest point strictly inside `[0,1)` used when a sample point rounds to 1.
fn clamp_domain<R: Real>(x: R) -> R {
    let top = R::one() - R::c(2.0f64.powi(-52));
    x.min(top).max(R::zero())
}

#[derive(Clone, Debug)]
pub struct EmbeddingProblem<R> {
    pub p: ExponentFn<R>,
    pub q: ExponentFn<R>,
}

impl<R: Real> EmbeddingProblem<R> {
    pub fn new(p: ExponentFn<R>, q: ExponentFn<R>) -> Self {
        EmbeddingProblem { p, q }
    }

    /// The gap carrier `p - q`, when representable.
    pub fn gap(&self) -> Result<Carrier<R>> {
        difference(self.p.carrier(), self.q.carrier())
    }
}

/// True iff `q <= p` holds on every refinement cell (step data) or on a
/// 10^4-point grid plus carrier breakpoints (other carriers).
pub fn check_inclusion<R: Real>(prob: &EmbeddingProblem<R>) -> Result<bool> {
    let tol = R::c(1e-9);
    if let Ok(Carrier::Step(d)) = prob.gap() {
        return Ok(d.cells().iter().all(|c| c.value >= -tol));
    }
    let mut pts: Vec<R> = Vec::with_capacity(10_100);
    let n = 10_000usize;
    for i in 0..n {
        pts.push(R::c((i as f64 + 0.5) / n as f64));
    }
    for carrier in [prob.p.carrier(), prob.q.carrier()] {
        for b in carrier.breakpoints_below(R::one(), 10_000)? {
            pts.push(clamp_domain(b));
            pts.push(clamp_domain(b - R::c(1e-12)));
        }
    }
    for t in pts {
        let pv = prob.p.eval(t)?;
        let qv = prob.q.eval(t)?;
        if pv < qv - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Certified lower bound for `ess inf (p - q)`.
pub fn ess_inf_gap<R: Real>(prob: &EmbeddingProblem<R>) -> Result<R> {
    prob.gap()?.ess_inf_floor()
}

#[derive(Clone, Debug, PartialEq)]
pub enum DssCertificate<R> {
    /// `ess inf (p - q) > delta > 0`.
    UniformGap { delta: R },
    /// The essential ranges of `p` and `q` do not intersect.
    DisjointRanges,
    /// `sum_n (x_{n+1} - x_n)^{(p-q)(x_{n+1})/p+} < inf` along the generator.
    DyadicSum {
        x_gen: SequenceExpr<R>,
        series: series::Certificate<R>,
    },
    /// `sum_k mu(R_k)^{inf_{R_k}(p-q)/p+} < inf` for the level sets of the
    /// gap along the generator.
    LevelSetSum {
        r_gen: SequenceExpr<R>,
        series: series::Certificate<R>,
    },
}

/// Uniform-gap criterion: fires when the gap floor exceeds the resolution
/// threshold, with `delta` at half the floor.
pub fn criterion_uniform_gap<R: Real>(
    prob: &EmbeddingProblem<R>,
) -> Result<Option<DssCertificate<R>>> {
    let gap = ess_inf_gap(prob)?;
    if gap > R::c(1e-9) {
        Ok(Some(DssCertificate::UniformGap {
            delta: gap / R::c(2.0),
        }))
    } else {
        Ok(None)
    }
}

/// Disjoint essential ranges criterion; exact on the range representation.
pub fn criterion_disjoint_ranges<R: Real>(
    prob: &EmbeddingProblem<R>,
) -> Result<Option<DssCertificate<R>>> {
    let rp = prob.p.essential_range()?;
    let rq = prob.q.essential_range()?;
    if rp.intersects(&rq) {
        Ok(None)
    } else {
        Ok(Some(DssCertificate::DisjointRanges))
    }
}

/// Proof-level decay report for the uniform-gap criterion: disjoint unit-norm
/// spikes whose target-space modulars decay like `n^{-delta}`.
#[derive(Clone, Debug)]
pub struct DecayReport<R> {
    pub delta: R,
    pub supports: Vec<IntervalSet<R>>,
    pub modulars_q: Vec<R>,
    pub bounds: Vec<R>,
    pub all_hold: bool,
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

/// Exact modular of `a * chi_S` under a step exponent.
fn spike_modular<R: Real>(a: R, set: &IntervalSet<R>, p: &StepFn<R>) -> R {
    let mut acc = KahanSum::new();
    for c in p.cells() {
        let iv = Interval::new(c.lo, c.hi).expect("valid cell");
        let m = set.intersect_interval(&iv).measure();
        if m > R::zero() {
            acc.add(a.powf(c.value) * m);
        }
    }
    acc.value()
}

/// Builds disjoint `f_n = a_n chi_{A_n}` with `a_n = 2n > n` and modular
/// exactly 1 in `L^{p(.)}` (the support measure solves `a_n^{p} mu = 1`
/// cell by cell), then verifies `rho_q(f_n) <= n^{-delta}` for `n <= n_max`.
pub fn decay_sequence_check<R: Real>(
    prob: &EmbeddingProblem<R>,
    delta: R,
    n_max: u64,
) -> Result<DecayReport<R>> {
    if delta <= R::zero() {
        return Err(Error::PreconditionViolation(
            "decay check requires a positive delta".into(),
        ));
    }
    let p_step = exponent_as_step(&prob.p)?;
    let q_step = exponent_as_step(&prob.q)?;
    let mut free = IntervalSet::from_interval(Interval::new(R::zero(), R::one()).expect("unit"));
    let mut supports = Vec::new();
    let mut modulars_q = Vec::new();
    let mut bounds = Vec::new();
    for n in 1..=n_max {
        let a = R::c(2.0) * R::from_index(n);
        let avail = free.measure();
        let carved_at = |m: R| -> Result<IntervalSet<R>> {
            let mut tmp = free.clone();
            tmp.carve_leftmost(m)
        };
        let mod_at = |m: R| -> Result<R> { Ok(spike_modular(a, &carved_at(m)?, &p_step)) };
        if avail <= R::zero() || mod_at(avail)? < R::one() {
            return Err(Error::ConstructionFailure(format!(
                "supports exhausted before n = {n}; max feasible N = {}",
                n - 1
            )));
        }
        let mut lo = R::zero();
        let mut hi = avail;
        for _ in 0..200 {
            let mid = (lo + hi) / R::c(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if mod_at(mid)? < R::one() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let set = free.carve_leftmost(hi)?;
        let rho_q = spike_modular(a, &set, &q_step);
        supports.push(set);
        modulars_q.push(rho_q);
        bounds.push(R::from_index(n).powf(-delta));
    }
    let all_hold = modulars_q
        .iter()
        .zip(&bounds)
        .all(|(m, b)| *m <= *b + R::c(1e-12));
    Ok(DecayReport {
        delta,
        supports,
        modulars_q,
        bounds,
        all_hold,
    })
}

/// General term of the dyadic-sum criterion along an endpoint generator.
pub fn dyadic_sum_terms<'a, R: Real>(
    gap: &'a Carrier<R>,
    x_gen: &'a SequenceExpr<R>,
    p_plus: R,
) -> impl Fn(u64) -> Result<R> + 'a {
    move |n: u64| {
        // the complement form keeps the gap between consecutive endpoints
        // precise long after 1 - x_n rounds to 1
        let (step, x2) = if let Some(u) = x_gen.one_minus() {
            let u1 = u.eval(n)?;
            let u2 = u.eval(n + 1)?;
            (u1 - u2, R::one() - u2)
        } else {
            let x1 = x_gen.eval(n)?;
            let x2 = x_gen.eval(n + 1)?;
            (x2 - x1, x2)
        };
        if step < -R::c(1e-15) {
            return Err(Error::Invalid(format!(
                "endpoint generator decreases at n = {n}"
            )));
        }
        let f = gap.eval(clamp_domain(x2))?.max(R::zero());
        if f <= R::c(1e-15) {
            // the true endpoint gap is positive (strictly increasing
            // generator), so a zero exponent gives exactly 1
            return Ok(R::one());
        }
        // subnormal steps lose relative precision (the last one before full
        // underflow can double), so treat them as exhausted: the true terms
        // there are dominated by any certificate the visible range admits
        if step <= R::c(1e-300) {
            return Ok(R::zero());
        }
        Ok(step.powf(f / p_plus))
    }
}

/// Dyadic-sum criterion: requires a certified nonincreasing gap, then
/// certifies the endpoint series.
pub fn criterion_dyadic_sum<R: Real>(
    prob: &EmbeddingProblem<R>,
    x_gen: &SequenceExpr<R>,
) -> Result<Option<DssCertificate<R>>> {
    let gap = prob.gap()?;
    if gap.monotonicity() != Mono::NonIncreasing {
        return Err(Error::HypothesisFail(
            "gap p - q is not certified nonincreasing".into(),
        ));
    }
    x_gen.check_increasing_below_one(1, series::SERIES_WINDOW)?;
    let terms = dyadic_sum_terms(&gap, x_gen, prob.p.p_plus());
    let verdict = certify(&terms, 1);
    match (verdict.status, verdict.certificate) {
        (SeriesStatus::Converges, Some(c)) => {
            if dyadic_saturation_guard(prob)? {
                return Ok(None);
            }
            // only emit certificates that already survive the deep recheck,
            // so a windowed bound that degrades at large indices is dropped
            // here instead of failing independent re-validation later
            if !series::recheck(&terms, &c).unwrap_or(false) {
                return Ok(None);
            }
            Ok(Some(DssCertificate::DyadicSum {
                x_gen: x_gen.clone(),
                series: c,
            }))
        }
        _ => Ok(None),
    }
}

/// True when the saturation-immune limit probe contradicts a convergent
/// endpoint series: deep endpoints can round onto each other and fabricate
/// vanishing terms, but `(1-x)^{(p-q)(x)}` staying positive rules the
/// criterion out regardless.
fn dyadic_saturation_guard<R: Real>(prob: &EmbeddingProblem<R>) -> Result<bool> {
    match necessary_limit(prob, false) {
        Ok(rep) => Ok(rep.verdict == LimitVerdict::Positive),
        Err(_) => Ok(false),
    }
}

/// Proof-level decomposition report for an established dyadic-sum
/// certificate.
#[derive(Clone, Debug)]
pub struct EpsilonReport<R> {
    pub eps: R,
    /// Endpoint index with series tail below `eps/3`.
    pub n0: u64,
    /// First family index for which all three bounds hold.
    pub k0: u64,
    /// Uniform gap on the prefix `[0, x_{n0})`.
    pub prefix_gap: R,
    /// Modular mass of the tested functions on the prefix (zero by support).
    pub prefix_bound: R,
    /// Mass where the normalized weight stays at most 1.
    pub b_part: R,
    /// Mass where the weight exceeds 1, dominated by the series tail.
    pub c_part: R,
    /// Target-space modulars of the tested family at `k0, k0+1, ...`.
    pub family_modulars: Vec<R>,
}

/// Verifies the three-part estimate behind the dyadic-sum criterion for a
/// concrete normalized family supported on the generator's cells.
pub fn dyadic_epsilon_decomposition<R: Real>(
    prob: &EmbeddingProblem<R>,
    cert: &DssCertificate<R>,
    eps: R,
) -> Result<EpsilonReport<R>> {
    let (x_gen, series_cert) = match cert {
        DssCertificate::DyadicSum { x_gen, series } => (x_gen, series),
        _ => {
            return Err(Error::Invalid(
                "epsilon decomposition requires a dyadic-sum certificate".into(),
            ))
        }
    };
    if eps <= R::zero() {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    let gap = prob.gap()?;
    let p_plus = prob.p.p_plus();
    let terms = dyadic_sum_terms(&gap, x_gen, p_plus);
    let third = eps / R::c(3.0);

    // n0: the first index whose certified series tail drops below eps/3.
    let start = match series_cert {
        series::Certificate::Comparison { n_start, .. } => *n_start,
        series::Certificate::Geometric { n_start, .. } => *n_start,
        series::Certificate::HarmonicLower { .. } => {
            return Err(Error::Invalid(
                "divergence evidence cannot bound a tail".into(),
            ))
        }
    };
    let mut n0 = None;
    for n in start..start + 2_000 {
        if series_tail_bound(series_cert, &terms, n)? <= third {
            n0 = Some(n);
            break;
        }
    }
    let n0 =
        n0.ok_or_else(|| Error::ConstructionFailure("series tail never reaches eps/3".into()))?;

    let x_n0 = x_gen.eval(n0)?;
    let prefix = IntervalSet::from_interval(
        Interval::new(R::zero(), x_n0.max(R::c(1e-12)))
            .map_err(|_| Error::ConstructionFailure("degenerate prefix".into()))?,
    );
    let prefix_gap = gap.ess_bounds(&prefix)?.inf.max(R::zero());

    // Family f_k = chi_{[x_k, x_{k+1})} / mu^{1/p}: search the first k0 >= n0
    // where all three parts fall below eps/3 and the total below eps.
    let mut k0 = None;
    let mut prefix_bound = R::zero();
    let mut b_part = R::zero();
    let mut c_part = R::zero();
    let mut family_modulars = Vec::new();
    'outer: for k in n0..n0 + 2_000 {
        let lo = x_gen.eval(k)?;
        let hi = x_gen.eval(k + 1)?;
        if hi - lo <= R::c(1e-300) {
            break;
        }
        let set = IntervalSet::from_interval(Interval::new(lo, hi).expect("increasing"));
        let g = build_gk(std::slice::from_ref(&set), &prob.p)?.remove(0);
        // decomposition: support misses the prefix entirely; the weight
        // mu^{-q/p} never falls below 1 on [0,1), so the B-part is the mass
        // with weight exactly 1 (none for mu < 1); the C-part is the rest.
        let pb = R::zero();
        let bp = R::zero();
        let (rho_q, _) = modular(&PwFun::Step(g), &prob.q, DEFAULT_BUDGET)?;
        let cp = rho_q;
        let tail = series_tail_bound(series_cert, &terms, k)?;
        if pb <= third && bp <= third && cp <= tail.max(third) && rho_q <= eps {
            k0 = Some(k);
            prefix_bound = pb;
            b_part = bp;
            c_part = cp;
            family_modulars.push(rho_q);
            for kk in k + 1..(k + 4).min(n0 + 2_000) {
                let lo2 = x_gen.eval(kk)?;
                let hi2 = x_gen.eval(kk + 1)?;
                if hi2 - lo2 <= R::c(1e-300) {
                    break;
                }
                let set2 = IntervalSet::from_interval(Interval::new(lo2, hi2).expect("inc"));
                let g2 = build_gk(std::slice::from_ref(&set2), &prob.p)?.remove(0);
                let (rq2, _) = modular(&PwFun::Step(g2), &prob.q, DEFAULT_BUDGET)?;
                if rq2 > eps {
                    k0 = None;
                    family_modulars.clear();
                    continue 'outer;
                }
                family_modulars.push(rq2);
            }
            break;
        }
    }
    let k0 = k0.ok_or_else(|| {
        Error::ConstructionFailure("no family index satisfies the three bounds".into())
    })?;
    Ok(EpsilonReport {
        eps,
        n0,
        k0,
        prefix_gap,
        prefix_bound,
        b_part,
        c_part,
        family_modulars,
    })
}

/// Certified upper bound on the series tail past `n` (terms at indices > n),
/// derived from the certificate's dominating law.
fn series_tail_bound<R: Real, T: series::Terms<R>>(
    cert: &series::Certificate<R>,
    terms: &T,
    n: u64,
) -> Result<R> {
    match cert {
        series::Certificate::Comparison { s, c, .. } => {
            Ok(*c * R::from_index(n).powf(R::one() - *s) / (*s - R::one()))
        }
        series::Certificate::Geometric { ratio, .. } => {
            let t = terms.term(n)?;
            Ok(t * *ratio / (R::one() - *ratio))
        }
        series::Certificate::HarmonicLower { .. } => Err(Error::Invalid(
            "divergence evidence carries no tail bound".into(),
        )),
    }
}

/// Level-set measure and value floor of the gap on the band `(lo, hi]`.
fn level_set<R: Real>(gap: &Carrier<R>, lo: R, hi: R) -> Result<(R, R)> {
    match gap {
        Carrier::Step(d) => {
            let mut m = KahanSum::new();
            let mut floor = hi;
            for c in d.cells() {
                if c.value > lo && c.value <= hi {
                    m.add(c.hi - c.lo);
                    floor = floor.min(c.value);
                }
            }
            Ok((m.value(), floor))
        }
        Carrier::Expr(e) => {
            let mut m = KahanSum::new();
            for (iv, node) in e.pieces() {
                for seg in node.monotone_segments(iv, 256)? {
                    let (vmin, vmax) = if seg.value_lo <= seg.value_hi {
                        (seg.value_lo, seg.value_hi)
                    } else {
                        (seg.value_hi, seg.value_lo)
                    };
                    let band_lo = lo.max(vmin);
                    let band_hi = hi.min(vmax);
                    if band_hi <= band_lo {
                        continue;
                    }
                    let a = invert_monotone(node, seg.lo, seg.hi, band_lo)?;
                    let b = invert_monotone(node, seg.lo, seg.hi, band_hi)?;
                    m.add((b - a).abs());
                }
            }
            // the exact floor over the preimage is at least the band's open
            // lower end; using it keeps the series term an upper bound
            Ok((m.value(), lo))
        }
        Carrier::Tail(_) => Err(Error::Unsupported(
            "level sets of tail gaps are not invertible here".into(),
        )),
    }
}

/// Measure of the set where the gap `p - q` is not strictly positive. The
/// level-set bands `(r_{k+1}, r_k]` only ever cover the region where the gap
/// is positive; a positive-measure zero-gap set escapes every band and
/// carries an isometric copy of the inclusion, so the level-set criterion
/// does not apply when this measure is positive. Step values within 1e-12 of
/// zero count as zero; expression values use the exact zero level (isolated
/// touch points near 1, as in `(1-x)^r`, stay null).
fn gap_zero_measure<R: Real>(gap: &Carrier<R>) -> Result<R> {
    match gap {
        Carrier::Step(d) => {
            // step normalization drops zero-value cells, so the zero set is
            // the uncovered part of [0,1] plus any surviving near-zero cells
            let mut covered_positive = KahanSum::new();
            for c in d.cells() {
                if c.value > R::c(1e-12) {
                    covered_positive.add(c.hi - c.lo);
                }
            }
            Ok((R::one() - covered_positive.value()).max(R::zero()))
        }
        Carrier::Expr(e) => {
            let mut m = KahanSum::new();
            for (iv, node) in e.pieces() {
                for seg in node.monotone_segments(iv, 256)? {
                    let (vmin, vmax) = if seg.value_lo <= seg.value_hi {
                        (seg.value_lo, seg.value_hi)
                    } else {
                        (seg.value_hi, seg.value_lo)
                    };
                    if vmin > R::zero() {
                        continue;
                    }
                    if vmax <= R::zero() {
                        m.add(seg.hi - seg.lo);
                        continue;
                    }
                    // the segment crosses zero once; the nonpositive side is
                    // the sub-segment between the crossing and the endpoint
                    // attaining vmin
                    let x = invert_monotone(node, seg.lo, seg.hi, R::zero())?;
                    let width = if seg.value_lo <= seg.value_hi {
                        x - seg.lo
                    } else {
                        seg.hi - x
                    };
                    m.add(width.max(R::zero()));
                }
            }
            Ok(m.value())
        }
        Carrier::Tail(_) => Err(Error::Unsupported(
            "zero sets of tail gaps are not invertible here".into(),
        )),
    }
}

/// Bisects a monotone expression on `[a, b]` for the point with value
/// `target` (assumed attained).
fn invert_monotone<R: Real>(
    node: &crate::expr::ExprNode<R>,
    a: R,
    b: R,
    target: R,
) -> Result<R> {
    let va = node.eval(a)?;
    let vb = node.eval(b)?;
    let increasing = vb >= va;
    if (increasing && target <= va) || (!increasing && target >= va) {
        return Ok(a);
    }
    if (increasing && target >= vb) || (!increasing && target <= vb) {
        return Ok(b);
    }
    let mut lo = a;
    let mut hi = b;
    for _ in 0..100 {
        let mid = (lo + hi) / R::c(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = node.eval(mid)?;
        if (v < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / R::c(2.0))
}

/// Level-set sum criterion along a strictly decreasing positive threshold
/// generator.
pub fn criterion_level_set_sum<R: Real>(
    prob: &EmbeddingProblem<R>,
    r_gen: &SequenceExpr<R>,
) -> Result<Option<DssCertificate<R>>> {
    check_decreasing_positive(r_gen)?;
    let gap = prob.gap()?;
    if gap_zero_measure(&gap)? > R::c(1e-12) {
        return Ok(None);
    }
    let p_plus = prob.p.p_plus();
    let terms = level_set_terms(&gap, r_gen, p_plus);
    let verdict = certify(&terms, 1);
    match (verdict.status, verdict.certificate) {
        (SeriesStatus::Converges, Some(c)) => {
            if !series::recheck(&terms, &c).unwrap_or(false) {
                return Ok(None);
            }
            Ok(Some(DssCertificate::LevelSetSum {
                r_gen: r_gen.clone(),
                series: c,
            }))
        }
        _ => Ok(None),
    }
}

/// General term of the level-set criterion.
pub fn level_set_terms<'a, R: Real>(
    gap: &'a Carrier<R>,
    r_gen: &'a SequenceExpr<R>,
    p_plus: R,
) -> impl Fn(u64) -> Result<R> + 'a {
    move |k: u64| {
        let hi = r_gen.eval(k)?;
        let lo = r_gen.eval(k + 1)?;
        if lo >= hi {
            return Err(Error::Invalid(format!(
                "threshold generator not decreasing at k = {k}"
            )));
        }
        let (m, floor) = level_set(gap, lo, hi)?;
        if m <= R::zero() {
            return Ok(R::zero());
        }
        Ok(m.powf(floor / p_plus))
    }
}

fn check_decreasing_positive<R: Real>(r_gen: &SequenceExpr<R>) -> Result<()> {
    let mut prev = r_gen.eval(1)?;
    for k in 2..=series::SERIES_WINDOW {
        let v = r_gen.eval(k)?;
        if v <= R::zero() {
            return Err(Error::Invalid(format!(
                "threshold generator nonpositive at k = {k}"
            )));
        }
        if v >= prev {
            return Err(Error::Invalid(format!(
                "threshold generator not strictly decreasing at k = {k}"
            )));
        }
        prev = v;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitVerdict {
    Zero,
    Positive,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct LimitReport<R> {
    pub limit_estimate: R,
    pub verdict: LimitVerdict,
    /// `(k, h(x_k))` along `x_k = 1 - 2^{-k}`.
    pub samples: Vec<(u32, R)>,
}

/// Necessary limit probe: evaluates `h(x) = (1-x)^{g(x)}` with `g = p - q`
/// (or its decreasing rearrangement) along dyadic points. ZERO and POSITIVE
/// both require a certified monotone tail; sampling alone yields UNKNOWN.
pub fn necessary_limit<R: Real>(
    prob: &EmbeddingProblem<R>,
    rearranged: bool,
) -> Result<LimitReport<R>> {
    let gap = prob.gap()?;
    let mono = gap.monotonicity();
    let g: Carrier<R> = if rearranged {
        match (&gap, mono) {
            (_, Mono::NonIncreasing) => gap.clone(),
            (Carrier::Step(d), _) => Carrier::Step(d.decreasing_rearrangement()?),
            _ => {
                return Err(Error::Unsupported(
                    "rearrangement of non-step, non-monotone gaps".into(),
                ))
            }
        }
    } else {
        if mono != Mono::NonIncreasing {
            return Err(Error::HypothesisFail(
                "gap p - q is not certified nonincreasing".into(),
            ));
        }
        gap.clone()
    };

    let ln2 = R::c(std::f64::consts::LN_2);
    let mut samples = Vec::with_capacity(LIMIT_DEPTH as usize);
    let mut g_vals = Vec::with_capacity(LIMIT_DEPTH as usize);
    for k in 1..=LIMIT_DEPTH {
        let t = clamp_domain(R::one() - R::c(2.0).powi(-(k.min(52) as i32)));
        let gv = g.eval(t)?.max(R::zero());
        // h = (2^{-k})^{g} computed in log form so depth is not lost to
        // floating-point saturation of the sample point
        let h = (-(R::from_index(k as u64)) * ln2 * gv).exp();
        samples.push((k, h));
        g_vals.push(gv);
    }
    let last = samples.last().expect("nonempty").1;
    let n = samples.len();
    let tail20 = &samples[n - 20..];
    let g_tail = &g_vals[n - 20..];
    let tol = R::c(1e-12);
    let h_tail_nonincreasing = tail20.windows(2).all(|w| w[1].1 <= w[0].1 + tol);
    let g_tail_monotone = g_tail.windows(2).all(|w| w[1] <= w[0] + tol)
        || g_tail.windows(2).all(|w| w[1] >= w[0] - tol);

    let verdict = if last < R::c(1e-6) && h_tail_nonincreasing && g_tail_monotone {
        LimitVerdict::Zero
    } else if tail20.iter().all(|&(_, h)| h >= R::c(1e-3)) && g_tail_monotone {
        LimitVerdict::Positive
    } else {
        LimitVerdict::Unknown
    };
    Ok(LimitReport {
        limit_estimate: last,
        verdict,
        samples,
    })
}

/// Evidence that the inclusion is invertible on a disjoint normalized
/// sequence: sets past dyadic points where `(1-x)^{(p-q)(x)}` stays at
/// least `r`, with the equivalence constant `2^{p+}/r`.
#[derive(Clone, Debug)]
pub struct NotDssWitness<R> {
    pub r: R,
    pub x_seq: Vec<R>,
    pub sets: Vec<IntervalSet<R>>,
    pub s_seq: Vec<StepFn<R>>,
    pub equiv_constant: R,
}

/// Builds a witness from a POSITIVE limit report: `x_n = 1 - 2^{-2n}`
/// (spacing `(x_n + 1)/2 < x_{n+1}` holds by construction), `r` half the
/// infimum of `h` over the last 20 dyadic samples, and
/// `A_n = [x_n, (x_n+1)/2)` of measure `(1 - x_n)/2`.
pub fn build_not_dss_witness<R: Real>(
    prob: &EmbeddingProblem<R>,
    report: &LimitReport<R>,
) -> Result<Option<NotDssWitness<R>>> {
    if report.verdict != LimitVerdict::Positive {
        return Err(Error::PreconditionViolation(
            "witness construction requires a POSITIVE limit verdict".into(),
        ));
    }
    let n = report.samples.len();
    let mut inf = R::infinity();
    for &(_, h) in &report.samples[n - 20..] {
        inf = inf.min(h);
    }
    let r = inf / R::c(2.0);
    if r <= R::zero() {
        return Ok(None);
    }
    let gap = prob.gap()?;
    let ln2 = R::c(std::f64::consts::LN_2);
    let mut x_seq = Vec::new();
    let mut sets = Vec::new();
    // depth capped so every set keeps measure 2^{-2i-1} above the library's
    // null-set resolution
    for i in 1..=16u32 {
        let k = 2 * i;
        let x = R::one() - R::c(2.0).powi(-(k as i32));
        let gv = gap.eval(clamp_domain(x))?.max(R::zero());
        let h = (-(R::from_index(k as u64)) * ln2 * gv).exp();
        if h < r {
            continue;
        }
        let mid = (x + R::one()) / R::c(2.0);
        x_seq.push(x);
        sets.push(IntervalSet::from_interval(
            Interval::new(x, mid).expect("dyadic cell"),
        ));
    }
    if sets.len() < 2 {
        return Ok(None);
    }
    let s_seq = build_gk(&sets, &prob.p)?;
    let equiv_constant = R::c(2.0).powf(prob.p.p_plus()) / r;
    Ok(Some(NotDssWitness {
        r,
        x_seq,
        sets,
        s_seq,
        equiv_constant,
    }))
}

/// Re-validates a witness: spacing, height floor, and the modular inequality
/// `rho_p(sum y_n s_n) <= (2^{p+}/r) rho_q(sum y_n s_n)` over seeded random
/// coefficient vectors with `|y_n| < 1`.
pub fn validate_witness<R: Real>(
    prob: &EmbeddingProblem<R>,
    wit: &NotDssWitness<R>,
    seed: u64,
) -> Result<bool> {
    if wit.r <= R::zero() || wit.x_seq.len() != wit.sets.len() {
        return Ok(false);
    }
    for w in wit.x_seq.windows(2) {
        if (w[0] + R::one()) / R::c(2.0) >= w[1] {
            return Ok(false);
        }
    }
    let gap = prob.gap()?;
    for (x, set) in wit.x_seq.iter().zip(&wit.sets) {
        let gv = gap.eval(clamp_domain(*x))?.max(R::zero());
        if (R::one() - *x).powf(gv) < wit.r - R::c(1e-12) {
            return Ok(false);
        }
        if set.measure() < (R::one() - *x) / R::c(2.0) - R::c(1e-15) {
            return Ok(false);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shrink = R::one() - R::c(1e-12);
    for _ in 0..WITNESS_TRIALS {
        let ys: Vec<R> = (0..wit.s_seq.len())
            .map(|_| R::c(rng.gen_range(-1.0..1.0)) * shrink)
            .collect();
        let mut cells: Vec<Cell<R>> = Vec::new();
        for (y, s) in ys.iter().zip(&wit.s_seq) {
            for c in s.cells() {
                cells.push(Cell {
                    lo: c.lo,
                    hi: c.hi,
                    value: *y * c.value,
                });
            }
        }
        let f = PwFun::Step(StepFn::from_cells(cells)?);
        let (rho_p, _) = modular(&f, &prob.p, DEFAULT_BUDGET)?;
        let (rho_q, _) = modular(&f, &prob.q, DEFAULT_BUDGET)?;
        if rho_p > wit.equiv_constant * rho_q * (R::one() + R::c(1e-9)) + R::c(1e-30) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Re-validates a certificate by re-running its defining check.
pub fn recheck_certificate<R: Real>(
    prob: &EmbeddingProblem<R>,
    cert: &DssCertificate<R>,
) -> Result<bool> {
    match cert {
        DssCertificate::UniformGap { delta } => {
            let gap = ess_inf_gap(prob)?;
            Ok(*delta > R::zero() && *delta < gap && gap > R::c(1e-9))
        }
        DssCertificate::DisjointRanges => {
            let rp = prob.p.essential_range()?;
            let rq = prob.q.essential_range()?;
            Ok(!rp.intersects(&rq))
        }
        DssCertificate::DyadicSum { x_gen, series } => {
            let gap = prob.gap()?;
            if gap.monotonicity() != Mono::NonIncreasing {
                return Ok(false);
            }
            if dyadic_saturation_guard(prob)? {
                return Ok(false);
            }
            let terms = dyadic_sum_terms(&gap, x_gen, prob.p.p_plus());
            series::recheck(&terms, series)
        }
        DssCertificate::LevelSetSum { r_gen, series } => {
            let gap = prob.gap()?;
            if gap_zero_measure(&gap)? > R::c(1e-12) {
                return Ok(false);
            }
            let terms = level_set_terms(&gap, r_gen, prob.p.p_plus());
            series::recheck(&terms, series)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DssStatus {
    Dss,
    NotDss,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct DssVerdict<R> {
    pub status: DssStatus,
    pub certificate: Option<DssCertificate<R>>,
    pub witness: Option<NotDssWitness<R>>,
    pub diagnostics: Vec<String>,
}

/// Default endpoint generator `x_n = 1 - 2^{-n}`.
pub fn default_x_gen<R: Real>() -> SequenceExpr<R> {
    SequenceExpr::sub(
        SequenceExpr::constant(R::one()),
        SequenceExpr::pow(SequenceExpr::constant(R::c(0.5)), SequenceExpr::n()),
    )
}

/// Default threshold generator `r_k = sup(p-q)/k`, when the gap has a
/// positive supremum.
pub fn default_r_gen<R: Real>(prob: &EmbeddingProblem<R>) -> Result<Option<SequenceExpr<R>>> {
    let full = IntervalSet::from_interval(Interval::new(R::zero(), R::one()).expect("unit"));
    let sup = prob.gap()?.ess_bounds(&full)?.sup;
    if sup <= R::zero() {
        return Ok(None);
    }
    Ok(Some(SequenceExpr::div(
        SequenceExpr::constant(sup),
        SequenceExpr::n(),
    )))
}

/// Runs the criteria in a fixed order (disjoint ranges, uniform gap,
/// dyadic sums with the default then user generators, level-set sums,
/// necessary limits) and combines them into one verdict. The necessary
/// checks are skipped once a certificate exists, so DSS and NOT_DSS can
/// never both trigger.
pub fn dss_verdict<R: Real>(
    prob: &EmbeddingProblem<R>,
    x_gens: &[SequenceExpr<R>],
    r_gens: &[SequenceExpr<R>],
    seed: u64,
) -> Result<DssVerdict<R>> {
    if !check_inclusion(prob)? {
        return Err(Error::PreconditionViolation(
            "q <= p fails: the inclusion is not bounded".into(),
        ));
    }
    let mut diagnostics = Vec::new();
    let dss = |certificate: DssCertificate<R>, diagnostics: Vec<String>| {
        Ok(DssVerdict {
            status: DssStatus::Dss,
            certificate: Some(certificate),
            witness: None,
            diagnostics,
        })
    };

    match criterion_disjoint_ranges(prob) {
        Ok(Some(c)) => {
            diagnostics.push("disjoint-ranges: certificate".into());
            return dss(c, diagnostics);
        }
        Ok(None) => diagnostics.push("disjoint-ranges: none (ranges intersect)".into()),
        Err(e) => diagnostics.push(format!("disjoint-ranges: error ({e})")),
    }
    match criterion_uniform_gap(prob) {
        Ok(Some(c)) => {
            diagnostics.push("uniform-gap: certificate".into());
            return dss(c, diagnostics);
        }
        Ok(None) => diagnostics.push("uniform-gap: none (gap floor at most 1e-9)".into()),
        Err(e) => diagnostics.push(format!("uniform-gap: error ({e})")),
    }
    let mut all_x: Vec<SequenceExpr<R>> = vec![default_x_gen()];
    all_x.extend(x_gens.iter().cloned());
    for (i, xg) in all_x.iter().enumerate() {
        match criterion_dyadic_sum(prob, xg) {
            Ok(Some(c)) => {
                diagnostics.push(format!("dyadic-sum (generator {i}): certificate"));
                return dss(c, diagnostics);
            }
            Ok(None) => diagnostics.push(format!("dyadic-sum (generator {i}): none")),
            Err(e) => diagnostics.push(format!("dyadic-sum (generator {i}): error ({e})")),
        }
    }
    let mut all_r: Vec<SequenceExpr<R>> = Vec::new();
    match default_r_gen(prob) {
        Ok(Some(rg)) => all_r.push(rg),
        Ok(None) => diagnostics.push("level-set-sum: no default generator (gap sup 0)".into()),
        Err(e) => diagnostics.push(format!("level-set-sum: default generator error ({e})")),
    }
    all_r.extend(r_gens.iter().cloned());
    for (i, rg) in all_r.iter().enumerate() {
        match criterion_level_set_sum(prob, rg) {
            Ok(Some(c)) => {
                diagnostics.push(format!("level-set-sum (generator {i}): certificate"));
                return dss(c, diagnostics);
            }
            Ok(None) => diagnostics.push(format!("level-set-sum (generator {i}): none")),
            Err(e) => diagnostics.push(format!("level-set-sum (generator {i}): error ({e})")),
        }
    }

    // necessary conditions: plain when the gap is certified nonincreasing,
    // rearranged otherwise
    let gap_mono = prob.gap().map(|g| g.monotonicity()).unwrap_or(Mono::Unknown);
    let rearranged = gap_mono != Mono::NonIncreasing;
    match necessary_limit(prob, rearranged) {
        Ok(report) => {
            diagnostics.push(format!(
                "necessary-limit (rearranged = {rearranged}): {:?} at estimate {:e}",
                report.verdict,
                report.limit_estimate.to_f64().unwrap_or(f64::NAN)
            ));
            if report.verdict == LimitVerdict::Positive {
                match build_not_dss_witness(prob, &report)? {
                    Some(wit) => {
                        if validate_witness(prob, &wit, seed)? {
                            diagnostics.push("witness: validated".into());
                            return Ok(DssVerdict {
                                status: DssStatus::NotDss,
                                certificate: None,
                                witness: Some(wit),
                                diagnostics,
                            });
                        }
                        diagnostics.push("witness: failed re-validation".into());
                    }
                    None => diagnostics.push("witness: no r-bounded subsequence".into()),
                }
            }
        }
        Err(e) => diagnostics.push(format!("necessary-limit: error ({e})")),
    }
    Ok(DssVerdict {
        status: DssStatus::Unknown,
        certificate: None,
        witness: None,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{ExprNode, ExprPiecewise};

    fn const_exp(v: f64) -> ExponentFn<f64> {
        ExponentFn::new(Carrier::Step(StepFn::constant(v).unwrap())).unwrap()
    }

    /// p(x) = q + (1 - x)^r over [0,1).
    fn power_family(r: f64, q: f64) -> EmbeddingProblem<f64> {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let node = ExprNode::add(
            ExprNode::constant(q),
            ExprNode::pow(
                ExprNode::sub(ExprNode::constant(1.0), ExprNode::x()),
                ExprNode::constant(r),
            ),
        );
        let p = ExponentFn::new(Carrier::Expr(ExprPiecewise::single(iv, node).unwrap())).unwrap();
        EmbeddingProblem::new(p, const_exp(q))
    }

    #[test]
    fn inclusion_checks() {
        let ok = EmbeddingProblem::new(const_exp(1.3), const_exp(1.0));
        assert!(check_inclusion(&ok).unwrap());
        let eq = EmbeddingProblem::new(const_exp(2.0), const_exp(2.0));
        assert!(check_inclusion(&eq).unwrap());
        let bad = EmbeddingProblem::new(const_exp(1.5), const_exp(2.0));
        assert!(!check_inclusion(&bad).unwrap());
    }

    #[test]
    fn constant_gap_and_uniform_certificate() {
        let prob = EmbeddingProblem::new(const_exp(1.3), const_exp(1.0));
        let gap = ess_inf_gap(&prob).unwrap();
        assert!((gap - 0.3).abs() < 1e-12);
        match criterion_uniform_gap(&prob).unwrap().unwrap() {
            DssCertificate::UniformGap { delta } => assert!((delta - 0.15).abs() < 1e-12),
            other => panic!("unexpected certificate {other:?}"),
        }
        let eq = EmbeddingProblem::new(const_exp(2.0), const_exp(2.0));
        assert!(criterion_uniform_gap(&eq).unwrap().is_none());
    }

    #[test]
    fn power_family_gap_infimum_is_zero() {
        let prob = power_family(2.0, 1.0);
        assert!(check_inclusion(&prob).unwrap());
        let gap = ess_inf_gap(&prob).unwrap();
        assert!(gap.abs() < 1e-6, "gap = {gap}");
    }

    #[test]
    fn disjoint_ranges_fire_only_when_disjoint() {
        let prob = EmbeddingProblem::new(const_exp(3.0), const_exp(2.0));
        assert!(matches!(
            criterion_disjoint_ranges(&prob).unwrap(),
            Some(DssCertificate::DisjointRanges)
        ));
        let shared = EmbeddingProblem::new(const_exp(2.0), const_exp(2.0));
        assert!(criterion_disjoint_ranges(&shared).unwrap().is_none());
    }

    #[test]
    fn decay_check_matches_closed_form() {
        // p = 1.5, q = 1: rho_q(f_n) = (2n)^{-0.5} <= n^{-0.25}
        let prob = EmbeddingProblem::new(const_exp(1.5), const_exp(1.0));
        let rep = decay_sequence_check(&prob, 0.25, 20).unwrap();
        assert!(rep.all_hold);
        for (i, m) in rep.modulars_q.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((m - (2.0 * n).powf(-0.5)).abs() < 1e-9, "n = {n}");
        }
        // decay is nonincreasing
        for w in rep.modulars_q.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn constant_gap_dyadic_sum_certificate() {
        let prob = EmbeddingProblem::new(const_exp(1.3), const_exp(1.0));
        let cert = criterion_dyadic_sum(&prob, &default_x_gen()).unwrap();
        assert!(cert.is_some(), "geometric terms 2^{{-n 0.3/p+}} must certify");
    }

    #[test]
    fn increasing_gap_fails_dyadic_hypothesis() {
        // p - q = x is increasing
        let iv = Interval::new(0.0, 1.0).unwrap();
        let node = ExprNode::add(ExprNode::constant(1.0), ExprNode::x());
        let p = ExponentFn::new(Carrier::Expr(ExprPiecewise::single(iv, node).unwrap())).unwrap();
        let prob = EmbeddingProblem::new(p, const_exp(1.0));
        assert!(matches!(
            criterion_dyadic_sum(&prob, &default_x_gen()),
            Err(Error::HypothesisFail(_))
        ));
    }

    #[test]
    fn level_set_criterion_closed_forms() {
        // gap value 1/k on measure 2^{-k^2}: terms 2^{-k/2}, certifies
        let mut cells = Vec::new();
        let mut cursor = 0.0f64;
        for k in 1..=7u32 {
            let m = 2f64.powi(-((k * k) as i32));
            cells.push(Cell {
                lo: cursor,
                hi: cursor + m,
                value: 1.0 + 1.0 / k as f64,
            });
            cursor += m;
        }
        cells.push(Cell {
            lo: cursor,
            hi: 1.0,
            value: 1.0 + 1.0,
        });
        let p = ExponentFn::new(Carrier::Step(StepFn::from_cells(cells).unwrap())).unwrap();
        let prob = EmbeddingProblem::new(p, const_exp(1.0));
        // r_k = 1/(k - 1/2) isolates the level set of value 1/k
        let r_gen = SequenceExpr::div(
            SequenceExpr::constant(1.0),
            SequenceExpr::sub(SequenceExpr::n(), SequenceExpr::constant(0.5)),
        );
        let cert = criterion_level_set_sum(&prob, &r_gen).unwrap();
        assert!(cert.is_some());
        if let Some(c) = cert {
            assert!(recheck_certificate(&prob, &c).unwrap());
        }
    }

    #[test]
    fn zero_gap_on_positive_measure_blocks_level_set_criterion() {
        // p = 1 on [0, 1/2), 2 on [1/2, 1); q = 1: the inclusion restricts to
        // the identity on half the domain, so no DSS certificate may fire even
        // though the level sets of the positive gap band are summable
        let p = ExponentFn::new(Carrier::Step(
            StepFn::from_cells(vec![
                Cell {
                    lo: 0.0,
                    hi: 0.5,
                    value: 1.0,
                },
                Cell {
                    lo: 0.5,
                    hi: 1.0,
                    value: 2.0,
                },
            ])
            .unwrap(),
        ))
        .unwrap();
        let prob = EmbeddingProblem::new(p, const_exp(1.0));
        let r_gen = default_r_gen(&prob).unwrap().unwrap();
        assert!(criterion_level_set_sum(&prob, &r_gen).unwrap().is_none());
        // a forged certificate over the same data must fail re-validation
        let forged = DssCertificate::LevelSetSum {
            r_gen,
            series: series::Certificate::Geometric {
                ratio: 0.5,
                n_start: 2,
                window: series::SERIES_WINDOW,
            },
        };
        assert!(!recheck_certificate(&prob, &forged).unwrap());
        let v = dss_verdict(&prob, &[], &[], 0).unwrap();
        assert_ne!(v.status, DssStatus::Dss, "diag: {:?}", v.diagnostics);
    }

    #[test]
    fn necessary_limit_constant_gap_is_zero() {
        let prob = EmbeddingProblem::new(const_exp(1.3), const_exp(1.0));
        let rep = necessary_limit(&prob, false).unwrap();
        assert_eq!(rep.verdict, LimitVerdict::Zero);
        assert!(rep.limit_estimate < 1e-6);
    }

    #[test]
    fn necessary_limit_power_family_is_positive() {
        for r in [1.0, 2.0, 3.0] {
            let prob = power_family(r, 1.0);
            let rep = necessary_limit(&prob, false).unwrap();
            assert_eq!(rep.verdict, LimitVerdict::Positive, "r = {r}");
            assert!(rep.limit_estimate >= 0.99, "estimate {}", rep.limit_estimate);
        }
    }

    #[test]
    fn rearranged_agrees_on_nonincreasing_gap() {
        let prob = power_family(2.0, 1.0);
        let plain = necessary_limit(&prob, false).unwrap();
        let rearr = necessary_limit(&prob, true).unwrap();
        assert_eq!(plain.verdict, rearr.verdict);
    }

    #[test]
    fn witness_builds_and_validates_for_power_family() {
        let prob = power_family(1.0, 1.0);
        let rep = necessary_limit(&prob, false).unwrap();
        let wit = build_not_dss_witness(&prob, &rep).unwrap().unwrap();
        assert!(wit.r > 0.0);
        assert!(wit.sets.len() >= 2);
        assert!(validate_witness(&prob, &wit, 0).unwrap());
        // all s_n are normalized
        for s in &wit.s_seq {
            let (rho, _) = modular(&PwFun::Step(s.clone()), &prob.p, DEFAULT_BUDGET).unwrap();
            assert!((rho - 1.0).abs() < 0.05, "rho = {rho}");
        }
    }

    #[test]
    fn verdict_uniform_gap_path() {
        let prob = EmbeddingProblem::new(const_exp(1.3), const_exp(1.0));
        let v = dss_verdict(&prob, &[], &[], 0).unwrap();
        assert_eq!(v.status, DssStatus::Dss);
        assert!(matches!(
            v.certificate,
            Some(DssCertificate::DisjointRanges) | Some(DssCertificate::UniformGap { .. })
        ));
    }

    #[test]
    fn verdict_power_family_not_dss() {
        let prob = power_family(2.0, 1.0);
        let v = dss_verdict(&prob, &[], &[], 0).unwrap();
        assert_eq!(v.status, DssStatus::NotDss, "diag: {:?}", v.diagnostics);
        assert!(v.witness.is_some());
        assert!(v.certificate.is_none());
    }

    #[test]
    fn identity_inclusion_is_not_dss() {
        let prob = EmbeddingProblem::new(const_exp(2.0), const_exp(2.0));
        let v = dss_verdict(&prob, &[], &[], 0).unwrap();
        assert_eq!(v.status, DssStatus::NotDss, "diag: {:?}", v.diagnostics);
    }

    #[test]
    fn certificates_recheck_and_reject_forgeries() {
        let prob = EmbeddingProblem::new(const_exp(1.3), const_exp(1.0));
        let cert = criterion_uniform_gap(&prob).unwrap().unwrap();
        assert!(recheck_certificate(&prob, &cert).unwrap());
        let forged = DssCertificate::UniformGap { delta: 0.6 };
        assert!(!recheck_certificate(&prob, &forged).unwrap());
    }

    #[test]
    fn epsilon_decomposition_on_constant_gap() {
        let prob = EmbeddingProblem::new(const_exp(1.3), const_exp(1.0));
        let cert = criterion_dyadic_sum(&prob, &default_x_gen()).unwrap().unwrap();
        let rep = dyadic_epsilon_decomposition(&prob, &cert, 0.3).unwrap();
        assert!(rep.prefix_bound <= 0.1);
        assert!(rep.b_part <= 0.1);
        assert!(rep.c_part <= 0.1 + 1e-12);
        for m in &rep.family_modulars {
            assert!(*m <= 0.3);
        }
        // looser eps never needs a later n0
        let loose = dyadic_epsilon_decomposition(&prob, &cert, 3.0).unwrap();
        assert!(loose.n0 <= rep.n0);
    }
}
