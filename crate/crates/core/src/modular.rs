//! The modular `rho_p(f) = \int |f(t)|^{p(t)} dt` and the Luxemburg norm
//! `inf { r > 0 : rho_p(f/r) <= 1 }`.

use crate::carrier::Carrier;
use crate::error::{Error, Result};
use crate::expr::ExprPiecewise;
use crate::exponent::{conjugate_of, ExponentFn, ExtendedReal};
use crate::interval::Interval;
use crate::num::{cmp_eps, KahanSum, Real};
use crate::quad::{integrate, QUAD_BUDGET, QUAD_TOL};
use crate::step::{common_cells, StepFn};
use crate::tail::{TailFamily, TailPrefix};

/// A function the modular can be applied to.
#[derive(Clone, Debug)]
pub enum PwFun<R> {
    Step(StepFn<R>),
    Expr(ExprPiecewise<R>),
}

impl<R: Real> PwFun<R> {
    pub fn eval(&self, t: R) -> Result<R> {
        match self {
            PwFun::Step(f) => Ok(f.eval(t)),
            PwFun::Expr(f) => f.eval(t),
        }
    }

    pub fn scale(&self, c: R) -> PwFun<R> {
        match self {
            PwFun::Step(f) => PwFun::Step(f.scale(c)),
            PwFun::Expr(f) => PwFun::Expr(scale_expr(f, c)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PwFun::Step(f) => f.cells().is_empty(),
            PwFun::Expr(_) => false,
        }
    }
}

fn scale_expr<R: Real>(f: &ExprPiecewise<R>, c: R) -> ExprPiecewise<R> {
    use crate::expr::ExprNode;
    let pieces = f
        .pieces()
        .iter()
        .map(|(iv, node)| (*iv, ExprNode::mul(ExprNode::constant(c), node.clone())))
        .collect();
    ExprPiecewise::new(pieces).expect("scaling preserves validity")
}

/// Modular value with an absolute error bound. Exact (bound 0) for step
/// function against step exponent.
pub fn modular<R: Real>(f: &PwFun<R>, p: &ExponentFn<R>, budget: usize) -> Result<(R, R)> {
    match (f, p.carrier()) {
        (PwFun::Step(f), Carrier::Step(q)) => Ok((step_step_modular(f, q), R::zero())),
        (PwFun::Step(f), Carrier::Tail(q)) => step_tail_modular(f, q),
        (PwFun::Step(f), Carrier::Expr(_)) => {
            let mut value = KahanSum::new();
            let mut err = KahanSum::new();
            for c in f.cells() {
                let a = c.value.abs();
                if a == R::zero() {
                    continue;
                }
                let (v, e) = integrate(
                    |t| Ok(a.powf(p.eval(t)?)),
                    c.lo,
                    c.hi,
                    R::c(QUAD_TOL),
                    budget,
                )?;
                value.add(v);
                err.add(e);
            }
            Ok((value.value(), err.value()))
        }
        (PwFun::Expr(f), Carrier::Step(_)) | (PwFun::Expr(f), Carrier::Expr(_)) => {
            // Integrate |f|^{p} piece by piece of f, splitting at the
            // exponent's breakpoints to keep the integrand smooth.
            let mut cuts: Vec<R> = p.carrier().breakpoints_below(R::one(), 1_000)?;
            for iv in f.domain() {
                cuts.push(iv.lo());
                cuts.push(iv.hi());
            }
            cuts.push(R::zero());
            cuts.push(R::one());
            cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            cuts.dedup_by(|a, b| (*a - *b).abs() <= cmp_eps::<R>());
            let mut value = KahanSum::new();
            let mut err = KahanSum::new();
            for w in cuts.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                if hi - lo <= cmp_eps::<R>() {
                    continue;
                }
                let mid = lo + (hi - lo) / R::c(2.0);
                if f.eval(mid)? == R::zero() && f.eval(lo)? == R::zero() {
                    continue;
                }
                let (v, e) = integrate(
                    |t| Ok(f.eval(t)?.abs().powf(p.eval(t)?)),
                    lo,
                    hi,
                    R::c(QUAD_TOL),
                    budget,
                )?;
                value.add(v);
                err.add(e);
            }
            Ok((value.value(), err.value()))
        }
        (PwFun::Expr(_), Carrier::Tail(_)) => Err(Error::Unsupported(
            "modular of an expression function against a tail exponent".into(),
        )),
    }
}

fn step_step_modular<R: Real>(f: &StepFn<R>, p: &StepFn<R>) -> R {
    let mut sum = KahanSum::new();
    for (lo, hi, a, q) in common_cells(f, p) {
        let a = a.abs();
        if a == R::zero() {
            continue;
        }
        sum.add(a.powf(q) * (hi - lo));
    }
    sum.value()
}

/// Step function against a tail exponent: exact sums over the prefix and a
/// window of tail cells, then a rigorous bound on the remaining mass.
fn step_tail_modular<R: Real>(f: &StepFn<R>, q: &TailFamily<R>) -> Result<(R, R)> {
    let eps = cmp_eps::<R>();
    let x0 = q.tail_start()?;
    let mut sum = KahanSum::new();

    // Prefix part.
    let prefix_cells: Vec<_> = f
        .cells()
        .iter()
        .filter_map(|c| {
            let hi = c.hi.min(x0);
            (hi > c.lo + eps).then_some((c.lo, hi, c.value))
        })
        .collect();
    match q.prefix() {
        TailPrefix::Step(qp) => {
            for (lo, hi, a) in &prefix_cells {
                let a = a.abs();
                if a == R::zero() {
                    continue;
                }
                // refine against qp's cells inside [lo, hi)
                for qc in qp.cells() {
                    let l = qc.lo.max(*lo);
                    let h = qc.hi.min(*hi);
                    if h > l + eps {
                        sum.add(a.powf(qc.value) * (h - l));
                    }
                }
            }
        }
        TailPrefix::Expr(qp) => {
            for (lo, hi, a) in &prefix_cells {
                let a = a.abs();
                if a == R::zero() {
                    continue;
                }
                let (v, _) =
                    integrate(|t| Ok(a.powf(qp.eval(t)?)), *lo, *hi, R::c(QUAD_TOL), QUAD_BUDGET)?;
                sum.add(v);
            }
        }
    }

    // Tail part: exact over cells until the step function's last breakpoint,
    // and then the step value is constant up to 1.
    let last_val_before_one = f
        .cells()
        .iter()
        .find(|c| (c.hi - R::one()).abs() <= eps)
        .map(|c| (c.lo, c.value));
    let last_bp = f
        .cells()
        .iter()
        .flat_map(|c| [c.lo, c.hi])
        .filter(|&x| x < R::one() - eps)
        .fold(x0, R::max);

    let mut n = q.n0();
    let window_cap = q.n0() + 100_000;
    loop {
        let lo = q.x_at(n)?;
        if lo >= last_bp - eps || n > window_cap {
            break;
        }
        let hi = q.x_at(n + 1)?.min(last_bp);
        let qv = q.value_at(n)?;
        // refine against f's cells inside this tail cell
        for c in f.cells() {
            let l = c.lo.max(lo);
            let h = c.hi.min(hi);
            if h > l + eps {
                let a = c.value.abs();
                if a > R::zero() {
                    sum.add(a.powf(qv) * (h - l));
                }
            }
        }
        n += 1;
    }
    if n > window_cap {
        return Err(Error::Unsupported(
            "step breakpoints reach too deep into the exponent tail".into(),
        ));
    }

    // Constant final segment [last_bp, 1): sum a^{v_m} mu(cell) for the
    // remaining tail cells. |a| <= 1 or monotone exponents give a closed
    // bound after an explicit window.
    let (value_tail, err_tail) = match last_val_before_one {
        None => (R::zero(), R::zero()),
        Some((seg_lo, a)) => {
            let a = a.abs();
            if a == R::zero() {
                (R::zero(), R::zero())
            } else {
                constant_tail_mass(q, seg_lo.max(last_bp), a)?
            }
        }
    };
    Ok((sum.value() + value_tail, err_tail))
}

/// `\int_{[from,1)} a^{q(t)} dt` for a tail exponent, exact over an explicit
/// window and bounded beyond it using monotone exponent values.
fn constant_tail_mass<R: Real>(q: &TailFamily<R>, from: R, a: R) -> Result<(R, R)> {
    let eps = cmp_eps::<R>();
    let mut sum = KahanSum::new();
    let mut n = if from <= q.tail_start()? + eps {
        q.n0()
    } else {
        q.locate(from.min(R::one() - R::c(1e-15)))?
    };
    let window_end = n + 10_000;
    while n < window_end {
        let lo = q.x_at(n)?.max(from);
        let hi = q.x_at(n + 1)?.min(R::one());
        if hi > lo + R::zero() {
            sum.add(a.powf(q.value_at(n)?) * (hi - lo));
        }
        if hi >= R::one() - R::c(1e-18) {
            return Ok((sum.value(), R::zero()));
        }
        n += 1;
    }
    // Remaining mass on [x_end, 1): bound a^{q} between the window-final
    // value and the far-sample values (monotone tails only).
    let rest = R::one() - q.x_at(window_end)?;
    let v_here = q.value_at(window_end)?;
    let v_far = q.values().eval(1_000_000_000_000_000)?;
    let lo_pow = a.powf(v_here).min(a.powf(v_far));
    let hi_pow = a.powf(v_here).max(a.powf(v_far));
    match q.values_monotonicity() {
        crate::expr::Mono::NonIncreasing | crate::expr::Mono::NonDecreasing => {
            let mid = (lo_pow + hi_pow) / R::c(2.0);
            Ok((sum.value() + mid * rest, (hi_pow - lo_pow) / R::c(2.0) * rest))
        }
        _ => Err(Error::Unsupported(
            "tail exponent values not monotone; remaining mass cannot be bounded".into(),
        )),
    }
}

/// Luxemburg norm by bracketing plus bisection on the monotone map
/// `r -> rho(f/r)`.
pub fn luxemburg_norm<R: Real>(f: &PwFun<R>, p: &ExponentFn<R>, budget: usize) -> Result<R> {
    if f.is_zero() {
        return Ok(R::zero());
    }
    let rho = |r: R| -> Result<R> {
        let (v, _) = modular(&f.scale(R::one() / r), p, budget)?;
        Ok(v)
    };
    let one = R::one();
    let mut lo;
    let mut hi;
    let at_one = rho(one)?;
    if at_one == R::zero() {
        return Ok(R::zero());
    }
    if at_one <= one {
        // norm <= 1: halve downward until the modular exceeds 1.
        hi = one;
        lo = one / R::c(2.0);
        let mut guard = 0;
        while rho(lo)? <= one {
            hi = lo;
            lo /= R::c(2.0);
            guard += 1;
            if guard > 900 {
                // modular stays below 1 for arbitrarily small r: f = 0 a.e.
                return Ok(R::zero());
            }
        }
    } else {
        lo = one;
        hi = R::c(2.0);
        let mut guard = 0;
        while rho(hi)? > one {
            lo = hi;
            hi *= R::c(2.0);
            guard += 1;
            if guard > 200 {
                return Err(Error::EvalFailure(
                    "luxemburg norm bracket did not close".into(),
                ));
            }
        }
    }
    // rho(f/lo) > 1 >= rho(f/hi); bisect.
    for _ in 0..200 {
        if hi - lo <= R::c(1e-12) * hi.max(one) {
            break;
        }
        let mid = lo + (hi - lo) / R::c(2.0);
        if rho(mid)? > one {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Classical Hölder cross-check: `\int |f g| <= 2 ||f||_p ||g||_{p*}`.
/// Skipped when the conjugate exponent is not finite a.e.
pub fn holder_pairing_check<R: Real>(
    f: &StepFn<R>,
    g: &StepFn<R>,
    p: &ExponentFn<R>,
    budget: usize,
) -> Result<(R, R, bool)> {
    if p.p_minus() <= R::one() + cmp_eps::<R>() {
        return Err(Error::Skipped(
            "conjugate exponent is infinite on positive measure".into(),
        ));
    }
    let conj = conjugate_exponent(p)?;
    let mut pairing = KahanSum::new();
    for (lo, hi, a, b) in common_cells(f, g) {
        pairing.add((a * b).abs() * (hi - lo));
    }
    let nf = luxemburg_norm(&PwFun::Step(f.clone()), p, budget)?;
    let ng = luxemburg_norm(&PwFun::Step(g.clone()), &conj, budget)?;
    let bound = R::c(2.0) * nf * ng;
    let ok = pairing.value() <= bound + R::c(1e-9);
    Ok((pairing.value(), bound, ok))
}

/// The conjugate exponent function `p* = p/(p-1)`, for `p^- > 1`.
pub fn conjugate_exponent<R: Real>(p: &ExponentFn<R>) -> Result<ExponentFn<R>> {
    match p.carrier() {
        Carrier::Step(f) => {
            let cells = f
                .cells()
                .iter()
                .map(|c| {
                    let q = match conjugate_of(c.value) {
                        ExtendedReal::Finite(v) => Ok(v),
                        ExtendedReal::Infinite => Err(Error::Skipped(
                            "exponent attains 1; conjugate is infinite".into(),
                        )),
                    }?;
                    Ok(crate::step::Cell {
                        lo: c.lo,
                        hi: c.hi,
                        value: q,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ExponentFn::new(Carrier::Step(StepFn::from_cells(cells)?))
        }
        Carrier::Expr(f) => {
            use crate::expr::ExprNode;
            let pieces = f
                .pieces()
                .iter()
                .map(|(iv, node)| {
                    let conj = ExprNode::div(
                        node.clone(),
                        ExprNode::sub(node.clone(), ExprNode::constant(R::one())),
                    );
                    (*iv, conj)
                })
                .collect();
            ExponentFn::new(Carrier::Expr(ExprPiecewise::new(pieces)?))
        }
        Carrier::Tail(_) => Err(Error::Unsupported(
            "conjugate of a tail exponent is not representable".into(),
        )),
    }
}

/// Integral over an explicit interval of `|f|^{q}` for constant exponent;
/// convenience used by projection constants.
pub fn constant_exponent_integral<R: Real>(f: &StepFn<R>, iv: &Interval<R>, q: R) -> R {
    let eps = cmp_eps::<R>();
    let mut sum = KahanSum::new();
    for c in f.cells() {
        let lo = c.lo.max(iv.lo());
        let hi = c.hi.min(iv.hi());
        if hi > lo + eps {
            sum.add(c.value.abs().powf(q) * (hi - lo));
        }
    }
    sum.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::step::Cell;

    fn exp_step(v1: f64, v2: f64) -> ExponentFn<f64> {
        ExponentFn::new(Carrier::Step(
            StepFn::from_cells(vec![
                Cell {
                    lo: 0.0,
                    hi: 0.5,
                    value: v1,
                },
                Cell {
                    lo: 0.5,
                    hi: 1.0,
                    value: v2,
                },
            ])
            .unwrap(),
        ))
        .unwrap()
    }

    #[test]
    fn indicator_has_modular_one() {
        let f = PwFun::Step(StepFn::constant(1.0).unwrap());
        let p = exp_step(1.5, 3.0);
        let (v, e) = modular(&f, &p, QUAD_BUDGET).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn hand_sum_two_cells() {
        // f = 2 on [0,1), p = (1 on [0,0.5), 2 on [0.5,1)): 0.5*2 + 0.5*4 = 3
        let f = PwFun::Step(StepFn::constant(2.0).unwrap());
        let p = exp_step(1.0, 2.0);
        let (v, _) = modular(&f, &p, QUAD_BUDGET).unwrap();
        assert!((v - 3.0).abs() < 1e-14);
    }

    #[test]
    fn half_support_squared() {
        // f = 2 on [0,0.5), p = 2: 4 * 0.5 = 2
        let f = PwFun::Step(
            StepFn::from_cells(vec![Cell {
                lo: 0.0,
                hi: 0.5,
                value: 2.0,
            }])
            .unwrap(),
        );
        let p = ExponentFn::<f64>::new(Carrier::Step(StepFn::constant(2.0).unwrap())).unwrap();
        let (v, _) = modular(&f, &p, QUAD_BUDGET).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn norm_solves_modular_equation() {
        // f = 2 on [0,1), p = (1, 2): solve 1/r + 2/r^2 = 1 -> r = 2
        let f = PwFun::Step(StepFn::constant(2.0).unwrap());
        let p = exp_step(1.0, 2.0);
        let r = luxemburg_norm(&f, &p, QUAD_BUDGET).unwrap();
        assert!((r - 2.0).abs() < 1e-9, "r = {r}");
    }

    #[test]
    fn norm_of_zero_and_indicator() {
        let p = exp_step(1.5, 3.0);
        let z = PwFun::Step(StepFn::from_cells(vec![]).unwrap());
        assert_eq!(luxemburg_norm(&z, &p, QUAD_BUDGET).unwrap(), 0.0);
        let one = PwFun::Step(StepFn::constant(1.0).unwrap());
        let r = luxemburg_norm(&one, &p, QUAD_BUDGET).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn norm_homogeneity() {
        let p = exp_step(1.5, 3.0);
        let f = PwFun::Step(
            StepFn::from_cells(vec![
                Cell {
                    lo: 0.0,
                    hi: 0.25,
                    value: 3.0,
                },
                Cell {
                    lo: 0.5,
                    hi: 0.8,
                    value: 0.7,
                },
            ])
            .unwrap(),
        );
        let base = luxemburg_norm(&f, &p, QUAD_BUDGET).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let scaled = luxemburg_norm(&f.scale(c), &p, QUAD_BUDGET).unwrap();
            assert!((scaled - c * base).abs() < 1e-9, "c = {c}");
        }
    }

    #[test]
    fn expr_exponent_modular_matches_closed_form() {
        use crate::expr::{ExprNode, ExprPiecewise};
        // f = 2 on [0,1), p(x) = 1 + x: integral of 2^{1+x} dx = 2/ln 2
        let node = ExprNode::add(ExprNode::constant(1.0), ExprNode::x());
        let p = ExponentFn::new(Carrier::Expr(
            ExprPiecewise::single(Interval::new(0.0, 1.0).unwrap(), node).unwrap(),
        ))
        .unwrap();
        let f = PwFun::Step(StepFn::constant(2.0).unwrap());
        let (v, e) = modular(&f, &p, QUAD_BUDGET).unwrap();
        let exact = 2.0 / 2.0f64.ln();
        assert!((v - exact).abs() < 1e-9, "v = {v}, exact = {exact}");
        assert!(e < 1e-9);
    }

    #[test]
    fn holder_unit_functions() {
        let p = ExponentFn::<f64>::new(Carrier::Step(StepFn::constant(2.0).unwrap())).unwrap();
        let f = StepFn::constant(1.0).unwrap();
        let (pairing, bound, ok) = holder_pairing_check(&f, &f, &p, QUAD_BUDGET).unwrap();
        assert!((pairing - 1.0).abs() < 1e-12);
        assert!((bound - 2.0).abs() < 1e-9);
        assert!(ok);
    }

    #[test]
    fn holder_skips_at_exponent_one() {
        let p = exp_step(1.0, 2.0);
        let f = StepFn::constant(1.0).unwrap();
        assert!(matches!(
            holder_pairing_check(&f, &f, &p, QUAD_BUDGET),
            Err(Error::Skipped(_))
        ));
    }
}
