//! Positive-series evaluation and convergence certification. The engine
//! never guesses: CONVERGES/DIVERGES verdicts always carry a domination
//! certificate that re-validates independently, and everything else is
//! UNKNOWN.

use crate::error::{Error, Result};
use crate::num::{KahanSum, Real};
use crate::seq_expr::SequenceExpr;

/// Window length over which every certificate is checked.
pub const SERIES_WINDOW: u64 = 1_000;

/// Fresh indices examined during independent re-validation.
pub const RECHECK_INDICES: u64 = 10_000;

/// General term of a series, evaluated at integer indices.
pub trait Terms<R> {
    fn term(&self, n: u64) -> Result<R>;
}

impl<R: Real> Terms<R> for SequenceExpr<R> {
    fn term(&self, n: u64) -> Result<R> {
        self.eval(n)
    }
}

impl<R, F: Fn(u64) -> Result<R>> Terms<R> for F {
    fn term(&self, n: u64) -> Result<R> {
        self(n)
    }
}

/// Compensated partial sum over `from..=to`.
pub fn partial_sum<R: Real, T: Terms<R>>(t: &T, from: u64, to: u64) -> Result<R> {
    if to < from {
        return Err(Error::Invalid("empty summation range".into()));
    }
    let mut acc = KahanSum::new();
    for n in from..=to {
        acc.add(t.term(n)?);
    }
    Ok(acc.value())
}

/// Evidence attached to a CONVERGES/DIVERGES verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Certificate<R> {
    /// `term(n) <= C n^{-s}` on the window, with nonincreasing log-margin.
    Comparison { s: R, c: R, n_start: u64, window: u64 },
    /// `term(n+1) <= ratio * term(n)` on the window, same margin discipline.
    Geometric { ratio: R, n_start: u64, window: u64 },
    /// `term(n) >= c / n` on the window with nondecreasing log-margin;
    /// certifies divergence.
    HarmonicLower { c: R, n_start: u64, window: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesStatus {
    Converges,
    Diverges,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SeriesVerdict<R> {
    pub status: SeriesStatus,
    pub certificate: Option<Certificate<R>>,
    /// Sum over the checked range (convergent verdicts only).
    pub partial_sum: Option<R>,
    /// Integral-test bound on the remaining tail (convergent verdicts only).
    pub tail_bound: Option<R>,
}

impl<R> SeriesVerdict<R> {
    fn unknown() -> Self {
        SeriesVerdict {
            status: SeriesStatus::Unknown,
            certificate: None,
            partial_sum: None,
            tail_bound: None,
        }
    }
}

/// Margin discipline shared by all certificate kinds: the sequence of
/// log-margins must move in one direction (within tolerance). Zero terms
/// yield `-inf` margins; a finite margin after `-inf` violates monotone
/// nonincreasing order.
fn margins_monotone<R: Real>(margins: &[R], nonincreasing: bool) -> bool {
    let tol = R::c(1e-9);
    let mut prev = if nonincreasing {
        R::infinity()
    } else {
        R::neg_infinity()
    };
    for &m in margins {
        let ok = if nonincreasing {
            m <= prev + tol || (m == R::neg_infinity() && prev == R::neg_infinity())
        } else {
            m >= prev - tol || (m == R::infinity() && prev == R::infinity())
        };
        if !ok {
            return false;
        }
        prev = m;
    }
    true
}

fn comparison_holds<R: Real, T: Terms<R>>(
    t: &T,
    s: R,
    c: R,
    n_start: u64,
    window: u64,
    require_positive: bool,
) -> Result<bool> {
    let tol = R::c(1e-12);
    let mut margins = Vec::with_capacity(window as usize + 1);
    let mut any_positive = false;
    for n in n_start..=(n_start + window) {
        let v = t.term(n)?;
        if v < R::zero() {
            return Ok(false);
        }
        any_positive |= v > R::zero();
        let bound = c * R::from_index(n).powf(-s);
        // relative tolerance: an absolute slack would blanket-approve any
        // bound once the terms drop below it
        if v > bound * (R::one() + tol) {
            return Ok(false);
        }
        // subnormal terms have no usable relative precision; their margins
        // carry no signal, so they collapse to -inf like exact zeros
        let m = if v <= R::c(1e-300) {
            R::neg_infinity()
        } else {
            v.ln() - bound.ln()
        };
        margins.push(m);
    }
    // an all-zero window is indistinguishable from float underflow and
    // certifies nothing on its own; the continuation of an already-verified
    // window (require_positive = false) may legitimately be all zeros
    if require_positive && !any_positive {
        return Ok(false);
    }
    Ok(margins_monotone(&margins, true))
}

fn geometric_holds<R: Real, T: Terms<R>>(
    t: &T,
    ratio: R,
    n_start: u64,
    window: u64,
    require_positive: bool,
) -> Result<bool> {
    let tol = R::c(1e-12);
    let mut margins = Vec::with_capacity(window as usize);
    let mut prev = t.term(n_start)?;
    if prev < R::zero() {
        return Ok(false);
    }
    let mut any_positive = prev > R::zero();
    for n in (n_start + 1)..=(n_start + window) {
        let v = t.term(n)?;
        if v < R::zero() {
            return Ok(false);
        }
        any_positive |= v > R::zero();
        let bound = ratio * prev;
        // relative tolerance, for the same reason as in comparison_holds
        if v > bound * (R::one() + tol) {
            return Ok(false);
        }
        // same subnormal margin convention as comparison_holds
        let m = if v <= R::c(1e-300) || bound <= R::c(1e-300) {
            R::neg_infinity()
        } else {
            v.ln() - bound.ln()
        };
        margins.push(m);
        prev = v;
    }
    // reject vacuous all-zero windows (possible underflow artifacts)
    if require_positive && !any_positive {
        return Ok(false);
    }
    Ok(margins_monotone(&margins, true))
}

fn harmonic_lower_holds<R: Real, T: Terms<R>>(
    t: &T,
    c: R,
    n_start: u64,
    window: u64,
) -> Result<bool> {
    let tol = R::c(1e-12);
    let mut margins = Vec::with_capacity(window as usize + 1);
    for n in n_start..=(n_start + window) {
        let v = t.term(n)?;
        let bound = c / R::from_index(n);
        if v < bound * (R::one() - tol) {
            return Ok(false);
        }
        margins.push(v.ln() - bound.ln());
    }
    Ok(margins_monotone(&margins, false))
}

const START_GRID: [u64; 26] = [
    1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 30, 50, 100, 200, 500,
    1_000,
];

/// Searches the fixed certificate grid and returns a tri-state verdict.
/// Geometric-ratio certificates are tried first, then power comparison,
/// then the harmonic divergence bound.
pub fn certify<R: Real, T: Terms<R>>(t: &T, n0: u64) -> SeriesVerdict<R> {
    let window = SERIES_WINDOW;

    // Terms must be finite and nonnegative on the verification window.
    for n in n0..(n0 + window) {
        match t.term(n) {
            Ok(v) if v >= R::zero() => {}
            _ => return SeriesVerdict::unknown(),
        }
    }

    for ratio_f in [0.5, 0.75, 0.9, 0.99] {
        let ratio = R::c(ratio_f);
        for &n_raw in &START_GRID {
            let n_start = n_raw.max(n0);
            if let Ok(true) = geometric_holds(t, ratio, n_start, window, true) {
                let cert = Certificate::Geometric {
                    ratio,
                    n_start,
                    window,
                };
                let end = n_start + window;
                let head = partial_sum(t, n0, end).unwrap_or(R::zero());
                let last = t.term(end).unwrap_or(R::zero());
                let tail = last * ratio / (R::one() - ratio);
                return SeriesVerdict {
                    status: SeriesStatus::Converges,
                    certificate: Some(cert),
                    partial_sum: Some(head),
                    tail_bound: Some(tail),
                };
            }
        }
    }

    for s_f in [2.0, 3.0, 1.5] {
        for c_f in [1.0, 10.0] {
            let s = R::c(s_f);
            let c = R::c(c_f);
            for &n_raw in &START_GRID {
                let n_start = n_raw.max(n0);
                if let Ok(true) = comparison_holds(t, s, c, n_start, window, true) {
                    let cert = Certificate::Comparison {
                        s,
                        c,
                        n_start,
                        window,
                    };
                    let end = n_start + window;
                    let head = partial_sum(t, n0, end).unwrap_or(R::zero());
                    // integral test past the checked window: the remaining
                    // terms start at end+1, so the integral from `end` bounds
                    // them from above.
                    let n_prime = R::from_index(end);
                    let tail = c * n_prime.powf(R::one() - s) / (s - R::one());
                    return SeriesVerdict {
                        status: SeriesStatus::Converges,
                        certificate: Some(cert),
                        partial_sum: Some(head),
                        tail_bound: Some(tail),
                    };
                }
            }
        }
    }

    for c_f in [1.0, 0.5, 0.1] {
        let c = R::c(c_f);
        for &n_raw in &START_GRID {
            let n_start = n_raw.max(n0);
            if let Ok(true) = harmonic_lower_holds(t, c, n_start, window) {
                return SeriesVerdict {
                    status: SeriesStatus::Diverges,
                    certificate: Some(Certificate::HarmonicLower {
                        c,
                        n_start,
                        window,
                    }),
                    partial_sum: None,
                    tail_bound: None,
                };
            }
        }
    }

    SeriesVerdict::unknown()
}

/// Independent re-validation of a certificate: the original window plus
/// fresh indices beyond it.
pub fn recheck<R: Real, T: Terms<R>>(t: &T, cert: &Certificate<R>) -> Result<bool> {
    match *cert {
        Certificate::Comparison { s, c, n_start, window } => {
            Ok(comparison_holds(t, s, c, n_start, window, true)?
                && comparison_holds(t, s, c, n_start + window, RECHECK_INDICES, false)?)
        }
        Certificate::Geometric { ratio, n_start, window } => {
            Ok(geometric_holds(t, ratio, n_start, window, true)?
                && geometric_holds(t, ratio, n_start + window, RECHECK_INDICES, false)?)
        }
        Certificate::HarmonicLower { c, n_start, window } => {
            Ok(harmonic_lower_holds(t, c, n_start, window)?
                && harmonic_lower_holds(t, c, n_start + window, RECHECK_INDICES)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv_square() -> SequenceExpr<f64> {
        SequenceExpr::pow(SequenceExpr::n(), SequenceExpr::constant(-2.0))
    }

    #[test]
    fn partial_sums_match_oracles() {
        let s = partial_sum(&inv_square(), 1, 10).unwrap();
        let direct: f64 = (1..=10).map(|n| 1.0 / (n as f64).powi(2)).sum();
        assert!((s - direct).abs() < 1e-14);

        let geo = |n: u64| Ok(2.0f64.powi(-(n as i32)));
        let g = partial_sum(&geo, 1, 20).unwrap();
        assert!((g - (1.0 - 2.0f64.powi(-20))).abs() < 1e-15);

        let zero = SequenceExpr::constant(0.0);
        assert_eq!(partial_sum(&zero, 1, 100).unwrap(), 0.0);
    }

    #[test]
    fn inverse_square_gets_comparison_certificate() {
        let v = certify(&inv_square(), 1);
        assert_eq!(v.status, SeriesStatus::Converges);
        match v.certificate.unwrap() {
            Certificate::Comparison { s, c, n_start, .. } => {
                assert_eq!((s, c, n_start), (2.0, 1.0, 1));
            }
            other => panic!("expected comparison, got {other:?}"),
        }
        // sum = pi^2/6; partial + tail must bracket it
        let total = v.partial_sum.unwrap();
        let tail = v.tail_bound.unwrap();
        let exact = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        assert!(total <= exact && exact <= total + tail + 1e-9);
    }

    #[test]
    fn harmonic_diverges() {
        let t = SequenceExpr::div(SequenceExpr::constant(1.0), SequenceExpr::n());
        let v = certify(&t, 1);
        assert_eq!(v.status, SeriesStatus::Diverges);
        assert!(matches!(
            v.certificate,
            Some(Certificate::HarmonicLower { .. })
        ));
    }

    #[test]
    fn geometric_terms_get_geometric_certificate() {
        let t = |n: u64| Ok(0.5f64.powi(n as i32));
        let v = certify(&t, 1);
        assert_eq!(v.status, SeriesStatus::Converges);
        assert!(matches!(v.certificate, Some(Certificate::Geometric { .. })));
        // closed form: sum = 1
        let total = v.partial_sum.unwrap() + v.tail_bound.unwrap();
        assert!((v.partial_sum.unwrap() - 1.0).abs() < 1e-9 && total >= 1.0);
    }

    #[test]
    fn worked_tail_term_converges_with_small_start() {
        // (1/n)^{(n-1)/(2 ln(n+1))}: dominated by n^{-2} once n-1 >= 4 ln(n+1)
        let t = |n: u64| {
            let nf = n as f64;
            Ok((1.0 / nf).powf((nf - 1.0) / (2.0 * (nf + 1.0).ln())))
        };
        let v = certify(&t, 1);
        assert_eq!(v.status, SeriesStatus::Converges);
        match v.certificate.unwrap() {
            Certificate::Comparison { s, n_start, .. } => {
                assert_eq!(s, 2.0);
                assert!(n_start <= 20, "n_start = {n_start}");
            }
            Certificate::Geometric { .. } => {}
            other => panic!("unexpected certificate {other:?}"),
        }
    }

    #[test]
    fn slowly_growing_terms_are_unknown() {
        // 1/(n ln^2 n) converges but has no certificate on the fixed grid of
        // pure power dominators below s = 1.5... it is dominated by n^{-1.5}
        // only transiently; the engine must not claim divergence either.
        let t = |n: u64| {
            let nf = n as f64 + 1.0;
            Ok(1.0 / (nf * nf.ln().powi(2)))
        };
        let v = certify(&t, 2);
        assert_ne!(v.status, SeriesStatus::Diverges);
    }

    #[test]
    fn certificates_recheck() {
        let v = certify(&inv_square(), 1);
        assert!(recheck(&inv_square(), &v.certificate.unwrap()).unwrap());
        let t = SequenceExpr::div(SequenceExpr::constant(1.0), SequenceExpr::n());
        let v = certify(&t, 1);
        assert!(recheck(&t, &v.certificate.unwrap()).unwrap());
    }

    #[test]
    fn zero_sequence_is_conservatively_unknown() {
        // an all-zero window cannot be told apart from underflowed positive
        // terms, so the engine declines to certify it
        let v = certify(&SequenceExpr::constant(0.0), 1);
        assert_eq!(v.status, SeriesStatus::Unknown);
    }
}
