//! Property-based invariants of the modular/norm machinery on randomly
//! generated step functions and step exponents.

use proptest::prelude::*;

use vlab_core::modular::{holder_pairing_check, luxemburg_norm, modular, PwFun};
use vlab_core::num::KahanSum;
use vlab_core::sequence::truncate_above;
use vlab_core::step::Cell;
use vlab_core::{Carrier, Error, ExponentFunction, StepFunction};

const BUDGET: usize = 100_000;

/// Builds a full-domain step function from raw (length, value) pairs by
/// normalizing the lengths onto [0,1).
fn step_from_raw(raw: &[(f64, f64)]) -> StepFunction {
    let total: f64 = raw.iter().map(|(l, _)| *l).sum();
    let mut cells = Vec::with_capacity(raw.len());
    let mut cursor = 0.0;
    for (i, &(l, v)) in raw.iter().enumerate() {
        let hi = if i + 1 == raw.len() {
            1.0
        } else {
            cursor + l / total
        };
        if hi > cursor + 1e-9 {
            cells.push(Cell {
                lo: cursor,
                hi,
                value: v,
            });
        }
        cursor = hi;
    }
    StepFunction::from_cells(cells).expect("valid partition")
}

fn exponent_from_raw(raw: &[(f64, f64)]) -> ExponentFunction {
    ExponentFunction::new(Carrier::Step(step_from_raw(raw))).expect("valid exponent")
}

prop_compose! {
    fn raw_step(max_cells: usize, lo: f64, hi: f64)
        (raw in prop::collection::vec((0.05f64..1.0, lo..hi), 1..=max_cells))
        -> Vec<(f64, f64)> { raw }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Scaling a nonzero function by its Luxemburg norm pins the modular at 1.
    #[test]
    fn norm_modular_duality(
        f_raw in raw_step(6, 0.1, 3.0),
        p_raw in raw_step(6, 1.0, 8.0),
    ) {
        let f = step_from_raw(&f_raw);
        let p = exponent_from_raw(&p_raw);
        let norm = luxemburg_norm(&PwFun::Step(f.clone()), &p, BUDGET).unwrap();
        prop_assert!(norm > 0.0);
        let scaled = f.scale(1.0 / norm);
        let (rho, _) = modular(&PwFun::Step(scaled), &p, BUDGET).unwrap();
        prop_assert!((rho - 1.0).abs() <= 1e-9, "rho = {rho}");
    }

    // The Luxemburg norm is absolutely homogeneous.
    #[test]
    fn norm_homogeneity(
        f_raw in raw_step(5, 0.1, 3.0),
        p_raw in raw_step(4, 1.0, 6.0),
        c in 0.1f64..10.0,
    ) {
        let f = step_from_raw(&f_raw);
        let p = exponent_from_raw(&p_raw);
        let n1 = luxemburg_norm(&PwFun::Step(f.scale(c)), &p, BUDGET).unwrap();
        let n2 = c * luxemburg_norm(&PwFun::Step(f), &p, BUDGET).unwrap();
        prop_assert!((n1 - n2).abs() <= 1e-8 * n2.max(1.0), "{n1} vs {n2}");
    }

    // |f| <= |g| pointwise forces rho(f) <= rho(g).
    #[test]
    fn modular_monotone_in_magnitude(
        f_raw in raw_step(5, 0.1, 3.0),
        p_raw in raw_step(4, 1.0, 6.0),
        blow in 1.0f64..4.0,
    ) {
        let f = step_from_raw(&f_raw);
        let g = f.scale(blow);
        let p = exponent_from_raw(&p_raw);
        let (rf, _) = modular(&PwFun::Step(f), &p, BUDGET).unwrap();
        let (rg, _) = modular(&PwFun::Step(g), &p, BUDGET).unwrap();
        prop_assert!(rf <= rg + 1e-12);
    }

    // The decreasing rearrangement is equimeasurable: every power integral
    // is preserved.
    #[test]
    fn rearrangement_preserves_power_integrals(f_raw in raw_step(8, 0.0, 5.0)) {
        let f = step_from_raw(&f_raw);
        let star = f.decreasing_rearrangement().unwrap();
        for c in [1.0, 2.0, 3.0] {
            let int = |g: &StepFunction| {
                let mut acc = KahanSum::new();
                for cell in g.cells() {
                    acc.add(cell.value.abs().powf(c) * (cell.hi - cell.lo));
                }
                acc.value()
            };
            let (a, b) = (int(&f), int(&star));
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0), "c = {c}: {a} vs {b}");
        }
    }

    // Truncation reports a sound modular bound on the discarded part.
    #[test]
    fn truncation_bound_is_sound(
        f_raw in raw_step(6, 0.1, 4.0),
        p_raw in raw_step(4, 1.0, 6.0),
        r in 0.2f64..3.0,
    ) {
        let f = step_from_raw(&f_raw);
        let p = exponent_from_raw(&p_raw);
        let (g, bound) = truncate_above(&f, r, &p).unwrap();
        let diff = f.add(&g.scale(-1.0)).unwrap();
        let (rho, _) = modular(&PwFun::Step(diff), &p, BUDGET).unwrap();
        prop_assert!(rho <= bound + 1e-9, "rho = {rho}, bound = {bound}");
    }

    // Classical Holder pairing bound against the conjugate exponent.
    #[test]
    fn holder_pairing_bound_holds(
        f_raw in raw_step(5, 0.1, 3.0),
        g_raw in raw_step(5, 0.1, 3.0),
        p_raw in raw_step(4, 1.2, 6.0),
    ) {
        let f = step_from_raw(&f_raw);
        let g = step_from_raw(&g_raw);
        let p = exponent_from_raw(&p_raw);
        match holder_pairing_check(&f, &g, &p, BUDGET) {
            Ok((pairing, bound, ok)) => {
                prop_assert!(ok, "pairing {pairing} exceeds bound {bound}");
            }
            Err(Error::Skipped(_)) => {}
            Err(e) => return Err(TestCaseError::fail(format!("unexpected error: {e}"))),
        }
    }
}
