mod common;

use lienard::roots::{count_roots, isolate_poly_roots, isolate_roots, refine, sturm_sequence};
use lienard::{Polynomial, ScalarFn};
use proptest::prelude::*;

use common::{horner, poly_mul, sign_scan};

fn from_roots(roots: &[f64], lead: f64) -> Vec<f64> {
    roots.iter().fold(vec![lead], |acc, &r| poly_mul(&acc, &[-r, 1.0]))
}

/// Distinct roots on a 1/8 lattice so the scan oracle resolves them.
fn lattice_roots() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(-24i32..=24, 1..6)
        .prop_map(|s| s.into_iter().map(|k| k as f64 / 8.0 + 1.0 / 64.0).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn isolation_agrees_with_sign_scan(roots in lattice_roots(), lead in prop_oneof![-3.0..-0.5f64, 0.5..3.0f64]) {
        let c = from_roots(&roots, lead);
        let found = isolate_poly_roots(&Polynomial::new(c.clone()), Some((-4.0, 4.0)), 1e-10).unwrap();
        let scanned = sign_scan(|x| horner(&c, x), -4.0, 4.0, 1e-4);
        prop_assert_eq!(found.len(), scanned.len());
        for (z, s) in found.iter().zip(&scanned) {
            prop_assert!(z.width() <= 1e-10);
            prop_assert!((z.mid() - s).abs() <= 1e-4);
            prop_assert!(z.transversal);
        }
        for (z, r) in found.iter().zip(&roots) {
            prop_assert!((z.mid() - r).abs() <= 1e-9, "{} vs {}", z.mid(), r);
        }
    }

    #[test]
    fn sturm_count_matches_known_roots(roots in lattice_roots(), a in -4.0..0.0f64, len in 0.1..4.0f64) {
        let p = Polynomial::new(from_roots(&roots, 1.0));
        let s = sturm_sequence(&p).unwrap();
        let b = a + len;
        let expected = roots.iter().filter(|&&r| a < r && r <= b).count();
        prop_assert_eq!(count_roots(&s, a, b).unwrap(), expected);
    }
}

#[test]
fn double_roots_are_counted_once_and_flagged() {
    // (x - 1)^2 (x + 0.5)
    let p = Polynomial::new(from_roots(&[1.0, 1.0, -0.5], 1.0));
    let found = isolate_poly_roots(&p, Some((-2.0, 2.0)), 1e-9).unwrap();
    assert_eq!(found.len(), 2);
    assert!(found[0].transversal);
    assert!(!found[1].transversal);
    assert!(found[1].contains(1.0));
    let s = sturm_sequence(&p).unwrap();
    assert_eq!(count_roots(&s, -2.0, 2.0).unwrap(), 2);
}

#[test]
fn piecewise_function_splits_at_origin() {
    // (2x)^2 - 1 on the left, x^2 - 1 on the right
    let base = ScalarFn::poly(vec![-1.0, 0.0, 1.0]);
    let f = ScalarFn::neg_argscale(base, 2.0).unwrap();
    let found = isolate_roots(&f, Some((-3.0, 3.0)), 1e-12).unwrap();
    let mids: Vec<f64> = found.iter().map(|z| z.mid()).collect();
    assert_eq!(mids.len(), 2);
    assert!((mids[0] + 0.5).abs() < 1e-11);
    assert!((mids[1] - 1.0).abs() < 1e-11);
    let scanned = sign_scan(|x| f.eval(x), -3.0, 3.0, 1e-4);
    assert_eq!(scanned.len(), 2);
}

#[test]
fn refine_keeps_the_root() {
    let f = ScalarFn::poly(vec![-2.0, 0.0, 1.0]);
    let coarse = isolate_roots(&f, Some((0.0, 3.0)), 0.5).unwrap();
    assert_eq!(coarse.len(), 1);
    let fine = refine(&f, &coarse[0], 1e-13).unwrap();
    assert!(fine.width() <= 1e-13);
    assert!(fine.contains(2.0f64.sqrt()) || (fine.mid() - 2.0f64.sqrt()).abs() < 1e-13);
}
