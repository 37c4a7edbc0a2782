mod common;

use lienard::hypo::{analyze, CrossingDirection, Tristate, Verdict};
use lienard::{LienardSystem, ScalarFn};
use rand::Rng;

use common::{adaptive_simpson, asymmetric_corpus, horner, poly_mul, sign_scan};

#[test]
fn odd_systems_satisfy_d_and_get_the_unique_cycle_verdict() {
    let mut rng = common::rng(7);
    for i in 0..50 {
        let a: f64 = rng.gen_range(0.3..2.0);
        let c: f64 = rng.gen_range(0.2..2.0);
        let d: f64 = if i % 2 == 0 { rng.gen_range(0.0..0.5) } else { 0.0 };
        let k: f64 = rng.gen_range(0.5..3.0);
        let b: f64 = rng.gen_range(0.0..1.0);
        let big_f = poly_mul(&[0.0, -a * a, 0.0, 1.0], &[c, 0.0, d]);
        let sys = LienardSystem::with_primitive(ScalarFn::poly(big_f.clone()), ScalarFn::poly(vec![0.0, k, 0.0, b]))
            .unwrap();
        let report = analyze(&sys).unwrap();
        assert_eq!(report.c.status, Tristate::Holds, "system {i}: {}", report.c.detail);
        let dc = report.d.unwrap();
        assert_eq!(dc.status, Tristate::Holds, "system {i}: gap {:e}", dc.gap);
        assert_eq!(report.verdict, Verdict::UniqueStableCycle, "system {i}");
        assert_eq!(report.prop1_direction, CrossingDirection::MustCrossBoth);

        let (x2, x1) = report.roots().unwrap();
        let scanned = sign_scan(|x| horner(&big_f, x), -3.0, 3.0, 1e-4);
        assert_eq!(scanned.len(), 3, "system {i}");
        assert!((x2 - scanned[0]).abs() < 1e-4 && (x1 - scanned[2]).abs() < 1e-4);
        assert!((x1 - a).abs() < 1e-10 && (x2 + a).abs() < 1e-10);
    }
}

#[test]
fn potential_gap_matches_quadrature_on_the_corpus() {
    for entry in asymmetric_corpus(10, 11) {
        let report = analyze(&entry.system).unwrap();
        let dc = report.d.unwrap();
        let (x2, x1) = report.roots().unwrap();
        assert!((x1 - entry.x1).abs() < 1e-9 && (x2 - entry.x2).abs() < 1e-9);
        let quad = adaptive_simpson(|x| horner(&entry.g, x), x2, x1, 1e-13);
        assert!((dc.gap - quad).abs() <= 1e-10 * (1.0 + quad.abs()), "{} vs {quad}", dc.gap);
        let want = if dc.gap > 0.0 {
            CrossingDirection::MustCrossX2
        } else {
            CrossingDirection::MustCrossX1
        };
        assert_eq!(report.prop1_direction, want);
        assert_eq!(report.verdict, Verdict::AtMostOneCrossingCycle);
    }
}

#[test]
fn hypothesis_failures_are_reported() {
    // positive damping everywhere: (B) fails
    let sys = LienardSystem::with_damping(ScalarFn::poly(vec![1.0, 0.0, 1.0]), ScalarFn::poly(vec![0.0, 1.0])).unwrap();
    let report = analyze(&sys).unwrap();
    assert_eq!(report.b, Tristate::Fails);
    assert_eq!(report.verdict, Verdict::NoVerdict);

    // F = -x - x^5 / 100 outgrows G = x^2 / 2, so G + F is bounded above
    let sys = LienardSystem::with_primitive(ScalarFn::poly(vec![0.0, -1.0, 0.0, 0.0, 0.0, -0.01]), ScalarFn::poly(vec![0.0, 1.0]))
        .unwrap();
    let report = analyze(&sys).unwrap();
    assert_eq!(report.e, Tristate::Fails);
}

#[test]
fn entries_expose_every_hypothesis() {
    let sys = LienardSystem::with_damping(ScalarFn::poly(vec![-1.0, 0.0, 1.0]), ScalarFn::poly(vec![0.0, 1.0])).unwrap();
    let entries = analyze(&sys).unwrap().entries();
    for key in ["B", "C", "D", "E", "Dprime", "Ddoubleprime"] {
        assert!(entries.contains_key(key), "missing {key}");
    }
    let c = &entries["C"];
    assert!((c.witnesses["x1"] - 3.0f64.sqrt()).abs() < 1e-12);
    assert!((c.witnesses["x2"] + 3.0f64.sqrt()).abs() < 1e-12);
}
