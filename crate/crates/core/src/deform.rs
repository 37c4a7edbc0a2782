//! Deformations that make the uniqueness hypotheses hold.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::{LienardSystem, Polynomial, ScalarFn};
use crate::hypo::{self, analyze_with, AnalyzeOptions, HypothesisReport};
use crate::roots::isolate_poly_roots;

/// Which construction produced a [`DeformOutcome`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeformKind {
    #[serde(rename = "g_lambda")]
    GLambda,
    #[serde(rename = "F_scale")]
    FScale,
    #[serde(rename = "poly")]
    Poly,
    #[serde(rename = "theorem5")]
    Theorem5,
}

/// A deformed system together with its re-analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformOutcome {
    pub kind: DeformKind,
    pub system: LienardSystem,
    /// The deformation parameter (`lambda*`, or the chosen `lambda`).
    pub parameter: f64,
    /// Secondary quantities, such as `mu` or the zero `x2*`.
    pub details: BTreeMap<String, f64>,
    pub certificate: HypothesisReport,
}

impl DeformOutcome {
    fn new(
        kind: DeformKind,
        system: LienardSystem,
        parameter: f64,
        details: BTreeMap<String, f64>,
        options: AnalyzeOptions,
    ) -> Result<Self> {
        let certificate = analyze_with(&system, options)?;
        Ok(DeformOutcome {
            kind,
            system,
            parameter,
            details,
            certificate,
        })
    }
}

/// Analysis with (B), (C) and (E) required; returns the report.
fn require_bce(sys: &LienardSystem, options: AnalyzeOptions) -> Result<HypothesisReport> {
    let report = analyze_with(sys, options)?;
    if !report.b.holds() {
        return Err(Error::precondition("B", "x g(x) > 0 and f(0) < 0 are required"));
    }
    if !report.c.status.holds() {
        return Err(Error::precondition("C", report.c.detail.clone()));
    }
    if !report.e.holds() {
        return Err(Error::precondition("E", "G + F and G - F must be unbounded above"));
    }
    Ok(report)
}

/// Replaces `g` by `g` on `x >= 0` and `lambda* g` on `x < 0`, with
/// `lambda* = G(x1) / G(x2)`.
pub fn deform_g_lambda(sys: &LienardSystem, options: AnalyzeOptions) -> Result<DeformOutcome> {
    let report = require_bce(sys, options)?;
    let d = report.d.expect("D is evaluated whenever C holds");
    if !(d.g_x1 > 0.0 && d.g_x2 > 0.0) {
        return Err(Error::Degenerate(format!(
            "G must be positive at both zeros, got G(x1) = {}, G(x2) = {}",
            d.g_x1, d.g_x2
        )));
    }
    let lambda = d.g_x1 / d.g_x2;
    let mut details = BTreeMap::new();
    details.insert("G_x1".to_string(), d.g_x1);
    details.insert("G_x2".to_string(), d.g_x2);
    let system = if (lambda - 1.0).abs() <= options.d_tol {
        sys.clone()
    } else {
        sys.with_restoring(ScalarFn::neg_factor(sys.restoring().clone(), lambda)?)?
    };
    DeformOutcome::new(DeformKind::GLambda, system, lambda, details, options)
}

/// The unique `x in (x2, 0)` with `G(x) = level`, by bisection.
fn solve_potential(potential: &ScalarFn, x2: f64, level: f64) -> f64 {
    let (mut a, mut b) = (x2, 0.0f64);
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= 1e-15 * a.abs() {
            break;
        }
        // G decreases on (x2, 0).
        if potential.eval(m) > level {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Replaces `F` on `x < 0` by `F(lambda* x)`, moving its negative zero to
/// the point `x2*` where `G(x2*) = G(x1)`.
pub fn deform_f_scale(sys: &LienardSystem, options: AnalyzeOptions) -> Result<DeformOutcome> {
    let report = require_bce(sys, options)?;
    let d = report.d.expect("D is evaluated whenever C holds");
    if d.gap >= -d.threshold() {
        return Err(Error::precondition(
            "G(x1) < G(x2)",
            format!(
                "gap G(x1) - G(x2) = {:e} is not negative; use the g_lambda deformation",
                d.gap
            ),
        ));
    }
    let x2 = d.x2.mid();
    let x2_star = solve_potential(sys.potential(), x2, d.g_x1);
    let lambda = x2 / x2_star;
    let big_f = ScalarFn::neg_argscale(sys.damping_primitive().clone(), lambda)?;
    let system = LienardSystem::with_primitive(big_f, sys.restoring().clone())?;
    let mut details = BTreeMap::new();
    details.insert("x2".to_string(), x2);
    details.insert("x2_star".to_string(), x2_star);
    details.insert("x_bar".to_string(), x2 / lambda);
    DeformOutcome::new(DeformKind::FScale, system, lambda, details, options)
}

/// Convexity thresholds of an odd-degree polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Smallest `x >= 0` beyond which `P' > 0` and `P'' > 0`.
    pub xi_plus: f64,
    /// Largest `x <= 0` below which `P' > 0` and `P'' > 0`; absent when no
    /// such point exists.
    pub xi_minus_literal: Option<f64>,
    /// Largest `x <= 0` below which `P' > 0` and `P'' < 0`, the mirror image
    /// of the condition defining `xi_plus`.
    pub xi_minus: f64,
}

fn check_odd_positive(p: &Polynomial) -> Result<usize> {
    let deg = p.degree().unwrap_or(0);
    if deg < 3 || deg.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "polynomial must have odd degree >= 3, got degree {deg}"
        )));
    }
    if p.leading_coeff() <= 0.0 {
        return Err(Error::InvalidArgument(
            "leading coefficient must be positive".into(),
        ));
    }
    Ok(deg)
}

/// Largest zero of `q` in `(0, +inf)` (upper end of its interval), or 0.
fn largest_positive_root(q: &Polynomial) -> Result<f64> {
    if q.is_zero() || q.degree() == Some(0) {
        return Ok(0.0);
    }
    let r = 1.0 + q.cauchy_bound().max(1.0);
    Ok(isolate_poly_roots(q, Some((0.0, r)), 1e-13)?
        .iter()
        .filter(|z| !z.contains(0.0))
        .map(|z| z.hi)
        .fold(0.0, f64::max))
}

/// Smallest zero of `q` in `(-inf, 0)` (lower end of its interval), or 0.
fn smallest_negative_root(q: &Polynomial) -> Result<f64> {
    Ok(-largest_positive_root(&q.compose_scale(-1.0))?)
}

pub fn poly_thresholds(p: &Polynomial) -> Result<Thresholds> {
    check_odd_positive(p)?;
    let d1 = p.derivative();
    let d2 = d1.derivative();
    let xi_plus = largest_positive_root(&d1)?.max(largest_positive_root(&d2)?);
    let xi_minus = smallest_negative_root(&d1)?.min(smallest_negative_root(&d2)?);
    let xi_minus_literal = (d1.sign_at_neg_inf() > 0 && d2.sign_at_neg_inf() > 0).then_some(xi_minus);
    Ok(Thresholds {
        xi_plus,
        xi_minus_literal,
        xi_minus,
    })
}

/// Slopes bounding `P(x) / x` on either side of the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaBar {
    pub thresholds: Thresholds,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub lambda_bar: f64,
    /// `(t, P'(t))` for each line through the origin tangent to `P` at `t`.
    pub tangents: Vec<(f64, f64)>,
}

/// Bound on `P(x) / x` over `(a, b)` (not containing 0): tangent slopes at
/// interior points, plus the two endpoint values.
fn slope_bound(p: &Polynomial, a: f64, b: f64, tangents: &mut Vec<(f64, f64)>) -> Result<f64> {
    let d1 = p.derivative();
    let ratio = |x: f64| if x == 0.0 { p.coeff(1) } else { p.eval(x) / x };
    let mut bound = ratio(a).max(ratio(b));
    if b - a > 0.0 {
        // P(t) - t P'(t) = 0 marks a tangent through the origin.
        let q = p - &(&Polynomial::x() * &d1);
        if !q.is_zero() {
            for z in isolate_poly_roots(&q, Some((a, b)), 1e-13)? {
                let t = z.mid();
                if t > a && t < b && t != 0.0 {
                    let mu = d1.eval(t);
                    tangents.push((t, mu));
                    bound = bound.max(mu.abs());
                }
            }
        }
    }
    Ok(bound.max(0.0))
}

pub fn poly_lambda_bar(p: &Polynomial) -> Result<LambdaBar> {
    let thresholds = poly_thresholds(p)?;
    if p.coeff(0) != 0.0 {
        return Err(Error::InvalidArgument("polynomial must vanish at the origin".into()));
    }
    let mut tangents = Vec::new();
    let lambda_plus = slope_bound(p, 0.0, thresholds.xi_plus, &mut tangents)?;
    let lambda_minus = slope_bound(p, thresholds.xi_minus, 0.0, &mut tangents)?;
    Ok(LambdaBar {
        thresholds,
        lambda_plus,
        lambda_minus,
        lambda_bar: lambda_plus.max(lambda_minus),
        tangents,
    })
}

/// `g` on `x >= 0`, `mu g` on `x < 0`, with `mu = G(x1) / G(x2)` so that
/// the integral of the result over `[x2, x1]` vanishes.
pub fn build_g_mu(g: &ScalarFn, x2: f64, x1: f64) -> Result<(ScalarFn, f64)> {
    if !(x2 < 0.0 && x1 > 0.0) {
        return Err(Error::InvalidArgument(format!("need x2 < 0 < x1, got {x2}, {x1}")));
    }
    let big_g = g.primitive()?;
    let (g1, g2) = (big_g.eval(x1), big_g.eval(x2));
    if !(g1 > 0.0 && g2 > 0.0) {
        return Err(Error::Degenerate(format!(
            "G must be positive at both points, got G(x1) = {g1}, G(x2) = {g2}"
        )));
    }
    let mu = g1 / g2;
    Ok((ScalarFn::neg_factor(g.clone(), mu)?, mu))
}

const POLY_RETRIES: usize = 8;
const RETRY_FACTOR: f64 = 1.0 + 1e-3;

/// `F = P - lambda x` with `lambda` just above [`poly_lambda_bar`], and `g`
/// rebalanced by [`build_g_mu`].
pub fn poly_deform(p: &Polynomial, g: &ScalarFn, margin: f64, options: AnalyzeOptions) -> Result<DeformOutcome> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::InvalidArgument(format!("margin must be positive, got {margin}")));
    }
    if !hypo::restoring_sign_ok(g)? {
        return Err(Error::precondition("B", "x g(x) > 0 is required for g"));
    }
    let bar = poly_lambda_bar(p)?;
    let mut lambda = bar.lambda_bar * (1.0 + margin) + margin;
    let mut last = String::new();
    for attempt in 0..=POLY_RETRIES {
        let big_f = ScalarFn::sub_linear(ScalarFn::Poly(p.clone()), lambda);
        let trial = LienardSystem::with_primitive(big_f.clone(), g.clone())?;
        let c = hypo::check_c(&trial, false, options.root_width)?;
        if let Some((x2, x1)) = c.roots() {
            let (g_mu, mu) = build_g_mu(g, x2.mid(), x1.mid())?;
            let system = LienardSystem::with_primitive(big_f, g_mu)?;
            let mut details = BTreeMap::new();
            details.insert("lambda_bar".to_string(), bar.lambda_bar);
            details.insert("lambda_plus".to_string(), bar.lambda_plus);
            details.insert("lambda_minus".to_string(), bar.lambda_minus);
            details.insert("xi_plus".to_string(), bar.thresholds.xi_plus);
            details.insert("xi_minus".to_string(), bar.thresholds.xi_minus);
            details.insert("mu".to_string(), mu);
            details.insert("retries".to_string(), attempt as f64);
            return DeformOutcome::new(DeformKind::Poly, system, lambda, details, options);
        }
        last = c.detail;
        lambda *= RETRY_FACTOR;
    }
    Err(Error::RetriesExhausted(format!(
        "(C) still fails after {POLY_RETRIES} increments of lambda (last lambda {lambda:e}): {last}"
    )))
}

/// Doubling cap for [`theorem5_pipeline`].
pub const THEOREM5_MAX_DOUBLINGS: usize = 60;

/// `f - lambda` with `lambda` from a doubling search on (C), and `g`
/// rebalanced by [`build_g_mu`].
///
/// The working parameter is the first doubling value at which (C) holds;
/// a bisection below it reports a near-minimal value as `lambda_hat`.
pub fn theorem5_pipeline(f: &ScalarFn, g: &ScalarFn, options: AnalyzeOptions) -> Result<DeformOutcome> {
    if !hypo::restoring_sign_ok(g)? {
        return Err(Error::precondition("B", "x g(x) > 0 is required for g"));
    }
    let passes = |lambda: f64| -> Result<Option<(f64, f64)>> {
        let sys = LienardSystem::with_damping(ScalarFn::sub_const(f.clone(), lambda), g.clone())?;
        let c = hypo::check_c(&sys, false, options.root_width)?;
        Ok(c.roots().map(|(a, b)| (a.mid(), b.mid())))
    };
    let lambda0 = f.eval(0.0).max(0.0) + 1.0;
    let mut below = f.eval(0.0).max(0.0);
    let mut lambda = lambda0;
    let mut found = None;
    for _ in 0..THEOREM5_MAX_DOUBLINGS {
        if let Some(r) = passes(lambda)? {
            found = Some(r);
            break;
        }
        below = lambda;
        lambda *= 2.0;
    }
    let Some((x2, x1)) = found else {
        return Err(Error::precondition(
            "C",
            format!("no lambda up to {lambda:e} makes F - lambda x satisfy (C)"),
        ));
    };
    let (mut lo, mut hi) = (below, lambda);
    for _ in 0..40 {
        let m = 0.5 * (lo + hi);
        if passes(m)?.is_some() {
            hi = m;
        } else {
            lo = m;
        }
        if hi - lo <= 1e-6 * hi {
            break;
        }
    }
    let (g_mu, mu) = build_g_mu(g, x2, x1)?;
    let system = LienardSystem::with_damping(ScalarFn::sub_const(f.clone(), lambda), g_mu)?;
    let mut details = BTreeMap::new();
    details.insert("lambda_hat".to_string(), hi);
    details.insert("mu".to_string(), mu);
    DeformOutcome::new(DeformKind::Theorem5, system, lambda, details, options)
}

/// Result of [`center_perturbation_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationVerdict {
    pub pass: bool,
    /// Name of the first condition that failed.
    pub failing: Option<String>,
    pub checks: Vec<(String, bool)>,
}

/// Checks that adding the friction `F` to the center `x'' + g(x) = 0`
/// (with `G(x2) = G(x1)`) meets the uniqueness conditions.
pub fn center_perturbation_check(g: &ScalarFn, big_f: &ScalarFn, x2: f64, x1: f64, tol: f64) -> Result<PerturbationVerdict> {
    let big_g = g.primitive()?;
    let gp = big_g.pieces();
    let (g1, g2) = (big_g.eval(x1), big_g.eval(x2));
    let mut checks: Vec<(String, bool)> = Vec::new();
    checks.push((
        "equal potential at x2 and x1".into(),
        (g1 - g2).abs() <= tol * (1.0 + g1.abs() + g2.abs()),
    ));
    checks.push((
        "G unbounded on both sides".into(),
        gp.right.degree().unwrap_or(0) >= 1
            && gp.right.sign_at_pos_inf() > 0
            && gp.left.degree().unwrap_or(0) >= 1
            && gp.left.sign_at_neg_inf() > 0,
    ));
    let fp = big_f.pieces();
    let scale = 1.0 + fp.left.max_abs_coeff().max(fp.right.max_abs_coeff());
    checks.push((
        "root condition F(x1) = F(x2) = 0".into(),
        big_f.eval(x1).abs() <= tol * scale && big_f.eval(x2).abs() <= tol * scale,
    ));
    let monotone = hypo::exterior_monotone(&big_f.derivative(), x2, x1)?;
    checks.push(("monotonicity of F outside [x2, x1]".into(), monotone.is_none()));
    let (left, right) = hypo::friction_sign_near_origin(big_f);
    checks.push(("x F(x) < 0 near the origin".into(), left > 0 && right < 0));
    let failing = checks.iter().find(|(_, ok)| !ok).map(|(n, _)| n.clone());
    Ok(PerturbationVerdict {
        pass: failing.is_none(),
        failing,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypo::Verdict;

    fn opts() -> AnalyzeOptions {
        AnalyzeOptions::default()
    }

    fn x() -> ScalarFn {
        ScalarFn::poly(vec![0.0, 1.0])
    }

    /// `F = x (x - 1)(x + 2) / 3`, zeros -2, 0, 1.
    fn asymmetric() -> LienardSystem {
        let p = Polynomial::new(vec![0.0, -2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        LienardSystem::with_primitive(ScalarFn::Poly(p), x()).unwrap()
    }

    fn van_der_pol() -> LienardSystem {
        LienardSystem::with_damping(ScalarFn::poly(vec![-1.0, 0.0, 1.0]), x()).unwrap()
    }

    #[test]
    fn g_lambda_quarter() {
        let out = deform_g_lambda(&asymmetric(), opts()).unwrap();
        assert!((out.parameter - 0.25).abs() < 1e-12);
        assert_eq!(out.certificate.verdict, Verdict::UniqueStableCycle);
        let big_g = out.system.potential();
        assert!((big_g.eval(-2.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn g_lambda_identity_for_symmetric() {
        let out = deform_g_lambda(&van_der_pol(), opts()).unwrap();
        assert!((out.parameter - 1.0).abs() < 1e-12);
        assert_eq!(&out.system, &van_der_pol());
    }

    #[test]
    fn f_scale_example() {
        let out = deform_f_scale(&asymmetric(), opts()).unwrap();
        assert!((out.parameter - 2.0).abs() < 1e-12);
        assert!((out.details["x2_star"] + 1.0).abs() < 1e-12);
        assert_eq!(out.certificate.verdict, Verdict::UniqueStableCycle);
        let (x2, _) = out.certificate.roots().unwrap();
        assert!((x2 + 1.0).abs() < 1e-10);
    }

    #[test]
    fn f_scale_needs_negative_gap() {
        let err = deform_f_scale(&van_der_pol(), opts()).unwrap_err();
        assert!(matches!(err, Error::Precondition { .. }));
    }

    #[test]
    fn thresholds() {
        let t = poly_thresholds(&Polynomial::monomial(1.0, 3)).unwrap();
        assert_eq!(t.xi_plus, 0.0);
        assert_eq!(t.xi_minus_literal, None);
        let t = poly_thresholds(&Polynomial::new(vec![0.0, -3.0, 0.0, 1.0])).unwrap();
        assert!((t.xi_plus - 1.0).abs() < 1e-12);
        assert!((t.xi_minus + 1.0).abs() < 1e-12);
        assert!(poly_thresholds(&Polynomial::new(vec![0.0, 0.0, 1.0])).is_err());
        assert!(poly_thresholds(&Polynomial::new(vec![0.0, 0.0, 0.0, -1.0])).is_err());
    }

    #[test]
    fn lambda_bar_of_symmetric_cubic_vanishes() {
        let bar = poly_lambda_bar(&Polynomial::new(vec![0.0, -3.0, 0.0, 1.0])).unwrap();
        assert_eq!(bar.lambda_bar, 0.0);
    }

    #[test]
    fn g_mu_examples() {
        let (_, mu) = build_g_mu(&x(), -2.0, 1.0).unwrap();
        assert!((mu - 0.25).abs() < 1e-15);
        let (_, mu) = build_g_mu(&x(), -1.5, 1.5).unwrap();
        assert_eq!(mu, 1.0);
        let (_, mu) = build_g_mu(&ScalarFn::poly(vec![0.0, 0.0, 0.0, 1.0]), -2.0, 1.0).unwrap();
        assert!((mu - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn poly_deform_cubic() {
        let out = poly_deform(&Polynomial::monomial(1.0, 3), &x(), 1e-3, opts()).unwrap();
        assert!(out.parameter > 0.0);
        assert!((out.details["mu"] - 1.0).abs() < 1e-9);
        assert_eq!(out.certificate.verdict, Verdict::UniqueStableCycle);
        let out = poly_deform(&Polynomial::new(vec![0.0, 0.0, 1.0, 1.0]), &x(), 1e-3, opts()).unwrap();
        assert_eq!(out.certificate.verdict, Verdict::UniqueStableCycle);
    }

    #[test]
    fn theorem5_examples() {
        let out = theorem5_pipeline(&ScalarFn::poly(vec![0.0, 0.0, 0.0, 0.0, 1.0]), &x(), opts()).unwrap();
        assert!((out.details["mu"] - 1.0).abs() < 1e-9);
        assert_eq!(out.certificate.verdict, Verdict::UniqueStableCycle);
        let out = theorem5_pipeline(&ScalarFn::poly(vec![0.0, 1.0, 1.0]), &x(), opts()).unwrap();
        assert!((out.details["mu"] - 1.0).abs() > 1e-3);
        assert_eq!(out.certificate.verdict, Verdict::UniqueStableCycle);
        assert!(out.details["lambda_hat"] <= out.parameter);
    }

    #[test]
    fn center_perturbation() {
        let r = 3f64.sqrt();
        let vdp = ScalarFn::poly(vec![0.0, -1.0, 0.0, 1.0 / 3.0]);
        let v = center_perturbation_check(&x(), &vdp, -r, r, 1e-9).unwrap();
        assert!(v.pass, "{v:?}");
        let v = center_perturbation_check(&x(), &vdp, -1.5, 1.5, 1e-9).unwrap();
        assert_eq!(v.failing.as_deref(), Some("root condition F(x1) = F(x2) = 0"));
        // F = x (x^2 - 1)(x^2 - 6x + 9.1) dips after x1 = 1.
        let p = &(&Polynomial::x() * &Polynomial::new(vec![-1.0, 0.0, 1.0])) * &Polynomial::new(vec![9.1, -6.0, 1.0]);
        let v = center_perturbation_check(&x(), &ScalarFn::Poly(p), -1.0, 1.0, 1e-9).unwrap();
        assert_eq!(v.failing.as_deref(), Some("monotonicity of F outside [x2, x1]"));
    }
}
