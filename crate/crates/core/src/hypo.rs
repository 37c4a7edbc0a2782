//! Hypothesis checks (B), (C), (D), (E), (D′), (D″) and the verdict built
//! from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::funcs::{LienardSystem, Polynomial, ScalarFn};
use crate::roots::{self, default_range, isolate_roots, sturm_sequence, RootInterval};

/// Outcome of a single check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tristate {
    Holds,
    Fails,
    Unknown,
}

impl Tristate {
    pub fn holds(self) -> bool {
        self == Tristate::Holds
    }

    fn from_bool(b: bool) -> Self {
        if b {
            Tristate::Holds
        } else {
            Tristate::Fails
        }
    }
}

/// Conclusion drawn from the hypotheses that hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// B, C, D and E hold: exactly one limit cycle, and it is stable.
    UniqueStableCycle,
    /// B, C, E and one of D′, D″ hold: exactly one limit cycle.
    UniqueCycleViaDPrime,
    /// B and C hold: at most one cycle crosses both `x = x2` and `x = x1`.
    AtMostOneCrossingCycle,
    NoVerdict,
}

/// Which of the lines `x = x2`, `x = x1` every limit cycle must cross.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingDirection {
    MustCrossX2,
    MustCrossX1,
    MustCrossBoth,
    None,
}

/// Tunables for [`analyze`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    /// Relative tolerance of the equality `G(x1) = G(x2)`.
    pub d_tol: f64,
    /// Tolerate interior zeros of `F` without a sign change.
    pub relaxed_c: bool,
    /// Width of the isolating intervals for the zeros of `F`.
    pub root_width: f64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            d_tol: 1e-9,
            relaxed_c: false,
            root_width: 1e-12,
        }
    }
}

/// Result of the (C) check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CCheck {
    pub status: Tristate,
    pub x2: Option<RootInterval>,
    pub x1: Option<RootInterval>,
    /// All isolated zeros of `F` in the search range.
    pub zeros: Vec<RootInterval>,
    pub detail: String,
}

impl CCheck {
    fn fail(zeros: Vec<RootInterval>, detail: impl Into<String>) -> Self {
        CCheck {
            status: Tristate::Fails,
            x2: None,
            x1: None,
            zeros,
            detail: detail.into(),
        }
    }

    /// `(x2, x1)` when (C) holds.
    pub fn roots(&self) -> Option<(RootInterval, RootInterval)> {
        match (self.status, self.x2, self.x1) {
            (Tristate::Holds, Some(a), Some(b)) => Some((a, b)),
            _ => None,
        }
    }
}

/// Result of the (D) check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DCheck {
    pub status: Tristate,
    /// `G(x1) - G(x2)`
    pub gap: f64,
    /// Bound on the error of `gap` from the width of the root intervals.
    pub uncertainty: f64,
    pub g_x1: f64,
    pub g_x2: f64,
    pub tol: f64,
    /// Refined roots used for the evaluation.
    pub x2: RootInterval,
    pub x1: RootInterval,
}

impl DCheck {
    /// The absolute threshold `tol * (1 + |G(x1)| + |G(x2)|)`.
    pub fn threshold(&self) -> f64 {
        self.tol * (1.0 + self.g_x1.abs() + self.g_x2.abs())
    }
}

/// Result of the (D′) or (D″) check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremumCheck {
    pub status: Tristate,
    /// False when the sign condition on `G(x1) - G(x2)` is not met; the
    /// status is then `Fails`.
    pub applicable: bool,
    /// Point realizing the extremum of `F` on the relevant half-interval.
    pub witness: Option<f64>,
    pub extremum: f64,
    /// `sqrt(2 G(x1))` for D′, `-sqrt(2 G(x2))` for D″.
    pub threshold: f64,
}

/// Per-hypothesis results and the resulting verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub b: Tristate,
    pub c: CCheck,
    pub d: Option<DCheck>,
    pub e: Tristate,
    pub d_prime: Option<ExtremumCheck>,
    pub d_double_prime: Option<ExtremumCheck>,
    pub verdict: Verdict,
    pub prop1_direction: CrossingDirection,
    /// Informational note on existence; not a certified check.
    pub existence_note: Option<String>,
    pub options: AnalyzeOptions,
}

/// Serialized form of one hypothesis.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEntry {
    pub status: Option<Tristate>,
    pub witnesses: BTreeMap<String, f64>,
    pub numbers: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
}

impl HypothesisEntry {
    fn with_status(status: Tristate) -> Self {
        HypothesisEntry {
            status: Some(status),
            ..Default::default()
        }
    }
}

impl HypothesisReport {
    /// `(x2, x1)` midpoints when (C) holds.
    pub fn roots(&self) -> Option<(f64, f64)> {
        self.c.roots().map(|(a, b)| (a.mid(), b.mid()))
    }

    pub fn gap(&self) -> Option<f64> {
        self.d.map(|d| d.gap)
    }

    /// One entry per hypothesis.
    pub fn entries(&self) -> BTreeMap<&'static str, HypothesisEntry> {
        let mut out = BTreeMap::new();
        out.insert("B", HypothesisEntry::with_status(self.b));

        let mut c = HypothesisEntry::with_status(self.c.status);
        if let Some((x2, x1)) = self.c.roots() {
            c.witnesses.insert("x2".into(), x2.mid());
            c.witnesses.insert("x1".into(), x1.mid());
            c.numbers.insert("x2_lo".into(), x2.lo);
            c.numbers.insert("x2_hi".into(), x2.hi);
            c.numbers.insert("x1_lo".into(), x1.lo);
            c.numbers.insert("x1_hi".into(), x1.hi);
        }
        c.numbers.insert("zeros".into(), self.c.zeros.len() as f64);
        c.tolerances.insert("root_width".into(), self.options.root_width);
        c.tolerances.insert("transversality".into(), roots::TRANSVERSALITY_TOL);
        out.insert("C", c);

        let mut d = HypothesisEntry::default();
        d.tolerances.insert("relative".into(), self.options.d_tol);
        if let Some(dc) = &self.d {
            d.status = Some(dc.status);
            d.numbers.insert("gap".into(), dc.gap);
            d.numbers.insert("uncertainty".into(), dc.uncertainty);
            d.numbers.insert("G_x1".into(), dc.g_x1);
            d.numbers.insert("G_x2".into(), dc.g_x2);
            d.tolerances.insert("absolute".into(), dc.threshold());
        }
        out.insert("D", d);

        out.insert("E", HypothesisEntry::with_status(self.e));

        for (name, check) in [("Dprime", &self.d_prime), ("Ddoubleprime", &self.d_double_prime)] {
            let mut entry = HypothesisEntry::default();
            if let Some(x) = check {
                entry.status = Some(x.status);
                entry.numbers.insert("applicable".into(), f64::from(u8::from(x.applicable)));
                entry.numbers.insert("extremum".into(), x.extremum);
                entry.numbers.insert("threshold".into(), x.threshold);
                if let Some(w) = x.witness {
                    let key = if name == "Dprime" { "x2_star" } else { "x1_star" };
                    entry.witnesses.insert(key.into(), w);
                }
            }
            out.insert(name, entry);
        }
        out
    }
}

fn sign_left_of(p: &Polynomial, x: f64) -> i8 {
    roots::sign_right_of(&p.compose_scale(-1.0), -x)
}

/// Zeros of `p` in `(-inf, 0)`, counted exactly.
fn count_negative(p: &Polynomial) -> Result<usize> {
    let s = sturm_sequence(p)?;
    let with_zero = s.count_below(0.0)?;
    Ok(with_zero - usize::from(p.eval(0.0) == 0.0))
}

/// `x g(x) > 0` for every `x != 0`, decided exactly on each piece.
pub fn restoring_sign_ok(g: &ScalarFn) -> Result<bool> {
    let g = g.pieces();
    if g.right.eval(0.0) != 0.0 || g.left.eval(0.0) != 0.0 {
        return Ok(false);
    }
    if g.right.is_zero() || g.left.is_zero() {
        return Ok(false);
    }
    let right_ok = sturm_sequence(&g.right)?.count_above(0.0)? == 0
        && roots::sign_right_of(&g.right, 0.0) > 0;
    let left_ok = count_negative(&g.left)? == 0 && sign_left_of(&g.left, 0.0) < 0;
    Ok(right_ok && left_ok)
}

/// (B): `g(0) = 0`, `x g(x) > 0` for `x != 0`, and `f(0) < 0` (or
/// `x F(x) < 0` near 0 when the system is given through `F`).
pub fn check_b(sys: &LienardSystem) -> Result<Tristate> {
    if !restoring_sign_ok(sys.restoring())? {
        return Ok(Tristate::Fails);
    }
    let friction_ok = if sys.spec().f.is_some() {
        sys.damping().eval(0.0) < 0.0
    } else {
        let p = sys.damping_primitive().pieces();
        roots::sign_right_of(&p.right, 0.0) < 0 && sign_left_of(&p.left, 0.0) > 0
    };
    Ok(Tristate::from_bool(friction_ok))
}

/// Checks that `f` keeps a nonnegative sign on `(x1, +inf)` (right piece)
/// and on `(-inf, x2)` (left piece).
pub(crate) fn exterior_monotone(f: &ScalarFn, x2: f64, x1: f64) -> Result<Option<&'static str>> {
    let p = f.pieces();
    let (_, r) = default_range(f);
    let r = r.max(2.0 * x1.abs().max(x2.abs()) + 1.0);
    if p.right.sign_at_pos_inf() < 0 {
        return Ok(Some("f is negative near +infinity"));
    }
    if p.left.sign_at_neg_inf() < 0 {
        return Ok(Some("f is negative near -infinity"));
    }
    let right = ScalarFn::Poly(p.right.clone());
    if !p.right.is_zero() {
        for z in isolate_roots(&right, Some((x1, r)), 1e-9)? {
            if z.changes_sign() && z.lo > x1 {
                return Ok(Some("f changes sign beyond x1"));
            }
        }
    }
    let left = ScalarFn::Poly(p.left.clone());
    if !p.left.is_zero() {
        for z in isolate_roots(&left, Some((-r, x2)), 1e-9)? {
            if z.changes_sign() && z.hi < x2 {
                return Ok(Some("f changes sign below x2"));
            }
        }
    }
    // One sample per side.
    if p.right.eval(r) < 0.0 || p.left.eval(-r) < 0.0 {
        return Ok(Some("f is negative at the far end of the range"));
    }
    Ok(None)
}

/// (C): `F` has exactly three transversal zeros `x2 < 0 < x1` and is
/// increasing outside `[x2, x1]`. With `relaxed`, extra interior zeros at
/// which `F` keeps its sign are allowed.
pub fn check_c(sys: &LienardSystem, relaxed: bool, width: f64) -> Result<CCheck> {
    let big_f = sys.damping_primitive();
    let pieces = big_f.pieces();
    if pieces.left.is_zero() && pieces.right.is_zero() {
        return Ok(CCheck::fail(vec![], "F vanishes identically"));
    }
    if pieces.left.is_zero() || pieces.right.is_zero() {
        return Ok(CCheck::fail(vec![], "F vanishes on a half-line"));
    }
    let zeros = isolate_roots(big_f, None, width)?;
    let (transversal, other): (Vec<RootInterval>, Vec<RootInterval>) =
        zeros.iter().partition(|z| z.transversal);
    if transversal.len() != 3 {
        let n = transversal.len();
        return Ok(CCheck::fail(zeros, format!("F has {n} transversal zeros, expected 3")));
    }
    let (x2, x0, x1) = (transversal[0], transversal[1], transversal[2]);
    if !(x0.contains(0.0) && x2.hi < 0.0 && x1.lo > 0.0) {
        return Ok(CCheck::fail(zeros, "transversal zeros are not placed at x2 < 0 = x0 < x1"));
    }
    for z in &other {
        let interior = z.lo > x2.hi && z.hi < x1.lo;
        if !(relaxed && interior && !z.changes_sign()) {
            return Ok(CCheck::fail(
                zeros.clone(),
                format!("non-transversal zero near {:.6e}", z.mid()),
            ));
        }
    }
    if let Some(why) = exterior_monotone(sys.damping(), x2.mid(), x1.mid())? {
        return Ok(CCheck::fail(zeros, why));
    }
    Ok(CCheck {
        status: Tristate::Holds,
        x2: Some(x2),
        x1: Some(x1),
        zeros,
        detail: String::new(),
    })
}

fn sup_abs(func: &ScalarFn, a: f64, b: f64) -> f64 {
    const N: usize = 16;
    (0..=N)
        .map(|i| func.eval(a + (b - a) * i as f64 / N as f64).abs())
        .fold(0.0, f64::max)
}

/// (D): `G(x1) = G(x2)` within `tol` relative.
pub fn check_d(sys: &LienardSystem, x2: &RootInterval, x1: &RootInterval, tol: f64) -> Result<DCheck> {
    let g = sys.restoring();
    let big_f = sys.damping_primitive();
    let gmax = sup_abs(g, x2.lo, x2.hi).max(sup_abs(g, x1.lo, x1.hi));
    let width = tol / (1.0 + gmax) / 16.0;
    let x2 = roots::refine(big_f, x2, width)?;
    let x1 = roots::refine(big_f, x1, width)?;
    let pot = sys.potential();
    let (g1, g2) = (pot.eval(x1.mid()), pot.eval(x2.mid()));
    let gap = g1 - g2;
    let gmax = sup_abs(g, x2.lo, x2.hi).max(sup_abs(g, x1.lo, x1.hi));
    let uncertainty =
        gmax * 0.5 * (x1.width() + x2.width()) + 4.0 * f64::EPSILON * (g1.abs() + g2.abs());
    let mut out = DCheck {
        status: Tristate::Unknown,
        gap,
        uncertainty,
        g_x1: g1,
        g_x2: g2,
        tol,
        x2,
        x1,
    };
    let bound = out.threshold();
    out.status = if gap.abs() <= bound {
        Tristate::Holds
    } else if gap.abs() - uncertainty > bound {
        Tristate::Fails
    } else {
        Tristate::Unknown
    };
    Ok(out)
}

/// (E): `G + F` unbounded above at `+inf` and `G - F` unbounded above at
/// `-inf`, decided from the leading terms of each polynomial piece.
pub fn check_e(sys: &LienardSystem) -> Tristate {
    let big_g = sys.potential().pieces();
    let big_f = sys.damping_primitive().pieces();
    let plus = &big_g.right + &big_f.right;
    let minus = &big_g.left - &big_f.left;
    let up_right = plus.degree().unwrap_or(0) >= 1 && plus.sign_at_pos_inf() > 0;
    let up_left = minus.degree().unwrap_or(0) >= 1 && minus.sign_at_neg_inf() > 0;
    Tristate::from_bool(up_right && up_left)
}

/// Extremum of `F` on `(a, b)` over the critical points of `F` there and
/// the endpoints. Returns `(argument, value)`.
fn extremum_of_f(sys: &LienardSystem, a: f64, b: f64, maximize: bool) -> Result<(f64, f64)> {
    let big_f = sys.damping_primitive();
    let better = |v: f64, best: f64| if maximize { v > best } else { v < best };
    let mut best = (a, big_f.eval(a));
    let vb = big_f.eval(b);
    if better(vb, best.1) {
        best = (b, vb);
    }
    let f = sys.damping();
    let fp = f.pieces();
    let side = if a < 0.0 { &fp.left } else { &fp.right };
    if !side.is_zero() {
        for z in isolate_roots(f, Some((a, b)), 1e-13)? {
            let x = z.mid();
            if x > a && x < b {
                let v = big_f.eval(x);
                if better(v, best.1) {
                    best = (x, v);
                }
            }
        }
    }
    Ok(best)
}

/// (D′): `G(x1) > G(x2)` and `max F` on `(x2, 0)` reaches `sqrt(2 G(x1))`.
pub fn check_d_prime(sys: &LienardSystem, x2: f64, x1: f64, gap: f64, gap_tol: f64) -> Result<ExtremumCheck> {
    let threshold = (2.0 * sys.potential().eval(x1)).max(0.0).sqrt();
    let (arg, value) = extremum_of_f(sys, x2, 0.0, true)?;
    let applicable = gap > gap_tol;
    let ok = applicable && value >= threshold;
    Ok(ExtremumCheck {
        status: Tristate::from_bool(ok),
        applicable,
        witness: ok.then_some(arg),
        extremum: value,
        threshold,
    })
}

/// (D″): `G(x1) < G(x2)` and `min F` on `(0, x1)` reaches `-sqrt(2 G(x2))`.
pub fn check_d_double_prime(
    sys: &LienardSystem,
    x2: f64,
    x1: f64,
    gap: f64,
    gap_tol: f64,
) -> Result<ExtremumCheck> {
    let threshold = -(2.0 * sys.potential().eval(x2)).max(0.0).sqrt();
    let (arg, value) = extremum_of_f(sys, 0.0, x1, false)?;
    let applicable = gap < -gap_tol;
    let ok = applicable && value <= threshold;
    Ok(ExtremumCheck {
        status: Tristate::from_bool(ok),
        applicable,
        witness: ok.then_some(arg),
        extremum: value,
        threshold,
    })
}

/// Direction forced on every limit cycle by the sign of `G(x1) - G(x2)`.
pub fn crossing_direction(d: &DCheck) -> CrossingDirection {
    if d.gap.abs() <= d.threshold() {
        CrossingDirection::MustCrossBoth
    } else if d.gap > 0.0 {
        CrossingDirection::MustCrossX2
    } else {
        CrossingDirection::MustCrossX1
    }
}

/// Runs every check and assembles the verdict.
pub fn analyze(sys: &LienardSystem) -> Result<HypothesisReport> {
    analyze_with(sys, AnalyzeOptions::default())
}

pub fn analyze_with(sys: &LienardSystem, options: AnalyzeOptions) -> Result<HypothesisReport> {
    let b = check_b(sys)?;
    let c = check_c(sys, options.relaxed_c, options.root_width)?;
    let e = check_e(sys);
    let mut d = None;
    let mut d_prime = None;
    let mut d_double_prime = None;
    let mut prop1_direction = CrossingDirection::None;
    if let Some((x2, x1)) = c.roots() {
        let dc = check_d(sys, &x2, &x1, options.d_tol)?;
        prop1_direction = crossing_direction(&dc);
        let (r2, r1) = (dc.x2.mid(), dc.x1.mid());
        let t = dc.threshold();
        d_prime = Some(check_d_prime(sys, r2, r1, dc.gap, t)?);
        d_double_prime = Some(check_d_double_prime(sys, r2, r1, dc.gap, t)?);
        d = Some(dc);
    }
    let holds = |x: &Option<ExtremumCheck>| x.is_some_and(|c| c.status.holds());
    let base = b.holds() && c.status.holds();
    let verdict = if base && e.holds() && d.is_some_and(|d| d.status.holds()) {
        Verdict::UniqueStableCycle
    } else if base && e.holds() && (holds(&d_prime) || holds(&d_double_prime)) {
        Verdict::UniqueCycleViaDPrime
    } else if base {
        Verdict::AtMostOneCrossingCycle
    } else {
        Verdict::NoVerdict
    };
    let existence_note = (base && e.holds()).then(|| {
        "existence of a limit cycle is expected from (A), (B), (C), (E); not certified here".to_string()
    });
    Ok(HypothesisReport {
        b,
        c,
        d,
        e,
        d_prime,
        d_double_prime,
        verdict,
        prop1_direction,
        existence_note,
        options,
    })
}

/// Signs of `F` just left and just right of 0.
pub(crate) fn friction_sign_near_origin(big_f: &ScalarFn) -> (i8, i8) {
    let p = big_f.pieces();
    (sign_left_of(&p.left, 0.0), roots::sign_right_of(&p.right, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys_f(f: &[f64], g: &[f64]) -> LienardSystem {
        LienardSystem::with_damping(ScalarFn::poly(f.to_vec()), ScalarFn::poly(g.to_vec())).unwrap()
    }

    fn sys_big_f(big_f: &[f64], g: &[f64]) -> LienardSystem {
        LienardSystem::with_primitive(ScalarFn::poly(big_f.to_vec()), ScalarFn::poly(g.to_vec())).unwrap()
    }

    fn van_der_pol() -> LienardSystem {
        sys_f(&[-1.0, 0.0, 1.0], &[0.0, 1.0])
    }

    #[test]
    fn b_examples() {
        assert_eq!(check_b(&van_der_pol()).unwrap(), Tristate::Holds);
        assert_eq!(check_b(&sys_f(&[-1.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 1.0])).unwrap(), Tristate::Holds);
        assert_eq!(check_b(&sys_f(&[-1.0, 0.0, 1.0], &[0.0, -1.0])).unwrap(), Tristate::Fails);
        assert_eq!(check_b(&sys_f(&[1.0, 0.0, 1.0], &[0.0, 1.0])).unwrap(), Tristate::Fails);
        // g = x^2 has the wrong sign on the left.
        assert_eq!(check_b(&sys_f(&[-1.0], &[0.0, 0.0, 1.0])).unwrap(), Tristate::Fails);
        // g = x (x - 1)(x - 2)... vanishes at 1.
        assert_eq!(check_b(&sys_f(&[-1.0], &[0.0, -1.0, 1.0])).unwrap(), Tristate::Fails);
        // F-level: x F(x) < 0 near 0 although f changes sign elsewhere.
        assert_eq!(check_b(&sys_big_f(&[0.0, -1.0, 0.0, 1.0], &[0.0, 1.0])).unwrap(), Tristate::Holds);
        assert_eq!(check_b(&sys_big_f(&[0.0, 0.0, 0.0, 1.0], &[0.0, 1.0])).unwrap(), Tristate::Fails);
    }

    #[test]
    fn b_for_piecewise_g() {
        let g = ScalarFn::neg_factor(ScalarFn::poly(vec![0.0, 1.0]), 0.25).unwrap();
        let sys = LienardSystem::with_damping(ScalarFn::poly(vec![-1.0, 0.0, 1.0]), g).unwrap();
        assert_eq!(check_b(&sys).unwrap(), Tristate::Holds);
    }

    #[test]
    fn c_van_der_pol() {
        let c = check_c(&van_der_pol(), false, 1e-12).unwrap();
        assert_eq!(c.status, Tristate::Holds);
        let (x2, x1) = c.roots().unwrap();
        let r = 3f64.sqrt();
        assert!((x2.mid() + r).abs() < 1e-11 && (x1.mid() - r).abs() < 1e-11);
    }

    #[test]
    fn c_failures() {
        let c = check_c(&sys_big_f(&[0.0, 0.0, 0.0, 1.0 / 3.0], &[0.0, 1.0]), false, 1e-12).unwrap();
        assert_eq!(c.status, Tristate::Fails);
        // Five transversal zeros.
        let c = check_c(&sys_big_f(&[0.0, 4.0, 0.0, -5.0, 0.0, 1.0], &[0.0, 1.0]), false, 1e-12).unwrap();
        assert_eq!(c.status, Tristate::Fails);
        // Decreasing at +inf.
        let c = check_c(&sys_big_f(&[0.0, 1.0, 0.0, -1.0], &[0.0, 1.0]), false, 1e-12).unwrap();
        assert_eq!(c.status, Tristate::Fails);
    }

    #[test]
    fn c_relaxed_allows_double_interior_zero() {
        // F = x (x - 2)(x + 3)(x - 1)^2: double zero at 1 inside (x2, x1) = (-3, 2).
        let x = Polynomial::x();
        let p = &(&(&x * &Polynomial::new(vec![-2.0, 1.0])) * &Polynomial::new(vec![3.0, 1.0]))
            * &Polynomial::new(vec![1.0, -2.0, 1.0]);
        let sys = LienardSystem::with_primitive(ScalarFn::Poly(p), ScalarFn::poly(vec![0.0, 1.0])).unwrap();
        assert_eq!(check_c(&sys, false, 1e-12).unwrap().status, Tristate::Fails);
        let c = check_c(&sys, true, 1e-12).unwrap();
        assert_eq!(c.status, Tristate::Holds, "{}", c.detail);
    }

    #[test]
    fn c_monotonicity_outside() {
        // F = x^3 - x with a dip far to the right: F' = 3x^2 - 1 - ... use
        // F = x (x^2 - 1)(x^2 - 6x + 10): complex pair, f changes sign twice?
        let x = Polynomial::x();
        let p = &(&x * &Polynomial::new(vec![-1.0, 0.0, 1.0])) * &Polynomial::new(vec![9.1, -6.0, 1.0]);
        let sys = LienardSystem::with_primitive(ScalarFn::Poly(p.clone()), ScalarFn::poly(vec![0.0, 1.0])).unwrap();
        let fp = p.derivative();
        let beyond = isolate_roots(&ScalarFn::Poly(fp), Some((1.0, 10.0)), 1e-9).unwrap();
        assert!(beyond.iter().any(|z| z.changes_sign()), "test polynomial must dip");
        let c = check_c(&sys, false, 1e-12).unwrap();
        assert_eq!(c.status, Tristate::Fails);
        assert!(c.detail.contains("beyond x1"), "{}", c.detail);
    }

    #[test]
    fn d_examples() {
        let sys = van_der_pol();
        let c = check_c(&sys, false, 1e-12).unwrap();
        let (x2, x1) = c.roots().unwrap();
        let d = check_d(&sys, &x2, &x1, 1e-9).unwrap();
        assert_eq!(d.status, Tristate::Holds);
        assert!(d.gap.abs() < 1e-12);

        // F = x (x - 1)(x + 2) / 3, g = x: x1 = 1, x2 = -2.
        let x = Polynomial::x();
        let p = (&(&x * &Polynomial::new(vec![-1.0, 1.0])) * &Polynomial::new(vec![2.0, 1.0])).scale(1.0 / 3.0);
        let sys = LienardSystem::with_primitive(ScalarFn::Poly(p), ScalarFn::poly(vec![0.0, 1.0])).unwrap();
        let c = check_c(&sys, false, 1e-12).unwrap();
        let (x2, x1) = c.roots().unwrap();
        let d = check_d(&sys, &x2, &x1, 1e-9).unwrap();
        assert_eq!(d.status, Tristate::Fails);
        assert!((d.gap + 1.5).abs() < 1e-10);
        assert_eq!(crossing_direction(&d), CrossingDirection::MustCrossX1);
    }

    #[test]
    fn e_examples() {
        assert_eq!(check_e(&van_der_pol()), Tristate::Holds);
        assert_eq!(check_e(&sys_f(&[1.0, 0.0, 0.0, 0.0, 1.0], &[0.0, 1.0])), Tristate::Holds);
        // F = -x^3 and g = x: G + F -> -inf at +inf.
        assert_eq!(check_e(&sys_big_f(&[0.0, 0.0, 0.0, -1.0], &[0.0, 1.0])), Tristate::Fails);
        // G bounded (g = 0 on both sides) and F = 0.
        assert_eq!(check_e(&sys_big_f(&[0.0], &[0.0])), Tristate::Fails);
    }

    #[test]
    fn d_prime_examples() {
        let vdp = van_der_pol();
        let r = 3f64.sqrt();
        let dp = check_d_prime(&vdp, -r, r, 0.0, 1e-9).unwrap();
        assert!(!dp.applicable);
        assert_eq!(dp.status, Tristate::Fails);
        // Max of x^3/3 - x on (-sqrt 3, 0) is 2/3 at -1, below sqrt(2 G(x1)) = sqrt 3.
        assert!((dp.extremum - 2.0 / 3.0).abs() < 1e-12);
        let dp = check_d_prime(&vdp, -r, r, 1.0, 1e-9).unwrap();
        assert_eq!(dp.status, Tristate::Fails);
        // Scaled: F = 3 (x^3/3 - x) peaks at 2 >= sqrt(3) with a forced gap.
        let big = sys_big_f(&[0.0, -3.0, 0.0, 1.0], &[0.0, 1.0]);
        let dp = check_d_prime(&big, -r, r, 1.0, 1e-9).unwrap();
        assert_eq!(dp.status, Tristate::Holds);
        assert!((dp.witness.unwrap() + 1.0).abs() < 1e-9);
        let dpp = check_d_double_prime(&big, -r, r, -1.0, 1e-9).unwrap();
        assert_eq!(dpp.status, Tristate::Holds);
        assert!((dpp.witness.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn verdicts() {
        let rep = analyze(&van_der_pol()).unwrap();
        assert_eq!(rep.verdict, Verdict::UniqueStableCycle);
        assert_eq!(rep.prop1_direction, CrossingDirection::MustCrossBoth);
        assert!(rep.existence_note.is_some());
        let rep = analyze(&sys_f(&[-1.0, 0.0, 1.0], &[0.0, -1.0])).unwrap();
        assert_eq!(rep.verdict, Verdict::NoVerdict);
        let entries = rep.entries();
        assert_eq!(entries["B"].status, Some(Tristate::Fails));
    }

    #[test]
    fn analyze_is_deterministic() {
        let sys = sys_f(&[-1.0, 0.3, 1.0], &[0.0, 1.0, 0.2, 0.5]);
        assert_eq!(analyze(&sys).unwrap(), analyze(&sys).unwrap());
    }
}
