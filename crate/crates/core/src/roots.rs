//! Certified real-root isolation with Sturm sequences.
//!
//! Chains are built in exact rational arithmetic from the (dyadic) float
//! coefficients, so sign-variation counts are exact for the polynomial as
//! stored. Refinement bisects on exact signs of the squarefree part.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{rational, QPoly};
use crate::funcs::{sign, Pieces, Polynomial, ScalarFn};

/// Relative threshold on `|F'(mid)|` below which a zero is non-transversal.
pub const TRANSVERSALITY_TOL: f64 = 1e-9;

/// Canonical Sturm chain of the squarefree part of a polynomial.
#[derive(Clone, Debug)]
pub struct SturmSequence {
    polys: Vec<Polynomial>,
    exact: Vec<QPoly>,
}

impl SturmSequence {
    /// The chain in floating point (for inspection; counts use exact values).
    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    pub(crate) fn squarefree(&self) -> &QPoly {
        &self.exact[0]
    }

    fn variations_by(&self, signs: impl Iterator<Item = i8>) -> usize {
        let mut last = 0i8;
        let mut count = 0;
        for s in signs.filter(|&s| s != 0) {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    pub(crate) fn variations(&self, x: &BigRational) -> usize {
        self.variations_by(self.exact.iter().map(|p| p.sign_at(x)))
    }

    fn variations_pos_inf(&self) -> usize {
        self.variations_by(self.exact.iter().map(QPoly::sign_at_pos_inf))
    }

    fn variations_neg_inf(&self) -> usize {
        self.variations_by(self.exact.iter().map(QPoly::sign_at_neg_inf))
    }

    /// Distinct real roots in `(a, b]`.
    pub(crate) fn count_exact(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }

    /// Distinct real roots in `(a, +inf)`.
    pub fn count_above(&self, a: f64) -> Result<usize> {
        finite(a)?;
        Ok(self
            .variations(&rational(a))
            .saturating_sub(self.variations_pos_inf()))
    }

    /// Distinct real roots in `(-inf, b]`.
    pub fn count_below(&self, b: f64) -> Result<usize> {
        finite(b)?;
        Ok(self
            .variations_neg_inf()
            .saturating_sub(self.variations(&rational(b))))
    }

    /// Number of distinct real roots.
    pub fn count_all(&self) -> usize {
        self.variations_neg_inf()
            .saturating_sub(self.variations_pos_inf())
    }
}

fn finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("root-count endpoint"))
    }
}

/// Sturm chain `p, p', -rem(p, p'), ...` of the squarefree part of `p`.
pub fn sturm_sequence(p: &Polynomial) -> Result<SturmSequence> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !p.is_finite() {
        return Err(Error::NonFinite("polynomial coefficient"));
    }
    let q = QPoly::from_poly(p).squarefree();
    let mut exact = vec![q.clone()];
    let dq = q.derivative();
    if !dq.is_zero() {
        exact.push(dq);
        loop {
            let n = exact.len();
            let (_, r) = exact[n - 2].div_rem(&exact[n - 1]);
            if r.is_zero() {
                break;
            }
            exact.push(r.neg());
        }
    }
    Ok(SturmSequence {
        polys: exact.iter().map(QPoly::to_poly).collect(),
        exact,
    })
}

/// Number of distinct real roots of the chain's polynomial in `(a, b]`.
///
/// Exact arithmetic makes the half-open count well defined even when an
/// endpoint is itself a root, so no nudging is needed.
pub fn count_roots(s: &SturmSequence, a: f64, b: f64) -> Result<usize> {
    finite(a)?;
    finite(b)?;
    if a >= b {
        return Err(Error::InvalidArgument(format!("empty interval ({a}, {b}]")));
    }
    Ok(s.count_exact(&rational(a), &rational(b)))
}

/// Certified isolating interval for one real zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootInterval {
    pub lo: f64,
    pub hi: f64,
    pub transversal: bool,
    /// Signs of the function at `lo` and `hi`.
    pub sign_change: (i8, i8),
}

impl RootInterval {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn changes_sign(&self) -> bool {
        self.sign_change.0 * self.sign_change.1 < 0
    }
}

#[derive(Clone, Copy, Debug)]
struct RawRoot {
    lo: f64,
    hi: f64,
    /// Set when the zero was hit exactly by a bisection point.
    at: Option<f64>,
}

impl RawRoot {
    fn exact(r: f64, width: f64) -> Self {
        let h = (0.25 * width).max(4.0 * f64::EPSILON * r.abs()).max(f64::MIN_POSITIVE);
        RawRoot {
            lo: r - h,
            hi: r + h,
            at: Some(r),
        }
    }
}

struct PieceIsolator {
    chain: SturmSequence,
    width: f64,
}

impl PieceIsolator {
    fn new(p: &Polynomial, width: f64) -> Result<Self> {
        Ok(PieceIsolator {
            chain: sturm_sequence(p)?,
            width,
        })
    }

    fn q(&self) -> &QPoly {
        self.chain.squarefree()
    }

    /// Roots in the closed interval `[a, b]`.
    fn closed(&self, a: f64, b: f64, out: &mut Vec<RawRoot>) {
        if self.q().sign_at(&rational(a)) == 0 {
            out.push(RawRoot::exact(a, self.width));
        }
        self.half_open(a, b, out);
    }

    /// Roots in `(a, b]`.
    fn half_open(&self, a: f64, b: f64, out: &mut Vec<RawRoot>) {
        let n = self.chain.count_exact(&rational(a), &rational(b));
        if n == 0 {
            return;
        }
        if n == 1 {
            out.push(self.refine_single(a, b));
            return;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // Cannot split further in floating point.
            for _ in 0..n {
                out.push(RawRoot { lo: a, hi: b, at: None });
            }
            return;
        }
        self.half_open(a, m, out);
        self.half_open(m, b, out);
    }

    /// Bisects `(a, b]`, known to hold exactly one root, down to the width.
    fn refine_single(&self, mut a: f64, mut b: f64) -> RawRoot {
        let q = self.q();
        let mut sb = q.sign_at(&rational(b));
        if sb == 0 {
            return RawRoot::exact(b, self.width);
        }
        while b - a > self.width {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let sm = q.sign_at(&rational(m));
            if sm == 0 {
                return RawRoot::exact(m, self.width);
            }
            if sm != sb {
                a = m;
            } else {
                b = m;
                sb = sm;
            }
        }
        RawRoot { lo: a, hi: b, at: None }
    }
}

fn exact_sign(pieces: &Pieces, x: f64) -> i8 {
    QPoly::from_poly(pieces.piece_for(x)).sign_at(&rational(x))
}

/// Default search range `[-R, R]`, `R = 1 + max(1, Cauchy bound)` over both
/// polynomial pieces.
pub fn default_range(func: &ScalarFn) -> (f64, f64) {
    let p = func.pieces();
    let bound = p.left.cauchy_bound().max(p.right.cauchy_bound());
    let r = 1.0 + bound.max(1.0);
    (-r, r)
}

fn sup_abs_on(p: &Pieces, lo: f64, hi: f64) -> f64 {
    const N: usize = 1000;
    (0..=N)
        .map(|i| lo + (hi - lo) * i as f64 / N as f64)
        .map(|x| p.eval(x).abs())
        .fold(0.0, f64::max)
}

/// Isolates every distinct real zero of `func` in `range` (default:
/// [`default_range`]) to intervals of width at most `width`.
///
/// Piecewise functions are handled one polynomial piece at a time, split at
/// `x = 0`; a zero exactly at the split belongs to the right piece.
pub fn isolate_roots(
    func: &ScalarFn,
    range: Option<(f64, f64)>,
    width: f64,
) -> Result<Vec<RootInterval>> {
    let (lo, hi) = range.unwrap_or_else(|| default_range(func));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NonFinite("isolation range"));
    }
    if lo >= hi {
        return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidArgument(format!("width must be positive, got {width}")));
    }
    let pieces = func.pieces();
    let mut raw = Vec::new();
    if !pieces.is_split() {
        PieceIsolator::new(&pieces.right, width)?.closed(lo, hi, &mut raw);
    } else {
        if lo < 0.0 {
            let left = PieceIsolator::new(&pieces.left, width)?;
            let top = hi.min(0.0);
            let mut part = Vec::new();
            left.closed(lo, top, &mut part);
            // A zero on the breakpoint belongs to the right piece.
            part.retain(|r| r.at != Some(0.0));
            raw.extend(part);
        }
        if hi >= 0.0 {
            PieceIsolator::new(&pieces.right, width)?.closed(lo.max(0.0), hi, &mut raw);
        }
    }
    raw.sort_by(|a, b| a.lo.total_cmp(&b.lo));

    let deriv = func.derivative().pieces();
    let tol = TRANSVERSALITY_TOL * (1.0 + sup_abs_on(&deriv, lo, hi));
    Ok(raw
        .into_iter()
        .map(|r| {
            let sign_change = (exact_sign(&pieces, r.lo), exact_sign(&pieces, r.hi));
            let mid = 0.5 * (r.lo + r.hi);
            let transversal =
                sign_change.0 * sign_change.1 < 0 && deriv.eval(mid).abs() > tol;
            RootInterval {
                lo: r.lo,
                hi: r.hi,
                transversal,
                sign_change,
            }
        })
        .collect())
}

/// Isolates the zeros of a plain polynomial.
pub fn isolate_poly_roots(
    p: &Polynomial,
    range: Option<(f64, f64)>,
    width: f64,
) -> Result<Vec<RootInterval>> {
    isolate_roots(&ScalarFn::Poly(p.clone()), range, width)
}

/// Shrinks an isolating interval of `func` to at most `width`.
pub fn refine(func: &ScalarFn, root: &RootInterval, width: f64) -> Result<RootInterval> {
    if root.width() <= width {
        return Ok(*root);
    }
    let found = isolate_roots(func, Some((root.lo, root.hi)), width)?;
    let mid = root.mid();
    Ok(found
        .into_iter()
        .min_by(|a, b| (a.mid() - mid).abs().total_cmp(&(b.mid() - mid).abs()))
        .unwrap_or(*root))
}

/// Sign of `func` just to the right of `x` (for `x` a zero of a polynomial
/// piece, the sign of the first nonvanishing derivative).
pub(crate) fn sign_right_of(p: &Polynomial, x: f64) -> i8 {
    let mut d = p.clone();
    for _ in 0..=p.degree().unwrap_or(0) {
        let v = d.eval(x);
        if v != 0.0 {
            return sign(v);
        }
        d = d.derivative();
    }
    0
}
