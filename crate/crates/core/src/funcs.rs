//! Scalar functions of one real variable and the Liénard system built from them.
//!
//! Every [`ScalarFn`] is a polynomial core wrapped in at most a handful of
//! piecewise or affine transforms. On each half-line `x < 0` and `x >= 0` the
//! function is an ordinary polynomial, which is what makes exact root
//! isolation and symbolic calculus possible for all of them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real polynomial with coefficients stored in ascending degree.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Polynomial {
    fn from(coeffs: Vec<f64>) -> Self {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    /// Builds a polynomial, dropping zero high-order coefficients.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// `c * x^k`
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Polynomial::new(coeffs)
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Polynomial::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at the origin.
    pub fn primitive(&self) -> Polynomial {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64),
        );
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `x -> p(s * x)`.
    pub fn compose_scale(&self, s: f64) -> Polynomial {
        let mut pow = 1.0;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            coeffs.push(c * pow);
            pow *= s;
        }
        Polynomial::new(coeffs)
    }

    /// Sign of `p(x)` as `x -> +inf`.
    pub fn sign_at_pos_inf(&self) -> i8 {
        sign(self.leading_coeff())
    }

    /// Sign of `p(x)` as `x -> -inf`.
    pub fn sign_at_neg_inf(&self) -> i8 {
        match self.degree() {
            None => 0,
            Some(d) if d % 2 == 0 => sign(self.leading_coeff()),
            Some(_) => -sign(self.leading_coeff()),
        }
    }

    /// Lowest-order nonzero coefficient as `(k, a_k)`.
    pub fn lowest_term(&self) -> Option<(usize, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| **c != 0.0)
            .map(|(k, &c)| (k, c))
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Cauchy bound `1 + max |a_k / a_n|` on the modulus of every root.
    pub fn cauchy_bound(&self) -> f64 {
        let lead = self.leading_coeff();
        if self.coeffs.len() <= 1 {
            return 0.0;
        }
        1.0 + self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .fold(0.0_f64, |m, c| m.max((c / lead).abs()))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            if first {
                write!(f, "{c}")?;
            } else if c < 0.0 {
                write!(f, " - {}", -c)?;
            } else {
                write!(f, " + {c}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

pub(crate) fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// A scalar function as a tree of transforms over a polynomial core.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScalarFn {
    #[serde(rename = "poly")]
    Poly(Polynomial),
    /// `lambda * base(x)` for `x < 0`, `base(x)` for `x >= 0`.
    #[serde(rename = "neg_factor")]
    NegHalfFactor { lambda: f64, base: Box<ScalarFn> },
    /// `base(lambda * x)` for `x < 0`, `base(x)` for `x >= 0`.
    #[serde(rename = "neg_argscale")]
    NegHalfArgScale { lambda: f64, base: Box<ScalarFn> },
    /// `base(x) - c`
    #[serde(rename = "sub_const")]
    SubtractConst { c: f64, base: Box<ScalarFn> },
    /// `base(x) - c * x`
    #[serde(rename = "sub_linear")]
    SubtractLinear { c: f64, base: Box<ScalarFn> },
}

/// The two polynomial pieces of a [`ScalarFn`]: `left` on `x < 0`, `right`
/// on `x >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pieces {
    pub left: Polynomial,
    pub right: Polynomial,
}

impl Pieces {
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.left.eval(x)
        } else {
            self.right.eval(x)
        }
    }

    pub fn piece_for(&self, x: f64) -> &Polynomial {
        if x < 0.0 {
            &self.left
        } else {
            &self.right
        }
    }

    pub fn is_split(&self) -> bool {
        self.left != self.right
    }

    fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Pieces {
        Pieces {
            left: f(&self.left),
            right: f(&self.right),
        }
    }
}

impl From<Polynomial> for ScalarFn {
    fn from(p: Polynomial) -> Self {
        ScalarFn::Poly(p)
    }
}

impl ScalarFn {
    pub fn poly(coeffs: Vec<f64>) -> Self {
        ScalarFn::Poly(Polynomial::new(coeffs))
    }

    pub fn neg_factor(base: ScalarFn, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(ScalarFn::NegHalfFactor {
            lambda,
            base: Box::new(base),
        })
    }

    pub fn neg_argscale(base: ScalarFn, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(ScalarFn::NegHalfArgScale {
            lambda,
            base: Box::new(base),
        })
    }

    pub fn sub_const(base: ScalarFn, c: f64) -> Self {
        ScalarFn::SubtractConst {
            c,
            base: Box::new(base),
        }
    }

    pub fn sub_linear(base: ScalarFn, c: f64) -> Self {
        ScalarFn::SubtractLinear {
            c,
            base: Box::new(base),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            ScalarFn::Poly(_) => "poly",
            ScalarFn::NegHalfFactor { .. } => "neg_factor",
            ScalarFn::NegHalfArgScale { .. } => "neg_argscale",
            ScalarFn::SubtractConst { .. } => "sub_const",
            ScalarFn::SubtractLinear { .. } => "sub_linear",
        }
    }

    /// Checks parameter invariants on the whole tree (used after
    /// deserialization, which bypasses the checked constructors).
    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarFn::Poly(p) => {
                if p.is_finite() {
                    Ok(())
                } else {
                    Err(Error::NonFinite("polynomial coefficient"))
                }
            }
            ScalarFn::NegHalfFactor { lambda, base } | ScalarFn::NegHalfArgScale { lambda, base } => {
                check_lambda(*lambda)?;
                base.validate()
            }
            ScalarFn::SubtractConst { c, base } | ScalarFn::SubtractLinear { c, base } => {
                if !c.is_finite() {
                    return Err(Error::NonFinite("transform constant"));
                }
                base.validate()
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Poly(p) => p.eval(x),
            ScalarFn::NegHalfFactor { lambda, base } => {
                let v = base.eval(x);
                if x < 0.0 {
                    lambda * v
                } else {
                    v
                }
            }
            ScalarFn::NegHalfArgScale { lambda, base } => {
                if x < 0.0 {
                    base.eval(lambda * x)
                } else {
                    base.eval(x)
                }
            }
            ScalarFn::SubtractConst { c, base } => base.eval(x) - c,
            ScalarFn::SubtractLinear { c, base } => base.eval(x) - c * x,
        }
    }

    /// Like [`ScalarFn::eval`] but rejects non-finite arguments.
    pub fn try_eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite("evaluation point"));
        }
        Ok(self.eval(x))
    }

    /// True if the tree contains a transform that treats `x < 0` differently.
    pub fn is_piecewise(&self) -> bool {
        match self {
            ScalarFn::Poly(_) => false,
            ScalarFn::NegHalfFactor { .. } | ScalarFn::NegHalfArgScale { .. } => true,
            ScalarFn::SubtractConst { base, .. } | ScalarFn::SubtractLinear { base, .. } => {
                base.is_piecewise()
            }
        }
    }

    /// Collapses the tree into one polynomial per half-line.
    pub fn pieces(&self) -> Pieces {
        match self {
            ScalarFn::Poly(p) => Pieces {
                left: p.clone(),
                right: p.clone(),
            },
            ScalarFn::NegHalfFactor { lambda, base } => {
                let b = base.pieces();
                Pieces {
                    left: b.left.scale(*lambda),
                    right: b.right,
                }
            }
            ScalarFn::NegHalfArgScale { lambda, base } => {
                let b = base.pieces();
                Pieces {
                    left: b.left.compose_scale(*lambda),
                    right: b.right,
                }
            }
            ScalarFn::SubtractConst { c, base } => {
                let k = Polynomial::constant(*c);
                base.pieces().map(|p| p - &k)
            }
            ScalarFn::SubtractLinear { c, base } => {
                let k = Polynomial::monomial(*c, 1);
                base.pieces().map(|p| p - &k)
            }
        }
    }

    /// The polynomial core, when the function is a single polynomial.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        let p = self.pieces();
        if p.is_split() {
            None
        } else {
            Some(p.right)
        }
    }

    /// Antiderivative vanishing at 0.
    pub fn primitive(&self) -> Result<ScalarFn> {
        match self {
            ScalarFn::Poly(p) => Ok(ScalarFn::Poly(p.primitive())),
            ScalarFn::NegHalfFactor { lambda, base } => Ok(ScalarFn::NegHalfFactor {
                lambda: *lambda,
                base: Box::new(base.primitive()?),
            }),
            ScalarFn::NegHalfArgScale { .. } => Err(Error::UnsupportedVariant {
                op: "primitive",
                variant: "neg_argscale",
            }),
            ScalarFn::SubtractConst { c, base } => Ok(ScalarFn::sub_linear(base.primitive()?, *c)),
            ScalarFn::SubtractLinear { c, base } => match base.primitive()? {
                ScalarFn::Poly(p) => Ok(ScalarFn::Poly(&p - &Polynomial::monomial(c / 2.0, 2))),
                _ => Err(Error::UnsupportedVariant {
                    op: "primitive",
                    variant: "sub_linear over a piecewise base",
                }),
            },
        }
    }

    /// Symbolic derivative, piecewise away from 0.
    pub fn derivative(&self) -> ScalarFn {
        match self {
            ScalarFn::Poly(p) => ScalarFn::Poly(p.derivative()),
            ScalarFn::NegHalfFactor { lambda, base } => ScalarFn::NegHalfFactor {
                lambda: *lambda,
                base: Box::new(base.derivative()),
            },
            // d/dx base(lambda x) = lambda base'(lambda x)
            ScalarFn::NegHalfArgScale { lambda, base } => ScalarFn::NegHalfFactor {
                lambda: *lambda,
                base: Box::new(ScalarFn::NegHalfArgScale {
                    lambda: *lambda,
                    base: Box::new(base.derivative()),
                }),
            },
            ScalarFn::SubtractConst { base, .. } => base.derivative(),
            ScalarFn::SubtractLinear { c, base } => ScalarFn::sub_const(base.derivative(), *c),
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "piecewise factor must be positive and finite, got {lambda}"
        )))
    }
}

/// On-disk description of a system: either the damping `f` or its primitive
/// `F`, together with the restoring force `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<ScalarFn>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub big_f: Option<ScalarFn>,
    pub g: ScalarFn,
}

/// The Liénard system `x'' + f(x) x' + g(x) = 0`, held in the Liénard plane
/// form `x' = y - F(x)`, `y' = -g(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LienardSystem {
    spec: SystemSpec,
    damping: ScalarFn,
    damping_primitive: ScalarFn,
    restoring: ScalarFn,
    potential: ScalarFn,
    primitive_pieces: Pieces,
    restoring_pieces: Pieces,
}

impl LienardSystem {
    /// System given by the damping `f`; `F` is its primitive vanishing at 0.
    pub fn with_damping(f: ScalarFn, g: ScalarFn) -> Result<Self> {
        Self::from_spec(SystemSpec {
            f: Some(f),
            big_f: None,
            g,
        })
    }

    /// System given directly at the level of `F`; `f` is its piecewise
    /// derivative.
    pub fn with_primitive(big_f: ScalarFn, g: ScalarFn) -> Result<Self> {
        Self::from_spec(SystemSpec {
            f: None,
            big_f: Some(big_f),
            g,
        })
    }

    pub fn from_spec(spec: SystemSpec) -> Result<Self> {
        spec.g.validate()?;
        let (damping, damping_primitive) = match (&spec.f, &spec.big_f) {
            (Some(f), None) => {
                f.validate()?;
                (f.clone(), f.primitive()?)
            }
            (None, Some(big_f)) => {
                big_f.validate()?;
                let p = big_f.pieces();
                let scale = 1.0 + p.left.max_abs_coeff().max(p.right.max_abs_coeff());
                if p.left.coeff(0).abs() > 1e-12 * scale || p.right.coeff(0).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument(
                        "F must vanish at the origin".to_string(),
                    ));
                }
                (big_f.derivative(), big_f.clone())
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "system spec needs exactly one of `f` and `F`".to_string(),
                ))
            }
        };
        let potential = spec.g.primitive()?;
        Ok(LienardSystem {
            primitive_pieces: damping_primitive.pieces(),
            restoring_pieces: spec.g.pieces(),
            restoring: spec.g.clone(),
            spec,
            damping,
            damping_primitive,
            potential,
        })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    /// `f`
    pub fn damping(&self) -> &ScalarFn {
        &self.damping
    }

    /// `F`, the primitive of `f` vanishing at 0.
    pub fn damping_primitive(&self) -> &ScalarFn {
        &self.damping_primitive
    }

    /// `g`
    pub fn restoring(&self) -> &ScalarFn {
        &self.restoring
    }

    /// `G`, the primitive of `g` vanishing at 0.
    pub fn potential(&self) -> &ScalarFn {
        &self.potential
    }

    pub fn primitive_pieces(&self) -> &Pieces {
        &self.primitive_pieces
    }

    pub fn restoring_pieces(&self) -> &Pieces {
        &self.restoring_pieces
    }

    /// True if either `F` or `g` changes formula at `x = 0`.
    pub fn is_piecewise(&self) -> bool {
        self.primitive_pieces.is_split() || self.restoring_pieces.is_split()
    }

    /// Returns a copy with `g` replaced.
    pub fn with_restoring(&self, g: ScalarFn) -> Result<Self> {
        Self::from_spec(SystemSpec {
            g,
            ..self.spec.clone()
        })
    }

    /// `Lambda(x, y) = y^2 / 2 + G(x)`.
    pub fn energy(&self, x: f64, y: f64) -> f64 {
        0.5 * y * y + self.potential.eval(x)
    }
}
