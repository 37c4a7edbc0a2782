//! Exact rational polynomial arithmetic backing the Sturm machinery.
//!
//! Every finite `f64` is a dyadic rational, so a floating-point polynomial
//! converts to a rational one without loss and its remainder sequence can be
//! run exactly.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::funcs::Polynomial;

pub(crate) fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_poly(p: &Polynomial) -> Self {
        QPoly::new(p.coeffs().iter().map(|&c| rational(c)).collect())
    }

    pub fn to_poly(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .map(|c| c.to_f64().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn leading(&self) -> &BigRational {
        self.coeffs.last().expect("nonzero polynomial")
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Exact value at `x` (Horner).
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn sign_at(&self, x: &BigRational) -> i8 {
        match self.eval(x).cmp(&BigRational::zero()) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn sign_at_pos_inf(&self) -> i8 {
        match self.coeffs.last() {
            None => 0,
            Some(c) if c.is_positive() => 1,
            Some(_) => -1,
        }
    }

    pub fn sign_at_neg_inf(&self) -> i8 {
        let s = self.sign_at_pos_inf();
        match self.degree() {
            Some(d) if d % 2 == 1 => -s,
            _ => s,
        }
    }

    /// Euclidean division `self = q * d + r`.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let mut r = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (QPoly::new(vec![]), QPoly::new(vec![]));
        };
        if nd < dd {
            return (QPoly::new(vec![]), self.clone());
        }
        let mut q = vec![BigRational::zero(); nd - dd + 1];
        let lead = d.leading();
        for k in (0..=nd - dd).rev() {
            let c = &r[k + dd] / lead;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn neg(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    fn monic(&self) -> QPoly {
        let lead = self.leading().clone();
        QPoly::new(self.coeffs.iter().map(|c| c / &lead).collect())
    }

    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// `self / gcd(self, self')`, left unchanged when already squarefree.
    pub fn squarefree(&self) -> QPoly {
        let g = self.gcd(&self.derivative());
        if g.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        self.div_rem(&g).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_and_gcd() {
        // (x - 1)^2 (x + 2)
        let p = QPoly::from_poly(&Polynomial::new(vec![2.0, -3.0, 0.0, 1.0]));
        let sf = p.squarefree();
        assert_eq!(sf.degree(), Some(2));
        assert_eq!(sf.sign_at(&rational(1.0)), 0);
        assert_eq!(sf.sign_at(&rational(-2.0)), 0);
        let (q, r) = p.div_rem(&QPoly::from_poly(&Polynomial::new(vec![-1.0, 1.0])));
        assert!(r.is_zero());
        assert_eq!(q.to_poly(), Polynomial::new(vec![-2.0, 1.0, 1.0]));
    }

    #[test]
    fn float_conversion_is_exact() {
        let p = Polynomial::new(vec![0.1, -1.0 / 3.0, std::f64::consts::PI]);
        assert_eq!(QPoly::from_poly(&p).to_poly(), p);
    }
}
