//! First-order averaging for `x'' + eps f(x) x' + x = 0`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cycles::Stability;
use crate::error::{Error, Result};
use crate::funcs::{LienardSystem, Polynomial, ScalarFn};
use crate::roots::{isolate_poly_roots, refine};

/// Largest supported Wallis index.
pub const MAX_WALLIS_K: u32 = 30;

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::from(1u32);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `I_{2k} / pi` as an exact rational, where `I_{2k}` is the integral of
/// `sin^2 t cos^{2k} t` over one period.
pub fn wallis_pi_multiple(k: u32) -> Result<BigRational> {
    if k > MAX_WALLIS_K {
        return Err(Error::InvalidArgument(format!(
            "Wallis index {k} exceeds {MAX_WALLIS_K}"
        )));
    }
    let four = BigInt::from(4u32);
    let term = |n: u32| BigRational::new(binomial(2 * n, n), four.pow(n));
    Ok((term(k) - term(k + 1)) * BigRational::from_integer(BigInt::from(2u32)))
}

/// `I_{2k}`
pub fn wallis_moment(k: u32) -> Result<f64> {
    let r = wallis_pi_multiple(k)?;
    Ok(r.to_f64().unwrap_or(f64::NAN) * PI)
}

/// Averaged amplitude function `Fbar(rho) = sum a_{2l} I_{2l} rho^{2l+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedAmplitude {
    pub fbar: Polynomial,
    /// `(k, I_{2k})` for each even coefficient of `f` that was used.
    pub moments_used: Vec<(u32, f64)>,
}

pub fn averaged_amplitude(f: &Polynomial) -> Result<AveragedAmplitude> {
    if !f.is_finite() {
        return Err(Error::NonFinite("damping coefficient"));
    }
    let mut coeffs = vec![0.0; f.coeffs().len() + 1];
    let mut moments_used = Vec::new();
    for (j, &a) in f.coeffs().iter().enumerate().step_by(2) {
        if a == 0.0 {
            continue;
        }
        let k = (j / 2) as u32;
        let m = wallis_moment(k)?;
        coeffs[j + 1] = a * m;
        moments_used.push((k, m));
    }
    Ok(AveragedAmplitude {
        fbar: Polynomial::new(coeffs),
        moments_used,
    })
}

/// A cycle radius predicted by averaging.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedCycle {
    pub radius: f64,
    /// `Fbar'(radius)`
    pub slope: f64,
    /// Stability for `eps > 0`.
    pub stability: Stability,
}

/// Positive simple zeros of `Fbar`, with a stability hint: a positive
/// slope of `Fbar` means the cycle attracts when `eps > 0`.
pub fn predict_cycles(f: &Polynomial) -> Result<Vec<PredictedCycle>> {
    let avg = averaged_amplitude(f)?;
    let fbar = &avg.fbar;
    if fbar.is_zero() {
        return Err(Error::Degenerate(
            "averaged amplitude function vanishes identically".into(),
        ));
    }
    let func = ScalarFn::Poly(fbar.clone());
    let r = 1.0 + fbar.cauchy_bound().max(1.0);
    let dfbar = fbar.derivative();
    let mut out = Vec::new();
    for z in isolate_poly_roots(fbar, Some((0.0, r)), 1e-6)? {
        if z.lo <= 0.0 || !z.transversal {
            continue;
        }
        let z = refine(&func, &z, 1e-14 * (1.0 + z.mid().abs()))?;
        let radius = z.mid();
        let slope = dfbar.eval(radius);
        let stability = if slope > 0.0 {
            Stability::Stable
        } else if slope < 0.0 {
            Stability::Unstable
        } else {
            Stability::Neutral
        };
        out.push(PredictedCycle {
            radius,
            slope,
            stability,
        });
    }
    Ok(out)
}

/// `A` that reproduces the `x / 200` term of the counterexample
/// primitive (under its `1 / pi` factor).
pub const DEFAULT_A: f64 = 1.0 / (100.0 * PI);
/// `B` that reproduces the `x^3 / 2` term.
pub const DEFAULT_B: f64 = 2.0 / PI;

/// Even part of the counterexample damping, chosen so that
/// `a_{2l} I_{2l}` equals `-4/81, 49/81, -14/9, 1`.
pub fn counterexample_even_part() -> Polynomial {
    let products = [-4.0 / 81.0, 49.0 / 81.0, -14.0 / 9.0, 1.0];
    let mut c = vec![0.0; 7];
    for (l, p) in products.iter().enumerate() {
        let m = wallis_moment(l as u32).expect("small index");
        c[2 * l] = p / m;
    }
    Polynomial::new(c)
}

/// Counterexample damping `sum a_{2l} x^{2l} + A x + B x^3` (before
/// scaling by `eps`).
pub fn counterexample_damping(a: f64, b: f64) -> Polynomial {
    let mut c = counterexample_even_part().coeffs().to_vec();
    c[1] += a;
    c[3] += b;
    Polynomial::new(c)
}

/// `x'' + eps f(x) x' + x = 0` with the counterexample damping.
pub fn duff_levinson_system(eps: f64, a: f64, b: f64) -> Result<LienardSystem> {
    if !(eps.is_finite() && a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("counterexample parameter"));
    }
    let f = counterexample_damping(a, b).scale(eps);
    LienardSystem::with_damping(ScalarFn::Poly(f), ScalarFn::poly(vec![0.0, 1.0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wallis_small_indices() {
        let expect = [(0, 1.0), (1, 0.25), (2, 0.125), (3, 5.0 / 64.0)];
        for (k, m) in expect {
            assert_eq!(wallis_pi_multiple(k).unwrap().to_f64().unwrap(), m);
        }
        assert!(wallis_moment(MAX_WALLIS_K + 1).is_err());
        assert!(wallis_moment(MAX_WALLIS_K).unwrap() > 0.0);
    }

    #[test]
    fn counterexample_products() {
        let avg = averaged_amplitude(&counterexample_even_part()).unwrap();
        let want = [0.0, -4.0 / 81.0, 0.0, 49.0 / 81.0, 0.0, -14.0 / 9.0, 0.0, 1.0];
        for (k, w) in want.iter().enumerate() {
            let got = avg.fbar.coeff(k);
            assert!((got - w).abs() <= 1e-12 * w.abs(), "coefficient {k}: {got} vs {w}");
        }
        let radii: Vec<f64> = predict_cycles(&counterexample_even_part())
            .unwrap()
            .iter()
            .map(|c| c.radius)
            .collect();
        assert_eq!(radii.len(), 3);
        for (r, w) in radii.iter().zip([1.0 / 3.0, 2.0 / 3.0, 1.0]) {
            assert!((r - w).abs() < 1e-9);
        }
    }

    #[test]
    fn odd_terms_drop_out() {
        let avg = averaged_amplitude(&Polynomial::x()).unwrap();
        assert!(avg.fbar.is_zero());
        assert!(matches!(predict_cycles(&Polynomial::x()), Err(Error::Degenerate(_))));
        let with_ab = averaged_amplitude(&counterexample_damping(DEFAULT_A, DEFAULT_B)).unwrap();
        let plain = averaged_amplitude(&counterexample_even_part()).unwrap();
        assert_eq!(with_ab.fbar, plain.fbar);
    }

    #[test]
    fn van_der_pol_prediction() {
        let p = predict_cycles(&Polynomial::new(vec![-1.0, 0.0, 1.0])).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[0].radius - 2.0).abs() < 1e-12);
        assert_eq!(p[0].stability, Stability::Stable);
        assert!(predict_cycles(&Polynomial::monomial(1.0, 2)).unwrap().is_empty());
    }

    #[test]
    fn counterexample_stability_alternates() {
        let p = predict_cycles(&counterexample_even_part()).unwrap();
        let s: Vec<Stability> = p.iter().map(|c| c.stability).collect();
        assert_eq!(s, [Stability::Stable, Stability::Unstable, Stability::Stable]);
    }

    #[test]
    fn reference_primitive_is_reproduced() {
        let sys = duff_levinson_system(1.0, DEFAULT_A, DEFAULT_B).unwrap();
        let big_f = sys.damping_primitive().as_polynomial().unwrap();
        let want = [
            0.0,
            -4.0 / 81.0,
            1.0 / 200.0,
            196.0 / 243.0,
            0.5,
            -112.0 / 45.0,
            0.0,
            64.0 / 35.0,
        ];
        for (k, w) in want.iter().enumerate() {
            let got = big_f.coeff(k) * PI;
            assert!((got - w).abs() <= 1e-14 * (1.0 + w.abs()), "x^{k}: {got} vs {w}");
        }
    }

    #[test]
    fn zero_eps_is_a_center() {
        let sys = duff_levinson_system(0.0, DEFAULT_A, DEFAULT_B).unwrap();
        assert!(sys.damping_primitive().as_polynomial().unwrap().is_zero());
    }
}
