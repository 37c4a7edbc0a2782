//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's numerics: polynomials are evaluated
//! with a local Horner loop, quadrature is adaptive Simpson and trajectories
//! come from fixed-step classical Runge–Kutta.

#![allow(dead_code)]

use lienard::hypo::{analyze, Tristate};
use lienard::{LienardSystem, ScalarFn};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &p) in a.iter().enumerate() {
        for (j, &q) in b.iter().enumerate() {
            out[i + j] += p * q;
        }
    }
    out
}

pub fn antiderivative(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend(c.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64));
    out
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature. The interval is first cut into a few
/// unequal panels so symmetric integrands cannot fool the first estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    const CUTS: [f64; 8] = [0.0, 0.113, 0.247, 0.391, 0.52, 0.655, 0.809, 1.0];
    let panels = CUTS.len() - 1;
    let mut sum = 0.0;
    for w in CUTS.windows(2) {
        let (p, q) = (a + (b - a) * w[0], a + (b - a) * w[1]);
        let (fp, fq, fm) = (f(p), f(q), f(0.5 * (p + q)));
        let whole = (q - p) / 6.0 * (fp + 4.0 * fm + fq);
        sum += simpson_rec(&f, p, q, fp, fm, fq, whole, tol / panels as f64, 48);
    }
    sum
}

/// Points where `f` changes sign on a uniform scan with spacing `step`,
/// each located to the midpoint of its scan cell.
pub fn sign_scan<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil() as usize;
    let mut out = Vec::new();
    let mut prev = (lo, f(lo));
    for i in 1..=n {
        let x = (lo + step * i as f64).min(hi);
        let v = f(x);
        if v == 0.0 {
            out.push(x);
        } else if prev.1 != 0.0 && (prev.1 < 0.0) != (v < 0.0) {
            out.push(0.5 * (prev.0 + x));
        }
        prev = (x, v);
    }
    out
}

/// Fixed-step RK4 for `x' = y - F(x)`, `y' = -g(x)` with both functions
/// given by closures.
pub struct Rk4<'a> {
    pub big_f: &'a dyn Fn(f64) -> f64,
    pub g: &'a dyn Fn(f64) -> f64,
}

impl Rk4<'_> {
    fn rhs(&self, x: f64, y: f64) -> (f64, f64) {
        (y - (self.big_f)(x), -(self.g)(x))
    }

    pub fn step(&self, x: f64, y: f64, h: f64) -> (f64, f64) {
        let k1 = self.rhs(x, y);
        let k2 = self.rhs(x + 0.5 * h * k1.0, y + 0.5 * h * k1.1);
        let k3 = self.rhs(x + 0.5 * h * k2.0, y + 0.5 * h * k2.1);
        let k4 = self.rhs(x + h * k3.0, y + h * k3.1);
        (
            x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            y + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )
    }

    /// Runs `t_settle` to let transients die, then returns the largest `x`
    /// seen over a further `t_measure`, with the peak located by a parabola
    /// through the three samples around it.
    pub fn settled_amplitude(&self, x0: f64, h: f64, t_settle: f64, t_measure: f64) -> f64 {
        let (mut x, mut y) = (x0, 0.0);
        for _ in 0..(t_settle / h).round() as usize {
            (x, y) = self.step(x, y, h);
        }
        let mut best = f64::NEG_INFINITY;
        let (mut a, mut b) = (x, x);
        for _ in 0..(t_measure / h).round() as usize {
            (x, y) = self.step(x, y, h);
            if b >= a && b >= x {
                let denom = a - 2.0 * b + x;
                let peak = if denom < 0.0 { b - 0.125 * (x - a).powi(2) / denom } else { b };
                best = best.max(peak);
            }
            a = b;
            b = x;
        }
        best
    }
}

/// An asymmetric test system: `F = x (x - x1)(x - x2)(c + d x^2)` and
/// `g = x (1 + a x + b x^2)` with `a^2 < 4 b`.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub seed_index: usize,
    pub x1: f64,
    pub x2: f64,
    pub big_f: Vec<f64>,
    pub g: Vec<f64>,
    pub system: LienardSystem,
}

fn draw(rng: &mut ChaCha8Rng) -> (f64, f64, Vec<f64>, Vec<f64>) {
    let x1 = rng.gen_range(0.4..1.6);
    let x2 = -rng.gen_range(0.4..1.6);
    let c = rng.gen_range(0.3..1.2);
    let d = if rng.gen_bool(0.5) { rng.gen_range(0.0..0.3) } else { 0.0 };
    let b: f64 = rng.gen_range(0.0..0.5);
    let a = if b > 0.0 { 1.8 * b.sqrt() * rng.gen_range(-1.0..1.0) } else { 0.0 };
    let core = poly_mul(&poly_mul(&[0.0, 1.0], &[-x1, 1.0]), &[-x2, 1.0]);
    let big_f = poly_mul(&core, &[c, 0.0, d]);
    let g = vec![0.0, 1.0, a, b];
    (x1, x2, big_f, g)
}

/// `n` systems with (B), (C), (E) holding and (D) failing, drawn from a
/// fixed seed.
pub fn asymmetric_corpus(n: usize, seed: u64) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        assert!(attempts < 50 * n, "rejection sampling is not converging");
        let (x1, x2, big_f, g) = draw(&mut rng);
        let system = LienardSystem::with_primitive(ScalarFn::poly(big_f.clone()), ScalarFn::poly(g.clone()))
            .expect("valid system");
        let report = analyze(&system).expect("analysis runs");
        let d_fails = report.d.map(|d| d.status == Tristate::Fails).unwrap_or(false);
        if report.b.holds() && report.c.status.holds() && report.e.holds() && d_fails {
            out.push(CorpusEntry {
                seed_index: attempts,
                x1,
                x2,
                big_f,
                g,
                system,
            });
        }
    }
    out
}

/// A restoring force `x (1 + a x + b x^2)` with `x g(x) > 0` for `x != 0`.
pub fn random_restoring(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let b: f64 = rng.gen_range(0.0..1.0);
    let a = 1.9 * b.sqrt() * rng.gen_range(-1.0..1.0);
    let k = rng.gen_range(0.5..2.0);
    vec![0.0, k, k * a, k * b]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
