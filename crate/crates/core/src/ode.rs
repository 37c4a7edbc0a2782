//! Dormand–Prince 5(4) integration of the Liénard plane system with dense
//! output and section-crossing events.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::LienardSystem;

/// A point of a trajectory in the Liénard plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl State {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        State { t, x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.y.is_finite()
    }
}

/// Integrator tolerances and limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the step size.
    pub h_max: f64,
    pub max_steps: usize,
    /// `|x|` or `|y|` beyond this is reported as divergence.
    pub blowup: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            h_max: 0.25,
            max_steps: 2_000_000,
            blowup: 1e8,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        OdeOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.abs_tol > 0.0 && self.rel_tol >= 0.0 && self.h_max > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "integrator tolerances must be positive: {self:?}"
            )))
        }
    }
}

/// `(y - F(x), -g(x))`
pub fn vector_field(sys: &LienardSystem, x: f64, y: f64) -> (f64, f64) {
    (
        y - sys.primitive_pieces().eval(x),
        -sys.restoring_pieces().eval(x),
    )
}

fn field(sys: &LienardSystem, u: [f64; 2]) -> [f64; 2] {
    let (a, b) = vector_field(sys, u[0], u[1]);
    [a, b]
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Fifth-order continuous extension over one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; 2]; 5],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> State {
        State::new(self.t0, self.rcont[0][0], self.rcont[0][1])
    }

    pub fn end(&self) -> State {
        let (x, y) = self.eval_theta(1.0);
        State::new(self.t1(), x, y)
    }

    fn eval_theta(&self, theta: f64) -> (f64, f64) {
        let th1 = 1.0 - theta;
        let r = &self.rcont;
        let comp = |i: usize| {
            r[0][i] + theta * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i])))
        };
        (comp(0), comp(1))
    }

    /// Interpolated `(x, y)` at time `t` inside the step.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        self.eval_theta((t - self.t0) / self.h)
    }

    pub fn state_at(&self, t: f64) -> State {
        let (x, y) = self.eval(t);
        State::new(t, x, y)
    }
}

/// Step counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Steps cut short to land on the `x = 0` breakpoint.
    pub breakpoint_cuts: usize,
}

/// Adaptive stepper; each call to [`Stepper::step`] returns one accepted step.
pub struct Stepper<'a> {
    sys: &'a LienardSystem,
    opts: OdeOptions,
    t: f64,
    u: [f64; 2],
    k1: [f64; 2],
    h: f64,
    piecewise: bool,
    stats: StepStats,
}

struct Trial {
    u1: [f64; 2],
    k7: [f64; 2],
    err: f64,
    rcont: [[f64; 2]; 5],
}

impl<'a> Stepper<'a> {
    pub fn new(sys: &'a LienardSystem, init: State, opts: OdeOptions) -> Result<Self> {
        opts.validate()?;
        if !init.is_finite() {
            return Err(Error::NonFinite("initial state"));
        }
        let u = [init.x, init.y];
        let k1 = field(sys, u);
        let mut s = Stepper {
            sys,
            opts,
            t: init.t,
            u,
            k1,
            h: 0.0,
            piecewise: sys.is_piecewise(),
            stats: StepStats {
                evaluations: 1,
                ..Default::default()
            },
        };
        s.h = s.initial_step();
        Ok(s)
    }

    pub fn state(&self) -> State {
        State::new(self.t, self.u[0], self.u[1])
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.opts.abs_tol + self.opts.rel_tol * a.abs().max(b.abs())
    }

    fn initial_step(&mut self) -> f64 {
        let n = |v: [f64; 2], s: [f64; 2]| ((v[0] / s[0]).powi(2) + (v[1] / s[1]).powi(2)).sqrt() / 2f64.sqrt();
        let sc = [self.scale(self.u[0], 0.0), self.scale(self.u[1], 0.0)];
        let d0 = n(self.u, sc);
        let d1 = n(self.k1, sc);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.opts.h_max);
        let u1 = [self.u[0] + h0 * self.k1[0], self.u[1] + h0 * self.k1[1]];
        let k2 = field(self.sys, u1);
        self.stats.evaluations += 1;
        let d2 = n([k2[0] - self.k1[0], k2[1] - self.k1[1]], sc) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.opts.h_max)
    }

    fn trial(&mut self, h: f64) -> Trial {
        let (u, k1) = (self.u, self.k1);
        let stage = |w: &[(f64, [f64; 2])]| -> [f64; 2] {
            let mut out = u;
            for (a, k) in w {
                out[0] += h * a * k[0];
                out[1] += h * a * k[1];
            }
            out
        };
        let k2 = field(self.sys, stage(&[(A21, k1)]));
        let k3 = field(self.sys, stage(&[(A31, k1), (A32, k2)]));
        let k4 = field(self.sys, stage(&[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = field(self.sys, stage(&[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
        let k6 = field(
            self.sys,
            stage(&[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]),
        );
        let u1 = stage(&[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
        let k7 = field(self.sys, u1);
        self.stats.evaluations += 6;

        let mut err = 0.0;
        let mut rcont = [[0.0; 2]; 5];
        for i in 0..2 {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.scale(u[i], u1[i]);
            err += (e / sc).powi(2);
            let ydiff = u1[i] - u[i];
            let bspl = h * k1[i] - ydiff;
            rcont[0][i] = u[i];
            rcont[1][i] = ydiff;
            rcont[2][i] = bspl;
            rcont[3][i] = ydiff - h * k7[i] - bspl;
            rcont[4][i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Trial {
            u1,
            k7,
            err: (err / 2.0).sqrt(),
            rcont,
        }
    }

    /// Takes one accepted step, never passing `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseSegment> {
        if self.stats.accepted >= self.opts.max_steps {
            return Err(Error::MaxSteps { t: self.t });
        }
        let h_min = 1e-14 * (1.0 + self.t.abs());
        loop {
            let remaining = t_limit - self.t;
            if remaining <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "step requested past the limit t = {t_limit}"
                )));
            }
            let mut h = self.h.min(self.opts.h_max);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let trial = self.trial(h);
            let err = trial.err;
            if !err.is_finite() {
                self.stats.rejected += 1;
                self.h = 0.1 * h;
                if self.h < h_min {
                    return Err(self.underflow());
                }
                continue;
            }
            if err > 1.0 {
                self.stats.rejected += 1;
                self.h = h * (0.9 * err.powf(-0.2)).max(0.2);
                if self.h < h_min {
                    return Err(self.underflow());
                }
                continue;
            }
            let mut seg = DenseSegment {
                t0: self.t,
                h,
                rcont: trial.rcont,
            };
            let mut u1 = trial.u1;
            let mut k7 = trial.k7;
            if self.piecewise && self.u[0] != 0.0 && self.u[0].signum() != u1[0].signum() {
                // Land on the x = 0 breakpoint so that no step straddles it.
                if let Some(tc) = find_time(&seg, |s| s.x, self.u[0], u1[0]) {
                    let hc = tc - self.t;
                    if hc > h_min && hc < h {
                        let cut = self.trial(hc);
                        if cut.err <= 1.0 {
                            seg = DenseSegment {
                                t0: self.t,
                                h: hc,
                                rcont: cut.rcont,
                            };
                            u1 = cut.u1;
                            k7 = cut.k7;
                            self.stats.breakpoint_cuts += 1;
                        }
                    }
                }
            }
            let h_taken = seg.h;
            self.stats.accepted += 1;
            self.t = if last && h_taken == h { t_limit } else { self.t + h_taken };
            self.u = u1;
            self.k1 = k7;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            self.h = (h * grow).min(self.opts.h_max);
            if self.u[0].abs() > self.opts.blowup || self.u[1].abs() > self.opts.blowup {
                return Err(Error::Divergence {
                    t: self.t,
                    x: self.u[0],
                    y: self.u[1],
                });
            }
            return Ok(seg);
        }
    }

    fn underflow(&self) -> Error {
        Error::StepUnderflow {
            t: self.t,
            x: self.u[0],
            y: self.u[1],
        }
    }
}

/// Locates the time inside `seg` where `event` changes sign between the
/// values `v0` (at `t0`) and `v1` (at `t1`), by Illinois regula falsi.
fn find_time(seg: &DenseSegment, event: impl Fn(&State) -> f64, v0: f64, v1: f64) -> Option<f64> {
    find_time_between(seg, &event, seg.t0, seg.t1(), v0, v1)
}

fn find_time_between(
    seg: &DenseSegment,
    event: &impl Fn(&State) -> f64,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = event(&seg.state_at(c));
        if fc == 0.0 {
            return Some(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if b - a <= 4.0 * f64::EPSILON * (1.0 + b.abs()) {
            break;
        }
    }
    Some(if fa.abs() < fb.abs() { a } else { b })
}

/// Integrated trajectory with per-step dense output.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<State>,
    pub segments: Vec<DenseSegment>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last(&self) -> State {
        *self.samples.last().expect("trajectory has its initial state")
    }

    /// Interpolated state at `t` (clamped to the integrated span).
    pub fn state_at(&self, t: f64) -> State {
        let i = self
            .segments
            .partition_point(|s| s.t1() < t)
            .min(self.segments.len().saturating_sub(1));
        match self.segments.get(i) {
            Some(seg) => seg.state_at(t.clamp(seg.t0, seg.t1())),
            None => self.samples[0],
        }
    }
}

/// Integrates from `init` to `t_max`.
pub fn integrate(
    sys: &LienardSystem,
    init: State,
    t_max: f64,
    opts: OdeOptions,
) -> Result<Trajectory> {
    if t_max.is_nan() || t_max <= init.t {
        return Err(Error::InvalidArgument(format!(
            "t_max = {t_max} must exceed the initial time {}",
            init.t
        )));
    }
    let mut stepper = Stepper::new(sys, init, opts)?;
    let mut samples = vec![init];
    let mut segments = Vec::new();
    while stepper.state().t < t_max {
        let seg = stepper.step(t_max)?;
        segments.push(seg);
        samples.push(stepper.state());
    }
    Ok(Trajectory {
        samples,
        segments,
        stats: stepper.stats(),
    })
}

/// Transversal section for event detection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Section {
    /// The vertical line `x = c`.
    Vertical(f64),
    /// The half-line `{y = 0, x > 0}`.
    PositiveXAxis,
}

impl Section {
    fn value(&self, s: &State) -> f64 {
        match self {
            Section::Vertical(c) => s.x - c,
            Section::PositiveXAxis => s.y,
        }
    }

    fn admits(&self, s: &State) -> bool {
        match self {
            Section::Vertical(_) => true,
            Section::PositiveXAxis => s.x > 0.0,
        }
    }

    /// Residual of the section equation at `s`.
    pub fn residual(&self, s: &State) -> f64 {
        self.value(s).abs()
    }
}

/// Which sign change of the section function counts as a crossing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Increasing,
    Decreasing,
    Either,
}

impl Direction {
    fn accepts(&self, before: f64) -> bool {
        match self {
            Direction::Increasing => before < 0.0,
            Direction::Decreasing => before > 0.0,
            Direction::Either => before != 0.0,
        }
    }
}

/// Result of a section search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Crossing {
    Found(State),
    /// No crossing before the time limit; holds the last state reached.
    NotFound(State),
}

// Sub-samples per step when scanning for sign changes.
const SCAN: usize = 4;

/// Scans one dense segment for the first qualifying crossing strictly after
/// `after`.
pub(crate) fn crossing_in_segment(
    seg: &DenseSegment,
    section: Section,
    direction: Direction,
    after: f64,
) -> Option<State> {
    let mut prev = seg.start();
    let mut vp = section.value(&prev);
    for j in 1..=SCAN {
        let t = if j == SCAN {
            seg.t1()
        } else {
            seg.t0 + seg.h * j as f64 / SCAN as f64
        };
        let cur = seg.state_at(t);
        let vc = section.value(&cur);
        if prev.t >= after
            && direction.accepts(vp)
            && (vc == 0.0 || vc.signum() != vp.signum())
        {
            let tc = find_time_between(seg, &|s: &State| section.value(s), prev.t, t, vp, vc)?;
            let mut hit = seg.state_at(tc);
            if tc > after && section.admits(&hit) {
                if let Section::Vertical(c) = section {
                    hit.x = c;
                }
                return Some(hit);
            }
        }
        prev = cur;
        vp = vc;
    }
    None
}

/// First state after `init.t` (and before `t_max`) on `section`, crossing in
/// the given direction.
pub fn next_section_crossing(
    sys: &LienardSystem,
    init: State,
    section: Section,
    direction: Direction,
    t_max: f64,
    opts: OdeOptions,
) -> Result<Crossing> {
    let mut stepper = Stepper::new(sys, init, opts)?;
    while stepper.state().t < t_max {
        let seg = stepper.step(t_max)?;
        if let Some(hit) = crossing_in_segment(&seg, section, direction, init.t) {
            return Ok(Crossing::Found(hit));
        }
    }
    Ok(Crossing::NotFound(stepper.state()))
}
