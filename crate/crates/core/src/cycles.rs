//! Return map on the half-line `{y = 0, x > 0}` and limit-cycle detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::LienardSystem;
use crate::hypo::{CrossingDirection, HypothesisReport};
use crate::ode::{crossing_in_segment, DenseSegment, Direction, OdeOptions, Section, State, Stepper};

/// Stability of a fixed point of the return map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
    #[serde(rename = "neutral-within-tolerance")]
    Neutral,
}

/// Settings for the return map and the cycle search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleOptions {
    pub ode: OdeOptions,
    /// Tighter tolerances used for the finite-difference multiplier.
    pub fd_ode: OdeOptions,
    /// Time limit for a single revolution.
    pub t_max: f64,
    /// Bracket width, relative to `x`, at which bisection stops.
    pub bisect_rel: f64,
    /// Relative finite-difference step for the multiplier.
    pub fd_rel: f64,
    /// Neutral band around a unit multiplier.
    pub theta: f64,
    /// Displacements below `noise_rel * (1 + x)` count as zero on the grid.
    pub noise_rel: f64,
    /// Relative tolerance of the cycle integrals.
    pub integral_rel: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions {
            ode: OdeOptions::default(),
            fd_ode: OdeOptions::with_tolerances(1e-12, 1e-12),
            t_max: 500.0,
            bisect_rel: 1e-8,
            fd_rel: 1e-5,
            theta: 1e-4,
            noise_rel: 1e-8,
            integral_rel: 1e-6,
        }
    }
}

impl CycleOptions {
    /// Defaults with the given integrator tolerances for the search.
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        CycleOptions {
            ode: OdeOptions::with_tolerances(abs_tol, rel_tol),
            fd_ode: OdeOptions::with_tolerances(abs_tol.min(1e-12), rel_tol.min(1e-12)),
            ..Default::default()
        }
    }
}

/// One evaluation of the return map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapSample {
    pub x_in: f64,
    pub x_out: f64,
    pub period: f64,
}

impl ReturnMapSample {
    pub fn displacement(&self) -> f64 {
        self.x_out - self.x_in
    }
}

/// Why the orbit did not come back to the section.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoReturnReason {
    TimeLimit,
    Escaped,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReturnOutcome {
    Returned(ReturnMapSample),
    NoReturn { reason: NoReturnReason, last: State },
}

/// One revolution from `(x0, 0)` with the dense segments that cover it.
struct Revolution {
    segments: Vec<DenseSegment>,
    end: State,
}

fn revolve(sys: &LienardSystem, x0: f64, t_max: f64, ode: OdeOptions, keep: bool) -> Result<std::result::Result<Revolution, (NoReturnReason, State)>> {
    let init = State::new(0.0, x0, 0.0);
    let mut stepper = Stepper::new(sys, init, ode)?;
    let mut segments = Vec::new();
    while stepper.state().t < t_max {
        let seg = match stepper.step(t_max) {
            Ok(seg) => seg,
            Err(Error::Divergence { t, x, y }) => {
                return Ok(Err((NoReturnReason::Escaped, State::new(t, x, y))))
            }
            Err(e) => return Err(e),
        };
        if keep {
            segments.push(seg);
        }
        if let Some(hit) = crossing_in_segment(&seg, Section::PositiveXAxis, Direction::Decreasing, 0.0) {
            return Ok(Ok(Revolution { segments, end: hit }));
        }
    }
    Ok(Err((NoReturnReason::TimeLimit, stepper.state())))
}

fn check_start(x0: f64) -> Result<()> {
    if x0 > 0.0 && x0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("section point must be positive, got {x0}")))
    }
}

fn return_map_with(sys: &LienardSystem, x0: f64, t_max: f64, ode: OdeOptions) -> Result<ReturnOutcome> {
    check_start(x0)?;
    Ok(match revolve(sys, x0, t_max, ode, false)? {
        Ok(rev) => ReturnOutcome::Returned(ReturnMapSample {
            x_in: x0,
            x_out: rev.end.x,
            period: rev.end.t,
        }),
        Err((reason, last)) => ReturnOutcome::NoReturn { reason, last },
    })
}

/// Follows the orbit of `(x0, 0)` once around the origin back to the
/// positive `x` axis.
pub fn return_map(sys: &LienardSystem, x0: f64, opts: &CycleOptions) -> Result<ReturnOutcome> {
    return_map_with(sys, x0, opts.t_max, opts.ode)
}

fn returned(sys: &LienardSystem, x0: f64, t_max: f64, ode: OdeOptions) -> Result<ReturnMapSample> {
    match return_map_with(sys, x0, t_max, ode)? {
        ReturnOutcome::Returned(s) => Ok(s),
        ReturnOutcome::NoReturn { reason, last } => Err(Error::RetriesExhausted(format!(
            "orbit from x = {x0} did not return ({reason:?}, last state {last:?})"
        ))),
    }
}

/// Derivative of the return map at `x` by a central difference, and the
/// resulting classification.
pub fn return_map_derivative(sys: &LienardSystem, x: f64, opts: &CycleOptions) -> Result<f64> {
    check_start(x)?;
    let h = opts.fd_rel * x;
    let plus = returned(sys, x + h, opts.t_max, opts.fd_ode)?;
    let minus = returned(sys, x - h, opts.t_max, opts.fd_ode)?;
    Ok((plus.x_out - minus.x_out) / (2.0 * h))
}

pub fn classify_multiplier(multiplier: f64, theta: f64) -> Stability {
    if multiplier < 1.0 - theta {
        Stability::Stable
    } else if multiplier > 1.0 + theta {
        Stability::Unstable
    } else {
        Stability::Neutral
    }
}

pub fn classify_stability(sys: &LienardSystem, x_fixed: f64, opts: &CycleOptions) -> Result<Stability> {
    Ok(classify_multiplier(return_map_derivative(sys, x_fixed, opts)?, opts.theta))
}

/// A detected limit cycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// Fixed point of the return map on the positive `x` axis.
    pub x_fixed: f64,
    pub period: f64,
    pub stability: Stability,
    /// Derivative of the return map at the fixed point.
    pub multiplier: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// `x_max >= x1`, when the zeros of `F` are known.
    pub crosses_x1: Option<bool>,
    /// `x_min <= x2`, when the zeros of `F` are known.
    pub crosses_x2: Option<bool>,
    /// Integral of `g(x) F(x)` over one period.
    pub integral_gf: f64,
    /// Integral of `g(x)` over one period.
    pub integral_g: f64,
    /// Absolute tolerance the two integrals are held to.
    pub integral_tol: f64,
    /// `|P(x_fixed) - x_fixed|`
    pub residual: f64,
}

impl CycleRecord {
    pub fn integrals_vanish(&self) -> bool {
        self.integral_g.abs() <= self.integral_tol && self.integral_gf.abs() <= self.integral_tol
    }

    pub fn crosses_both(&self) -> bool {
        self.crosses_x1 == Some(true) && self.crosses_x2 == Some(true)
    }
}

/// Grid point at which the return map could not be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGap {
    pub x: f64,
    pub reason: String,
}

/// Outcome of [`find_cycles`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleSearch {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_grid: usize,
    pub records: Vec<CycleRecord>,
    pub samples: Vec<ReturnMapSample>,
    pub gaps: Vec<GridGap>,
}

// Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Orbit geometry and integrals over one revolution.
#[derive(Clone, Copy, Debug, PartialEq)]
struct OrbitSummary {
    period: f64,
    x_out: f64,
    x_min: f64,
    x_max: f64,
    integral_g: f64,
    integral_gf: f64,
    scale: f64,
}

fn summarize(sys: &LienardSystem, x0: f64, opts: &CycleOptions) -> Result<OrbitSummary> {
    let rev = match revolve(sys, x0, opts.t_max, opts.fd_ode, true)? {
        Ok(r) => r,
        Err((reason, last)) => {
            return Err(Error::RetriesExhausted(format!(
                "cycle orbit from x = {x0} did not return ({reason:?}, last state {last:?})"
            )))
        }
    };
    let g = sys.restoring_pieces();
    let big_f = sys.primitive_pieces();
    let t_end = rev.end.t;
    let (mut x_min, mut x_max) = (x0, x0);
    let (mut ig, mut igf) = (0.0, 0.0);
    let mut gmax: f64 = 0.0;
    let mut gfmax: f64 = 0.0;
    let turn = |s: &State| s.y - big_f.eval(s.x);
    for seg in &rev.segments {
        let (a, b) = (seg.t0, seg.t1().min(t_end));
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        for (node, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let (x, _) = seg.eval(a + half * (node + 1.0));
            let gx = g.eval(x);
            let gf = gx * big_f.eval(x);
            ig += w * half * gx;
            igf += w * half * gf;
            gmax = gmax.max(gx.abs());
            gfmax = gfmax.max(gf.abs());
        }
        // Extremes of x sit where x' = y - F(x) changes sign.
        const SUB: usize = 8;
        let mut prev = seg.state_at(a);
        let mut vp = turn(&prev);
        for j in 1..=SUB {
            let t = a + (b - a) * j as f64 / SUB as f64;
            let cur = seg.state_at(t);
            let vc = turn(&cur);
            x_min = x_min.min(cur.x);
            x_max = x_max.max(cur.x);
            if vp != 0.0 && vc != 0.0 && vp.signum() != vc.signum() {
                let (mut lo, mut hi, mut flo) = (prev.t, t, vp);
                for _ in 0..60 {
                    let m = 0.5 * (lo + hi);
                    let fm = turn(&seg.state_at(m));
                    if fm == 0.0 {
                        lo = m;
                        hi = m;
                        break;
                    }
                    if fm.signum() == flo.signum() {
                        lo = m;
                        flo = fm;
                    } else {
                        hi = m;
                    }
                }
                let ext = seg.state_at(0.5 * (lo + hi));
                x_min = x_min.min(ext.x);
                x_max = x_max.max(ext.x);
            }
            prev = cur;
            vp = vc;
        }
    }
    Ok(OrbitSummary {
        period: t_end,
        x_out: rev.end.x,
        x_min,
        x_max,
        integral_g: ig,
        integral_gf: igf,
        scale: t_end * (1.0 + gmax + gfmax),
    })
}

/// `(integral of g, integral of g F)` over the orbit of `(x_fixed, 0)` up to
/// its first return.
pub fn cycle_integrals(sys: &LienardSystem, x_fixed: f64, opts: &CycleOptions) -> Result<(f64, f64)> {
    check_start(x_fixed)?;
    let s = summarize(sys, x_fixed, opts)?;
    Ok((s.integral_g, s.integral_gf))
}

fn build_record(
    sys: &LienardSystem,
    x_fixed: f64,
    lines: Option<(f64, f64)>,
    opts: &CycleOptions,
) -> Result<CycleRecord> {
    let s = summarize(sys, x_fixed, opts)?;
    let multiplier = return_map_derivative(sys, x_fixed, opts)?;
    let residual = returned(sys, x_fixed, opts.t_max, opts.ode)?.displacement().abs();
    Ok(CycleRecord {
        x_fixed,
        period: s.period,
        stability: classify_multiplier(multiplier, opts.theta),
        multiplier,
        x_min: s.x_min,
        x_max: s.x_max,
        crosses_x1: lines.map(|(_, x1)| s.x_max >= x1),
        crosses_x2: lines.map(|(x2, _)| s.x_min <= x2),
        integral_gf: s.integral_gf,
        integral_g: s.integral_g,
        integral_tol: opts.integral_rel * s.scale,
        residual,
    })
}

fn sign_with_floor(d: f64, x: f64, noise_rel: f64) -> i8 {
    if d.abs() <= noise_rel * (1.0 + x) {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

// Longest run of negligible displacements a bracket may span; longer runs
// indicate a band of closed orbits rather than an isolated cycle.
const MAX_FLAT_RUN: usize = 2;

fn bisect(
    sys: &LienardSystem,
    mut a: f64,
    mut b: f64,
    mut sa: i8,
    opts: &CycleOptions,
) -> Result<f64> {
    while b - a > opts.bisect_rel * b {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let d = returned(sys, m, opts.t_max, opts.ode)?.displacement();
        let sm = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            return Ok(m);
        };
        if sm == sa {
            a = m;
            sa = sm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Scans `[x_lo, x_hi]` on `n_grid` points for sign changes of the
/// displacement `P(x) - x`, and bisects each one to a fixed point.
///
/// `lines` holds `(x2, x1)` when the zeros of `F` are known; records then
/// carry the intersection flags.
pub fn find_cycles(
    sys: &LienardSystem,
    x_lo: f64,
    x_hi: f64,
    n_grid: usize,
    lines: Option<(f64, f64)>,
    opts: &CycleOptions,
) -> Result<CycleSearch> {
    if !(x_lo > 0.0 && x_hi > x_lo && x_hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "search range must satisfy 0 < lo < hi, got ({x_lo}, {x_hi})"
        )));
    }
    if n_grid < 8 {
        return Err(Error::InvalidArgument(format!("grid needs at least 8 points, got {n_grid}")));
    }
    let xs: Vec<f64> = (0..n_grid)
        .map(|i| x_lo + (x_hi - x_lo) * i as f64 / (n_grid - 1) as f64)
        .collect();
    let evals: Vec<(f64, Result<ReturnOutcome>)> = xs
        .par_iter()
        .map(|&x| (x, return_map(sys, x, opts)))
        .collect();

    let mut samples = Vec::new();
    let mut gaps = Vec::new();
    // (x, sign) for usable grid points in order; gaps break the sequence.
    let mut usable: Vec<Option<(f64, i8)>> = Vec::with_capacity(n_grid);
    for (x, out) in evals {
        match out {
            Ok(ReturnOutcome::Returned(s)) => {
                samples.push(s);
                usable.push(Some((x, sign_with_floor(s.displacement(), x, opts.noise_rel))));
            }
            Ok(ReturnOutcome::NoReturn { reason, .. }) => {
                gaps.push(GridGap {
                    x,
                    reason: format!("no return: {reason:?}"),
                });
                usable.push(None);
            }
            Err(e) if e.is_numerical() => {
                gaps.push(GridGap { x, reason: e.to_string() });
                usable.push(None);
            }
            Err(e) => return Err(e),
        }
    }

    let mut brackets = Vec::new();
    let mut last: Option<(f64, i8)> = None;
    let mut flat = 0usize;
    for p in &usable {
        match p {
            None => {
                last = None;
                flat = 0;
            }
            Some((_, 0)) => {
                flat += 1;
                if flat > MAX_FLAT_RUN {
                    last = None;
                }
            }
            Some((x, s)) => {
                if let Some((xa, sa)) = last {
                    if sa != *s {
                        brackets.push((xa, *x, sa));
                    }
                }
                last = Some((*x, *s));
                flat = 0;
            }
        }
    }

    let refined: Vec<(f64, Result<f64>)> = brackets
        .par_iter()
        .map(|&(a, b, sa)| (a, bisect(sys, a, b, sa, opts)))
        .collect();
    let mut records = Vec::new();
    for (a, r) in refined {
        let record = r.and_then(|x| build_record(sys, x, lines, opts));
        match record {
            Ok(rec) => records.push(rec),
            Err(e) if e.is_numerical() => gaps.push(GridGap {
                x: a,
                reason: format!("bracket refinement failed: {e}"),
            }),
            Err(e) => return Err(e),
        }
    }
    records.sort_by(|p, q| p.x_fixed.total_cmp(&q.x_fixed));
    Ok(CycleSearch {
        x_lo,
        x_hi,
        n_grid,
        records,
        samples,
        gaps,
    })
}

/// Heuristic section range: `hi = 2 (1 + max(|x1|, |x2|))` when the zeros of
/// `F` are known, else 10; `lo = hi / 100`.
pub fn default_search_range(report: Option<&HypothesisReport>) -> (f64, f64) {
    let hi = match report.and_then(HypothesisReport::roots) {
        Some((x2, x1)) => 2.0 * (1.0 + x1.abs().max(x2.abs())),
        None => 10.0,
    };
    (hi / 100.0, hi)
}

/// Per-cycle outcome of the intersection check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionCheck {
    pub x_fixed: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub crosses_x1: bool,
    pub crosses_x2: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proposition1Check {
    pub direction: CrossingDirection,
    pub cycles: Vec<IntersectionCheck>,
    pub pass: bool,
}

/// Checks each cycle against the lines it is predicted to cross.
pub fn verify_proposition1(
    records: &[CycleRecord],
    x1: f64,
    x2: f64,
    direction: CrossingDirection,
) -> Proposition1Check {
    let cycles: Vec<IntersectionCheck> = records
        .iter()
        .map(|r| {
            let c1 = r.x_max >= x1;
            let c2 = r.x_min <= x2;
            let pass = match direction {
                CrossingDirection::MustCrossX1 => c1,
                CrossingDirection::MustCrossX2 => c2,
                CrossingDirection::MustCrossBoth => c1 && c2,
                CrossingDirection::None => true,
            };
            IntersectionCheck {
                x_fixed: r.x_fixed,
                x_min: r.x_min,
                x_max: r.x_max,
                crosses_x1: c1,
                crosses_x2: c2,
                pass,
            }
        })
        .collect();
    Proposition1Check {
        direction,
        pass: cycles.iter().all(|c| c.pass),
        cycles,
    }
}

/// Cycle counts split by which of the lines `x = x2`, `x = x1` they cross.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCounts {
    pub total: usize,
    pub both: usize,
    pub only_x1: usize,
    pub only_x2: usize,
    pub neither: usize,
}

pub fn count_cycles(records: &[CycleRecord], x2: f64, x1: f64) -> CycleCounts {
    let mut c = CycleCounts {
        total: records.len(),
        ..Default::default()
    };
    for r in records {
        match (r.x_max >= x1, r.x_min <= x2) {
            (true, true) => c.both += 1,
            (true, false) => c.only_x1 += 1,
            (false, true) => c.only_x2 += 1,
            (false, false) => c.neither += 1,
        }
    }
    c
}

/// Dense samples of the orbit of `(x0, 0)` over one revolution.
pub fn closed_orbit(sys: &LienardSystem, x0: f64, per_step: usize, opts: &CycleOptions) -> Result<Vec<State>> {
    check_start(x0)?;
    let rev = match revolve(sys, x0, opts.t_max, opts.ode, true)? {
        Ok(r) => r,
        Err((reason, _)) => {
            return Err(Error::RetriesExhausted(format!("orbit from x = {x0} did not return ({reason:?})")))
        }
    };
    let n = per_step.max(1);
    let mut out = vec![State::new(0.0, x0, 0.0)];
    for seg in &rev.segments {
        let b = seg.t1().min(rev.end.t);
        for j in 1..=n {
            let t = seg.t0 + (b - seg.t0) * j as f64 / n as f64;
            if t > out.last().map_or(f64::NEG_INFINITY, |s| s.t) {
                out.push(seg.state_at(t));
            }
        }
    }
    Ok(out)
}
