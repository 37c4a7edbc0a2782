//! One function per subcommand. Each returns the JSON report it wrote.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use lienard::avg::{averaged_amplitude, counterexample_damping, duff_levinson_system, predict_cycles};
use lienard::cycles::{
    closed_orbit, count_cycles, default_search_range, find_cycles, verify_proposition1, CycleOptions,
};
use lienard::deform::{deform_f_scale, deform_g_lambda, poly_deform, theorem5_pipeline, DeformOutcome};
use lienard::hypo::{analyze_with, AnalyzeOptions, HypothesisReport};
use lienard::ode::{integrate, OdeOptions, State};
use lienard::{Error, LienardSystem, Polynomial, SystemSpec};

use crate::output::{cell, csv_writer, to_value, write_json, SCHEMA};

/// Settings shared by every subcommand.
#[derive(Clone, Copy, Debug)]
pub struct Common {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub tol_d: f64,
    pub seed: Option<u64>,
}

impl Common {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("--tol-abs", self.tol_abs), ("--tol-rel", self.tol_rel), ("--tol-D", self.tol_d)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")).into());
            }
        }
        Ok(())
    }

    fn analyze_options(&self) -> AnalyzeOptions {
        AnalyzeOptions {
            d_tol: self.tol_d,
            ..Default::default()
        }
    }

    fn cycle_options(&self) -> CycleOptions {
        CycleOptions::with_tolerances(self.tol_abs, self.tol_rel)
    }

    fn header(&self, command: &str) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("schema".into(), json!(SCHEMA));
        m.insert("command".into(), json!(command));
        m.insert("seed".into(), json!(self.seed));
        m
    }
}

pub fn load_system(path: &Path) -> Result<LienardSystem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: SystemSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing system spec {}", path.display()))?;
    Ok(LienardSystem::from_spec(spec)?)
}

fn analysis_fields(m: &mut Map<String, Value>, report: &HypothesisReport) -> Result<()> {
    m.insert("verdict".into(), to_value(&report.verdict)?);
    m.insert("prop1_direction".into(), to_value(&report.prop1_direction)?);
    m.insert("hypotheses".into(), to_value(&report.entries())?);
    m.insert("existence_note".into(), json!(report.existence_note));
    m.insert("analyze_options".into(), to_value(&report.options)?);
    Ok(())
}

pub fn analyze(common: &Common, system: &Path, out: Option<&Path>) -> Result<Value> {
    let sys = load_system(system)?;
    let report = analyze_with(&sys, common.analyze_options())?;
    let mut m = common.header("analyze");
    m.insert("system".into(), to_value(sys.spec())?);
    analysis_fields(&mut m, &report)?;
    finish(m, out)
}

pub struct SimulateArgs {
    pub x0: f64,
    pub y0: f64,
    pub t_end: f64,
    pub dt: Option<f64>,
}

pub fn simulate(
    common: &Common,
    system: &Path,
    args: &SimulateArgs,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<Value> {
    let sys = load_system(system)?;
    let init = State::new(0.0, args.x0, args.y0);
    let opts = OdeOptions::with_tolerances(common.tol_abs, common.tol_rel);
    let traj = integrate(&sys, init, args.t_end, opts)?;
    let rows: Vec<State> = match args.dt {
        Some(dt) if !(dt > 0.0 && dt.is_finite()) => {
            return Err(Error::InvalidArgument(format!("--dt must be positive, got {dt}")).into())
        }
        Some(dt) => {
            let n = (args.t_end / dt).floor() as usize;
            let mut v: Vec<State> = (0..=n).map(|i| traj.state_at(i as f64 * dt)).collect();
            if v.last().is_none_or(|s| s.t < args.t_end) {
                v.push(traj.last());
            }
            v
        }
        None => traj.samples.clone(),
    };
    if let Some(path) = csv {
        let mut w = csv_writer(path, &["t", "x", "y"])?;
        for s in &rows {
            w.write_record([cell(s.t), cell(s.x), cell(s.y)])?;
        }
        w.flush()?;
    }
    let last = traj.last();
    let mut m = common.header("simulate");
    m.insert("system".into(), to_value(sys.spec())?);
    m.insert("initial".into(), to_value(&init)?);
    m.insert("final".into(), to_value(&last)?);
    m.insert(
        "energy".into(),
        json!({"initial": sys.energy(init.x, init.y), "final": sys.energy(last.x, last.y)}),
    );
    m.insert("rows".into(), json!(rows.len()));
    m.insert("stats".into(), to_value(&traj.stats)?);
    m.insert("ode_options".into(), to_value(&opts)?);
    finish(m, out)
}

pub struct CyclesArgs {
    pub range: Option<(f64, f64)>,
    pub grid: usize,
}

fn cycles_report(
    common: &Common,
    sys: &LienardSystem,
    args: &CyclesArgs,
    csv: Option<&Path>,
) -> Result<Map<String, Value>> {
    let report = analyze_with(sys, common.analyze_options())?;
    let (lo, hi) = args.range.unwrap_or_else(|| default_search_range(Some(&report)));
    let opts = common.cycle_options();
    let lines = report.roots();
    let search = find_cycles(sys, lo, hi, args.grid, lines, &opts)?;

    if let Some(path) = csv {
        let mut w = csv_writer(path, &["cycle", "t", "x", "y"])?;
        for (i, rec) in search.records.iter().enumerate() {
            for s in closed_orbit(sys, rec.x_fixed, 8, &opts)? {
                w.write_record([i.to_string(), cell(s.t), cell(s.x), cell(s.y)])?;
            }
        }
        w.flush()?;
    }

    let mut m = common.header("cycles");
    m.insert("system".into(), to_value(sys.spec())?);
    analysis_fields(&mut m, &report)?;
    m.insert("range".into(), json!([lo, hi]));
    m.insert("grid".into(), json!(args.grid));
    m.insert("cycle_options".into(), to_value(&opts)?);
    m.insert("lines".into(), json!(lines.map(|(x2, x1)| json!({"x2": x2, "x1": x1}))));
    m.insert("count".into(), json!(search.records.len()));
    m.insert("cycles".into(), to_value(&search.records)?);
    m.insert("gaps".into(), to_value(&search.gaps)?);
    m.insert("return_map".into(), to_value(&search.samples)?);
    let (counts, prop1) = match lines {
        Some((x2, x1)) => (
            Some(count_cycles(&search.records, x2, x1)),
            Some(verify_proposition1(&search.records, x1, x2, report.prop1_direction)),
        ),
        None => (None, None),
    };
    m.insert("crossing_counts".into(), to_value(&counts)?);
    m.insert("proposition1".into(), to_value(&prop1)?);
    Ok(m)
}

pub fn cycles(
    common: &Common,
    system: &Path,
    args: &CyclesArgs,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<Value> {
    let sys = load_system(system)?;
    let m = cycles_report(common, &sys, args, csv)?;
    finish(m, out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    #[value(name = "g_lambda")]
    GLambda,
    #[value(name = "F_scale")]
    FScale,
    #[value(name = "poly")]
    Poly,
    #[value(name = "theorem5")]
    Theorem5,
}

pub fn deform(common: &Common, system: &Path, kind: Kind, margin: f64, out: Option<&Path>) -> Result<Value> {
    let sys = load_system(system)?;
    let opts = common.analyze_options();
    let outcome: DeformOutcome = match kind {
        Kind::GLambda => deform_g_lambda(&sys, opts)?,
        Kind::FScale => deform_f_scale(&sys, opts)?,
        Kind::Poly => {
            let p = sys.damping_primitive().as_polynomial().ok_or_else(|| {
                Error::InvalidArgument("the poly deformation needs a polynomial F".into())
            })?;
            poly_deform(&p, sys.restoring(), margin, opts)?
        }
        Kind::Theorem5 => theorem5_pipeline(sys.damping(), sys.restoring(), opts)?,
    };
    // The deformed spec sits at the top level so the report loads as input.
    let mut m = match to_value(outcome.system.spec())? {
        Value::Object(spec) => spec,
        _ => unreachable!("a system spec serializes to an object"),
    };
    m.extend(common.header("deform"));
    m.insert("kind".into(), to_value(&outcome.kind)?);
    m.insert("parameter".into(), json!(outcome.parameter));
    m.insert("details".into(), to_value(&outcome.details)?);
    m.insert("source".into(), to_value(sys.spec())?);
    analysis_fields(&mut m, &outcome.certificate)?;
    finish(m, out)
}

pub struct AverageArgs {
    pub eps: f64,
    pub a: f64,
    pub b: f64,
}

pub fn average(common: &Common, system: Option<&Path>, args: &AverageArgs, out: Option<&Path>) -> Result<Value> {
    let f = match system {
        Some(path) => {
            let sys = load_system(path)?;
            if sys.restoring().as_polynomial() != Some(Polynomial::x()) {
                return Err(Error::InvalidArgument("averaging needs the restoring force g(x) = x".into()).into());
            }
            sys.damping()
                .as_polynomial()
                .ok_or_else(|| Error::InvalidArgument("averaging needs a polynomial damping f".into()))?
        }
        None => counterexample_damping(args.a, args.b).scale(args.eps),
    };
    let avg = averaged_amplitude(&f)?;
    let predicted = predict_cycles(&f)?;
    let mut m = common.header("average");
    m.insert("damping".into(), to_value(&f)?);
    m.insert("fbar".into(), to_value(&avg.fbar)?);
    m.insert("moments".into(), to_value(&avg.moments_used)?);
    m.insert("predicted".into(), to_value(&predicted)?);
    finish(m, out)
}

pub struct CounterexampleArgs {
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub chain: bool,
    pub report: Option<PathBuf>,
    pub cycles: CyclesArgs,
}

pub fn counterexample(
    common: &Common,
    args: &CounterexampleArgs,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<Value> {
    if args.chain && out.is_none() {
        return Err(Error::InvalidArgument("--cycles needs --out for the system spec".into()).into());
    }
    let sys = duff_levinson_system(args.eps, args.a, args.b)?;
    let mut spec = common.header("counterexample");
    spec.extend(match to_value(sys.spec())? {
        Value::Object(s) => s,
        _ => unreachable!("a system spec serializes to an object"),
    });
    spec.insert("parameters".into(), json!({"eps": args.eps, "A": args.a, "B": args.b}));
    let spec = finish(spec, out)?;
    if !args.chain {
        return Ok(spec);
    }
    let m = cycles_report(common, &sys, &args.cycles, csv)?;
    finish(m, args.report.as_deref())
}

fn finish(m: Map<String, Value>, out: Option<&Path>) -> Result<Value> {
    let v = Value::Object(m);
    write_json(&v, out)?;
    Ok(v)
}
