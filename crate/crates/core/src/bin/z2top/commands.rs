use std::fmt::Write;

use serde::Serialize;
use z2top::dynamics::{guarded_horizon, IntegrationStats, IntegratorOptions, RhsKind, Sample, Termination, TopSystem, Trajectory};
use z2top::exec::Execution;
use z2top::geometry::{to_dot, GeometryDump};
use z2top::invariants::{drift_report, DriftReport};
use z2top::reduction::{compare_routes, curve_counting, CurveCounting, RouteComparison};
use z2top::sweep::random_state;
use z2top::zktop::ZkSystem;
use z2top::SCHEMA_VERSION;

use crate::cli::{
    pick_format, require, Coords, EquationsArgs, FileConfig, Format, GeometryArgs, Labelling, ReduceArgs, RunArgs,
    StateSettings, ZkArgs,
};
use crate::output::{drift_path, emit, to_json, write_atomic, Style};
use crate::CliError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_DRIFT: u8 = 6;

pub fn termination_code(t: Termination) -> u8 {
    match t {
        Termination::Completed => EXIT_OK,
        Termination::BlowUp => 3,
        Termination::StepFailure => 4,
        Termination::BranchFailure => 5,
    }
}

fn subscript(i: usize) -> String {
    i.to_string().chars().map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap()).unwrap()).collect()
}

pub fn geometry(args: GeometryArgs, file: &FileConfig) -> Result<u8, CliError> {
    let n = require(args.n.or(file.n), "--n")?;
    let format = pick_format(args.format, file.format, &[Format::Json, Format::Dot, Format::Text])?;
    let out = args.out.or_else(|| file.out.clone());
    let body = match format {
        Format::Json => to_json(&GeometryDump::new(n)?),
        Format::Dot => to_dot(n)?,
        _ => geometry_text(&GeometryDump::new(n)?),
    };
    emit(out.as_deref(), &body)?;
    Ok(EXIT_OK)
}

fn geometry_text(g: &GeometryDump) -> String {
    let mut s = String::new();
    writeln!(s, "PG({},2): {} points, {} lines, {} hyperplanes", g.n - 1, g.points.len(), g.lines.len(), g.hyperplanes.len())
        .unwrap();
    writeln!(s, "points").unwrap();
    for (i, p) in g.points.iter().enumerate() {
        writeln!(s, "  {:>5}  {p}", i + 1).unwrap();
    }
    writeln!(s, "lines").unwrap();
    for l in &g.lines {
        let [p, q, r] = *l;
        writeln!(s, "  {{{p}, {q}, {r}}}").unwrap();
    }
    writeln!(s, "hyperplanes").unwrap();
    for h in &g.hyperplanes {
        let pts: Vec<_> = h.points.iter().map(ToString::to_string).collect();
        writeln!(s, "  {:>5}: {{{}}}", h.normal, pts.join(", ")).unwrap();
    }
    s
}

#[derive(Serialize)]
struct EquationsRecord {
    schema_version: u32,
    n: u32,
    labelling: &'static str,
    equations: Vec<Equation>,
}

#[derive(Serialize)]
struct Equation {
    component: usize,
    terms: Vec<(usize, usize)>,
}

fn build_system(n: u32, labelling: Labelling) -> Result<TopSystem, CliError> {
    Ok(match labelling {
        Labelling::Canonical => TopSystem::new(n)?,
        Labelling::Paper => TopSystem::paper(n)?,
    })
}

fn labelling_name(l: Labelling) -> &'static str {
    match l {
        Labelling::Canonical => "canonical",
        Labelling::Paper => "paper",
    }
}

pub fn equations(args: EquationsArgs, file: &FileConfig) -> Result<u8, CliError> {
    let n = require(args.n.or(file.n), "--n")?;
    let labelling = args.labelling.or(file.labelling).unwrap_or(Labelling::Canonical);
    let format = pick_format(args.format, file.format, &[Format::Text, Format::Json])?;
    let out = args.out.or_else(|| file.out.clone());
    let system = build_system(n, labelling)?;
    let equations: Vec<Equation> =
        (1..=system.dimension()).map(|i| Equation { component: i, terms: system.terms(i) }).collect();
    let body = match format {
        Format::Json => to_json(&EquationsRecord { schema_version: SCHEMA_VERSION, n, labelling: labelling_name(labelling), equations }),
        _ => {
            let mut s = String::new();
            for eq in &equations {
                let terms: Vec<String> =
                    eq.terms.iter().map(|&(j, k)| format!("ω{}ω{}", subscript(j), subscript(k))).collect();
                writeln!(s, "dω{}/dt = {}", subscript(eq.component), terms.join(" + ")).unwrap();
            }
            s
        }
    };
    emit(out.as_deref(), &body)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct InitialState {
    source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    range: Option<(f64, f64)>,
    omega0: Vec<f64>,
}

fn initial_state(st: &StateSettings, d: usize) -> Result<InitialState, CliError> {
    match &st.omega0 {
        Some(w) => {
            if w.len() != d {
                return Err(CliError::Usage(format!("--omega0 has {} entries, the system needs {d}", w.len())));
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Usage("--omega0 entries must be finite".into()));
            }
            Ok(InitialState { source: "literal", seed: None, range: None, omega0: w.clone() })
        }
        None => Ok(InitialState {
            source: "seeded",
            seed: Some(st.seed),
            range: Some(st.range),
            omega0: random_state(st.seed, 0, d, st.range.0, st.range.1),
        }),
    }
}

fn integrator_options(st: &StateSettings, t_end: f64) -> Result<IntegratorOptions, CliError> {
    let defaults = IntegratorOptions::default();
    let opts = IntegratorOptions {
        rel_tol: st.rel_tol.unwrap_or(defaults.rel_tol),
        abs_tol: st.abs_tol.unwrap_or(defaults.abs_tol),
        output_interval: st.output_interval,
        ..defaults
    };
    opts.validate(t_end)?;
    Ok(opts)
}

fn check_threshold(t: Option<f64>) -> Result<Option<f64>, CliError> {
    match t {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::Usage(format!("--drift-threshold must be positive, got {x}"))),
        other => Ok(other),
    }
}

#[derive(Serialize)]
struct Settings {
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
    output_interval: f64,
    blow_up_threshold: f64,
}

impl Settings {
    fn new(t_end: f64, opts: &IntegratorOptions) -> Self {
        Settings {
            t_end,
            rel_tol: opts.rel_tol,
            abs_tol: opts.abs_tol,
            output_interval: opts.output_interval.unwrap_or(t_end / 100.0),
            blow_up_threshold: opts.blow_up_threshold,
        }
    }
}

#[derive(Serialize)]
struct TrajectoryRecord<'a> {
    schema_version: u32,
    system: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labelling: Option<&'static str>,
    coords: z2top::dynamics::Coordinates,
    initial: InitialState,
    settings: Settings,
    termination: Termination,
    stats: IntegrationStats,
    samples: &'a [Sample],
}

/// Writes the trajectory and drift report, prints the drift table, and works
/// out the exit status.
fn finish_trajectory(
    record: TrajectoryRecord,
    traj: &Trajectory,
    drift: &DriftReport,
    format: Format,
    out: Option<&std::path::Path>,
    threshold: Option<f64>,
) -> Result<u8, CliError> {
    let body = match format {
        Format::Json => to_json(&record),
        _ => traj.to_csv(),
    };
    let worst = drift.max_drift();
    let header = format!(
        "{} termination={} samples={} max_drift={worst:.3e}",
        record.system,
        serde_json::to_value(traj.termination).unwrap().as_str().unwrap(),
        traj.samples.len()
    );
    match out {
        Some(path) => {
            write_atomic(path, &body)?;
            write_atomic(&drift_path(path), &to_json(drift))?;
            let style = Style::stdout();
            print!("{}\n{}", style.bold(&header), drift.to_table());
        }
        None => {
            emit(None, &body)?;
            let style = Style::stderr();
            eprint!("{}\n{}", style.bold(&header), drift.to_table());
        }
    }

    let code = termination_code(traj.termination);
    if code != EXIT_OK {
        let t = traj.last().t;
        eprintln!("{}", Style::stderr().warn(&format!("integration stopped early at t = {t}")));
        return Ok(code);
    }
    if let Some(limit) = threshold {
        if !(worst <= limit) {
            eprintln!("{}", Style::stderr().warn(&format!("drift {worst:e} exceeds threshold {limit:e}")));
            return Ok(EXIT_DRIFT);
        }
    }
    Ok(EXIT_OK)
}

pub fn run(args: RunArgs, file: &FileConfig) -> Result<u8, CliError> {
    let n = require(args.n.or(file.n), "--n")?;
    let labelling = args.labelling.or(file.labelling).unwrap_or(Labelling::Canonical);
    let coords = args.coords.or(file.coords).unwrap_or(Coords::Omega);
    let format = pick_format(args.format, file.format, &[Format::Csv, Format::Json])?;
    let threshold = check_threshold(args.drift_threshold.or(file.drift_threshold))?;
    let st = args.state.merge(file)?;

    let system = build_system(n, labelling)?;
    let initial = initial_state(&st, system.dimension())?;
    let t_end = st.t_end.unwrap_or_else(|| guarded_horizon(n, &initial.omega0));
    let opts = integrator_options(&st, t_end)?;
    let (kind, x0) = match coords {
        Coords::Omega => (RhsKind::Omega, initial.omega0.clone()),
        Coords::A => (RhsKind::A, system.a_transform(&initial.omega0)?),
    };
    let traj = system.integrate(kind, &x0, t_end, &opts)?;
    let drift = drift_report(&system, &traj)?;

    let record = TrajectoryRecord {
        schema_version: SCHEMA_VERSION,
        system: "top",
        n: Some(n),
        k: None,
        labelling: Some(labelling_name(labelling)),
        coords: traj.coords,
        initial,
        settings: Settings::new(t_end, &opts),
        termination: traj.termination,
        stats: traj.stats,
        samples: &traj.samples,
    };
    finish_trajectory(record, &traj, &drift, format, st.out.as_deref(), threshold)
}

pub fn zk(args: ZkArgs, file: &FileConfig) -> Result<u8, CliError> {
    let k = require(args.k.or(file.k), "--k")?;
    let format = pick_format(args.format, file.format, &[Format::Csv, Format::Json])?;
    let threshold = check_threshold(args.drift_threshold.or(file.drift_threshold))?;
    let st = args.state.merge(file)?;

    let system = ZkSystem::new(k)?;
    let initial = initial_state(&st, system.dimension())?;
    let t_end = st.t_end.unwrap_or_else(|| system.guarded_horizon(&initial.omega0));
    let opts = integrator_options(&st, t_end)?;
    let traj = system.integrate(&initial.omega0, t_end, &opts)?;
    let drift = system.drift_report(&traj)?;

    let record = TrajectoryRecord {
        schema_version: SCHEMA_VERSION,
        system: "zk",
        n: None,
        k: Some(k),
        labelling: None,
        coords: traj.coords,
        initial,
        settings: Settings::new(t_end, &opts),
        termination: traj.termination,
        stats: traj.stats,
        samples: &traj.samples,
    };
    finish_trajectory(record, &traj, &drift, format, st.out.as_deref(), threshold)
}

#[derive(Serialize)]
struct ReduceRecord {
    initial: InitialState,
    settings: Settings,
    curve: CurveCounting,
    #[serde(flatten)]
    comparison: RouteComparison,
}

pub fn reduce(args: ReduceArgs, file: &FileConfig) -> Result<u8, CliError> {
    let n = require(args.n.or(file.n), "--n")?;
    let format = pick_format(args.format, file.format, &[Format::Json, Format::Text])?;
    let st = args.state.merge(file)?;

    let system = TopSystem::new(n)?;
    let initial = initial_state(&st, system.dimension())?;
    let t_end = st.t_end.unwrap_or_else(|| guarded_horizon(n, &initial.omega0));
    let opts = integrator_options(&st, t_end)?;
    let comparison = compare_routes(&system, &initial.omega0, t_end, &opts, Execution::default())?;
    let curve = curve_counting(n)?;

    let code = [comparison.flow_termination, comparison.reduced_termination]
        .into_iter()
        .map(termination_code)
        .find(|&c| c != EXIT_OK)
        .unwrap_or(EXIT_OK);
    let body = match format {
        Format::Text => reduce_text(&comparison, &curve),
        _ => to_json(&ReduceRecord { initial, settings: Settings::new(t_end, &opts), curve, comparison }),
    };
    emit(st.out.as_deref(), &body)?;
    Ok(code)
}

fn reduce_text(c: &RouteComparison, curve: &CurveCounting) -> String {
    let style = Style::stdout();
    let mut s = String::new();
    writeln!(s, "{}", style.bold(&format!("reduce n={} genus={}", c.n, c.genus))).unwrap();
    writeln!(s, "sheets {}, cuts per sheet {}, degree {}", curve.sheets, curve.cuts_per_sheet, curve.degree).unwrap();
    writeln!(s, "samples              {}", c.t_grid.len()).unwrap();
    writeln!(s, "max relative error   {:.3e}", c.max_rel_err).unwrap();
    writeln!(s, "T-U residual         {:.3e}", c.max_tu_residual).unwrap();
    writeln!(s, "M drift              {:.3e}", c.max_m_drift).unwrap();
    writeln!(s, "sum of M             {:.3e}", c.sum_m).unwrap();
    let name = |t: Termination| serde_json::to_value(t).unwrap().as_str().unwrap().to_string();
    writeln!(s, "termination          flow={} reduced={}", name(c.flow_termination), name(c.reduced_termination)).unwrap();
    for (j, e) in c.per_component_err.iter().enumerate() {
        writeln!(s, "  a_{:<4} {e:.3e}", j + 1).unwrap();
    }
    s
}
