use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use polyring::dynamics::rotation_period;
use polyring::solver::{threshold_function, ModeEntry, Sign, ThresholdPosition};
use polyring::spectra::{secondary_product, xi_p};
use polyring::{
    build_positions, cc_residual, certify_nonpositive, cramer_two_polygon, drift_report,
    full_matrix_residual, init_rotating, integrate, mass_sign_threshold, mode_exclusion_report,
    solve_equal_masses, solve_nonplanar, Error, MassAssignment, PolygonStack, SeriesVerdict,
};

use crate::args::{
    CertifyArgs, FigureScanArgs, Format, Grid, ScanKind, SignScanArgs, SimulateArgs, SolveArgs,
    SpectrumArgs, StackArgs,
};
use crate::output::{csv_header, document, num, row, write_json};

/// Raised by `certify` when a coefficient is positive.
#[derive(Debug)]
pub struct Violation(pub usize);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "positive series coefficient at order {}", self.0)
    }
}

impl std::error::Error for Violation {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

fn build_stack(args: &StackArgs) -> anyhow::Result<PolygonStack> {
    let stack = match &args.heights {
        Some(h) => PolygonStack::new(args.n, args.radii.clone(), h.clone(), args.a)?,
        None => PolygonStack::planar(args.n, args.radii.clone(), args.a)?,
    };
    Ok(stack)
}

fn check_grid(grid: &Grid) -> anyhow::Result<()> {
    grid.validate().map_err(invalid)
}

#[derive(Serialize)]
struct SolveBody {
    /// One mass per polygon; every vertex of polygon `T` carries `masses[T]`.
    masses: Vec<f64>,
    nu: f64,
    total_mass: f64,
    /// Max defect of the defining equation at every body.
    residual: f64,
    block_residual: f64,
    signs: Vec<Sign>,
    threshold: Option<ThresholdPosition>,
    mode_report: Vec<ModeEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nonplanar: Option<NonplanarBody>,
}

#[derive(Serialize)]
struct NonplanarBody {
    consistent: bool,
    a_mode_residual: f64,
    b_mode_residual: f64,
}

pub fn solve(args: &SolveArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let stack = build_stack(&args.stack)?;
    let (solution, nonplanar) = if stack.is_planar() {
        (solve_equal_masses(&stack, args.nu)?, None)
    } else {
        let np = solve_nonplanar(&stack, args.nu)?;
        let extra = NonplanarBody {
            consistent: np.consistent,
            a_mode_residual: np.a_mode_residual,
            b_mode_residual: np.b_mode_residual,
        };
        (np.solution, Some(extra))
    };
    let residual = cc_residual(
        &build_positions(&stack),
        &solution.to_assignment(stack.n()),
        stack.a(),
    )?
    .max_residual;
    let block_residual = full_matrix_residual(&stack, &solution)?.max_residual;
    let body = SolveBody {
        masses: solution.per_polygon_masses,
        nu: solution.nu,
        total_mass: solution.total_mass,
        residual,
        block_residual,
        signs: solution.sign_report.signs,
        threshold: solution.sign_report.threshold,
        mode_report: mode_exclusion_report(&stack)?.entries,
        nonplanar,
    };
    write_json(out, &document("solve", args, &body)?)
}

/// Grid points evaluated on the rayon pool, collected in grid order.
fn evaluate<T: Send>(
    points: &[f64],
    f: impl Fn(f64) -> polyring::Result<T> + Sync,
) -> anyhow::Result<Vec<T>> {
    Ok(points
        .par_iter()
        .map(|&x| f(x))
        .collect::<polyring::Result<Vec<T>>>()?)
}

pub fn scan(kind: &ScanKind, out: &mut dyn Write) -> anyhow::Result<()> {
    match kind {
        ScanKind::Sign(args) => sign_scan(args, out),
        ScanKind::Figure(args) => figure_scan(args, out),
    }
}

#[derive(Serialize)]
struct SignRow {
    r1: f64,
    m1: f64,
    m2: f64,
    g: f64,
}

fn sign_scan(args: &SignScanArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    check_grid(&args.grid)?;
    // validates n, a and r2 once before the grid
    PolygonStack::planar(args.n, vec![args.r2], args.a)?;
    let points = args.grid.points();
    let rows = evaluate(&points, |r1| {
        let (m1, m2) = cramer_two_polygon(r1, args.r2, args.nu, args.n, args.a)?;
        let g = threshold_function(r1, args.r2, args.n, args.a)?;
        Ok(SignRow { r1, m1, m2, g })
    })?;
    let delta = mass_sign_threshold(args.r2, args.n, args.a)?;
    match args.format {
        Format::Csv => {
            csv_header(
                out,
                "scan sign",
                args,
                &["r1", "m1", "m2", "g"].map(String::from),
            )?;
            for r in &rows {
                writeln!(out, "{}", row(&[r.r1, r.m1, r.m2, r.g]))?;
            }
            writeln!(out, "# delta,{}", num(delta))?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                rows: &'a [SignRow],
                delta: f64,
            }
            write_json(
                out,
                &document("scan sign", args, &Body { rows: &rows, delta })?,
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct FigureRow {
    r1: f64,
    f: f64,
    g: f64,
}

fn figure_scan(args: &FigureScanArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    check_grid(&args.grid)?;
    if args.grid.start <= 0.0 {
        return Err(invalid(format!(
            "inner radii must be positive, grid starts at {}",
            args.grid.start
        )));
    }
    for p in [args.p_f, args.p_g] {
        if !(1..=args.n).contains(&p) {
            return Err(Error::ModeOutOfRange { p, n: args.n }.into());
        }
    }
    let points = args.grid.points();
    let rows = evaluate(&points, |r1| {
        let stack = PolygonStack::new(args.n, vec![r1, args.r2], vec![args.h1, args.h2], args.a)?;
        Ok(FigureRow {
            r1,
            f: secondary_product(&stack, args.p_f)?,
            g: secondary_product(&stack, args.p_g)?,
        })
    })?;
    match args.format {
        Format::Csv => {
            csv_header(
                out,
                "scan figure",
                args,
                &["r1", "f", "g"].map(String::from),
            )?;
            for r in &rows {
                writeln!(out, "{}", row(&[r.r1, r.f, r.g]))?;
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                rows: &'a [FigureRow],
            }
            write_json(out, &document("scan figure", args, &Body { rows: &rows })?)?;
        }
    }
    Ok(())
}

pub fn certify(args: &CertifyArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    PolygonStack::planar(args.n, vec![1.0], args.a)?;
    let cert = certify_nonpositive(args.n, args.a, args.p, args.order);
    write_json(out, &document("certify", args, &cert)?)?;
    match cert.verdict {
        SeriesVerdict::AllNonpositive => Ok(()),
        SeriesVerdict::ViolationAt(k) => Err(Violation(k).into()),
    }
}

/// The fields of a `solve` document that `simulate` reads back.
#[derive(Deserialize)]
struct SolvedDocument {
    params: SolveArgs,
    masses: Vec<f64>,
    nu: f64,
}

fn read_solution(path: &Path) -> anyhow::Result<SolvedDocument> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| invalid(format!("{} is not a solve document: {e}", path.display())))
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Option<BufWriter<File>>> {
    path.map(|p| {
        File::create(p)
            .map(BufWriter::new)
            .with_context(|| format!("creating {}", p.display()))
    })
    .transpose()
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let solved = args
        .from_solution
        .as_deref()
        .map(read_solution)
        .transpose()?;
    let from = solved.as_ref().map(|s| &s.params.stack);
    let n = args
        .n
        .or(from.map(|s| s.n))
        .ok_or_else(|| invalid("--n is required"))?;
    let a = args
        .a
        .or(from.map(|s| s.a))
        .ok_or_else(|| invalid("--a is required"))?;
    let radii = args
        .radii
        .clone()
        .or(from.map(|s| s.radii.clone()))
        .ok_or_else(|| invalid("--radii is required"))?;
    if from
        .and_then(|s| s.heights.as_ref())
        .is_some_and(|h| h.iter().any(|&x| x != 0.0))
    {
        return Err(Error::Unsupported("simulation of non-planar stacks".into()).into());
    }
    let stack = PolygonStack::planar(n, radii, a)?;
    let nu = args
        .nu
        .or(solved.as_ref().map(|s| s.nu))
        .ok_or_else(|| invalid("--nu is required"))?;
    let polygon_masses = match (&args.masses, &solved) {
        (Some(m), _) => m.clone(),
        (None, Some(s)) => s.masses.clone(),
        (None, None) => solve_equal_masses(&stack, nu)?.per_polygon_masses,
    };
    if polygon_masses.len() != stack.l() {
        return Err(invalid(format!(
            "{} masses for {} polygons",
            polygon_masses.len(),
            stack.l()
        )));
    }
    if !(args.periods > 0.0 && args.periods.is_finite()) {
        return Err(invalid(format!(
            "periods must be positive, got {}",
            args.periods
        )));
    }
    if args.steps_per_period == 0 {
        return Err(invalid("steps-per-period must be at least 1"));
    }
    let masses = MassAssignment::from_polygon_masses(&polygon_masses, n, nu);
    let period = rotation_period(nu, a);
    if !period.is_finite() {
        return Err(invalid("nu = 0 has no rotation period"));
    }
    let dt = args.dt.unwrap_or(period / args.steps_per_period as f64);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    let steps = (args.periods * period / dt).round() as usize;
    log::info!(
        "simulating {} bodies for {steps} steps of {dt:e}",
        masses.masses.len()
    );
    let state = init_rotating(&build_positions(&stack), &masses, a)?;
    let trajectory = integrate(&state, &masses, a, dt, steps, args.stride)?;
    let report = drift_report(&trajectory, &masses, a)?;

    #[derive(Serialize)]
    struct Params<'a> {
        n: usize,
        a: f64,
        radii: &'a [f64],
        nu: f64,
        masses: &'a [f64],
        dt: f64,
        steps: usize,
        stride: usize,
    }
    let params = Params {
        n,
        a,
        radii: stack.radii(),
        nu,
        masses: &polygon_masses,
        dt,
        steps,
        stride: args.stride,
    };
    let mut columns = vec!["t".to_string()];
    for i in 1..=masses.masses.len() {
        columns.push(format!("x_{i}"));
        columns.push(format!("y_{i}"));
    }
    let mut csv_file = open_output(args.output.as_deref())?;
    {
        let csv: &mut dyn Write = match csv_file.as_mut() {
            Some(f) => f,
            None => &mut *out,
        };
        csv_header(csv, "simulate", &params, &columns)?;
        for s in &trajectory.samples {
            let mut cells = vec![s.time];
            cells.extend(s.positions.iter().flat_map(|q| [q[0], q[1]]));
            writeln!(csv, "{}", row(&cells))?;
        }
        if args.report.is_none() && csv_file.is_none() {
            writeln!(out, "# drift: {}", serde_json::to_string(&report)?)?;
        }
    }
    if let Some(mut f) = csv_file.take() {
        f.flush()?;
    }
    let doc = document("simulate", &params, &report)?;
    match open_output(args.report.as_deref())? {
        Some(mut f) => {
            write_json(&mut f, &doc)?;
            f.flush()?;
        }
        None if args.output.is_some() => write_json(out, &doc)?,
        None => {}
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectrumRow {
    #[serde(flatten)]
    entry: ModeEntry,
    /// `ξ_p(r_T)` for each polygon.
    xi: Vec<f64>,
}

pub fn spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let stack = build_stack(&args.stack)?;
    let report = mode_exclusion_report(&stack)?;
    let rows = report
        .entries
        .into_iter()
        .map(|entry| {
            let xi = stack
                .radii()
                .iter()
                .map(|&r| xi_p(r, stack.n(), stack.a(), entry.p as i64))
                .collect::<polyring::Result<Vec<f64>>>()?;
            Ok(SpectrumRow { entry, xi })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                modes: &'a [SpectrumRow],
            }
            write_json(out, &document("spectrum", args, &Body { modes: &rows })?)
        }
        Format::Csv => {
            let mut columns: Vec<String> = ["p", "family", "det", "reduced", "verdict", "reason"]
                .map(String::from)
                .to_vec();
            columns.extend((1..=stack.l()).map(|t| format!("xi_{t}")));
            csv_header(out, "spectrum", args, &columns)?;
            for r in &rows {
                let e = &r.entry;
                let reduced = e.reduced.map(num).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    e.p,
                    label(&e.family)?,
                    num(e.det),
                    reduced,
                    label(&e.verdict)?,
                    label(&e.reason)?,
                    row(&r.xi)
                )?;
            }
            Ok(())
        }
    }
}

/// Serialized name of a unit enum variant.
fn label<T: Serialize>(v: &T) -> anyhow::Result<String> {
    match serde_json::to_value(v)? {
        serde_json::Value::String(s) => Ok(s),
        other => bail!("unexpected label {other}"),
    }
}
