use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::Path;

use levy_prokhorov::isometry::{check_invariance, random_affine_isometry, AffineIsometry};
use levy_prokhorov::random::{random_measure, rng};
use levy_prokhorov::reconstruct::{
    exposing_direction, hull_vertex_indices, peel_reconstruct_with, search_support, witness_profile, ExposingRay,
    HiddenMeasureOracle, KnownWitness, ProfileGrid, ReconstructOptions, RECONSTRUCTION_TOL,
};
use levy_prokhorov::sampling::empirical_measure;
use levy_prokhorov::selftest::{run_selftest, SelftestOptions};
use levy_prokhorov::{
    fmt_sig, lp_distance, parse_space, s_lp_distance_with, s_witness, DiscreteMeasure, Error, LpOptions, Method,
    Point, Space,
};
use serde_json::{json, Value};
use thiserror::Error;

use crate::{DistArgs, InvarianceArgs, ProfileArgs, ReconstructArgs, SampleArgs, SelftestArgs, WitnessArgs};

/// Largest number of grid points `witness --grid` will evaluate.
const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::CrossCheckDivergence { .. }
            | Error::ProfileShape(_)
            | Error::Reconstruction(_)
            | Error::ExposingRayFailure
            | Error::DegenerateEta
            | Error::InvalidPeelState(_)
            | Error::LinearProgram(_) => CliError::Verification(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn input(msg: impl Display) -> CliError {
    CliError::Input(msg.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_measure(path: &Path) -> Result<DiscreteMeasure, CliError> {
    DiscreteMeasure::from_json(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn parse_point(text: &str) -> Result<Point, CliError> {
    serde_json::from_str(text).map_err(|e| input(format!("bad point {text:?}: {e}")))
}

/// Rounds to the 12 significant digits used in all printed output.
fn r12(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

/// Writes to stdout; a closed pipe is not an error worth reporting.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(v: &Value) {
    emit(&(serde_json::to_string_pretty(v).expect("json value serializes") + "\n"));
}

fn check_scale(s: f64) -> CliResult {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(input(format!("scale s = {s} must be positive")))
    }
}

fn measure_value(m: &DiscreteMeasure) -> Value {
    serde_json::from_str(&m.to_json()).expect("measure json round-trips")
}

pub fn dist(a: &DistArgs) -> CliResult {
    check_scale(a.s)?;
    if !(a.cross_check_tol > 0.0) {
        return Err(input("--cross-check-tol must be positive"));
    }
    let mu = load_measure(&a.mu)?;
    let nu = load_measure(&a.nu)?;
    let opts = LpOptions {
        support_cap: a.support_cap,
        cross_check_tol: a.cross_check_tol,
    };
    if a.method == Method::Both {
        let brute = s_lp_distance_with(&mu, &nu, a.s, Method::Brute, &opts)?.value;
        let flow = s_lp_distance_with(&mu, &nu, a.s, Method::Flow, &opts)?.value;
        let delta = (brute - flow).abs();
        emit(&format!("brute {}\n", fmt_sig(brute)));
        emit(&format!("flow {}\n", fmt_sig(flow)));
        emit(&format!("delta {}\n", fmt_sig(delta)));
        if !(delta <= a.cross_check_tol) {
            return Err(CliError::Verification(format!(
                "brute force and max-flow differ by {}",
                fmt_sig(delta)
            )));
        }
    } else {
        emit(&format!("{}\n", fmt_sig(s_lp_distance_with(&mu, &nu, a.s, a.method, &opts)?.value)));
    }
    Ok(())
}

fn parse_grid(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || input(format!("malformed grid {spec:?}; expected LO,HI,N with LO < HI and N ≥ 2"));
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || n < 2 {
        return Err(bad());
    }
    Ok((lo, hi, n))
}

fn grid_points(space: &Space, spec: &str) -> Result<Vec<Point>, CliError> {
    let (lo, hi, n) = parse_grid(spec)?;
    let dim = space.dim().ok_or_else(|| input("--grid needs a normed space; use --all or --point"))?;
    let total = (n as f64).powi(dim as i32);
    if total > MAX_GRID_POINTS as f64 {
        return Err(input(format!("grid of {total} points exceeds {MAX_GRID_POINTS}")));
    }
    let axis: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let mut pts: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..dim {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(pts.into_iter().map(Point::Coords).collect())
}

pub fn witness(a: &WitnessArgs) -> CliResult {
    check_scale(a.s)?;
    let mu = load_measure(&a.measure)?;
    let space = mu.space();
    let mut points: Vec<Point> = a.points.iter().map(|p| parse_point(p)).collect::<Result<_, _>>()?;
    if let Some(g) = &a.grid {
        points.extend(grid_points(space, g)?);
    }
    if a.all {
        let n = space.cardinality().ok_or_else(|| input("--all needs a finite space"))?;
        points.extend((0..n).map(Point::Index));
    }
    if points.is_empty() {
        return Err(input("no points given; use --point, --grid or --all"));
    }
    let header = match space.dim() {
        Some(1) | None => "x,W".to_string(),
        Some(d) => (0..d).map(|k| format!("x{k}")).chain(["W".into()]).collect::<Vec<_>>().join(","),
    };
    let mut out = header + "\n";
    for p in &points {
        let w = s_witness(&mu, p, a.s)?;
        let coords = match p {
            Point::Index(i) => i.to_string(),
            Point::Coords(c) => c.iter().map(|v| fmt_sig(*v)).collect::<Vec<_>>().join(","),
        };
        out.push_str(&format!("{coords},{}\n", fmt_sig(w)));
    }
    emit(&out);
    Ok(())
}

pub fn profile(a: &ProfileArgs) -> CliResult {
    check_scale(a.s)?;
    let mu = load_measure(&a.measure)?;
    let space = mu.space().clone();
    let p = space.norm_p().ok_or_else(|| input("profiles need a normed space"))?;
    let vertex = parse_point(&a.vertex)?;
    space.check_point(&vertex)?;
    let support: Vec<Point> = mu.points().cloned().collect();
    let Some(idx) = support.iter().position(|q| *q == vertex) else {
        return Err(input(format!("{vertex} is not a support point")));
    };
    if !hull_vertex_indices(&space, &support)?.contains(&idx) {
        return Err(input(format!("{vertex} is not a vertex of the convex hull of the support")));
    }
    let others: Vec<Point> = support.iter().filter(|q| **q != vertex).cloned().collect();
    let ray = match &a.direction {
        Some(d) => {
            let u: Vec<f64> = serde_json::from_str(d).map_err(|e| input(format!("bad direction {d:?}: {e}")))?;
            let len = p.norm(&u);
            if u.len() != space.dim().unwrap_or(0) || !(len > 0.0) || !len.is_finite() {
                return Err(input(format!("bad direction {d:?}")));
            }
            ExposingRay {
                origin: vertex.coords().expect("normed").to_vec(),
                direction: u.iter().map(|v| v / len).collect(),
                functional: None,
            }
        }
        None => exposing_direction(&space, &vertex, &others)?,
    };
    let mut grid = ProfileGrid::for_scale(a.s);
    if let Some(step) = a.step {
        grid.step = step;
    }
    if let Some(extent) = a.extent {
        grid.extent = extent;
    }
    let prof = witness_profile(&KnownWitness { measure: &mu, s: a.s }, &ray, grid)?;
    let summary = json!({
        "vertex": vertex,
        "direction": ray.direction.iter().map(|v| r12(*v)).collect::<Vec<_>>(),
        "s": a.s,
        "plateau": r12(prof.plateau_value),
        "breakpoint": r12(prof.breakpoint),
        "lambda_hat": r12(prof.lambda_hat),
        "plateau_length": r12(prof.plateau_length),
        "samples": prof.samples.len(),
    });
    match &a.csv {
        Some(path) => {
            write(path, &prof.to_csv())?;
            print_json(&summary);
        }
        None => {
            emit(&prof.to_csv());
            eprintln!("{}", serde_json::to_string_pretty(&summary).expect("json value serializes"));
        }
    }
    Ok(())
}

pub fn reconstruct(a: &ReconstructArgs) -> CliResult {
    let hidden = load_measure(&a.hidden)?;
    let oracle = HiddenMeasureOracle::new(hidden.clone());
    let (mode, support) = if a.experimental_support_search {
        let (lo, hi, n) = parse_grid(&a.grid)?;
        ("support-search", search_support(&oracle, lo, hi, n)?)
    } else {
        let path = a.support.as_ref().ok_or_else(|| input("--support is required"))?;
        let pts: Vec<Point> = serde_json::from_str(&read(path)?)
            .map_err(|e| input(format!("{}: expected a JSON array of points: {e}", path.display())))?;
        ("known-support", pts)
    };
    if support.is_empty() {
        return Err(CliError::Verification("no support points".into()));
    }
    let opts = ReconstructOptions {
        support_cap: a.support_cap,
        ..ReconstructOptions::default()
    };
    let rec = peel_reconstruct_with(&oracle, &support, &opts)?;
    let errors = rec.errors_against(&hidden);
    let max_error = rec.max_error_against(&hidden);
    let passed = mode == "support-search" || max_error <= RECONSTRUCTION_TOL;
    let report = json!({
        "mode": mode,
        "recovered": rec.measure.atoms().iter().map(|at| json!({"point": at.point, "weight": r12(at.weight)})).collect::<Vec<_>>(),
        "errors": errors.iter().map(|e| json!({
            "point": e.point,
            "recovered": r12(e.recovered),
            "truth": r12(e.truth),
            "error": r12(e.error),
        })).collect::<Vec<_>>(),
        "max_error": r12(max_error),
        "stages": rec.stages.iter().map(|st| json!({
            "point": st.point,
            "residual_before": r12(st.residual_before),
            "lambda_hat": r12(st.lambda_hat),
            "weight": r12(st.weight),
        })).collect::<Vec<_>>(),
        "oracle_calls": rec.oracle_calls,
        "passed": passed,
    });
    print_json(&report);
    if let Some(out) = &a.out {
        write(out, &serde_json::to_string_pretty(&report).expect("json value serializes"))?;
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "largest weight error {} exceeds {}",
            fmt_sig(max_error),
            fmt_sig(RECONSTRUCTION_TOL)
        )))
    }
}

fn load_measure_dir(dir: &Path) -> Result<Vec<DiscreteMeasure>, CliError> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_measure(p)).collect()
}

pub fn invariance(a: &InvarianceArgs) -> CliResult {
    let measures = match (&a.measures, a.random_measures) {
        (Some(dir), _) => load_measure_dir(dir)?,
        (None, Some(n)) => {
            let space = parse_space(&json!({"type": "normed", "dim": a.dim, "p": a.p}).to_string())?;
            let mut r = rng(a.seed);
            (0..n)
                .map(|k| random_measure(&mut r, &space, 1 + k % 5, 1.0))
                .collect()
        }
        (None, None) => return Err(input("give --measures DIR or --random-measures N")),
    };
    let Some(first) = measures.first() else {
        return Err(input("no measures found"));
    };
    let space = first.space().clone();
    if measures.iter().any(|m| *m.space() != space) {
        return Err(input("measures live on different spaces"));
    }
    let psi = match (&a.isometry, a.random_isometry) {
        (Some(path), _) => AffineIsometry::from_json(space, &read(path)?)
            .map_err(|e| input(format!("{}: {e}", path.display())))?,
        (None, true) => random_affine_isometry(&space, a.seed)?,
        (None, false) => return Err(input("give --isometry FILE or --random-isometry")),
    };
    if a.threads == Some(0) {
        return Err(input("--threads must be positive"));
    }
    let rep = check_invariance(&psi, &measures, a.threads)?;
    print_json(&json!({
        "measures": rep.measures,
        "pairs": rep.pairs,
        "max_deviation": r12(rep.max_deviation),
        "worst_pair": rep.worst_pair,
        "passed": rep.passed,
    }));
    if rep.passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "push-forward changed a distance by {}",
            fmt_sig(rep.max_deviation)
        )))
    }
}

pub fn sample(a: &SampleArgs) -> CliResult {
    let target = load_measure(&a.target)?;
    let emp = empirical_measure(&target, a.n, a.seed)?;
    let d = lp_distance(&emp, &target, Method::Flow)?.value;
    if let Some(out) = &a.out {
        write(out, &emp.to_json())?;
    }
    print_json(&json!({
        "n": a.n,
        "seed": a.seed,
        "atoms": emp.len(),
        "distance": r12(d),
        "empirical": measure_value(&emp),
    }));
    Ok(())
}

pub fn selftest(a: &SelftestArgs) -> CliResult {
    let rep = run_selftest(&SelftestOptions {
        cases: a.cases,
        seed: a.seed,
        inject_fault: a.inject_fault,
    })?;
    emit(&format!("{rep}\n"));
    if rep.passed() {
        Ok(())
    } else {
        Err(CliError::Verification("self-test failed".into()))
    }
}
