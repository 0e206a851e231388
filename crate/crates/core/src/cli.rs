//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code:
//! 0 success, 2 input or validation error, 3 no path, 4 internal error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cost::{CostError, CostModel};
use crate::error::RouteError;
use crate::geometry::Point;
use crate::hierarchical::{compare_algorithms, route_hierarchical};
use crate::learn::{self, Dataset, LearnError, Model};
use crate::route::{route, Algorithm, ExternalNetwork, RouteRequest};
use crate::scene::{export_graph, export_route, load_scene_with_crs, Crs, SceneError, SceneModel};
use crate::search::shortest_path;
use crate::trajectory::{compare_routes, CompareConfig, Trajectory, TrajectoryError};
use crate::visibility::build_full_graph;

#[derive(Debug, Parser)]
#[command(name = "openarea", version, about = "Wheelchair routing through open areas")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Print errors as JSON on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,
    /// Coordinate system of scene files and command-line points.
    #[arg(long, global = true, value_enum)]
    pub crs: Option<CrsArg>,
    /// More output on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CrsArg {
    #[value(name = "local-m")]
    LocalM,
    Wgs84,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Full,
    Hier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Ols,
    Ridge,
    Lasso,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a route and write it as GeoJSON.
    Route(RouteArgs),
    /// Write the routing graph of a request as GeoJSON.
    Graph(RouteArgs),
    /// Compare both algorithms over random terminal pairs.
    Bench(BenchArgs),
    /// Compare routes against a recorded trajectory.
    Compare(CompareArgs),
    /// Fit link-cost coefficients from scored segments.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    pub scene: PathBuf,
    #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
    pub from: (f64, f64),
    #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
    pub to: (f64, f64),
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Full)]
    pub algorithm: AlgorithmArg,
    #[arg(long)]
    pub cost_config: Option<PathBuf>,
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub scene: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long)]
    pub cost_config: Option<PathBuf>,
    /// Include wall-clock times (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Recorded trajectory CSV (`t,x,y[,score]`).
    pub actual: PathBuf,
    /// Candidate routes as `name=path`; GeoJSON line or trajectory CSV.
    #[arg(long = "route", required = true)]
    pub routes: Vec<String>,
    #[arg(long)]
    pub baseline: String,
    /// Scene whose projection converts lon/lat input under `--crs wgs84`.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long, default_value_t = 4.0)]
    pub lcss_eps: f64,
    #[arg(long, default_value_t = 5.0)]
    pub simplify_tol: f64,
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 1.0)]
    pub w1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub w2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub endpoint_tol: f64,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub training: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelArg::Lasso)]
    pub model: ModelArg,
    /// Penalty; chosen by cross-validation over a log grid when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Write a cost configuration built from the feature importances.
    #[arg(long)]
    pub emit_cost_config: Option<PathBuf>,
    /// Include training times (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

fn parse_xy(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected x,y")?;
    let x: f64 = a.trim().parse().map_err(|_| format!("bad number '{a}'"))?;
    let y: f64 = b.trim().parse().map_err(|_| format!("bad number '{b}'"))?;
    if !x.is_finite() || !y.is_finite() {
        return Err("coordinates must be finite".into());
    }
    Ok((x, y))
}

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub code: i32,
}

impl CliError {
    fn input(kind: &'static str, message: impl ToString) -> Self {
        CliError { kind, message: message.to_string(), code: 2 }
    }

    fn internal(message: impl ToString) -> Self {
        CliError { kind: "Internal", message: message.to_string(), code: 4 }
    }
}

impl From<RouteError> for CliError {
    fn from(e: RouteError) -> Self {
        let kind = match &e {
            RouteError::TerminalOutsideArea { .. } => "TerminalOutsideArea",
            RouteError::TerminalInsideObstacle { .. } => "TerminalInsideObstacle",
            RouteError::TerminalUnreachable { .. } => "TerminalUnreachable",
            RouteError::NoPathExists(_) => "NoPathExists",
            RouteError::InvalidRequest(_) => "InvalidRequest",
            RouteError::Network(_) => "NetworkError",
            RouteError::Scene(SceneError::Parse(_)) => "ParseError",
            RouteError::Scene(SceneError::Validation { .. }) => "ValidationError",
            RouteError::Cost(_) => "CostConfigError",
        };
        let code = match e {
            RouteError::TerminalUnreachable { .. } | RouteError::NoPathExists(_) => 3,
            _ => 2,
        };
        CliError { kind, message: e.to_string(), code }
    }
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        RouteError::Scene(e).into()
    }
}

impl From<CostError> for CliError {
    fn from(e: CostError) -> Self {
        RouteError::Cost(e).into()
    }
}

impl From<TrajectoryError> for CliError {
    fn from(e: TrajectoryError) -> Self {
        let kind = match e {
            TrajectoryError::EndpointsNotShared { .. } => "EndpointsNotShared",
            TrajectoryError::UnknownRoute(_) => "UnknownRoute",
            _ => "TrajectoryError",
        };
        CliError::input(kind, e)
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        let kind = match e {
            LearnError::SingularDesign => "SingularDesign",
            LearnError::AllZeroCoefficients => "AllZeroCoefficients",
            _ => "TrainingDataError",
        };
        CliError::input(kind, e)
    }
}

fn read(path: &FsPath) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input("IoError", format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(CliError::internal)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::input("IoError", format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(CliError::internal),
    }
}

struct Context {
    crs: Option<Crs>,
    seed: u64,
    verbose: bool,
}

impl Context {
    fn scene(&self, path: &FsPath) -> Result<SceneModel, CliError> {
        Ok(load_scene_with_crs(&read(path)?, self.crs)?)
    }

    /// Command-line point in scene coordinates.
    fn point(&self, scene: &SceneModel, (x, y): (f64, f64)) -> Point {
        match &scene.projection {
            Some(p) => p.project(x, y),
            None => Point::new(x, y),
        }
    }
}

fn cost_model(path: &Option<PathBuf>) -> Result<CostModel, CliError> {
    match path {
        Some(p) => Ok(CostModel::load(p)?),
        None => Ok(CostModel::default()),
    }
}

fn algorithm(a: AlgorithmArg) -> Algorithm {
    match a {
        AlgorithmArg::Full => Algorithm::Full,
        AlgorithmArg::Hier => Algorithm::Hierarchical,
    }
}

fn cmd_route(ctx: &Context, a: &RouteArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let scene = ctx.scene(&a.scene)?;
    let cost = cost_model(&a.cost_config)?;
    let network = match &a.network {
        Some(p) => Some(ExternalNetwork::parse(&read(p)?)?),
        None => None,
    };
    let req = RouteRequest {
        origin: ctx.point(&scene, a.from),
        destination: ctx.point(&scene, a.to),
        algorithm: algorithm(a.algorithm),
    };
    let r = route(&scene, &req, network.as_ref(), &cost)?;
    emit(&a.out, stdout, &export_route(&r))?;
    let _ = writeln!(
        stderr,
        "cost={:.6} length_m={:.6} nodes={} links={} iterations={} gates={}",
        r.total_cost,
        r.total_length,
        r.nodes,
        r.links,
        r.iterations,
        r.gates_used.join("+")
    );
    if ctx.verbose {
        for (i, t) in r.trace.iter().enumerate() {
            let _ = writeln!(stderr, "iteration {}: nodes={} links={} colliding={:?}", i + 1, t.nodes, t.links, t.colliding);
        }
    }
    Ok(())
}

fn cmd_graph(ctx: &Context, a: &RouteArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let scene = ctx.scene(&a.scene)?;
    let cost = cost_model(&a.cost_config)?;
    let s = ctx.point(&scene, a.from);
    let t = ctx.point(&scene, a.to);
    let area = scene.locate(&s).ok_or(RouteError::TerminalOutsideArea { x: s.x, y: s.y })?;
    let graph = match a.algorithm {
        AlgorithmArg::Full => {
            let g = build_full_graph(&scene, area, s, t, &cost)?;
            shortest_path(&g, 0, 1)?;
            g
        }
        AlgorithmArg::Hier => route_hierarchical(&scene, area, s, t, &cost)?.graph,
    };
    emit(&a.out, stdout, &export_graph(&graph))
}

/// Uniform point of area `area` outside every obstacle.
fn sample_terminal(scene: &SceneModel, area: usize, rng: &mut ChaCha8Rng) -> Result<Point, CliError> {
    let m = scene.areas[area].polygon.mbr();
    for _ in 0..100_000 {
        let p = Point::new(rng.gen_range(m.min.x..=m.max.x), rng.gen_range(m.min.y..=m.max.y));
        if scene.locate(&p) == Some(area) && scene.obstacle_at(&p).is_none() {
            return Ok(p);
        }
    }
    Err(CliError::input("ValidationError", format!("area '{}' has no free space to sample", scene.areas[area].id)))
}

fn cmd_bench(ctx: &Context, a: &BenchArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let scene = ctx.scene(&a.scene)?;
    let cost = cost_model(&a.cost_config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut pairs = Vec::with_capacity(a.trials);
    for _ in 0..a.trials {
        let area = rng.gen_range(0..scene.areas.len());
        let s = sample_terminal(&scene, area, &mut rng)?;
        let t = sample_terminal(&scene, area, &mut rng)?;
        pairs.push((s, t));
    }
    let rows = pairs
        .par_iter()
        .map(|&(s, t)| compare_algorithms(&scene, s, t, &cost, a.timings))
        .collect::<Result<Vec<_>, _>>()?;

    let mut flat = Vec::new();
    for (trial, (pair, rs)) in pairs.iter().zip(&rows).enumerate() {
        for r in rs {
            let mut v = serde_json::to_value(r).map_err(CliError::internal)?;
            v["trial"] = json!(trial);
            v["origin"] = json!([pair.0.x, pair.0.y]);
            v["destination"] = json!([pair.1.x, pair.1.y]);
            flat.push(v);
        }
    }
    let mut summary = Vec::new();
    for (k, name) in ["full", "hierarchical"].iter().enumerate() {
        let n = rows.len().max(1) as f64;
        let mean = |f: &dyn Fn(&crate::hierarchical::BenchRow) -> f64| rows.iter().map(|r| f(&r[k])).sum::<f64>() / n;
        let mut s = json!({
            "algorithm": name,
            "mean_nodes": mean(&|r| r.nodes as f64),
            "mean_links": mean(&|r| r.links as f64),
            "mean_iterations": mean(&|r| r.iterations as f64),
            "mean_cost": mean(&|r| r.cost),
        });
        if a.timings {
            s["mean_ms"] = json!(mean(&|r| r.ms.unwrap_or(0.0)));
        }
        summary.push(s);
    }
    emit(&a.out, stdout, &json!({"seed": ctx.seed, "trials": a.trials, "rows": flat, "summary": summary}))
}

/// Route polyline from a GeoJSON route export, a bare LineString, or a
/// trajectory CSV.
fn load_polyline(path: &FsPath, scene: Option<&SceneModel>) -> Result<Vec<Point>, CliError> {
    let text = read(path)?;
    let project = |x: f64, y: f64| match scene.and_then(|s| s.projection) {
        Some(p) => p.project(x, y),
        None => Point::new(x, y),
    };
    if let Ok(v) = serde_json::from_str::<Value>(&text) {
        let geometry = match v.get("type").and_then(Value::as_str) {
            Some("FeatureCollection") => v["features"]
                .as_array()
                .and_then(|f| f.iter().find(|f| f["geometry"]["type"] == "LineString"))
                .map(|f| f["geometry"].clone()),
            Some("Feature") => Some(v["geometry"].clone()),
            Some("LineString") => Some(v.clone()),
            _ => None,
        };
        let coords = geometry
            .as_ref()
            .and_then(|g| g["coordinates"].as_array())
            .ok_or_else(|| CliError::input("ParseError", format!("{}: no LineString found", path.display())))?;
        return coords
            .iter()
            .map(|c| match (c[0].as_f64(), c[1].as_f64()) {
                (Some(x), Some(y)) => Ok(project(x, y)),
                _ => Err(CliError::input("ParseError", format!("{}: bad position", path.display()))),
            })
            .collect();
    }
    let t = Trajectory::read_csv(text.as_bytes())?;
    Ok(t.points().into_iter().map(|p| project(p.x, p.y)).collect())
}

fn cmd_compare(ctx: &Context, a: &CompareArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let scene = match &a.scene {
        Some(p) => Some(ctx.scene(p)?),
        None => None,
    };
    if ctx.crs == Some(Crs::Wgs84) && scene.as_ref().and_then(|s| s.projection).is_none() {
        return Err(CliError::input("InvalidRequest", "--crs wgs84 needs --scene with a wgs84 scene"));
    }
    let mut actual = Trajectory::read_csv(read(&a.actual)?.as_bytes())?;
    if let Some(proj) = scene.as_ref().and_then(|s| s.projection) {
        for s in &mut actual.samples {
            s.1 = proj.project(s.1.x, s.1.y);
        }
    }
    let mut routes = Vec::new();
    for spec in &a.routes {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| CliError::input("InvalidRequest", format!("route '{spec}' must be name=path")))?;
        routes.push((name.to_string(), load_polyline(FsPath::new(path), scene.as_ref())?));
    }
    let cfg = CompareConfig {
        lcss_eps: a.lcss_eps,
        simplify_tol: a.simplify_tol,
        resample_spacing: a.spacing,
        w1: a.w1,
        w2: a.w2,
        endpoint_tol: a.endpoint_tol,
    };
    if !(cfg.resample_spacing > 0.0) || !(cfg.lcss_eps >= 0.0) || !(cfg.simplify_tol >= 0.0) {
        return Err(CliError::input("InvalidRequest", "spacing must be positive; eps and tolerances non-negative"));
    }
    let report = compare_routes(&actual, &routes, &a.baseline, &cfg)?;
    emit(&a.out, stdout, &serde_json::to_value(&report).map_err(CliError::internal)?)
}

fn fit_table(fit: &learn::FitResult, timings: bool) -> String {
    let mut out = String::from("model                 r2_train  r2_cv     ms\n");
    for (name, m) in [("OLS", Model::Ols), ("Ridge Regression", Model::Ridge), ("LASSO", Model::Lasso)] {
        if m == fit.model {
            let ms = if timings { format!("{:.1}", fit.train_ms) } else { "-".into() };
            out.push_str(&format!("{name:<22}{:<10.4}{:<10.4}{ms}\n", fit.r2_train, fit.r2_cv.unwrap_or(f64::NAN)));
        } else {
            out.push_str(&format!("{name:<22}{:<10}{:<10}-\n", "-", "-"));
        }
    }
    for name in ["SVM", "Random Forest", "Gradient Boosting", "LARS"] {
        out.push_str(&format!("{name:<22}not implemented\n"));
    }
    out
}

fn cmd_fit(ctx: &Context, a: &FitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let data = Dataset::read_csv(read(&a.training)?.as_bytes())?;
    let model = match a.model {
        ModelArg::Ols => Model::Ols,
        ModelArg::Ridge => Model::Ridge,
        ModelArg::Lasso => Model::Lasso,
    };
    if data.rows() < data.cols() {
        return Err(CliError::input("TrainingDataError", format!("{} rows for {} features", data.rows(), data.cols())));
    }
    let st = learn::Standardizer::fit(&data.x);
    let scaled = Dataset { names: data.names.clone(), x: st.transform(&data.x), y: data.y.clone() };
    let clock = Instant::now();
    let fit = match (model, a.lambda) {
        (Model::Ols, _) => learn::cross_validate(model, &scaled, 0.0, a.folds, ctx.seed)?,
        (_, Some(l)) => learn::cross_validate(model, &scaled, l, a.folds, ctx.seed)?,
        (_, None) => learn::select_lambda(model, &scaled, a.folds, ctx.seed)?,
    };
    let total_ms = clock.elapsed().as_secs_f64() * 1e3;
    let importance = learn::feature_importance(&data.names, &fit.coefficients).ok();
    let (raw, raw_intercept) = st.destandardize(&fit.coefficients, fit.intercept);

    let mut v = json!({
        "model": model.name(),
        "lambda": fit.lambda,
        "rows": data.rows(),
        "folds": a.folds,
        "seed": ctx.seed,
        "features": data.names,
        "coefficients": fit.coefficients,
        "intercept": fit.intercept,
        "coefficients_raw": raw,
        "intercept_raw": raw_intercept,
        "r2_train": fit.r2_train,
        "r2_folds": fit.r2_folds,
        "r2_cv": fit.r2_cv,
        "converged": fit.converged,
        "importance": importance.as_ref().map(|r| r.importance.clone()),
    });
    if a.timings {
        v["train_ms"] = json!(fit.train_ms);
        v["total_ms"] = json!(total_ms);
    }
    if let Some(path) = &a.emit_cost_config {
        let report = importance.ok_or(LearnError::AllZeroCoefficients)?;
        let coefficients = learn::to_cost_coefficients(&report)?;
        let cfg = CostModel::with_coefficients(coefficients).to_config();
        let text = if path.extension().is_some_and(|e| e == "toml") {
            toml::to_string(&cfg).map_err(CliError::internal)?
        } else {
            serde_json::to_string_pretty(&cfg).map_err(CliError::internal)? + "\n"
        };
        std::fs::write(path, text).map_err(|e| CliError::input("IoError", format!("{}: {e}", path.display())))?;
    }
    emit(&a.out, stdout, &v)?;
    let _ = stderr.write_all(fit_table(&fit, a.timings).as_bytes());
    Ok(())
}

fn report(err: &CliError, json_errors: bool, stderr: &mut dyn Write) {
    if json_errors {
        let v = json!({"error": err.kind, "message": err.message, "exit_code": err.code});
        let _ = writeln!(stderr, "{v}");
    } else {
        let _ = writeln!(stderr, "error: {}", err.message);
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json_errors = args.iter().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            if json_errors {
                report(&CliError::input("UsageError", e.kind()), true, stderr);
            } else {
                let _ = write!(stderr, "{e}");
            }
            return 2;
        }
    };
    let ctx = Context {
        crs: cli.crs.map(|c| match c {
            CrsArg::LocalM => Crs::LocalM,
            CrsArg::Wgs84 => Crs::Wgs84,
        }),
        seed: cli.seed,
        verbose: cli.verbose,
    };
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| match &cli.command {
        Command::Route(a) => cmd_route(&ctx, a, stdout, stderr),
        Command::Graph(a) => cmd_graph(&ctx, a, stdout),
        Command::Bench(a) => cmd_bench(&ctx, a, stdout),
        Command::Compare(a) => cmd_compare(&ctx, a, stdout),
        Command::Fit(a) => cmd_fit(&ctx, a, stdout, stderr),
    }));
    match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            report(&e, cli.json_errors, stderr);
            e.code
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unexpected failure".into());
            let e = CliError::internal(msg);
            report(&e, cli.json_errors, stderr);
            e.code
        }
    }
}
