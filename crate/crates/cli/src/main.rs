//! `fixloc`: decompose closed polygonal curves, query winding numbers, and
//! locate common fixed points of commuting planar maps.

mod svg;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fixloc_core::dynamics::{
    counterexample_family, locate_common_fixed_point, orbit_curve, sample_orbit, CounterexampleReport, DiffeoMap,
    DynamicsError, MapSpec, TheoremCertificate, TheoremConfig,
};
use fixloc_core::geom::{BoundingBox, ClosedPolyCurve, CurveFile, Point2, DEFAULT_TOLERANCE};
use fixloc_core::untangle::{decompose, DecomposeConfig, DecompositionReport, UntangleError};
use fixloc_core::winding::{winding_number, WindingError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::svg::{PathStyle, Scene, PALETTE};

#[derive(Parser, Debug)]
#[command(name = "fixloc", version, about = "Curve untangling and common fixed points of commuting planar maps")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Coincidence tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Random seed for every sampled check.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also render an SVG picture to this path.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose a closed curve into simple loops.
    Decompose {
        /// Curve file: `{"vertices": [[x, y], ...]}`.
        curve: PathBuf,
        /// Detour offset for multiply covered segments.
        #[arg(long)]
        separation: Option<f64>,
        /// Maximum number of vertex resolutions.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Print the winding number of a curve around a point.
    Winding {
        /// Curve file: `{"vertices": [[x, y], ...]}`.
        curve: PathBuf,
        /// Query point `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Point2,
    },
    /// Build the closed curve through `f(p), ..., f^m(p)`.
    OrbitCurve {
        /// Map spec: a JSON file or inline JSON.
        #[arg(long)]
        map: String,
        /// Base point `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Point2,
        /// Number of orbit points `m`.
        #[arg(long)]
        length: usize,
    },
    /// Locate a common fixed point of a commuting family in the hull of an orbit.
    Theorem {
        /// Family file: `{"fixed": [...], "family": [...], "seed": [x, y]}`.
        family: PathBuf,
        /// Seed point, overriding the one in the family file.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Option<Point2>,
        /// Working domain `x0,y0,x1,y1`.
        #[arg(long, value_parser = parse_domain, allow_hyphen_values = true)]
        domain: Option<BoundingBox>,
        /// Orbit points sampled for the hull.
        #[arg(long)]
        samples: Option<usize>,
        /// Iteration budget for return times.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Build a map whose only fixed point lies outside the hull of an orbit.
    Counterexample {
        /// Rotation order.
        #[arg(long)]
        n: u32,
        /// Orbit base point `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p: Point2,
        /// Target fixed point `x,y`, on the circle through `p` but off its orbit.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        q: Point2,
        /// Half-width of the tube carrying the conjugacy.
        #[arg(long)]
        support_radius: Option<f64>,
    },
    /// Render a curve file or a JSON report as SVG (requires `--svg`).
    Render {
        /// Curve file or a JSON report written by another subcommand.
        input: PathBuf,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    OnCurve(String),
    #[error("{0}")]
    Commutation(String),
    #[error("{0}")]
    Localization(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Validation(_) => 2,
            CliError::OnCurve(_) => 3,
            CliError::Commutation(_) => 4,
            CliError::Localization(_) => 5,
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::CommutationViolation { .. } => CliError::Commutation(e.to_string()),
            DynamicsError::InvalidParameter(_)
            | DynamicsError::GeometryConstraintViolated(_)
            | DynamicsError::SeedNotFixed { .. }
            | DynamicsError::FixedSeed { .. }
            | DynamicsError::DegenerateOrbitCurve(_)
            | DynamicsError::Geom(_) => CliError::Validation(e.to_string()),
            _ => CliError::Localization(e.to_string()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FamilyFile {
    #[serde(default)]
    fixed: Vec<MapSpec>,
    family: Vec<MapSpec>,
    #[serde(default)]
    seed: Option<Point2>,
    #[serde(default)]
    config: Option<TheoremConfig>,
}

fn parse_point(s: &str) -> Result<Point2, String> {
    let v = parse_numbers(s, 2)?;
    Ok(Point2::new(v[0], v[1]))
}

fn parse_domain(s: &str) -> Result<BoundingBox, String> {
    let v = parse_numbers(s, 4)?;
    Ok(BoundingBox::new(Point2::new(v[0], v[1]), Point2::new(v[2], v[3])))
}

fn parse_numbers(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != count || v.iter().any(|x| !x.is_finite()) {
        return Err(format!("expected {count} comma-separated finite numbers, got {s:?}"));
    }
    Ok(v)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Validation(format!("invalid {what}: {e}")))
}

fn load_curve(path: &Path, tolerance: Option<f64>) -> Result<ClosedPolyCurve, CliError> {
    let file: CurveFile = parse_json(&read(path)?, "curve file")?;
    let tol = tolerance.unwrap_or(file.tolerance);
    ClosedPolyCurve::new(file.vertices, tol).map_err(|e| CliError::Validation(e.to_string()))
}

fn emit<T: Serialize>(common: &Common, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    match &common.out {
        Some(path) => write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn emit_svg(common: &Common, scene: impl FnOnce() -> Scene) -> Result<(), CliError> {
    match &common.svg {
        Some(path) => write(path, &scene().render()),
        None => Ok(()),
    }
}

fn decomposition_scene(input: Option<&ClosedPolyCurve>, report: &DecompositionReport) -> Scene {
    let mut scene = Scene::new(format!("decomposition into {} loops", report.loops.len()));
    if let Some(curve) = input {
        scene.path(curve.vertices(), true, PathStyle {
            stroke: "#999999",
            width: 1.0,
            dashed: true,
            ..PathStyle::default()
        });
    }
    for (i, lp) in report.loops.iter().enumerate() {
        let kappa = i == report.kappa;
        scene.path(lp.vertices(), true, PathStyle {
            stroke: PALETTE[i % PALETTE.len()],
            width: if kappa { 4.0 } else { 1.8 },
            fill: if kappa { PALETTE[i % PALETTE.len()] } else { "none" },
            arrows: true,
            ..PathStyle::default()
        });
    }
    scene
}

fn hull_scene(title: String, orbit: &[Point2], hull: &[Point2], points: &[(Point2, &str, &str)]) -> Scene {
    let mut scene = Scene::new(title);
    scene.dots(orbit, "#1f77b4", 2.0);
    scene.path(hull, true, PathStyle {
        stroke: "#2ca02c",
        width: 1.5,
        fill: "#2ca02c",
        ..PathStyle::default()
    });
    for (at, color, label) in points {
        scene.marker(*at, color, label);
    }
    scene
}

fn theorem_scene(cert: &TheoremCertificate, orbit: &[Point2]) -> Scene {
    hull_scene(
        "common fixed point in the orbit hull".into(),
        orbit,
        &cert.hull.hull_vertices,
        &[(cert.seed, "#ff7f0e", "p"), (cert.fixed_point, "#d62728", "q")],
    )
}

fn counterexample_scene(r: &CounterexampleReport) -> Scene {
    hull_scene(
        format!("n = {}: q outside the orbit hull", r.n),
        &r.orbit,
        &r.hull.hull_vertices,
        &[(r.p, "#ff7f0e", "p"), (r.q, "#d62728", "q"), (Point2::ORIGIN, "#555555", "0")],
    )
}

/// Every `k`-th point, so that at most `limit` remain.
fn thin(points: &[Point2], limit: usize) -> Vec<Point2> {
    let step = points.len().div_ceil(limit.max(1)).max(1);
    points.iter().step_by(step).copied().collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    match cli.command {
        Command::Decompose {
            curve,
            separation,
            budget,
        } => {
            let curve = load_curve(&curve, common.tolerance)?;
            let defaults = DecomposeConfig::default();
            let config = DecomposeConfig {
                separation,
                budget: budget.unwrap_or(defaults.budget),
                seed: common.seed,
                ..defaults
            };
            let report = decompose(&curve, &config).map_err(|e| match e {
                UntangleError::AngleHypothesisViolated(v) => CliError::Validation(format!(
                    "angle hypothesis violated: {}",
                    serde_json::to_string(&v).expect("violations serialize")
                )),
                other => CliError::Validation(other.to_string()),
            })?;
            emit(common, &report)?;
            emit_svg(common, || decomposition_scene(Some(&curve), &report))
        }
        Command::Winding { curve, point } => {
            let curve = load_curve(&curve, common.tolerance)?;
            let index = winding_number(&curve, point).map_err(|e| match e {
                WindingError::PointOnCurve { .. } => CliError::OnCurve(e.to_string()),
                other => CliError::Validation(other.to_string()),
            })?;
            println!("{}", index.value);
            Ok(())
        }
        Command::OrbitCurve { map, point, length } => {
            let text = if map.trim_start().starts_with('{') {
                map
            } else {
                read(Path::new(&map))?
            };
            let spec: MapSpec = parse_json(&text, "map spec")?;
            let f = DiffeoMap::from_spec(spec)?;
            let oc = orbit_curve(&f, point, length, common.tolerance.unwrap_or(DEFAULT_TOLERANCE))?;
            emit(common, &oc)?;
            emit_svg(common, || {
                let mut scene = Scene::new(format!("orbit curve of length {length}"));
                scene.path(oc.curve.vertices(), true, PathStyle {
                    stroke: PALETTE[0],
                    arrows: true,
                    ..PathStyle::default()
                });
                scene.marker(point, "#d62728", "p");
                scene
            })
        }
        Command::Theorem {
            family,
            point,
            domain,
            samples,
            budget,
        } => {
            let file: FamilyFile = parse_json(&read(&family)?, "family file")?;
            let mut config = file.config.clone().unwrap_or_default();
            config.seed = common.seed;
            if let Some(t) = common.tolerance {
                config.fixed_tol = t;
            }
            if let Some(d) = domain {
                config.domain = d;
            }
            if let Some(s) = samples {
                config.orbit_samples = s;
            }
            if let Some(b) = budget {
                config.max_iter = b;
            }
            let seed = point
                .or(file.seed)
                .ok_or_else(|| CliError::Validation("no seed point given".into()))?;
            let build = |specs: &[MapSpec]| -> Result<Vec<DiffeoMap>, CliError> {
                specs.iter().map(|s| DiffeoMap::from_spec(s.clone()).map_err(CliError::from)).collect()
            };
            let fixed = build(&file.fixed)?;
            let maps = build(&file.family)?;
            let cert = locate_common_fixed_point(&fixed, &maps, seed, &config)?;
            emit(common, &cert)?;
            let orbit = sample_orbit(&maps, seed, config.orbit_samples, config.domain, config.seed)?;
            emit_svg(common, || theorem_scene(&cert, &thin(&orbit, 2_000)))
        }
        Command::Counterexample { n, p, q, support_radius } => {
            let (_, _, report) = counterexample_family(n, p, q, support_radius)?;
            emit(common, &report)?;
            emit_svg(common, || counterexample_scene(&report))
        }
        Command::Render { input } => {
            if common.svg.is_none() {
                return Err(CliError::Validation("render needs --svg <path>".into()));
            }
            let text = read(&input)?;
            let value: serde_json::Value = parse_json(&text, "JSON input")?;
            let scene = if value.get("loops").is_some() {
                decomposition_scene(None, &parse_json(&text, "decomposition report")?)
            } else if value.get("near_fixed_points").is_some() {
                counterexample_scene(&parse_json(&text, "counterexample report")?)
            } else if value.get("fixed_point").is_some() {
                theorem_scene(&parse_json(&text, "theorem certificate")?, &[])
            } else {
                let file: CurveFile = parse_json(&text, "curve file")?;
                let mut scene = Scene::new("curve");
                scene.path(&file.vertices, true, PathStyle {
                    stroke: PALETTE[0],
                    arrows: true,
                    ..PathStyle::default()
                });
                scene
            };
            emit_svg(common, || scene)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
