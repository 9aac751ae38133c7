//! Command-line driver: scene generation, optimization, verification,
//! sphere recovery and rendering.
//!
//! Exit codes: 0 on success, 1 when the input is well formed but the
//! geometry or the data is not (a degenerate scene, an unreadable file),
//! 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use radpart::diagram::{extract_diagram, PowerDiagram};
use radpart::kernel::{Ball, Point2};
use radpart::optimizer::{evaluate_fi, history_csv, run_observed, Mode, Termination};
use radpart::par::Execution;
use radpart::recovery::{default_cluster_eps, recover_spheres, vertex_cluster_merge, DEFAULT_AREA_TOL};
use radpart::regular::{build_regular, verify_regular, RegularTriangulation};
use radpart::scene::{
    gen_masked_lattice, gen_square_with_circle, load_scene, render_svg, save_scene, Layer,
    MaskedLatticeParams, Palette, RenderSpec, Scene, SquareCircleParams,
};

#[derive(Parser, Debug)]
#[command(name = "radpart", version, about = "Relax circle systems toward Delaunay partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated scene.
    #[command(subcommand)]
    Generate(Generate),
    /// Optimize a scene; writes scene.json and history.csv into the output directory.
    Optimize(OptimizeArgs),
    /// Check a scene's triangulation and report how far it is from a Delaunay partition.
    Verify(VerifyArgs),
    /// Replace a scene's ball centers by circles recovered from them as a point cloud.
    Recover(RecoverArgs),
    /// Render a scene to SVG.
    Render(RenderArgs),
}

#[derive(Subcommand, Debug)]
enum Generate {
    /// A square with a circular hole covered by protecting circles.
    SquareCircle(SquareCircleArgs),
    /// A jittered square lattice with optional fixed polygonal masks.
    Lattice(LatticeArgs),
}

#[derive(Args, Debug)]
struct SquareCircleArgs {
    #[arg(long, default_value_t = 1.0)]
    side: f64,
    /// Hole radius; 0 gives a plain square.
    #[arg(long, default_value_t = 0.2)]
    inner_radius: f64,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    boundary_spacing: f64,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    interior_spacing: f64,
    /// Rings of fixed-center circles around the hole.
    #[arg(long, default_value_t = 2)]
    rings: usize,
    /// Center jitter as a fraction of the interior spacing.
    #[arg(long, default_value_t = 0.2)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct LatticeArgs {
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 1.0)]
    height: f64,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    spacing: f64,
    /// Mask polygon as `x,y x,y x,y ...`; repeat for several masks.
    #[arg(long = "mask", value_parser = parse_polygon)]
    masks: Vec<Vec<Point2>>,
    #[arg(long, default_value_t = 0.2)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Heuristic,
    Fd,
    Hybrid,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Heuristic => Mode::Heuristic,
            ModeArg::Fd => Mode::FdGradient,
            ModeArg::Hybrid => Mode::Hybrid,
        }
    }
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    scene: PathBuf,
    /// Output directory.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tau_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    eliminate_redundant: bool,
    /// Write an SVG frame every N iterations (and one for the final state).
    #[arg(long, value_name = "N")]
    frames: Option<usize>,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    scene: PathBuf,
    /// Also fail unless every dual vertex has |tau| at most this.
    #[arg(long)]
    tau_tol: Option<f64>,
}

#[derive(Args, Debug)]
struct RecoverArgs {
    scene: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Circumcenter clustering distance (default 1e-6 times the diagonal).
    #[arg(long)]
    cluster_eps: Option<f64>,
    /// Relative area below which triangles are ignored.
    #[arg(long, default_value_t = DEFAULT_AREA_TOL)]
    area_tol: f64,
    /// Merge input points closer than this before recovering.
    #[arg(long)]
    vertex_eps: Option<f64>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    scene: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Comma-separated layers: domain, power_diagram, regular_triangulation,
    /// aux_triangles, balls, orthocircles.
    #[arg(long, value_delimiter = ',', value_parser = parse_layer,
          default_value = "domain,power_diagram,balls")]
    layers: Vec<Layer>,
    #[arg(long, value_parser = parse_palette, default_value = "classic")]
    palette: Palette,
}

fn parse_layer(s: &str) -> Result<Layer, String> {
    Layer::parse(s).ok_or_else(|| format!("unknown layer `{s}`"))
}

fn parse_palette(s: &str) -> Result<Palette, String> {
    Palette::parse(s).ok_or_else(|| format!("unknown palette `{s}`"))
}

fn parse_polygon(s: &str) -> Result<Vec<Point2>, String> {
    let pts = s
        .split_whitespace()
        .map(|pair| {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| format!("expected `x,y`, got `{pair}`"))?;
            let x: f64 = x.parse().map_err(|e| format!("{x}: {e}"))?;
            let y: f64 = y.parse().map_err(|e| format!("{y}: {e}"))?;
            Ok(Point2::new(x, y))
        })
        .collect::<Result<Vec<_>, String>>()?;
    if pts.len() < 3 {
        return Err("a mask needs at least 3 points".into());
    }
    Ok(pts)
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate(Generate::SquareCircle(a)) => {
            let scene = gen_square_with_circle(&SquareCircleParams {
                side: a.side,
                inner_radius: a.inner_radius,
                boundary_spacing: a.boundary_spacing,
                layer_count: a.rings,
                interior_spacing: a.interior_spacing,
                jitter: a.jitter,
                seed: a.seed,
            })?;
            write_scene(&scene, &a.output)
        }
        Command::Generate(Generate::Lattice(a)) => {
            let scene = gen_masked_lattice(&MaskedLatticeParams {
                width: a.width,
                height: a.height,
                spacing: a.spacing,
                masks: a.masks,
                jitter: a.jitter,
                seed: a.seed,
            })?;
            write_scene(&scene, &a.output)
        }
        Command::Optimize(a) => optimize(a),
        Command::Verify(a) => verify(a),
        Command::Recover(a) => recover(a),
        Command::Render(a) => render(a),
    }
}

fn read_scene(path: &Path) -> Result<Scene> {
    let loaded = load_scene(path)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded.scene)
}

fn write_scene(scene: &Scene, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_scene(scene, path).with_context(|| format!("writing {}", path.display()))
}

fn frame_spec() -> RenderSpec {
    RenderSpec::new(
        [Layer::Domain, Layer::PowerDiagram, Layer::Balls, Layer::Orthocircles],
        Palette::Classic,
    )
    .expect("layer set is not empty")
}

fn write_frame(
    dir: &Path,
    scene: &Scene,
    balls: &[Ball],
    t: &RegularTriangulation,
    d: &PowerDiagram,
    iteration: usize,
) -> Result<()> {
    let framed = Scene {
        balls: balls.to_vec(),
        ..scene.clone()
    };
    let path = dir.join(format!("frame_{iteration:05}.svg"));
    render_svg(&framed, d, t, &frame_spec(), &path)?;
    Ok(())
}

fn optimize(a: OptimizeArgs) -> Result<()> {
    let mut scene = read_scene(&a.scene)?;
    let p = &mut scene.params;
    if let Some(v) = a.seed {
        p.seed = v;
    }
    if let Some(v) = a.theta {
        p.theta = v;
    }
    if let Some(v) = a.tau_tol {
        p.tau_tol = Some(v);
    }
    if let Some(v) = a.max_iters {
        p.max_iters = v;
    }
    if let Some(m) = a.mode {
        p.mode = m.into();
    }
    p.eliminate_redundant |= a.eliminate_redundant;
    p.execution = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    if a.frames == Some(0) {
        bail!("--frames must be at least 1");
    }
    fs::create_dir_all(&a.output).with_context(|| format!("creating {}", a.output.display()))?;

    let mut frame_error = None;
    let state = run_observed(&scene.balls, &scene.params, |snap| {
        if let Some(n) = a.frames {
            if snap.iteration % n == 0 && frame_error.is_none() {
                frame_error = write_frame(
                    &a.output,
                    &scene,
                    snap.balls,
                    snap.triangulation,
                    snap.diagram,
                    snap.iteration,
                )
                .err();
            }
        }
    })?;
    if let Some(e) = frame_error {
        return Err(e);
    }
    if a.frames.is_some() {
        write_frame(
            &a.output,
            &scene,
            &state.balls,
            &state.triangulation,
            &state.diagram,
            state.iteration,
        )?;
    }

    let history_path = a.output.join("history.csv");
    fs::write(&history_path, history_csv(&state.history))
        .with_context(|| format!("writing {}", history_path.display()))?;
    let out_scene = Scene {
        balls: state.balls.clone(),
        ..scene
    };
    write_scene(&out_scene, &a.output.join("scene.json"))?;

    let first = state.history.first().map_or(f64::NAN, |r| r.fi);
    println!(
        "iterations {}  F_I {:.3e} -> {:.3e}  max|tau| {:.3e} (tol {:.3e})  {}",
        state.iteration,
        first,
        state.fi,
        state.max_abs_tau,
        state.resolved.tau_tol,
        match state.termination {
            Termination::TauTol => "converged",
            Termination::FiTol => "reached fi_tol",
            Termination::MaxIters => "iteration budget exhausted",
        }
    );
    if state.termination == Termination::MaxIters {
        eprintln!("warning: stopped at max_iters before reaching the tolerance");
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<()> {
    let scene = read_scene(&a.scene)?;
    scene.validate()?;
    let resolved = scene.params.resolve(&scene.balls);
    let t = build_regular(&scene.balls)?;
    let violations = verify_regular(&t, &scene.balls);
    let d = extract_diagram(&t, &scene.balls, resolved.merge_eps);
    let fi = evaluate_fi(&scene.balls, &d);
    let max_tau = d.max_abs_tau();
    let alive = scene.balls.iter().filter(|b| b.alive).count();
    let redundant = t.redundant.iter().filter(|&&r| r).count();
    println!("balls {alive} (redundant {redundant})");
    println!("triangles {}  dual vertices {}", t.triangles.len(), d.dual_vertices.len());
    println!("regularity violations {}", violations.len());
    println!("F_I {fi:.6e}");
    println!("max|tau| {max_tau:.6e}");
    if !violations.is_empty() {
        bail!("{} regularity violations", violations.len());
    }
    if let Some(tol) = a.tau_tol {
        if max_tau.is_nan() || max_tau > tol {
            bail!("max|tau| {max_tau:.6e} exceeds {tol:.6e}");
        }
    }
    Ok(())
}

fn recover(a: RecoverArgs) -> Result<()> {
    let scene = read_scene(&a.scene)?;
    let mut points: Vec<Point2> = scene.balls.iter().filter(|b| b.alive).map(|b| b.center).collect();
    if let Some(eps) = a.vertex_eps {
        points = vertex_cluster_merge(&points, eps);
    }
    let cluster_eps = a.cluster_eps.unwrap_or_else(|| default_cluster_eps(&points));
    let balls = recover_spheres(&points, cluster_eps, a.area_tol)?;
    println!("{} points -> {} circles", points.len(), balls.len());
    let out = Scene { balls, ..scene };
    write_scene(&out, &a.output)
}

fn render(a: RenderArgs) -> Result<()> {
    let scene = read_scene(&a.scene)?;
    let spec = RenderSpec::new(a.layers, a.palette)?;
    let resolved = scene.params.resolve(&scene.balls);
    let t = build_regular(&scene.balls)?;
    let d = extract_diagram(&t, &scene.balls, resolved.merge_eps);
    if let Some(dir) = a.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    render_svg(&scene, &d, &t, &spec, &a.output)?;
    Ok(())
}
