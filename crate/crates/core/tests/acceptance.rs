//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints exactly one PASS or FAIL line; the process exits with a
//! failure status if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use radpart::diagram::{bbox_diag, dual_height, extract_diagram, DualVertex};
use radpart::kernel::{circumcenter, lift, orthocenter, power, Ball, Point2};
use radpart::optimizer::{
    aux_triangulate_cell, cell_functional, cell_functional_gradient, fd_gradient,
    history_csv, run, run_observed, heuristic_radius, power_sum, Mode, OptimizerConfig, Phase,
    Termination,
};
use radpart::par::Execution;
use radpart::recovery::{default_cluster_eps, recover_clusters, recover_spheres, DEFAULT_AREA_TOL};
use radpart::regular::{build_regular, verify_regular};
use radpart::scene::rng::SceneRng;
use radpart::scene::{gen_square_with_circle, SquareCircleParams};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_point(rng: &mut SceneRng) -> Point2 {
    Point2::new(rng.unit(), rng.unit())
}

/// Plain Delaunay edges by brute force: an edge belongs to the
/// triangulation when some triangle through it has an empty circumcircle.
fn oracle_delaunay_edges(points: &[Point2]) -> BTreeSet<(usize, usize)> {
    let c = |p: Point2| robust::Coord { x: p.x, y: p.y };
    let n = points.len();
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, mut b, mut cc) = (points[i], points[j], points[k]);
                let o = robust::orient2d(c(a), c(b), c(cc));
                if o == 0.0 {
                    continue;
                }
                if o < 0.0 {
                    std::mem::swap(&mut b, &mut cc);
                }
                let empty = (0..n)
                    .filter(|&m| m != i && m != j && m != k)
                    .all(|m| robust::incircle(c(a), c(b), c(cc), c(points[m])) <= 0.0);
                if empty {
                    edges.extend([(i, j), (j, k), (i, k)]);
                }
            }
        }
    }
    edges
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = SceneRng::new(1);
    let mut equal_radius_scenes = 0;
    for scene in 0..200 {
        let n = 4 + (rng.next_u64() % 37) as usize;
        let equal = scene % 2 == 0;
        let r0 = 0.05 + 0.1 * rng.unit();
        let balls: Vec<Ball> = (0..n)
            .map(|_| {
                let c = random_point(&mut rng);
                let r = if equal { r0 } else { 0.2 * rng.unit() };
                Ball::new(c, r)
            })
            .collect();
        let t = build_regular(&balls).map_err(|e| format!("scene {scene}: {e}"))?;
        let v = verify_regular(&t, &balls);
        check(v.is_empty(), || format!("scene {scene}: {} violations", v.len()))?;
        if equal {
            equal_radius_scenes += 1;
            let centers: Vec<Point2> = balls.iter().map(|b| b.center).collect();
            let ours: BTreeSet<(usize, usize)> = t.edge_set().into_iter().collect();
            let oracle = oracle_delaunay_edges(&centers);
            check(ours == oracle, || format!("scene {scene}: edge sets differ"))?;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "200 scenes, 0 violations, {equal_radius_scenes} equal-radius edge sets match the oracle, {elapsed:.2?}"
    ))
}

fn criterion_2() -> Outcome {
    let mut rng = SceneRng::new(2);
    let mut worst_power: f64 = 0.0;
    let mut worst_height: f64 = 0.0;
    let mut done = 0;
    while done < 1000 {
        let b: Vec<Ball> = (0..3)
            .map(|_| Ball::new(random_point(&mut rng) * 10.0 - Point2::new(5.0, 5.0), 2.0 * rng.unit()))
            .collect();
        // Well-conditioned triples only: every angle of the center triangle
        // at least about 3 degrees.
        let [a, p, q] = [b[0].center, b[1].center, b[2].center];
        let area2 = (p - a).cross(q - a).abs();
        let longest = a.dist2(p).max(p.dist2(q)).max(q.dist2(a));
        if area2 < 0.05 * longest {
            continue;
        }
        let (v, tau) = orthocenter(&b[0], &b[1], &b[2]).map_err(|e| e.to_string())?;
        let scale = 1.0 + v.norm2();
        let vertex = DualVertex {
            position: v,
            tau,
            source_triangles: Vec::new(),
        };
        let z = dual_height(&vertex);
        for ball in &b {
            worst_power = worst_power.max((power(ball, v) - tau).abs() / scale);
            let h = lift(ball).height;
            worst_height = worst_height.max((z - (v.dot(ball.center) - h)).abs() / scale);
        }
        done += 1;
    }
    check(worst_power <= 1e-10, || format!("equal-power residual {worst_power:e}"))?;
    check(worst_height <= 1e-10, || format!("dual height residual {worst_height:e}"))?;
    Ok(format!(
        "1000 triangles, equal-power residual {worst_power:.1e}, height residual {worst_height:.1e} (relative to 1+|v|^2)"
    ))
}

/// Circles of the Delaunay partition of `points` as free balls, closed off by
/// fixed balls that act as half-planes on the hull edges.
fn delaunay_circle_scene(points: &[Point2]) -> Result<Vec<Ball>, String> {
    let diag = {
        let balls: Vec<Ball> = points.iter().map(|&p| Ball::new(p, 0.0)).collect();
        bbox_diag(&balls)
    };
    let clusters = recover_clusters(points, 1e-12 * diag, 0.0).map_err(|e| e.to_string())?;
    let zero: Vec<Ball> = points.iter().map(|&p| Ball::new(p, 0.0)).collect();
    let t = build_regular(&zero).map_err(|e| e.to_string())?;
    let clustered: usize = clusters.iter().map(|c| c.member_triangles.len()).sum();
    check(clustered == t.triangles.len(), || "a Delaunay triangle was dropped".into())?;
    let mut balls: Vec<Ball> = clusters.iter().map(|c| c.ball()).collect();

    // The hull-edge balls share one offset so that their cells never meet
    // beyond the hull; the offset also clears every hull triangle's center.
    let mut offset = diag;
    let mut hull_edges = Vec::new();
    for &(a, b) in &t.hull {
        let (p, q) = (points[a], points[b]);
        let normal = (q - p).perp() * (-1.0 / p.dist(q));
        let mid = (p + q) * 0.5;
        let cluster = clusters
            .iter()
            .find(|c| c.vertices.contains(&a) && c.vertices.contains(&b))
            .ok_or("hull edge without a circle")?;
        offset = offset.max((cluster.center - mid).dot(normal) + diag);
        hull_edges.push((p, q, mid, normal));
    }
    for (p, q, mid, normal) in hull_edges {
        let c = mid + normal * offset;
        let r = 0.5 * (c.dist(p) + c.dist(q));
        balls.push(Ball::new(c, r).with_fixed(true, true));
    }
    Ok(balls)
}

fn criterion_3() -> Outcome {
    let mut rng = SceneRng::new(3);
    let mut worst_fi: f64 = 0.0;
    let mut worst_tau: f64 = 0.0;
    // Random point sets, plus a square grid whose cells are cocircular
    // groups of two triangles each.
    for set in 0..21 {
        let points: Vec<Point2> = if set < 20 {
            (0..30).map(|_| random_point(&mut rng)).collect()
        } else {
            lattice(6).into_iter().map(|p| p * 0.2).collect()
        };
        let zero: Vec<Ball> = points.iter().map(|&p| Ball::new(p, 0.0)).collect();
        let bbox = bbox_diag(&zero);
        let balls = delaunay_circle_scene(&points)?;
        let config = OptimizerConfig {
            max_iters: 0,
            tau_tol: Some(1e-10 * bbox * bbox),
            merge_eps: Some(1e-9 * bbox),
            ..OptimizerConfig::default()
        };
        let state = run(&balls, &config).map_err(|e| e.to_string())?;
        let first = &state.history[0];
        worst_fi = worst_fi.max(first.fi / bbox.powi(4));
        worst_tau = worst_tau.max(first.max_abs_tau / (bbox * bbox));
        check(state.termination == Termination::TauTol, || {
            format!("max|tau| {:e} at iteration 0", first.max_abs_tau)
        })?;
    }
    check(worst_fi <= 1e-18, || format!("F_I/bbox^4 = {worst_fi:e}"))?;
    check(worst_tau <= 1e-10, || format!("max|tau|/bbox^2 = {worst_tau:e}"))?;
    Ok(format!(
        "20 random point sets of 30 and a 6x6 grid: F_I/bbox^4 <= {worst_fi:.1e}, max|tau|/bbox^2 <= {worst_tau:.1e} at iteration 0"
    ))
}

/// Every dual vertex has non-negative power, up to `margin` in distance,
/// with respect to every ball that is not incident to it.
fn delaunay_limit_violation(balls: &[Ball], margin: f64) -> Option<(usize, usize, f64)> {
    let t = build_regular(balls).ok()?;
    let d = extract_diagram(&t, balls, 1e-9 * bbox_diag(balls));
    for (vi, v) in d.dual_vertices.iter().enumerate() {
        let incident: BTreeSet<usize> = v
            .source_triangles
            .iter()
            .flat_map(|&s| t.triangles[s].balls)
            .collect();
        for (bi, b) in balls.iter().enumerate() {
            if !b.alive || incident.contains(&bi) {
                continue;
            }
            let depth = b.radius - v.position.dist(b.center);
            if depth > margin {
                return Some((vi, bi, depth));
            }
        }
    }
    None
}

/// Centers of balls that share no dual vertex with a cell stay outside the
/// circle through every three consecutive vertices of that cell, up to
/// `margin`.
fn foreign_center_violation(balls: &[Ball], margin: f64) -> Option<(usize, usize, f64)> {
    let t = build_regular(balls).ok()?;
    let d = extract_diagram(&t, balls, 1e-9 * bbox_diag(balls));
    for cell in d.cells.iter().flatten() {
        let incident: BTreeSet<usize> = cell
            .vertices
            .iter()
            .flat_map(|&v| d.dual_vertices[v].source_triangles.iter())
            .flat_map(|&s| t.triangles[s].balls)
            .collect();
        let poly = d.cell_polygon(cell);
        let m = poly.len();
        let triples = if cell.bounded { m } else { m.saturating_sub(2) };
        for k in 0..triples {
            let (a, b, c) = (poly[k], poly[(k + 1) % m], poly[(k + 2) % m]);
            let Ok(center) = circumcenter(a, b, c) else { continue };
            let r = center.dist(a);
            for (bi, ball) in balls.iter().enumerate() {
                if !ball.alive || incident.contains(&bi) {
                    continue;
                }
                let depth = r - ball.center.dist(center);
                if depth > margin {
                    return Some((cell.ball_index, bi, depth));
                }
            }
        }
    }
    None
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let scene = gen_square_with_circle(&SquareCircleParams::default()).map_err(|e| e.to_string())?;
    let n = scene.balls.len();
    check((200..=400).contains(&n), || format!("{n} balls"))?;
    let config = OptimizerConfig {
        theta: 0.5,
        mode: Mode::Hybrid,
        max_iters: 2000,
        ..scene.params.clone()
    };
    let state = run(&scene.balls, &config).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let bbox = bbox_diag(&scene.balls);
    let f0 = state.history[0].fi;
    check(state.iteration <= 2000, || "iteration budget exceeded".into())?;
    check(state.max_abs_tau <= 1e-8 * bbox * bbox, || {
        format!("max|tau| {:e} after {} iterations", state.max_abs_tau, state.iteration)
    })?;
    check(state.fi * 100.0 <= f0, || format!("F_I {f0:e} -> {:e}", state.fi))?;
    if let Some((v, b, depth)) = delaunay_limit_violation(&state.balls, 1e-6 * bbox) {
        return Err(format!("dual vertex {v} lies {depth:e} inside circle {b}"));
    }
    if let Some((cell, b, depth)) = foreign_center_violation(&state.balls, 1e-6 * bbox) {
        return Err(format!("center of ball {b} lies {depth:e} inside a vertex circle of cell {cell}"));
    }
    check(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{n} circles, {} iterations, max|tau| {:.1e} (limit {:.1e}), F_I {f0:.2e} -> {:.2e}, dual-vertex and foreign-center checks clean, {elapsed:.2?}",
        state.iteration,
        state.max_abs_tau,
        1e-8 * bbox * bbox,
        state.fi
    ))
}

fn criterion_5() -> Outcome {
    // Per-cell derivative against central differences, auxiliary triangles
    // held fixed.
    let mut rng = SceneRng::new(5);
    let mut cells = 0;
    let mut worst_rel: f64 = 0.0;
    while cells < 50 {
        let balls: Vec<Ball> = (0..25)
            .map(|_| Ball::new(random_point(&mut rng), 0.05 + 0.1 * rng.unit()))
            .collect();
        let t = build_regular(&balls).map_err(|e| e.to_string())?;
        let d = extract_diagram(&t, &balls, 1e-9 * bbox_diag(&balls));
        for cell in d.cells.iter().flatten().filter(|c| c.is_proper()) {
            if cells == 50 {
                break;
            }
            let Ok(aux) = aux_triangulate_cell(&d, cell) else { continue };
            let c = balls[cell.ball_index].center;
            let analytic = cell_functional_gradient(c, &aux);
            let h = 1e-6;
            let fd = Point2::new(
                (cell_functional(c + Point2::new(h, 0.0), &aux) - cell_functional(c - Point2::new(h, 0.0), &aux)) / (2.0 * h),
                (cell_functional(c + Point2::new(0.0, h), &aux) - cell_functional(c - Point2::new(0.0, h), &aux)) / (2.0 * h),
            );
            let rel = (fd - analytic).norm() / analytic.norm().max(1e-300);
            worst_rel = worst_rel.max(rel);
            cells += 1;
        }
    }
    check(worst_rel <= 1e-5, || format!("relative mismatch {worst_rel:e}"))?;

    // Full finite-difference gradient at a converged configuration. The
    // scene is unit-sized, so the bound is read in units of the side. A
    // converged partition has cocircular vertex groups, merged within
    // merge_eps, and the functional has a kink there: probes longer than
    // merge_eps split the groups and measure the kink, not a slope. The
    // probes therefore stay well inside the merge distance.
    let scene = gen_square_with_circle(&SquareCircleParams::default()).map_err(|e| e.to_string())?;
    let state = run(&scene.balls, &scene.params).map_err(|e| e.to_string())?;
    check(state.termination == Termination::TauTol, || "did not converge".into())?;
    let bbox = bbox_diag(&state.balls);
    let merge_eps = state.resolved.merge_eps;
    let inf_norm = |h: f64| -> Result<f64, String> {
        let g = fd_gradient(&state.balls, merge_eps, h, Execution::Parallel).map_err(|e| e.to_string())?;
        Ok(g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
    };
    let gmax = inf_norm(1e-2 * merge_eps)?;
    let kink = inf_norm(state.resolved.fd_step)?;
    check(gmax <= 1e-6 * bbox, || format!("|grad|_inf = {gmax:e}"))?;
    Ok(format!(
        "50 cells, worst relative mismatch {worst_rel:.1e}; converged |fd_gradient|_inf = {gmax:.1e} (limit {:.1e}, probe {:.1e}; {kink:.1e} with probe {:.1e} across the merge kink)",
        1e-6 * bbox,
        1e-2 * merge_eps,
        state.resolved.fd_step
    ))
}

fn criterion_6() -> Outcome {
    let scene = gen_square_with_circle(&SquareCircleParams {
        seed: 6,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let bbox = bbox_diag(&scene.balls);
    // Independent check: refit every radius from the observed diagrams.
    let mut worst_observed: f64 = 0.0;
    let mut fits = 0usize;
    let state = run_observed(&scene.balls, &scene.params, |snap| {
        for cell in snap.diagram.cells.iter().flatten() {
            let b = &snap.balls[cell.ball_index];
            if b.fix_radius || (!b.fix_center && !cell.is_proper()) {
                continue;
            }
            let verts = snap.diagram.cell_polygon(cell);
            if verts.is_empty() {
                continue;
            }
            let r = heuristic_radius(b.center, &verts);
            let m = verts.len() as f64;
            worst_observed = worst_observed.max(power_sum(b.center, r, &verts).abs() / m);
            fits += 1;
        }
    })
    .map_err(|e| e.to_string())?;
    // The optimizer's own record of its fits.
    let heuristic: Vec<f64> = state
        .history
        .iter()
        .filter(|r| r.phase == Phase::Heuristic)
        .map(|r| r.radius_residual)
        .collect();
    let worst_run = heuristic.iter().fold(0.0f64, |m, &v| m.max(v));
    let limit = 1e-9 * bbox * bbox;
    check(worst_run <= limit, || format!("optimizer fit residual {worst_run:e}"))?;
    check(worst_observed <= limit, || format!("observed fit residual {worst_observed:e}"))?;
    Ok(format!(
        "{} heuristic sweeps and {fits} refits: max |sum tau|/M = {:.1e} (limit {limit:.1e} per vertex)",
        heuristic.len(),
        worst_run.max(worst_observed)
    ))
}

fn lattice(k: usize) -> Vec<Point2> {
    (0..k)
        .flat_map(|j| (0..k).map(move |i| Point2::new(i as f64, j as f64)))
        .collect()
}

/// Compares the recovered partition on a `k x k` lattice with the square
/// cells of the unperturbed one.
fn recovery_round_trip(k: usize, rng: &mut SceneRng) -> Result<(), String> {
    let exact = lattice(k);
    let bbox = (k as f64 - 1.0) * std::f64::consts::SQRT_2;
    let jitter = 1e-9 * bbox;
    let noisy: Vec<Point2> = exact
        .iter()
        .map(|&p| p + Point2::new(rng.symmetric(), rng.symmetric()) * jitter)
        .collect();
    let cluster_eps = default_cluster_eps(&noisy);
    let balls = recover_spheres(&noisy, cluster_eps, DEFAULT_AREA_TOL).map_err(|e| e.to_string())?;
    let cells = (k - 1) * (k - 1);
    check(balls.len() == cells, || format!("{k}x{k}: {} circles, expected {cells}", balls.len()))?;

    // Circles: one per unit square, centered on it, radius sqrt(2)/2.
    let mut owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (bi, b) in balls.iter().enumerate() {
        let (i, j) = (b.center.x.floor() as usize, b.center.y.floor() as usize);
        let expected = Point2::new(i as f64 + 0.5, j as f64 + 0.5);
        check(b.center.dist(expected) <= 1e-6, || format!("{k}x{k}: circle {bi} off by {:e}", b.center.dist(expected)))?;
        check((b.radius - 0.5f64.sqrt()).abs() <= 1e-6, || format!("{k}x{k}: circle {bi} radius {}", b.radius))?;
        check(owner.insert((i, j), bi).is_none(), || format!("{k}x{k}: square ({i},{j}) recovered twice"))?;
    }

    // Radical partition restricted to the lattice's square: every cell must
    // have exactly its square's four corners as vertices.
    let t = build_regular(&balls).map_err(|e| e.to_string())?;
    let d = extract_diagram(&t, &balls, cluster_eps);
    let side = k as f64 - 1.0;
    let domain = [
        Point2::new(0.0, 0.0),
        Point2::new(side, 0.0),
        Point2::new(side, side),
        Point2::new(0.0, side),
    ];
    for (&(i, j), &bi) in &owner {
        let cell = d.cell(bi).ok_or_else(|| format!("{k}x{k}: circle {bi} has no cell"))?;
        let mut corners: Vec<Point2> = Vec::new();
        for p in d.clip_cell(cell, &domain) {
            if !corners.iter().any(|q| q.dist(p) <= 1e-6) {
                corners.push(p);
            }
        }
        let expected = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            .map(|(x, y)| Point2::new(x as f64, y as f64));
        let same = corners.len() == 4
            && expected.iter().all(|e| corners.iter().any(|c| c.dist(*e) <= 1e-6));
        check(same, || format!("{k}x{k}: cell of square ({i},{j}) has corners {corners:?}"))?;
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = SceneRng::new(7);
    for k in 4..=9 {
        recovery_round_trip(k, &mut rng)?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "3x3 to 8x8 cell lattices recovered within 1e-6 with matching cell combinatorics, {elapsed:.2?}"
    ))
}

fn criterion_8() -> Outcome {
    let mut outputs = Vec::new();
    for exec in [Execution::Parallel, Execution::Parallel, Execution::Sequential] {
        let scene = gen_square_with_circle(&SquareCircleParams {
            seed: 8,
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
        let config = OptimizerConfig {
            execution: exec,
            ..scene.params.clone()
        };
        let state = run(&scene.balls, &config).map_err(|e| e.to_string())?;
        outputs.push(history_csv(&state.history));
    }
    check(outputs[0] == outputs[1], || "repeated runs differ".into())?;
    check(outputs[0] == outputs[2], || "sequential and parallel runs differ".into())?;
    Ok(format!(
        "history.csv byte-identical across 3 runs ({} bytes, parallel and sequential)",
        outputs[0].len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("regular triangulation matches the oracles", criterion_1),
        ("duality identities", criterion_2),
        ("F_I certificate on Delaunay circles", criterion_3),
        ("square with circle converges", criterion_4),
        ("gradient checks", criterion_5),
        ("radius update zero-sum", criterion_6),
        ("sphere recovery round trip", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {}: {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}: {name}: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} acceptance criteria failed", criteria.len());
        std::process::exit(1);
    }
}
