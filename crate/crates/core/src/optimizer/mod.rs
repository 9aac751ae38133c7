//! Drives a ball set towards a Delaunay partition by minimizing the discrete
//! Dirichlet functional.
//!
//! Each iteration rebuilds the regular triangulation and its power diagram
//! from scratch, evaluates the functional on the bounded cells and then
//! moves the balls. Two kinds of moves exist: the local heuristic (every
//! free cell jumps to the area-weighted mean of its auxiliary circumcenters,
//! relaxed by `theta`) and a gradient step with Armijo backtracking. Hybrid
//! mode starts with the heuristic and switches once it stalls.

mod descent;
mod functional;
mod gradient;
mod newton;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{bbox_diag, extract_diagram, PowerDiagram};
use crate::kernel::{power, Ball};
use crate::par::{self, Execution};
use crate::regular::{build_regular_with_seed, RegularTriangulation, TriangulationError};

pub use functional::{
    aux_triangulate_cell, aux_triangulate_polygon, cell_functional, cell_functional_gradient,
    evaluate_fi, evaluate_fi_with, heuristic_center, heuristic_radius, power_sum, AuxTriangle,
};
pub use gradient::{fd_gradient, frozen_gradient, Gradient};

use functional::is_free;
use descent::Descent;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("cell of ball {0} is unbounded")]
    UnboundedCell(usize),
    #[error("cell of ball {0} is degenerate")]
    DegenerateCell(usize),
    #[error("auxiliary triangles of ball {0} have zero total area")]
    ZeroArea(usize),
    #[error("probing ball {ball} coordinate {coordinate} changed the diagram combinatorics")]
    TopologyFlip { ball: usize, coordinate: usize },
    #[error("functional diverged at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("degenerate scene: {0}")]
    DegenerateScene(#[from] TriangulationError),
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Heuristic,
    #[serde(rename = "fd", alias = "fd_gradient")]
    FdGradient,
    #[default]
    Hybrid,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Heuristic => "heuristic",
            Mode::FdGradient => "fd",
            Mode::Hybrid => "hybrid",
        }
    }
}

/// Optimizer parameters. Length-like tolerances left as `None` are derived
/// from the bounding-box diagonal of the initial ball centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub theta: f64,
    pub max_iters: usize,
    /// Stop once every dual vertex has `|tau|` at most this (default
    /// `1e-10 * diag^2`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_tol: Option<f64>,
    /// Stop once the functional is at most this; zero disables the test.
    #[serde(default)]
    pub fi_tol: f64,
    #[serde(default)]
    pub mode: Mode,
    /// Finite-difference step (default `1e-7 * diag`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub eliminate_redundant: bool,
    #[serde(default)]
    pub seed: u64,
    /// Orthocenter merge distance (default `1e-9 * diag`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merge_eps: Option<f64>,
    #[serde(default, skip)]
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            theta: 0.5,
            max_iters: 2000,
            tau_tol: None,
            fi_tol: 0.0,
            mode: Mode::Hybrid,
            fd_step: None,
            eliminate_redundant: false,
            seed: 0,
            merge_eps: None,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: &str| Err(OptimizerError::InvalidConfig(m.to_string()));
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad("theta must lie in (0, 1]");
        }
        let positive = |v: Option<f64>| v.is_none_or(|v| v > 0.0 && v.is_finite());
        if !positive(self.tau_tol) {
            return bad("tau_tol must be positive");
        }
        if !positive(self.fd_step) {
            return bad("fd_step must be positive");
        }
        if !positive(self.merge_eps) {
            return bad("merge_eps must be positive");
        }
        if !(self.fi_tol >= 0.0) {
            return bad("fi_tol must be non-negative");
        }
        Ok(())
    }

    /// Concrete tolerances for a scene.
    pub fn resolve(&self, balls: &[Ball]) -> Resolved {
        let diag = bbox_diag(balls);
        let scale = if diag > 0.0 { diag } else { 1.0 };
        Resolved {
            scale,
            tau_tol: self.tau_tol.unwrap_or(1e-10 * scale * scale),
            fd_step: self.fd_step.unwrap_or(1e-7 * scale),
            merge_eps: self.merge_eps.unwrap_or(1e-9 * scale),
        }
    }
}

/// Tolerances of a config made concrete for one scene.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolved {
    pub scale: f64,
    pub tau_tol: f64,
    pub fd_step: f64,
    pub merge_eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Heuristic,
    /// Quasi-Newton descent on the functional.
    Gradient,
    /// Gauss-Newton on the orthocenter powers.
    Newton,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub fi: f64,
    pub max_abs_tau: f64,
    /// Balls moved by the update that followed this iteration.
    pub moved: usize,
    /// Balls eliminated by that update.
    pub eliminated: usize,
    /// Largest `|sum of vertex powers| / M` right after a radius fit.
    pub radius_residual: f64,
    pub phase: Phase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TauTol,
    FiTol,
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub balls: Vec<Ball>,
    pub triangulation: RegularTriangulation,
    pub diagram: PowerDiagram,
    pub fi: f64,
    pub max_abs_tau: f64,
    pub iteration: usize,
    pub history: Vec<IterationRecord>,
    pub termination: Termination,
    pub resolved: Resolved,
}

/// What an observer sees at the start of each iteration.
pub struct Snapshot<'a> {
    pub iteration: usize,
    pub balls: &'a [Ball],
    pub triangulation: &'a RegularTriangulation,
    pub diagram: &'a PowerDiagram,
    pub fi: f64,
}

/// Outcome of one simultaneous heuristic update.
#[derive(Clone, Debug, Default)]
pub struct RelaxOutcome {
    pub balls: Vec<Ball>,
    pub moved: usize,
    /// Free balls that could not be updated (unbounded or degenerate cell).
    pub skipped: Vec<usize>,
    pub radius_residual: f64,
}

enum CellUpdate {
    Keep,
    Skip,
    Move { ball: Ball, residual: f64 },
}

/// One Jacobi sweep of the heuristic: every update is computed from the
/// current diagram before any is applied.
pub fn relax_step(balls: &[Ball], t: &RegularTriangulation, d: &PowerDiagram, theta: f64, exec: Execution) -> RelaxOutcome {
    let updates = par::map_range(exec, balls.len(), |i| {
        let b = &balls[i];
        if !is_free(b) || t.redundant[i] {
            return CellUpdate::Keep;
        }
        let Some(cell) = d.cell(i) else {
            return CellUpdate::Skip;
        };
        let verts = d.cell_polygon(cell);
        // A pinned center only needs the cell's finite vertices to refit its
        // radius, so such balls are updated even when the cell is unbounded.
        let c_new = if b.fix_center {
            if verts.is_empty() {
                return CellUpdate::Skip;
            }
            b.center
        } else {
            if !cell.is_proper() {
                return CellUpdate::Skip;
            }
            match aux_triangulate_cell(d, cell).and_then(|aux| heuristic_center(&aux)) {
                Ok(c) => c,
                Err(_) => return CellUpdate::Skip,
            }
        };
        let (r_new, residual) = if b.fix_radius {
            (b.radius, 0.0)
        } else {
            let r = heuristic_radius(c_new, &verts);
            (r, power_sum(c_new, r, &verts).abs() / verts.len() as f64)
        };
        let mut nb = *b;
        nb.center = b.center * (1.0 - theta) + c_new * theta;
        nb.radius = b.radius * (1.0 - theta) + r_new * theta;
        CellUpdate::Move { ball: nb, residual }
    });
    let mut out = RelaxOutcome {
        balls: balls.to_vec(),
        ..Default::default()
    };
    for (i, u) in updates.into_iter().enumerate() {
        match u {
            CellUpdate::Keep => {}
            CellUpdate::Skip => out.skipped.push(i),
            CellUpdate::Move { ball, residual } => {
                if ball != balls[i] {
                    out.moved += 1;
                }
                out.balls[i] = ball;
                out.radius_residual = out.radius_residual.max(residual);
            }
        }
    }
    out
}

/// Stall window and threshold for the hybrid switch.
const STALL_WINDOW: usize = 10;
const STALL_RATIO: f64 = 1e-4;
/// Divergence: this many consecutive increases with a total growth over 10x.
const DIVERGE_WINDOW: usize = 20;
const SKIP_LIMIT: u32 = 3;

pub fn run(initial: &[Ball], config: &OptimizerConfig) -> Result<OptimizerState, OptimizerError> {
    run_observed(initial, config, |_| {})
}

/// Like [`run`], calling `observer` once per iteration before the update.
pub fn run_observed<F>(initial: &[Ball], config: &OptimizerConfig, mut observer: F) -> Result<OptimizerState, OptimizerError>
where
    F: FnMut(&Snapshot<'_>),
{
    config.validate()?;
    let resolved = config.resolve(initial);
    let exec = config.execution;
    let mut balls = initial.to_vec();
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut phase = match config.mode {
        Mode::FdGradient => Phase::Gradient,
        _ => Phase::Heuristic,
    };
    let mut skips = vec![0u32; balls.len()];
    let mut hull_from_start: Option<Vec<bool>> = None;
    let mut descent = Descent::default();
    let mut phase_start = 0;

    for iter in 0.. {
        let t = build_regular_with_seed(&balls, config.seed)?;
        let d = extract_diagram(&t, &balls, resolved.merge_eps);
        let fi = evaluate_fi_with(&balls, &d, exec);
        let max_abs_tau = d.max_abs_tau();
        log::debug!("iter {iter}: F_I = {fi:e}, max|tau| = {max_abs_tau:e}, phase {phase:?}");
        observer(&Snapshot {
            iteration: iter,
            balls: &balls,
            triangulation: &t,
            diagram: &d,
            fi,
        });
        let unbounded_now: Vec<bool> = (0..balls.len())
            .map(|i| d.cell(i).is_some_and(|c| !c.bounded))
            .collect();
        let hull_from_start = hull_from_start.get_or_insert(unbounded_now);
        history.push(IterationRecord {
            iter,
            fi,
            max_abs_tau,
            moved: 0,
            eliminated: 0,
            radius_residual: 0.0,
            phase,
        });

        let done = if max_abs_tau <= resolved.tau_tol {
            Some(Termination::TauTol)
        } else if config.fi_tol > 0.0 && fi <= config.fi_tol {
            Some(Termination::FiTol)
        } else if iter >= config.max_iters {
            Some(Termination::MaxIters)
        } else {
            None
        };
        if let Some(termination) = done {
            return Ok(OptimizerState {
                balls,
                triangulation: t,
                diagram: d,
                fi,
                max_abs_tau,
                iteration: iter,
                history,
                termination,
                resolved,
            });
        }
        if diverged(&history) {
            return Err(OptimizerError::Diverged { iteration: iter });
        }
        if config.mode == Mode::Hybrid
            && phase == Phase::Heuristic
            && stalled(&history[phase_start..], resolved.tau_tol, config.max_iters - iter)
        {
            log::info!("iter {iter}: heuristic stalled, switching to Gauss-Newton");
            phase = Phase::Newton;
        }

        let (mut next, moved, skipped, residual) = match phase {
            Phase::Heuristic => {
                let out = relax_step(&balls, &t, &d, config.theta, exec);
                (out.balls, out.moved, out.skipped, out.radius_residual)
            }
            Phase::Gradient => {
                let (next, moved) = descent.step(&balls, &t, &d, fi, &resolved, config.seed, exec);
                (next, moved, Vec::new(), 0.0)
            }
            Phase::Newton => {
                match newton::newton_step(&balls, &t, &resolved, config.seed, exec) {
                    Some((next, moved)) => (next, moved, Vec::new(), 0.0),
                    None => {
                        log::info!("iter {iter}: Gauss-Newton made no progress, back to the heuristic");
                        phase = Phase::Heuristic;
                        phase_start = history.len();
                        let out = relax_step(&balls, &t, &d, config.theta, exec);
                        (out.balls, out.moved, out.skipped, out.radius_residual)
                    }
                }
            }
        };

        let mut eliminated = 0;
        if config.eliminate_redundant {
            for (i, b) in next.iter_mut().enumerate() {
                if b.alive && !b.is_fixed() && t.redundant[i] {
                    b.alive = false;
                    eliminated += 1;
                }
            }
            let mut was_skipped = vec![false; balls.len()];
            for &i in &skipped {
                if !hull_from_start[i] && !t.redundant[i] {
                    was_skipped[i] = true;
                }
            }
            for i in 0..balls.len() {
                skips[i] = if was_skipped[i] { skips[i] + 1 } else { 0 };
                if skips[i] >= SKIP_LIMIT && next[i].alive {
                    log::info!("iter {iter}: eliminating ball {i} after {SKIP_LIMIT} skipped updates");
                    next[i].alive = false;
                    eliminated += 1;
                }
            }
        }
        if !skipped.is_empty() {
            log::debug!("iter {iter}: skipped {} balls", skipped.len());
        }
        let rec = history.last_mut().expect("record pushed above");
        rec.moved = moved;
        rec.eliminated = eliminated;
        rec.radius_residual = residual;
        balls = next;
    }
    unreachable!("the iteration loop only exits by returning")
}

/// The heuristic has stalled when the functional dropped by less than
/// `STALL_RATIO` over the last `STALL_WINDOW` iterations, or when its recent
/// linear rate cannot bring `max |tau|` down to `tau_tol` within the
/// remaining iterations (the functional scales like `tau^2`).
fn stalled(history: &[IterationRecord], tau_tol: f64, remaining: usize) -> bool {
    let n = history.len();
    if n <= STALL_WINDOW {
        return false;
    }
    let old = history[n - 1 - STALL_WINDOW].fi;
    let now = history[n - 1].fi;
    if !(old > 0.0) || (old - now) / old < STALL_RATIO {
        return true;
    }
    if !(now > 0.0) {
        return false;
    }
    let rate = (old / now).ln() / STALL_WINDOW as f64;
    let needed = 2.0 * (history[n - 1].max_abs_tau / tau_tol).ln();
    needed > rate * remaining as f64
}

fn diverged(history: &[IterationRecord]) -> bool {
    let n = history.len();
    if n <= DIVERGE_WINDOW {
        return false;
    }
    let w = &history[n - 1 - DIVERGE_WINDOW..];
    w.windows(2).all(|p| p[1].fi > p[0].fi) && w[DIVERGE_WINDOW].fi > 10.0 * w[0].fi
}

/// `iter,F_I,max_abs_tau,moved,eliminated` with 17 significant digits.
pub fn history_csv(history: &[IterationRecord]) -> String {
    let mut out = String::from("iter,F_I,max_abs_tau,moved,eliminated\n");
    for r in history {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{},{}",
            r.iter, r.fi, r.max_abs_tau, r.moved, r.eliminated
        );
    }
    out
}

/// Violations of the termination certificate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Certificate {
    /// `(triangle, ball)` pairs failing the exact regularity test.
    pub regularity_violations: usize,
    /// Largest `| |v - c_i| - R_i |` over vertices of proper free cells.
    pub max_cocircularity: f64,
}

/// Checks that the partition is a Delaunay partition: the triangulation is
/// regular and every bounded free cell's vertices lie on its ball's circle.
pub fn certify(state: &OptimizerState) -> Certificate {
    let regularity_violations =
        crate::regular::verify_regular(&state.triangulation, &state.balls).len();
    let mut worst: f64 = 0.0;
    for cell in state.diagram.cells.iter().flatten() {
        let b = &state.balls[cell.ball_index];
        if !is_free(b) || !cell.is_proper() {
            continue;
        }
        for v in state.diagram.cell_polygon(cell) {
            worst = worst.max((v.dist(b.center) - b.radius).abs());
        }
    }
    Certificate {
        regularity_violations,
        max_cocircularity: worst,
    }
}

/// Largest vertex power mismatch `|power(b, v) - tau(v)|`, a cheap sanity
/// check that a state's diagram matches its balls.
pub fn state_consistency(state: &OptimizerState) -> f64 {
    state
        .diagram
        .dual_vertices
        .iter()
        .flat_map(|v| {
            v.source_triangles.iter().flat_map(move |&s| {
                state.triangulation.triangles[s]
                    .balls
                    .map(|b| (power(&state.balls[b], v.position) - v.tau).abs())
            })
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Point2;

    #[test]
    fn theta_extremes() {
        let mut balls = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                balls.push(Ball::new(Point2::new(i as f64, j as f64), 0.5).with_fixed(true, true));
            }
        }
        balls[4] = Ball::new(Point2::new(1.1, 0.9), 0.6);
        let t = crate::regular::build_regular(&balls).unwrap();
        let d = extract_diagram(&t, &balls, 1e-9);
        let zero = relax_step(&balls, &t, &d, 0.0, Execution::Sequential);
        assert_eq!(zero.balls, balls);
        let one = relax_step(&balls, &t, &d, 1.0, Execution::Sequential);
        let cell = d.cell(4).unwrap();
        let aux = aux_triangulate_cell(&d, cell).unwrap();
        let c = heuristic_center(&aux).unwrap();
        assert_eq!(one.balls[4].center, c);
        assert_eq!(one.balls[4].radius, heuristic_radius(c, &d.cell_polygon(cell)));
        let half = relax_step(&balls, &t, &d, 0.5, Execution::Parallel);
        let mid = balls[4].center * 0.5 + c * 0.5;
        assert_eq!(half.balls[4].center, mid);
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            theta: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig {
            tau_tol: Some(-1.0),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_format() {
        let rec = IterationRecord {
            iter: 3,
            fi: 0.1,
            max_abs_tau: 2.0,
            moved: 5,
            eliminated: 0,
            radius_residual: 0.0,
            phase: Phase::Heuristic,
        };
        assert_eq!(
            history_csv(&[rec]),
            "iter,F_I,max_abs_tau,moved,eliminated\n3,1.0000000000000001e-1,2.0000000000000000e0,5,0\n"
        );
    }
}
