//! Finite-difference gradients of the functional.
//!
//! [`fd_gradient`] rebuilds the whole diagram for every probe. The frozen
//! variant keeps the triangulation, the vertex merge groups and the
//! auxiliary triangulations of the base configuration, and only recomputes
//! the cells a probed ball can reach, which makes it cheap enough to drive a
//! descent loop.

use crate::diagram::{extract_diagram, PowerDiagram};
use crate::kernel::{circumcenter_guarded, signed_area, Ball, Point2, DEFAULT_CONDITIONING};
use crate::par::{self, Execution};
use crate::regular::{build_regular, triangle_orthocenter, RegularTriangulation};

use super::functional::{aux_triangulate_polygon, evaluate_fi_with, is_free, split_convex};
use super::OptimizerError;

/// Per-ball `(dF/dcx, dF/dcy, dF/dR)`.
pub type Gradient = Vec<[f64; 3]>;

/// Which coordinates of a ball may move.
pub(crate) fn free_coords(b: &Ball) -> [bool; 3] {
    let c = b.alive && !b.fix_center;
    let r = b.alive && !b.fix_radius;
    [c, c, r]
}

pub(crate) fn perturbed(b: &Ball, coord: usize, delta: f64) -> Ball {
    let mut out = *b;
    match coord {
        0 => out.center.x += delta,
        1 => out.center.y += delta,
        _ => out.radius += delta,
    }
    out
}

/// The part of the combinatorial state the gradient must not cross.
#[derive(PartialEq, Eq)]
struct Topology {
    redundant: Vec<bool>,
    bounded: Vec<bool>,
}

fn topology(t: &RegularTriangulation, d: &PowerDiagram) -> Topology {
    Topology {
        redundant: t.redundant.clone(),
        bounded: d
            .cells
            .iter()
            .map(|c| c.as_ref().is_some_and(|c| c.bounded))
            .collect(),
    }
}

fn rebuild(balls: &[Ball], merge_eps: f64) -> Result<(RegularTriangulation, PowerDiagram), OptimizerError> {
    let t = build_regular(balls)?;
    let d = extract_diagram(&t, balls, merge_eps);
    Ok((t, d))
}

/// Central differences of the functional with a full rebuild per probe.
/// Fails with `TopologyFlip` when a probe changes which balls are redundant
/// or which cells are bounded; callers should retry with a smaller `h`.
pub fn fd_gradient(
    balls: &[Ball],
    merge_eps: f64,
    h: f64,
    exec: Execution,
) -> Result<Gradient, OptimizerError> {
    let (t0, d0) = rebuild(balls, merge_eps)?;
    let base = topology(&t0, &d0);
    let probes = par::map_range(exec, balls.len() * 3, |k| {
        let (i, coord) = (k / 3, k % 3);
        if !free_coords(&balls[i])[coord] {
            return Ok(0.0);
        }
        let mut values = [0.0; 2];
        for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
            let mut probe = balls.to_vec();
            probe[i] = perturbed(&balls[i], coord, sign * h);
            let (t, d) = rebuild(&probe, merge_eps)?;
            if topology(&t, &d) != base {
                return Err(OptimizerError::TopologyFlip { ball: i, coordinate: coord });
            }
            values[slot] = evaluate_fi_with(&probe, &d, Execution::Sequential);
        }
        Ok((values[0] - values[1]) / (2.0 * h))
    });
    let mut out = vec![[0.0; 3]; balls.len()];
    for (k, g) in probes.into_iter().enumerate() {
        out[k / 3][k % 3] = g?;
    }
    Ok(out)
}

struct FrozenCell {
    ball: usize,
    /// Dual vertex ids of the cell, counter-clockwise.
    verts: Vec<usize>,
    /// Auxiliary triangles as positions into `verts`.
    aux: Vec<[usize; 3]>,
}

/// The functional with the combinatorics of one configuration frozen.
pub(crate) struct FrozenFunctional {
    tris: Vec<[usize; 3]>,
    groups: Vec<Vec<usize>>,
    cells: Vec<FrozenCell>,
    /// Cells whose value depends on each ball.
    reach: Vec<Vec<usize>>,
}

impl FrozenFunctional {
    pub(crate) fn new(balls: &[Ball], t: &RegularTriangulation, d: &PowerDiagram) -> Self {
        let tris: Vec<[usize; 3]> = t.triangles.iter().map(|t| t.balls).collect();
        let groups: Vec<Vec<usize>> = d
            .dual_vertices
            .iter()
            .map(|v| v.source_triangles.clone())
            .collect();
        let mut cells = Vec::new();
        let mut reach = vec![Vec::new(); balls.len()];
        for cell in d.cells.iter().flatten() {
            if !is_free(&balls[cell.ball_index]) || !cell.is_proper() {
                continue;
            }
            let pts = d.cell_polygon(cell);
            if aux_triangulate_polygon(cell.ball_index, &cell.vertices, &pts, d.merge_eps).is_err() {
                continue;
            }
            let mut corners = Vec::new();
            split_convex(&pts, 0, pts.len() - 1, &mut corners);
            let id = cells.len();
            let mut touched = vec![cell.ball_index];
            for &v in &cell.vertices {
                for &s in &groups[v] {
                    touched.extend_from_slice(&tris[s]);
                }
            }
            touched.sort_unstable();
            touched.dedup();
            for b in touched {
                reach[b].push(id);
            }
            cells.push(FrozenCell {
                ball: cell.ball_index,
                verts: cell.vertices.clone(),
                aux: corners.into_iter().map(|(i, k, j)| [i, k, j]).collect(),
            });
        }
        FrozenFunctional {
            tris,
            groups,
            cells,
            reach,
        }
    }

    fn vertex(&self, balls: &[Ball], v: usize) -> Point2 {
        let group = &self.groups[v];
        if let [only] = group[..] {
            return triangle_orthocenter(balls, self.tris[only]).0;
        }
        let mut wsum = 0.0;
        let mut p = Point2::default();
        for &s in group {
            let [a, b, c] = self.tris[s];
            let w = signed_area(balls[a].center, balls[b].center, balls[c].center).abs();
            wsum += w;
            p = p + triangle_orthocenter(balls, self.tris[s]).0 * w;
        }
        if wsum > 0.0 {
            p * (1.0 / wsum)
        } else {
            triangle_orthocenter(balls, self.tris[group[0]]).0
        }
    }

    fn cell_value(&self, balls: &[Ball], cell: &FrozenCell) -> f64 {
        let pts: Vec<Point2> = cell.verts.iter().map(|&v| self.vertex(balls, v)).collect();
        let c = balls[cell.ball].center;
        let mut acc = 0.0;
        for &[i, k, j] in &cell.aux {
            let area = signed_area(pts[i], pts[k], pts[j]);
            if !(area > 0.0) {
                continue;
            }
            if let Ok(s) = circumcenter_guarded(pts[i], pts[k], pts[j], DEFAULT_CONDITIONING) {
                acc += c.dist2(s) * area;
            }
        }
        0.5 * acc
    }

    #[cfg(test)]
    pub(crate) fn value(&self, balls: &[Ball]) -> f64 {
        self.cells.iter().map(|c| self.cell_value(balls, c)).sum()
    }

    /// Central differences of [`Self::value`], touching only reachable cells.
    pub(crate) fn gradient(&self, balls: &[Ball], h: f64, exec: Execution) -> Gradient {
        par::map_range(exec, balls.len(), |i| {
            let mut g = [0.0; 3];
            if self.reach[i].is_empty() {
                return g;
            }
            let free = free_coords(&balls[i]);
            let mut local = balls.to_vec();
            for coord in 0..3 {
                if !free[coord] {
                    continue;
                }
                let mut sides = [0.0; 2];
                for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
                    local[i] = perturbed(&balls[i], coord, sign * h);
                    sides[slot] = self.reach[i]
                        .iter()
                        .map(|&c| self.cell_value(&local, &self.cells[c]))
                        .sum();
                }
                local[i] = balls[i];
                g[coord] = (sides[0] - sides[1]) / (2.0 * h);
            }
            g
        })
    }
}

/// Central differences with the base configuration's combinatorics frozen.
pub fn frozen_gradient(
    balls: &[Ball],
    t: &RegularTriangulation,
    d: &PowerDiagram,
    h: f64,
    exec: Execution,
) -> Gradient {
    FrozenFunctional::new(balls, t, d).gradient(balls, h, exec)
}
