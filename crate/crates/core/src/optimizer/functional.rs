//! The discrete Dirichlet functional over per-cell auxiliary Delaunay
//! triangulations, and the local center/radius updates derived from it.

use crate::diagram::{PowerCell, PowerDiagram};
use crate::kernel::{circumcenter_guarded, signed_area, Ball, Point2, DEFAULT_CONDITIONING};
use crate::par::{self, Execution};

use super::OptimizerError;

/// A triangle of the Delaunay triangulation of one cell's vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxTriangle {
    pub cell_index: usize,
    /// Dual vertex indices of the corners.
    pub vertex_ids: [usize; 3],
    pub vertex_positions: [Point2; 3],
    pub circumcenter: Point2,
    pub area: f64,
}

/// Delaunay triangulation of a bounded cell's (convex) vertex polygon.
pub fn aux_triangulate_cell(
    diagram: &PowerDiagram,
    cell: &PowerCell,
) -> Result<Vec<AuxTriangle>, OptimizerError> {
    if !cell.bounded {
        return Err(OptimizerError::UnboundedCell(cell.ball_index));
    }
    let pts = diagram.cell_polygon(cell);
    aux_triangulate_polygon(cell.ball_index, &cell.vertices, &pts, diagram.merge_eps)
}

/// Delaunay triangulation of a convex counter-clockwise polygon, dropping
/// triangles that are flat or whose circumcenter is ill-conditioned.
pub fn aux_triangulate_polygon(
    cell_index: usize,
    ids: &[usize],
    pts: &[Point2],
    merge_eps: f64,
) -> Result<Vec<AuxTriangle>, OptimizerError> {
    let m = pts.len();
    if m < 3 {
        return Err(OptimizerError::DegenerateCell(cell_index));
    }
    let spread = pts.iter().map(|p| p.dist(pts[0])).fold(0.0, f64::max);
    if spread <= merge_eps {
        return Err(OptimizerError::DegenerateCell(cell_index));
    }
    let mut corners = Vec::with_capacity(m - 2);
    split_convex(pts, 0, m - 1, &mut corners);
    let out: Vec<AuxTriangle> = corners
        .into_iter()
        .filter_map(|(i, k, j)| {
            let (a, b, c) = (pts[i], pts[k], pts[j]);
            let area = signed_area(a, b, c);
            if !(area > 0.0) {
                return None;
            }
            let s = circumcenter_guarded(a, b, c, DEFAULT_CONDITIONING).ok()?;
            Some(AuxTriangle {
                cell_index,
                vertex_ids: [ids[i], ids[k], ids[j]],
                vertex_positions: [a, b, c],
                circumcenter: s,
                area,
            })
        })
        .collect();
    if out.is_empty() {
        return Err(OptimizerError::DegenerateCell(cell_index));
    }
    Ok(out)
}

/// Triangulates the convex chain `pts[i..=j]` closed by the edge `(j, i)`:
/// the Delaunay apex over `(i, j)` is the chain vertex whose circle through
/// `i` and `j` contains no other chain vertex.
pub(crate) fn split_convex(pts: &[Point2], i: usize, j: usize, out: &mut Vec<(usize, usize, usize)>) {
    if j < i + 2 {
        return;
    }
    let c = |p: Point2| robust::Coord { x: p.x, y: p.y };
    let mut k = i + 1;
    for m in (i + 2)..j {
        if robust::incircle(c(pts[i]), c(pts[k]), c(pts[j]), c(pts[m])) > 0.0 {
            k = m;
        }
    }
    out.push((i, k, j));
    split_convex(pts, i, k, out);
    split_convex(pts, k, j, out);
}

/// `1/2 * sum |c - s_j|^2 * area_j` for one cell.
pub fn cell_functional(center: Point2, aux: &[AuxTriangle]) -> f64 {
    0.5 * aux
        .iter()
        .map(|t| center.dist2(t.circumcenter) * t.area)
        .sum::<f64>()
}

/// Gradient of [`cell_functional`] in `center` with the cell held fixed.
pub fn cell_functional_gradient(center: Point2, aux: &[AuxTriangle]) -> Point2 {
    aux.iter().fold(Point2::default(), |acc, t| {
        acc + (center - t.circumcenter) * t.area
    })
}

/// Whether a ball takes part in the functional and in updates.
pub(crate) fn is_free(b: &Ball) -> bool {
    b.alive && !(b.fix_center && b.fix_radius)
}

pub fn evaluate_fi(balls: &[Ball], diagram: &PowerDiagram) -> f64 {
    evaluate_fi_with(balls, diagram, Execution::default())
}

pub fn evaluate_fi_with(balls: &[Ball], diagram: &PowerDiagram, exec: Execution) -> f64 {
    let parts = par::map_slice(exec, &diagram.cells, |cell| {
        let Some(cell) = cell else { return 0.0 };
        let ball = &balls[cell.ball_index];
        if !is_free(ball) || !cell.is_proper() {
            return 0.0;
        }
        match aux_triangulate_cell(diagram, cell) {
            Ok(aux) => cell_functional(ball.center, &aux),
            Err(_) => 0.0,
        }
    });
    parts.into_iter().sum()
}

/// Area-weighted mean of the auxiliary circumcenters.
pub fn heuristic_center(aux: &[AuxTriangle]) -> Result<Point2, OptimizerError> {
    let total: f64 = aux.iter().map(|t| t.area).sum();
    if !(total > 0.0) {
        return Err(OptimizerError::ZeroArea(
            aux.first().map_or(usize::MAX, |t| t.cell_index),
        ));
    }
    let s = aux
        .iter()
        .fold(Point2::default(), |acc, t| acc + t.circumcenter * t.area);
    Ok(s * (1.0 / total))
}

/// Least-squares radius: root mean square distance to the cell vertices,
/// which zeroes the sum of vertex powers.
pub fn heuristic_radius(center: Point2, vertices: &[Point2]) -> f64 {
    if vertices.is_empty() {
        return 0.0;
    }
    let ms = vertices.iter().map(|v| center.dist2(*v)).sum::<f64>() / vertices.len() as f64;
    ms.sqrt()
}

/// `sum_m (|c - v_m|^2 - R^2)`.
pub fn power_sum(center: Point2, radius: f64, vertices: &[Point2]) -> f64 {
    vertices
        .iter()
        .map(|v| center.dist2(*v) - radius * radius)
        .sum()
}
