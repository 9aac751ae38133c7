//! Power diagram (radical partition) as the dual of a regular triangulation.

use petgraph::unionfind::UnionFind;

use crate::kernel::{paraboloid, polygon_area, power, Ball, Point2};
use crate::regular::RegularTriangulation;

/// A vertex of the power diagram: one or more merged triangle orthocenters.
#[derive(Clone, Debug, PartialEq)]
pub struct DualVertex {
    pub position: Point2,
    /// Common power of `position` with respect to the incident balls.
    pub tau: f64,
    pub source_triangles: Vec<usize>,
}

/// Height of the dual polyhedron's vertex: `paraboloid(v) - tau / 2`.
pub fn dual_height(v: &DualVertex) -> f64 {
    paraboloid(v.position) - 0.5 * v.tau
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerCell {
    pub ball_index: usize,
    /// Dual vertex indices in counter-clockwise order.
    pub vertices: Vec<usize>,
    pub bounded: bool,
    pub clipped: bool,
    /// Outward directions of the two infinite edges of an unbounded cell:
    /// the first enters at `vertices[0]`, the second leaves from the last vertex.
    pub rays: Option<[Point2; 2]>,
}

impl PowerCell {
    /// A bounded cell with at least three distinct vertices.
    pub fn is_proper(&self) -> bool {
        self.bounded && self.vertices.len() >= 3
    }
}

#[derive(Clone, Debug)]
pub struct PowerDiagram {
    /// `cells[i]` is `None` for dead and redundant balls.
    pub cells: Vec<Option<PowerCell>>,
    pub dual_vertices: Vec<DualVertex>,
    /// Dual vertex of each triangle of the source triangulation.
    pub triangle_vertex: Vec<usize>,
    pub domain: Option<Vec<Point2>>,
    pub merge_eps: f64,
}

/// Bounding-box diagonal of the alive ball centers.
pub fn bbox_diag(balls: &[Ball]) -> f64 {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for b in balls.iter().filter(|b| b.alive) {
        lo = Point2::new(lo.x.min(b.center.x), lo.y.min(b.center.y));
        hi = Point2::new(hi.x.max(b.center.x), hi.y.max(b.center.y));
    }
    if lo.x > hi.x {
        return 0.0;
    }
    hi.dist(lo)
}

pub fn default_merge_eps(balls: &[Ball]) -> f64 {
    1e-9 * bbox_diag(balls)
}

/// Builds the power diagram; orthocenters of adjacent triangles closer than
/// `merge_eps` collapse into one dual vertex.
pub fn extract_diagram(t: &RegularTriangulation, balls: &[Ball], merge_eps: f64) -> PowerDiagram {
    let n = t.triangles.len();
    let mut uf = UnionFind::<usize>::new(n);
    for (i, tri) in t.triangles.iter().enumerate() {
        for nb in tri.neighbors.iter().flatten() {
            if *nb > i && tri.orthocenter.dist(t.triangles[*nb].orthocenter) <= merge_eps {
                uf.union(i, *nb);
            }
        }
    }
    let mut rep_to_vertex = vec![usize::MAX; n];
    let mut dual_vertices: Vec<DualVertex> = Vec::new();
    let mut triangle_vertex = vec![0; n];
    for (i, slot) in triangle_vertex.iter_mut().enumerate() {
        let r = uf.find(i);
        if rep_to_vertex[r] == usize::MAX {
            rep_to_vertex[r] = dual_vertices.len();
            dual_vertices.push(DualVertex {
                position: Point2::default(),
                tau: 0.0,
                source_triangles: Vec::new(),
            });
        }
        *slot = rep_to_vertex[r];
        dual_vertices[*slot].source_triangles.push(i);
    }
    for v in &mut dual_vertices {
        if let [only] = v.source_triangles[..] {
            v.position = t.triangles[only].orthocenter;
            v.tau = t.triangles[only].tau;
            continue;
        }
        let mut wsum = 0.0;
        let mut p = Point2::default();
        let mut tau = 0.0;
        for &s in &v.source_triangles {
            let w = t.triangles[s].area(balls).abs();
            wsum += w;
            p = p + t.triangles[s].orthocenter * w;
            tau += t.triangles[s].tau * w;
        }
        if wsum > 0.0 {
            v.position = p * (1.0 / wsum);
            v.tau = tau / wsum;
        } else {
            v.position = t.triangles[v.source_triangles[0]].orthocenter;
            v.tau = t.triangles[v.source_triangles[0]].tau;
        }
    }

    let mut cells = vec![None; balls.len()];
    for (i, cell) in cells.iter_mut().enumerate() {
        if !balls[i].alive || t.redundant[i] {
            continue;
        }
        let Some((fan, closed)) = t.fan(i) else {
            continue;
        };
        let mut vertices: Vec<usize> = Vec::with_capacity(fan.len());
        for &tri in &fan {
            let v = triangle_vertex[tri];
            if vertices.last() != Some(&v) {
                vertices.push(v);
            }
        }
        if closed && vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        let rays = if closed {
            None
        } else {
            let first = &t.triangles[fan[0]];
            let last = &t.triangles[*fan.last().expect("non-empty fan")];
            // The fan opens on hull edge (i, next) and closes on (prev, i).
            let k0 = first.slot_of(i).expect("fan triangle holds ball");
            let next = first.balls[(k0 + 1) % 3];
            let k1 = last.slot_of(i).expect("fan triangle holds ball");
            let prev = last.balls[(k1 + 2) % 3];
            let c = balls[i].center;
            let d_in = (balls[next].center - c).perp() * -1.0;
            let d_out = (c - balls[prev].center).perp() * -1.0;
            Some([unit(d_in), unit(d_out)])
        };
        *cell = Some(PowerCell {
            ball_index: i,
            vertices,
            bounded: closed,
            clipped: false,
            rays,
        });
    }

    PowerDiagram {
        cells,
        dual_vertices,
        triangle_vertex,
        domain: None,
        merge_eps,
    }
}

fn unit(p: Point2) -> Point2 {
    let n = p.norm();
    if n > 0.0 {
        p * (1.0 / n)
    } else {
        p
    }
}

impl PowerDiagram {
    pub fn with_domain(mut self, domain: Vec<Point2>) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn cell(&self, ball: usize) -> Option<&PowerCell> {
        self.cells.get(ball).and_then(|c| c.as_ref())
    }

    pub fn cell_polygon(&self, cell: &PowerCell) -> Vec<Point2> {
        cell.vertices
            .iter()
            .map(|&v| self.dual_vertices[v].position)
            .collect()
    }

    pub fn max_abs_tau(&self) -> f64 {
        self.dual_vertices
            .iter()
            .map(|v| v.tau.abs())
            .fold(0.0, f64::max)
    }

    /// Clips a cell against a convex counter-clockwise polygon. Unbounded
    /// cells are closed by their rays before clipping.
    pub fn clip_cell(&self, cell: &PowerCell, domain: &[Point2]) -> Vec<Point2> {
        let poly = self.cell_polygon(cell);
        if cell.bounded {
            return clip_convex(&poly, domain);
        }
        let Some([d_in, d_out]) = cell.rays else {
            return Vec::new();
        };
        // Intersect the domain with the half-planes left of each cell edge.
        let mut out = domain.to_vec();
        let first = poly[0];
        out = clip_halfplane(&out, first + d_in, first);
        for w in poly.windows(2) {
            out = clip_halfplane(&out, w[0], w[1]);
        }
        let last = *poly.last().expect("cell has a vertex");
        clip_halfplane(&out, last, last + d_out)
    }

    /// Non-overlapping area check helper: total area of bounded cells.
    pub fn bounded_area(&self) -> f64 {
        self.cells
            .iter()
            .flatten()
            .filter(|c| c.bounded)
            .map(|c| polygon_area(&self.cell_polygon(c)))
            .sum()
    }

    /// Largest `|tau - power(b, v)|` over dual vertices and balls of their
    /// source triangles.
    pub fn equal_power_residual(&self, t: &RegularTriangulation, balls: &[Ball]) -> f64 {
        let mut worst: f64 = 0.0;
        for v in &self.dual_vertices {
            let scale = 1.0 + v.position.norm2();
            for &s in &v.source_triangles {
                for &b in &t.triangles[s].balls {
                    worst = worst.max((power(&balls[b], v.position) - v.tau).abs() / scale);
                }
            }
        }
        worst
    }
}

/// Keeps the part of `poly` left of the directed line `a -> b`.
pub fn clip_halfplane(poly: &[Point2], a: Point2, b: Point2) -> Vec<Point2> {
    let d = b - a;
    let side = |p: Point2| d.cross(p - a);
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            out.push(p.lerp(q, sp / (sp - sq)));
        }
    }
    out
}

/// Sutherland-Hodgman clip of `subject` by a convex counter-clockwise `clip`.
pub fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        out = clip_halfplane(&out, clip[i], clip[(i + 1) % clip.len()]);
    }
    out
}
