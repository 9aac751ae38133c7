//! Regular (weighted Delaunay) triangulation of a ball set.
//!
//! Incremental Bowyer-Watson insertion driven by the exact lifted power test.
//! The convex hull is closed with ghost triangles sharing a single vertex at
//! infinity, so hull edges through collinear centers come out exactly. Exact
//! ties are broken by perturbing lifted heights symbolically in ball-index
//! order (the higher index is lifted infinitesimally more), which makes the
//! output a function of the ball set alone, never of the insertion order.

use std::collections::HashMap;

use thiserror::Error;

use crate::kernel::{
    orient2d, orthocenter_guarded, power, power_test_raw, signed_area, Ball, Point2, Sign,
};
use crate::par::{self, Execution};

const GHOST: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TriangulationError {
    #[error("too few balls: need at least 3 alive balls, got {0}")]
    TooFewBalls(usize),
    #[error("all alive ball centers are collinear")]
    AllCollinear,
    #[error("ball {0} has a non-finite center or radius")]
    NonFinite(usize),
}

/// A weighted Delaunay triangle over three ball centers.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    /// Ball indices in counter-clockwise order of their centers.
    pub balls: [usize; 3],
    /// Point of equal power with respect to the three balls.
    pub orthocenter: Point2,
    /// Power of the orthocenter.
    pub tau: f64,
    /// `neighbors[k]` shares the edge opposite `balls[k]`; `None` on the hull.
    pub neighbors: [Option<usize>; 3],
}

impl Triangle {
    pub fn area(&self, balls: &[Ball]) -> f64 {
        let [a, b, c] = self.balls;
        signed_area(balls[a].center, balls[b].center, balls[c].center)
    }

    pub fn slot_of(&self, ball: usize) -> Option<usize> {
        self.balls.iter().position(|&b| b == ball)
    }
}

#[derive(Clone, Debug)]
pub struct RegularTriangulation {
    pub triangles: Vec<Triangle>,
    /// Alive balls whose lifted point lies above the lower envelope.
    pub redundant: Vec<bool>,
    /// Hull edges `(from, to)` in counter-clockwise order, interior on the left.
    pub hull: Vec<(usize, usize)>,
    /// One incident triangle per ball that appears in the triangulation.
    pub vertex_triangle: Vec<Option<usize>>,
}

/// A `(triangle, ball)` pair failing the regularity test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub triangle: usize,
    pub ball: usize,
}

pub fn build_regular(balls: &[Ball]) -> Result<RegularTriangulation, TriangulationError> {
    build_regular_with_seed(balls, 0x9e37_79b9_7f4a_7c15)
}

/// Like [`build_regular`]; `seed` only steers the point-location walk.
pub fn build_regular_with_seed(
    balls: &[Ball],
    seed: u64,
) -> Result<RegularTriangulation, TriangulationError> {
    let mut active = Vec::new();
    for (i, b) in balls.iter().enumerate() {
        if !b.alive {
            continue;
        }
        if !b.is_finite() {
            return Err(TriangulationError::NonFinite(i));
        }
        active.push(i);
    }
    if active.len() < 3 {
        return Err(TriangulationError::TooFewBalls(active.len()));
    }
    let order = spatial_order(balls, &active);
    let mut mesh = Mesh::new(balls, seed);
    let (a, b, c) = mesh.seed_triangle(&order)?;
    for &i in &order {
        if i != a && i != b && i != c {
            mesh.insert(i);
        }
    }
    Ok(mesh.finish())
}

impl RegularTriangulation {
    /// Builds the adjacency structure for an explicit list of triangles
    /// (each reoriented counter-clockwise). Useful for checking externally
    /// supplied meshes with [`verify_regular`].
    pub fn from_triangles(balls: &[Ball], tris: &[[usize; 3]]) -> Self {
        let mut oriented: Vec<[usize; 3]> = tris
            .iter()
            .map(|&[a, b, c]| {
                if orient2d(balls[a].center, balls[b].center, balls[c].center) == Sign::Negative {
                    [a, c, b]
                } else {
                    [a, b, c]
                }
            })
            .collect();
        oriented.retain(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
        let mut edge_owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (t, v) in oriented.iter().enumerate() {
            for k in 0..3 {
                edge_owner.insert((v[(k + 1) % 3], v[(k + 2) % 3]), (t, k));
            }
        }
        let mut triangles = Vec::with_capacity(oriented.len());
        let mut hull = Vec::new();
        for v in &oriented {
            let mut neighbors = [None; 3];
            for (k, slot) in neighbors.iter_mut().enumerate() {
                let (p, q) = (v[(k + 1) % 3], v[(k + 2) % 3]);
                match edge_owner.get(&(q, p)) {
                    Some(&(n, _)) => *slot = Some(n),
                    None => hull.push((p, q)),
                }
            }
            let (orthocenter, tau) = triangle_orthocenter(balls, *v);
            triangles.push(Triangle {
                balls: *v,
                orthocenter,
                tau,
                neighbors,
            });
        }
        let hull = order_hull(hull);
        let mut vertex_triangle = vec![None; balls.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for &b in &tri.balls {
                vertex_triangle[b].get_or_insert(t);
            }
        }
        let redundant = balls
            .iter()
            .zip(&vertex_triangle)
            .map(|(b, vt)| b.alive && vt.is_none())
            .collect();
        RegularTriangulation {
            triangles,
            redundant,
            hull,
            vertex_triangle,
        }
    }

    /// Whether the ball is a vertex of the triangulation.
    pub fn contains_ball(&self, ball: usize) -> bool {
        self.vertex_triangle.get(ball).is_some_and(|t| t.is_some())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_triangle.iter().filter(|t| t.is_some()).count()
    }

    /// Undirected edges as sorted ball pairs, sorted.
    pub fn edge_set(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| {
                let [a, b, c] = t.balls;
                [(a, b), (b, c), (c, a)]
            })
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Triangles around `ball` in counter-clockwise order. For hull balls the
    /// fan starts right after the hull and ends right before it.
    pub fn fan(&self, ball: usize) -> Option<(Vec<usize>, bool)> {
        let start = self.vertex_triangle.get(ball).copied().flatten()?;
        let next_ccw = |t: usize| -> Option<usize> {
            let tri = &self.triangles[t];
            let k = tri.slot_of(ball)?;
            tri.neighbors[(k + 1) % 3]
        };
        let prev_cw = |t: usize| -> Option<usize> {
            let tri = &self.triangles[t];
            let k = tri.slot_of(ball)?;
            tri.neighbors[(k + 2) % 3]
        };
        // Rewind clockwise to the hull, if there is one.
        let mut first = start;
        let mut steps = 0;
        let mut closed = false;
        while let Some(p) = prev_cw(first) {
            if p == start {
                closed = true;
                break;
            }
            first = p;
            steps += 1;
            if steps > self.triangles.len() {
                return None;
            }
        }
        if closed {
            first = start;
        }
        let mut fan = vec![first];
        let mut cur = first;
        while let Some(n) = next_ccw(cur) {
            if n == first {
                break;
            }
            fan.push(n);
            cur = n;
            if fan.len() > self.triangles.len() {
                return None;
            }
        }
        Some((fan, closed))
    }
}

fn order_hull(edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    if edges.is_empty() {
        return edges;
    }
    let next: HashMap<usize, usize> = edges.iter().copied().collect();
    let start = edges.iter().map(|e| e.0).min().unwrap_or(edges[0].0);
    let mut out = Vec::with_capacity(edges.len());
    let mut cur = start;
    while let Some(&to) = next.get(&cur) {
        out.push((cur, to));
        cur = to;
        if cur == start || out.len() > edges.len() {
            break;
        }
    }
    out
}

pub(crate) fn triangle_orthocenter(balls: &[Ball], v: [usize; 3]) -> (Point2, f64) {
    let (b1, b2, b3) = (&balls[v[0]], &balls[v[1]], &balls[v[2]]);
    match orthocenter_guarded(b1, b2, b3, 0.0) {
        Ok(r) => r,
        Err(_) => {
            let c = (b1.center + b2.center + b3.center) * (1.0 / 3.0);
            (c, power(b1, c))
        }
    }
}

/// Exact regularity check of every triangle against every other alive ball.
pub fn verify_regular(t: &RegularTriangulation, balls: &[Ball]) -> Vec<Violation> {
    verify_regular_with(t, balls, Execution::default())
}

pub fn verify_regular_with(
    t: &RegularTriangulation,
    balls: &[Ball],
    exec: Execution,
) -> Vec<Violation> {
    let per_triangle = par::map_slice(exec, &t.triangles, |tri| {
        let [a, b, c] = tri.balls;
        balls
            .iter()
            .enumerate()
            .filter(|(m, ball)| ball.alive && *m != a && *m != b && *m != c)
            .filter(|(_, ball)| {
                power_test_raw(&balls[a], &balls[b], &balls[c], ball) == Sign::Negative
            })
            .map(|(m, _)| m)
            .collect::<Vec<_>>()
    });
    per_triangle
        .into_iter()
        .enumerate()
        .flat_map(|(triangle, bad)| bad.into_iter().map(move |ball| Violation { triangle, ball }))
        .collect()
}

/// Power test with symbolic perturbation of lifted heights: the ball with
/// the highest index among the four decides exact ties.
fn power_test_sos(balls: &[Ball], i: usize, j: usize, k: usize, l: usize) -> Sign {
    let s = power_test_raw(&balls[i], &balls[j], &balls[k], &balls[l]);
    if s != Sign::Zero {
        return s;
    }
    let c = |m: usize| balls[m].center;
    let mut idx = [i, j, k, l];
    idx.sort_unstable_by(|a, b| b.cmp(a));
    for m in idx {
        let coef = if m == l {
            orient2d(c(i), c(j), c(k))
        } else if m == i {
            orient2d(c(l), c(j), c(k)).flip()
        } else if m == j {
            orient2d(c(i), c(l), c(k)).flip()
        } else {
            orient2d(c(i), c(j), c(l)).flip()
        };
        if coef != Sign::Zero {
            return coef;
        }
    }
    Sign::Zero
}

fn spatial_order(balls: &[Ball], active: &[usize]) -> Vec<usize> {
    let (mut lo, mut hi) = (
        Point2::new(f64::INFINITY, f64::INFINITY),
        Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for &i in active {
        let p = balls[i].center;
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
    let side = (1u32 << 16) as f64 - 1.0;
    let mut keyed: Vec<(u64, usize)> = active
        .iter()
        .map(|&i| {
            let p = balls[i].center;
            let x = (((p.x - lo.x) / span) * side) as u32;
            let y = (((p.y - lo.y) / span) * side) as u32;
            (hilbert_index(x, y), i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn hilbert_index(mut x: u32, mut y: u32) -> u64 {
    let n: u32 = 1 << 16;
    let mut d: u64 = 0;
    let mut s = n / 2;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

struct Mesh<'a> {
    balls: &'a [Ball],
    verts: Vec<[usize; 3]>,
    nbrs: Vec<[usize; 3]>,
    dead: Vec<bool>,
    free: Vec<usize>,
    hidden: Vec<bool>,
    last: usize,
    rng: u64,
    mark: Vec<u32>,
    epoch: u32,
}

impl<'a> Mesh<'a> {
    fn new(balls: &'a [Ball], seed: u64) -> Self {
        Mesh {
            balls,
            verts: Vec::new(),
            nbrs: Vec::new(),
            dead: Vec::new(),
            free: Vec::new(),
            hidden: vec![false; balls.len()],
            last: 0,
            rng: seed | 1,
            mark: Vec::new(),
            epoch: 0,
        }
    }

    fn next_rand(&mut self) -> u64 {
        // xorshift64*
        self.rng ^= self.rng >> 12;
        self.rng ^= self.rng << 25;
        self.rng ^= self.rng >> 27;
        self.rng.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    fn center(&self, i: usize) -> Point2 {
        self.balls[i].center
    }

    fn alloc(&mut self, v: [usize; 3]) -> usize {
        if let Some(t) = self.free.pop() {
            self.verts[t] = v;
            self.nbrs[t] = [GHOST; 3];
            self.dead[t] = false;
            t
        } else {
            self.verts.push(v);
            self.nbrs.push([GHOST; 3]);
            self.dead.push(false);
            self.mark.push(0);
            self.verts.len() - 1
        }
    }

    fn seed_triangle(&mut self, order: &[usize]) -> Result<(usize, usize, usize), TriangulationError> {
        let a = order[0];
        let pa = self.center(a);
        let b = *order
            .iter()
            .find(|&&i| self.center(i) != pa)
            .ok_or(TriangulationError::AllCollinear)?;
        let pb = self.center(b);
        let c = *order
            .iter()
            .find(|&&i| orient2d(pa, pb, self.center(i)) != Sign::Zero)
            .ok_or(TriangulationError::AllCollinear)?;
        let v = if orient2d(pa, pb, self.center(c)) == Sign::Positive {
            [a, b, c]
        } else {
            [a, c, b]
        };
        let t0 = self.alloc(v);
        let g: Vec<usize> = (0..3)
            .map(|k| self.alloc([v[(k + 2) % 3], v[(k + 1) % 3], GHOST]))
            .collect();
        for k in 0..3 {
            self.nbrs[t0][k] = g[k];
            self.nbrs[g[k]] = [g[(k + 2) % 3], g[(k + 1) % 3], t0];
        }
        self.last = t0;
        Ok((a, b, c))
    }

    fn conflicts_solid(&self, t: usize, p: usize) -> bool {
        let [a, b, c] = self.verts[t];
        power_test_sos(self.balls, a, b, c, p) == Sign::Negative
    }

    fn conflicts(&self, t: usize, p: usize) -> bool {
        let [a, b, c] = self.verts[t];
        if c != GHOST {
            return self.conflicts_solid(t, p);
        }
        match orient2d(self.center(a), self.center(b), self.center(p)) {
            Sign::Positive => true,
            Sign::Negative => false,
            Sign::Zero => self.conflicts_solid(self.nbrs[t][2], p),
        }
    }

    fn contains(&self, t: usize, q: Point2) -> bool {
        let [a, b, c] = self.verts[t];
        if c == GHOST {
            return orient2d(self.center(a), self.center(b), q) == Sign::Positive;
        }
        (0..3).all(|k| {
            let (u, w) = (self.verts[t][(k + 1) % 3], self.verts[t][(k + 2) % 3]);
            orient2d(self.center(u), self.center(w), q) != Sign::Negative
        })
    }

    fn locate(&mut self, q: Point2) -> usize {
        let mut t = self.last;
        if self.dead[t] {
            t = (0..self.verts.len()).find(|&i| !self.dead[i]).unwrap_or(0);
        }
        let limit = 4 * self.verts.len() + 64;
        for _ in 0..limit {
            let [a, b, c] = self.verts[t];
            if c == GHOST {
                if orient2d(self.center(a), self.center(b), q) == Sign::Positive {
                    return t;
                }
                t = self.nbrs[t][2];
                continue;
            }
            let r = (self.next_rand() % 3) as usize;
            let mut moved = false;
            for i in 0..3 {
                let k = (r + i) % 3;
                let (u, w) = (self.verts[t][(k + 1) % 3], self.verts[t][(k + 2) % 3]);
                if orient2d(self.center(u), self.center(w), q) == Sign::Negative {
                    t = self.nbrs[t][k];
                    moved = true;
                    break;
                }
            }
            if !moved {
                return t;
            }
        }
        // The visibility walk can cycle in non-Delaunay meshes; fall back to a scan.
        (0..self.verts.len())
            .find(|&i| !self.dead[i] && self.verts[i][2] != GHOST && self.contains(i, q))
            .or_else(|| (0..self.verts.len()).find(|&i| !self.dead[i] && self.contains(i, q)))
            .expect("point location failed on a closed mesh")
    }

    fn insert(&mut self, p: usize) {
        let start = self.locate(self.center(p));
        if !self.conflicts(start, p) {
            self.hidden[p] = true;
            return;
        }
        self.epoch += 1;
        let epoch = self.epoch;
        let mut cavity = vec![start];
        self.mark[start] = epoch;
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        let mut i = 0;
        while i < cavity.len() {
            let t = cavity[i];
            i += 1;
            for k in 0..3 {
                let n = self.nbrs[t][k];
                if self.mark[n] == epoch {
                    continue;
                }
                if self.conflicts(n, p) {
                    self.mark[n] = epoch;
                    cavity.push(n);
                } else {
                    boundary.push((t, k));
                }
            }
        }

        let mut on_boundary: Vec<usize> = Vec::with_capacity(2 * boundary.len());
        for &(t, k) in &boundary {
            on_boundary.push(self.verts[t][(k + 1) % 3]);
            on_boundary.push(self.verts[t][(k + 2) % 3]);
        }
        for &t in &cavity {
            for v in self.verts[t] {
                if v != GHOST && !on_boundary.contains(&v) {
                    self.hidden[v] = true;
                }
            }
        }

        let mut created = Vec::with_capacity(boundary.len());
        let mut ends: Vec<(usize, usize, usize)> = Vec::with_capacity(boundary.len());
        for &(t, k) in &boundary {
            let e0 = self.verts[t][(k + 1) % 3];
            let e1 = self.verts[t][(k + 2) % 3];
            let outside = self.nbrs[t][k];
            ends.push((e0, e1, outside));
        }
        for &t in &cavity {
            self.dead[t] = true;
            self.free.push(t);
        }
        for (e0, e1, outside) in ends {
            let v = if e1 == GHOST {
                [p, e0, GHOST]
            } else if e0 == GHOST {
                [e1, p, GHOST]
            } else {
                [e0, e1, p]
            };
            let nt = self.alloc(v);
            let pk = v.iter().position(|&x| x == p).expect("new triangle holds p");
            self.nbrs[nt][pk] = outside;
            let back = (0..3)
                .find(|&s| self.verts[outside][s] != e0 && self.verts[outside][s] != e1)
                .expect("outside triangle shares the boundary edge");
            self.nbrs[outside][back] = nt;
            created.push(nt);
        }

        // Stitch the new triangles around p: edge p->a in one, a->p in another.
        let mut out_edge: HashMap<usize, (usize, usize)> = HashMap::with_capacity(created.len());
        let mut in_edge: HashMap<usize, (usize, usize)> = HashMap::with_capacity(created.len());
        for &nt in &created {
            let v = self.verts[nt];
            let pk = v.iter().position(|&x| x == p).expect("new triangle holds p");
            out_edge.insert(v[(pk + 1) % 3], (nt, (pk + 2) % 3));
            in_edge.insert(v[(pk + 2) % 3], (nt, (pk + 1) % 3));
        }
        for (a, (t1, s1)) in &out_edge {
            let (t2, s2) = in_edge[a];
            self.nbrs[*t1][*s1] = t2;
            self.nbrs[t2][s2] = *t1;
        }
        self.last = created[0];
    }

    fn finish(self) -> RegularTriangulation {
        let mut remap = vec![usize::MAX; self.verts.len()];
        let mut triangles = Vec::new();
        for (t, &verts) in self.verts.iter().enumerate() {
            if !self.dead[t] && verts[2] != GHOST {
                remap[t] = triangles.len();
                let (orthocenter, tau) = triangle_orthocenter(self.balls, verts);
                triangles.push(Triangle {
                    balls: verts,
                    orthocenter,
                    tau,
                    neighbors: [None; 3],
                });
            }
        }
        let mut hull_edges = Vec::new();
        for t in 0..self.verts.len() {
            if self.dead[t] {
                continue;
            }
            if self.verts[t][2] == GHOST {
                let [u, w, _] = self.verts[t];
                hull_edges.push((w, u));
                continue;
            }
            let nt = remap[t];
            for k in 0..3 {
                let m = remap[self.nbrs[t][k]];
                triangles[nt].neighbors[k] = (m != usize::MAX).then_some(m);
            }
        }
        let mut vertex_triangle = vec![None; self.balls.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for &b in &tri.balls {
                vertex_triangle[b].get_or_insert(t);
            }
        }
        let redundant = self
            .balls
            .iter()
            .enumerate()
            .map(|(i, b)| b.alive && (self.hidden[i] || vertex_triangle[i].is_none()))
            .collect();
        RegularTriangulation {
            triangles,
            redundant,
            hull: order_hull(hull_edges),
            vertex_triangle,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(x: f64, y: f64, r2: f64) -> Ball {
        Ball::from_radius2(Point2::new(x, y), r2)
    }

    #[test]
    fn three_balls_one_triangle() {
        let balls = [ball(0.0, 0.0, 0.3), ball(1.0, 0.2, 0.9), ball(0.4, 1.0, 0.1)];
        let t = build_regular(&balls).unwrap();
        assert_eq!(t.triangles.len(), 1);
        assert!(t.redundant.iter().all(|r| !r));
        assert_eq!(t.hull.len(), 3);
        assert!(verify_regular(&t, &balls).is_empty());
    }

    #[test]
    fn heavy_corners_hide_center() {
        let balls = [
            ball(0.0, 0.0, 1.0),
            ball(1.0, 0.0, 1.0),
            ball(0.0, 1.0, 1.0),
            ball(1.0, 1.0, 1.0),
            ball(0.5, 0.5, 0.4),
        ];
        let t = build_regular(&balls).unwrap();
        assert_eq!(t.triangles.len(), 2);
        assert_eq!(t.redundant, vec![false, false, false, false, true]);
        assert!(verify_regular(&t, &balls).is_empty());
    }

    #[test]
    fn errors() {
        let two = [ball(0.0, 0.0, 0.0), ball(1.0, 0.0, 0.0)];
        assert_eq!(build_regular(&two).unwrap_err(), TriangulationError::TooFewBalls(2));
        let line: Vec<Ball> = (0..5).map(|i| ball(i as f64, 2.0 * i as f64, 0.1)).collect();
        assert_eq!(build_regular(&line).unwrap_err(), TriangulationError::AllCollinear);
    }

    #[test]
    fn collinear_hull_points_keep_hull_edges() {
        let mut balls = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                balls.push(ball(i as f64, j as f64, 0.25));
            }
        }
        let t = build_regular(&balls).unwrap();
        assert_eq!(t.triangles.len(), 18);
        assert_eq!(t.hull.len(), 12);
        assert!(verify_regular(&t, &balls).is_empty());
        for w in t.hull.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn duplicate_centers_hide_the_smaller_ball() {
        let balls = [
            ball(0.0, 0.0, 0.1),
            ball(2.0, 0.0, 0.1),
            ball(0.0, 2.0, 0.1),
            ball(0.6, 0.6, 0.1),
            ball(0.6, 0.6, 0.2),
        ];
        let t = build_regular(&balls).unwrap();
        assert!(t.redundant[3]);
        assert!(!t.redundant[4]);
        // Exact tie: the higher index is lifted higher and disappears.
        let tie = [balls[0], balls[1], balls[2], balls[3], balls[3]];
        let t = build_regular(&tie).unwrap();
        assert!(!t.redundant[3]);
        assert!(t.redundant[4]);
    }

    #[test]
    fn fan_walks_around_interior_and_hull_vertices() {
        let balls = [
            ball(0.0, 0.0, 0.0),
            ball(2.0, 0.0, 0.0),
            ball(1.0, 2.0, 0.0),
            ball(1.0, 0.7, 0.0),
        ];
        let t = build_regular(&balls).unwrap();
        let (fan, closed) = t.fan(3).unwrap();
        assert!(closed);
        assert_eq!(fan.len(), 3);
        let (fan, closed) = t.fan(0).unwrap();
        assert!(!closed);
        assert_eq!(fan.len(), 2);
    }
}
