//! Recovering a ball set from a perturbed point cloud.
//!
//! A Delaunay partition cell with four or more cocircular vertices is split
//! into several triangles whose circumcircles coincide. Once the points are
//! perturbed the circles drift apart slightly, and collinear runs of points
//! on the hull turn into slivers with enormous, meaningless circumcircles.
//! Recovery clusters the nearby circumcenters, replaces every cluster with a
//! single circle, and drops the slivers, so that the radical partition of the
//! result reproduces the unperturbed Delaunay partition.

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::kernel::{circumcenter_guarded, signed_area, Ball, Point2, DEFAULT_CONDITIONING};
use crate::regular::{build_regular, TriangulationError};

/// Default relative area threshold; triangles smaller than
/// `DEFAULT_AREA_TOL * bbox_diag^2` never contribute a circle.
pub const DEFAULT_AREA_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecoveryError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all points are collinear")]
    AllCollinear,
    #[error("point {0} is not finite")]
    NonFinite(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircumCluster {
    /// Indices into the Delaunay triangle list that was clustered.
    pub member_triangles: Vec<usize>,
    /// Point indices of every member triangle, sorted and deduplicated.
    pub vertices: Vec<usize>,
    pub center: Point2,
    pub radius: f64,
    pub total_area: f64,
}

impl CircumCluster {
    pub fn ball(&self) -> Ball {
        Ball::new(self.center, self.radius)
    }
}

fn bbox_diag(points: &[Point2]) -> f64 {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if lo.x > hi.x {
        0.0
    } else {
        hi.dist(lo)
    }
}

/// `1e-6` times the bounding-box diagonal of the points.
pub fn default_cluster_eps(points: &[Point2]) -> f64 {
    1e-6 * bbox_diag(points)
}

/// Single-linkage clusters of `points` at distance `eps`, as lists of
/// indices. Each list is ascending and the lists are ordered by their first
/// element.
pub fn single_linkage(points: &[Point2], eps: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut uf = UnionFind::<usize>::new(n);
    let mut by_x: Vec<usize> = (0..n).collect();
    by_x.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(a.cmp(&b)));
    let eps2 = eps * eps;
    for (k, &i) in by_x.iter().enumerate() {
        for &j in &by_x[k + 1..] {
            if points[j].x - points[i].x > eps {
                break;
            }
            if points[i].dist2(points[j]) <= eps2 {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = uf.find(i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Replaces every single-linkage cluster of points closer than `vertex_eps`
/// with its centroid. Output order follows the first member of each cluster.
pub fn vertex_cluster_merge(points: &[Point2], vertex_eps: f64) -> Vec<Point2> {
    single_linkage(points, vertex_eps)
        .into_iter()
        .map(|g| {
            let s = g.iter().fold(Point2::default(), |acc, &i| acc + points[i]);
            s * (1.0 / g.len() as f64)
        })
        .collect()
}

/// Clusters the circumcircles of the Delaunay triangles of `points`.
///
/// A triangle is skipped when its area is below `area_tol * bbox_diag^2`,
/// when the kernel refuses its circumcenter, or when its smallest altitude
/// is below `cluster_eps`. The last rule removes slivers: at the resolution
/// of the clustering such a triangle is a collinear triple, and its circle is
/// not determined by the data.
pub fn recover_clusters(
    points: &[Point2],
    cluster_eps: f64,
    area_tol: f64,
) -> Result<Vec<CircumCluster>, RecoveryError> {
    if points.len() < 3 {
        return Err(RecoveryError::TooFewPoints(points.len()));
    }
    let balls: Vec<Ball> = points.iter().map(|&p| Ball::new(p, 0.0)).collect();
    let t = build_regular(&balls).map_err(|e| match e {
        TriangulationError::TooFewBalls(n) => RecoveryError::TooFewPoints(n),
        TriangulationError::AllCollinear => RecoveryError::AllCollinear,
        TriangulationError::NonFinite(i) => RecoveryError::NonFinite(i),
    })?;
    let diag = bbox_diag(points);
    let min_area = area_tol * diag * diag;

    let mut kept = Vec::new();
    let mut centers = Vec::new();
    let mut areas = Vec::new();
    for (k, tri) in t.triangles.iter().enumerate() {
        let [a, b, c] = tri.balls.map(|i| points[i]);
        let area = signed_area(a, b, c);
        if !(area > min_area) {
            continue;
        }
        let longest = a.dist(b).max(b.dist(c)).max(c.dist(a));
        if 2.0 * area / longest < cluster_eps {
            continue;
        }
        let Ok(cc) = circumcenter_guarded(a, b, c, DEFAULT_CONDITIONING) else {
            continue;
        };
        kept.push(k);
        centers.push(cc);
        areas.push(area);
    }

    let clusters = single_linkage(&centers, cluster_eps)
        .into_iter()
        .map(|group| {
            let total_area: f64 = group.iter().map(|&g| areas[g]).sum();
            let weighted = group
                .iter()
                .fold(Point2::default(), |acc, &g| acc + centers[g] * areas[g]);
            let center = weighted * (1.0 / total_area);
            let mut vertices: Vec<usize> = group
                .iter()
                .flat_map(|&g| t.triangles[kept[g]].balls)
                .collect();
            vertices.sort_unstable();
            vertices.dedup();
            // Least squares over |p - c| - R gives the mean distance.
            let radius = vertices.iter().map(|&v| points[v].dist(center)).sum::<f64>()
                / vertices.len() as f64;
            CircumCluster {
                member_triangles: group.iter().map(|&g| kept[g]).collect(),
                vertices,
                center,
                radius,
                total_area,
            }
        })
        .collect();
    Ok(clusters)
}

pub fn recover_spheres(
    points: &[Point2],
    cluster_eps: f64,
    area_tol: f64,
) -> Result<Vec<Ball>, RecoveryError> {
    Ok(recover_clusters(points, cluster_eps, area_tol)?
        .iter()
        .map(CircumCluster::ball)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(k: usize) -> Vec<Point2> {
        (0..k)
            .flat_map(|j| (0..k).map(move |i| Point2::new(i as f64, j as f64)))
            .collect()
    }

    #[test]
    fn unit_square_gives_one_circle() {
        let pts = grid(2);
        let balls = recover_spheres(&pts, default_cluster_eps(&pts), DEFAULT_AREA_TOL).unwrap();
        assert_eq!(balls.len(), 1);
        assert!(balls[0].center.dist(Point2::new(0.5, 0.5)) < 1e-15);
        assert!((balls[0].radius - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jittered_grid_gives_cell_circles() {
        let mut pts = grid(3);
        let signs = [1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, -1.0];
        for (i, p) in pts.iter_mut().enumerate() {
            p.x += 1e-9 * signs[i];
            p.y -= 1e-9 * signs[(i + 4) % 9];
        }
        let balls = recover_spheres(&pts, default_cluster_eps(&pts), DEFAULT_AREA_TOL).unwrap();
        assert_eq!(balls.len(), 4);
        for b in &balls {
            let cx = b.center.x.floor() + 0.5;
            let cy = b.center.y.floor() + 0.5;
            assert!(b.center.dist(Point2::new(cx, cy)) < 1e-6);
            assert!((b.radius - 0.5f64.sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn sliver_contributes_nothing() {
        // The middle point sits a hair below the segment between the outer
        // two, so the hull picks up a sliver triangle.
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, -1e-12),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 1.0),
        ];
        let clusters = recover_clusters(&pts, default_cluster_eps(&pts), DEFAULT_AREA_TOL).unwrap();
        assert_eq!(clusters.len(), 2);
        for c in &clusters {
            assert_eq!(c.member_triangles.len(), 1);
            assert!((c.center.y - 0.5).abs() < 1e-9);
            assert!((c.radius - 0.5f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn errors() {
        let two = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
        assert_eq!(recover_spheres(&two, 1e-6, 1e-12), Err(RecoveryError::TooFewPoints(2)));
        let line: Vec<Point2> = (0..5).map(|i| Point2::new(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(recover_spheres(&line, 1e-6, 1e-12), Err(RecoveryError::AllCollinear));
    }

    #[test]
    fn merging_vertices() {
        let eps = 0.1;
        let pts = [Point2::new(0.0, 0.0), Point2::new(0.05, 0.0)];
        let merged = vertex_cluster_merge(&pts, eps);
        assert_eq!(merged, vec![Point2::new(0.025, 0.0)]);

        let far = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        assert_eq!(vertex_cluster_merge(&far, eps), far.to_vec());

        let chain = [Point2::new(0.0, 0.0), Point2::new(0.09, 0.0), Point2::new(0.18, 0.0)];
        let merged = vertex_cluster_merge(&chain, eps);
        assert_eq!(merged.len(), 1);
        assert!((merged[0].x - 0.09).abs() < 1e-15);
    }
}
