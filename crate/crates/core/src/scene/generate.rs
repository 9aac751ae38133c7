use std::f64::consts::{PI, SQRT_2};

use crate::kernel::{Ball, Point2};
use crate::optimizer::OptimizerConfig;

use super::rng::SceneRng;
use super::{Scene, SceneError};

/// Protecting circles must reach at least this fraction of their spacing so
/// that neighbours intersect.
const MIN_PROTECT_RATIO: f64 = 0.55;

#[derive(Clone, Debug, PartialEq)]
pub struct SquareCircleParams {
    pub side: f64,
    /// Radius of the circular hole at the square's center; zero for a plain
    /// square.
    pub inner_radius: f64,
    pub boundary_spacing: f64,
    /// Rings of fixed-center circles laid around the hole.
    pub layer_count: usize,
    pub interior_spacing: f64,
    /// Center jitter as a fraction of the interior spacing; radii are
    /// jittered by half this fraction of their value.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for SquareCircleParams {
    fn default() -> Self {
        SquareCircleParams {
            side: 1.0,
            inner_radius: 0.2,
            boundary_spacing: 1.0 / 16.0,
            layer_count: 2,
            interior_spacing: 1.0 / 16.0,
            jitter: 0.2,
            seed: 0,
        }
    }
}

fn inconsistent(msg: impl Into<String>) -> SceneError {
    SceneError::InconsistentGeometry(msg.into())
}

fn square(x0: f64, y0: f64, w: f64, h: f64) -> Vec<Point2> {
    vec![
        Point2::new(x0, y0),
        Point2::new(x0 + w, y0),
        Point2::new(x0 + w, y0 + h),
        Point2::new(x0, y0 + h),
    ]
}

fn polar(o: Point2, r: f64, a: f64) -> Point2 {
    o + Point2::new(a.cos(), a.sin()) * r
}

/// A square with a circular hole. The outer boundary is covered by
/// fixed-center circles; the hole by fully fixed circles whose neighbours
/// meet on two concentric polygons, plus a fixed cap filling the hole. Rings
/// of fixed-center circles extend the hole's cells outward as near-square
/// quadrilaterals, and a jittered lattice of free circles fills the rest.
pub fn gen_square_with_circle(p: &SquareCircleParams) -> Result<Scene, SceneError> {
    let positive = [p.side, p.boundary_spacing, p.interior_spacing];
    if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !(p.inner_radius >= 0.0) || !(p.jitter >= 0.0) {
        return Err(inconsistent("lengths must be positive and finite"));
    }
    let side = p.side;
    let nb = (side / p.boundary_spacing).round().max(2.0) as usize;
    let s = side / nb as f64;
    if s / SQRT_2 < MIN_PROTECT_RATIO * s {
        return Err(inconsistent("boundary circles too small"));
    }
    let mut balls = Vec::new();
    for k in 0..4 * nb {
        let (edge, j) = (k / nb, (k % nb) as f64 * s);
        let c = match edge {
            0 => Point2::new(j, 0.0),
            1 => Point2::new(side, j),
            2 => Point2::new(side - j, side),
            _ => Point2::new(0.0, side - j),
        };
        balls.push(Ball::new(c, s / SQRT_2).with_fixed(true, false));
    }

    let o = Point2::new(0.5 * side, 0.5 * side);
    if p.inner_radius > 0.0 {
        let rho = p.inner_radius;
        let m = ((2.0 * PI * rho / p.boundary_spacing).round() as usize).max(8);
        let delta = 2.0 * PI / m as f64;
        let (sh, ch) = ((0.5 * delta).sin(), (0.5 * delta).cos());
        let t = 0.5 * rho * delta;
        let r0 = rho * ch - t;
        let r1 = rho * ch + t;
        if !(r0 > 0.0) {
            return Err(inconsistent("hole too small for its protecting circles"));
        }
        let rp = ((rho * sh).powi(2) + t * t).sqrt();
        if rp < MIN_PROTECT_RATIO * rho * delta {
            return Err(inconsistent("hole protecting circles too small"));
        }
        balls.push(Ball::new(o, r0).with_fixed(true, true));
        for k in 0..m {
            balls.push(Ball::new(polar(o, rho, k as f64 * delta), rp).with_fixed(true, true));
        }
        let mut r = r1;
        for _ in 0..p.layer_count {
            let next = r * (1.0 + 2.0 * sh);
            let dist = (r + next) / (2.0 * ch);
            let corner = polar(Point2::default(), r, 0.5 * delta);
            let radius = Point2::new(dist, 0.0).dist(corner);
            for k in 0..m {
                balls.push(Ball::new(polar(o, dist, k as f64 * delta), radius).with_fixed(true, false));
            }
            r = next;
        }
        if r + s >= 0.5 * side {
            return Err(inconsistent("hole and its rings do not fit inside the square"));
        }
    }

    let ni = (side / p.interior_spacing).round().max(2.0) as usize;
    let si = side / ni as f64;
    let r_int = si / SQRT_2;
    let mut rng = SceneRng::new(p.seed);
    let domain = square(0.0, 0.0, side, side);
    let fixed_until = balls.len();
    for j in 1..ni {
        for i in 1..ni {
            let (dx, dy, dr) = (rng.symmetric(), rng.symmetric(), rng.symmetric());
            let c = Point2::new(i as f64 * si + p.jitter * si * dx, j as f64 * si + p.jitter * si * dy);
            let r = r_int * (1.0 + 0.5 * p.jitter * dr);
            let inside = c.x > 0.0 && c.x < side && c.y > 0.0 && c.y < side;
            if inside && !balls[..fixed_until].iter().any(|q| c.dist(q.center) < q.radius) {
                balls.push(Ball::new(c, r));
            }
        }
    }

    let params = OptimizerConfig {
        seed: p.seed,
        ..OptimizerConfig::default()
    };
    let scene = Scene {
        balls,
        domain,
        params,
        rng_seed: p.seed,
    };
    scene.validate()?;
    Ok(scene)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaskedLatticeParams {
    pub width: f64,
    /// Rounded to a whole number of lattice steps.
    pub height: f64,
    pub spacing: f64,
    /// Simple polygons (any orientation) whose lattice circles are fixed.
    pub masks: Vec<Vec<Point2>>,
    pub jitter: f64,
    pub seed: u64,
}

fn point_in_polygon(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn dist_to_boundary(poly: &[Point2], p: Point2) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let e = b - a;
            let len2 = e.norm2();
            let t = if len2 > 0.0 { ((p - a).dot(e) / len2).clamp(0.0, 1.0) } else { 0.0 };
            p.dist(a + e * t)
        })
        .fold(f64::INFINITY, f64::min)
}

/// A square lattice of equal circles over a rectangle. Circles on or inside
/// a mask polygon are fully fixed, circles on the rectangle's boundary keep
/// their centers, and the rest are jittered and free.
pub fn gen_masked_lattice(p: &MaskedLatticeParams) -> Result<Scene, SceneError> {
    if [p.width, p.height, p.spacing].iter().any(|v| !(*v > 0.0 && v.is_finite())) || !(p.jitter >= 0.0) {
        return Err(inconsistent("lengths must be positive and finite"));
    }
    let nx = (p.width / p.spacing).round().max(2.0) as usize;
    let s = p.width / nx as f64;
    let ny = (p.height / s).round().max(2.0) as usize;
    let height = ny as f64 * s;
    let domain = square(0.0, 0.0, p.width, height);
    for mask in &p.masks {
        if mask.len() < 3 || mask.iter().any(|q| !super::domain_contains(&domain, *q, 1e-12 * s)) {
            return Err(inconsistent("masks must be polygons inside the domain"));
        }
    }
    let r0 = s / SQRT_2;
    let mut rng = SceneRng::new(p.seed);
    let mut fixed = Vec::new();
    let mut free = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let (dx, dy, dr) = (rng.symmetric(), rng.symmetric(), rng.symmetric());
            let c = Point2::new(i as f64 * s, j as f64 * s);
            let masked = p
                .masks
                .iter()
                .any(|m| point_in_polygon(m, c) || dist_to_boundary(m, c) < 0.5 * s);
            if masked {
                fixed.push(Ball::new(c, r0).with_fixed(true, true));
            } else if i == 0 || j == 0 || i == nx || j == ny {
                fixed.push(Ball::new(c, r0).with_fixed(true, false));
            } else {
                let c = c + Point2::new(dx, dy) * (p.jitter * s);
                free.push(Ball::new(c, r0 * (1.0 + 0.5 * p.jitter * dr)));
            }
        }
    }
    let mut balls = fixed;
    let keep: Vec<Ball> = free
        .into_iter()
        .filter(|b| {
            super::domain_contains(&domain, b.center, 0.0)
                && !balls.iter().any(|q| b.center.dist(q.center) < q.radius)
        })
        .collect();
    balls.extend(keep);
    let scene = Scene {
        balls,
        domain,
        params: OptimizerConfig {
            seed: p.seed,
            ..OptimizerConfig::default()
        },
        rng_seed: p.seed,
    };
    scene.validate()?;
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_square_with_circle_is_desk_scale() {
        let scene = gen_square_with_circle(&SquareCircleParams::default()).unwrap();
        let n = scene.balls.len();
        assert!((200..=400).contains(&n), "{n} balls");
        assert_eq!(scene, gen_square_with_circle(&SquareCircleParams::default()).unwrap());
        let other = gen_square_with_circle(&SquareCircleParams {
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        assert_ne!(scene.balls, other.balls);
    }

    #[test]
    fn hole_circles_meet_on_the_cap() {
        let scene = gen_square_with_circle(&SquareCircleParams::default()).unwrap();
        let fixed: Vec<&Ball> = scene.balls.iter().filter(|b| b.is_fixed()).collect();
        let cap = fixed[0];
        let (a, b) = (fixed[1], fixed[2]);
        // Intersection points of neighbouring hole circles lie on the cap.
        let d = b.center - a.center;
        let l = d.norm();
        let x = 0.5 * l;
        let h = (a.radius * a.radius - x * x).sqrt();
        let mid = a.center + d * (x / l);
        let n = d.perp() * (1.0 / l);
        let (p1, p2) = (mid + n * h, mid - n * h);
        let on_cap = |p: Point2| (p.dist(cap.center) - cap.radius).abs() < 1e-12;
        assert!(on_cap(p1) || on_cap(p2));
    }

    #[test]
    fn rejects_oversized_hole() {
        let p = SquareCircleParams {
            inner_radius: 0.45,
            ..Default::default()
        };
        assert!(matches!(gen_square_with_circle(&p), Err(SceneError::InconsistentGeometry(_))));
    }

    #[test]
    fn masked_lattice_examples() {
        let base = MaskedLatticeParams {
            width: 1.0,
            height: 1.0,
            spacing: 0.125,
            masks: Vec::new(),
            jitter: 0.2,
            seed: 3,
        };
        let plain = gen_masked_lattice(&base).unwrap();
        assert_eq!(plain.balls.len(), 81);
        assert!(plain.balls.iter().all(|b| !b.is_fixed()));
        let all = gen_masked_lattice(&MaskedLatticeParams {
            masks: vec![square(0.0, 0.0, 1.0, 1.0)],
            ..base.clone()
        })
        .unwrap();
        assert!(all.balls.iter().all(|b| b.is_fixed()));
        let ell = vec![
            Point2::new(0.25, 0.25),
            Point2::new(0.75, 0.25),
            Point2::new(0.75, 0.4),
            Point2::new(0.4, 0.4),
            Point2::new(0.4, 0.75),
            Point2::new(0.25, 0.75),
        ];
        let l = gen_masked_lattice(&MaskedLatticeParams {
            masks: vec![ell.clone()],
            ..base
        })
        .unwrap();
        let fixed: Vec<&Ball> = l.balls.iter().filter(|b| b.is_fixed()).collect();
        assert!(!fixed.is_empty());
        for b in &fixed {
            assert!(point_in_polygon(&ell, b.center) || dist_to_boundary(&ell, b.center) < 0.0625);
        }
    }
}
