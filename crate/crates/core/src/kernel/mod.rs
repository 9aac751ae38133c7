//! Planar geometric kernel.
//!
//! Decisions (`orient2d`, `power_test`) are exact for every finite input that
//! does not overflow or underflow. Constructions (`orthocenter`,
//! `circumcenter`) use plain double precision behind a conditioning guard.

mod expansion;

use std::ops::{Add, Mul, Sub};

use expansion::Expansion;
use thiserror::Error;

/// Relative determinant threshold below which a 2x2 construction is refused.
pub const DEFAULT_CONDITIONING: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("ball centers are collinear")]
    CollinearCenters,
    #[error("points are collinear")]
    CollinearPoints,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist2(self, other: Point2) -> f64 {
        (self - other).norm2()
    }

    pub fn dist(self, other: Point2) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Left-hand normal `(-y, x)`.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(
            self.x * (1.0 - t) + other.x * t,
            self.y * (1.0 - t) + other.y * t,
        )
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// A circle with optimization constraint flags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Point2,
    pub radius: f64,
    pub fix_center: bool,
    pub fix_radius: bool,
    pub alive: bool,
}

impl Ball {
    pub fn new(center: Point2, radius: f64) -> Self {
        Ball {
            center,
            radius,
            fix_center: false,
            fix_radius: false,
            alive: true,
        }
    }

    pub fn from_radius2(center: Point2, radius2: f64) -> Self {
        Ball::new(center, radius2.sqrt())
    }

    pub fn with_fixed(mut self, fix_center: bool, fix_radius: bool) -> Self {
        self.fix_center = fix_center;
        self.fix_radius = fix_radius;
        self
    }

    pub fn is_fixed(&self) -> bool {
        self.fix_center && self.fix_radius
    }

    pub fn is_finite(&self) -> bool {
        self.center.is_finite() && self.radius.is_finite()
    }
}

/// A ball center lifted to height `(|c|^2 - R^2) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftedPoint {
    pub base: Point2,
    pub height: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn from_i8(s: i8) -> Sign {
        match s.signum() {
            -1 => Sign::Negative,
            0 => Sign::Zero,
            _ => Sign::Positive,
        }
    }

    pub fn from_f64(v: f64) -> Sign {
        if v > 0.0 {
            Sign::Positive
        } else if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn flip(self) -> Sign {
        Sign::from_i8(-self.as_i8())
    }
}

/// Power of `a` with respect to `b`: `|c - a|^2 - R^2`.
pub fn power(b: &Ball, a: Point2) -> f64 {
    b.center.dist2(a) - b.radius * b.radius
}

pub fn lift(b: &Ball) -> LiftedPoint {
    LiftedPoint {
        base: b.center,
        height: 0.5 * (b.center.norm2() - b.radius * b.radius),
    }
}

/// `(x^2 + y^2) / 2`.
pub fn paraboloid(p: Point2) -> f64 {
    0.5 * p.norm2()
}

/// Exact orientation of `(a, b, c)`; positive for counter-clockwise.
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> Sign {
    let det = robust::orient2d(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
    );
    Sign::from_f64(det)
}

/// Sign of the lifted in-circle determinant
///
/// ```text
/// | ax-dx  ay-dy  |a-d|^2 - ra^2 + rd^2 |
/// | bx-dx  by-dy  |b-d|^2 - rb^2 + rd^2 |
/// | cx-dx  cy-dy  |c-d|^2 - rc^2 + rd^2 |
/// ```
///
/// which is positive when `d` lifts strictly below the plane through the
/// lifted `a, b, c` (for counter-clockwise `a, b, c`).
fn lifted_incircle(a: &Ball, b: &Ball, c: &Ball, d: &Ball) -> i8 {
    let (pa, pb, pc, pd) = (a.center, b.center, c.center, d.center);
    let adx = pa.x - pd.x;
    let ady = pa.y - pd.y;
    let bdx = pb.x - pd.x;
    let bdy = pb.y - pd.y;
    let cdx = pc.x - pd.x;
    let cdy = pc.y - pd.y;
    let rd2 = d.radius * d.radius;
    let ra2 = a.radius * a.radius;
    let rb2 = b.radius * b.radius;
    let rc2 = c.radius * c.radius;

    let alift = adx * adx + ady * ady - ra2 + rd2;
    let blift = bdx * bdx + bdy * bdy - rb2 + rd2;
    let clift = cdx * cdx + cdy * cdy - rc2 + rd2;

    let bc = bdx * cdy - bdy * cdx;
    let ca = cdx * ady - cdy * adx;
    let ab = adx * bdy - ady * bdx;
    let det = alift * bc + blift * ca + clift * ab;

    let amag = adx * adx + ady * ady + ra2 + rd2;
    let bmag = bdx * bdx + bdy * bdy + rb2 + rd2;
    let cmag = cdx * cdx + cdy * cdy + rc2 + rd2;
    let permanent = amag * ((bdx * cdy).abs() + (bdy * cdx).abs())
        + bmag * ((cdx * ady).abs() + (cdy * adx).abs())
        + cmag * ((adx * bdy).abs() + (ady * bdx).abs());
    const EPS: f64 = f64::EPSILON * 0.5;
    let errbound = (16.0 + 256.0 * EPS) * EPS * permanent;
    if det > errbound {
        return 1;
    }
    if -det > errbound {
        return -1;
    }
    lifted_incircle_exact(a, b, c, d)
}

fn lifted_incircle_exact(a: &Ball, b: &Ball, c: &Ball, d: &Ball) -> i8 {
    let (pa, pb, pc, pd) = (a.center, b.center, c.center, d.center);
    let adx = Expansion::diff(pa.x, pd.x);
    let ady = Expansion::diff(pa.y, pd.y);
    let bdx = Expansion::diff(pb.x, pd.x);
    let bdy = Expansion::diff(pb.y, pd.y);
    let cdx = Expansion::diff(pc.x, pd.x);
    let cdy = Expansion::diff(pc.y, pd.y);
    let rd2 = Expansion::product(d.radius, d.radius);

    let lift = |dx: &Expansion, dy: &Expansion, r: f64| {
        dx.mul(dx)
            .add(&dy.mul(dy))
            .sub(&Expansion::product(r, r))
            .add(&rd2)
    };
    let alift = lift(&adx, &ady, a.radius);
    let blift = lift(&bdx, &bdy, b.radius);
    let clift = lift(&cdx, &cdy, c.radius);

    let bc = bdx.mul(&cdy).sub(&bdy.mul(&cdx));
    let ca = cdx.mul(&ady).sub(&cdy.mul(&adx));
    let ab = adx.mul(&bdy).sub(&ady.mul(&bdx));
    alift
        .mul(&bc)
        .add(&blift.mul(&ca))
        .add(&clift.mul(&ab))
        .signum()
}

/// Exact regularity test of `b4` against the lifted face of `(b1, b2, b3)`.
///
/// For a counter-clockwise triple the result is the sign of
/// `power(b4, v) - power(b1, v)` at the orthocenter `v`: positive when the
/// lifted `b4` is above the face, negative when it violates regularity, zero
/// on the face. Swapping two of the first three balls flips the sign.
pub fn power_test(b1: &Ball, b2: &Ball, b3: &Ball, b4: &Ball) -> Result<Sign, KernelError> {
    if orient2d(b1.center, b2.center, b3.center) == Sign::Zero {
        return Err(KernelError::CollinearCenters);
    }
    Ok(power_test_raw(b1, b2, b3, b4))
}

/// [`power_test`] without the collinearity check; collinear triples give
/// the sign of a degenerate determinant.
pub fn power_test_raw(b1: &Ball, b2: &Ball, b3: &Ball, b4: &Ball) -> Sign {
    Sign::from_i8(-lifted_incircle(b1, b2, b3, b4))
}

fn solve_local(
    e2: Point2,
    e3: Point2,
    rhs2: f64,
    rhs3: f64,
    guard: f64,
) -> Option<Point2> {
    let det = e2.cross(e3);
    let scale2 = e2.norm2().max(e3.norm2());
    if !(det.abs() > guard * scale2) || !det.is_finite() {
        return None;
    }
    Some(Point2::new(
        (rhs2 * e3.y - rhs3 * e2.y) / det,
        (e2.x * rhs3 - e3.x * rhs2) / det,
    ))
}

/// Point of equal power with respect to three balls, and that power.
pub fn orthocenter(b1: &Ball, b2: &Ball, b3: &Ball) -> Result<(Point2, f64), KernelError> {
    orthocenter_guarded(b1, b2, b3, DEFAULT_CONDITIONING)
}

pub fn orthocenter_guarded(
    b1: &Ball,
    b2: &Ball,
    b3: &Ball,
    guard: f64,
) -> Result<(Point2, f64), KernelError> {
    let c1 = b1.center;
    let e2 = b2.center - c1;
    let e3 = b3.center - c1;
    let r1 = b1.radius * b1.radius;
    let rhs2 = 0.5 * (e2.norm2() - b2.radius * b2.radius + r1);
    let rhs3 = 0.5 * (e3.norm2() - b3.radius * b3.radius + r1);
    let w = solve_local(e2, e3, rhs2, rhs3, guard).ok_or(KernelError::CollinearCenters)?;
    Ok((c1 + w, w.norm2() - r1))
}

pub fn circumcenter(p1: Point2, p2: Point2, p3: Point2) -> Result<Point2, KernelError> {
    circumcenter_guarded(p1, p2, p3, DEFAULT_CONDITIONING)
}

pub fn circumcenter_guarded(
    p1: Point2,
    p2: Point2,
    p3: Point2,
    guard: f64,
) -> Result<Point2, KernelError> {
    let e2 = p2 - p1;
    let e3 = p3 - p1;
    let w = solve_local(e2, e3, 0.5 * e2.norm2(), 0.5 * e3.norm2(), guard)
        .ok_or(KernelError::CollinearPoints)?;
    Ok(p1 + w)
}

/// Signed area of the triangle `(a, b, c)`, positive for counter-clockwise.
pub fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Signed area of a closed polygon (shoelace).
pub fn polygon_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc
}
