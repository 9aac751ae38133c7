//! Scenes: a ball set, a convex domain and optimizer parameters, with
//! generators, a JSON file format and an SVG renderer.

mod generate;
mod io;
mod render;
pub mod rng;

use thiserror::Error;

use crate::kernel::{orient2d, polygon_area, Ball, Point2, Sign};
use crate::optimizer::OptimizerConfig;

pub use generate::{gen_masked_lattice, gen_square_with_circle, MaskedLatticeParams, SquareCircleParams};
pub use io::{load_scene, parse_scene, save_scene, scene_to_json, Loaded, ParseError};
pub use render::{render_svg, render_svg_string, Layer, Palette, RenderError, RenderSpec, StrokeWidths};

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub balls: Vec<Ball>,
    /// Convex counter-clockwise polygon.
    pub domain: Vec<Point2>,
    pub params: OptimizerConfig,
    pub rng_seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("inconsistent geometry: {0}")]
    InconsistentGeometry(String),
    #[error("domain is not a convex counter-clockwise polygon")]
    BadDomain,
    #[error("ball {0} has a non-finite center or a bad radius")]
    BadBall(usize),
    #[error("free ball {0} lies outside the domain")]
    OutsideDomain(usize),
    #[error("free ball {free} lies inside protecting circle {protector}")]
    InsideProtector { free: usize, protector: usize },
}

/// Whether `poly` is convex and counter-clockwise with positive area.
pub fn is_convex_ccw(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 || !(polygon_area(poly) > 0.0) {
        return false;
    }
    (0..n).all(|i| orient2d(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) != Sign::Negative)
}

/// Whether `p` lies in the closed convex polygon, up to `slack` in distance.
pub fn domain_contains(poly: &[Point2], p: Point2, slack: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let e = b - a;
        e.cross(p - a) >= -slack * e.norm()
    })
}

impl Scene {
    /// Checks the domain, the ball values and the removal rules: free balls
    /// lie inside the domain and outside every circle with a fixed center.
    pub fn validate(&self) -> Result<(), SceneError> {
        if !is_convex_ccw(&self.domain) {
            return Err(SceneError::BadDomain);
        }
        let scale = crate::diagram::bbox_diag(&self.balls).max(1e-300);
        for (i, b) in self.balls.iter().enumerate() {
            if b.alive && (!b.is_finite() || !(b.radius >= 0.0)) {
                return Err(SceneError::BadBall(i));
            }
        }
        let protectors: Vec<usize> = (0..self.balls.len())
            .filter(|&i| self.balls[i].alive && self.balls[i].fix_center)
            .collect();
        for (i, b) in self.balls.iter().enumerate() {
            if !b.alive || b.fix_center {
                continue;
            }
            if !domain_contains(&self.domain, b.center, 1e-12 * scale) {
                return Err(SceneError::OutsideDomain(i));
            }
            for &p in &protectors {
                let q = &self.balls[p];
                if b.center.dist(q.center) < q.radius {
                    return Err(SceneError::InsideProtector { free: i, protector: p });
                }
            }
        }
        Ok(())
    }
}
