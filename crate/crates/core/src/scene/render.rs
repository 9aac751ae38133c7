//! Deterministic SVG output. Coordinates are printed with a fixed number of
//! decimals and elements are emitted in index order, so identical inputs
//! give identical bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::PowerDiagram;
use crate::kernel::Point2;
use crate::optimizer::aux_triangulate_cell;
use crate::regular::RegularTriangulation;

use super::Scene;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Domain,
    PowerDiagram,
    RegularTriangulation,
    AuxTriangles,
    Balls,
    Orthocircles,
}

impl Layer {
    pub const ALL: [Layer; 6] = [
        Layer::Domain,
        Layer::PowerDiagram,
        Layer::RegularTriangulation,
        Layer::AuxTriangles,
        Layer::Balls,
        Layer::Orthocircles,
    ];

    pub fn parse(name: &str) -> Option<Layer> {
        Some(match name {
            "domain" => Layer::Domain,
            "power_diagram" | "diagram" => Layer::PowerDiagram,
            "regular_triangulation" | "triangulation" => Layer::RegularTriangulation,
            "aux_triangles" | "aux" => Layer::AuxTriangles,
            "balls" => Layer::Balls,
            "orthocircles" => Layer::Orthocircles,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Palette {
    #[default]
    Classic,
    Mono,
}

struct Colors {
    domain: &'static str,
    cell: &'static str,
    triangulation: &'static str,
    aux: &'static str,
    free_ball: &'static str,
    fixed_ball: &'static str,
    ortho_pos: &'static str,
    ortho_neg: &'static str,
}

impl Palette {
    pub fn parse(name: &str) -> Option<Palette> {
        match name {
            "classic" => Some(Palette::Classic),
            "mono" => Some(Palette::Mono),
            _ => None,
        }
    }

    fn colors(self) -> Colors {
        match self {
            Palette::Classic => Colors {
                domain: "#000000",
                cell: "#1f4e9c",
                triangulation: "#2e8b57",
                aux: "#b0b0b0",
                free_ball: "#555555",
                fixed_ball: "#d2691e",
                ortho_pos: "#1e90ff",
                ortho_neg: "#dc143c",
            },
            Palette::Mono => Colors {
                domain: "#000000",
                cell: "#000000",
                triangulation: "#444444",
                aux: "#aaaaaa",
                free_ball: "#666666",
                fixed_ball: "#000000",
                ortho_pos: "#333333",
                ortho_neg: "#999999",
            },
        }
    }
}

/// Stroke widths as fractions of the drawing's diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrokeWidths {
    pub cells: f64,
    pub triangulation: f64,
    pub circles: f64,
}

impl Default for StrokeWidths {
    fn default() -> Self {
        StrokeWidths {
            cells: 1.5e-3,
            triangulation: 8e-4,
            circles: 6e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderSpec {
    layers: BTreeSet<Layer>,
    pub palette: Palette,
    pub strokes: StrokeWidths,
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("a render spec needs at least one layer")]
    NoLayers,
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl RenderSpec {
    pub fn new(layers: impl IntoIterator<Item = Layer>, palette: Palette) -> Result<Self, RenderError> {
        let layers: BTreeSet<Layer> = layers.into_iter().collect();
        if layers.is_empty() {
            return Err(RenderError::NoLayers);
        }
        Ok(RenderSpec {
            layers,
            palette,
            strokes: StrokeWidths::default(),
        })
    }

    pub fn layers(&self) -> &BTreeSet<Layer> {
        &self.layers
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn polygon(out: &mut String, pts: &[Point2], stroke: &str, width: f64, fill: &str) {
    let coords: Vec<String> = pts.iter().map(|p| format!("{},{}", num(p.x), num(-p.y))).collect();
    let _ = writeln!(
        out,
        r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="{}"/>"#,
        coords.join(" "),
        num(width)
    );
}

fn circle(out: &mut String, c: Point2, r: f64, stroke: &str, width: f64, dash: bool) {
    let dash = if dash { r#" stroke-dasharray="2,2""# } else { "" };
    let _ = writeln!(
        out,
        r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
        num(c.x),
        num(-c.y),
        num(r),
        num(width)
    );
}

fn frame(scene: &Scene) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let pts = scene
        .domain
        .iter()
        .copied()
        .chain(scene.balls.iter().filter(|b| b.alive).map(|b| b.center));
    for p in pts {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if lo.x > hi.x {
        return (Point2::new(0.0, 0.0), Point2::new(1.0, 1.0));
    }
    (lo, hi)
}

/// Renders the requested layers into an SVG document. The y axis points up.
pub fn render_svg_string(
    scene: &Scene,
    diagram: &PowerDiagram,
    triangulation: &RegularTriangulation,
    spec: &RenderSpec,
) -> String {
    let (lo, hi) = frame(scene);
    let diag = hi.dist(lo).max(1e-300);
    let pad = 0.05 * diag;
    let colors = spec.palette.colors();
    let w_cell = spec.strokes.cells * diag;
    let w_tri = spec.strokes.triangulation * diag;
    let w_circ = spec.strokes.circles * diag;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}" width="800" height="{}">"#,
        num(lo.x - pad),
        num(-hi.y - pad),
        num(hi.x - lo.x + 2.0 * pad),
        num(hi.y - lo.y + 2.0 * pad),
        ((hi.y - lo.y + 2.0 * pad) / (hi.x - lo.x + 2.0 * pad) * 800.0).round().max(1.0)
    );
    let domain = diagram.domain.as_deref().unwrap_or(&scene.domain);
    for layer in &spec.layers {
        let _ = writeln!(out, r#"<g id="{layer:?}">"#);
        match layer {
            Layer::Domain => polygon(&mut out, &scene.domain, colors.domain, w_cell, "none"),
            Layer::PowerDiagram => {
                for cell in diagram.cells.iter().flatten() {
                    let pts = if cell.bounded {
                        diagram.cell_polygon(cell)
                    } else if domain.len() >= 3 {
                        diagram.clip_cell(cell, domain)
                    } else {
                        continue;
                    };
                    if pts.len() >= 3 {
                        polygon(&mut out, &pts, colors.cell, w_cell, "none");
                    }
                }
            }
            Layer::RegularTriangulation => {
                for t in &triangulation.triangles {
                    let pts = t.balls.map(|b| scene.balls[b].center);
                    polygon(&mut out, &pts, colors.triangulation, w_tri, "none");
                }
            }
            Layer::AuxTriangles => {
                for cell in diagram.cells.iter().flatten().filter(|c| c.is_proper()) {
                    if let Ok(aux) = aux_triangulate_cell(diagram, cell) {
                        for t in aux {
                            polygon(&mut out, &t.vertex_positions, colors.aux, w_tri, "none");
                        }
                    }
                }
            }
            Layer::Balls => {
                for b in scene.balls.iter().filter(|b| b.alive) {
                    let color = if b.fix_center { colors.fixed_ball } else { colors.free_ball };
                    circle(&mut out, b.center, b.radius, color, w_circ, false);
                }
            }
            Layer::Orthocircles => {
                for v in &diagram.dual_vertices {
                    let (color, dash) = if v.tau >= 0.0 {
                        (colors.ortho_pos, false)
                    } else {
                        (colors.ortho_neg, true)
                    };
                    circle(&mut out, v.position, v.tau.abs().sqrt(), color, w_circ, dash);
                }
            }
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

pub fn render_svg(
    scene: &Scene,
    diagram: &PowerDiagram,
    triangulation: &RegularTriangulation,
    spec: &RenderSpec,
    path: &Path,
) -> Result<(), RenderError> {
    std::fs::write(path, render_svg_string(scene, diagram, triangulation, spec)).map_err(|source| {
        RenderError::Io {
            path: path.display().to_string(),
            source,
        }
    })
}
