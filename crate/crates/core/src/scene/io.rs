//! Scene JSON. Reals are written with 17 significant digits and parsed with
//! correct rounding, so a save/load cycle reproduces every bit.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use thiserror::Error;

use crate::kernel::{Ball, Point2};
use crate::optimizer::OptimizerConfig;

use super::Scene;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{path}:{line}:{column}: {message}")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

#[derive(Serialize, Deserialize)]
struct BallRecord {
    c: [f64; 2],
    r: f64,
    fix_center: bool,
    fix_radius: bool,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    alive: bool,
    #[serde(flatten, skip_serializing)]
    extra: BTreeMap<String, Value>,
}

fn yes() -> bool {
    true
}

fn is_true(v: &bool) -> bool {
    *v
}

#[derive(Serialize, Deserialize)]
struct SceneRecord {
    balls: Vec<BallRecord>,
    domain: Vec<[f64; 2]>,
    params: OptimizerConfig,
    #[serde(default)]
    rng_seed: u64,
    #[serde(flatten, skip_serializing)]
    extra: BTreeMap<String, Value>,
}

/// A parsed scene plus the unknown fields that were skipped.
#[derive(Debug)]
pub struct Loaded {
    pub scene: Scene,
    pub warnings: Vec<String>,
}

struct Precise(PrettyFormatter<'static>);

impl Formatter for Precise {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn scene_to_json(scene: &Scene) -> String {
    let record = SceneRecord {
        balls: scene
            .balls
            .iter()
            .map(|b| BallRecord {
                c: [b.center.x, b.center.y],
                r: b.radius,
                fix_center: b.fix_center,
                fix_radius: b.fix_radius,
                alive: b.alive,
                extra: BTreeMap::new(),
            })
            .collect(),
        domain: scene.domain.iter().map(|p| [p.x, p.y]).collect(),
        params: scene.params.clone(),
        rng_seed: scene.rng_seed,
        extra: BTreeMap::new(),
    };
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(PrettyFormatter::new()));
    record
        .serialize(&mut ser)
        .expect("serializing plain data into memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serializer emits UTF-8")
}

pub fn save_scene(scene: &Scene, path: &Path) -> io::Result<()> {
    std::fs::write(path, scene_to_json(scene))
}

/// Parses scene JSON; `origin` names the source in diagnostics.
pub fn parse_scene(text: &str, origin: &str) -> Result<Loaded, ParseError> {
    let record: SceneRecord = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut warnings: Vec<String> = record
        .extra
        .keys()
        .map(|k| format!("{origin}: ignoring unknown field `{k}`"))
        .collect();
    for (i, b) in record.balls.iter().enumerate() {
        for k in b.extra.keys() {
            warnings.push(format!("{origin}: ignoring unknown field `balls[{i}].{k}`"));
        }
    }
    let scene = Scene {
        balls: record
            .balls
            .iter()
            .map(|b| Ball {
                center: Point2::new(b.c[0], b.c[1]),
                radius: b.r,
                fix_center: b.fix_center,
                fix_radius: b.fix_radius,
                alive: b.alive,
            })
            .collect(),
        domain: record.domain.iter().map(|p| Point2::new(p[0], p[1])).collect(),
        params: record.params,
        rng_seed: record.rng_seed,
    };
    if !super::is_convex_ccw(&scene.domain) {
        return Err(ParseError::Invalid {
            path: origin.to_string(),
            message: super::SceneError::BadDomain.to_string(),
        });
    }
    if let Err(e) = scene.params.validate() {
        return Err(ParseError::Invalid {
            path: origin.to_string(),
            message: format!("params: {e}"),
        });
    }
    Ok(Loaded { scene, warnings })
}

pub fn load_scene(path: &Path) -> Result<Loaded, ParseError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: origin.clone(),
        source,
    })?;
    parse_scene(&text, &origin)
}
