//! The gradient phase: limited-memory quasi-Newton directions built from the
//! frozen-combinatorics gradient, accepted by Armijo backtracking against the
//! fully rebuilt functional. Without curvature pairs the direction is plain
//! steepest descent.

use std::collections::VecDeque;

use crate::diagram::{extract_diagram, PowerDiagram};
use crate::kernel::Ball;
use crate::par::Execution;
use crate::regular::{build_regular_with_seed, RegularTriangulation};

use super::functional::evaluate_fi_with;
use super::gradient::{free_coords, FrozenFunctional};
use super::Resolved;

const MEMORY: usize = 12;
const ARMIJO_C1: f64 = 1e-4;
const ARMIJO_SHRINK: f64 = 0.5;
const ARMIJO_MAX_TRIALS: usize = 60;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn flatten(balls: &[Ball]) -> Vec<f64> {
    balls
        .iter()
        .flat_map(|b| [b.center.x, b.center.y, b.radius])
        .collect()
}

fn apply(balls: &[Ball], x: &[f64]) -> Vec<Ball> {
    balls
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let free = free_coords(b);
            let mut nb = *b;
            if free[0] {
                nb.center.x = x[3 * i];
                nb.center.y = x[3 * i + 1];
            }
            if free[2] {
                nb.radius = x[3 * i + 2].max(0.0);
            }
            nb
        })
        .collect()
}

#[derive(Default)]
pub(crate) struct Descent {
    pairs: VecDeque<(Vec<f64>, Vec<f64>)>,
    last: Option<(Vec<f64>, Vec<f64>)>,
}

impl Descent {
    fn reset(&mut self) {
        self.pairs.clear();
        self.last = None;
    }

    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y) in self.pairs.iter().rev() {
            let a = dot(s, &q) / dot(y, s);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = dot(y, &q) / dot(y, s);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }

    /// One accepted step, or the unchanged balls when no step decreases the
    /// functional. Returns the new balls and the number that moved.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn step(
        &mut self,
        balls: &[Ball],
        t: &RegularTriangulation,
        d: &PowerDiagram,
        fi: f64,
        resolved: &Resolved,
        seed: u64,
        exec: Execution,
    ) -> (Vec<Ball>, usize) {
        let frozen = FrozenFunctional::new(balls, t, d);
        let g: Vec<f64> = frozen
            .gradient(balls, resolved.fd_step, exec)
            .into_iter()
            .flatten()
            .collect();
        let x = flatten(balls);
        if let Some((x0, g0)) = self.last.take() {
            let s: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g.iter().zip(&g0).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                self.pairs.push_back((s, y));
                if self.pairs.len() > MEMORY {
                    self.pairs.pop_front();
                }
            }
        }
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(gmax > 0.0) {
            self.reset();
            return (balls.to_vec(), 0);
        }
        let mut dir = self.direction(&g);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            self.pairs.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let dmax = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Never move any coordinate by more than the scene's diagonal.
        let mut alpha = if self.pairs.is_empty() {
            resolved.scale / gmax
        } else {
            1.0f64.min(resolved.scale / dmax)
        };
        for _ in 0..ARMIJO_MAX_TRIALS {
            let xt: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + alpha * b).collect();
            let trial = apply(balls, &xt);
            if let Ok(tt) = build_regular_with_seed(&trial, seed) {
                let dd = extract_diagram(&tt, &trial, resolved.merge_eps);
                let f = evaluate_fi_with(&trial, &dd, exec);
                if f <= fi + ARMIJO_C1 * alpha * slope {
                    let moved = trial.iter().zip(balls).filter(|(a, b)| a != b).count();
                    self.last = Some((x, g));
                    return (trial, moved);
                }
            }
            alpha *= ARMIJO_SHRINK;
        }
        self.reset();
        (balls.to_vec(), 0)
    }
}
