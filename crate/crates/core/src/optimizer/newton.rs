//! Gauss-Newton on the orthocenter powers.
//!
//! Every triangle of the regular triangulation contributes the residual
//! `tau` of its orthocenter; all of them vanish exactly when every cell's
//! vertices lie on its ball's circle, which is where the functional reaches
//! zero. The heuristic gets close to that set quickly but then crawls, while
//! these residuals have a well-conditioned Jacobian near it. Steps are the
//! minimum-norm solutions of the linearized system with the combinatorics
//! frozen, accepted by Armijo backtracking on `1/2 sum tau^2` measured on
//! the rebuilt triangulation.

use nalgebra::{DMatrix, DVector};

use crate::kernel::Ball;
use crate::par::{self, Execution};
use crate::regular::{build_regular_with_seed, triangle_orthocenter, RegularTriangulation};

use super::gradient::{free_coords, perturbed};
use super::Resolved;

const ARMIJO_C1: f64 = 1e-4;
const ARMIJO_SHRINK: f64 = 0.5;
const ARMIJO_MAX_TRIALS: usize = 40;

pub(crate) fn merit(t: &RegularTriangulation) -> f64 {
    0.5 * t.triangles.iter().map(|tri| tri.tau * tri.tau).sum::<f64>()
}

/// Sparse Jacobian rows: `(variable, d tau / d variable)` per triangle.
fn jacobian(
    balls: &[Ball],
    t: &RegularTriangulation,
    var_of: &[[Option<usize>; 3]],
    h: f64,
    exec: Execution,
) -> Vec<Vec<(usize, f64)>> {
    par::map_slice(exec, &t.triangles, |tri| {
        let mut row = Vec::new();
        for (slot, &b) in tri.balls.iter().enumerate() {
            for (coord, var) in var_of[b].iter().enumerate() {
                let Some(v) = *var else { continue };
                let mut local = [balls[tri.balls[0]], balls[tri.balls[1]], balls[tri.balls[2]]];
                local[slot] = perturbed(&balls[b], coord, h);
                let plus = triangle_orthocenter(&local, [0, 1, 2]).1;
                local[slot] = perturbed(&balls[b], coord, -h);
                let minus = triangle_orthocenter(&local, [0, 1, 2]).1;
                row.push((v, (plus - minus) / (2.0 * h)));
            }
        }
        row
    })
}

/// One damped Gauss-Newton step; returns the new balls and how many moved,
/// or `None` when no step reduces the residuals.
pub(crate) fn newton_step(
    balls: &[Ball],
    t: &RegularTriangulation,
    resolved: &Resolved,
    seed: u64,
    exec: Execution,
) -> Option<(Vec<Ball>, usize)> {
    let mut vars: Vec<(usize, usize)> = Vec::new();
    let mut var_of = vec![[None; 3]; balls.len()];
    for (i, b) in balls.iter().enumerate() {
        if !t.contains_ball(i) {
            continue;
        }
        for (coord, free) in free_coords(b).into_iter().enumerate() {
            if free {
                var_of[i][coord] = Some(vars.len());
                vars.push((i, coord));
            }
        }
    }
    let rows = jacobian(balls, t, &var_of, resolved.fd_step, exec);
    let live: Vec<usize> = (0..rows.len()).filter(|&r| !rows[r].is_empty()).collect();
    if vars.is_empty() || live.is_empty() {
        return None;
    }
    let m = live.len();
    let r = DVector::from_iterator(m, live.iter().map(|&k| t.triangles[k].tau));

    // Columns of J restricted to the live rows, then A = J J^T.
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vars.len()];
    for (row, &k) in live.iter().enumerate() {
        for &(v, val) in &rows[k] {
            cols[v].push((row, val));
        }
    }
    let mut a = DMatrix::<f64>::zeros(m, m);
    for col in &cols {
        for &(i, vi) in col {
            for &(j, vj) in col {
                a[(i, j)] += vi * vj;
            }
        }
    }
    let diag_max = (0..m).map(|i| a[(i, i)]).fold(0.0f64, f64::max);
    if !(diag_max > 0.0) {
        return None;
    }
    let lambda = 1e-12 * diag_max;
    for i in 0..m {
        a[(i, i)] += lambda;
    }
    let w = a.cholesky()?.solve(&(-&r));
    let delta: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|&(i, v)| v * w[i]).sum())
        .collect();
    // Directional derivative of 1/2 |r|^2 along delta is r^T J delta.
    let slope: f64 = cols
        .iter()
        .zip(&delta)
        .map(|(col, d)| col.iter().map(|&(i, v)| r[i] * v).sum::<f64>() * d)
        .sum();
    if !(slope < 0.0) {
        return None;
    }
    let phi = merit(t);
    let dmax = delta.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut alpha = 1.0f64.min(resolved.scale / dmax);
    for _ in 0..ARMIJO_MAX_TRIALS {
        let mut trial = balls.to_vec();
        for (&(b, coord), d) in vars.iter().zip(&delta) {
            let nb = &mut trial[b];
            match coord {
                0 => nb.center.x = balls[b].center.x + alpha * d,
                1 => nb.center.y = balls[b].center.y + alpha * d,
                _ => nb.radius = (balls[b].radius + alpha * d).max(0.0),
            }
        }
        if let Ok(tt) = build_regular_with_seed(&trial, seed) {
            if merit(&tt) <= phi + ARMIJO_C1 * alpha * slope {
                let moved = trial.iter().zip(balls).filter(|(x, y)| x != y).count();
                return Some((trial, moved));
            }
        }
        alpha *= ARMIJO_SHRINK;
    }
    None
}
