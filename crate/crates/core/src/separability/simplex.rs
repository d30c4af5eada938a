//! Phase-one dense simplex for the hull-intersection system
//! `Σ λᵢ aᵢ = Σ μⱼ bⱼ`, `Σ λ = Σ μ = 1`, `λ, μ ≥ 0`.

use crate::geometry::Point;

const MAX_PIVOTS: usize = 50_000;
const PIVOT_TOL: f64 = 1e-11;
/// Residual infeasibility below which the hulls count as intersecting.
const FEASIBLE_TOL: f64 = 1e-9;

/// A point common to both hulls, if the phase-one optimum is zero.
pub(crate) fn hull_intersection(a: &[Point], b: &[Point]) -> Option<Vec<f64>> {
    hull_intersection_pair(a, b).map(|(xa, xb)| xa.iter().zip(&xb).map(|(x, y)| 0.5 * (x + y)).collect())
}

/// The convex combinations of `a` and of `b` found by phase one.
pub(crate) fn hull_intersection_pair(a: &[Point], b: &[Point]) -> Option<(Vec<f64>, Vec<f64>)> {
    let dim = a[0].dim();
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let rows = dim + 2;
    // Per-coordinate scaling keeps the equality rows comparable.
    let scale: Vec<f64> = (0..dim)
        .map(|d| {
            a.iter()
                .chain(b)
                .map(|p| p.coords()[d].abs())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE)
        })
        .collect();

    // Columns: n structural, `rows` artificial, then the right-hand side.
    let width = n + rows + 1;
    let mut t = vec![vec![0.0; width]; rows + 1];
    for d in 0..dim {
        for (i, p) in a.iter().enumerate() {
            t[d][i] = p.coords()[d] / scale[d];
        }
        for (j, p) in b.iter().enumerate() {
            t[d][na + j] = -p.coords()[d] / scale[d];
        }
    }
    for i in 0..na {
        t[dim][i] = 1.0;
    }
    for j in 0..nb {
        t[dim + 1][na + j] = 1.0;
    }
    t[dim][width - 1] = 1.0;
    t[dim + 1][width - 1] = 1.0;
    for r in 0..rows {
        // Equality rows have zero right-hand side; either sign works.
        t[r][n + r] = 1.0;
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();
    // Objective row: minimize the sum of artificials, reduced costs.
    let obj = rows;
    for c in 0..width {
        let s: f64 = (0..rows).map(|r| t[r][c]).sum();
        t[obj][c] = if (n..n + rows).contains(&c) { 0.0 } else { -s };
    }

    for _ in 0..MAX_PIVOTS {
        // Bland's rule: lowest index with negative reduced cost.
        let Some(enter) = (0..n + rows).find(|&c| t[obj][c] < -PIVOT_TOL) else {
            break;
        };
        let mut leave = None;
        let mut best = f64::INFINITY;
        for r in 0..rows {
            if t[r][enter] > PIVOT_TOL {
                let ratio = t[r][width - 1] / t[r][enter];
                if ratio < best - 1e-15
                    || (ratio <= best + 1e-15 && leave.is_some_and(|l: usize| basis[r] < basis[l]))
                {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(lr) = leave else {
            break;
        };
        let pv = t[lr][enter];
        for c in 0..width {
            t[lr][c] /= pv;
        }
        for r in 0..=rows {
            if r != lr {
                let f = t[r][enter];
                if f != 0.0 {
                    for c in 0..width {
                        t[r][c] -= f * t[lr][c];
                    }
                }
            }
        }
        basis[lr] = enter;
    }

    let infeasibility = -t[obj][width - 1];
    if infeasibility > FEASIBLE_TOL {
        return None;
    }
    let mut weights = vec![0.0; n];
    for (r, &v) in basis.iter().enumerate() {
        if v < n {
            weights[v] = t[r][width - 1].max(0.0);
        }
    }
    let combine = |w: &[f64], pts: &[Point]| -> Option<Vec<f64>> {
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        let mut x = vec![0.0; dim];
        for (l, p) in w.iter().zip(pts) {
            for d in 0..dim {
                x[d] += l / total * p.coords()[d];
            }
        }
        Some(x)
    };
    Some((combine(&weights[..na], a)?, combine(&weights[na..], b)?))
}
