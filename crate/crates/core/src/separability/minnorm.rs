//! Wolfe's minimum-norm-point algorithm on the difference polytope
//! `conv(A) − conv(B)`, driven only by a linear-minimization oracle, so the
//! `|A|·|B|` vertices are never enumerated.

use nalgebra::{DMatrix, DVector};

use crate::geometry::Point;

const MAX_MAJOR: usize = 10_000;
const MAX_MINOR: usize = 1_000;

/// Nearest pair of hull points, with the vertex pairs carrying it.
#[derive(Clone, Debug)]
pub(crate) struct NearestPair {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub converged: bool,
}

impl NearestPair {
    pub fn gap(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(x, y)| x - y).collect()
    }
}

struct Corral {
    /// Vertex pairs `(i, j)` standing for `aᵢ − bⱼ`.
    pairs: Vec<(usize, usize)>,
    vecs: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn diff(a: &Point, b: &Point) -> Vec<f64> {
    a.coords().iter().zip(b.coords()).map(|(x, y)| x - y).collect()
}

fn argmin_by(points: &[Point], key: impl Fn(&Point) -> f64) -> usize {
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let v = key(p);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    best
}

impl Corral {
    fn combination(&self, dim: usize) -> Vec<f64> {
        let mut x = vec![0.0; dim];
        for (v, w) in self.vecs.iter().zip(&self.weights) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += w * vi;
            }
        }
        x
    }

    /// Weights of the point of least norm in the affine hull of the corral.
    fn affine_minimizer(&self) -> Vec<f64> {
        let k = self.vecs.len();
        let mut m = DMatrix::zeros(k + 1, k + 1);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = dot(&self.vecs[i], &self.vecs[j]);
            }
            m[(i, k)] = 1.0;
            m[(k, i)] = 1.0;
        }
        let mut rhs = DVector::zeros(k + 1);
        rhs[k] = 1.0;
        let scale = m.amax().max(1.0);
        let svd = m.svd(true, true);
        match svd.solve(&rhs, 1e-13 * scale) {
            Ok(sol) => sol.iter().take(k).copied().collect(),
            Err(_) => self.weights.clone(),
        }
    }
}

/// Closest points of `conv(a)` and `conv(b)`; both must be non-empty.
pub(crate) fn nearest_pair(a: &[Point], b: &[Point]) -> NearestPair {
    let dim = a[0].dim();
    let lmo = |x: &[f64]| -> (usize, usize) {
        let i = argmin_by(a, |p| dot(p.coords(), x));
        let j = argmin_by(b, |p| -dot(p.coords(), x));
        (i, j)
    };
    let scale = a
        .iter()
        .chain(b)
        .map(|p| p.norm_sq())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut corral = Corral {
        pairs: vec![(0, 0)],
        vecs: vec![diff(&a[0], &b[0])],
        weights: vec![1.0],
    };
    let mut x = corral.vecs[0].clone();
    let mut converged = false;

    for _ in 0..MAX_MAJOR {
        let xx = dot(&x, &x);
        if xx <= 1e-28 * scale {
            converged = true;
            break;
        }
        let (i, j) = lmo(&x);
        let v = diff(&a[i], &b[j]);
        // Wolfe's stopping rule: no vertex improves on x.
        if xx - dot(&x, &v) <= 1e-15 * scale {
            converged = true;
            break;
        }
        if corral.pairs.contains(&(i, j)) {
            converged = true;
            break;
        }
        corral.pairs.push((i, j));
        corral.vecs.push(v);
        corral.weights.push(0.0);

        for _ in 0..MAX_MINOR {
            let alpha = corral.affine_minimizer();
            if alpha.iter().all(|&w| w > 1e-14) {
                corral.weights = alpha;
                break;
            }
            // Walk from the current weights toward alpha until one hits 0.
            let mut theta = 1.0f64;
            for (l, al) in corral.weights.iter().zip(&alpha) {
                if *al <= 1e-14 && l - al > 0.0 {
                    theta = theta.min(l / (l - al));
                }
            }
            let mut keep = Vec::new();
            for (k, (l, al)) in corral.weights.iter().zip(&alpha).enumerate() {
                let w = theta * al + (1.0 - theta) * l;
                if w > 1e-14 {
                    keep.push((k, w));
                }
            }
            if keep.is_empty() {
                break;
            }
            let total: f64 = keep.iter().map(|(_, w)| w).sum();
            corral.pairs = keep.iter().map(|&(k, _)| corral.pairs[k]).collect();
            corral.vecs = keep.iter().map(|&(k, _)| corral.vecs[k].clone()).collect();
            corral.weights = keep.iter().map(|&(_, w)| w / total).collect();
        }
        x = corral.combination(dim);
    }

    let mut pa = vec![0.0; dim];
    let mut pb = vec![0.0; dim];
    for (&(i, j), w) in corral.pairs.iter().zip(&corral.weights) {
        for d in 0..dim {
            pa[d] += w * a[i].coords()[d];
            pb[d] += w * b[j].coords()[d];
        }
    }
    NearestPair {
        a: pa,
        b: pb,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[[f64; 2]]) -> Vec<Point> {
        v.iter().map(|&c| Point::from(c)).collect()
    }

    fn norm(x: &[f64]) -> f64 {
        dot(x, x).sqrt()
    }

    #[test]
    fn two_points() {
        let r = nearest_pair(&pts(&[[0.0, 0.0]]), &pts(&[[2.0, 0.0]]));
        assert_eq!(r.gap(), vec![-2.0, 0.0]);
        assert!(r.converged);
    }

    #[test]
    fn point_to_segment() {
        // Distance from (0, 1) to the segment [(−1, 0), (1, 0)] is 1.
        let r = nearest_pair(&pts(&[[0.0, 1.0]]), &pts(&[[-1.0, 0.0], [1.0, 0.0]]));
        assert!((norm(&r.gap()) - 1.0).abs() < 1e-12);
        assert!(r.b[0].abs() < 1e-12);
    }

    #[test]
    fn squares_side_by_side() {
        let a = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let b = pts(&[[3.0, 0.5], [4.0, 0.0], [4.0, 2.0], [3.0, 2.5]]);
        let r = nearest_pair(&a, &b);
        assert!((norm(&r.gap()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_segments() {
        let a = pts(&[[0.0, 0.0], [1.0, 1.0]]);
        let b = pts(&[[1.0, 0.0], [0.0, 1.0]]);
        let r = nearest_pair(&a, &b);
        assert!(norm(&r.gap()) < 1e-9);
    }
}
