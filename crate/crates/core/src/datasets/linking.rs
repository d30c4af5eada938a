//! Gauss linking number of two closed polygons in ℝ³.
//!
//! Sums, over every pair of edges, the exact solid-angle form of the Gauss
//! double integral for two straight segments.

use crate::error::{Error, Result};
use crate::geometry::Point;

type V3 = [f64; 3];

fn v3(p: &Point) -> V3 {
    let c = p.coords();
    [c[0], c[1], c[2]]
}

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn unit(a: V3) -> Option<V3> {
    let n = dot(a, a).sqrt();
    (n > 1e-300).then(|| [a[0] / n, a[1] / n, a[2] / n])
}

fn asin_dot(a: V3, b: V3) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).asin()
}

/// Signed solid-angle contribution of segments `p1→p2` and `p3→p4`.
fn segment_pair(p1: V3, p2: V3, p3: V3, p4: V3) -> f64 {
    let r13 = sub(p3, p1);
    let r14 = sub(p4, p1);
    let r23 = sub(p3, p2);
    let r24 = sub(p4, p2);
    let (Some(n1), Some(n2), Some(n3), Some(n4)) = (
        unit(cross(r13, r14)),
        unit(cross(r14, r24)),
        unit(cross(r24, r23)),
        unit(cross(r23, r13)),
    ) else {
        return 0.0;
    };
    let omega = asin_dot(n1, n2) + asin_dot(n2, n3) + asin_dot(n3, n4) + asin_dot(n4, n1);
    let orient = dot(cross(sub(p4, p3), sub(p2, p1)), r13);
    omega * orient.signum()
}

/// Linking number of the closed polygons through `a` and `b` (the last
/// vertex connects back to the first). Returns the raw Gauss sum, which is
/// an integer up to rounding for disjoint polygons.
pub fn linking_number(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.len() < 3 || b.len() < 3 {
        return Err(Error::InvalidParameter(
            "closed polygons need at least 3 vertices".into(),
        ));
    }
    if a.iter().chain(b).any(|p| p.dim() != 3) {
        return Err(Error::InvalidParameter("linking number needs points in R^3".into()));
    }
    let pa: Vec<V3> = a.iter().map(v3).collect();
    let pb: Vec<V3> = b.iter().map(v3).collect();
    let mut total = 0.0;
    for i in 0..pa.len() {
        let (p1, p2) = (pa[i], pa[(i + 1) % pa.len()]);
        for j in 0..pb.len() {
            let (p3, p4) = (pb[j], pb[(j + 1) % pb.len()]);
            total += segment_pair(p1, p2, p3, p4);
        }
    }
    Ok(total / (4.0 * std::f64::consts::PI))
}
