//! Hard-margin linear separability certificates.
//!
//! The best margin between two clouds is half the distance between their
//! convex hulls. [`separate_pair`] finds the nearest pair of hull points,
//! takes the bisecting hyperplane, and then re-measures the margin on every
//! sample, so a certificate never relies on the solver being right.

mod minnorm;
mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Hyperplane, LabeledDataset, Point, PointCloud};

/// Margins at or below this count as touching.
pub const MARGIN_TOL: f64 = 1e-9;

/// Result of separating one pair of labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairCertificate {
    pub label_a: i64,
    pub label_b: i64,
    /// Unit-normal plane with label A on the positive side.
    pub hyperplane: Option<Hyperplane>,
    /// Verified margin; not positive when the pair is not separable.
    pub margin: f64,
    /// A point in both convex hulls, when one was found.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Point>,
}

impl PairCertificate {
    pub fn separable(&self) -> bool {
        self.hyperplane.is_some() && self.margin > MARGIN_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeparationCertificate {
    pub pairs: Vec<PairCertificate>,
    pub all_separable: bool,
}

impl SeparationCertificate {
    /// Re-checks every separable pair against the data.
    pub fn verify(&self, d: &LabeledDataset) -> Result<bool> {
        for p in self.pairs.iter().filter(|p| p.separable()) {
            let (Some(a), Some(b)) = (d.merged(p.label_a), d.merged(p.label_b)) else {
                return Ok(false);
            };
            let h = p.hyperplane.as_ref().expect("separable pair has a plane");
            if margin_of(h, &a, &b)? < p.margin - MARGIN_TOL {
                return Ok(false);
            }
        }
        Ok(self.all_separable == self.pairs.iter().all(PairCertificate::separable))
    }
}

/// Signed margin of `h` between the clouds: the smallest distance of a
/// sample of `a` (net of guard) on the positive side, or of `b` on the
/// negative side, from the normalized plane. Negative when the plane does
/// not separate them.
pub fn margin_of(h: &Hyperplane, a: &PointCloud, b: &PointCloud) -> Result<f64> {
    let h = h.normalized();
    let n = h.normal.dim();
    let mut m = f64::INFINITY;
    for (cloud, sign) in [(a, 1.0), (b, -1.0)] {
        if cloud.is_empty() {
            continue;
        }
        check_dim(n, cloud.dim())?;
        for x in cloud.points() {
            m = m.min(sign * h.eval(x) - cloud.guard());
        }
    }
    Ok(m)
}

/// Maximum-margin hyperplane with `a` on its positive side, if the margin
/// exceeds [`MARGIN_TOL`].
pub fn separate_pair(a: &PointCloud, b: &PointCloud) -> Result<Option<(Hyperplane, f64)>> {
    let pair = solve_pair(a, b)?;
    Ok(pair.hyperplane.map(|h| (h, pair.margin)).filter(|_| pair.margin > MARGIN_TOL))
}

struct PairSolution {
    hyperplane: Option<Hyperplane>,
    margin: f64,
    witness: Option<Point>,
}

fn solve_pair(a: &PointCloud, b: &PointCloud) -> Result<PairSolution> {
    check_dim(a.dim(), b.dim())?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("cannot separate an empty cloud".into()));
    }
    let near = minnorm::nearest_pair(a.points(), b.points());
    let gap = near.gap();
    let dist = gap.iter().map(|g| g * g).sum::<f64>().sqrt();
    let clearance = dist - a.guard() - b.guard();
    let mut hyperplane = None;
    let mut margin = clearance.min(0.0);
    if dist > 0.0 && clearance > 0.0 {
        let w = Point::new(gap.iter().map(|g| g / dist).collect())?;
        let wa: f64 = w.coords().iter().zip(&near.a).map(|(x, y)| x * y).sum();
        // Equal clearance on both sides after the guards.
        let offset = wa - a.guard() - 0.5 * clearance;
        let h = Hyperplane::new(w, offset)?;
        margin = margin_of(&h, a, b)?;
        hyperplane = Some(h);
    }
    let mut witness = None;
    if !(margin > MARGIN_TOL) {
        hyperplane = hyperplane.filter(|_| margin > 0.0);
        witness = simplex::hull_intersection(a.points(), b.points())
            .map(Point::new)
            .transpose()?;
        if witness.is_none() && !near.converged {
            return Err(Error::Convergence(
                "nearest-point iteration stopped early and no hull intersection was found".into(),
            ));
        }
    }
    Ok(PairSolution {
        hyperplane,
        margin,
        witness,
    })
}

/// Separates every pair of distinct labels; entries sharing a label are
/// merged first.
pub fn certify_pairwise(d: &LabeledDataset) -> Result<SeparationCertificate> {
    let labels = d.labels();
    if labels.len() < 2 {
        return Err(Error::InvalidParameter(
            "certification needs at least two labels".into(),
        ));
    }
    let merged: Vec<PointCloud> = labels
        .iter()
        .map(|&l| d.merged(l).expect("label present"))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..labels.len())
        .flat_map(|i| (i + 1..labels.len()).map(move |j| (i, j)))
        .collect();
    let pairs = jobs
        .par_iter()
        .map(|&(i, j)| {
            let s = solve_pair(&merged[i], &merged[j])?;
            Ok(PairCertificate {
                label_a: labels[i],
                label_b: labels[j],
                hyperplane: s.hyperplane,
                margin: s.margin,
                witness: s.witness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_separable = pairs.iter().all(PairCertificate::separable);
    Ok(SeparationCertificate {
        pairs,
        all_separable,
    })
}

#[cfg(test)]
mod tests;
