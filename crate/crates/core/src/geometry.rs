//! Dimension-generic points, balls and sampled compact sets.
//!
//! Compact sets are carried as finite samples plus a *guard* radius: every
//! distance or containment query treats each sample as a closed ball of
//! radius `guard`, so a query that passes on the samples also passes on any
//! set lying within `guard` of them. All distances are Euclidean and all
//! balls are open.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A point of ℝⁿ with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("point needs dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Point(coords))
    }

    /// Builds a point without validation. Callers must guarantee finite,
    /// non-empty coordinates.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim.max(1)])
    }

    /// Unit vector along axis `axis`.
    pub fn axis(dim: usize, axis: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        Point(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + s * dir`
    pub fn add_scaled(&self, dir: &Point, s: f64) -> Point {
        Point(self.0.iter().zip(&dir.0).map(|(a, d)| a + s * d).collect())
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist_sq(other).sqrt()
    }

    /// Appends one coordinate.
    pub fn lifted(&self, height: f64) -> Point {
        let mut v = self.0.clone();
        v.push(height);
        Point(v)
    }

    /// Keeps the first `n` coordinates.
    pub fn truncated(&self, n: usize) -> Point {
        Point(self.0[..n].to_vec())
    }
}

impl From<[f64; 2]> for Point {
    fn from(c: [f64; 2]) -> Self {
        Point(c.to_vec())
    }
}

impl From<[f64; 3]> for Point {
    fn from(c: [f64; 3]) -> Self {
        Point(c.to_vec())
    }
}

/// Open ball `B(center, radius)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Strict (open ball) membership.
    pub fn contains(&self, p: &Point) -> bool {
        p.dist(&self.center) < self.radius
    }

    /// Viewed as a point cloud: the center with the radius as guard.
    pub fn as_cloud(&self) -> PointCloud {
        PointCloud {
            dim: self.dim(),
            points: vec![self.center.clone()],
            guard: self.radius,
        }
    }
}

/// Finite sample of a compact set with a conservative guard radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Point>,
    guard: f64,
}

impl PointCloud {
    pub fn new(points: Vec<Point>, guard: f64) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidParameter("point cloud must be non-empty".into()))?;
        let dim = first.dim();
        for p in &points {
            check_dim(dim, p.dim())?;
        }
        if !(guard >= 0.0 && guard.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "guard must be non-negative, got {guard}"
            )));
        }
        Ok(PointCloud { dim, points, guard })
    }

    /// An empty cloud. Only meaningful as an obstacle set.
    pub fn empty(dim: usize) -> Self {
        PointCloud {
            dim,
            points: Vec::new(),
            guard: 0.0,
        }
    }

    /// Same guard and dimension, new points. Dimensions are not re-checked.
    pub(crate) fn with_points(&self, points: Vec<Point>) -> Self {
        PointCloud {
            dim: points.first().map_or(self.dim, Point::dim),
            points,
            guard: self.guard,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn guard(&self) -> f64 {
        self.guard
    }

    pub fn set_guard(&mut self, guard: f64) {
        self.guard = guard.max(0.0);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest `‖p − center‖` over the samples, without the guard.
    pub fn max_dist_from(&self, center: &Point) -> f64 {
        self.points
            .iter()
            .map(|p| p.dist(center))
            .fold(0.0, f64::max)
    }

    /// Concatenation of several clouds; the guard is the largest one.
    pub fn union<'a>(dim: usize, clouds: impl IntoIterator<Item = &'a PointCloud>) -> Result<Self> {
        let mut points = Vec::new();
        let mut guard: f64 = 0.0;
        for c in clouds {
            if c.is_empty() {
                continue;
            }
            check_dim(dim, c.dim())?;
            points.extend(c.points.iter().cloned());
            guard = guard.max(c.guard);
        }
        Ok(PointCloud { dim, points, guard })
    }
}

/// One entry of a labeled dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledCloud {
    pub label: i64,
    pub cloud: PointCloud,
    /// Source domain enclosing the cloud, when one is known.
    #[serde(default)]
    pub source: Option<Ball>,
}

/// Several clouds with integer labels. Labels may repeat across entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub classes: Vec<LabeledCloud>,
}

impl LabeledDataset {
    pub fn new(classes: Vec<LabeledCloud>) -> Result<Self> {
        if let Some(first) = classes.first() {
            let dim = first.cloud.dim();
            for c in &classes {
                check_dim(dim, c.cloud.dim())?;
                if let Some(b) = &c.source {
                    check_dim(dim, b.dim())?;
                }
            }
        }
        Ok(LabeledDataset { classes })
    }

    pub fn dim(&self) -> Option<usize> {
        self.classes.first().map(|c| c.cloud.dim())
    }

    pub fn total_points(&self) -> usize {
        self.classes.iter().map(|c| c.cloud.len()).sum()
    }

    /// Distinct labels in ascending order.
    pub fn labels(&self) -> Vec<i64> {
        let mut labels: Vec<i64> = self.classes.iter().map(|c| c.label).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// All entries with the given label merged into one cloud.
    pub fn merged(&self, label: i64) -> Option<PointCloud> {
        let dim = self.dim()?;
        let members: Vec<&PointCloud> = self
            .classes
            .iter()
            .filter(|c| c.label == label)
            .map(|c| &c.cloud)
            .collect();
        if members.is_empty() {
            return None;
        }
        PointCloud::union(dim, members).ok()
    }
}

/// `{x : ⟨normal, x⟩ = offset}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Point,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        if !(normal.norm() > 0.0) {
            return Err(Error::InvalidParameter("hyperplane normal is zero".into()));
        }
        Ok(Hyperplane { normal, offset })
    }

    /// Same plane with a unit normal.
    pub fn normalized(&self) -> Hyperplane {
        let n = self.normal.norm();
        Hyperplane {
            normal: self.normal.scale(1.0 / n),
            offset: self.offset / n,
        }
    }

    /// `⟨normal, x⟩ − offset`, unnormalized.
    pub fn eval(&self, x: &Point) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// Smallest sample-to-sample distance minus both guards, clamped at 0.
/// An empty cloud is infinitely far from everything.
pub fn dist_set_set(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    if a.is_empty() || b.is_empty() {
        return Ok(f64::INFINITY);
    }
    let mut best = f64::INFINITY;
    for p in a.points() {
        for q in b.points() {
            best = best.min(p.dist_sq(q));
        }
    }
    Ok((best.sqrt() - a.guard() - b.guard()).max(0.0))
}

/// True iff every sample satisfies `‖p − center‖ + guard < radius − slack`.
pub fn ball_contains_cloud(b: &Ball, c: &PointCloud, slack: f64) -> Result<bool> {
    if c.is_empty() {
        return Ok(true);
    }
    check_dim(b.dim(), c.dim())?;
    let limit = b.radius - slack;
    Ok(c
        .points()
        .iter()
        .all(|p| p.dist(&b.center) + c.guard() < limit))
}

/// Number of samples violating [`ball_contains_cloud`].
pub fn count_outside(b: &Ball, c: &PointCloud, slack: f64) -> usize {
    let limit = b.radius - slack;
    c.points()
        .iter()
        .filter(|p| !(p.dist(&b.center) + c.guard() < limit))
        .count()
}

/// Pairwise `‖cᵢ − cⱼ‖ > rᵢ + rⱼ`; tangent balls are not disjoint.
pub fn balls_disjoint(balls: &[Ball]) -> bool {
    balls.iter().enumerate().all(|(i, a)| {
        balls[i + 1..]
            .iter()
            .all(|b| a.center.dist(&b.center) > a.radius + b.radius)
    })
}
