use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FlowMap;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Ball, Point, PointCloud};

/// Ordered composition of flow maps; stage 0 is applied first.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiffeoPipeline {
    stages: Vec<FlowMap>,
}

impl DiffeoPipeline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_stages(stages: Vec<FlowMap>) -> Result<Self> {
        let mut p = Self::new();
        for s in stages {
            p.push(s)?;
        }
        Ok(p)
    }

    pub fn push(&mut self, stage: FlowMap) -> Result<()> {
        if let Some(first) = self.stages.first() {
            check_dim(first.dim(), stage.dim())?;
        }
        self.stages.push(stage);
        Ok(())
    }

    pub fn extend(&mut self, other: DiffeoPipeline) -> Result<()> {
        for s in other.stages {
            self.push(s)?;
        }
        Ok(())
    }

    pub fn stages(&self) -> &[FlowMap] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.stages.first().map(FlowMap::dim)
    }

    pub fn apply_point(&self, x: &Point) -> Result<Point> {
        let mut y = x.clone();
        for s in &self.stages {
            y = s.apply(&y)?;
        }
        Ok(y)
    }

    pub fn invert_point(&self, y: &Point) -> Result<Point> {
        let mut x = y.clone();
        for s in self.stages.iter().rev() {
            x = s.invert(&x)?;
        }
        Ok(x)
    }

    /// Maps every sample; the guard radius is carried over unchanged.
    pub fn apply(&self, c: &PointCloud) -> Result<PointCloud> {
        self.map_cloud(c, |p| self.apply_point(p))
    }

    pub fn invert_apply(&self, c: &PointCloud) -> Result<PointCloud> {
        self.map_cloud(c, |p| self.invert_point(p))
    }

    fn map_cloud<F>(&self, c: &PointCloud, f: F) -> Result<PointCloud>
    where
        F: Fn(&Point) -> Result<Point> + Sync + Send,
    {
        if let Some(d) = self.dim() {
            if !c.is_empty() {
                check_dim(d, c.dim())?;
            }
        }
        let points = c
            .points()
            .par_iter()
            .map(f)
            .collect::<Result<Vec<_>>>()?;
        Ok(c.with_points(points))
    }

    /// A ball outside of which every stage is the identity.
    pub fn support_bound(&self) -> Option<Ball> {
        let balls: Vec<Ball> = self
            .stages
            .iter()
            .map(|s| s.field().support_bound())
            .collect();
        enclosing_ball(&balls)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: DiffeoPipeline = serde_json::from_str(s)?;
        // Re-check the shared dimension.
        Self::from_stages(p.stages)
    }
}

/// Some ball containing all of `balls` (centered at the centroid).
pub(crate) fn enclosing_ball(balls: &[Ball]) -> Option<Ball> {
    let first = balls.first()?;
    let n = first.dim();
    let mut c = vec![0.0; n];
    for b in balls {
        for (ci, bi) in c.iter_mut().zip(b.center.coords()) {
            *ci += bi / balls.len() as f64;
        }
    }
    let center = Point::from_vec_unchecked(c);
    let radius = balls
        .iter()
        .map(|b| b.center.dist(&center) + b.radius)
        .fold(0.0, f64::max);
    Some(Ball { center, radius })
}

/// Central finite-difference Jacobian of the pipeline at `x`.
pub fn jacobian_fd(map: &DiffeoPipeline, x: &Point, h: f64) -> Result<DMatrix<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let n = x.dim();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let e = Point::axis(n, j);
        let plus = map.apply_point(&x.add_scaled(&e, h))?;
        let minus = map.apply_point(&x.add_scaled(&e, -h))?;
        for i in 0..n {
            jac[(i, j)] = (plus.coords()[i] - minus.coords()[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}
