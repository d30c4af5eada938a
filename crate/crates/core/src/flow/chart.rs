//! Smooth embeddings of the closed unit ball used by chart compressions.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Ball, Point};

/// An embedding `g` of a neighbourhood of the closed unit ball into ℝⁿ,
/// together with its derivative and inverse.
pub trait SmoothChart: Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// `g(z)`.
    fn forward(&self, z: &Point) -> Point;

    /// `Dg(z) · v`.
    fn push_forward(&self, z: &Point, v: &Point) -> Point;

    /// `g⁻¹(y)` when `y ∈ g(B(0, 1))`, `Ok(None)` when `y` is outside the
    /// image. Errors signal that the chart cannot decide.
    fn inverse(&self, y: &Point) -> Result<Option<Point>>;

    /// A ball containing `g(B(0, radius))`.
    fn image_bound(&self, radius: f64) -> Ball;

    /// Serializable form, if the chart has one.
    fn descriptor(&self) -> Option<ChartDescriptor> {
        None
    }
}

/// Serializable chart families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartDescriptor {
    /// `g(z) = linear · z + offset`, `linear` given row by row.
    Affine {
        linear: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
}

impl ChartDescriptor {
    pub fn build(&self) -> Result<Arc<dyn SmoothChart>> {
        match self {
            ChartDescriptor::Affine { linear, offset } => {
                let n = offset.len();
                if linear.len() != n || linear.iter().any(|row| row.len() != n) {
                    return Err(Error::Document(format!(
                        "affine chart needs a {n}x{n} linear part"
                    )));
                }
                let flat: Vec<f64> = linear.iter().flatten().copied().collect();
                Ok(Arc::new(AffineChart::new(
                    DMatrix::from_row_slice(n, n, &flat),
                    Point::new(offset.clone())?,
                )?))
            }
        }
    }
}

/// `g(z) = A z + b` with `A` invertible.
#[derive(Clone, Debug)]
pub struct AffineChart {
    linear: DMatrix<f64>,
    inverse: DMatrix<f64>,
    offset: Point,
    op_norm: f64,
}

impl AffineChart {
    pub fn new(linear: DMatrix<f64>, offset: Point) -> Result<Self> {
        let n = offset.dim();
        if linear.nrows() != n || linear.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: linear.nrows(),
            });
        }
        let inverse = linear
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("affine chart is singular".into()))?;
        let op_norm = linear
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max);
        Ok(AffineChart {
            linear,
            inverse,
            offset,
            op_norm,
        })
    }

    /// `g(z) = scale · z + offset`.
    pub fn scaled(scale: f64, offset: Point) -> Result<Self> {
        let n = offset.dim();
        Self::new(DMatrix::identity(n, n) * scale, offset)
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled(1.0, Point::origin(dim)).expect("identity is invertible")
    }
}

fn mat_vec(m: &DMatrix<f64>, v: &Point) -> Point {
    let out = m * DVector::from_column_slice(v.coords());
    Point::from_vec_unchecked(out.iter().copied().collect())
}

impl SmoothChart for AffineChart {
    fn dim(&self) -> usize {
        self.offset.dim()
    }

    fn forward(&self, z: &Point) -> Point {
        mat_vec(&self.linear, z).add(&self.offset)
    }

    fn push_forward(&self, _z: &Point, v: &Point) -> Point {
        mat_vec(&self.linear, v)
    }

    fn inverse(&self, y: &Point) -> Result<Option<Point>> {
        check_dim(self.dim(), y.dim())?;
        let z = mat_vec(&self.inverse, &y.sub(&self.offset));
        Ok((z.norm() < 1.0).then_some(z))
    }

    fn image_bound(&self, radius: f64) -> Ball {
        Ball {
            center: self.offset.clone(),
            radius: self.op_norm * radius,
        }
    }

    fn descriptor(&self) -> Option<ChartDescriptor> {
        let n = self.dim();
        Some(ChartDescriptor::Affine {
            linear: (0..n)
                .map(|i| (0..n).map(|j| self.linear[(i, j)]).collect())
                .collect(),
            offset: self.offset.coords().to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_roundtrip_and_image() {
        let g = AffineChart::scaled(2.0, Point::from([5.0, 5.0])).unwrap();
        let z = Point::from([0.25, -0.5]);
        let y = g.forward(&z);
        assert_eq!(y, Point::from([5.5, 4.0]));
        assert_eq!(g.inverse(&y).unwrap().unwrap(), z);
        assert!(g.inverse(&Point::from([8.0, 5.0])).unwrap().is_none());
        assert_eq!(g.image_bound(1.0).radius, 2.0);
        assert_eq!(
            g.push_forward(&z, &Point::from([1.0, 0.0])),
            Point::from([2.0, 0.0])
        );
    }

    #[test]
    fn descriptor_rebuilds_same_chart() {
        let g = AffineChart::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 2.0]),
            Point::from([1.0, -1.0]),
        )
        .unwrap();
        let d = g.descriptor().unwrap();
        let h = d.build().unwrap();
        let z = Point::from([0.3, 0.1]);
        assert_eq!(g.forward(&z), h.forward(&z));
        assert_eq!(h.descriptor().unwrap(), d);
    }

    #[test]
    fn singular_chart_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(AffineChart::new(m, Point::from([0.0, 0.0])).is_err());
    }
}
