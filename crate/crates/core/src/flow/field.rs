//! Compactly supported autonomous vector fields.

use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::chart::{ChartDescriptor, SmoothChart};
use crate::bump::BumpProfile;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Ball, Point};

/// Relative tolerance for `g(g⁻¹(y)) = y`.
const CHART_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum VectorField {
    /// `V(x) = −η(‖x − center‖)(x − center)`; plateau `r`, support `theta`.
    Compression { center: Point, profile: BumpProfile },
    /// `V(x) = η(‖x − anchor‖²) · displacement`; plateau `delta_sq`,
    /// support `supp_sq` (both squared radii).
    Translation {
        anchor: Point,
        profile: BumpProfile,
        displacement: Point,
    },
    /// Pushforward of the compression field on the unit ball through
    /// `chart`: `Dg(g⁻¹(y)) · V(g⁻¹(y))`, zero off the chart image.
    ChartCompression {
        chart: Arc<dyn SmoothChart>,
        profile: BumpProfile,
    },
}

impl VectorField {
    pub fn compression(center: Point, r: f64, theta: f64) -> Result<Self> {
        if !(r > 0.0 && theta > r) {
            return Err(Error::InvalidParameter(format!(
                "compression needs 0 < r < theta, got r={r}, theta={theta}"
            )));
        }
        Ok(VectorField::Compression {
            center,
            profile: BumpProfile::new(r, theta)?,
        })
    }

    pub fn translation(
        anchor: Point,
        delta_sq: f64,
        supp_sq: f64,
        displacement: Point,
    ) -> Result<Self> {
        check_dim(anchor.dim(), displacement.dim())?;
        if !(delta_sq > 0.0 && supp_sq > delta_sq) {
            return Err(Error::InvalidParameter(format!(
                "translation needs 0 < deltaSq < suppSq, got {delta_sq}, {supp_sq}"
            )));
        }
        Ok(VectorField::Translation {
            anchor,
            profile: BumpProfile::new(delta_sq, supp_sq)?,
            displacement,
        })
    }

    pub fn chart_compression(
        chart: Arc<dyn SmoothChart>,
        inner_r: f64,
        cutoff_r: f64,
    ) -> Result<Self> {
        if !(inner_r > 0.0 && cutoff_r > inner_r && cutoff_r < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "chart compression needs 0 < innerR < cutoffR < 1, got {inner_r}, {cutoff_r}"
            )));
        }
        Ok(VectorField::ChartCompression {
            chart,
            profile: BumpProfile::new(inner_r, cutoff_r)?,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            VectorField::Compression { center, .. } => center.dim(),
            VectorField::Translation { anchor, .. } => anchor.dim(),
            VectorField::ChartCompression { chart, .. } => chart.dim(),
        }
    }

    /// Pulls `y` back through the chart, `None` off the image.
    fn pull_back(chart: &dyn SmoothChart, y: &Point) -> Result<Option<Point>> {
        let Some(z) = chart.inverse(y)? else {
            return Ok(None);
        };
        let back = chart.forward(&z);
        if back.dist(y) > CHART_TOL * (1.0 + y.norm()) {
            return Err(Error::ChartInconsistency(format!(
                "g(g^-1(y)) misses y by {}",
                back.dist(y)
            )));
        }
        Ok(Some(z))
    }

    /// Whether `x` lies in the open set where the field may be nonzero.
    pub fn in_support(&self, x: &Point) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        Ok(match self {
            VectorField::Compression { center, profile } => x.dist(center) < profile.outer(),
            VectorField::Translation {
                anchor, profile, ..
            } => x.dist_sq(anchor) < profile.outer(),
            VectorField::ChartCompression { chart, profile } => {
                match Self::pull_back(chart.as_ref(), x)? {
                    Some(z) => z.norm() < profile.outer(),
                    None => false,
                }
            }
        })
    }

    pub fn eval(&self, x: &Point) -> Result<Point> {
        check_dim(self.dim(), x.dim())?;
        Ok(match self {
            VectorField::Compression { center, profile } => {
                let d = x.sub(center);
                let eta = profile.eval(d.norm());
                d.scale(-eta)
            }
            VectorField::Translation {
                anchor,
                profile,
                displacement,
            } => displacement.scale(profile.eval(x.dist_sq(anchor))),
            VectorField::ChartCompression { chart, profile } => {
                match Self::pull_back(chart.as_ref(), x)? {
                    Some(z) => {
                        let v = z.scale(-profile.eval(z.norm()));
                        chart.push_forward(&z, &v)
                    }
                    None => Point::origin(x.dim()),
                }
            }
        })
    }

    /// Upper bound on the Lipschitz constant; `None` for chart fields.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        match self {
            // ‖DV‖ ≤ η + ‖x − c‖·|η'|
            VectorField::Compression { profile, .. } => {
                Some(1.0 + profile.outer() * profile.max_slope())
            }
            // ‖DV‖ ≤ ‖d‖·|η'|·2‖x − a‖
            VectorField::Translation {
                profile,
                displacement,
                ..
            } => Some(displacement.norm() * profile.max_slope() * 2.0 * profile.outer().sqrt()),
            VectorField::ChartCompression { .. } => None,
        }
    }

    /// A ball outside of which the field vanishes identically.
    pub fn support_bound(&self) -> Ball {
        match self {
            VectorField::Compression { center, profile } => Ball {
                center: center.clone(),
                radius: profile.outer(),
            },
            VectorField::Translation {
                anchor, profile, ..
            } => Ball {
                center: anchor.clone(),
                radius: profile.outer().sqrt(),
            },
            VectorField::ChartCompression { chart, profile } => {
                chart.image_bound(profile.outer())
            }
        }
    }

    fn descriptor(&self) -> Result<FieldDescriptor> {
        Ok(match self {
            VectorField::Compression { center, profile } => FieldDescriptor::Compression {
                center: center.clone(),
                r: profile.inner(),
                theta: profile.outer(),
            },
            VectorField::Translation {
                anchor,
                profile,
                displacement,
            } => FieldDescriptor::Translation {
                anchor: anchor.clone(),
                delta_sq: profile.inner(),
                supp_sq: profile.outer(),
                displacement: displacement.clone(),
            },
            VectorField::ChartCompression { chart, profile } => {
                FieldDescriptor::ChartCompression {
                    chart: chart.descriptor().ok_or_else(|| {
                        Error::Document("chart has no serializable form".into())
                    })?,
                    inner_r: profile.inner(),
                    cutoff_r: profile.outer(),
                }
            }
        })
    }

    fn from_descriptor(d: FieldDescriptor) -> Result<Self> {
        match d {
            FieldDescriptor::Compression { center, r, theta } => {
                Self::compression(center, r, theta)
            }
            FieldDescriptor::Translation {
                anchor,
                delta_sq,
                supp_sq,
                displacement,
            } => Self::translation(anchor, delta_sq, supp_sq, displacement),
            FieldDescriptor::ChartCompression {
                chart,
                inner_r,
                cutoff_r,
            } => Self::chart_compression(chart.build()?, inner_r, cutoff_r),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FieldDescriptor {
    Compression {
        center: Point,
        r: f64,
        theta: f64,
    },
    Translation {
        anchor: Point,
        delta_sq: f64,
        supp_sq: f64,
        displacement: Point,
    },
    ChartCompression {
        chart: ChartDescriptor,
        inner_r: f64,
        cutoff_r: f64,
    },
}

impl Serialize for VectorField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.descriptor()
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VectorField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let desc = FieldDescriptor::deserialize(d)?;
        Self::from_descriptor(desc).map_err(serde::de::Error::custom)
    }
}
