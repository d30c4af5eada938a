//! Deterministic generators for the demo datasets and generic ball samplers.

mod linking;
mod rng;

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

pub use linking::linking_number;
pub use rng::SampleRng;

use crate::error::{Error, Result};
use crate::geometry::{Ball, LabeledCloud, LabeledDataset, Point, PointCloud};

/// How far the round source balls of the toy disks extend past the disks.
pub const TOY_SOURCE_MARGIN: f64 = 0.1;

/// Default rolling extent of the Swiss roll, 1.5 turns.
pub const SWISS_T0: f64 = 1.5 * PI;
pub const SWISS_T1: f64 = 4.5 * PI;

/// Length of the flat direction of the Swiss roll.
pub const SWISS_WIDTH: f64 = 12.0;

/// Angular tolerance when unrolling.
const UNROLL_TOL: f64 = 1e-6;

fn require_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    Ok(())
}

/// Uniform samples of `b` (rejection from the bounding cube) or of its
/// boundary sphere (normalized Gaussian vectors).
pub fn sample_ball(b: &Ball, count: usize, seed: u64, surface_only: bool) -> Result<PointCloud> {
    require_count(count)?;
    let n = b.dim();
    let mut rng = SampleRng::new(seed, 0);
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let dir: Vec<f64> = if surface_only {
            let g: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            g.into_iter().map(|x| x / norm).collect()
        } else {
            let u: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
            if u.iter().map(|x| x * x).sum::<f64>() >= 1.0 {
                continue;
            }
            u
        };
        let p: Vec<f64> = b
            .center
            .coords()
            .iter()
            .zip(&dir)
            .map(|(c, d)| c + b.radius * d)
            .collect();
        points.push(Point::new(p)?);
    }
    PointCloud::new(points, 0.0)
}

fn sample_planar<F>(rng: &mut SampleRng, count: usize, lo: [f64; 2], hi: [f64; 2], accept: F) -> Vec<Point>
where
    F: Fn(f64, f64) -> bool,
{
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = rng.uniform(lo[0], hi[0]);
        let y = rng.uniform(lo[1], hi[1]);
        if accept(x, y) {
            out.push(Point::from([x, y]));
        }
    }
    out
}

/// Disk A (center (−1, 1)), disk B (center (1, −1)), both of radius 1, and
/// the annulus C = {3 ≤ ‖x‖ ≤ 5}; labels 0, 1, 2. A and B carry round
/// source balls; C cannot be enclosed by one disjoint from the others.
pub fn gen_toy_abc(count: usize, seed: u64) -> Result<LabeledDataset> {
    require_count(count)?;
    let mut ra = SampleRng::new(seed, 0);
    let mut rb = SampleRng::new(seed, 1);
    let mut rc = SampleRng::new(seed, 2);
    let a = sample_planar(&mut ra, count, [-2.0, 0.0], [0.0, 2.0], |x, y| {
        (x + 1.0).powi(2) + (y - 1.0).powi(2) <= 1.0
    });
    let b = sample_planar(&mut rb, count, [0.0, -2.0], [2.0, 0.0], |x, y| {
        (x - 1.0).powi(2) + (y + 1.0).powi(2) <= 1.0
    });
    let c = sample_planar(&mut rc, count, [-5.0, -5.0], [5.0, 5.0], |x, y| {
        let r2 = x * x + y * y;
        (9.0..=25.0).contains(&r2)
    });
    LabeledDataset::new(vec![
        LabeledCloud {
            label: 0,
            cloud: PointCloud::new(a, 0.0)?,
            source: Some(Ball::new(Point::from([-1.0, 1.0]), 1.0 + TOY_SOURCE_MARGIN)?),
        },
        LabeledCloud {
            label: 1,
            cloud: PointCloud::new(b, 0.0)?,
            source: Some(Ball::new(Point::from([1.0, -1.0]), 1.0 + TOY_SOURCE_MARGIN)?),
        },
        LabeledCloud {
            label: 2,
            cloud: PointCloud::new(c, 0.0)?,
            source: None,
        },
    ])
}

/// Hopf link `L₁ = {(x, y, 0) : (x+1)² + y² = 4}`,
/// `L₂ = {(x, 0, z) : (x−1)² + z² = 4}`, `count` equally spaced samples each.
pub fn gen_hopf_link(count: usize) -> Result<LabeledDataset> {
    if count < 3 {
        return Err(Error::InvalidParameter("hopf link needs >= 3 samples per circle".into()));
    }
    let angle = |k: usize| TAU * k as f64 / count as f64;
    let l1 = (0..count)
        .map(|k| {
            let t = angle(k);
            Point::from([-1.0 + 2.0 * t.cos(), 2.0 * t.sin(), 0.0])
        })
        .collect();
    let l2 = (0..count)
        .map(|k| {
            let t = angle(k);
            Point::from([1.0 + 2.0 * t.cos(), 0.0, 2.0 * t.sin()])
        })
        .collect();
    LabeledDataset::new(vec![
        LabeledCloud {
            label: 0,
            cloud: PointCloud::new(l1, 0.0)?,
            source: None,
        },
        LabeledCloud {
            label: 1,
            cloud: PointCloud::new(l2, 0.0)?,
            source: None,
        },
    ])
}

/// `ψ(s, t) = (s, t cos t + 15, t sin t + 15)`.
pub fn roll(s: f64, t: f64) -> Point {
    Point::from([s, t * t.cos() + 15.0, t * t.sin() + 15.0])
}

/// Grid samples of the Swiss roll with their `(s, t)` parameters.
#[derive(Clone, Debug)]
pub struct SwissRoll {
    pub cloud: PointCloud,
    pub params: Vec<(f64, f64)>,
}

fn grid(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * k as f64 / (n - 1) as f64
    }
}

/// Evaluates the roll on an `s_grid × t_grid` grid of `[0, 12] × [t0, t1]`.
pub fn gen_swiss_roll(t0: f64, t1: f64, s_grid: usize, t_grid: usize) -> Result<SwissRoll> {
    if !(t0 > 0.0 && t1 > t0) {
        return Err(Error::InvalidParameter(format!(
            "swiss roll needs 0 < T0 < T1, got ({t0}, {t1})"
        )));
    }
    require_count(s_grid)?;
    require_count(t_grid)?;
    let mut params = Vec::with_capacity(s_grid * t_grid);
    for i in 0..s_grid {
        for j in 0..t_grid {
            params.push((grid(0.0, SWISS_WIDTH, s_grid, i), grid(t0, t1, t_grid, j)));
        }
    }
    let points = params.iter().map(|&(s, t)| roll(s, t)).collect();
    Ok(SwissRoll {
        cloud: PointCloud::new(points, 0.0)?,
        params,
    })
}

/// Inverse of [`roll`]: `s = x`, `t = ‖(y − 15, z − 15)‖`, after checking
/// that the polar angle agrees with `t` modulo 2π.
pub fn unroll_swiss(p: &Point) -> Result<(f64, f64)> {
    if p.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: p.dim(),
        });
    }
    let c = p.coords();
    let (dy, dz) = (c[1] - 15.0, c[2] - 15.0);
    let t = dy.hypot(dz);
    if !(t > 0.0) {
        return Err(Error::OffManifold(f64::INFINITY));
    }
    let mut residual = (dz.atan2(dy) - t).rem_euclid(TAU);
    if residual > PI {
        residual -= TAU;
    }
    if residual.abs() > UNROLL_TOL {
        return Err(Error::OffManifold(residual));
    }
    Ok((c[0], t))
}

/// Declarative description of one generated dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    Ball {
        ball: Ball,
        count: usize,
        seed: u64,
        #[serde(default)]
        surface_only: bool,
    },
    ToyRings {
        count: usize,
        seed: u64,
    },
    HopfLink {
        count: usize,
    },
    SwissRoll {
        t0: f64,
        t1: f64,
        s_grid: usize,
        t_grid: usize,
    },
}

impl SamplerSpec {
    pub fn generate(&self) -> Result<LabeledDataset> {
        match self {
            SamplerSpec::Ball {
                ball,
                count,
                seed,
                surface_only,
            } => LabeledDataset::new(vec![LabeledCloud {
                label: 0,
                cloud: sample_ball(ball, *count, *seed, *surface_only)?,
                source: None,
            }]),
            SamplerSpec::ToyRings { count, seed } => gen_toy_abc(*count, *seed),
            SamplerSpec::HopfLink { count } => gen_hopf_link(*count),
            SamplerSpec::SwissRoll {
                t0,
                t1,
                s_grid,
                t_grid,
            } => LabeledDataset::new(vec![LabeledCloud {
                label: 0,
                cloud: gen_swiss_roll(*t0, *t1, *s_grid, *t_grid)?.cloud,
                source: None,
            }]),
        }
    }
}
