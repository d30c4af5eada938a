//! Flows of compactly supported vector fields and their compositions.
//!
//! Every building block is the time-`t` map of an autonomous field that
//! vanishes outside a bounded set, integrated with fixed-step classical RK4.
//! The inverse is the same integration with the field negated, using the
//! same step sequence.

mod chart;
mod field;
mod pipeline;

use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize};

pub use chart::{AffineChart, ChartDescriptor, SmoothChart};
pub use field::VectorField;
pub use pipeline::{jacobian_fd, DiffeoPipeline};

use crate::datasets::sample_ball;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{ball_contains_cloud, Ball, Point, PointCloud};

/// Largest RK4 step, in time units.
pub const MAX_STEP: f64 = 0.05;

/// Largest `h·L` per RK4 step for fields with a Lipschitz bound `L`.
pub const STIFFNESS_LIMIT: f64 = 0.1;

/// Extra time added on top of `ln(r/δ)` for compressions.
pub const DEFAULT_TIME_MARGIN: f64 = 0.1;

/// Cap on time doublings when fitting a chart compression.
const MAX_DOUBLINGS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    pub max_step: f64,
    pub time_margin: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            max_step: MAX_STEP,
            time_margin: DEFAULT_TIME_MARGIN,
        }
    }
}

impl FlowOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_step > 0.0 && self.max_step <= MAX_STEP) {
            return Err(Error::InvalidParameter(format!(
                "step size must lie in (0, {MAX_STEP}], got {}",
                self.max_step
            )));
        }
        if !(self.time_margin >= 0.0 && self.time_margin.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time margin must be non-negative, got {}",
                self.time_margin
            )));
        }
        Ok(())
    }
}

fn min_steps(time: f64) -> usize {
    ((time / MAX_STEP).ceil() as usize).max(1)
}

/// Time-`time` map of `field`, integrated in `steps` equal RK4 steps.
#[derive(Clone, Debug, Serialize)]
pub struct FlowMap {
    field: VectorField,
    time: f64,
    steps: usize,
    /// Integrate backwards in time.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    reverse: bool,
}

impl FlowMap {
    /// Uses the default maximal step. Stiff fields get more steps, so that
    /// `h·L` stays below [`STIFFNESS_LIMIT`].
    pub fn new(field: VectorField, time: f64) -> Result<Self> {
        Self::with_max_step(field, time, MAX_STEP)
    }

    pub fn with_max_step(field: VectorField, time: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) {
            return Err(Error::InvalidParameter("step size must be positive".into()));
        }
        let mut steps = ((time / max_step).ceil() as usize).max(1);
        if let Some(l) = field.lipschitz_bound() {
            if time.is_finite() {
                steps = steps.max((time * l / STIFFNESS_LIMIT).ceil() as usize);
            }
        }
        Self::with_steps(field, time, steps)
    }

    pub fn with_steps(field: VectorField, time: f64, steps: usize) -> Result<Self> {
        if !(time >= 0.0 && time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "flow time must be non-negative, got {time}"
            )));
        }
        if steps < min_steps(time) {
            return Err(Error::InvalidParameter(format!(
                "{steps} steps exceed the maximal step {MAX_STEP} for time {time}"
            )));
        }
        Ok(FlowMap {
            field,
            time,
            steps,
            reverse: false,
        })
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    /// `φ(time, x)` (or `φ(−time, x)` when reversed).
    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.integrate(x, if self.reverse { -1.0 } else { 1.0 })
    }

    /// Inverse of [`FlowMap::apply`].
    pub fn invert(&self, y: &Point) -> Result<Point> {
        self.integrate(y, if self.reverse { 1.0 } else { -1.0 })
    }

    fn integrate(&self, x: &Point, sign: f64) -> Result<Point> {
        check_dim(self.dim(), x.dim())?;
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        // Outside the support the field vanishes, so x is a fixed point.
        if self.time == 0.0 || !self.field.in_support(x)? {
            return Ok(x.clone());
        }
        let h = sign * self.time / self.steps as f64;
        let mut y = x.clone();
        for step in 0..self.steps {
            let k1 = self.field.eval(&y)?;
            let k2 = self.field.eval(&y.add_scaled(&k1, 0.5 * h))?;
            let k3 = self.field.eval(&y.add_scaled(&k2, 0.5 * h))?;
            let k4 = self.field.eval(&y.add_scaled(&k3, h))?;
            let incr: Vec<f64> = (0..y.dim())
                .map(|i| {
                    let s = k1.coords()[i]
                        + 2.0 * k2.coords()[i]
                        + 2.0 * k3.coords()[i]
                        + k4.coords()[i];
                    y.coords()[i] + h / 6.0 * s
                })
                .collect();
            if incr.iter().any(|c| !c.is_finite()) {
                return Err(Error::IntegrationDiverged { step });
            }
            y = Point::from_vec_unchecked(incr);
        }
        Ok(y)
    }

    /// The inverse map as a flow: same field and steps, time reversed.
    pub fn reversed(&self) -> FlowMap {
        FlowMap {
            reverse: !self.reverse,
            ..self.clone()
        }
    }

    pub fn is_reversed(&self) -> bool {
        self.reverse
    }
}

impl<'de> Deserialize<'de> for FlowMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            field: VectorField,
            time: f64,
            steps: usize,
            #[serde(default)]
            reverse: bool,
        }
        let raw = Raw::deserialize(d)?;
        let mut flow =
            FlowMap::with_steps(raw.field, raw.time, raw.steps).map_err(serde::de::Error::custom)?;
        flow.reverse = raw.reverse;
        Ok(flow)
    }
}

/// `ln(r/δ) + margin`: enough time for `e⁻ᵗ B(0, r) ⊂ B(0, δ)`.
pub fn compression_time(r: f64, delta: f64, margin: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < r) {
        return Err(Error::InvalidParameter(format!(
            "compression time needs 0 < delta < r, got delta={delta}, r={r}"
        )));
    }
    if !(margin >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "margin must be non-negative, got {margin}"
        )));
    }
    Ok((r / delta).ln() + margin)
}

/// Flow squeezing `B(center, r)` into `B(center, delta)` while fixing
/// everything outside `B(center, theta)`.
pub fn make_compression(center: Point, r: f64, delta: f64, theta: f64) -> Result<FlowMap> {
    make_compression_with(center, r, delta, theta, &FlowOptions::default())
}

pub fn make_compression_with(
    center: Point,
    r: f64,
    delta: f64,
    theta: f64,
    opts: &FlowOptions,
) -> Result<FlowMap> {
    opts.validate()?;
    if !(delta > 0.0 && delta < r && r < theta) {
        return Err(Error::InvalidParameter(format!(
            "compression needs 0 < delta < r < theta, got ({delta}, {r}, {theta})"
        )));
    }
    let time = compression_time(r, delta, opts.time_margin)?;
    FlowMap::with_max_step(VectorField::compression(center, r, theta)?, time, opts.max_step)
}

/// Default support radius for a compression with plateau `r`.
pub fn default_theta(r: f64) -> f64 {
    r + 0.25 * r
}

/// Time-1 flow sending `p` to `q` and fixing everything outside
/// `B(anchor, r)`.
///
/// The plateau radius sits halfway between `max(‖p − anchor‖, ‖q − anchor‖)`
/// and `r`, the support halfway between the plateau and `r`. On the plateau
/// the map is the translation by `q − p`.
pub fn make_translation(anchor: Point, r: f64, p: Point, q: Point) -> Result<FlowMap> {
    make_translation_with(anchor, r, p, q, &FlowOptions::default())
}

pub fn make_translation_with(
    anchor: Point,
    r: f64,
    p: Point,
    q: Point,
    opts: &FlowOptions,
) -> Result<FlowMap> {
    opts.validate()?;
    check_dim(anchor.dim(), p.dim())?;
    check_dim(anchor.dim(), q.dim())?;
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let rho = p.dist(&anchor).max(q.dist(&anchor));
    if !(rho < r) {
        return Err(Error::InvalidParameter(format!(
            "translation endpoints must lie in B(anchor, {r}), farthest is at {rho}"
        )));
    }
    let delta = 0.5 * (rho + r);
    let supp = 0.5 * (delta + r);
    let field = VectorField::translation(anchor, delta * delta, supp * supp, q.sub(&p))?;
    FlowMap::with_max_step(field, 1.0, opts.max_step)
}

/// Plateau radius of a translation flow, if it is one.
pub fn translation_plateau(f: &FlowMap) -> Option<f64> {
    match f.field() {
        VectorField::Translation { profile, .. } => Some(profile.inner().sqrt()),
        _ => None,
    }
}

/// Number of tracked samples used to fit a chart compression's time.
const CHART_SAMPLES: usize = 100;

/// Compression transported through `chart`, timed so that
/// `g(B(0, inner_r))` lands in `target`.
///
/// The time starts at `ln(inner_r / δ)` for a pull-back radius `δ` estimated
/// from `Dg(0)` and doubles until every tracked sample lands in `target`.
pub fn make_chart_compression(
    chart: Arc<dyn SmoothChart>,
    inner_r: f64,
    target: &Ball,
) -> Result<FlowMap> {
    make_chart_compression_with(chart, inner_r, target, &FlowOptions::default())
}

pub fn make_chart_compression_with(
    chart: Arc<dyn SmoothChart>,
    inner_r: f64,
    target: &Ball,
    opts: &FlowOptions,
) -> Result<FlowMap> {
    opts.validate()?;
    let n = chart.dim();
    check_dim(n, target.dim())?;
    if !(inner_r > 0.0 && inner_r < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "innerR must lie in (0, 1), got {inner_r}"
        )));
    }
    let origin = Point::origin(n);
    let base = chart.forward(&origin);
    if base.dist(&target.center) > 1e-9 * (1.0 + base.norm()) {
        return Err(Error::InvalidParameter(
            "target ball must be centered at g(0)".into(),
        ));
    }
    let cutoff_r = 0.5 * (inner_r + 1.0);
    let field = VectorField::chart_compression(chart.clone(), inner_r, cutoff_r)?;

    // Frobenius norm of Dg(0) bounds its operator norm from above.
    let frob = (0..n)
        .map(|k| chart.push_forward(&origin, &Point::axis(n, k)).norm_sq())
        .sum::<f64>()
        .sqrt();
    let pullback = (target.radius / frob).min(0.5 * inner_r);
    let mut time = compression_time(inner_r, pullback, opts.time_margin)?;

    let domain = Ball::new(origin.clone(), inner_r)?;
    let mut tracked: Vec<Point> = vec![origin];
    tracked.extend(sample_ball(&domain, CHART_SAMPLES, 0x5eed_c4a7, false)?.into_points());
    tracked.extend(sample_ball(&domain, CHART_SAMPLES, 0x5eed_5fe1, true)?.into_points());
    let images: Vec<Point> = tracked.iter().map(|z| chart.forward(z)).collect();

    for _ in 0..=MAX_DOUBLINGS {
        let flow = FlowMap::with_max_step(field.clone(), time, opts.max_step)?;
        let moved = images
            .iter()
            .map(|y| flow.apply(y))
            .collect::<Result<Vec<_>>>()?;
        if ball_contains_cloud(target, &PointCloud::new(moved, 0.0)?, 0.0)? {
            return Ok(flow);
        }
        time *= 2.0;
    }
    Err(Error::Convergence(format!(
        "chart compression did not reach the target after {MAX_DOUBLINGS} doublings"
    )))
}
