//! End-to-end relocation of labeled sets into target balls.
//!
//! [`relocate_disjoint`] compresses every set inside its source ball and then
//! transports the compressed sets one by one, treating the remaining source
//! balls and the already-filled targets as obstacles. Configurations that
//! cannot be covered by disjoint source balls go through
//! [`lift_relocate_project`]: lift each class to its own height in one more
//! dimension, relocate there, and project back.

use serde::{Deserialize, Serialize};

use crate::datasets::SampleRng;
use crate::error::{check_dim, Error, Result};
use crate::flow::{make_compression_with, DiffeoPipeline, FlowOptions};
use crate::geometry::{
    ball_contains_cloud, balls_disjoint, count_outside, dist_set_set, Ball, LabeledCloud,
    LabeledDataset, Point, PointCloud,
};
use crate::transport::{make_transport_among, plan_path_among, Path, TransportPlan};

/// Number of far-field probes checked after a relocation.
const FAR_PROBES: usize = 100;
const PROBE_SEED: u64 = 0x5eed_fa12;
/// Extra safety factor on the compressed radius.
const COMPRESSED_FRACTION: f64 = 0.5;
/// Default lift height in units of the bounding radius.
const LIFT_FACTOR: f64 = 5.0;

/// A cloud together with a round ball containing it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourcedCloud {
    pub cloud: PointCloud,
    pub source: Ball,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelocationProblem {
    pub sets: Vec<SourcedCloud>,
    pub targets: Vec<Ball>,
}

impl RelocationProblem {
    pub fn new(sets: Vec<SourcedCloud>, targets: Vec<Ball>) -> Result<Self> {
        let p = RelocationProblem { sets, targets };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.sets[0].source.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .sets
            .first()
            .ok_or_else(|| Error::InvalidParameter("no sets to relocate".into()))?;
        let n = first.source.dim();
        if n < 2 {
            return Err(Error::InvalidParameter(
                "relocation needs dimension at least 2".into(),
            ));
        }
        if self.targets.len() != self.sets.len() {
            return Err(Error::InvalidParameter(format!(
                "{} sets but {} targets",
                self.sets.len(),
                self.targets.len()
            )));
        }
        for (i, s) in self.sets.iter().enumerate() {
            check_dim(n, s.source.dim())?;
            if !s.cloud.is_empty() {
                check_dim(n, s.cloud.dim())?;
            }
            if !ball_contains_cloud(&s.source, &s.cloud, 0.0)? {
                return Err(Error::InvalidParameter(format!(
                    "set {i} is not inside its source ball"
                )));
            }
        }
        for (j, t) in self.targets.iter().enumerate() {
            check_dim(n, t.dim())?;
            if !(self.sets[j].cloud.guard() < t.radius) {
                return Err(Error::InvalidParameter(format!(
                    "target {j} is smaller than the guard of its set"
                )));
            }
            for (i, s) in self.sets.iter().enumerate() {
                if !balls_disjoint(&[s.source.clone(), t.clone()]) {
                    return Err(Error::InvalidParameter(format!(
                        "target {j} meets source ball {i}"
                    )));
                }
            }
        }
        let sources: Vec<Ball> = self.sets.iter().map(|s| s.source.clone()).collect();
        if !balls_disjoint(&sources) {
            return Err(Error::InvalidParameter(
                "source balls are not pairwise disjoint".into(),
            ));
        }
        if !balls_disjoint(&self.targets) {
            return Err(Error::InvalidParameter(
                "target balls are not pairwise disjoint".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct RelocationOptions {
    pub flow: FlowOptions,
    /// Processing order of the sets; defaults to `0, 1, …, m−1`.
    pub order: Option<Vec<usize>>,
    /// Intermediate waypoints per set, replacing the planned path.
    pub waypoints: Vec<Option<Vec<Point>>>,
}

#[derive(Clone, Debug)]
pub struct RelocationReport {
    pub pipeline: DiffeoPipeline,
    pub images: Vec<PointCloud>,
    /// Per set, `min(rᵢ − ‖y − xᵢ‖ − guard)` over the image samples.
    pub slacks: Vec<f64>,
    pub plans: Vec<TransportPlan>,
    /// Largest displacement of a far-field probe (zero when bitwise fixed).
    pub probe_max_displacement: f64,
}

/// Compresses every set toward its source center and transports it into
/// its target, fixing the other sets' source balls and filled targets.
pub fn relocate_disjoint(problem: &RelocationProblem) -> Result<DiffeoPipeline> {
    Ok(relocate_disjoint_with(problem, &RelocationOptions::default())?.pipeline)
}

pub fn relocate_disjoint_with(
    problem: &RelocationProblem,
    opts: &RelocationOptions,
) -> Result<RelocationReport> {
    problem.validate()?;
    opts.flow.validate()?;
    let m = problem.sets.len();
    let order = match &opts.order {
        Some(o) => {
            let mut sorted = o.clone();
            sorted.sort_unstable();
            if sorted != (0..m).collect::<Vec<_>>() {
                return Err(Error::InvalidParameter(format!(
                    "order must be a permutation of 0..{m}"
                )));
            }
            o.clone()
        }
        None => (0..m).collect(),
    };
    if !opts.waypoints.is_empty() && opts.waypoints.len() != m {
        return Err(Error::InvalidParameter(format!(
            "waypoints given for {} of {m} sets",
            opts.waypoints.len()
        )));
    }

    let mut transports = Vec::with_capacity(m);
    let mut compressed = vec![0.0; m];
    for (rank, &i) in order.iter().enumerate() {
        let set = &problem.sets[i];
        let target = &problem.targets[i];
        let obstacles: Vec<PointCloud> = order[rank + 1..]
            .iter()
            .map(|&j| problem.sets[j].source.as_cloud())
            .chain(order[..rank].iter().map(|&j| problem.targets[j].as_cloud()))
            .collect();
        let p = &set.source.center;
        let q = &target.center;
        let path = match opts.waypoints.get(i).and_then(Option::as_ref) {
            Some(via) => {
                let mut w = vec![p.clone()];
                w.extend(via.iter().cloned());
                w.push(q.clone());
                Path::new(w)?
            }
            None => {
                let clearance = 0.5 * endpoint_clearance(p, q, &obstacles)?;
                plan_path_among(p, q, &obstacles, clearance)?
            }
        };
        let delta2 = 0.5 * (target.radius - set.cloud.guard());
        // Keep the chain as local as the balls it connects.
        let max_rho = set.source.radius.max(target.radius);
        let t = make_transport_among(p, q, &path, &obstacles, delta2, max_rho, &opts.flow)?;
        compressed[i] = COMPRESSED_FRACTION * t.delta1.min(0.5 * target.radius);
        transports.push(t);
    }

    let mut pipeline = DiffeoPipeline::new();
    for (i, set) in problem.sets.iter().enumerate() {
        let c = &set.source.center;
        let extent = set.cloud.max_dist_from(c) + set.cloud.guard();
        if extent < compressed[i] {
            continue;
        }
        let plateau = 0.5 * (extent + set.source.radius);
        pipeline.push(make_compression_with(
            c.clone(),
            plateau,
            compressed[i],
            set.source.radius,
            &opts.flow,
        )?)?;
    }
    let mut plans = vec![None; m];
    for (t, &i) in transports.into_iter().zip(&order) {
        pipeline.extend(t.pipeline)?;
        plans[i] = Some(t.plan);
    }
    let plans = plans.into_iter().map(|p| p.expect("every set planned")).collect();

    let mut images = Vec::with_capacity(m);
    let mut slacks = Vec::with_capacity(m);
    for (i, set) in problem.sets.iter().enumerate() {
        let image = pipeline.apply(&set.cloud)?;
        let target = &problem.targets[i];
        let leaked = count_outside(target, &image, 0.0);
        if leaked > 0 {
            return Err(Error::Containment {
                index: i,
                leaked,
                total: image.len(),
            });
        }
        slacks.push(containment_slack(target, &image));
        images.push(image);
    }
    let probe_max_displacement = far_field_displacement(&pipeline)?;
    if probe_max_displacement != 0.0 {
        return Err(Error::FarFieldMoved(probe_max_displacement));
    }
    Ok(RelocationReport {
        pipeline,
        images,
        slacks,
        plans,
        probe_max_displacement,
    })
}

fn endpoint_clearance(p: &Point, q: &Point, obstacles: &[PointCloud]) -> Result<f64> {
    let mut d = f64::INFINITY;
    for end in [p, q] {
        let point = PointCloud::new(vec![end.clone()], 0.0)?;
        for k in obstacles {
            d = d.min(dist_set_set(&point, k)?);
        }
    }
    Ok(if d.is_finite() { d } else { 1.0 })
}

/// `min(r − ‖y − c‖ − guard)` over the samples; `+∞` for an empty cloud.
pub fn containment_slack(target: &Ball, c: &PointCloud) -> f64 {
    c.points()
        .iter()
        .map(|y| target.radius - y.dist(&target.center) - c.guard())
        .fold(f64::INFINITY, f64::min)
}

/// Largest displacement of 100 probes placed at twice the diameter of the
/// pipeline's support region beyond it.
pub fn far_field_displacement(pipeline: &DiffeoPipeline) -> Result<f64> {
    let Some(bound) = pipeline.support_bound() else {
        return Ok(0.0);
    };
    let n = bound.dim();
    let radius = bound.radius + 2.0 * (2.0 * bound.radius);
    let mut rng = SampleRng::new(PROBE_SEED, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..FAR_PROBES {
        let dir = Point::new((0..n).map(|_| rng.normal()).collect())?;
        let x = bound.center.add_scaled(&dir, radius / dir.norm());
        let y = pipeline.apply_point(&x)?;
        if y != x {
            worst = worst.max(y.dist(&x).max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

/// `l` balls of the given radius on the positive first axis, beyond every
/// source ball, spaced `2.5·radius` apart.
pub fn layout_targets(l: usize, sources: &[Ball], radius: f64) -> Result<Vec<Ball>> {
    let n = sources
        .first()
        .map(Ball::dim)
        .ok_or_else(|| Error::InvalidParameter("layout needs at least one source".into()))?;
    if l == 0 || !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need l ≥ 1 and a positive radius, got l = {l}, radius = {radius}"
        )));
    }
    for s in sources {
        check_dim(n, s.dim())?;
    }
    let extent = sources
        .iter()
        .map(|s| s.center.norm() + s.radius)
        .fold(0.0, f64::max);
    let step = 2.5 * radius;
    let mut start = extent + 10.0 * radius;
    loop {
        let balls = (0..l)
            .map(|j| Ball::new(Point::axis(n, 0).scale(start + j as f64 * step), radius))
            .collect::<Result<Vec<_>>>()?;
        let mut all = balls.clone();
        all.extend(sources.iter().cloned());
        if balls_disjoint(&all) {
            return Ok(balls);
        }
        start += radius;
    }
}

/// Per-entry targets: the `k` entries sharing a label get `k` disjoint
/// balls of radius `R/(2k)` along the first-axis diameter of the label's
/// ball `B(c, R)`.
pub fn assign_label_subtargets(
    classes: &LabeledDataset,
    label_balls: &[(i64, Ball)],
) -> Result<Vec<Ball>> {
    let ball_of = |label: i64| {
        label_balls
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, b)| b)
            .ok_or_else(|| Error::InvalidParameter(format!("no target ball for label {label}")))
    };
    let mut out = Vec::with_capacity(classes.classes.len());
    for (idx, entry) in classes.classes.iter().enumerate() {
        let ball = ball_of(entry.label)?;
        let k = classes.classes.iter().filter(|c| c.label == entry.label).count();
        let i = classes.classes[..idx]
            .iter()
            .filter(|c| c.label == entry.label)
            .count();
        let offset = ((2 * i + 1) as f64 / k as f64 - 1.0) * ball.radius;
        let center = ball.center.add_scaled(&Point::axis(ball.dim(), 0), offset);
        out.push(Ball::new(center, ball.radius / (2.0 * k as f64))?);
    }
    Ok(out)
}

/// Lift parameters: bounding radius `r`, height unit `c`, and one height
/// per class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftSpec {
    pub c: f64,
    pub r: f64,
    pub heights: Vec<f64>,
}

impl LiftSpec {
    /// `R` = largest sample norm plus guard, `C = 5R`, heights `0, C, 2C, …`.
    pub fn auto(d: &LabeledDataset) -> Self {
        let r = d
            .classes
            .iter()
            .filter(|c| !c.cloud.is_empty())
            .map(|c| c.cloud.max_dist_from(&Point::origin(c.cloud.dim())) + c.cloud.guard())
            .fold(0.0, f64::max);
        let r = if r > 0.0 { r } else { 1.0 };
        Self::with_height(d.classes.len(), r, LIFT_FACTOR * r)
    }

    pub fn with_height(classes: usize, r: f64, c: f64) -> Self {
        LiftSpec {
            c,
            r,
            heights: (0..classes).map(|k| k as f64 * c).collect(),
        }
    }

    /// Ball enclosing the lifted class at `height`.
    pub fn lifted_ball(&self, n: usize, height: f64) -> Result<Ball> {
        Ball::new(Point::origin(n).lifted(height), 2.0 * self.r)
    }
}

/// Appends the class height as a last coordinate.
pub fn lift_embed(d: &LabeledDataset, spec: &LiftSpec) -> Result<LabeledDataset> {
    let n = d
        .dim()
        .ok_or_else(|| Error::InvalidParameter("nothing to lift".into()))?;
    if spec.heights.len() != d.classes.len() {
        return Err(Error::InvalidParameter(format!(
            "{} heights for {} classes",
            spec.heights.len(),
            d.classes.len()
        )));
    }
    if !(spec.r > 0.0 && spec.c > 4.0 * spec.r) {
        return Err(Error::InvalidParameter(format!(
            "lift height {} must exceed 4R = {}",
            spec.c,
            4.0 * spec.r
        )));
    }
    let mut sorted = spec.heights.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| !(w[1] - w[0] > 4.0 * spec.r)) {
        return Err(Error::InvalidParameter(format!(
            "class heights must be more than 4R = {} apart",
            4.0 * spec.r
        )));
    }
    let o = Point::origin(n);
    for (i, a) in d.classes.iter().enumerate() {
        let extent = a.cloud.max_dist_from(&o) + a.cloud.guard();
        if !a.cloud.is_empty() && extent > spec.r {
            return Err(Error::InvalidParameter(format!(
                "class {i} reaches {extent}, beyond R = {}",
                spec.r
            )));
        }
        for b in &d.classes[i + 1..] {
            if !(dist_set_set(&a.cloud, &b.cloud)? > 0.0) {
                return Err(Error::InvalidParameter(
                    "classes must be pairwise disjoint to lift".into(),
                ));
            }
        }
    }
    let classes = d
        .classes
        .iter()
        .zip(&spec.heights)
        .map(|(c, &h)| {
            let pts = c.cloud.points().iter().map(|p| p.lifted(h)).collect();
            let cloud = if c.cloud.is_empty() {
                PointCloud::empty(n + 1)
            } else {
                PointCloud::new(pts, c.cloud.guard())?
            };
            Ok(LabeledCloud {
                label: c.label,
                cloud,
                source: Some(spec.lifted_ball(n, h)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(classes)
}

/// Keeps the first `n` coordinates.
pub fn project_down(c: &PointCloud, n: usize) -> Result<PointCloud> {
    if n == 0 || c.dim() < n {
        return Err(Error::InvalidParameter(format!(
            "cannot project {}-dimensional points to {n} dimensions",
            c.dim()
        )));
    }
    if c.is_empty() {
        return Ok(PointCloud::empty(n));
    }
    PointCloud::new(
        c.points().iter().map(|p| p.truncated(n)).collect(),
        c.guard(),
    )
}

#[derive(Clone, Debug)]
pub struct LiftedRelocation {
    pub lift: LiftSpec,
    pub lifted_targets: Vec<Ball>,
    pub report: RelocationReport,
    /// Projected images, one per class, with the final targets as sources.
    pub images: LabeledDataset,
}

/// Lifts the classes to separate heights in one more dimension, relocates
/// them there into balls projecting onto `final_targets`, and projects back.
pub fn lift_relocate_project(
    d: &LabeledDataset,
    final_targets: &[Ball],
) -> Result<LiftedRelocation> {
    lift_relocate_project_with(d, final_targets, None, &RelocationOptions::default())
}

pub fn lift_relocate_project_with(
    d: &LabeledDataset,
    final_targets: &[Ball],
    lift_height: Option<f64>,
    opts: &RelocationOptions,
) -> Result<LiftedRelocation> {
    let n = d
        .dim()
        .ok_or_else(|| Error::InvalidParameter("nothing to relocate".into()))?;
    if final_targets.len() != d.classes.len() {
        return Err(Error::InvalidParameter(format!(
            "{} classes but {} targets",
            d.classes.len(),
            final_targets.len()
        )));
    }
    for t in final_targets {
        check_dim(n, t.dim())?;
    }
    let mut lift = LiftSpec::auto(d);
    if let Some(c) = lift_height {
        lift = LiftSpec::with_height(d.classes.len(), lift.r, c);
    }
    let lifted = lift_embed(d, &lift)?;
    let r_max = final_targets.iter().map(|b| b.radius).fold(0.0, f64::max);
    let floor = -(3.0 * lift.r + r_max);
    let lifted_targets = final_targets
        .iter()
        .map(|b| Ball::new(b.center.lifted(floor), b.radius))
        .collect::<Result<Vec<_>>>()?;
    let sets = lifted
        .classes
        .into_iter()
        .map(|c| SourcedCloud {
            source: c.source.expect("lifted classes carry their ball"),
            cloud: c.cloud,
        })
        .collect();
    let problem = RelocationProblem::new(sets, lifted_targets.clone())?;
    let report = relocate_disjoint_with(&problem, opts)?;
    let mut classes = Vec::with_capacity(d.classes.len());
    for (i, (img, c)) in report.images.iter().zip(&d.classes).enumerate() {
        let cloud = project_down(img, n)?;
        let leaked = count_outside(&final_targets[i], &cloud, 0.0);
        if leaked > 0 {
            return Err(Error::Containment {
                index: i,
                leaked,
                total: cloud.len(),
            });
        }
        classes.push(LabeledCloud {
            label: c.label,
            cloud,
            source: Some(final_targets[i].clone()),
        });
    }
    Ok(LiftedRelocation {
        lift,
        lifted_targets,
        report,
        images: LabeledDataset::new(classes)?,
    })
}
