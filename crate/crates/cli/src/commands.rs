use std::path::Path;

use serde_json::{json, Value};
use untangle::datasets::{
    gen_hopf_link, gen_swiss_roll, gen_toy_abc, linking_number, unroll_swiss, SWISS_T0, SWISS_T1,
};
use untangle::flow::FlowOptions;
use untangle::io::{read_dataset_file, write_dataset_file, write_swiss_params};
use untangle::network::{load_network, network_width, Fixture, Network};
use untangle::relocation::{
    containment_slack, layout_targets, lift_relocate_project_with, relocate_disjoint_with,
    LiftSpec, RelocationOptions, RelocationProblem, SourcedCloud,
};
use untangle::separability::{certify_pairwise, SeparationCertificate};
use untangle::{Ball, LabeledCloud, LabeledDataset, Point, PointCloud};

use crate::config::{self, DemoConfig, RelocateConfig, Waypoints};
use crate::svg::{write_panels, Panel};
use crate::{Common, Failure};

/// Radius of the target balls laid out by the demos.
const DEMO_TARGET_RADIUS: f64 = 1.0;

/// Largest allowed roll/unroll parameter error.
const SWISS_TOL: f64 = 1e-9;

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::runtime(e.to_string()))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_csv(path: &Path, d: &LabeledDataset) -> Result<(), Failure> {
    write_dataset_file(path, d).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

/// Figures come last and never change the exit status.
fn write_figure(path: &Path, panels: &[Panel]) {
    if let Err(e) = write_panels(panels, path) {
        eprintln!("warning: figure {} not written: {e:#}", path.display());
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn demo_config(common: &Common) -> Result<DemoConfig, Failure> {
    match &common.config {
        Some(p) => config::read_json(p),
        None => Ok(DemoConfig::default()),
    }
}

fn network_images(net: &Network, d: &LabeledDataset) -> Result<LabeledDataset, Failure> {
    let classes = d
        .classes
        .iter()
        .map(|c| {
            Ok(LabeledCloud {
                label: c.label,
                cloud: net.eval_cloud(&c.cloud)?,
                source: None,
            })
        })
        .collect::<Result<Vec<_>, untangle::Error>>()?;
    Ok(LabeledDataset::new(classes)?)
}

fn margins_line(cert: &SeparationCertificate) -> String {
    cert.pairs
        .iter()
        .map(|p| format!("{}|{} {:.4}", p.label_a, p.label_b, p.margin))
        .collect::<Vec<_>>()
        .join(", ")
}

struct LiftRoute {
    images: LabeledDataset,
    report: Value,
    holds: bool,
}

/// Lifts the classes, relocates them into a row of balls beyond the data
/// and projects back.
fn lift_route(d: &LabeledDataset, lift_height: Option<f64>, flow: FlowOptions) -> Result<LiftRoute, Failure> {
    let n = d.dim().ok_or_else(|| Failure::config("empty dataset"))?;
    let enclosing = Ball::new(Point::origin(n), LiftSpec::auto(d).r)?;
    let targets = layout_targets(d.classes.len(), &[enclosing], DEMO_TARGET_RADIUS)?;
    let opts = RelocationOptions {
        flow,
        ..RelocationOptions::default()
    };
    let lifted = lift_relocate_project_with(d, &targets, lift_height, &opts)?;
    let slacks: Vec<f64> = lifted
        .images
        .classes
        .iter()
        .zip(&targets)
        .map(|(c, t)| containment_slack(t, &c.cloud))
        .collect();
    let contained = slacks.iter().all(|&s| s >= 0.0);
    let cert = certify_pairwise(&lifted.images)?;
    let holds = contained && cert.all_separable;
    let report = json!({
        "liftHeight": lifted.lift.c,
        "boundingRadius": lifted.lift.r,
        "targets": to_value(&targets),
        "containmentSlack": slacks,
        "contained": contained,
        "stages": lifted.report.pipeline.len(),
        "probeMaxDisplacement": lifted.report.probe_max_displacement,
        "certificate": to_value(&cert),
    });
    println!(
        "lift route: C = {:.4}, {} stages, contained = {contained}, separable = {} ({})",
        lifted.lift.c,
        lifted.report.pipeline.len(),
        cert.all_separable,
        margins_line(&cert)
    );
    Ok(LiftRoute {
        images: lifted.images,
        report,
        holds,
    })
}

pub fn demo_toy(count: Option<usize>, seed: Option<u64>, common: &Common) -> Result<bool, Failure> {
    let cfg = demo_config(common)?;
    let count = count.or(cfg.count).unwrap_or(200);
    let seed = seed.or(cfg.seed).unwrap_or(7);
    let flow = config::flow_options(common.step_size.or(cfg.step_size))?;
    let lift_height = common.lift_height.or(cfg.lift_height);
    prepare_out(&common.out)?;

    let data = gen_toy_abc(count, seed)?;
    let raw_cert = certify_pairwise(&data)?;
    let images = network_images(&Fixture::Toy.load(), &data)?;
    let fixture_cert = certify_pairwise(&images)?;
    println!(
        "toy classes: {count} samples per class, seed {seed}; raw separable = {}",
        raw_cert.all_separable
    );
    println!(
        "toy network: separable = {} ({})",
        fixture_cert.all_separable,
        margins_line(&fixture_cert)
    );
    let route = lift_route(&data, lift_height, flow)?;
    let holds = fixture_cert.all_separable && route.holds;

    write_csv(&common.out.join("input.csv"), &data)?;
    write_csv(&common.out.join("network_output.csv"), &images)?;
    write_csv(&common.out.join("lift_output.csv"), &route.images)?;
    let report = json!({
        "command": "demo-toy",
        "count": count,
        "seed": seed,
        "raw": { "certificate": to_value(&raw_cert) },
        "network": { "fixture": "toy", "certificate": to_value(&fixture_cert) },
        "liftRoute": route.report,
        "allAssertionsHold": holds,
    });
    write_json(&common.out.join("certificate.json"), &to_value(&fixture_cert))?;
    write_json(&common.out.join("report.json"), &report)?;
    write_figure(
        &common.out.join("figure.svg"),
        &[
            Panel { title: "input", data: &data },
            Panel { title: "toy network output", data: &images },
            Panel { title: "lift route output", data: &route.images },
        ],
    );
    Ok(holds)
}

pub fn demo_hopf(count: Option<usize>, common: &Common) -> Result<bool, Failure> {
    let cfg = demo_config(common)?;
    let count = count.or(cfg.count).unwrap_or(256);
    let flow = config::flow_options(common.step_size.or(cfg.step_size))?;
    let lift_height = common.lift_height.or(cfg.lift_height);
    prepare_out(&common.out)?;

    let link = gen_hopf_link(count)?;
    let linking = linking_number(link.classes[0].cloud.points(), link.classes[1].cloud.points())?;
    let linked = (linking.abs() - 1.0).abs() < 1e-6;
    let images = network_images(&Fixture::Hopf.load(), &link)?;
    let fixture_cert = certify_pairwise(&images)?;
    println!("hopf link: {count} samples per circle, linking number {linking:.6}");
    println!(
        "hopf network: separable = {} ({})",
        fixture_cert.all_separable,
        margins_line(&fixture_cert)
    );
    let route = lift_route(&link, lift_height, flow)?;
    let holds = linked && fixture_cert.all_separable && route.holds;

    write_csv(&common.out.join("input.csv"), &link)?;
    write_csv(&common.out.join("network_output.csv"), &images)?;
    write_csv(&common.out.join("lift_output.csv"), &route.images)?;
    let report = json!({
        "command": "demo-hopf",
        "count": count,
        "linkingNumber": linking,
        "network": { "fixture": "hopf", "certificate": to_value(&fixture_cert) },
        "liftRoute": route.report,
        "allAssertionsHold": holds,
    });
    write_json(&common.out.join("certificate.json"), &to_value(&fixture_cert))?;
    write_json(&common.out.join("report.json"), &report)?;
    write_figure(
        &common.out.join("figure.svg"),
        &[
            Panel { title: "input", data: &link },
            Panel { title: "hopf network output", data: &images },
            Panel { title: "lift route output", data: &route.images },
        ],
    );
    Ok(holds)
}

pub fn demo_swiss(count: Option<usize>, common: &Common) -> Result<bool, Failure> {
    let cfg = demo_config(common)?;
    let grid = count.or(cfg.count).unwrap_or(40);
    // no flow here, but a bad flag is still rejected
    config::flow_options(common.step_size.or(cfg.step_size))?;
    prepare_out(&common.out)?;

    let roll = gen_swiss_roll(SWISS_T0, SWISS_T1, grid, grid)?;
    let mut worst: f64 = 0.0;
    let mut flat = Vec::with_capacity(roll.params.len());
    for (&(s, t), p) in roll.params.iter().zip(roll.cloud.points()) {
        let (s2, t2) = unroll_swiss(p)?;
        worst = worst.max((s2 - s).abs()).max((t2 - t).abs());
        flat.push(Point::from([s2, t2]));
    }
    let holds = worst <= SWISS_TOL;
    println!(
        "swiss roll: {grid}x{grid} grid on t in [{SWISS_T0:.4}, {SWISS_T1:.4}], max round-trip error {worst:.3e}"
    );

    let rolled = LabeledDataset::new(vec![LabeledCloud {
        label: 0,
        cloud: roll.cloud.clone(),
        source: None,
    }])?;
    let unrolled = LabeledDataset::new(vec![LabeledCloud {
        label: 0,
        cloud: PointCloud::new(flat, 0.0)?,
        source: None,
    }])?;
    write_csv(&common.out.join("swiss_roll.csv"), &rolled)?;
    write_csv(&common.out.join("unrolled.csv"), &unrolled)?;
    let params_path = common.out.join("swiss_params.csv");
    let file = std::fs::File::create(&params_path)
        .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", params_path.display())))?;
    write_swiss_params(file, &roll)?;
    let report = json!({
        "command": "demo-swiss",
        "grid": grid,
        "t0": SWISS_T0,
        "t1": SWISS_T1,
        "maxRoundTripError": worst,
        "tolerance": SWISS_TOL,
        "allAssertionsHold": holds,
    });
    write_json(&common.out.join("report.json"), &report)?;
    write_figure(
        &common.out.join("figure.svg"),
        &[
            Panel { title: "swiss roll", data: &rolled },
            Panel { title: "unrolled (s, t)", data: &unrolled },
        ],
    );
    Ok(holds)
}

fn load_set(base: &Path, s: &config::SetConfig) -> Result<PointCloud, Failure> {
    let path = config::resolve(base, &s.csv);
    let d = read_dataset_file(&path, s.guard)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let dim = d
        .dim()
        .ok_or_else(|| Failure::config(format!("{} has no points", path.display())))?;
    let cloud = match s.label {
        Some(l) => d
            .merged(l)
            .ok_or_else(|| Failure::config(format!("{} has no rows with label {l}", path.display())))?,
        None => PointCloud::union(dim, d.classes.iter().map(|c| &c.cloud))?,
    };
    Ok(cloud)
}

pub fn relocate(waypoints: Option<&Path>, common: &Common) -> Result<bool, Failure> {
    let cfg_path = common
        .config
        .as_deref()
        .ok_or_else(|| Failure::config("relocate needs --config FILE"))?;
    let cfg: RelocateConfig = config::read_json(cfg_path)?;
    if cfg.sets.is_empty() {
        return Err(Failure::config("config lists no sets"));
    }
    if cfg.sets.len() != cfg.targets.len() {
        return Err(Failure::config(format!(
            "{} sets but {} targets",
            cfg.sets.len(),
            cfg.targets.len()
        )));
    }
    let flow = config::flow_options(common.step_size.or(cfg.options.step_size))?;
    let lift_height = common.lift_height.or(cfg.options.lift_height);
    let via: Waypoints = match waypoints {
        Some(p) => config::read_json(p)?,
        None => Vec::new(),
    };
    let clouds = cfg
        .sets
        .iter()
        .map(|s| load_set(cfg_path, s))
        .collect::<Result<Vec<_>, _>>()?;
    let labels: Vec<i64> = cfg
        .sets
        .iter()
        .enumerate()
        .map(|(i, s)| s.label.unwrap_or(i as i64))
        .collect();
    prepare_out(&common.out)?;
    let opts = RelocationOptions {
        flow,
        order: cfg.options.order.clone(),
        waypoints: via,
    };

    let run = if cfg.options.lift {
        let input = LabeledDataset::new(
            clouds
                .iter()
                .zip(&labels)
                .map(|(c, &label)| LabeledCloud {
                    label,
                    cloud: c.clone(),
                    source: None,
                })
                .collect(),
        )?;
        lift_relocate_project_with(&input, &cfg.targets, lift_height, &opts)
            .map(|l| (l.images.classes.into_iter().map(|c| c.cloud).collect::<Vec<_>>(), l.report))
    } else {
        let sets = clouds
            .iter()
            .zip(&cfg.sets)
            .enumerate()
            .map(|(i, (c, s))| {
                let source = s
                    .source
                    .clone()
                    .ok_or_else(|| Failure::config(format!("set {i} needs a source ball")))?;
                Ok(SourcedCloud {
                    cloud: c.clone(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        let problem = RelocationProblem::new(sets, cfg.targets.clone())?;
        relocate_disjoint_with(&problem, &opts).map(|r| (r.images.clone(), r))
    };
    let (images, rep) = match run {
        Ok(v) => v,
        Err(e) => {
            let failure = Failure::from(e);
            if let Failure::Runtime(msg) = &failure {
                write_json(
                    &common.out.join("report.json"),
                    &json!({ "command": "relocate", "error": msg, "allAssertionsHold": false }),
                )?;
            }
            return Err(failure);
        }
    };

    let containment: Vec<Value> = images
        .iter()
        .zip(&cfg.targets)
        .enumerate()
        .map(|(i, (img, t))| {
            let slack = containment_slack(t, img);
            json!({ "set": i, "label": labels[i], "slack": slack, "contained": slack >= 0.0 })
        })
        .collect();
    let contained = containment.iter().all(|c| c["contained"] == json!(true));
    let far_fixed = rep.probe_max_displacement == 0.0;
    let out_data = LabeledDataset::new(
        images
            .iter()
            .zip(&labels)
            .map(|(c, &label)| LabeledCloud {
                label,
                cloud: c.clone(),
                source: None,
            })
            .collect(),
    )?;
    let margins = if out_data.labels().len() >= 2 {
        Some(certify_pairwise(&out_data)?)
    } else {
        None
    };
    let holds = contained && far_fixed;
    println!(
        "relocate: {} sets, {} stages, contained = {contained}, far field fixed = {far_fixed}",
        images.len(),
        rep.pipeline.len()
    );

    write_csv(&common.out.join("images.csv"), &out_data)?;
    let pipeline_json = rep.pipeline.to_json()?;
    std::fs::write(common.out.join("pipeline.json"), pipeline_json)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    let report = json!({
        "command": "relocate",
        "lift": cfg.options.lift,
        "stages": rep.pipeline.len(),
        "containment": containment,
        "margins": margins.as_ref().map(to_value),
        "probeMaxDisplacement": rep.probe_max_displacement,
        "allAssertionsHold": holds,
    });
    write_json(&common.out.join("report.json"), &report)?;
    let input = LabeledDataset::new(
        clouds
            .into_iter()
            .zip(&labels)
            .map(|(cloud, &label)| LabeledCloud {
                label,
                cloud,
                source: None,
            })
            .collect(),
    )?;
    write_figure(
        &common.out.join("figure.svg"),
        &[
            Panel { title: "input", data: &input },
            Panel { title: "relocated", data: &out_data },
        ],
    );
    Ok(holds)
}

pub fn certify(input: &Path, guard: f64, out: &Path) -> Result<bool, Failure> {
    let data = read_dataset_file(input, guard)
        .map_err(|e| Failure::config(format!("{}: {e}", input.display())))?;
    if data.labels().len() < 2 {
        return Err(Failure::config(format!(
            "{} needs at least two labels to certify",
            input.display()
        )));
    }
    prepare_out(out)?;
    let cert = certify_pairwise(&data)?;
    println!(
        "certify: {} points, {} labels, separable = {} ({})",
        data.total_points(),
        data.labels().len(),
        cert.all_separable,
        margins_line(&cert)
    );
    write_json(&out.join("certificate.json"), &to_value(&cert))?;
    Ok(cert.all_separable)
}

pub fn eval_net(
    weights: Option<&Path>,
    fixture: Option<&str>,
    input: &Path,
    out: &Path,
) -> Result<bool, Failure> {
    let net = match (weights, fixture) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", p.display())))?;
            load_network(&text).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?
        }
        (None, Some(name)) => Fixture::from_name(name)
            .ok_or_else(|| Failure::config(format!("unknown fixture `{name}` (use toy or hopf)")))?
            .load(),
        (None, None) => return Err(Failure::config("pass --weights FILE or --fixture NAME")),
    };
    let data = read_dataset_file(input, 0.0)
        .map_err(|e| Failure::config(format!("{}: {e}", input.display())))?;
    prepare_out(out)?;
    let images = network_images(&net, &data)?;
    let cert = if images.labels().len() >= 2 {
        Some(certify_pairwise(&images)?)
    } else {
        None
    };
    let holds = cert.as_ref().is_none_or(|c| c.all_separable);
    println!(
        "eval-net: shapes {:?}, {} points{}",
        net.shapes(),
        data.total_points(),
        cert.as_ref()
            .map(|c| format!(", separable = {} ({})", c.all_separable, margins_line(c)))
            .unwrap_or_default()
    );
    write_csv(&out.join("output.csv"), &images)?;
    let report = json!({
        "command": "eval-net",
        "shapes": net.shapes(),
        "width": network_width(&net).ok(),
        "certificate": cert.as_ref().map(to_value),
        "allAssertionsHold": holds,
    });
    write_json(&out.join("report.json"), &report)?;
    Ok(holds)
}
