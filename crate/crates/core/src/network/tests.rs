use proptest::prelude::*;

use super::*;
use crate::datasets::SampleRng;

/// Outputs on pinned inputs, computed independently with plain float64
/// arithmetic in the same left-to-right order.
const TOY_SNAPSHOT: [([f64; 2], [f64; 2]); 16] = [
    ([-1.0, 1.0], [3.2105311137001142, 11.380787202796316]),
    ([0.0, 0.0], [2.0, -0.11799999999999979]),
    ([1.0, 0.0], [2.8094537426995494, -0.21665566259747795]),
    ([0.0, 1.0], [3.4021220364148053, -0.28860436020365954]),
    ([-1.0, -1.0], [2.6177034486889452, 11.452919999994817]),
    ([2.0, -1.0], [2.2167854489842935, -0.14470696499129632]),
    ([0.5, 0.5], [3.1057878895571776, -0.2526300114005679]),
    ([-2.0, 0.0], [3.235687321785174, 13.024805879117595]),
    ([3.0, 3.0], [8.634727337343064, 19.07221993159659]),
    ([-0.25, 0.75], [3.0036937966324313, 10.17064462059725]),
    ([1.5, -2.5], [1.9996782081293034, -0.11820790764439815]),
    ([4.0, 0.0], [5.237814970798198, 19.48537734961009]),
    ([0.0, -4.0], [1.9994391511854341, -0.11793175825591751]),
    ([-3.0, 2.0], [4.2294713046855374, 24.54996596859261]),
    ([0.1, -0.1], [1.999987894688863, -0.11801499787202674]),
    ([2.5, 2.0], [6.827878429578484, 19.292152123098987]),
];

const HOPF_SNAPSHOT: [([f64; 3], [f64; 2]); 16] = [
    ([1.0, 0.0, 0.0], [-1.9932101609753166, 0.003712998478309748]),
    ([-3.0, 0.0, 0.0], [-5.987076084777774, -0.002575260820707137]),
    ([-1.0, 2.0, 0.0], [-3.9994173017643297, 1.9987954417305733]),
    ([-1.0, -2.0, 0.0], [-4.005753065979512, -2.0042397218697996]),
    ([3.0, 0.0, 0.0], [6.005119511361789, 0.0016727959079759769]),
    ([1.0, 0.0, 2.0], [4.003459932401679, 1.9932697569953457]),
    ([1.0, 0.0, -2.0], [3.9954001607366014, -1.9878985469149915]),
    ([-1.0, 0.0, 0.0], [1.9969607505270912, -0.005080213443114268]),
    ([0.0, 0.0, 0.0], [2.562675705162673, -0.120327558058134]),
    ([0.5, -0.5, 1.0], [-0.8425049531076572, 0.09208595032540046]),
    ([2.0, 1.0, -1.0], [2.5654132829798573, 0.1660289194224812]),
    ([-2.0, -1.0, 1.0], [3.492231847435469, 0.19671119076672705]),
    ([1.5, 0.3, -0.7], [0.5770926045165963, -0.2911860523223647]),
    ([-0.4, 1.2, 0.9], [-3.1452626529422996, 1.9560744112853317]),
    ([0.0, 3.0, 0.0], [-8.451661092123402, 0.7315649427723075]),
    ([0.0, 0.0, 3.0], [3.6069879345486986, 2.279901273041307]),
];

#[test]
fn activation_values() {
    let leaky = ActivationKind::LeakyRelu { alpha: 0.0001 };
    assert_eq!(activation_eval(leaky, -1.0), -0.0001);
    assert_eq!(activation_eval(leaky, 2.5), 2.5);
    assert_eq!(activation_eval(ActivationKind::Elu { alpha: 1.0 }, 0.0), 0.0);
    assert!((activation_eval(ActivationKind::Elu { alpha: 2.0 }, -1.0) - 2.0 * ((-1f64).exp() - 1.0)).abs() < 1e-15);
    let selu = ActivationKind::Selu { lambda: 2.0, alpha: 1.0 };
    assert_eq!(activation_eval(selu, 3.0), 6.0);
    assert!((activation_eval(selu, -1.0) - 2.0 * ((-1f64).exp() - 1.0)).abs() < 1e-15);
    assert_eq!(activation_eval(ActivationKind::Relu, -3.0), 0.0);
}

#[test]
fn activation_parameter_ranges() {
    for bad in [
        ActivationKind::LeakyRelu { alpha: 0.0 },
        ActivationKind::LeakyRelu { alpha: 1.0 },
        ActivationKind::Elu { alpha: -1.0 },
        ActivationKind::Selu { lambda: 0.0, alpha: 1.0 },
        ActivationKind::Selu { lambda: 1.0, alpha: 0.0 },
    ] {
        assert!(bad.validate().is_err(), "{bad:?}");
    }
}

#[test]
fn toy_first_layer() {
    let net = Fixture::Toy.load();
    let y = net.layers()[0].apply(&[-1.0, 1.0]);
    let expect = [
        -(6f64.sqrt()) / 6.0 + 2f64.sqrt() / 2.0,
        -(6f64.sqrt()) / 6.0 + 2f64.sqrt() / 2.0,
        6f64.sqrt() / 3.0,
    ];
    for (a, b) in y.iter().zip(expect) {
        assert!((a - b).abs() < 1e-15);
    }
    for (a, b) in y.iter().zip([0.29886, 0.29886, 0.81650]) {
        assert!((a - b).abs() < 1e-5);
    }
}

#[test]
fn toy_fixture_matches_printed_weights() {
    let net = Fixture::Toy.load();
    assert_eq!(net.shapes(), vec![2, 3, 3, 3, 3, 3, 2]);
    assert_eq!(net.activation(), ActivationKind::LeakyRelu { alpha: 0.0001 });
    let w6 = &net.layers()[5];
    assert_eq!(w6.row(1), &[0.0, 10000.0, 0.0]);
    assert_eq!(w6.bias(), &[0.0, 0.0]);
    let w2 = &net.layers()[1];
    assert_eq!(w2.row(2), &[86.09, 112.2, 75.68]);
    assert_eq!(w2.bias(), &[2.0, 5.0, -190.0]);
    assert_eq!(net.layers()[3].bias(), &[0.0, -4.9, 0.0]);
    assert_eq!(net.layers()[4].bias(), &[0.0, 0.001, 0.0]);
    assert_eq!(network_width(&net).unwrap(), 3);
}

#[test]
fn hopf_fixture_matches_printed_weights() {
    let net = Fixture::Hopf.load();
    assert_eq!(net.shapes(), vec![3, 4, 4, 4, 4, 2]);
    assert_eq!(net.activation(), ActivationKind::Elu { alpha: 1.0 });
    assert_eq!(net.layers()[4].bias(), &[-2.3310, -0.5897]);
    assert_eq!(net.layers()[0].row(3), &[0.3674, 0.4314, -0.3063]);
    assert_eq!(net.layers()[3].weight(3, 1), 2.9938);
    assert_eq!(network_width(&net).unwrap(), 4);
}

#[test]
fn fixture_snapshots() {
    let toy = Fixture::Toy.load();
    for (x, y) in TOY_SNAPSHOT {
        let out = toy.eval(&x).unwrap();
        for (a, b) in out.iter().zip(y) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "toy {x:?}: {a} vs {b}");
        }
    }
    let hopf = Fixture::Hopf.load();
    for (x, y) in HOPF_SNAPSHOT {
        let out = hopf.eval(&x).unwrap();
        for (a, b) in out.iter().zip(y) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "hopf {x:?}: {a} vs {b}");
        }
    }
}

#[test]
fn identity_layer() {
    let net = Network::new(vec![AffineLayer::identity(3)], ActivationKind::Relu).unwrap();
    assert_eq!(net.eval(&[1.0, -2.0, 3.5]).unwrap(), vec![1.0, -2.0, 3.5]);
    assert!(network_width(&net).is_err());
}

#[test]
fn width_is_largest_hidden_layer() {
    let layer = |r, c| AffineLayer::new(r, c, vec![0.5; r * c], vec![0.0; r]).unwrap();
    let net = Network::new(vec![layer(7, 2), layer(5, 7), layer(2, 5)], ActivationKind::Relu).unwrap();
    assert_eq!(network_width(&net).unwrap(), 7);
}

#[test]
fn no_activation_after_last_layer() {
    let neg = AffineLayer::new(1, 1, vec![-1.0], vec![0.0]).unwrap();
    let net = Network::new(vec![AffineLayer::identity(1), neg], ActivationKind::Relu).unwrap();
    assert_eq!(net.eval(&[2.0]).unwrap(), vec![-2.0]);
}

#[test]
fn shape_errors() {
    let doc = r#"{"activation":{"kind":"relu"},"layers":[
        {"rows":2,"cols":2,"weights":[1,0,0,1],"bias":[0,0]},
        {"rows":2,"cols":3,"weights":[1,0,0,0,1,0],"bias":[0,0]}]}"#;
    assert!(matches!(load_network(doc), Err(Error::Shape(_))));
    let short = r#"{"activation":{"kind":"relu"},"layers":[{"rows":2,"cols":2,"weights":[1,0,0],"bias":[0,0]}]}"#;
    assert!(matches!(load_network(short), Err(Error::Shape(_))));
    let unknown = r#"{"activation":{"kind":"tanh"},"layers":[{"rows":1,"cols":1,"weights":[1],"bias":[0]}]}"#;
    assert!(matches!(load_network(unknown), Err(Error::Document(_))));
    let garbage = r#"{"activation":{"kind":"relu"},"layers":[{"rows":1,"cols":1,"weights":["sqrt(2"],"bias":[0]}]}"#;
    assert!(matches!(load_network(garbage), Err(Error::Document(_))));
    assert!(load_network("not json").is_err());
    let net = Fixture::Toy.load();
    assert!(matches!(net.eval(&[1.0, 2.0, 3.0]), Err(Error::Shape(_))));
}

#[test]
fn decimal_strings_parse_exactly() {
    let doc = r#"{"activation":{"kind":"elu","params":{"alpha":1}},"layers":[{"rows":1,"cols":2,"weights":["0.8609","1/3"],"bias":["-2.3310"]}]}"#;
    let net = load_network(doc).unwrap();
    assert_eq!(net.layers()[0].row(0), &[0.8609, 1.0 / 3.0]);
    assert_eq!(net.layers()[0].bias(), &[-2.3310]);
}

#[test]
fn document_roundtrip() {
    for f in [Fixture::Toy, Fixture::Hopf] {
        let net = f.load();
        let json = serde_json::to_string(&net.to_document()).unwrap();
        assert_eq!(load_network(&json).unwrap(), net);
    }
}

#[test]
fn sup_error_cases() {
    let net = Network::new(vec![AffineLayer::identity(2)], ActivationKind::Relu).unwrap();
    let mut rng = SampleRng::new(4, 0);
    let pts = (0..50)
        .map(|_| Point::from([rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)]))
        .collect();
    let samples = PointCloud::new(pts, 0.0).unwrap();
    assert_eq!(sup_error(&net, |x| Ok(x.clone()), &samples).unwrap(), 0.0);
    let shifted = sup_error(&net, |x| Ok(x.add(&Point::from([0.1, 0.0]))), &samples).unwrap();
    assert!((shifted - 0.1).abs() < 1e-12);
    assert!(sup_error(&net, |_| Ok(Point::origin(3)), &samples).is_err());
}

#[test]
fn fixture_names() {
    assert_eq!(Fixture::from_name("toy"), Some(Fixture::Toy));
    assert_eq!(Fixture::from_name("hopf"), Some(Fixture::Hopf));
    assert_eq!(Fixture::from_name("other"), None);
}

/// Central-difference Jacobian of the network at `x`.
fn jacobian(net: &Network, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let m = net.output_dim();
    let mut j = vec![vec![0.0; n]; m];
    for c in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[c] += h;
        xm[c] -= h;
        let (yp, ym) = (net.eval(&xp).unwrap(), net.eval(&xm).unwrap());
        for r in 0..m {
            j[r][c] = (yp[r] - ym[r]) / (2.0 * h);
        }
    }
    j
}

/// Smallest nonzero |pre-activation| over hidden units at `x`. Exact zeros
/// come from units fed only by constant-zero inputs.
fn kink_distance(net: &Network, x: &[f64]) -> f64 {
    let mut y = x.to_vec();
    let mut best = f64::INFINITY;
    let last = net.layers().len() - 1;
    for (i, l) in net.layers().iter().enumerate() {
        y = l.apply(&y);
        if i < last {
            for v in y.iter().filter(|v| **v != 0.0) {
                best = best.min(v.abs());
            }
            y = y.iter().map(|&v| net.activation().eval(v)).collect();
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn leaky_network_is_locally_affine(x0 in -4.0..4.0f64, x1 in -4.0..4.0f64, d0 in -1.0..1.0f64, d1 in -1.0..1.0f64) {
        let net = Fixture::Toy.load();
        let x = [x0, x1];
        // Stay well inside one linear region.
        prop_assume!(kink_distance(&net, &x) > 1e-3);
        let step = 1e-7;
        let j = jacobian(&net, &x, 1e-8);
        let y = net.eval(&x).unwrap();
        let yp = net.eval(&[x0 + step * d0, x1 + step * d1]).unwrap();
        for r in 0..2 {
            let lin = y[r] + step * (j[r][0] * d0 + j[r][1] * d1);
            prop_assert!((yp[r] - lin).abs() <= 1e-6 * (1.0 + y[r].abs()));
        }
    }

    #[test]
    fn leaky_activation_is_positively_homogeneous(x in -100.0..100.0f64, s in 0.0..50.0f64) {
        let k = ActivationKind::LeakyRelu { alpha: 0.0001 };
        prop_assert!((activation_eval(k, s * x) - s * activation_eval(k, x)).abs() <= 1e-12 * (1.0 + (s * x).abs()));
    }
}
