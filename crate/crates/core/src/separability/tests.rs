use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use super::*;
use crate::datasets::{gen_toy_abc, sample_ball, SampleRng};
use crate::geometry::{Ball, LabeledCloud};
use crate::relocation::layout_targets;

fn cloud(v: &[&[f64]]) -> PointCloud {
    PointCloud::new(v.iter().map(|c| Point::new(c.to_vec()).unwrap()).collect(), 0.0).unwrap()
}

fn dataset(parts: Vec<(i64, PointCloud)>) -> LabeledDataset {
    LabeledDataset::new(
        parts
            .into_iter()
            .map(|(label, cloud)| LabeledCloud {
                label,
                cloud,
                source: None,
            })
            .collect(),
    )
    .unwrap()
}

/// Independent hull-intersection test: a basic solution of
/// `Σ λ a − Σ μ b = 0, Σ λ = Σ μ = 1` has at most `d + 2` nonzeros, so the
/// hulls meet iff some small support solves the system with nonnegative
/// weights.
fn hulls_meet_brute_force(a: &[Point], b: &[Point]) -> bool {
    let d = a[0].dim();
    let cols: Vec<(bool, &Point)> = a
        .iter()
        .map(|p| (true, p))
        .chain(b.iter().map(|p| (false, p)))
        .collect();
    let n = cols.len();
    let max_k = (d + 2).min(n);
    let mut found = false;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if idx.len() > max_k
            || !idx.iter().any(|&i| cols[i].0)
            || !idx.iter().any(|&i| !cols[i].0)
        {
            continue;
        }
        let mut m = DMatrix::zeros(d + 2, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            let (is_a, p) = cols[i];
            let s = if is_a { 1.0 } else { -1.0 };
            for r in 0..d {
                m[(r, c)] = s * p.coords()[r];
            }
            m[(if is_a { d } else { d + 1 }, c)] = 1.0;
        }
        let mut rhs = DVector::zeros(d + 2);
        rhs[d] = 1.0;
        rhs[d + 1] = 1.0;
        let Ok(sol) = m.clone().svd(true, true).solve(&rhs, 1e-12) else {
            continue;
        };
        let resid = (&m * &sol - &rhs).norm();
        if resid < 1e-9 && sol.iter().all(|&x| x >= -1e-12) {
            found = true;
            break;
        }
    }
    found
}

#[test]
fn symmetric_pair() {
    let (h, m) = separate_pair(&cloud(&[&[0.0, 0.0]]), &cloud(&[&[2.0, 0.0]]))
        .unwrap()
        .unwrap();
    // A sits on the positive side, so the normal points from B to A.
    assert_eq!(h.normal, Point::from([-1.0, 0.0]));
    assert!((h.offset + 1.0).abs() < 1e-15);
    assert!((m - 1.0).abs() < 1e-15);
    // The same plane oriented from A to B: normal (1, 0), offset 1.
    let (h, _) = separate_pair(&cloud(&[&[2.0, 0.0]]), &cloud(&[&[0.0, 0.0]]))
        .unwrap()
        .unwrap();
    assert_eq!(h.normal, Point::from([1.0, 0.0]));
    assert!((h.offset - 1.0).abs() < 1e-15);
}

#[test]
fn xor_is_not_separable() {
    let a = cloud(&[&[0.0, 0.0], &[1.0, 1.0]]);
    let b = cloud(&[&[1.0, 0.0], &[0.0, 1.0]]);
    assert!(separate_pair(&a, &b).unwrap().is_none());
    let cert = certify_pairwise(&dataset(vec![(0, a), (1, b)])).unwrap();
    let w = cert.pairs[0].witness.clone().unwrap();
    assert!(w.dist(&Point::from([0.5, 0.5])) < 1e-9);
    assert!(!cert.all_separable);
}

#[test]
fn layout_ball_samples_margin() {
    let targets = layout_targets(2, &[Ball::new(Point::origin(2), 1.0).unwrap()], 1.0).unwrap();
    let a = sample_ball(&targets[0], 300, 1, false).unwrap();
    let b = sample_ball(&targets[1], 300, 2, false).unwrap();
    let (_, m) = separate_pair(&a, &b).unwrap().unwrap();
    assert!(m >= 0.25 - 1e-9);
    // Upper bound: the balls themselves are 0.5 apart.
    assert!(m <= 1.0);
}

#[test]
fn collinear_layout_certified() {
    let targets = layout_targets(3, &[Ball::new(Point::origin(2), 2.0).unwrap()], 1.0).unwrap();
    let d = dataset(
        targets
            .iter()
            .enumerate()
            .map(|(i, t)| (i as i64, sample_ball(t, 200, 10 + i as u64, false).unwrap()))
            .collect(),
    );
    let cert = certify_pairwise(&d).unwrap();
    assert_eq!(cert.pairs.len(), 3);
    assert!(cert.all_separable);
    assert!(cert.verify(&d).unwrap());
}

#[test]
fn raw_rings_fail() {
    let d = gen_toy_abc(400, 1).unwrap();
    let cert = certify_pairwise(&d).unwrap();
    assert!(!cert.all_separable);
    let ac = cert
        .pairs
        .iter()
        .find(|p| p.label_a == 0 && p.label_b == 2)
        .unwrap();
    assert!(!ac.separable());
    assert!(ac.witness.is_some());
    // A and B are side by side and do separate.
    let ab = cert.pairs.iter().find(|p| p.label_a == 0 && p.label_b == 1).unwrap();
    assert!(ab.separable());
}

#[test]
fn identical_clouds_fail() {
    let c = cloud(&[&[0.0, 0.0], &[1.0, 2.0], &[3.0, 1.0]]);
    let cert = certify_pairwise(&dataset(vec![(0, c.clone()), (1, c)])).unwrap();
    assert!(!cert.all_separable);
}

#[test]
fn single_label_rejected() {
    let c = cloud(&[&[0.0, 0.0]]);
    assert!(certify_pairwise(&dataset(vec![(3, c.clone()), (3, c)])).is_err());
}

#[test]
fn labels_are_merged() {
    let d = dataset(vec![
        (0, cloud(&[&[0.0, 0.0]])),
        (1, cloud(&[&[5.0, 0.0]])),
        (0, cloud(&[&[0.0, 3.0]])),
    ]);
    let cert = certify_pairwise(&d).unwrap();
    assert_eq!(cert.pairs.len(), 1);
    assert!(cert.all_separable);
}

#[test]
fn margin_of_cases() {
    let a = cloud(&[&[3.0, 0.0], &[4.0, 1.0]]);
    let b = cloud(&[&[0.0, 0.0], &[-1.0, 2.0]]);
    let (h, m) = separate_pair(&a, &b).unwrap().unwrap();
    assert!((margin_of(&h, &a, &b).unwrap() - m).abs() < 1e-9);

    let through = Hyperplane::new(Point::from([0.0, 1.0]), 0.5).unwrap();
    assert!(margin_of(&through, &a, &b).unwrap() < 0.0);

    // Both clouds on one side of the plane: not a separator.
    let aside = Hyperplane::new(Point::from([1.0, 0.0]), -10.0).unwrap();
    assert!(margin_of(&aside, &a, &b).unwrap() < 0.0);

    let scaled = |c: &PointCloud| {
        PointCloud::new(c.points().iter().map(|p| p.scale(2.0)).collect(), 0.0).unwrap()
    };
    let h2 = Hyperplane::new(h.normal.clone(), 2.0 * h.offset).unwrap();
    let m2 = margin_of(&h2, &scaled(&a), &scaled(&b)).unwrap();
    assert!((m2 - 2.0 * margin_of(&h, &a, &b).unwrap()).abs() < 1e-12);

    // Unnormalized normals give the same value.
    let h3 = Hyperplane::new(h.normal.scale(7.0), 7.0 * h.offset).unwrap();
    assert!((margin_of(&h3, &a, &b).unwrap() - m).abs() < 1e-12);
}

#[test]
fn guards_shrink_margin() {
    let mut a = cloud(&[&[0.0, 0.0]]);
    let mut b = cloud(&[&[4.0, 0.0]]);
    a.set_guard(0.5);
    b.set_guard(1.5);
    let (h, m) = separate_pair(&a, &b).unwrap().unwrap();
    assert!((m - 1.0).abs() < 1e-12);
    // The plane sits in the middle of the free gap [0.5, 2.5].
    assert!((h.normal.coords()[0] * -1.0 - 1.0).abs() < 1e-15);
    assert!((-h.offset - 1.5).abs() < 1e-12);
    b.set_guard(3.5);
    assert!(separate_pair(&a, &b).unwrap().is_none());
}

#[test]
fn certificate_json_roundtrip() {
    let targets = layout_targets(2, &[Ball::new(Point::origin(2), 1.0).unwrap()], 1.0).unwrap();
    let d = dataset(vec![
        (0, sample_ball(&targets[0], 30, 1, false).unwrap()),
        (1, sample_ball(&targets[1], 30, 2, false).unwrap()),
    ]);
    let cert = certify_pairwise(&d).unwrap();
    let s = serde_json::to_string(&cert).unwrap();
    let back: SeparationCertificate = serde_json::from_str(&s).unwrap();
    assert_eq!(back, cert);
}

#[test]
fn dimension_mismatch() {
    let a = cloud(&[&[0.0, 0.0]]);
    let b = cloud(&[&[0.0, 0.0, 1.0]]);
    assert!(matches!(
        separate_pair(&a, &b),
        Err(Error::DimensionMismatch { .. })
    ));
}

fn random_cloud(rng: &mut SampleRng, n: usize, d: usize, shift: f64) -> PointCloud {
    PointCloud::new(
        (0..n)
            .map(|_| {
                let mut v: Vec<f64> = (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect();
                v[0] += shift;
                Point::new(v).unwrap()
            })
            .collect(),
        0.0,
    )
    .unwrap()
}

#[test]
fn agrees_with_brute_force_on_small_instances() {
    let mut rng = SampleRng::new(2024, 0);
    let mut seen = [0usize; 2];
    for trial in 0..320 {
        let d = 1 + trial % 4;
        let na = 1 + (trial / 4) % 4;
        let nb = 1 + (trial / 16) % 4;
        let shift = rng.uniform(0.0, 2.5);
        let a = random_cloud(&mut rng, na, d, shift);
        let b = random_cloud(&mut rng, nb, d, 0.0);
        let meet = hulls_meet_brute_force(a.points(), b.points());
        let sep = separate_pair(&a, &b).unwrap();
        seen[meet as usize] += 1;
        if meet {
            assert!(sep.is_none(), "trial {trial}: separated intersecting hulls");
        } else if let Some((h, m)) = &sep {
            assert!((margin_of(h, &a, &b).unwrap() - m).abs() < 1e-12);
        } else {
            // Only near-touching hulls may be reported as inseparable.
            let near = minnorm::nearest_pair(a.points(), b.points());
            let dist: f64 = near.gap().iter().map(|g| g * g).sum::<f64>().sqrt();
            assert!(dist <= 2.0 * MARGIN_TOL, "trial {trial}: missed separation");
        }
    }
    assert!(seen[0] > 40 && seen[1] > 40, "unbalanced instances {seen:?}");
}

#[test]
fn margin_matches_nearest_pair_bound() {
    // Verified margin (lower bound) against half the nearest-pair distance
    // (upper bound on the optimum): the duality gap must close.
    let mut rng = SampleRng::new(77, 0);
    for _ in 0..100 {
        let a = random_cloud(&mut rng, 40, 3, 3.0);
        let b = random_cloud(&mut rng, 40, 3, 0.0);
        let (_, m) = separate_pair(&a, &b).unwrap().unwrap();
        let near = minnorm::nearest_pair(a.points(), b.points());
        let half: f64 = 0.5 * near.gap().iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(m <= half + 1e-12 && half - m < 1e-9);
    }
}

#[test]
fn witness_lies_in_both_hulls() {
    let mut rng = SampleRng::new(5, 0);
    let mut found = 0;
    for _ in 0..50 {
        let a = random_cloud(&mut rng, 8, 2, 0.3);
        let b = random_cloud(&mut rng, 8, 2, 0.0);
        let pair = simplex::hull_intersection_pair(a.points(), b.points());
        assert_eq!(pair.is_some(), hulls_meet_brute_force(a.points(), b.points()));
        if let Some((xa, xb)) = pair {
            found += 1;
            let d: f64 = xa.iter().zip(&xb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            assert!(d < 1e-9, "hull points {d} apart");
        }
    }
    assert!(found > 10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rigid_motion_invariance(angle in 0.0..std::f64::consts::TAU, tx in -5.0..5.0f64, ty in -5.0..5.0f64, seed in 0u64..1000) {
        let mut rng = SampleRng::new(seed, 0);
        let a = random_cloud(&mut rng, 25, 2, 3.0);
        let b = random_cloud(&mut rng, 25, 2, 0.0);
        let (c, s) = (angle.cos(), angle.sin());
        let mv = |cl: &PointCloud| PointCloud::new(
            cl.points().iter().map(|p| {
                let (x, y) = (p.coords()[0], p.coords()[1]);
                Point::from([c * x - s * y + tx, s * x + c * y + ty])
            }).collect(), 0.0).unwrap();
        let (_, m0) = separate_pair(&a, &b).unwrap().unwrap();
        let (_, m1) = separate_pair(&mv(&a), &mv(&b)).unwrap().unwrap();
        prop_assert!((m0 - m1).abs() < 1e-9);
    }

    #[test]
    fn certificates_are_sound(seed in 0u64..10_000, shift in 0.0..3.0f64) {
        let mut rng = SampleRng::new(seed, 1);
        let a = random_cloud(&mut rng, 30, 3, shift);
        let b = random_cloud(&mut rng, 30, 3, 0.0);
        if let Some((h, m)) = separate_pair(&a, &b).unwrap() {
            let h = h.normalized();
            prop_assert!((h.normal.norm() - 1.0).abs() < 1e-12);
            for x in a.points() { prop_assert!(h.eval(x) >= m - 1e-12); }
            for x in b.points() { prop_assert!(h.eval(x) <= -m + 1e-12); }
        }
    }
}
