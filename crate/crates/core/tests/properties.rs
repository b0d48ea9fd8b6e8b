use std::collections::BTreeMap;
use std::f64::consts::PI;

use dgli_core::analysis::{
    choose_representatives, classify_nearest, confusion_matrix, db_index, extract, Features,
    Metric, Representation,
};
use dgli_core::baselines::{align_rigid, corner_distances, frechet_distance, hausdorff_distance};
use dgli_core::cloth::{cloth_coordinates, ClothConfiguration};
use dgli_core::datagen::{
    apply_fold, class_catalog, corner_fold, generate_class, make_flat, FoldSense, FoldSpec,
};
use dgli_core::geometry::{
    dgli_segments, directional_gli, segment_distance, segment_gli, DifferenceScheme,
    PerturbationSpec, PerturbedEnds, Point3, Polyline3, Segment,
};
use dgli_core::metrics::{euclidean_distance, rank_vector, spearman_distance};
use proptest::prelude::*;

fn point(r: f64) -> impl Strategy<Value = Point3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

fn planar_point(r: f64) -> impl Strategy<Value = Point3> {
    (-r..r, -r..r).prop_map(|(x, y)| Point3::new(x, y, 0.0))
}

fn separated_pair() -> impl Strategy<Value = (Segment, Segment)> {
    (point(1.0), point(1.0), point(1.0), point(1.0)).prop_filter_map("separated", |(a, b, c, d)| {
        let s1 = Segment::new(a, b).ok()?;
        let s2 = Segment::new(c, d).ok()?;
        (segment_distance(&s1, &s2) > 0.05).then_some((s1, s2))
    })
}

fn vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0_f64, len)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn sample_config(class_index: usize, seed: u64) -> ClothConfiguration {
    generate_class(&class_catalog(0.03)[class_index], 1, seed)
        .unwrap()
        .remove(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gli_is_symmetric_and_flips_with_orientation((s1, s2) in separated_pair()) {
        let g = segment_gli(&s1, &s2).unwrap();
        prop_assert_eq!(g, segment_gli(&s2, &s1).unwrap());
        let r = segment_gli(&s1.reversed(), &s2).unwrap();
        prop_assert!((g + r).abs() <= 1e-12 * g.abs().max(1e-12));
        prop_assert!(g.abs() <= 0.5);
    }

    #[test]
    fn coplanar_gli_vanishes(a in planar_point(1.0), b in planar_point(1.0), c in planar_point(1.0), d in planar_point(1.0)) {
        let (Ok(s1), Ok(s2)) = (Segment::new(a, b), Segment::new(c, d)) else { return Ok(()) };
        if let Ok(g) = segment_gli(&s1, &s2) {
            prop_assert!(g.abs() < 1e-12);
        }
    }

    #[test]
    fn dgli_is_symmetric_and_initial_ends_match_reversed_terminal((s1, s2) in separated_pair()) {
        let p = PerturbationSpec::default();
        let a = dgli_segments(&s1, &s2, &p).value;
        prop_assert_eq!(a, dgli_segments(&s2, &s1, &p).value);
        // Moving the initial endpoints instead is the same as moving the
        // terminal endpoints of the reversed segments.
        let init = directional_gli(&s1, &s2, Point3::E3, 1e-6, PerturbedEnds::Initial, DifferenceScheme::Central).unwrap();
        let rev = directional_gli(&s1.reversed(), &s2.reversed(), Point3::E3, 1e-6, PerturbedEnds::Terminal, DifferenceScheme::Central).unwrap();
        prop_assert!(rel_close(init, rev, 1e-9) || (init - rev).abs() < 1e-12);
    }

    #[test]
    fn dgli_is_invariant_under_z_rotation_and_translation(
        (s1, s2) in separated_pair(), angle in -PI..PI, t in point(5.0),
    ) {
        let p = PerturbationSpec::default();
        let m = |s: &Segment| Segment::new(s.start().rotated_z(angle) + t, s.end().rotated_z(angle) + t).unwrap();
        let a = dgli_segments(&s1, &s2, &p).value;
        let b = dgli_segments(&m(&s1), &m(&s2), &p).value;
        prop_assert!(a.abs() < 1e-6 || rel_close(a, b, 1e-9), "{} vs {}", a, b);
    }

    #[test]
    fn coplanar_dgli_survives_translation_rounding(
        (s1, s2) in (planar_point(1.0), planar_point(1.0), planar_point(1.0), planar_point(1.0))
            .prop_filter_map("separated", |(a, b, c, d)| {
                let s1 = Segment::new(a, b).ok()?;
                let s2 = Segment::new(c, d).ok()?;
                (segment_distance(&s1, &s2) > 0.05).then_some((s1, s2))
            }),
        t in point(10.0),
    ) {
        // Translating rounds the endpoints, so the moved pair is only
        // coplanar to within a few ulps.
        let p = PerturbationSpec::default();
        let m = |s: &Segment| Segment::new(s.start() + t, s.end() + t).unwrap();
        let a = dgli_segments(&s1, &s2, &p).value;
        let b = dgli_segments(&m(&s1), &m(&s2), &p).value;
        prop_assert!(a.abs() < 1e-6 || rel_close(a, b, 1e-9), "{} vs {}", a, b);
    }

    #[test]
    fn dgli_scales_inversely((s1, s2) in separated_pair(), lambda in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let p = PerturbationSpec::default();
        let sc = |s: &Segment| Segment::new(s.start() * lambda, s.end() * lambda).unwrap();
        let a = dgli_segments(&s1, &s2, &p).value;
        let b = dgli_segments(&sc(&s1), &sc(&s2), &p).value;
        prop_assert!(a.abs() < 1e-6 || rel_close(a / lambda, b, 1e-6), "{} vs {}", a / lambda, b);
    }

    #[test]
    fn rank_sum_and_monotone_invariance(x in prop::collection::vec(0.1..100.0_f64, 2..30)) {
        let r = rank_vector(&x).unwrap();
        let n = x.len() as f64;
        prop_assert!((r.ranks().iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
        let cubed: Vec<f64> = x.iter().map(|v| v.powi(3)).collect();
        prop_assert_eq!(rank_vector(&cubed).unwrap(), r);
    }

    #[test]
    fn spearman_properties(x in vector(28), y in vector(28), a in 0.1..50.0_f64, b in -5.0..5.0_f64) {
        let d = spearman_distance(&x, &y).unwrap();
        prop_assert!((0.0..=2.0).contains(&d));
        prop_assert_eq!(d, spearman_distance(&y, &x).unwrap());
        prop_assert_eq!(spearman_distance(&x, &x).unwrap(), 0.0);
        let affine: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        prop_assert!((spearman_distance(&x, &affine).unwrap() - d).abs() < 1e-12);
        let positive: Vec<f64> = y.iter().map(|v| v + 10.5).collect();
        let cubed: Vec<f64> = positive.iter().map(|v| v.powi(3)).collect();
        prop_assert!((spearman_distance(&x, &cubed).unwrap() - spearman_distance(&x, &positive).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn reversed_order_gives_distance_exactly_two(x in prop::collection::vec(-10.0..10.0_f64, 2..40)) {
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        if !rank_vector(&x).unwrap().is_constant() {
            prop_assert_eq!(spearman_distance(&x, &y).unwrap(), 2.0);
        }
    }

    #[test]
    fn euclidean_triangle_inequality(x in vector(6), y in vector(6), z in vector(6)) {
        let xy = euclidean_distance(&x, &y).unwrap();
        let yz = euclidean_distance(&y, &z).unwrap();
        let xz = euclidean_distance(&x, &z).unwrap();
        prop_assert!(xz <= xy + yz + 1e-12);
    }

    #[test]
    fn confusion_matrix_is_symmetric(vs in prop::collection::vec(vector(8), 2..6)) {
        let f: Vec<Features> = vs.into_iter().map(Features::Vector).collect();
        let ids: Vec<String> = (0..f.len()).map(|i| i.to_string()).collect();
        for metric in [Metric::Spearman, Metric::Euclidean] {
            let m = confusion_matrix(&f, &ids, metric).unwrap();
            for i in 0..f.len() {
                prop_assert_eq!(m.get(i, i), 0.0);
                for j in 0..f.len() {
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                    prop_assert!(m.get(i, j) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn db_index_shrinks_with_class_dispersion(
        a in prop::collection::vec(vector(3), 3), b in prop::collection::vec(vector(3), 3), shrink in 0.1..0.9_f64,
    ) {
        let labels: Vec<String> = ["a", "a", "a", "b", "b", "b"].iter().map(|s| s.to_string()).collect();
        let pull = |group: &[Vec<f64>]| -> Vec<Vec<f64>> {
            let c: Vec<f64> = (0..3).map(|k| group.iter().map(|v| v[k]).sum::<f64>() / 3.0).collect();
            group.iter().map(|v| v.iter().zip(&c).map(|(x, m)| m + shrink * (x - m)).collect()).collect()
        };
        let wrap = |g: Vec<Vec<f64>>| g.into_iter().map(Features::Vector);
        let before: Vec<Features> = wrap(a.clone()).chain(wrap(b.clone())).collect();
        let after: Vec<Features> = wrap(pull(&a)).chain(wrap(pull(&b))).collect();
        let (Ok(d0), Ok(d1)) = (db_index(&before, &labels, Metric::Euclidean), db_index(&after, &labels, Metric::Euclidean)) else { return Ok(()) };
        prop_assert!(d1 <= d0 * (1.0 + 1e-12));
    }

    #[test]
    fn hausdorff_never_exceeds_frechet(a in prop::collection::vec(point(1.0), 12), b in prop::collection::vec(point(1.0), 12)) {
        let (Ok(pa), Ok(pb)) = (Polyline3::new(a, false), Polyline3::new(b, false)) else { return Ok(()) };
        let pair = align_rigid(&pa, &pb).unwrap();
        let f = frechet_distance(&pair.curve_a, &pair.curve_b).unwrap();
        let h = hausdorff_distance(&pair.curve_a, &pair.curve_b).unwrap();
        prop_assert!(h <= f);
        prop_assert!((pair.rotation.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn curve_distances_ignore_rigid_motions(class in 0usize..12, seed in 0u64..50, angle in -PI..PI, t in point(3.0)) {
        let a = sample_config(class, seed);
        let b = sample_config((class + 5) % 12, seed + 1);
        let moved = b.rigid_z(angle, t).unwrap();
        let fa = extract(&a, Representation::Boundary).unwrap();
        for metric in [Metric::Frechet, Metric::Hausdorff] {
            let d0 = dgli_core::analysis::distance(&fa, &extract(&b, Representation::Boundary).unwrap(), metric).unwrap();
            let d1 = dgli_core::analysis::distance(&fa, &extract(&moved, Representation::Boundary).unwrap(), metric).unwrap();
            prop_assert!((d0 - d1).abs() < 1e-6);
        }
        let e0 = extract(&b, Representation::Edges).unwrap();
        let e1 = extract(&moved, Representation::Edges).unwrap();
        let (Features::Vector(e0), Features::Vector(e1)) = (e0, e1) else { unreachable!() };
        for (x, y) in e0.iter().zip(&e1) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        for (x, y) in corner_distances(&b).values.iter().zip(&corner_distances(&moved).values) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn classification_ignores_rigid_motion_and_scale(class in 0usize..12, seed in 100u64..200, angle in -PI..PI, t in point(3.0), scale in 0.01..400.0_f64) {
        let db: Vec<ClothConfiguration> = (0..12).flat_map(|k| generate_class(&class_catalog(0.03)[k], 2, 1).unwrap()).collect();
        let labels: Vec<String> = db.iter().map(|c| c.class_label.clone().unwrap()).collect();
        let f: Vec<Features> = db.iter().map(|c| extract(c, Representation::Dgli).unwrap()).collect();
        let reps = choose_representatives(&f, &labels, Metric::Spearman, &BTreeMap::new()).unwrap();
        let q = sample_config(class, seed);
        let base = classify_nearest(&extract(&q, Representation::Dgli).unwrap(), &reps, Metric::Spearman).unwrap();
        let moved = q.rigid_z(angle, t).unwrap().scaled(scale).unwrap();
        let again = classify_nearest(&extract(&moved, Representation::Dgli).unwrap(), &reps, Metric::Spearman).unwrap();
        prop_assert_eq!(base, again);
    }

    #[test]
    fn folds_below_pi_preserve_every_segment_length(angle in 0.01..3.1_f64, k in 0usize..4, sense in prop::bool::ANY) {
        let flat = make_flat(1.0, 1.0, 5).unwrap();
        let sense = if sense { FoldSense::Over } else { FoldSense::Under };
        let folded = apply_fold(&flat, &corner_fold(k, 0.5, sense).with_angle(angle)).unwrap();
        let before: f64 = flat.boundary().length();
        prop_assert!((folded.boundary().length() - before).abs() < 1e-12 * before);
        prop_assert!(folded.is_simple(1e-9));
    }

    #[test]
    fn generated_boundaries_are_closed_and_simple(class in 0usize..12, seed in 0u64..1000) {
        let c = sample_config(class, seed);
        prop_assert!(c.boundary().is_closed());
        prop_assert!(c.is_simple(1e-9));
        let coords = cloth_coordinates(&c).unwrap();
        prop_assert_eq!(coords.len(), 28);
    }
}

#[test]
fn full_folds_keep_lengths_except_at_the_crease() {
    let flat = make_flat(1.0, 1.0, 5).unwrap();
    let f = FoldSpec::through([0.5, 0.0], [0.5, 1.0], [1.0, 0.5], FoldSense::Over);
    let folded = apply_fold(&flat, &f).unwrap();
    let v = folded.boundary().vertices();
    let on_hinge = |p: Point3| (p.x - 0.5).abs() < 1e-12 && p.z == 0.0;
    for s in folded.boundary().segments() {
        if on_hinge(s.start()) || on_hinge(s.end()) {
            continue;
        }
        assert!((s.length() - 0.2).abs() < 1e-12 * 0.2, "{:?}", s);
    }
    assert_eq!(v.len(), 22);
}

#[test]
fn flat_class_samples_are_nearly_identical() {
    let samples = generate_class(&class_catalog(0.03)[0], 10, 4).unwrap();
    let coords: Vec<Vec<f64>> = samples
        .iter()
        .map(|c| cloth_coordinates(c).unwrap().into_values())
        .collect();
    for a in &coords {
        for b in &coords {
            assert!(spearman_distance(a, b).unwrap() < 0.05);
        }
    }
}

#[test]
fn half_fold_class_halves_the_width() {
    for c in generate_class(&class_catalog(0.03)[5], 10, 2).unwrap() {
        let xs = c.boundary().vertices().iter().map(|p| p.x);
        let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        });
        assert!((hi - lo - 0.54).abs() < 0.08, "extent {}", hi - lo);
    }
}
