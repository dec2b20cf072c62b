use proptest::prelude::*;
use sparseloc_core::geometry::{
    distance_between, exact_shell_measure, generalized_surface_area, shell_measure,
    sigma_volume_bound, Primitive, RegionSet,
};
use sparseloc_core::math::PI;

fn primitive_2d() -> impl Strategy<Value = Primitive> {
    let center = prop::collection::vec(-5.0f64..5.0, 2);
    prop_oneof![
        center
            .clone()
            .prop_map(|center| Primitive::Point { center }),
        (center.clone(), 0.1f64..3.0)
            .prop_map(|(center, radius)| Primitive::Ball { center, radius }),
        (center, 0.1f64..3.0).prop_map(|(center, radius)| Primitive::Sphere { center, radius }),
    ]
}

fn region(p: Primitive) -> RegionSet {
    RegionSet::single(2, p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_symmetric_and_nonnegative(a in primitive_2d(), b in primitive_2d()) {
        let (ra, rb) = (region(a), region(b));
        let ab = distance_between(&ra, &rb).unwrap();
        let ba = distance_between(&rb, &ra).unwrap();
        prop_assert!(ab.value >= 0.0 && ba.value >= 0.0);
        prop_assert!((ab.value - ba.value).abs() <= ab.tolerance + ba.tolerance + 1e-12);
    }

    #[test]
    fn ball_distance_vanishes_exactly_on_overlap(
        c1 in prop::collection::vec(-5.0f64..5.0, 2),
        c2 in prop::collection::vec(-5.0f64..5.0, 2),
        r1 in 0.1f64..3.0,
        r2 in 0.1f64..3.0,
    ) {
        let gap = ((c1[0] - c2[0]).powi(2) + (c1[1] - c2[1]).powi(2)).sqrt() - r1 - r2;
        let d = distance_between(
            &RegionSet::ball(c1.clone(), r1).unwrap(),
            &RegionSet::ball(c2.clone(), r2).unwrap(),
        )
        .unwrap();
        if gap <= 0.0 {
            prop_assert_eq!(d.value, 0.0);
        } else {
            prop_assert!(d.value > 0.0);
            prop_assert!((d.value - gap).abs() <= 1e-12 + d.tolerance);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn shell_measure_brackets_closed_forms(
        dim in 1usize..=3,
        kind in 0usize..3,
        radius in 0.3f64..2.0,
        r in 0.0f64..2.5,
    ) {
        let c = vec![0.1; dim];
        let set = match kind {
            0 => RegionSet::point(c).unwrap(),
            1 => RegionSet::ball(c, radius).unwrap(),
            _ => RegionSet::sphere(c, radius).unwrap(),
        };
        let res = if dim == 3 { 0.05 } else { 0.01 };
        let est = shell_measure(&set, r, res).unwrap();
        let exact = exact_shell_measure(&set, r).unwrap();
        prop_assert!(
            (est.value - exact).abs() <= est.error,
            "d={} kind={} r={}: {} vs {} (error {})", dim, kind, r, est.value, exact, est.error
        );
    }

    #[test]
    fn surface_area_respects_the_volume_bound(p in primitive_2d()) {
        let set = region(p);
        let s = generalized_surface_area(&set, 0.04, None).unwrap();
        prop_assert!(s.sigma <= sigma_volume_bound(set.diameter(), 2) + s.error);
    }
}

#[test]
fn sphere_family_grows_linearly() {
    for radius in [1.0, 2.0, 5.0, 10.0, 20.0] {
        let set = RegionSet::sphere(vec![0.0, 0.0], radius).unwrap();
        let res = if radius > 5.0 { 0.05 } else { 0.02 };
        let s = generalized_surface_area(&set, res, None).unwrap();
        assert!(
            s.sigma <= 4.0 * PI * radius + s.error,
            "R = {radius}: {} > {} + {}",
            s.sigma,
            4.0 * PI * radius,
            s.error
        );
    }
}

#[test]
fn halving_the_resolution_stays_within_the_errors() {
    let sets = [
        RegionSet::point(vec![0.0, 0.0]).unwrap(),
        RegionSet::ball(vec![0.3, -0.2], 1.5).unwrap(),
        RegionSet::single(
            2,
            Primitive::Annulus {
                inner: 1.0,
                outer: 2.0,
            },
        )
        .unwrap(),
    ];
    for set in &sets {
        let coarse = generalized_surface_area(set, 0.04, None).unwrap();
        let fine = generalized_surface_area(set, 0.02, None).unwrap();
        assert!((coarse.sigma - fine.sigma).abs() <= coarse.error + fine.error);
    }
}
