use proptest::prelude::*;
use sparseloc_core::certify::{
    build_decomposition_quasi1d, build_decomposition_sparse, certify_ac, difference_support,
    growth_ratio_ac, max_scale_within, Verdict,
};
use sparseloc_core::geometry::{MemberRole, Primitive};
use sparseloc_core::models::{
    sample_couplings_in_ball, CouplingLaw, CouplingMap, LawRule, PotentialRule, Profile,
    RandomPotentialModel, SingleSitePotential, SiteSet,
};

fn model(sites: SiteSet, law: CouplingLaw) -> RandomPotentialModel {
    let dim = sites.dim();
    let f = SingleSitePotential::from_profile(
        Profile::Indicator {
            height: -1.0,
            radius: 0.4,
        },
        dim,
        2.0,
    )
    .unwrap();
    RandomPotentialModel::new(sites, PotentialRule::Shared(f), LawRule::Shared { law }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sparse_terms_recompute_and_respect_the_distance_floor(
        seed in any::<u64>(),
        gamma in prop::sample::select(vec![1.0f64, 2.0, 4.0]),
        p in 0.001f64..0.03,
    ) {
        let m = model(SiteSet::lattice(2, 40.0).unwrap(), CouplingLaw::Bernoulli { p });
        let c = sample_couplings_in_ball(&m, seed, 40.0);
        let (_, a) = growth_ratio_ac(gamma, 2).unwrap();
        let top = max_scale_within(a, 40.0, 40);
        let eps = 0.5;
        let built = build_decomposition_sparse(&m, &c, eps, gamma, 1..=top).unwrap();
        let diff = difference_support(&m, &c, eps, None);
        let cert = certify_ac(&built.decomposition, &diff, gamma).unwrap();
        let rho = m.potentials.max_reach();
        for r in &cert.records {
            let expect = r.weight * (-gamma * r.delta).exp();
            prop_assert!((expect - r.term).abs() <= 1e-12 * expect.abs().max(1e-300));
            let floor = r.delta_lower.unwrap();
            prop_assert_eq!(floor, r.n as f64 / 2.0 - rho);
            prop_assert!(r.delta >= floor, "n={} δ={} < {}", r.n, r.delta, floor);
        }
    }

    #[test]
    fn caps_and_cheese_cover_each_sphere(seed in any::<u64>()) {
        let sites = SiteSet::tube(vec![vec![0.0]], 160.0).unwrap();
        let m = model(sites, CouplingLaw::Bernoulli { p: 0.02 });
        let c = sample_couplings_in_ball(&m, seed, 160.0);
        let (eps, gamma, alpha, a) = (0.5, 1.0, 2.0, 1.5);
        let built = build_decomposition_quasi1d(&m, &c, eps, gamma, alpha, a, 1..=9).unwrap();
        let diff = difference_support(&m, &c, eps, None);
        let cert = certify_ac(&built.decomposition, &diff, gamma).unwrap();
        let rho = m.potentials.max_reach();
        let members = &built.decomposition.members;
        for rec in &built.records {
            let Some(r_n) = rec.r_n else { continue };
            let radius = r_n + rec.n as f64 / 2.0;
            for k in 0..720 {
                let t = k as f64 * std::f64::consts::TAU / 720.0;
                let x = [radius * t.cos(), radius * t.sin()];
                prop_assert!(
                    members
                        .iter()
                        .filter(|mem| mem.scale == rec.n)
                        .any(|mem| mem.region.contains(&x)),
                    "n={} angle={} uncovered", rec.n, t
                );
            }
        }
        for count in &built.counts {
            prop_assert!(count.neighbourhood_sites as f64 <= count.neighbourhood_bound);
        }
        for r in &cert.records {
            let mem = &members[r.member];
            if mem.role == MemberRole::Cheese {
                if let Some(floor) = r.delta_lower {
                    let na = (r.n as f64).powf(alpha);
                    prop_assert_eq!(floor, na - rho);
                    prop_assert!(r.delta >= floor);
                }
            } else {
                prop_assert!(r.delta >= r.n as f64 / 2.0 - rho);
            }
        }
    }
}

#[test]
fn all_zero_sparse_build_is_certified() {
    let m = model(
        SiteSet::lattice(2, 140.0).unwrap(),
        CouplingLaw::Bernoulli { p: 0.0 },
    );
    let c = CouplingMap::constant(&m, 0.0, 140.0);
    for gamma in [0.1, 0.5, 1.0, 2.0] {
        let (_, a) = growth_ratio_ac(gamma, 2).unwrap();
        let top = max_scale_within(a, 140.0, 60);
        let built = build_decomposition_sparse(&m, &c, 0.1, gamma, 1..=top).unwrap();
        assert!(built.gaps.is_empty());
        for mem in &built.decomposition.members {
            assert!(matches!(mem.region.primitives[0], Primitive::Sphere { .. }));
        }
        let diff = difference_support(&m, &c, 0.1, None);
        let cert = certify_ac(&built.decomposition, &diff, gamma).unwrap();
        assert_eq!(
            cert.verdict,
            Verdict::Certified,
            "γ = {gamma}: {}",
            cert.reason
        );
    }
}
