use proptest::prelude::*;
use sparseloc_core::geometry::RegionSet;
use sparseloc_core::models::{
    evaluate_potential, sample_couplings, sample_couplings_in_ball, CouplingLaw, CouplingMap,
    LawRule, PotentialRule, Profile, RandomPotentialModel, SingleSitePotential, SiteSet,
};

fn law_strategy() -> impl Strategy<Value = CouplingLaw> {
    let unit = 0.0f64..=1.0;
    let range = (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(x, y)| (x.min(y), x.max(y)));
    prop_oneof![
        unit.clone().prop_map(|p| CouplingLaw::Bernoulli { p }),
        range
            .clone()
            .prop_map(|(lo, hi)| CouplingLaw::Uniform { lo, hi }),
        (unit.clone(), range.clone()).prop_map(|(p, (lo, hi))| CouplingLaw::BernoulliUniform {
            p,
            lo,
            hi
        }),
        prop::collection::vec((0.0f64..=1.0, 0.01f64..1.0), 1..5).prop_map(|raw| {
            let total: f64 = raw.iter().map(|a| a.1).sum();
            CouplingLaw::PointMasses {
                atoms: raw.into_iter().map(|(x, w)| (x, w / total)).collect(),
            }
        }),
        (unit, range).prop_map(|(w, (lo, hi))| CouplingLaw::Mixture {
            components: vec![
                (w, Box::new(CouplingLaw::Uniform { lo, hi })),
                (1.0 - w, Box::new(CouplingLaw::Bernoulli { p: 0.5 })),
            ],
        }),
    ]
}

fn model(dim: usize, radius: f64, law: CouplingLaw) -> RandomPotentialModel {
    let f = SingleSitePotential::from_profile(
        Profile::Indicator {
            height: 1.0,
            radius: 0.75,
        },
        dim,
        2.0,
    )
    .unwrap();
    RandomPotentialModel::new(
        SiteSet::lattice(dim, radius).unwrap(),
        PotentialRule::Shared(f),
        LawRule::Shared { law },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn p_epsilon_is_monotone_and_complements_the_lower_mass(
        law in law_strategy(),
        e1 in 0.001f64..=1.0,
        e2 in 0.001f64..=1.0,
    ) {
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let (p_lo, p_hi) = (law.p_epsilon(lo).unwrap(), law.p_epsilon(hi).unwrap());
        prop_assert!(p_hi <= p_lo + 1e-12);
        prop_assert!((p_lo + law.cdf_left(lo) - 1.0).abs() <= 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p_lo));
    }

    #[test]
    fn bernoulli_p_epsilon_equals_p(p in 0.0f64..=1.0, eps in 0.001f64..=1.0) {
        let law = CouplingLaw::Bernoulli { p };
        prop_assert_eq!(law.p_epsilon(eps).unwrap(), p);
    }

    #[test]
    fn potential_is_linear_in_the_couplings(
        seed in any::<u64>(),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        x in prop::collection::vec(-4.0f64..4.0, 2),
    ) {
        let m = model(2, 6.0, CouplingLaw::Uniform { lo: 0.0, hi: 1.0 });
        let c1 = sample_couplings_in_ball(&m, seed, 6.0);
        let c2 = sample_couplings_in_ball(&m, seed ^ 0x9e37, 6.0);
        let combo = CouplingMap {
            seed: 0,
            values: c1
                .values
                .iter()
                .zip(&c2.values)
                .map(|(a, b)| Some(alpha * a.unwrap() + beta * b.unwrap()))
                .collect(),
            coverage: 6.0,
        };
        let v1 = evaluate_potential(&m, &c1, &x, false).value;
        let v2 = evaluate_potential(&m, &c2, &x, false).value;
        let v = evaluate_potential(&m, &combo, &x, false).value;
        prop_assert!((v - alpha * v1 - beta * v2).abs() <= 1e-10);
    }

    #[test]
    fn sampling_depends_only_on_seed_and_site(seed in any::<u64>()) {
        let small = model(2, 5.0, CouplingLaw::Uniform { lo: 0.0, hi: 1.0 });
        let large = model(2, 9.0, CouplingLaw::Uniform { lo: 0.0, hi: 1.0 });
        let a = sample_couplings_in_ball(&small, seed, 5.0);
        let b = sample_couplings(&large, seed, &RegionSet::ball(vec![0.0, 0.0], 9.0).unwrap()).unwrap();
        let again = sample_couplings_in_ball(&small, seed, 5.0);
        prop_assert_eq!(&a, &again);
        for i in 0..small.sites.len() {
            let j = large.sites.index_of(small.sites.site(i)).unwrap();
            prop_assert_eq!(a.get(i), b.get(j));
        }
    }
}

#[test]
fn empirical_frequencies_match_p_epsilon() {
    let laws = [
        CouplingLaw::Bernoulli { p: 0.3 },
        CouplingLaw::Uniform { lo: 0.0, hi: 1.0 },
        CouplingLaw::BernoulliUniform {
            p: 0.2,
            lo: 0.25,
            hi: 1.0,
        },
        CouplingLaw::PointMasses {
            atoms: vec![(0.0, 0.5), (0.4, 0.25), (0.9, 0.25)],
        },
        CouplingLaw::Mixture {
            components: vec![
                (0.5, Box::new(CouplingLaw::Uniform { lo: 0.5, hi: 1.0 })),
                (0.5, Box::new(CouplingLaw::Bernoulli { p: 0.1 })),
            ],
        },
    ];
    let eps = 0.4;
    for law in laws {
        let m = model(2, 60.0, law.clone());
        let c = sample_couplings_in_ball(&m, 2024, 60.0);
        let n = c.values.len() as f64;
        let hits = c.values.iter().filter(|v| v.unwrap() >= eps).count() as f64;
        let p = law.p_epsilon(eps).unwrap();
        let se = (p * (1.0 - p) / n).sqrt().max(1e-12);
        let z = (hits / n - p) / se;
        assert!(z.abs() <= 4.0, "{law:?}: z = {z}");
    }
}
