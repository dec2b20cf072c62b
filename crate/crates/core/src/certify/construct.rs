use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use super::free::{
    difference_support, find_free_subannulus_excluding, required_coverage, FreeAnnulusRecord,
};
use crate::error::{invalid, Error, Result};
use crate::geometry::{
    distance_between, spherical_cap, DecompositionKind, DecompositionMember, Hole, MemberRole,
    Primitive, RegionSet, ShellSequence, TailRule, TotalDecomposition,
};
use crate::math::{self, ceil, floor, ln, pow};
use crate::models::{
    quasi_dimension_bound, CouplingMap, QuasiDimensionReport, RandomPotentialModel,
};
use crate::stochastic::quasi1d_threshold;

/// Smallest integer strictly greater than `x` (for `x ≥ 0`).
pub fn smallest_integer_above(x: f64) -> u64 {
    floor(x.max(0.0)) as u64 + 1
}

/// `ℓ > 2(d-1)/γ` and `a = 1 + 1/ℓ` for the absolutely continuous case.
pub fn growth_ratio_ac(gamma: f64, dim: usize) -> Result<(u64, f64)> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma must be positive"));
    }
    let ell = smallest_integer_above(2.0 * (dim as f64 - 1.0) / gamma);
    Ok((ell, 1.0 + 1.0 / ell as f64))
}

/// `ℓ > 2d/γ` and `a = 1 + 1/ℓ` for the pure point case.
pub fn growth_ratio_pp(gamma: f64, dim: usize) -> Result<(u64, f64)> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma must be positive"));
    }
    let ell = smallest_integer_above(2.0 * dim as f64 / gamma);
    Ok((ell, 1.0 + 1.0 / ell as f64))
}

/// Largest `N ≤ cap` whose scales fit in a window of radius `coverage`.
pub fn max_scale_within(a: f64, coverage: f64, cap: u32) -> u32 {
    let mut n = 0;
    while n < cap && required_coverage(a, n + 1) <= coverage {
        n += 1;
    }
    n
}

/// Sphere-shell decomposition together with its per-scale search records.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseConstruction {
    pub decomposition: TotalDecomposition,
    pub records: Vec<FreeAnnulusRecord>,
    /// Scales without an ε-free annulus.
    pub gaps: Vec<u32>,
    pub ell: u64,
    pub a: f64,
}

fn check_scales(scales: &core::ops::RangeInclusive<u32>) -> Result<()> {
    if *scales.start() == 0 || scales.is_empty() {
        return Err(invalid("scale range must be nonempty and start at n >= 1"));
    }
    Ok(())
}

/// Spheres `∂B(0, r_n + n/2)` around ε-free annuli `A_{r_n, r_n+n}` with
/// `a = 1 + 1/ℓ`, `ℓ > 2(d-1)/γ`. Each member records `δ_n ≥ n/2 - ρ`.
pub fn build_decomposition_sparse(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    eps: f64,
    gamma: f64,
    scales: core::ops::RangeInclusive<u32>,
) -> Result<SparseConstruction> {
    check_scales(&scales)?;
    let dim = model.dim();
    let (ell, a) = growth_ratio_ac(gamma, dim)?;
    let rho = model.potentials.max_reach();
    let mut records = Vec::new();
    let mut gaps = Vec::new();
    let mut members = Vec::new();
    for n in scales {
        let rec = find_free_subannulus_excluding(model, couplings, eps, a, n, None)?;
        match rec.r_n {
            Some(r) => members.push(DecompositionMember {
                scale: n,
                role: MemberRole::Sphere,
                region: RegionSet::sphere(vec![0.0; dim], r + n as f64 / 2.0)?,
                delta_lower: Some(n as f64 / 2.0 - rho),
            }),
            None => gaps.push(n),
        }
        records.push(rec);
    }
    let decomposition =
        TotalDecomposition::new(dim, DecompositionKind::SphereShells, Some(gamma), members)?
            .with_tail(TailRule {
                log_growth: (dim as f64 - 1.0) * ln(a),
                delta_growth: 0.5,
            });
    Ok(SparseConstruction {
        decomposition,
        records,
        gaps,
        ell,
        a,
    })
}

/// Nested balls around ε-free annuli for the pure point case.
#[derive(Debug, Clone, PartialEq)]
pub struct PpConstruction {
    pub shells: ShellSequence,
    pub records: Vec<FreeAnnulusRecord>,
    pub gaps: Vec<u32>,
    pub ell: u64,
    pub a: f64,
    pub excluded: usize,
}

/// `A_n = B(0, r_n + n/2)` with `a = 1 + 1/ℓ`, `ℓ > 2d/γ`, treating the
/// distinguished site `k` as absent from the free-annulus search.
pub fn build_shell_sequence_pp(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    eps: f64,
    gamma: f64,
    k: usize,
    scales: core::ops::RangeInclusive<u32>,
) -> Result<PpConstruction> {
    check_scales(&scales)?;
    if k >= model.sites.len() {
        return Err(invalid("distinguished site outside the window"));
    }
    let dim = model.dim();
    let (ell, a) = growth_ratio_pp(gamma, dim)?;
    let rho = model.potentials.max_reach();
    let mut records = Vec::new();
    let mut gaps = Vec::new();
    let mut radii = Vec::new();
    let mut labels = Vec::new();
    let mut lower = Vec::new();
    for n in scales {
        let rec = find_free_subannulus_excluding(model, couplings, eps, a, n, Some(k))?;
        match rec.r_n {
            Some(r) => {
                radii.push(r + n as f64 / 2.0);
                labels.push(n);
                lower.push(Some(n as f64 / 2.0 - rho));
            }
            None => gaps.push(n),
        }
        records.push(rec);
    }
    let mut shells = ShellSequence::new(dim, radii, labels)?.with_tail(TailRule {
        log_growth: dim as f64 * ln(a),
        delta_growth: 0.5,
    });
    shells.delta_lower = lower;
    Ok(PpConstruction {
        shells,
        records,
        gaps,
        ell,
        a,
        excluded: k,
    })
}

/// Cap and cheese counts at one scale.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaleCounts {
    pub n: u32,
    /// `#P_n`: sites in the `n^α`-neighbourhood of the free annulus.
    pub neighbourhood_sites: usize,
    /// Distinct caps (sites sharing a direction share a cap).
    pub caps: usize,
    /// `2n^α + 2`.
    pub cap_bound: f64,
    /// `2C⌈n^α⌉`, the count bound implied by `#(Σ ∩ A_{R,R+1}) ≤ C`.
    pub neighbourhood_bound: f64,
    /// `R_n ≥ 2n^{2α-1}`, past which every cheese point is at distance
    /// `≥ n^α` from sites outside the free annulus.
    pub cheese_bound_applies: bool,
    /// Measured distance from the difference support to the cheese.
    pub cheese_delta: f64,
}

/// Cap/cheese decomposition for quasi-one-dimensional site sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Quasi1dConstruction {
    pub decomposition: TotalDecomposition,
    pub records: Vec<FreeAnnulusRecord>,
    pub counts: Vec<ScaleCounts>,
    pub gaps: Vec<u32>,
    pub quasi: QuasiDimensionReport,
    /// `sup_i p_i(ε)` over the window.
    pub delta: f64,
    /// `(1 - δ)^{-C}`.
    pub threshold: f64,
    pub a: f64,
    pub alpha: f64,
    pub warning: Option<String>,
}

/// Splits each sphere `S_n = ∂B(0, r_n + n/2)` into caps
/// `S_n ∩ B(R_n j/|j|, n^α)` around the sites `j ∈ P_n` near the free
/// annulus and the remaining cheese.
#[allow(clippy::too_many_arguments)]
pub fn build_decomposition_quasi1d(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    eps: f64,
    gamma: f64,
    alpha: f64,
    a: f64,
    scales: core::ops::RangeInclusive<u32>,
) -> Result<Quasi1dConstruction> {
    check_scales(&scales)?;
    if !(alpha > 1.0) {
        return Err(invalid("α must exceed 1"));
    }
    if !(gamma > 0.0) {
        return Err(invalid("gamma must be positive"));
    }
    let dim = model.dim();
    let sites = &model.sites;
    let check_radius = floor(sites.window_radius() - 1.0);
    let quasi = quasi_dimension_bound(sites, 1.0, check_radius)?;
    if !quasi.pass {
        return Err(Error::Refused(format!(
            "site set is not quasi-one-dimensional (normalized shell counts grow with slope {})",
            quasi.slope
        )));
    }
    let mut delta = 0.0f64;
    for i in 0..sites.len() {
        delta = delta.max(model.p_epsilon(i, eps)?);
    }
    if delta >= 1.0 {
        return Err(Error::Refused(String::from(
            "sup p_i(ε) = 1: no growth ratio makes free annuli summable",
        )));
    }
    let threshold = quasi1d_threshold(delta, quasi.c)?;
    let warning = if a <= threshold {
        Some(format!(
            "a = {a} does not exceed the threshold (1-δ)^(-C) = {threshold}"
        ))
    } else {
        None
    };

    let rho = model.potentials.max_reach();
    let diff = difference_support(model, couplings, eps, None);
    let mut members = Vec::new();
    let mut records = Vec::new();
    let mut counts = Vec::new();
    let mut gaps = Vec::new();
    let mut last_n = 0u32;
    for n in scales {
        last_n = n;
        let rec = find_free_subannulus_excluding(model, couplings, eps, a, n, None)?;
        records.push(rec);
        let Some(r_n) = rec.r_n else {
            gaps.push(n);
            continue;
        };
        let nf = n as f64;
        let na = pow(nf, alpha);
        let radius = r_n + nf / 2.0;
        let mut p_n: Vec<usize> = sites.shell_range(r_n - na, r_n).collect();
        p_n.extend(sites.shell_range(r_n + nf, r_n + nf + na));
        if let Some(&i) = p_n.iter().find(|&&i| couplings.get(i).is_none()) {
            return Err(Error::WindowTooSmall {
                needed: r_n + nf + na,
                covered: sites.site_norm(i).min(couplings.coverage),
            });
        }

        let mut directions: Vec<Vec<f64>> = Vec::new();
        for &j in &p_n {
            let site = sites.site(j);
            let r = sites.site_norm(j);
            if r == 0.0 {
                continue;
            }
            let u: Vec<f64> = site.iter().map(|x| x / r).collect();
            if !directions.iter().any(|v| math::dist(v, &u) <= 1e-12) {
                directions.push(u);
            }
        }
        let mut holes = Vec::with_capacity(directions.len());
        for u in &directions {
            let cap = spherical_cap(radius, u, na)?;
            if let Primitive::Cap { half_angle, .. } = cap.primitives[0] {
                holes.push(Hole {
                    direction: u.clone(),
                    half_angle,
                });
            }
            members.push(DecompositionMember {
                scale: n,
                role: MemberRole::Cap,
                region: cap,
                delta_lower: Some(nf / 2.0 - rho),
            });
        }
        let cheese_region = RegionSet::single(dim, Primitive::PerforatedSphere { radius, holes })?;
        let applies = radius >= 2.0 * pow(nf, 2.0 * alpha - 1.0);
        let cheese_delta = if diff.is_empty() {
            f64::INFINITY
        } else {
            distance_between(&diff, &cheese_region)?.lower_bound()
        };
        members.push(DecompositionMember {
            scale: n,
            role: MemberRole::Cheese,
            region: cheese_region,
            delta_lower: if applies { Some(na - rho) } else { None },
        });
        counts.push(ScaleCounts {
            n,
            neighbourhood_sites: p_n.len(),
            caps: directions.len(),
            cap_bound: 2.0 * na + 2.0,
            neighbourhood_bound: 2.0 * quasi.c * ceil(na),
            cheese_bound_applies: applies,
            cheese_delta,
        });
    }

    // Past scale N, cap terms grow at most like ((N+1)/N)^{dα} per step
    // while δ grows by ½, and cheese terms like a^d while δ grows by at
    // least α N^{α-1}. The rule encodes the larger of the two log-ratios.
    let nl = last_n.max(1) as f64;
    let cap_lr = dim as f64 * alpha * ln(1.0 + 1.0 / nl) - 0.5 * gamma;
    let cheese_lr = dim as f64 * ln(a) - gamma * alpha * pow(nl, alpha - 1.0);
    let tail = TailRule {
        log_growth: cap_lr.max(cheese_lr) + 0.5 * gamma,
        delta_growth: 0.5,
    };
    let decomposition =
        TotalDecomposition::new(dim, DecompositionKind::CapCheese, Some(gamma), members)?
            .with_tail(tail);
    Ok(Quasi1dConstruction {
        decomposition,
        records,
        counts,
        gaps,
        quasi,
        delta,
        threshold,
        a,
        alpha,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify_ac, certify_pp, Verdict};
    use crate::models::{
        sample_couplings_in_ball, CouplingLaw, LawRule, PotentialRule, Profile,
        SingleSitePotential, SiteSet,
    };

    #[test]
    fn ell_examples() {
        assert_eq!(growth_ratio_ac(1.0, 2).unwrap(), (3, 4.0 / 3.0));
        assert_eq!(growth_ratio_ac(4.0, 2).unwrap(), (1, 2.0));
        assert_eq!(growth_ratio_pp(1.0, 2).unwrap(), (5, 6.0 / 5.0));
        assert!(growth_ratio_ac(0.0, 2).is_err());
    }

    fn lattice_model(dim: usize, radius: f64, law: CouplingLaw) -> RandomPotentialModel {
        let f = SingleSitePotential::from_profile(
            Profile::Indicator {
                height: -1.0,
                radius: 0.3,
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

    #[test]
    fn zero_couplings_use_first_candidate() {
        let m = lattice_model(2, 12.0, CouplingLaw::Bernoulli { p: 0.0 });
        let c = CouplingMap::constant(&m, 0.0, 12.0);
        let built = build_decomposition_sparse(&m, &c, 0.1, 1.0, 1..=5).unwrap();
        assert!(built.gaps.is_empty());
        let a: f64 = 4.0 / 3.0;
        for (k, mem) in built.decomposition.members.iter().enumerate() {
            let n = k as i32 + 1;
            let want = math::powi(a, n) + n as f64 / 2.0;
            let Primitive::Sphere { radius, .. } = mem.region.primitives[0] else {
                unreachable!()
            };
            assert!((radius - want).abs() < 1e-12);
        }
    }

    #[test]
    fn excluded_site_does_not_affect_shells() {
        let m = lattice_model(2, 30.0, CouplingLaw::Bernoulli { p: 0.0 });
        let zero = CouplingMap::constant(&m, 0.0, 30.0);
        let k = m.sites.index_of(&[2.0, 0.0]).unwrap();
        let with_k = zero.clone().with_value(k, 1.0);
        let a = build_shell_sequence_pp(&m, &zero, 0.1, 1.0, k, 1..=8).unwrap();
        let b = build_shell_sequence_pp(&m, &with_k, 0.1, 1.0, k, 1..=8).unwrap();
        assert_eq!(a.shells, b.shells);
        let diff = difference_support(&m, &with_k, 0.1, Some(k));
        let ca = certify_pp(&a.shells, &diff, 1.0).unwrap();
        let cb = certify_pp(&b.shells, &RegionSet::empty(2), 1.0).unwrap();
        assert_eq!(ca.records, cb.records);
    }

    #[test]
    fn quasi1d_refuses_planar_sites() {
        let m = lattice_model(2, 20.0, CouplingLaw::Bernoulli { p: 0.1 });
        let c = sample_couplings_in_ball(&m, 1, 20.0);
        assert!(matches!(
            build_decomposition_quasi1d(&m, &c, 0.5, 1.0, 2.0, 2.0, 1..=3),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn quasi1d_single_site_cap() {
        // One site of the tube lies just outside the free annulus at n = 3.
        let f = SingleSitePotential::from_profile(
            Profile::Indicator {
                height: 1.0,
                radius: 0.3,
            },
            2,
            2.0,
        )
        .unwrap();
        let m = RandomPotentialModel::new(
            SiteSet::explicit(2, vec![vec![20.0, 0.0]], Some(40.0)).unwrap(),
            PotentialRule::Shared(f),
            LawRule::Shared {
                law: CouplingLaw::Bernoulli { p: 0.5 },
            },
        )
        .unwrap();
        let c = CouplingMap::constant(&m, 0.0, 40.0);
        let q = build_decomposition_quasi1d(&m, &c, 0.5, 1.0, 2.0, 2.0, 3..=3).unwrap();
        let caps: Vec<_> = q
            .decomposition
            .members
            .iter()
            .filter(|m| m.role == MemberRole::Cap)
            .collect();
        assert_eq!(caps.len(), 1);
        let Primitive::Cap {
            radius,
            ball_radius,
            ref direction,
            ..
        } = caps[0].region.primitives[0]
        else {
            unreachable!()
        };
        assert_eq!(ball_radius, 9.0);
        assert_eq!(radius, 8.0 + 1.5);
        assert_eq!(direction, &vec![1.0, 0.0]);
        assert!(q.decomposition.structure_report().ok());
    }

    #[test]
    fn all_zero_sparse_certifies() {
        let m = lattice_model(2, 60.0, CouplingLaw::Bernoulli { p: 0.0 });
        let c = CouplingMap::constant(&m, 0.0, 60.0);
        for gamma in [0.5, 1.0, 2.0] {
            let (_, a) = growth_ratio_ac(gamma, 2).unwrap();
            let top = max_scale_within(a, 60.0, 60);
            let built = build_decomposition_sparse(&m, &c, 0.1, gamma, 1..=top).unwrap();
            let cert = certify_ac(&built.decomposition, &RegionSet::empty(2), gamma).unwrap();
            assert_eq!(
                cert.verdict,
                Verdict::Certified,
                "γ = {gamma}: {}",
                cert.reason
            );
        }
    }
}
