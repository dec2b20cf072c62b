use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{LawRule, PotentialRule, RandomPotentialModel, Sign, SingleSitePotential, SiteSet};
use crate::error::{invalid, Error, Result};
use crate::math::{self, linear_fit};

/// Result of one assumption check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssumptionCheck {
    pub pass: bool,
    pub detail: String,
    /// Offending site indices (a pair for the separation check).
    pub witness: Vec<usize>,
}

impl AssumptionCheck {
    fn pass(detail: String) -> Self {
        AssumptionCheck {
            pass: true,
            detail,
            witness: Vec::new(),
        }
    }

    fn fail(detail: String, witness: Vec<usize>) -> Self {
        AssumptionCheck {
            pass: false,
            detail,
            witness,
        }
    }
}

/// Per-assumption outcomes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssumptionReport {
    /// Background locally uniformly `L^p`, with `p ≥ 2` for `d ≤ 3` and
    /// `p > d/2` otherwise.
    pub background_lp: AssumptionCheck,
    /// Uniform discreteness of the sites.
    pub separation: AssumptionCheck,
    /// `supp f_i ⊂ B(0, ρ)` and `‖f_i‖_p ≤ M`.
    pub single_site: AssumptionCheck,
    /// `supp μ_i ⊂ [0, 1]`.
    pub laws: AssumptionCheck,
    /// Definite-sign, bounded `f_k` with `|f_k| ≥ c χ_{B(0,s)}`; present
    /// only when a distinguished site is set.
    pub distinguished: Option<AssumptionCheck>,
    /// `V₀, f_i ∈ L^{(d+1)/2}_loc`, recorded separately from the `L^p`
    /// exponent condition.
    pub integrability: AssumptionCheck,
    pub r_sigma: f64,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.background_lp.pass
            && self.separation.pass
            && self.single_site.pass
            && self.laws.pass
            && self.integrability.pass
            && self.distinguished.as_ref().is_none_or(|c| c.pass)
    }
}

fn exponent_ok(dim: usize, p: f64) -> bool {
    if dim <= 3 {
        p >= 2.0
    } else {
        p > dim as f64 / 2.0
    }
}

fn potentials_with_sites(rule: &PotentialRule) -> Vec<(usize, &SingleSitePotential)> {
    match rule {
        PotentialRule::Shared(f) => alloc::vec![(0, f)],
        PotentialRule::PerSite(v) => v.iter().enumerate().collect(),
    }
}

fn check_single_site(model: &RandomPotentialModel) -> AssumptionCheck {
    let dim = model.dim();
    let mut bad = Vec::new();
    let mut first = String::new();
    for (i, f) in potentials_with_sites(&model.potentials) {
        let support = f.profile.support_radius();
        let norm = f.profile.lp_norm(dim, f.p_exponent);
        let msg = if f.profile.validate().is_err() {
            Some(String::from("malformed profile"))
        } else if support > f.rho + 1e-12 {
            Some(format!(
                "support radius {support} exceeds declared ρ = {}",
                f.rho
            ))
        } else if norm > f.norm_bound * 1.01 {
            Some(format!("‖f‖_p = {norm} exceeds M = {}", f.norm_bound))
        } else {
            None
        };
        if let Some(m) = msg {
            if bad.is_empty() {
                first = m;
            }
            bad.push(i);
        }
    }
    if bad.is_empty() {
        AssumptionCheck::pass(format!("ρ = {}", model.potentials.max_rho()))
    } else {
        AssumptionCheck::fail(first, bad)
    }
}

fn check_laws(model: &RandomPotentialModel) -> AssumptionCheck {
    match &model.laws {
        LawRule::PerSite { laws } => {
            let bad: Vec<usize> = laws
                .iter()
                .enumerate()
                .filter(|(_, l)| l.validate().is_err())
                .map(|(i, _)| i)
                .collect();
            if bad.is_empty() {
                AssumptionCheck::pass(String::from("all laws supported in [0,1]"))
            } else {
                AssumptionCheck::fail(String::from("law with support outside [0,1]"), bad)
            }
        }
        rule => match rule.validate() {
            Ok(()) => AssumptionCheck::pass(String::from("all laws supported in [0,1]")),
            Err(e) => AssumptionCheck::fail(format!("{e}"), Vec::new()),
        },
    }
}

fn check_distinguished(model: &RandomPotentialModel, k: usize) -> AssumptionCheck {
    let f = model.potentials.get(k);
    let actual = f.profile.sign();
    if actual == Sign::Indefinite || f.sign == Sign::Indefinite {
        return AssumptionCheck::fail(String::from("f_k has indefinite sign"), alloc::vec![k]);
    }
    if actual != f.sign && f.profile.sup_abs() > 0.0 {
        return AssumptionCheck::fail(
            String::from("declared sign of f_k contradicts its values"),
            alloc::vec![k],
        );
    }
    if !f.profile.sup_abs().is_finite() {
        return AssumptionCheck::fail(String::from("f_k is unbounded"), alloc::vec![k]);
    }
    let Some(b) = f.lower_bump else {
        return AssumptionCheck::fail(
            String::from("no lower bump c·χ_{B(0,s)} given"),
            alloc::vec![k],
        );
    };
    if !(b.c > 0.0 && b.s > 0.0) {
        return AssumptionCheck::fail(
            String::from("lower bump needs c > 0 and s > 0"),
            alloc::vec![k],
        );
    }
    let steps = 1000;
    for j in 0..=steps {
        let r = b.s * j as f64 / steps as f64;
        if f.profile.at_radius(r).abs() < b.c {
            return AssumptionCheck::fail(format!("|f_k({r})| < c = {}", b.c), alloc::vec![k]);
        }
    }
    AssumptionCheck::pass(format!(
        "m_k = {}, c = {}, s = {}",
        model.law(k).ac_mass(),
        b.c,
        b.s
    ))
}

/// Checks each assumption on the window and reports witnesses for failures.
pub fn validate_assumptions(model: &RandomPotentialModel) -> AssumptionReport {
    let dim = model.dim();
    let p = potentials_with_sites(&model.potentials)
        .iter()
        .map(|(_, f)| f.p_exponent)
        .fold(f64::INFINITY, f64::min);
    let background_lp = if model.background.validate().is_err() {
        AssumptionCheck::fail(String::from("malformed background"), Vec::new())
    } else if !exponent_ok(dim, p) {
        AssumptionCheck::fail(
            format!("exponent p = {p} violates p ≥ 2 (d ≤ 3) / p > d/2 (d > 3)"),
            Vec::new(),
        )
    } else {
        let n = model.background.local_lp_norm(dim, p);
        if n.is_finite() {
            AssumptionCheck::pass(format!("‖V₀‖_(p,unif) ≈ {n}"))
        } else {
            AssumptionCheck::fail(String::from("background not locally L^p"), Vec::new())
        }
    };

    let r_sigma = model.sites.r_sigma();
    let separation = match model.sites.closest_pair() {
        Some((i, j)) if !(r_sigma > 0.0) => {
            AssumptionCheck::fail(format!("sites {i} and {j} coincide"), alloc::vec![i, j])
        }
        Some((i, j)) => {
            let mut c = AssumptionCheck::pass(format!("r_Σ = {r_sigma}"));
            c.witness = alloc::vec![i, j];
            c
        }
        None => AssumptionCheck::pass(String::from("fewer than two sites")),
    };

    let q = (dim as f64 + 1.0) / 2.0;
    let bounded = model.background.sup_abs().is_finite()
        && potentials_with_sites(&model.potentials)
            .iter()
            .all(|(_, f)| f.profile.sup_abs().is_finite());
    let integrability = if bounded {
        AssumptionCheck::pass(format!(
            "bounded background and single-site potentials are in L^{q}_loc"
        ))
    } else {
        AssumptionCheck::fail(
            format!("unbounded data; L^{q}_loc not verified"),
            Vec::new(),
        )
    };

    AssumptionReport {
        background_lp,
        separation,
        single_site: check_single_site(model),
        laws: check_laws(model),
        distinguished: model.distinguished.map(|k| check_distinguished(model, k)),
        integrability,
        r_sigma,
    }
}

/// Counts of sites in unit annuli, normalized by `R^{m-1} ∨ 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuasiDimensionReport {
    pub m: f64,
    /// `max_R #(Σ ∩ A_{R,R+1}) / (R^{m-1} ∨ 1)`.
    pub c: f64,
    pub argmax_r: f64,
    /// No growth trend in the second half of the `R` range.
    pub pass: bool,
    /// Fitted slope of the normalized counts over the second half.
    pub slope: f64,
    /// `max_{R ≥ 1} #(Σ ∩ B(0,R)) / R`.
    pub cumulative_c: f64,
    pub cumulative_pass: bool,
    pub counts: Vec<(f64, usize)>,
}

/// Relative growth over the second half of a series, from a least-squares
/// line.
fn growth_trend(rs: &[f64], vals: &[f64]) -> (f64, bool) {
    let half = rs.len() / 2;
    let (xs, ys) = (&rs[half..], &vals[half..]);
    let Some((slope, _, _)) = linear_fit(xs, ys) else {
        return (0.0, true);
    };
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let span = xs[xs.len() - 1] - xs[0];
    (slope, slope * span <= 0.25 * mean.max(1e-12))
}

/// Empirical constant in `#(Σ ∩ A_{R,R+1}) ≤ C R^{m-1}` over
/// `R ∈ {0, ½, 1, …, R_max}`, with a slope test for boundedness and the
/// cumulative variant `#(Σ ∩ B(0,R)) ≤ C R`.
pub fn quasi_dimension_bound(sites: &SiteSet, m: f64, r_max: f64) -> Result<QuasiDimensionReport> {
    if !(m >= 1.0) {
        return Err(invalid("quasi-dimension m must be >= 1"));
    }
    if !(r_max >= 1.0) {
        return Err(invalid("R_max must be >= 1"));
    }
    if r_max + 1.0 > sites.window_radius() + 1e-9 {
        return Err(Error::WindowTooSmall {
            needed: r_max + 1.0,
            covered: sites.window_radius(),
        });
    }
    let steps = math::floor(2.0 * r_max) as usize;
    let mut rs = Vec::with_capacity(steps + 1);
    let mut normalized = Vec::with_capacity(steps + 1);
    let mut counts = Vec::with_capacity(steps + 1);
    let mut best = (0.0f64, 0.0f64);
    for k in 0..=steps {
        let r = 0.5 * k as f64;
        let count = sites.shell_range(r, r + 1.0).len();
        let norm = math::pow(r, m - 1.0).max(1.0);
        let v = count as f64 / norm;
        if v > best.0 {
            best = (v, r);
        }
        rs.push(r);
        normalized.push(v);
        counts.push((r, count));
    }
    let (slope, pass) = growth_trend(&rs, &normalized);

    let mut crs = Vec::new();
    let mut cvals = Vec::new();
    let mut cum_best = 0.0f64;
    for k in 2..=steps + 2 {
        let r = 0.5 * k as f64;
        let v = sites.closed_shell_range(0.0, r).len() as f64 / r;
        cum_best = cum_best.max(v);
        crs.push(r);
        cvals.push(v);
    }
    let (_, cumulative_pass) = growth_trend(&crs, &cvals);
    Ok(QuasiDimensionReport {
        m,
        c: best.0,
        argmax_r: best.1,
        pass,
        slope,
        cumulative_c: cum_best,
        cumulative_pass,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CouplingLaw, Profile};
    use alloc::vec;

    fn model(sites: SiteSet, profile: Profile, rho: f64) -> RandomPotentialModel {
        let dim = sites.dim();
        let mut f = SingleSitePotential::from_profile(profile, dim, 2.0).unwrap();
        f.rho = rho;
        RandomPotentialModel::new(
            sites,
            PotentialRule::Shared(f),
            LawRule::Shared {
                law: CouplingLaw::Bernoulli { p: 0.2 },
            },
        )
        .unwrap()
    }

    #[test]
    fn lattice_model_passes() {
        let m = model(
            SiteSet::lattice(2, 5.0).unwrap(),
            Profile::Bump {
                height: 1.0,
                radius: 0.5,
            },
            0.5,
        );
        let r = validate_assumptions(&m);
        assert!(r.all_pass(), "{r:?}");
        assert_eq!(r.r_sigma, 1.0);
    }

    #[test]
    fn duplicated_site_fails_separation() {
        let s = SiteSet::explicit(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]],
            None,
        )
        .unwrap();
        let m = model(
            s,
            Profile::Indicator {
                height: 1.0,
                radius: 0.3,
            },
            0.3,
        );
        let r = validate_assumptions(&m);
        assert!(!r.separation.pass);
        assert_eq!(r.separation.witness.len(), 2);
    }

    #[test]
    fn support_larger_than_rho_fails() {
        let m = model(
            SiteSet::lattice(1, 4.0).unwrap(),
            Profile::Indicator {
                height: 1.0,
                radius: 2.0,
            },
            1.0,
        );
        assert!(!validate_assumptions(&m).single_site.pass);
    }

    #[test]
    fn distinguished_site_checks() {
        let sites = SiteSet::lattice(1, 4.0).unwrap();
        let f = SingleSitePotential::from_profile(
            Profile::Indicator {
                height: -3.0,
                radius: 0.5,
            },
            1,
            2.0,
        )
        .unwrap()
        .with_lower_bump(3.0, 0.5);
        let m = RandomPotentialModel::new(
            sites,
            PotentialRule::Shared(f),
            LawRule::Shared {
                law: CouplingLaw::Uniform { lo: 0.0, hi: 1.0 },
            },
        )
        .unwrap()
        .with_distinguished(0)
        .unwrap();
        assert!(validate_assumptions(&m).distinguished.unwrap().pass);
    }

    #[test]
    fn quasi_dimension_examples() {
        let line = SiteSet::tube(vec![vec![0.0]], 41.0).unwrap();
        let q = quasi_dimension_bound(&line, 1.0, 40.0).unwrap();
        assert!(q.pass);
        assert_eq!(q.c, 2.0);
        assert!(q.cumulative_pass);

        let plane = SiteSet::lattice(2, 41.0).unwrap();
        assert!(!quasi_dimension_bound(&plane, 1.0, 40.0).unwrap().pass);
        let q2 = quasi_dimension_bound(&plane, 2.0, 40.0).unwrap();
        assert!(q2.pass);
        assert!(q2.c <= 8.0 * crate::math::PI);
        assert!(quasi_dimension_bound(&plane, 2.0, 45.0).is_err());
    }
}
