//! Random potential models: site sets, coupling laws, single-site
//! potentials, counter-based sampling of couplings and assumption checks.

mod checks;
mod law;
mod potential;
mod sites;

use alloc::vec::Vec;

pub use checks::{
    quasi_dimension_bound, validate_assumptions, AssumptionCheck, AssumptionReport,
    QuasiDimensionReport,
};
pub use law::{CouplingLaw, LawRule};
pub use potential::{Background, LowerBump, Profile, Sign, SingleSitePotential};
pub use sites::{Generator, SiteSet};

use crate::error::{invalid, Result};
use crate::geometry::RegionSet;
use crate::math::{self, sqrt};
use crate::rng::{mix2, point_key, Stream};

/// Single-site potential assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialRule {
    Shared(SingleSitePotential),
    PerSite(Vec<SingleSitePotential>),
}

impl PotentialRule {
    pub fn get(&self, index: usize) -> &SingleSitePotential {
        match self {
            PotentialRule::Shared(f) => f,
            PotentialRule::PerSite(v) => &v[index],
        }
    }

    /// Largest reach over all sites.
    pub fn max_reach(&self) -> f64 {
        match self {
            PotentialRule::Shared(f) => f.reach(),
            PotentialRule::PerSite(v) => v.iter().map(|f| f.reach()).fold(0.0, f64::max),
        }
    }

    /// Largest declared support radius `ρ`.
    pub fn max_rho(&self) -> f64 {
        match self {
            PotentialRule::Shared(f) => f.rho,
            PotentialRule::PerSite(v) => v.iter().map(|f| f.rho).fold(0.0, f64::max),
        }
    }
}

/// `H(ω) = -Δ + V₀ + Σ_i ω_i f_i(x - i)` restricted to a site window.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomPotentialModel {
    pub sites: SiteSet,
    pub potentials: PotentialRule,
    pub laws: LawRule,
    pub background: Background,
    pub distinguished: Option<usize>,
}

impl RandomPotentialModel {
    pub fn new(sites: SiteSet, potentials: PotentialRule, laws: LawRule) -> Result<Self> {
        if let PotentialRule::PerSite(v) = &potentials {
            if v.len() != sites.len() {
                return Err(invalid("one single-site potential per site required"));
            }
        }
        if let LawRule::PerSite { laws: v } = &laws {
            if v.len() != sites.len() {
                return Err(invalid("one coupling law per site required"));
            }
        }
        laws.validate()?;
        Ok(RandomPotentialModel {
            sites,
            potentials,
            laws,
            background: Background::Zero,
            distinguished: None,
        })
    }

    pub fn with_background(mut self, background: Background) -> Self {
        self.background = background;
        self
    }

    pub fn with_distinguished(mut self, site: usize) -> Result<Self> {
        if site >= self.sites.len() {
            return Err(invalid("distinguished site outside the window"));
        }
        self.distinguished = Some(site);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.sites.dim()
    }

    pub fn law(&self, i: usize) -> CouplingLaw {
        self.laws.law(i, self.sites.site_norm(i))
    }

    /// `p_i(ε) = μ_i([ε, 1])`.
    pub fn p_epsilon(&self, i: usize, eps: f64) -> Result<f64> {
        self.law(i).p_epsilon(eps)
    }

    /// `μ_i((ε, 1])`.
    pub fn exceed(&self, i: usize, eps: f64) -> f64 {
        self.laws.exceed(i, self.sites.site_norm(i), eps)
    }

    /// Uniform variate driving the coupling of site `i` under `seed`.
    pub fn site_uniform(&self, seed: u64, i: usize) -> f64 {
        Stream::new(mix2(seed, point_key(self.sites.site(i))), 0).next_f64()
    }

    /// `ω_i` under `seed`: the quantile of `μ_i` at the site's own uniform.
    pub fn coupling(&self, seed: u64, i: usize) -> f64 {
        self.law(i).quantile(self.site_uniform(seed, i))
    }

    /// `sup_x ‖V₀ + V_ω‖` style bound on `|V|`, valid for every `ω`.
    pub fn potential_sup_bound(&self) -> f64 {
        let r_sigma = self.sites.r_sigma();
        let reach = self.potentials.max_reach();
        let overlap = if r_sigma.is_finite() && r_sigma > 0.0 {
            // Sites within a ball of radius `reach` are `r_σ`-separated.
            let k = (2.0 * reach / r_sigma + 1.0).max(1.0);
            math::powi(k, self.dim() as i32)
        } else {
            self.sites.len() as f64
        };
        let f_sup = match &self.potentials {
            PotentialRule::Shared(f) => f.profile.sup_abs(),
            PotentialRule::PerSite(v) => v.iter().map(|f| f.profile.sup_abs()).fold(0.0, f64::max),
        };
        self.background.sup_abs() + overlap * f_sup
    }
}

/// Sampled couplings on a window, in canonical site order (`None` for sites
/// outside the window).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMap {
    pub seed: u64,
    pub values: Vec<Option<f64>>,
    /// Radius `R` such that every site with `|i| ≤ R` was sampled.
    pub coverage: f64,
}

impl CouplingMap {
    pub fn get(&self, i: usize) -> Option<f64> {
        self.values.get(i).copied().flatten()
    }

    /// Replaces every sampled value by `v`.
    pub fn constant(model: &RandomPotentialModel, v: f64, coverage: f64) -> Self {
        let values = model
            .sites
            .norms()
            .iter()
            .map(|&r| if r <= coverage { Some(v) } else { None })
            .collect();
        CouplingMap {
            seed: 0,
            values,
            coverage,
        }
    }

    /// Sampled map with selected values overwritten; used to build
    /// deterministic configurations.
    pub fn with_value(mut self, i: usize, v: f64) -> Self {
        if i < self.values.len() {
            self.values[i] = Some(v);
        }
        self
    }

    /// `ω̃_i = min(ω_i, ε)`.
    pub fn truncate(&self, eps: f64) -> CouplingMap {
        CouplingMap {
            seed: self.seed,
            values: self.values.iter().map(|v| v.map(|x| x.min(eps))).collect(),
            coverage: self.coverage,
        }
    }
}

/// Independent draws for every site inside `window`. Each site's value is a
/// function of `(seed, site coordinates)` only.
pub fn sample_couplings(
    model: &RandomPotentialModel,
    seed: u64,
    window: &RegionSet,
) -> Result<CouplingMap> {
    if window.dim != model.dim() {
        return Err(invalid("window dimension differs from the model"));
    }
    let values = (0..model.sites.len())
        .map(|i| {
            if window.contains(model.sites.site(i)) {
                Some(model.coupling(seed, i))
            } else {
                None
            }
        })
        .collect();
    let coverage = window
        .inscribed_radius_about_origin()
        .min(model.sites.window_radius());
    Ok(CouplingMap {
        seed,
        values,
        coverage,
    })
}

/// Couplings for all sites with `|i| ≤ radius`.
pub fn sample_couplings_in_ball(
    model: &RandomPotentialModel,
    seed: u64,
    radius: f64,
) -> CouplingMap {
    let values = (0..model.sites.len())
        .map(|i| {
            if model.sites.site_norm(i) <= radius {
                Some(model.coupling(seed, i))
            } else {
                None
            }
        })
        .collect();
    CouplingMap {
        seed,
        values,
        coverage: radius.min(model.sites.window_radius()),
    }
}

/// `V(x)` with a flag telling whether a contributing site was unsampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub truncated: bool,
}

/// `V_ω(x) = Σ_i ω_i f_i(x - i)`, plus `V₀(x)` when requested.
pub fn evaluate_potential(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    x: &[f64],
    include_background: bool,
) -> PotentialValue {
    let reach = model.potentials.max_reach();
    let mut value = if include_background {
        model.background.at(x)
    } else {
        0.0
    };
    let mut truncated = math::norm(x) + reach > couplings.coverage;
    let mut offset = alloc::vec![0.0; x.len()];
    for i in model.sites.sites_near(x, reach) {
        let site = model.sites.site(i);
        for k in 0..x.len() {
            offset[k] = x[k] - site[k];
        }
        let f = model.potentials.get(i).eval(&offset);
        if f == 0.0 {
            continue;
        }
        match couplings.get(i) {
            Some(w) => value += w * f,
            None => truncated = true,
        }
    }
    PotentialValue { value, truncated }
}

/// `W(x) = (𝔼 V_ω(x)²)^{1/2} = ((Σ m₁ f)² + Σ (m₂ - m₁²) f²)^{1/2}` for
/// independent couplings with moments `m₁`, `m₂`.
pub fn second_moment_profile(model: &RandomPotentialModel, x: &[f64]) -> f64 {
    let reach = model.potentials.max_reach();
    let mut mean = 0.0;
    let mut var = 0.0;
    let mut offset = alloc::vec![0.0; x.len()];
    for i in model.sites.sites_near(x, reach) {
        let site = model.sites.site(i);
        for k in 0..x.len() {
            offset[k] = x[k] - site[k];
        }
        let f = model.potentials.get(i).eval(&offset);
        if f == 0.0 {
            continue;
        }
        let law = model.law(i);
        let m1 = law.mean();
        let m2 = law.second_moment();
        mean += m1 * f;
        var += (m2 - m1 * m1).max(0.0) * f * f;
    }
    sqrt(mean * mean + var)
}

/// Power-law fit `W(r·u) ≈ C r^{-κ}` along a ray.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub r2: f64,
    /// `κ > 1`: the decay regime in which the second-moment condition for
    /// absolutely continuous spectrum applies.
    pub exceeds_one: bool,
    pub samples: Vec<(f64, f64)>,
}

/// Fits the decay exponent of `W` along the ray `{r·direction}` over the
/// given radii, ignoring points where `W` vanishes.
pub fn fit_second_moment_decay(
    model: &RandomPotentialModel,
    direction: &[f64],
    radii: &[f64],
) -> Result<DecayFit> {
    let n = math::norm(direction);
    if n == 0.0 || direction.len() != model.dim() {
        return Err(invalid(
            "ray direction must be a nonzero vector of length d",
        ));
    }
    let u: Vec<f64> = direction.iter().map(|v| v / n).collect();
    let mut samples = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &r in radii {
        let x: Vec<f64> = u.iter().map(|v| v * r).collect();
        let w = second_moment_profile(model, &x);
        samples.push((r, w));
        if w > 0.0 && r > 0.0 {
            xs.push(math::ln(r));
            ys.push(math::ln(w));
        }
    }
    let (slope, _, r2) = math::linear_fit(&xs, &ys)
        .ok_or_else(|| invalid("fewer than two nonzero samples along the ray"))?;
    Ok(DecayFit {
        exponent: -slope,
        r2,
        exceeds_one: -slope > 1.0,
        samples,
    })
}
