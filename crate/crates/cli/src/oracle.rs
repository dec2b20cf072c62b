//! Direct exact values of `a_n` for small configurations.

use std::time::Instant;

use anyhow::{bail, Result};
use serde::Serialize;
use sparseloc_core::certify::required_coverage;
use sparseloc_core::models::{
    CouplingLaw, LawRule, PotentialRule, Profile, RandomPotentialModel, SingleSitePotential,
    SiteSet,
};
use sparseloc_core::stochastic::{brute_force_a_n, exact_a_n, ScaleSampler, ENUMERATION_BUDGET};

#[derive(Debug, Clone, Serialize)]
pub struct AnOracle {
    pub a: f64,
    pub n: u32,
    pub eps: f64,
    pub exact: f64,
    pub method: &'static str,
    /// Sites in the scan range whose state is not certain.
    pub random_sites: usize,
    pub lo: f64,
    pub hi: f64,
    pub degenerate: bool,
    pub elapsed_s: f64,
}

/// `ℤ ∩ [-R, R]` with `Bernoulli(p)` couplings on `lo ≤ |i| ≤ hi` and zero
/// couplings elsewhere. `R` defaults to the window scale `n` needs.
pub fn line_model(p: f64, lo: f64, hi: f64, radius: f64) -> Result<RandomPotentialModel> {
    if !(0.0..=1.0).contains(&p) {
        bail!("p must lie in [0, 1]");
    }
    if !(lo <= hi) {
        bail!("shell needs lo <= hi");
    }
    let sites = SiteSet::lattice(1, radius)?;
    let laws = (0..sites.len())
        .map(|i| {
            let r = sites.site_norm(i);
            let q = if r >= lo && r <= hi { p } else { 0.0 };
            CouplingLaw::Bernoulli { p: q }
        })
        .collect();
    let f = SingleSitePotential::from_profile(
        Profile::Indicator {
            height: 1.0,
            radius: 0.25,
        },
        1,
        2.0,
    )?;
    Ok(RandomPotentialModel::new(
        sites,
        PotentialRule::Shared(f),
        LawRule::PerSite { laws },
    )?)
}

/// Window radius a line model needs for scale `n`.
pub fn line_radius(a: f64, n: u32) -> f64 {
    required_coverage(a, n).ceil() + 1.0
}

/// Exact `a_n`, by enumeration when the uncertain sites fit the budget and
/// by the radius recursion otherwise.
pub fn oracle_an(model: &RandomPotentialModel, eps: f64, a: f64, n: u32) -> Result<AnOracle> {
    let start = Instant::now();
    let sampler = ScaleSampler::new(model, eps, a, n)?;
    let random_sites = sampler
        .sites()
        .iter()
        .filter(|&&i| {
            let q = model.exceed(i, eps);
            q > 0.0 && q < 1.0
        })
        .count();
    let (exact, method) = if random_sites <= ENUMERATION_BUDGET {
        (brute_force_a_n(model, eps, a, n)?, "enumeration")
    } else {
        (exact_a_n(model, eps, a, n)?, "dynamic-programming")
    };
    Ok(AnOracle {
        a,
        n,
        eps,
        exact,
        method,
        random_sites,
        lo: sampler.lo,
        hi: sampler.hi,
        degenerate: sampler.degenerate,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}
