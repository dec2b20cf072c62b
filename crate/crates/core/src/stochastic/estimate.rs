use alloc::vec::Vec;
use core::ops::Range;

use crate::certify::{candidate_range, first_free_radius, required_coverage};
use crate::error::{invalid, Error, Result};
use crate::geometry::RegionSet;
use crate::math::sqrt;
use crate::models::{CouplingLaw, RandomPotentialModel};
use crate::rng::trial_seed;

/// Monte Carlo frequency with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateRecord {
    pub value: f64,
    pub trials: u64,
    /// `sqrt(value (1 - value) / trials)`.
    pub std_error: f64,
    pub seed: u64,
    /// Exact value of the same probability, when one is available.
    pub exact: Option<f64>,
    /// The event's range of definition is empty and the value is set to 0.
    pub degenerate: bool,
}

impl EstimateRecord {
    pub fn from_counts(hits: u64, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(invalid("at least one trial is required"));
        }
        if hits > trials {
            return Err(invalid("more hits than trials"));
        }
        let value = hits as f64 / trials as f64;
        Ok(EstimateRecord {
            value,
            trials,
            std_error: sqrt(value * (1.0 - value) / trials as f64),
            seed,
            exact: None,
            degenerate: false,
        })
    }

    pub fn with_exact(mut self, exact: f64) -> Self {
        self.exact = Some(exact);
        self
    }

    /// `|value - exact| / std_error`; infinite when the standard error
    /// vanishes but the values differ.
    pub fn z_score(&self) -> Option<f64> {
        let exact = self.exact?;
        let diff = (self.value - exact).abs();
        Some(if diff == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY
        } else {
            diff / self.std_error
        })
    }

    /// Whether the estimate lies within `k` standard errors of the exact
    /// value.
    pub fn within(&self, k: f64) -> Option<bool> {
        self.z_score().map(|z| z <= k)
    }
}

fn site_laws(model: &RandomPotentialModel, sites: &[usize]) -> Vec<CouplingLaw> {
    sites.iter().map(|&i| model.law(i)).collect()
}

/// Trials of the event "a fixed region is ε-free".
#[derive(Debug, Clone)]
pub struct AnnulusSampler<'a> {
    model: &'a RandomPotentialModel,
    eps: f64,
    sites: Vec<usize>,
    laws: Vec<CouplingLaw>,
}

impl<'a> AnnulusSampler<'a> {
    pub fn new(model: &'a RandomPotentialModel, region: &RegionSet, eps: f64) -> Result<Self> {
        let reach = region.max_norm();
        let window = model.sites.window_radius();
        if reach > window + 1e-12 {
            return Err(Error::WindowTooSmall {
                needed: reach,
                covered: window,
            });
        }
        let sites: Vec<usize> = model
            .sites
            .closed_shell_range(0.0, reach)
            .filter(|&i| region.contains(model.sites.site(i)))
            .collect();
        let laws = site_laws(model, &sites);
        Ok(AnnulusSampler {
            model,
            eps,
            sites,
            laws,
        })
    }

    /// Sites of the region, in canonical order.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// `∏_i (1 - P(ω_i > ε))`.
    pub fn exact(&self) -> f64 {
        self.laws.iter().map(|l| 1.0 - l.exceed(self.eps)).product()
    }

    pub fn is_free(&self, seed: u64) -> bool {
        self.sites
            .iter()
            .zip(&self.laws)
            .all(|(&i, law)| law.quantile(self.model.site_uniform(seed, i)) <= self.eps)
    }

    /// Number of free trials among `trials`.
    pub fn count(&self, seed: u64, trials: Range<u64>) -> u64 {
        trials
            .filter(|&t| self.is_free(trial_seed(seed, t)))
            .count() as u64
    }
}

/// Monte Carlo frequency of `region` being ε-free, with the exact product
/// over its sites as companion.
pub fn estimate_free_probability(
    model: &RandomPotentialModel,
    region: &RegionSet,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<EstimateRecord> {
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    let sampler = AnnulusSampler::new(model, region, eps)?;
    let hits = sampler.count(seed, 0..trials);
    Ok(EstimateRecord::from_counts(hits, trials, seed)?.with_exact(sampler.exact()))
}

/// Trials of the event "no `A_{r, r+n}` with `r ∈ [a^n, a^{n+1} - n]` is
/// ε-free".
#[derive(Debug, Clone)]
pub struct ScaleSampler<'a> {
    model: &'a RandomPotentialModel,
    pub eps: f64,
    pub a: f64,
    pub n: u32,
    pub lo: f64,
    pub hi: f64,
    pub degenerate: bool,
    sites: Vec<usize>,
    laws: Vec<CouplingLaw>,
}

impl<'a> ScaleSampler<'a> {
    pub fn new(model: &'a RandomPotentialModel, eps: f64, a: f64, n: u32) -> Result<Self> {
        if !(a > 1.0) || !a.is_finite() {
            return Err(invalid("growth ratio a must exceed 1"));
        }
        if n == 0 {
            return Err(invalid("annulus width n must be >= 1"));
        }
        let need = required_coverage(a, n);
        let window = model.sites.window_radius();
        if need > window + 1e-9 {
            return Err(Error::WindowTooSmall {
                needed: need,
                covered: window,
            });
        }
        let (lo, hi, degenerate) = candidate_range(a, n);
        let sites: Vec<usize> = model.sites.closed_shell_range(lo, hi + n as f64).collect();
        let laws = site_laws(model, &sites);
        Ok(ScaleSampler {
            model,
            eps,
            a,
            n,
            lo,
            hi,
            degenerate,
            sites,
            laws,
        })
    }

    /// Sites with `a^n ≤ |i| ≤ a^{n+1}`: the only ones the event depends on.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub(crate) fn laws(&self) -> &[CouplingLaw] {
        &self.laws
    }

    pub(crate) fn model(&self) -> &RandomPotentialModel {
        self.model
    }

    /// Whether the scale has no free annulus under coupling seed `seed`.
    pub fn not_free(&self, seed: u64, bad: &mut Vec<f64>) -> bool {
        bad.clear();
        for (&i, law) in self.sites.iter().zip(&self.laws) {
            if law.quantile(self.model.site_uniform(seed, i)) > self.eps {
                bad.push(self.model.sites.site_norm(i));
            }
        }
        first_free_radius(bad, self.lo, self.hi, self.n as f64).is_none()
    }

    /// Number of trials in `trials` without a free annulus. Always 0 for a
    /// degenerate scale.
    pub fn count(&self, seed: u64, trials: Range<u64>) -> u64 {
        if self.degenerate {
            return 0;
        }
        let mut bad = Vec::new();
        trials
            .filter(|&t| self.not_free(trial_seed(seed, t), &mut bad))
            .count() as u64
    }
}

/// Monte Carlo estimate of `a_n`. Degenerate scales (`a^{n+1} - n < a^n`)
/// have an empty range of radii; they report 0 and are flagged.
pub fn estimate_a_n(
    model: &RandomPotentialModel,
    eps: f64,
    a: f64,
    n: u32,
    trials: u64,
    seed: u64,
) -> Result<EstimateRecord> {
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    let sampler = ScaleSampler::new(model, eps, a, n)?;
    let hits = sampler.count(seed, 0..trials);
    let mut rec = EstimateRecord::from_counts(hits, trials, seed)?;
    rec.degenerate = sampler.degenerate;
    Ok(rec)
}
