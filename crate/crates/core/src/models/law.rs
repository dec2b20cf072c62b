use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;

const MASS_TOL: f64 = 1e-9;

/// Distribution `μ` of a single coupling `ω_i`, supported in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum CouplingLaw {
    /// `Σ w_k δ_{x_k}`.
    PointMasses { atoms: Vec<(f64, f64)> },
    /// Uniform on `[lo, hi]`; an atom when `lo == hi`.
    Uniform { lo: f64, hi: f64 },
    /// `(1 - p) δ₀ + p δ₁`.
    Bernoulli { p: f64 },
    /// Law of `q·ξ` with `ξ ~ Bernoulli(p)` and `q` uniform on `[lo, hi]`:
    /// `(1 - p) δ₀ + p·U[lo, hi]`.
    BernoulliUniform { p: f64, lo: f64, hi: f64 },
    /// `Σ w_k μ_k`.
    Mixture {
        components: Vec<(f64, Box<CouplingLaw>)>,
    },
}

impl CouplingLaw {
    /// Checks support `⊆ [0, 1]` and total mass 1.
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        match self {
            CouplingLaw::PointMasses { atoms } => {
                if atoms.is_empty() {
                    return Err(invalid("point-mass law without atoms"));
                }
                if atoms.iter().any(|(x, w)| !unit(*x) || !(*w >= 0.0)) {
                    return Err(invalid("atoms must lie in [0,1] with nonnegative weights"));
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(invalid("atom weights must sum to 1"));
                }
            }
            CouplingLaw::Uniform { lo, hi } => {
                if !(unit(*lo) && unit(*hi) && lo <= hi) {
                    return Err(invalid("uniform law needs 0 <= lo <= hi <= 1"));
                }
            }
            CouplingLaw::Bernoulli { p } => {
                if !unit(*p) {
                    return Err(invalid("Bernoulli parameter outside [0,1]"));
                }
            }
            CouplingLaw::BernoulliUniform { p, lo, hi } => {
                if !unit(*p) || !(unit(*lo) && unit(*hi) && lo <= hi) {
                    return Err(invalid("Bernoulli-uniform law needs p, lo, hi in [0,1]"));
                }
            }
            CouplingLaw::Mixture { components } => {
                if components.is_empty() {
                    return Err(invalid("empty mixture"));
                }
                let mut total = 0.0;
                for (w, c) in components {
                    if !(*w >= 0.0) {
                        return Err(invalid("negative mixture weight"));
                    }
                    c.validate()?;
                    total += w;
                }
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(invalid("mixture weights must sum to 1"));
                }
            }
        }
        Ok(())
    }

    /// `μ([0, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let uniform = |lo: f64, hi: f64| {
            if x < lo {
                0.0
            } else if x >= hi {
                1.0
            } else {
                (x - lo) / (hi - lo)
            }
        };
        match self {
            CouplingLaw::PointMasses { atoms } => {
                atoms.iter().filter(|a| a.0 <= x).map(|a| a.1).sum()
            }
            CouplingLaw::Uniform { lo, hi } => uniform(*lo, *hi),
            CouplingLaw::Bernoulli { p } => {
                if x < 0.0 {
                    0.0
                } else if x < 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            CouplingLaw::BernoulliUniform { p, lo, hi } => {
                if x < 0.0 {
                    0.0
                } else {
                    (1.0 - p) + p * uniform(*lo, *hi)
                }
            }
            CouplingLaw::Mixture { components } => {
                components.iter().map(|(w, c)| w * c.cdf(x)).sum()
            }
        }
    }

    /// `μ([0, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x) - self.atom_at(x)
    }

    /// `μ({x})`.
    pub fn atom_at(&self, x: f64) -> f64 {
        match self {
            CouplingLaw::PointMasses { atoms } => {
                atoms.iter().filter(|a| a.0 == x).map(|a| a.1).sum()
            }
            CouplingLaw::Uniform { lo, hi } => {
                if lo == hi && x == *lo {
                    1.0
                } else {
                    0.0
                }
            }
            CouplingLaw::Bernoulli { p } => {
                if x == 0.0 {
                    1.0 - p
                } else if x == 1.0 {
                    *p
                } else {
                    0.0
                }
            }
            CouplingLaw::BernoulliUniform { p, lo, hi } => {
                let zero = if x == 0.0 { 1.0 - p } else { 0.0 };
                let degenerate = if lo == hi && x == *lo { *p } else { 0.0 };
                zero + degenerate
            }
            CouplingLaw::Mixture { components } => {
                components.iter().map(|(w, c)| w * c.atom_at(x)).sum()
            }
        }
    }

    /// `p(ε) = μ([ε, 1])`.
    pub fn p_epsilon(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0) || eps > 1.0 {
            return Err(invalid("ε must lie in (0, 1]"));
        }
        Ok(self.tail(eps, true))
    }

    /// `μ((ε, 1])`: the probability that a site is not ε-free.
    pub fn exceed(&self, eps: f64) -> f64 {
        self.tail(eps, false)
    }

    /// `μ([x, ∞))` when `inclusive`, else `μ((x, ∞))`, summed directly so
    /// that atoms and parameters are reproduced without cancellation.
    pub fn tail(&self, x: f64, inclusive: bool) -> f64 {
        let above = |a: f64| if inclusive { a >= x } else { a > x };
        let uniform = |lo: f64, hi: f64| {
            if lo == hi {
                if above(lo) {
                    1.0
                } else {
                    0.0
                }
            } else if x <= lo {
                1.0
            } else if x >= hi {
                0.0
            } else {
                (hi - x) / (hi - lo)
            }
        };
        let t = match self {
            CouplingLaw::PointMasses { atoms } => {
                atoms.iter().filter(|a| above(a.0)).map(|a| a.1).sum()
            }
            CouplingLaw::Uniform { lo, hi } => uniform(*lo, *hi),
            CouplingLaw::Bernoulli { p } => {
                (if above(0.0) { 1.0 - p } else { 0.0 }) + if above(1.0) { *p } else { 0.0 }
            }
            CouplingLaw::BernoulliUniform { p, lo, hi } => {
                (if above(0.0) { 1.0 - p } else { 0.0 }) + p * uniform(*lo, *hi)
            }
            CouplingLaw::Mixture { components } => components
                .iter()
                .map(|(w, c)| w * c.tail(x, inclusive))
                .sum(),
        };
        t.clamp(0.0, 1.0)
    }

    /// Mass of the absolutely continuous part.
    pub fn ac_mass(&self) -> f64 {
        match self {
            CouplingLaw::PointMasses { .. } | CouplingLaw::Bernoulli { .. } => 0.0,
            CouplingLaw::Uniform { lo, hi } => {
                if lo < hi {
                    1.0
                } else {
                    0.0
                }
            }
            CouplingLaw::BernoulliUniform { p, lo, hi } => {
                if lo < hi {
                    *p
                } else {
                    0.0
                }
            }
            CouplingLaw::Mixture { components } => {
                components.iter().map(|(w, c)| w * c.ac_mass()).sum()
            }
        }
    }

    /// `∫ x dμ`.
    pub fn mean(&self) -> f64 {
        match self {
            CouplingLaw::PointMasses { atoms } => atoms.iter().map(|(x, w)| x * w).sum(),
            CouplingLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
            CouplingLaw::Bernoulli { p } => *p,
            CouplingLaw::BernoulliUniform { p, lo, hi } => p * 0.5 * (lo + hi),
            CouplingLaw::Mixture { components } => {
                components.iter().map(|(w, c)| w * c.mean()).sum()
            }
        }
    }

    /// `∫ x² dμ`.
    pub fn second_moment(&self) -> f64 {
        let uni = |lo: f64, hi: f64| (lo * lo + lo * hi + hi * hi) / 3.0;
        match self {
            CouplingLaw::PointMasses { atoms } => atoms.iter().map(|(x, w)| x * x * w).sum(),
            CouplingLaw::Uniform { lo, hi } => uni(*lo, *hi),
            CouplingLaw::Bernoulli { p } => *p,
            CouplingLaw::BernoulliUniform { p, lo, hi } => p * uni(*lo, *hi),
            CouplingLaw::Mixture { components } => {
                components.iter().map(|(w, c)| w * c.second_moment()).sum()
            }
        }
    }

    /// Generalized inverse `inf{x : μ([0,x]) ≥ u}` for `u ∈ [0, 1)`.
    ///
    /// Drawing `u` uniformly gives a sample of `μ`; feeding the same `u` to
    /// two laws gives a monotone coupling of them.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            CouplingLaw::Uniform { lo, hi } => lo + (hi - lo) * u,
            CouplingLaw::Bernoulli { p } => {
                if u < 1.0 - p {
                    0.0
                } else {
                    1.0
                }
            }
            CouplingLaw::BernoulliUniform { p, lo, hi } => {
                let q = 1.0 - p;
                if u < q {
                    0.0
                } else {
                    lo + (hi - lo) * ((u - q) / p).min(1.0)
                }
            }
            CouplingLaw::PointMasses { atoms } => {
                let mut sorted: Vec<(f64, f64)> = atoms.clone();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut acc = 0.0;
                for (x, w) in &sorted {
                    acc += w;
                    if u < acc {
                        return *x;
                    }
                }
                sorted.last().map(|a| a.0).unwrap_or(0.0)
            }
            CouplingLaw::Mixture { .. } => {
                if self.cdf(0.0) > u {
                    return 0.0;
                }
                let (mut a, mut b) = (0.0, 1.0);
                for _ in 0..64 {
                    let m = 0.5 * (a + b);
                    if self.cdf(m) > u {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                b
            }
        }
    }
}

/// Per-site law assignment, including radial decay rules.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "rule", rename_all = "snake_case")
)]
pub enum LawRule {
    Shared {
        law: CouplingLaw,
    },
    /// Bernoulli with `p_i = min(1, amplitude·|i|^{-τ})` (and `p = 1` at the
    /// origin).
    BernoulliDecay {
        tau: f64,
        #[cfg_attr(feature = "serde", serde(default = "one"))]
        amplitude: f64,
    },
    /// `q_i ξ_i` with `ξ_i` as in `BernoulliDecay` and `q_i ~ U[lo, hi]`.
    BernoulliUniformDecay {
        tau: f64,
        #[cfg_attr(feature = "serde", serde(default = "one"))]
        amplitude: f64,
        lo: f64,
        hi: f64,
    },
    /// One law per site in canonical site order.
    PerSite {
        laws: Vec<CouplingLaw>,
    },
}

#[cfg(feature = "serde")]
fn one() -> f64 {
    1.0
}

fn decay_probability(tau: f64, amplitude: f64, r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        (amplitude * math::pow(r, -tau)).min(1.0)
    }
}

impl LawRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            LawRule::Shared { law } => law.validate(),
            LawRule::BernoulliDecay { tau, amplitude } => {
                if !(*tau >= 0.0) || !(*amplitude >= 0.0) {
                    return Err(invalid("decay rule needs τ >= 0 and amplitude >= 0"));
                }
                Ok(())
            }
            LawRule::BernoulliUniformDecay {
                tau,
                amplitude,
                lo,
                hi,
            } => {
                if !(*tau >= 0.0) || !(*amplitude >= 0.0) {
                    return Err(invalid("decay rule needs τ >= 0 and amplitude >= 0"));
                }
                CouplingLaw::Uniform { lo: *lo, hi: *hi }.validate()
            }
            LawRule::PerSite { laws } => laws.iter().try_for_each(CouplingLaw::validate),
        }
    }

    /// Law of the site with canonical index `index` and norm `r`.
    pub fn law(&self, index: usize, r: f64) -> CouplingLaw {
        match self {
            LawRule::Shared { law } => law.clone(),
            LawRule::BernoulliDecay { tau, amplitude } => CouplingLaw::Bernoulli {
                p: decay_probability(*tau, *amplitude, r),
            },
            LawRule::BernoulliUniformDecay {
                tau,
                amplitude,
                lo,
                hi,
            } => CouplingLaw::BernoulliUniform {
                p: decay_probability(*tau, *amplitude, r),
                lo: *lo,
                hi: *hi,
            },
            LawRule::PerSite { laws } => laws
                .get(index)
                .cloned()
                .unwrap_or(CouplingLaw::Bernoulli { p: 0.0 }),
        }
    }

    /// `μ_i((ε, 1])` without building the law where possible.
    pub fn exceed(&self, index: usize, r: f64, eps: f64) -> f64 {
        match self {
            LawRule::BernoulliDecay { tau, amplitude } => {
                if eps < 1.0 {
                    decay_probability(*tau, *amplitude, r)
                } else {
                    0.0
                }
            }
            LawRule::Shared { law } => law.exceed(eps),
            _ => self.law(index, r).exceed(eps),
        }
    }
}
