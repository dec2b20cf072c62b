use alloc::vec::Vec;
use core::ops::RangeInclusive;

use super::bounds::{
    a_n_bound, best_eta, empirical_shell_constant, product_bound, BoundValue, ShellConstant,
};
use super::estimate::{EstimateRecord, ScaleSampler};
use super::exact::{brute_force_a_n, exact_a_n, ENUMERATION_BUDGET};
use crate::error::{invalid, Result};
use crate::math::{linear_fit, pow};
use crate::models::RandomPotentialModel;

/// How an exact `a_n` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ExactMethod {
    Enumeration,
    DynamicProgramming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Summability {
    Summable,
    NotSummable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ANSeriesRow {
    pub n: u32,
    pub exact: f64,
    pub method: ExactMethod,
    pub estimate: Option<EstimateRecord>,
    /// Closed-form bound at the tightest admissible `η`, when one exists.
    pub closed_form: Option<BoundValue>,
    pub eta: Option<f64>,
    /// Product over disjoint annuli of the probability of not being free.
    pub product_bound: f64,
    pub degenerate: bool,
    pub partial_sum: f64,
}

impl ANSeriesRow {
    /// Tightest available upper bound on `a_n`.
    pub fn bound(&self) -> f64 {
        match self.closed_form {
            Some(b) => b.value.min(self.product_bound),
            None => self.product_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ANSeriesReport {
    pub a: f64,
    pub eps: f64,
    pub rows: Vec<ANSeriesRow>,
    pub verdict: Summability,
    /// Geometric-mean ratio of consecutive values over the upper half of
    /// the range.
    pub tail_ratio: Option<f64>,
    /// Empirical constant in `card(A_{r,r+n} ∩ Σ) ≤ C n r^{d-1}`.
    pub shell_constant: Option<ShellConstant>,
}

/// Exact value, bounds and (with `trials > 0`) a Monte Carlo estimate of
/// `a_n`. Rows for different `n` share the coupling realizations of each
/// trial.
pub fn an_series_row(
    model: &RandomPotentialModel,
    eps: f64,
    a: f64,
    n: u32,
    trials: u64,
    seed: u64,
) -> Result<ANSeriesRow> {
    let sampler = ScaleSampler::new(model, eps, a, n)?;
    let random = sampler
        .sites()
        .iter()
        .filter(|&&i| {
            let p = model.exceed(i, eps);
            p > 0.0 && p < 1.0
        })
        .count();
    let (exact, method) = if random <= ENUMERATION_BUDGET {
        (brute_force_a_n(model, eps, a, n)?, ExactMethod::Enumeration)
    } else {
        (
            exact_a_n(model, eps, a, n)?,
            ExactMethod::DynamicProgramming,
        )
    };
    let estimate = if trials > 0 {
        let hits = sampler.count(seed, 0..trials);
        let mut rec = EstimateRecord::from_counts(hits, trials, seed)?.with_exact(exact);
        rec.degenerate = sampler.degenerate;
        Some(rec)
    } else {
        None
    };
    let (product, min_free) = product_bound(model, eps, a, n)?;
    let eta = best_eta(a, n, min_free);
    let closed_form = match eta {
        Some(e) => Some(a_n_bound(a, e, n)?),
        None => None,
    };
    Ok(ANSeriesRow {
        n,
        exact,
        method,
        estimate,
        closed_form,
        eta,
        product_bound: product,
        degenerate: sampler.degenerate,
        partial_sum: 0.0,
    })
}

impl ANSeriesReport {
    /// Assembles rows (in any order) into a report with partial sums and a
    /// summability verdict.
    pub fn from_rows(a: f64, eps: f64, mut rows: Vec<ANSeriesRow>) -> Self {
        rows.sort_by_key(|r| r.n);
        let mut sum = 0.0;
        for r in &mut rows {
            sum += r.exact;
            r.partial_sum = sum;
        }
        let (verdict, tail_ratio) = summability(&rows);
        ANSeriesReport {
            a,
            eps,
            rows,
            verdict,
            tail_ratio,
            shell_constant: None,
        }
    }
}

fn summability(rows: &[ANSeriesRow]) -> (Summability, Option<f64>) {
    let live: Vec<&ANSeriesRow> = rows.iter().filter(|r| !r.degenerate).collect();
    let half = &live[live.len() / 2..];
    if half.len() < 2 {
        return (Summability::Inconclusive, None);
    }
    let values: Vec<f64> = half.iter().map(|r| r.exact).collect();
    if values.iter().all(|&v| v == 0.0) {
        return (Summability::Summable, Some(0.0));
    }
    let first = values[0];
    let last = values[values.len() - 1];
    if first == 0.0 || last >= 1.0 - 1e-12 {
        return (Summability::NotSummable, Some(1.0));
    }
    let ratio = pow(last / first, 1.0 / (values.len() - 1) as f64);
    let xs: Vec<f64> = half.iter().map(|r| r.n as f64).collect();
    let decreasing = linear_fit(&xs, &values).is_some_and(|(slope, _, _)| slope < 0.0);
    let verdict = if decreasing && ratio < 1.0 {
        Summability::Summable
    } else {
        Summability::NotSummable
    };
    (verdict, Some(ratio))
}

/// Per-scale exact values, estimates and bounds for `a_n` over `scales`,
/// with partial sums and an empirical summability verdict.
pub fn borel_cantelli_report(
    model: &RandomPotentialModel,
    eps: f64,
    a: f64,
    scales: RangeInclusive<u32>,
    trials: u64,
    seed: u64,
) -> Result<ANSeriesReport> {
    if scales.is_empty() || *scales.start() == 0 {
        return Err(invalid("scale range must be nonempty and start at n >= 1"));
    }
    let ns: Vec<u32> = scales.collect();
    let rows = ns
        .iter()
        .map(|&n| an_series_row(model, eps, a, n, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ANSeriesReport::from_rows(a, eps, rows);
    report.shell_constant =
        empirical_shell_constant(&model.sites, &ns, model.sites.window_radius()).ok();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        CouplingLaw, LawRule, PotentialRule, Profile, SingleSitePotential, SiteSet,
    };

    fn model(law: LawRule, dim: usize, radius: f64) -> RandomPotentialModel {
        let f = SingleSitePotential::from_profile(
            Profile::Indicator {
                height: 1.0,
                radius: 0.25,
            },
            dim,
            2.0,
        )
        .unwrap();
        RandomPotentialModel::new(
            SiteSet::lattice(dim, radius).unwrap(),
            PotentialRule::Shared(f),
            law,
        )
        .unwrap()
    }

    #[test]
    fn trivial_series() {
        let zero = model(
            LawRule::Shared {
                law: CouplingLaw::Bernoulli { p: 0.0 },
            },
            2,
            64.0,
        );
        let r = borel_cantelli_report(&zero, 0.5, 2.0, 1..=5, 50, 3).unwrap();
        assert!(r.rows.iter().all(|row| row.exact == 0.0));
        assert_eq!(r.verdict, Summability::Summable);

        let one = model(
            LawRule::Shared {
                law: CouplingLaw::Bernoulli { p: 1.0 },
            },
            2,
            64.0,
        );
        let r = borel_cantelli_report(&one, 0.5, 2.0, 1..=5, 50, 3).unwrap();
        assert!(r.rows.iter().all(|row| row.exact == 1.0));
        assert_eq!(r.verdict, Summability::NotSummable);
        assert!(r
            .rows
            .windows(2)
            .all(|w| w[0].partial_sum <= w[1].partial_sum));
    }
}
