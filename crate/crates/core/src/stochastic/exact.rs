use alloc::vec::Vec;

use super::estimate::ScaleSampler;
use crate::certify::first_free_radius;
use crate::error::{Error, Result};
use crate::models::RandomPotentialModel;

/// Largest number of random sites [`brute_force_a_n`] enumerates.
pub const ENUMERATION_BUDGET: usize = 24;

/// `(radius, P(ω_i > ε))` for the sites the scale depends on.
fn exceedances(s: &ScaleSampler<'_>) -> Vec<(f64, f64)> {
    let model = s.model();
    s.sites()
        .iter()
        .zip(s.laws())
        .map(|(&i, law)| (model.sites.site_norm(i), law.exceed(s.eps)))
        .collect()
}

/// Exact `a_n` by enumerating every pattern of `{ω_i ≤ ε, ω_i > ε}` over
/// the random sites of the scale and scanning each pattern for a free
/// annulus.
///
/// Sites with `P(ω_i > ε) ∈ {0, 1}` are deterministic and not enumerated.
pub fn brute_force_a_n(model: &RandomPotentialModel, eps: f64, a: f64, n: u32) -> Result<f64> {
    let s = ScaleSampler::new(model, eps, a, n)?;
    let all = exceedances(&s);
    let random: Vec<(f64, f64)> = all
        .iter()
        .copied()
        .filter(|&(_, p)| p > 0.0 && p < 1.0)
        .collect();
    if random.len() > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            sites: random.len(),
            limit: ENUMERATION_BUDGET,
        });
    }
    if s.degenerate {
        return Ok(0.0);
    }
    let always: Vec<f64> = all
        .iter()
        .filter(|&&(_, p)| p >= 1.0)
        .map(|&(r, _)| r)
        .collect();
    let width = n as f64;
    let mut total = 0.0;
    let mut bad = Vec::with_capacity(all.len());
    for mask in 0u32..(1u32 << random.len()) {
        let mut weight = 1.0;
        bad.clear();
        bad.extend_from_slice(&always);
        for (k, &(r, p)) in random.iter().enumerate() {
            if mask >> k & 1 == 1 {
                weight *= p;
                bad.push(r);
            } else {
                weight *= 1.0 - p;
            }
        }
        bad.sort_by(f64::total_cmp);
        if first_free_radius(&bad, s.lo, s.hi, width).is_none() {
            total += weight;
        }
    }
    Ok(total)
}

/// Exact `a_n` for any number of sites, by dynamic programming over the
/// distinct site radii.
///
/// No annulus `A_{r,r+n}`, `r ∈ [lo, hi]`, is free iff the bad radii form
/// a chain `lo = b_0 < b_1 < …` with `b_{k+1} ≤ b_k + n` that continues
/// until some `b_k > hi`. The chain is built one radius at a time: from
/// a bad radius `x ≤ hi`, the next bad radius is the first one above `x`
/// and must lie in `(x, x + n]`.
pub fn exact_a_n(model: &RandomPotentialModel, eps: f64, a: f64, n: u32) -> Result<f64> {
    let s = ScaleSampler::new(model, eps, a, n)?;
    if s.degenerate {
        return Ok(0.0);
    }
    // Group sites sharing a radius: the radius is bad iff any of them is.
    let mut radii: Vec<f64> = Vec::new();
    let mut q: Vec<f64> = Vec::new();
    for (r, p) in exceedances(&s) {
        if r <= s.lo {
            continue;
        }
        match radii.last() {
            Some(&last) if last == r => {
                let k = q.len() - 1;
                q[k] = 1.0 - (1.0 - q[k]) * (1.0 - p);
            }
            _ => {
                radii.push(r);
                q.push(p);
            }
        }
    }
    let width = n as f64;
    let m = radii.len();
    // mass[k]: probability that radius k is bad and the chain reached it.
    let mut mass = alloc::vec![0.0; m];
    let mut total = 0.0;
    let extend = |from: f64, start: usize, w: f64, mass: &mut [f64], total: &mut f64| {
        let mut none_before = 1.0;
        let mut k = start;
        while k < m && radii[k] <= from + width {
            let p = w * none_before * q[k];
            if radii[k] > s.hi {
                *total += p;
            } else {
                mass[k] += p;
            }
            none_before *= 1.0 - q[k];
            if none_before == 0.0 {
                break;
            }
            k += 1;
        }
    };
    extend(s.lo, 0, 1.0, &mut mass, &mut total);
    for k in 0..m {
        let w = mass[k];
        if w > 0.0 && radii[k] <= s.hi {
            extend(radii[k], k + 1, w, &mut mass, &mut total);
        }
    }
    Ok(total.clamp(0.0, 1.0))
}
