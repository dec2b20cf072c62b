use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{exp, pow};
use crate::models::{RandomPotentialModel, SiteSet};

/// Number of grid points used when choosing `η ∈ (0, 1 - 1/a)`.
pub const ETA_GRID: usize = 1000;

/// A probability bound that may exceed 1.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundValue {
    pub value: f64,
    /// `value ≥ 1`: the bound says nothing.
    pub vacuous: bool,
}

/// `exp(-(1-η)^n (a^n (a-1)/n - 1))`.
pub fn a_n_bound(a: f64, eta: f64, n: u32) -> Result<BoundValue> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("η must lie in (0, 1)"));
    }
    if !(a * (1.0 - eta) > 1.0) {
        return Err(invalid(
            "a(1 - η) must exceed 1 for the bound to be summable",
        ));
    }
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let nf = n as f64;
    let value = exp(-pow(1.0 - eta, nf) * (pow(a, nf) * (a - 1.0) / nf - 1.0));
    Ok(BoundValue {
        value,
        vacuous: value >= 1.0,
    })
}

/// Smallest grid value of `η ∈ (0, 1 - 1/a)` with `(1-η)^n ≤ min_free`,
/// i.e. the tightest admissible `η` at scale `n` given the smallest
/// free-annulus probability `min_free` among the disjoint annuli.
pub fn best_eta(a: f64, n: u32, min_free: f64) -> Option<f64> {
    if !(a > 1.0) || n == 0 || !(min_free > 0.0) {
        return None;
    }
    let eta_min = 1.0 - pow(min_free.min(1.0), 1.0 / n as f64);
    let top = 1.0 - 1.0 / a;
    (1..ETA_GRID)
        .map(|k| k as f64 / ETA_GRID as f64 * top)
        .find(|&eta| eta >= eta_min)
}

/// The disjoint annuli `A_{a^n + jn, a^n + (j+1)n}` with
/// `a^n + (j+1)n ≤ a^{n+1}`.
pub fn disjoint_annuli(a: f64, n: u32) -> Vec<(f64, f64)> {
    let nf = n as f64;
    let lo = pow(a, nf);
    let hi = pow(a, nf + 1.0);
    let mut out = Vec::new();
    let mut j = 0.0;
    while lo + (j + 1.0) * nf <= hi {
        out.push((lo + j * nf, lo + (j + 1.0) * nf));
        j += 1.0;
    }
    out
}

/// `∏_j (1 - P(A_j is ε-free))` over [`disjoint_annuli`]: an upper bound on
/// `a_n` by independence, together with `min_j P(A_j is ε-free)`.
pub fn product_bound(model: &RandomPotentialModel, eps: f64, a: f64, n: u32) -> Result<(f64, f64)> {
    let annuli = disjoint_annuli(a, n);
    let need = pow(a, n as f64 + 1.0);
    let window = model.sites.window_radius();
    if need > window + 1e-9 {
        return Err(Error::WindowTooSmall {
            needed: need,
            covered: window,
        });
    }
    let mut bound = 1.0;
    let mut min_free = 1.0f64;
    for (r, big) in annuli {
        let free: f64 = model
            .sites
            .shell_range(r, big)
            .map(|i| 1.0 - model.exceed(i, eps))
            .product();
        bound *= 1.0 - free;
        min_free = min_free.min(free);
    }
    Ok((bound, min_free))
}

/// `(1 - δ)^{-C}`: growth ratios above it make free annuli in a
/// quasi-one-dimensional site set summably frequent.
pub fn quasi1d_threshold(delta: f64, c: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(invalid("δ must lie in [0, 1)"));
    }
    if !(c >= 1.0) || !c.is_finite() {
        return Err(invalid("C must be at least 1"));
    }
    Ok(pow(1.0 - delta, -c))
}

/// Empirical `C = max card(A_{r,r+n} ∩ Σ) / (n r^{d-1})` over `r ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShellConstant {
    pub c: f64,
    pub n: u32,
    pub r: f64,
}

/// Maximizes the normalized count over `r ∈ [1, r_max - n]` for each `n`.
/// The ratio only increases where `r + n` reaches a site norm, so those
/// points and `r = 1` are the only candidates.
pub fn empirical_shell_constant(sites: &SiteSet, ns: &[u32], r_max: f64) -> Result<ShellConstant> {
    if r_max > sites.window_radius() + 1e-9 {
        return Err(Error::WindowTooSmall {
            needed: r_max,
            covered: sites.window_radius(),
        });
    }
    let d = sites.dim() as f64;
    let mut best = ShellConstant {
        c: 0.0,
        n: 0,
        r: 1.0,
    };
    for &n in ns {
        let nf = n as f64;
        let mut eval = |r: f64| {
            if r < 1.0 || r + nf > r_max {
                return;
            }
            let count = sites.shell_range(r, r + nf).len() as f64;
            let c = count / (nf * pow(r, d - 1.0));
            if c > best.c {
                best = ShellConstant { c, n, r };
            }
        };
        eval(1.0);
        for &rho in sites.norms() {
            eval(rho - nf);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let b = a_n_bound(2.0, 0.25, 4).unwrap();
        assert!((b.value - 0.3870).abs() < 1e-4);
        let b = a_n_bound(2.0, 0.25, 10).unwrap();
        let by_hand = exp(-0.056_313_514_709_472_656 * 101.4);
        assert!((b.value - by_hand).abs() < 1e-12);
        assert!((b.value - 0.00332).abs() < 1e-5);
        assert!(a_n_bound(2.0, 0.5, 3).is_err());
        // n^{-1} a^n (a-1) = 0.75 at a = 1.5, n = 1.
        assert!(a_n_bound(1.5, 0.1, 1).unwrap().vacuous);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(quasi1d_threshold(0.0, 3.0).unwrap(), 1.0);
        assert_eq!(quasi1d_threshold(0.5, 4.0).unwrap(), 16.0);
        assert_eq!(quasi1d_threshold(0.5, 1.0).unwrap(), 2.0);
        assert!(quasi1d_threshold(1.0, 1.0).is_err());
        assert!(quasi1d_threshold(0.2, 0.5).is_err());
    }

    #[test]
    fn disjoint_annuli_fill_the_host() {
        let v = disjoint_annuli(2.0, 2);
        assert_eq!(v, alloc::vec![(4.0, 6.0), (6.0, 8.0)]);
        assert!(disjoint_annuli(1.1, 5).is_empty());
    }

    #[test]
    fn eta_choice() {
        let eta = best_eta(2.0, 4, 0.9).unwrap();
        assert!(pow(1.0 - eta, 4.0) <= 0.9);
        assert!(eta < 0.5);
        assert!(best_eta(2.0, 4, 0.01).is_none());
    }

    #[test]
    fn lattice_shell_constant() {
        let s = SiteSet::lattice(1, 30.0).unwrap();
        // Two sites per unit of width; r = 1, n = 1 gives (1, 2] ∋ ±2.
        let c = empirical_shell_constant(&s, &[1, 2, 3], 30.0).unwrap();
        assert_eq!(c.c, 2.0);
    }
}
