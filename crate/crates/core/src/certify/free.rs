use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::geometry::{Primitive, RegionSet};
use crate::math::pow;
use crate::models::{CouplingMap, RandomPotentialModel};

/// Outcome of the search for an ε-free annulus `A_{r, r+n}` with
/// `a^n ≤ r ≤ a^{n+1} - n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FreeAnnulusRecord {
    pub n: u32,
    pub a: f64,
    pub host_inner: f64,
    pub host_outer: f64,
    /// Smallest free inner radius.
    pub r_n: Option<f64>,
    /// `a^{n+1} - n < a^n`: the only candidate is `r = a^n`.
    pub degenerate: bool,
}

impl FreeAnnulusRecord {
    pub fn free(&self) -> bool {
        self.r_n.is_some()
    }
}

/// Whether every sampled site in `region` has `ω_i ≤ ε`.
pub fn is_epsilon_free(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    region: &RegionSet,
    eps: f64,
) -> Result<bool> {
    let reach = region.max_norm();
    if reach > couplings.coverage + 1e-12 {
        return Err(Error::WindowTooSmall {
            needed: reach,
            covered: couplings.coverage,
        });
    }
    for i in model.sites.closed_shell_range(0.0, reach) {
        if !region.contains(model.sites.site(i)) {
            continue;
        }
        match couplings.get(i) {
            Some(w) if w > eps => return Ok(false),
            Some(_) => {}
            None => {
                return Err(Error::WindowTooSmall {
                    needed: reach,
                    covered: couplings.coverage,
                })
            }
        }
    }
    Ok(true)
}

/// Smallest `r ∈ [lo, hi]` such that no radius of `bad` (sorted ascending)
/// lies in `(r, r + width]`.
///
/// The event "A_{r,r+width} is free" only changes when `r` crosses a bad
/// radius `b` or `b - width`, so jumping to the largest blocking radius is
/// exact.
pub fn first_free_radius(bad: &[f64], lo: f64, hi: f64, width: f64) -> Option<f64> {
    let mut r = lo;
    while r <= hi {
        let start = bad.partition_point(|&b| b <= r);
        let end = bad.partition_point(|&b| b <= r + width);
        if end <= start {
            return Some(r);
        }
        r = bad[end - 1];
    }
    None
}

/// Host interval `[a^n, max(a^{n+1} - n, a^n)]` and the degeneracy flag.
pub fn candidate_range(a: f64, n: u32) -> (f64, f64, bool) {
    let lo = pow(a, n as f64);
    let hi = pow(a, n as f64 + 1.0) - n as f64;
    if hi < lo {
        (lo, lo, true)
    } else {
        (lo, hi, false)
    }
}

/// Radius the window has to cover for scale `n`.
pub fn required_coverage(a: f64, n: u32) -> f64 {
    let (lo, hi, _) = candidate_range(a, n);
    (hi + n as f64)
        .max(pow(a, n as f64 + 1.0))
        .max(lo + n as f64)
}

/// Sorted norms of sites with `ω_i > ε` in `(lo, hi]`, skipping `exclude`.
pub(crate) fn bad_radii(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    eps: f64,
    lo: f64,
    hi: f64,
    exclude: Option<usize>,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for i in model.sites.shell_range(lo, hi) {
        if Some(i) == exclude {
            continue;
        }
        match couplings.get(i) {
            Some(w) if w > eps => out.push(model.sites.site_norm(i)),
            Some(_) => {}
            None => {
                return Err(Error::WindowTooSmall {
                    needed: hi,
                    covered: couplings.coverage,
                })
            }
        }
    }
    Ok(out)
}

pub(crate) fn check_growth(a: f64, n: u32) -> Result<()> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(invalid("growth ratio a must exceed 1"));
    }
    if n == 0 {
        return Err(invalid("annulus width n must be >= 1"));
    }
    Ok(())
}

/// Scans `[a^n, a^{n+1} - n]` for the smallest inner radius of an ε-free
/// annulus of width `n`, optionally ignoring one site.
pub fn find_free_subannulus_excluding(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    eps: f64,
    a: f64,
    n: u32,
    exclude: Option<usize>,
) -> Result<FreeAnnulusRecord> {
    check_growth(a, n)?;
    let need = required_coverage(a, n);
    if need > couplings.coverage + 1e-9 {
        return Err(Error::WindowTooSmall {
            needed: need,
            covered: couplings.coverage,
        });
    }
    let (lo, hi, degenerate) = candidate_range(a, n);
    let width = n as f64;
    let bad = bad_radii(model, couplings, eps, lo, hi + width, exclude)?;
    Ok(FreeAnnulusRecord {
        n,
        a,
        host_inner: lo,
        host_outer: pow(a, n as f64 + 1.0),
        r_n: first_free_radius(&bad, lo, hi, width),
        degenerate,
    })
}

/// [`find_free_subannulus_excluding`] without an excluded site.
pub fn find_free_subannulus(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    eps: f64,
    a: f64,
    n: u32,
) -> Result<FreeAnnulusRecord> {
    find_free_subannulus_excluding(model, couplings, eps, a, n, None)
}

/// `ω̃_i = min(ω_i, ε)`.
pub fn truncate_couplings(couplings: &CouplingMap, eps: f64) -> CouplingMap {
    couplings.truncate(eps)
}

/// Union of `B(i, ρ_i)` over sampled sites with `ω_i > ε` (other than
/// `exclude`): a superset of `{V_ω ≠ V_{ω̃}}`.
pub fn difference_support(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    eps: f64,
    exclude: Option<usize>,
) -> RegionSet {
    let dim = model.dim();
    let primitives = (0..model.sites.len())
        .filter(|&i| Some(i) != exclude)
        .filter(|&i| couplings.get(i).is_some_and(|w| w > eps))
        .map(|i| Primitive::Ball {
            center: model.sites.site(i).to_vec(),
            radius: model.potentials.get(i).reach(),
        })
        .collect();
    RegionSet { dim, primitives }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_annulus;
    use crate::models::{
        CouplingLaw, LawRule, PotentialRule, Profile, SingleSitePotential, SiteSet,
    };
    use alloc::vec;

    fn line_model() -> RandomPotentialModel {
        let sites = SiteSet::lattice(1, 20.0).unwrap();
        let f = SingleSitePotential::from_profile(
            Profile::Indicator {
                height: 1.0,
                radius: 0.25,
            },
            1,
            2.0,
        )
        .unwrap();
        RandomPotentialModel::new(
            sites,
            PotentialRule::Shared(f),
            LawRule::Shared {
                law: CouplingLaw::Bernoulli { p: 0.5 },
            },
        )
        .unwrap()
    }

    #[test]
    fn epsilon_free_is_inclusive() {
        let m = line_model();
        let region = make_annulus(0.5, 1.5, 1).unwrap();
        let zero = CouplingMap::constant(&m, 0.0, 20.0);
        assert!(is_epsilon_free(&m, &zero, &region, 0.1).unwrap());
        let i = m.sites.index_of(&[1.0]).unwrap();
        let at = zero.clone().with_value(i, 0.1);
        assert!(is_epsilon_free(&m, &at, &region, 0.1).unwrap());
        let above = zero.with_value(i, 0.2);
        assert!(!is_epsilon_free(&m, &above, &region, 0.1).unwrap());
        let big = make_annulus(0.0, 30.0, 1).unwrap();
        assert!(is_epsilon_free(&m, &at, &big, 0.1).is_err());
    }

    #[test]
    fn scan_examples() {
        let m = line_model();
        let zero = CouplingMap::constant(&m, 0.0, 20.0);
        let rec = find_free_subannulus(&m, &zero, 0.5, 2.0, 2).unwrap();
        assert_eq!(rec.r_n, Some(4.0));

        let ones = CouplingMap::constant(&m, 1.0, 20.0);
        assert_eq!(
            find_free_subannulus(&m, &ones, 0.5, 2.0, 2).unwrap().r_n,
            None
        );

        // ω = 1 on ±4, ±5 only: free inner radii form [5, 6].
        let mut c = zero;
        for x in [-5.0, -4.0, 4.0, 5.0] {
            c = c.with_value(m.sites.index_of(&[x]).unwrap(), 1.0);
        }
        let rec = find_free_subannulus(&m, &c, 0.5, 2.0, 2).unwrap();
        assert_eq!(rec.r_n, Some(5.0));
        for r in [5.0, 5.5, 6.0] {
            let ann = make_annulus(r, r + 2.0, 1).unwrap();
            assert!(is_epsilon_free(&m, &c, &ann, 0.5).unwrap());
        }
        for r in [4.0, 4.999] {
            let ann = make_annulus(r, r + 2.0, 1).unwrap();
            assert!(!is_epsilon_free(&m, &c, &ann, 0.5).unwrap());
        }
    }

    #[test]
    fn first_free_radius_brute_force_agreement() {
        let bad = [3.0, 3.5, 7.25, 9.0, 12.0];
        for lo10 in 0..80 {
            let lo = lo10 as f64 * 0.125;
            let hi = lo + 4.0;
            let got = first_free_radius(&bad, lo, hi, 2.0);
            // Smallest free point on a fine grid, refined to breakpoints.
            let mut want = None;
            let mut cands: Vec<f64> = vec![lo];
            cands.extend(bad.iter().copied().filter(|b| *b >= lo && *b <= hi));
            cands.sort_by(f64::total_cmp);
            for r in cands {
                if !bad.iter().any(|&b| b > r && b <= r + 2.0) {
                    want = Some(r);
                    break;
                }
            }
            assert_eq!(got, want, "lo = {lo}");
        }
    }

    #[test]
    fn difference_support_examples() {
        let m = line_model();
        let zero = CouplingMap::constant(&m, 0.0, 20.0);
        assert!(difference_support(&m, &zero, 0.5, None).is_empty());
        let one = zero
            .clone()
            .with_value(m.sites.index_of(&[0.0]).unwrap(), 0.9);
        let s = difference_support(&m, &one, 0.5, None);
        assert_eq!(s.primitives.len(), 1);
        let two = one.with_value(m.sites.index_of(&[3.0]).unwrap(), 0.9);
        assert_eq!(difference_support(&m, &two, 0.5, None).primitives.len(), 2);
    }

    #[test]
    fn truncation_examples() {
        let m = line_model();
        let c = CouplingMap::constant(&m, 0.0, 20.0)
            .with_value(0, 0.2)
            .with_value(1, 0.9);
        let t = truncate_couplings(&c, 0.5);
        assert_eq!(t.get(0), Some(0.2));
        assert_eq!(t.get(1), Some(0.5));
    }
}
