use alloc::vec;
use alloc::vec::Vec;

use super::region::{Primitive, RegionSet};
use crate::error::{invalid, Error, Result};
use crate::math::{self, ball_volume, powi, sqrt};

/// Default spacing for both the quadrature grid and the `r`-grid.
pub const DEFAULT_RESOLUTION: f64 = 0.01;

/// Largest number of grid cells a single quadrature pass may visit.
pub const MAX_CELLS: u64 = 400_000_000;

/// Volume of `{x : r ≤ dist(x, S) ≤ r + 1}` with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShellMeasure {
    pub value: f64,
    pub error: f64,
}

/// `σ(S) = sup_r |shell(r)| / (r^d + 1)` with its maximiser.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceArea {
    pub sigma: f64,
    pub argmax_r: f64,
    pub error: f64,
    pub resolution: f64,
    pub r_max: f64,
}

/// Histogram of the distance function of a set: `bins[j]` is the volume of
/// `{jw ≤ dist < (j+1)w}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellProfile {
    pub dim: usize,
    pub cell: f64,
    pub bin_width: f64,
    pub bins: Vec<f64>,
}

impl ShellProfile {
    /// Bins per unit of distance.
    fn per_unit(&self) -> usize {
        math::round(1.0 / self.bin_width) as usize
    }

    /// Shell volume for `r = k·w`.
    pub fn shell(&self, k: usize) -> f64 {
        let m = self.per_unit();
        self.bins.iter().skip(k).take(m).sum()
    }

    /// Estimated `(d-1)`-measure of the level set `{dist = t}`.
    pub fn level_area(&self, t: f64) -> f64 {
        let c = sqrt(self.dim as f64) * self.cell + self.bin_width;
        let lo = (t - c).max(0.0);
        let hi = t + c;
        let j0 = math::floor(lo / self.bin_width) as usize;
        let j1 = (math::ceil(hi / self.bin_width) as usize).min(self.bins.len());
        if j1 <= j0 {
            return 0.0;
        }
        let vol: f64 = self.bins[j0..j1].iter().sum();
        vol / ((j1 - j0) as f64 * self.bin_width)
    }

    /// Quadrature error bound for the shell at `r = k·w`.
    pub fn shell_error(&self, k: usize) -> f64 {
        let r = k as f64 * self.bin_width;
        let lower = if k == 0 { 0.0 } else { self.level_area(r) };
        let band = sqrt(self.dim as f64) * self.cell + 0.5 * self.bin_width;
        band * (lower + self.level_area(r + 1.0))
    }

    /// Computes the distance histogram of `set` out to `r_max + 1`.
    pub fn compute(set: &RegionSet, resolution: f64, r_max: f64) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(invalid("resolution must be positive"));
        }
        if !(r_max >= 0.0) || !r_max.is_finite() {
            return Err(invalid("r_max must be finite and >= 0"));
        }
        let dim = set.dim;
        let m = (math::round(1.0 / resolution) as usize).max(1);
        let bin_width = 1.0 / m as f64;
        let reach = r_max + 1.0;
        let nbins = math::ceil(reach / bin_width) as usize + 1;
        let mut profile = ShellProfile {
            dim,
            cell: resolution,
            bin_width,
            bins: vec![0.0; nbins],
        };
        let Some((lo, hi)) = set.bounding_box() else {
            return Ok(profile);
        };
        let cell_volume = powi(resolution, dim as i32);
        let mut counts = vec![0u64; nbins];
        grid_walk(&lo, &hi, reach, resolution, |x| {
            let d = set.point_distance_value(x);
            if d <= reach {
                let j = (d / bin_width) as usize;
                if j < nbins {
                    counts[j] += 1;
                }
            }
        })?;
        for (b, c) in profile.bins.iter_mut().zip(&counts) {
            *b = *c as f64 * cell_volume;
        }
        Ok(profile)
    }
}

/// Visits the centres of a cell grid anchored at the origin covering the box
/// `[lo - pad, hi + pad]`.
fn grid_walk(
    lo: &[f64],
    hi: &[f64],
    pad: f64,
    h: f64,
    mut visit: impl FnMut(&[f64]),
) -> Result<()> {
    let dim = lo.len();
    let first: Vec<i64> = lo
        .iter()
        .map(|v| math::floor((v - pad) / h) as i64)
        .collect();
    let last: Vec<i64> = hi
        .iter()
        .map(|v| math::ceil((v + pad) / h) as i64)
        .collect();
    let mut total: u64 = 1;
    for k in 0..dim {
        let n = (last[k] - first[k]).max(0) as u64;
        total = total.saturating_mul(n);
    }
    if total > MAX_CELLS {
        return Err(Error::BudgetExceeded {
            sites: total as usize,
            limit: MAX_CELLS as usize,
        });
    }
    if total == 0 {
        return Ok(());
    }
    let mut idx = first.clone();
    let mut x: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) * h).collect();
    loop {
        visit(&x);
        let mut k = 0;
        loop {
            if k == dim {
                return Ok(());
            }
            idx[k] += 1;
            if idx[k] < last[k] {
                x[k] = (idx[k] as f64 + 0.5) * h;
                break;
            }
            idx[k] = first[k];
            x[k] = (idx[k] as f64 + 0.5) * h;
            k += 1;
        }
    }
}

/// Unit-shell volume `|{x : r ≤ dist(x,S) ≤ r+1}|` by deterministic grid
/// quadrature with cells of side `resolution`.
pub fn shell_measure(set: &RegionSet, r: f64, resolution: f64) -> Result<ShellMeasure> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(invalid("shell radius must be finite and >= 0"));
    }
    if !(resolution > 0.0) {
        return Err(invalid("resolution must be positive"));
    }
    let Some((lo, hi)) = set.bounding_box() else {
        return Ok(ShellMeasure {
            value: 0.0,
            error: 0.0,
        });
    };
    let dim = set.dim;
    let band = sqrt(dim as f64) * resolution;
    let mut inside = 0u64;
    let mut near_lower = 0u64;
    let mut near_upper = 0u64;
    grid_walk(&lo, &hi, r + 1.0 + 2.0 * band, resolution, |x| {
        let d = set.point_distance_value(x);
        if d >= r && d <= r + 1.0 {
            inside += 1;
        }
        if r > 0.0 && (d - r).abs() <= band {
            near_lower += 1;
        }
        if (d - r - 1.0).abs() <= band {
            near_upper += 1;
        }
    })?;
    let cell_volume = powi(resolution, dim as i32);
    Ok(ShellMeasure {
        value: inside as f64 * cell_volume,
        error: (near_lower + near_upper) as f64 * cell_volume,
    })
}

fn default_r_max(set: &RegionSet) -> f64 {
    set.diameter() + set.dim as f64 + 2.0
}

/// Grid estimate of `σ(S)` over `r ∈ [0, r_max]` with spacing close to
/// `resolution` (the nearest divisor of 1). `r_max` defaults to
/// `diam(S) + d + 2`.
pub fn generalized_surface_area(
    set: &RegionSet,
    resolution: f64,
    r_max: Option<f64>,
) -> Result<SurfaceArea> {
    let r_max = r_max.unwrap_or_else(|| default_r_max(set));
    let floor_r = set.diameter() + set.dim as f64 + 1.0;
    if r_max < floor_r {
        return Err(invalid("r_max must be at least diam(S) + d + 1"));
    }
    let profile = ShellProfile::compute(set, resolution, r_max)?;
    let w = profile.bin_width;
    let kmax = math::floor(r_max / w + 1e-9) as usize;
    let mut best = SurfaceArea {
        sigma: 0.0,
        argmax_r: 0.0,
        error: 0.0,
        resolution: w,
        r_max,
    };
    let mut max_err = 0.0f64;
    for k in 0..=kmax {
        let r = k as f64 * w;
        let denom = powi(r, set.dim as i32) + 1.0;
        let ratio = profile.shell(k) / denom;
        if ratio > best.sigma {
            best.sigma = ratio;
            best.argmax_r = r;
        }
        max_err = max_err.max(profile.shell_error(k) / denom);
    }
    best.error = max_err;
    Ok(best)
}

/// Closed-form unit-shell volume for a single point, ball or sphere.
pub fn exact_shell_measure(set: &RegionSet, r: f64) -> Option<f64> {
    let d = set.dim;
    let v = |t: f64| ball_volume(d, t.max(0.0));
    match set.primitives.as_slice() {
        [Primitive::Point { .. }] => Some(v(r + 1.0) - v(r)),
        [Primitive::Ball { radius, .. }] => {
            if r == 0.0 {
                Some(v(radius + 1.0))
            } else {
                Some(v(radius + r + 1.0) - v(radius + r))
            }
        }
        [Primitive::Sphere { radius, .. }] => {
            let outer = v(radius + r + 1.0) - v(radius + r);
            let inner = if *radius > r {
                v(radius - r) - v(radius - r - 1.0)
            } else {
                0.0
            };
            Some(outer + inner)
        }
        _ => None,
    }
}

/// Closed-form `σ(S)` for a single point, ball or sphere, maximised over a
/// fine `r`-grid and refined by golden-section search.
pub fn exact_generalized_surface_area(set: &RegionSet) -> Option<SurfaceArea> {
    exact_shell_measure(set, 0.0)?;
    let d = set.dim as i32;
    let r_max = default_r_max(set);
    let f = |r: f64| exact_shell_measure(set, r).unwrap_or(0.0) / (powi(r, d) + 1.0);
    let steps = 200_000usize;
    let h = r_max / steps as f64;
    let mut best_k = 0usize;
    let mut best = f(0.0);
    for k in 1..=steps {
        let val = f(k as f64 * h);
        if val > best {
            best = val;
            best_k = k;
        }
    }
    let mut argmax = best_k as f64 * h;
    if best_k > 0 {
        let (mut a, mut b) = ((argmax - h).max(1e-15), (argmax + h).min(r_max));
        let g = 0.5 * (sqrt(5.0) - 1.0);
        for _ in 0..100 {
            let c = b - g * (b - a);
            let e = a + g * (b - a);
            if f(c) > f(e) {
                b = e;
            } else {
                a = c;
            }
        }
        let mid = 0.5 * (a + b);
        if f(mid) > best {
            best = f(mid);
            argmax = mid;
        }
    }
    Some(SurfaceArea {
        sigma: best,
        argmax_r: argmax,
        error: 0.0,
        resolution: 0.0,
        r_max,
    })
}

/// Upper bound `σ(S) ≤ ω_d 2^{d-1} (diam S + 1)^d`, from the shell at
/// distance `r` lying inside a ball of radius `diam S + r + 1`.
pub fn sigma_volume_bound(diameter: f64, dim: usize) -> f64 {
    math::unit_ball_volume(dim) * powi(2.0, dim as i32 - 1) * powi(diameter + 1.0, dim as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::PI;

    #[test]
    fn point_shell_d1() {
        let p = RegionSet::point(vec![0.0]).unwrap();
        for r in [0.0, 3.0] {
            let s = shell_measure(&p, r, 0.01).unwrap();
            assert!((s.value - 2.0).abs() <= s.error.max(1e-9), "{s:?}");
            assert_eq!(exact_shell_measure(&p, r), Some(2.0));
        }
    }

    #[test]
    fn sphere_shell_d2() {
        let s = RegionSet::sphere(vec![0.0, 0.0], 5.0).unwrap();
        let exact = exact_shell_measure(&s, 0.0).unwrap();
        assert!((exact - 20.0 * PI).abs() < 1e-9);
        let m = shell_measure(&s, 0.0, 0.02).unwrap();
        assert!((m.value - exact).abs() <= m.error, "{m:?}");
    }

    #[test]
    fn exact_sigma_values() {
        let p1 = RegionSet::point(vec![0.0]).unwrap();
        let s1 = exact_generalized_surface_area(&p1).unwrap();
        assert!((s1.sigma - 2.0).abs() < 1e-12);
        assert_eq!(s1.argmax_r, 0.0);

        let p2 = RegionSet::point(vec![0.0, 0.0]).unwrap();
        let s2 = exact_generalized_surface_area(&p2).unwrap();
        let phi = 0.5 * (1.0 + sqrt(5.0));
        assert!((s2.sigma - phi * PI).abs() < 1e-9, "{s2:?}");
        assert!((s2.argmax_r - (phi - 1.0)).abs() < 1e-5);
    }

    #[test]
    fn grid_sigma_point_d2() {
        let p2 = RegionSet::point(vec![0.0, 0.0]).unwrap();
        let s = generalized_surface_area(&p2, DEFAULT_RESOLUTION, None).unwrap();
        let phi = 0.5 * (1.0 + sqrt(5.0));
        assert!((s.sigma - phi * PI).abs() <= s.error, "{s:?}");
    }

    #[test]
    fn empty_set_has_zero_sigma() {
        let e = RegionSet::empty(2);
        let s = generalized_surface_area(&e, 0.1, None).unwrap();
        assert_eq!(s.sigma, 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let s = RegionSet::sphere(vec![0.0, 0.0, 0.0], 50.0).unwrap();
        assert!(matches!(
            generalized_surface_area(&s, 0.001, None),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn volume_bound_dominates_exact() {
        for (set, diam) in [
            (RegionSet::point(vec![0.0, 0.0]).unwrap(), 0.0),
            (RegionSet::sphere(vec![0.0, 0.0], 3.0).unwrap(), 6.0),
            (RegionSet::ball(vec![1.0, 0.0, 0.0], 2.0).unwrap(), 4.0),
        ] {
            let s = exact_generalized_surface_area(&set).unwrap();
            assert!(s.sigma <= sigma_volume_bound(diam, set.dim));
        }
    }
}
