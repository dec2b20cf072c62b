use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math::{self, dist, norm};

/// How a site window was produced.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum Generator {
    /// `ℤ^d`.
    Lattice,
    /// `ℤ × S` for a finite cross-section `S ⊂ ℝ^{d-1}`.
    Tube {
        cross_section: Vec<Vec<f64>>,
    },
    Explicit,
}

/// Finite window `Σ ∩ B(0, window_radius)` of a uniformly discrete set.
///
/// Sites are stored in canonical order (by norm, then lexicographically),
/// so annulus queries are binary searches and site indices do not depend on
/// how the list was supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet {
    dim: usize,
    coords: Vec<f64>,
    norms: Vec<f64>,
    generator: Generator,
    window_radius: f64,
    r_sigma: f64,
    closest_pair: Option<(usize, usize)>,
    by_first: Vec<usize>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    core::cmp::Ordering::Equal
}

impl SiteSet {
    fn build(dim: usize, points: Vec<Vec<f64>>, generator: Generator, window: f64) -> Self {
        let mut pts = points;
        pts.sort_by(|a, b| norm(a).total_cmp(&norm(b)).then_with(|| lex_cmp(a, b)));
        let norms: Vec<f64> = pts.iter().map(|p| norm(p)).collect();
        let coords: Vec<f64> = pts.into_iter().flatten().collect();
        let n = norms.len();
        let mut by_first: Vec<usize> = (0..n).collect();
        by_first.sort_by(|&a, &b| coords[a * dim].total_cmp(&coords[b * dim]).then(a.cmp(&b)));
        let mut set = SiteSet {
            dim,
            coords,
            norms,
            generator,
            window_radius: window,
            r_sigma: f64::INFINITY,
            closest_pair: None,
            by_first,
        };
        let (r, pair) = set.closest_pair_sweep();
        set.r_sigma = r;
        set.closest_pair = pair;
        set
    }

    /// `ℤ^d ∩ B(0, R)`.
    pub fn lattice(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius >= 0.0) || !radius.is_finite() {
            return Err(invalid("lattice needs d >= 1 and a finite radius"));
        }
        let m = math::floor(radius) as i64;
        let mut pts = Vec::new();
        let mut idx = vec![-m; dim];
        loop {
            let p: Vec<f64> = idx.iter().map(|&i| i as f64).collect();
            if norm(&p) <= radius {
                pts.push(p);
            }
            let mut k = 0;
            loop {
                if k == dim {
                    return Ok(SiteSet::build(dim, pts, Generator::Lattice, radius));
                }
                idx[k] += 1;
                if idx[k] <= m {
                    break;
                }
                idx[k] = -m;
                k += 1;
            }
        }
    }

    /// `(ℤ × S) ∩ B(0, R)`; the first coordinate runs along the tube.
    pub fn tube(cross_section: Vec<Vec<f64>>, radius: f64) -> Result<Self> {
        let Some(first) = cross_section.first() else {
            return Err(invalid("tube cross-section is empty"));
        };
        let dim = first.len() + 1;
        if cross_section.iter().any(|s| s.len() + 1 != dim) {
            return Err(invalid("tube cross-section points differ in dimension"));
        }
        let m = math::floor(radius) as i64;
        let mut pts = Vec::new();
        for i in -m..=m {
            for s in &cross_section {
                let mut p = Vec::with_capacity(dim);
                p.push(i as f64);
                p.extend_from_slice(s);
                if norm(&p) <= radius {
                    pts.push(p);
                }
            }
        }
        Ok(SiteSet::build(
            dim,
            pts,
            Generator::Tube { cross_section },
            radius,
        ))
    }

    /// An explicit list; the window radius defaults to the largest norm.
    pub fn explicit(dim: usize, points: Vec<Vec<f64>>, window: Option<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if points
            .iter()
            .any(|p| p.len() != dim || p.iter().any(|x| !x.is_finite()))
        {
            return Err(invalid("site coordinates must be finite and of length d"));
        }
        let far = points.iter().map(|p| norm(p)).fold(0.0, f64::max);
        let window = window.unwrap_or(far);
        Ok(SiteSet::build(dim, points, Generator::Explicit, window))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn site(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn site_norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// Radius of the ball `B(0, R)` inside which the window is complete.
    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    /// Smallest pairwise distance (`+∞` for fewer than two sites).
    pub fn r_sigma(&self) -> f64 {
        self.r_sigma
    }

    /// The pair realising [`SiteSet::r_sigma`].
    pub fn closest_pair(&self) -> Option<(usize, usize)> {
        self.closest_pair
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// Index range of sites with `lo < |i| ≤ hi`.
    pub fn shell_range(&self, lo: f64, hi: f64) -> core::ops::Range<usize> {
        let a = self.norms.partition_point(|&r| r <= lo);
        let b = self.norms.partition_point(|&r| r <= hi);
        a..b.max(a)
    }

    /// Index range of sites with `lo ≤ |i| ≤ hi`.
    pub fn closed_shell_range(&self, lo: f64, hi: f64) -> core::ops::Range<usize> {
        let a = self.norms.partition_point(|&r| r < lo);
        let b = self.norms.partition_point(|&r| r <= hi);
        a..b.max(a)
    }

    /// Indices of sites within distance `radius` of `x`, in increasing order.
    pub fn sites_near(&self, x: &[f64], radius: f64) -> Vec<usize> {
        let x0 = x[0];
        let start = self
            .by_first
            .partition_point(|&i| self.coords[i * self.dim] < x0 - radius);
        let mut out = Vec::new();
        for &i in &self.by_first[start..] {
            if self.coords[i * self.dim] > x0 + radius {
                break;
            }
            if dist(self.site(i), x) <= radius {
                out.push(i);
            }
        }
        out.sort_unstable();
        out
    }

    /// Canonical index of the site at `x`, if present.
    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        self.sites_near(x, 1e-9).into_iter().next()
    }

    /// Plane sweep along the first coordinate.
    fn closest_pair_sweep(&self) -> (f64, Option<(usize, usize)>) {
        let mut best = f64::INFINITY;
        let mut pair = None;
        let order = &self.by_first;
        for a in 0..order.len() {
            let i = order[a];
            let xi = self.coords[i * self.dim];
            for &j in &order[a + 1..] {
                if self.coords[j * self.dim] - xi >= best {
                    break;
                }
                let d = dist(self.site(i), self.site(j));
                if d < best {
                    best = d;
                    pair = Some((i.min(j), i.max(j)));
                }
            }
        }
        (best, pair)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_window() {
        let s = SiteSet::lattice(2, 2.0).unwrap();
        // 13 integer points with norm ≤ 2.
        assert_eq!(s.len(), 13);
        assert_eq!(s.r_sigma(), 1.0);
        assert_eq!(s.site(0), &[0.0, 0.0]);
        assert!(s.norms().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(s.shell_range(0.5, 1.0).len(), 4);
    }

    #[test]
    fn duplicate_site_gives_zero_separation() {
        let s = SiteSet::explicit(1, vec![vec![0.0], vec![2.0], vec![2.0]], None).unwrap();
        assert_eq!(s.r_sigma(), 0.0);
        let (i, j) = s.closest_pair().unwrap();
        assert_eq!(s.site(i), s.site(j));
    }

    #[test]
    fn order_independent_indices() {
        let a = SiteSet::explicit(
            2,
            vec![vec![1.0, 0.0], vec![0.0, 3.0], vec![-1.0, 0.0]],
            None,
        )
        .unwrap();
        let b = SiteSet::explicit(
            2,
            vec![vec![0.0, 3.0], vec![-1.0, 0.0], vec![1.0, 0.0]],
            None,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tube_and_neighbourhoods() {
        let t = SiteSet::tube(vec![vec![0.0]], 5.0).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t.sites_near(&[2.2, 0.0], 1.0).len(), 2);
        assert_eq!(t.index_of(&[-3.0, 0.0]).map(|i| t.site(i)[0]), Some(-3.0));
    }
}
