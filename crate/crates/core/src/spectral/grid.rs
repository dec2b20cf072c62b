use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::error::{invalid, Error, Result};
use crate::math::round;
use crate::models::{evaluate_potential, CouplingMap, RandomPotentialModel};

/// Node layout of a Dirichlet box: node `k` along axis `a` sits at
/// `lo[a] + (k + 1) h`, and the boundary nodes `k = -1` and `k = n[a]`
/// carry the zero boundary condition.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub n: Vec<usize>,
    pub h: f64,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, n: Vec<usize>, h: f64) -> Result<Self> {
        let b = GridBox { lo, n, h };
        b.validate()?;
        Ok(b)
    }

    /// Box `center ± half_width` per axis; the interior node count is
    /// `round(2 half_width / h) - 1`.
    pub fn centered(center: &[f64], half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(half_width > h) {
            return Err(invalid("box half-width must exceed the spacing h > 0"));
        }
        let cells = round(2.0 * half_width / h) as usize;
        let lo = center.iter().map(|c| c - cells as f64 * h / 2.0).collect();
        GridBox::new(lo, vec![cells - 1; center.len()], h)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.n.len();
        if !(d == 1 || d == 2) {
            return Err(invalid("grid operators are available in d = 1 and d = 2"));
        }
        if self.lo.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.lo.len(),
            });
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(invalid("grid spacing h must be positive"));
        }
        if self.n.contains(&0) {
            return Err(invalid("every axis needs at least one interior node"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Upper corner of the box (the far boundary nodes).
    pub fn hi(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.n)
            .map(|(l, &k)| l + (k + 1) as f64 * self.h)
            .collect()
    }

    /// Multi-index of node `i` (axis 0 varies fastest).
    pub fn multi_index(&self, i: usize) -> [usize; 2] {
        if self.n.len() == 1 {
            [i, 0]
        } else {
            [i % self.n[0], i / self.n[0]]
        }
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        let m = self.multi_index(i);
        (0..self.dim())
            .map(|a| self.lo[a] + (m[a] + 1) as f64 * self.h)
            .collect()
    }

    /// Largest distance from the origin to a point of the closed box.
    pub fn max_norm(&self) -> f64 {
        let hi = self.hi();
        let s: f64 = self
            .lo
            .iter()
            .zip(&hi)
            .map(|(l, u)| {
                let m = l.abs().max(u.abs());
                m * m
            })
            .sum();
        crate::math::sqrt(s)
    }

    /// Whether node `i` is adjacent to the Dirichlet boundary.
    pub fn touches_boundary(&self, i: usize) -> bool {
        let m = self.multi_index(i);
        (0..self.dim()).any(|a| m[a] == 0 || m[a] + 1 == self.n[a])
    }
}

/// `H = -Δ_h + V` on a Dirichlet box, with the standard `2d+1` point
/// stencil: `2d/h²` plus the potential on the diagonal and `-1/h²` between
/// nearest neighbours.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridOperator {
    pub grid: GridBox,
    /// Potential sampled at the nodes.
    pub potential: Vec<f64>,
}

impl GridOperator {
    pub fn new(grid: GridBox, potential: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if potential.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: potential.len(),
            });
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(invalid("potential samples must be finite"));
        }
        Ok(GridOperator { grid, potential })
    }

    /// Discrete Laplacian alone.
    pub fn free(grid: GridBox) -> Result<Self> {
        let len = grid.len();
        GridOperator::new(grid, vec![0.0; len])
    }

    /// Samples `v` at every node.
    pub fn from_fn(grid: GridBox, mut v: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let potential = (0..grid.len()).map(|i| v(&grid.node(i))).collect();
        GridOperator::new(grid, potential)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.potential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potential.is_empty()
    }

    /// `1/h²`.
    pub fn hopping(&self) -> f64 {
        1.0 / (self.grid.h * self.grid.h)
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        2.0 * self.dim() as f64 * self.hopping() + self.potential[i]
    }

    /// Half-bandwidth in the natural node order.
    pub fn bandwidth(&self) -> usize {
        if self.dim() == 1 {
            1
        } else {
            self.grid.n[0]
        }
    }

    /// Nearest neighbours of node `i`.
    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let m = self.grid.multi_index(i);
        let n = &self.grid.n;
        let d = self.dim();
        let stride = [1, n[0]];
        (0..d).flat_map(move |a| {
            let down = (m[a] > 0).then(|| i - stride[a]);
            let up = (m[a] + 1 < n[a]).then(|| i + stride[a]);
            down.into_iter().chain(up)
        })
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diagonal(i)
        } else if self.neighbours(i).any(|k| k == j) {
            -self.hopping()
        } else {
            0.0
        }
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let t = self.hopping();
        for i in 0..self.len() {
            let mut acc = self.diagonal(i) * x[i];
            for j in self.neighbours(i) {
                acc -= t * x[j];
            }
            y[i] = acc;
        }
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.dim() as f64 * self.hopping();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.len() {
            let c = self.diagonal(i);
            lo = lo.min(c - r);
            hi = hi.max(c + r);
        }
        (lo, hi)
    }

    /// Upper bound on `‖H‖₂`.
    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.spectral_bounds();
        lo.abs().max(hi.abs())
    }

    /// `H + c`.
    pub fn shifted(&self, c: f64) -> Self {
        GridOperator {
            grid: self.grid.clone(),
            potential: self.potential.iter().map(|v| v + c).collect(),
        }
    }

    /// Nonzero entries `(row, column, value)` in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let t = self.hopping();
        let mut out = Vec::with_capacity(self.len() * (2 * self.dim() + 1));
        for i in 0..self.len() {
            let mut row: Vec<(usize, usize, f64)> =
                self.neighbours(i).map(|j| (i, j, -t)).collect();
            row.push((i, i, self.diagonal(i)));
            row.sort_by_key(|e| e.1);
            out.extend(row);
        }
        out
    }

    /// Triplet text: a header `% rows cols nnz h` line, then one
    /// `row col value` line per nonzero (0-based indices).
    pub fn triplet_text(&self) -> String {
        let t = self.triplets();
        let mut s = format!(
            "% {} {} {} {}\n",
            self.len(),
            self.len(),
            t.len(),
            self.grid.h
        );
        for (i, j, v) in t {
            s.push_str(&format!("{i} {j} {v:e}\n"));
        }
        s
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut a = vec![0.0; n * n];
        for (i, j, v) in self.triplets() {
            a[i * n + j] = v;
        }
        a
    }

    /// `max |H_ij - H_ji|` over the stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        self.triplets()
            .into_iter()
            .map(|(i, j, v)| (v - self.entry(j, i)).abs())
            .fold(0.0, f64::max)
    }
}

/// `-Δ_h + V₀ + λ V_ω` sampled at the nodes of `grid`.
pub fn discretize_scaled(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    grid: &GridBox,
    lambda: f64,
) -> Result<GridOperator> {
    grid.validate()?;
    if grid.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: grid.dim(),
        });
    }
    let mut potential = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let x = grid.node(i);
        let v = evaluate_potential(model, couplings, &x, false);
        if v.truncated {
            return Err(Error::WindowTooSmall {
                needed: grid.max_norm() + model.potentials.max_reach(),
                covered: couplings.coverage,
            });
        }
        potential.push(model.background.at(&x) + lambda * v.value);
    }
    GridOperator::new(grid.clone(), potential)
}

/// `-Δ_h + V₀ + V_ω` sampled at the nodes of `grid`.
pub fn discretize(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    grid: &GridBox,
) -> Result<GridOperator> {
    discretize_scaled(model, couplings, grid, 1.0)
}

/// `-Δ_h + V₀`: the unperturbed operator on the same grid.
pub fn discretize_background(model: &RandomPotentialModel, grid: &GridBox) -> Result<GridOperator> {
    if grid.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: grid.dim(),
        });
    }
    GridOperator::from_fn(grid.clone(), |x| model.background.at(x))
}
