#![allow(clippy::needless_range_loop)]

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::grid::GridOperator;
use crate::error::{invalid, Error, Result};
use crate::math::{dot, hypot, sqrt};
use crate::rng::Stream;

/// Operators with at most this many nodes use the dense solver.
pub const DENSE_LIMIT: usize = 600;

/// Residual bound `‖Hv - λv‖ ≤ RESIDUAL_TOL ‖H‖` required of every pair.
pub const RESIDUAL_TOL: f64 = 1e-8;

const EPS: f64 = f64::EPSILON;

/// Which eigenpairs to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum EnergyWindow {
    /// Eigenvalues in `[lo, hi]`.
    Interval {
        lo: f64,
        hi: f64,
    },
    /// The `count` smallest eigenvalues.
    Lowest {
        count: usize,
    },
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SolverPath {
    Dense,
    Banded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWindowResult {
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub window: EnergyWindow,
    pub path: SolverPath,
}

impl SpectralWindowResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `max |⟨v_i, v_j⟩ - δ_ij|`.
    pub fn orthogonality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, u) in self.eigenvectors.iter().enumerate() {
            for (j, v) in self.eigenvectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(u, v) - target).abs());
            }
        }
        worst
    }
}

/// Householder reduction of a row-major symmetric matrix to tridiagonal
/// form. On return `v` holds the accumulated orthogonal transform, `d` the
/// diagonal and `e[1..]` the subdiagonal.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in j + 1..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on a symmetric tridiagonal matrix. `z` is column-major
/// (`z[i * n + k]` is component `k` of vector `i`) and is rotated in place;
/// eigenvalues are returned ascending with their vectors.
fn tql2(n: usize, d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > EPS * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 80 {
                    return Err(Error::NoConvergence(format!(
                        "tridiagonal QL stalled at index {l}"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (zi, zi1) = z.split_at_mut((i + 1) * n);
                    let zi = &mut zi[i * n..];
                    for k in 0..n {
                        let h = zi1[k];
                        zi1[k] = s * zi[k] + c * h;
                        zi[k] = c * zi[k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= EPS * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    // Selection sort keeps the vector swaps to at most n.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for c in 0..n {
                z.swap(i * n + c, k * n + c);
            }
        }
    }
    Ok(())
}

/// All eigenpairs by dense reduction (tridiagonal QL directly in d = 1).
fn dense_all(op: &GridOperator) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = op.len();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut z;
    if op.dim() == 1 {
        let t = op.hopping();
        for i in 0..n {
            d[i] = op.diagonal(i);
            if i > 0 {
                e[i] = -t;
            }
        }
        z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
    } else {
        let mut v = op.to_dense();
        tred2(n, &mut v, &mut d, &mut e);
        // Column-major copy for the QL sweep.
        z = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                z[c * n + r] = v[r * n + c];
            }
        }
    }
    tql2(n, &mut d, &mut e, &mut z)?;
    let vecs = z.chunks_exact(n).map(|c| c.to_vec()).collect();
    Ok((d, vecs))
}

/// Symmetric tridiagonal matrix orthogonally similar to an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`.
    pub off: Vec<f64>,
    norm: f64,
}

impl Tridiagonal {
    /// Reduces `op` with Givens rotations that annihilate the band column
    /// by column and chase the resulting bulges off the matrix; `O(n² b)`
    /// work for half-bandwidth `b`.
    pub fn from_operator(op: &GridOperator) -> Self {
        let n = op.len();
        let norm = op.norm_bound().max(1.0);
        let t = op.hopping();
        if op.dim() == 1 || op.bandwidth() <= 1 {
            let off = (0..n.saturating_sub(1))
                .map(|i| {
                    if op.neighbours(i).any(|j| j == i + 1) {
                        -t
                    } else {
                        0.0
                    }
                })
                .collect();
            return Tridiagonal {
                diag: (0..n).map(|i| op.diagonal(i)).collect(),
                off,
                norm,
            };
        }
        let mut band = LowerBand::new(n, op.bandwidth());
        for i in 0..n {
            band.set(i, i, op.diagonal(i));
            for j in op.neighbours(i) {
                if j < i {
                    band.set(i, j, -t);
                }
            }
        }
        let b = band.b;
        for j in 0..n.saturating_sub(2) {
            for k in (2..=b.min(n - 1 - j)).rev() {
                let i = j + k;
                if band.get(i, j) == 0.0 {
                    continue;
                }
                band.rotate_to_zero(i, j);
                // Chase the bulge at (p + b + 1, p) down the band.
                let mut p = i - 1;
                while p + b + 1 < n {
                    let r = p + b + 1;
                    if band.get(r, p) == 0.0 {
                        break;
                    }
                    band.rotate_to_zero(r, p);
                    p = r - 1;
                }
            }
        }
        Tridiagonal {
            diag: (0..n).map(|i| band.get(i, i)).collect(),
            off: (0..n.saturating_sub(1))
                .map(|i| band.get(i + 1, i))
                .collect(),
            norm,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Sturm count of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let tiny = EPS * self.norm;
        let mut q = 0.0;
        let mut count = 0;
        for i in 0..self.diag.len() {
            let a = self.diag[i] - sigma;
            q = if i == 0 {
                a
            } else {
                let e = self.off[i - 1];
                a - e * e / q
            };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn tol(&self) -> f64 {
        4.0 * EPS * self.norm
    }

    /// Eigenvalues in `[lo, hi]` by interval bisection.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (glo, ghi) = self.bounds();
        let a = lo.max(glo - 1.0);
        let b = hi.min(ghi + 1.0);
        if !(a <= b) {
            return Vec::new();
        }
        let tol = self.tol();
        let b_open = b + tol;
        let mut out = Vec::new();
        let mut stack = vec![(a, b_open, self.count_below(a), self.count_below(b_open))];
        while let Some((x, y, cx, cy)) = stack.pop() {
            if cy <= cx {
                continue;
            }
            let mid = 0.5 * (x + y);
            if y - x <= tol || mid <= x || mid >= y {
                for _ in cx..cy {
                    out.push(mid);
                }
                continue;
            }
            let cm = self.count_below(mid);
            stack.push((mid, y, cm, cy));
            stack.push((x, mid, cx, cm));
        }
        out.sort_by(f64::total_cmp);
        out.retain(|&v| v >= lo && v <= hi);
        out
    }

    /// The `k`-th smallest eigenvalue (0-based).
    pub fn eigenvalue_by_index(&self, k: usize) -> Result<f64> {
        if k >= self.len() {
            return Err(invalid("eigenvalue index out of range"));
        }
        let (mut a, mut b) = self.bounds();
        a -= 1.0;
        b += 1.0;
        let tol = self.tol();
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.count_below(mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Lower triangle of a symmetric band matrix with room for one bulge
/// diagonal below the band.
struct LowerBand {
    n: usize,
    b: usize,
    /// `data[i * (b + 2) + k]` is entry `(i, i - k)`.
    data: Vec<f64>,
}

impl LowerBand {
    fn new(n: usize, b: usize) -> Self {
        LowerBand {
            n,
            b,
            data: vec![0.0; n * (b + 2)],
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k > self.b + 1 {
            0.0
        } else {
            self.data[i * (self.b + 2) + k]
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k <= self.b + 1 {
            self.data[i * (self.b + 2) + k] = v;
        }
    }

    /// Similarity by the rotation in the `(i-1, i)` plane that zeroes
    /// entry `(i, j)` against `(i-1, j)`.
    fn rotate_to_zero(&mut self, i: usize, j: usize) {
        let p = i - 1;
        let q = i;
        let x = self.get(p, j);
        let y = self.get(q, j);
        let r = hypot(x, y);
        if r == 0.0 {
            return;
        }
        let (c, s) = (x / r, y / r);
        let w = self.b + 1;
        let lo = p.saturating_sub(w);
        let hi = (q + w).min(self.n - 1);
        for col in lo..=hi {
            if col == p || col == q {
                continue;
            }
            let a = self.get(p, col);
            let bq = self.get(q, col);
            if a == 0.0 && bq == 0.0 {
                continue;
            }
            self.set(p, col, c * a + s * bq);
            self.set(q, col, -s * a + c * bq);
        }
        let app = self.get(p, p);
        let aqq = self.get(q, q);
        let apq = self.get(q, p);
        self.set(p, p, c * c * app + 2.0 * c * s * apq + s * s * aqq);
        self.set(q, q, s * s * app - 2.0 * c * s * apq + c * c * aqq);
        self.set(q, p, (c * c - s * s) * apq + c * s * (aqq - app));
        self.set(q, j, 0.0);
    }
}

/// Number of eigenvalues strictly below `sigma`.
pub fn count_below(op: &GridOperator, sigma: f64) -> usize {
    Tridiagonal::from_operator(op).count_below(sigma)
}

/// Eigenvalues in `[lo, hi]` by bisection.
pub fn eigenvalues_in(op: &GridOperator, lo: f64, hi: f64) -> Vec<f64> {
    Tridiagonal::from_operator(op).eigenvalues_in(lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based).
pub fn eigenvalue_by_index(op: &GridOperator, k: usize) -> Result<f64> {
    Tridiagonal::from_operator(op).eigenvalue_by_index(k)
}

/// Banded LU with partial pivoting of `H - σ`.
struct BandLu {
    n: usize,
    b: usize,
    /// Row `i` holds columns `i - b ..= i + 2b` at offsets `0 ..= 3b`.
    rows: Vec<f64>,
    piv: Vec<usize>,
    /// Multipliers of elimination step `j` for rows `j+1 ..= j+b`.
    mult: Vec<f64>,
}

impl BandLu {
    fn width(b: usize) -> usize {
        3 * b + 1
    }

    fn at(&self, i: usize, c: usize) -> usize {
        i * Self::width(self.b) + (c + self.b - i)
    }

    fn factor(op: &GridOperator, sigma: f64) -> Self {
        let n = op.len();
        let b = op.bandwidth();
        let wdt = Self::width(b);
        let mut lu = BandLu {
            n,
            b,
            rows: vec![0.0; n * wdt],
            piv: vec![0; n],
            mult: vec![0.0; n * b],
        };
        let t = op.hopping();
        for i in 0..n {
            let k = lu.at(i, i);
            lu.rows[k] = op.diagonal(i) - sigma;
            for j in op.neighbours(i) {
                let k = lu.at(i, j);
                lu.rows[k] = -t;
            }
        }
        let tiny = EPS * op.norm_bound().max(1.0);
        for j in 0..n {
            let last = (j + b).min(n - 1);
            let mut p = j;
            let mut best = lu.rows[lu.at(j, j)].abs();
            for i in j + 1..=last {
                let v = lu.rows[lu.at(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            lu.piv[j] = p;
            let cmax = (j + 2 * b).min(n - 1);
            if p != j {
                for c in j..=cmax {
                    let (x, y) = (lu.at(j, c), lu.at(p, c));
                    lu.rows.swap(x, y);
                }
            }
            let djj = lu.at(j, j);
            if lu.rows[djj] == 0.0 {
                lu.rows[djj] = tiny;
            }
            let pivot = lu.rows[djj];
            for i in j + 1..=last {
                let ki = lu.at(i, j);
                let m = lu.rows[ki] / pivot;
                lu.rows[ki] = 0.0;
                lu.mult[j * b + (i - j - 1)] = m;
                if m != 0.0 {
                    for c in j + 1..=cmax {
                        let src = lu.rows[lu.at(j, c)];
                        let dst = lu.at(i, c);
                        lu.rows[dst] -= m * src;
                    }
                }
            }
        }
        lu
    }

    fn solve(&self, x: &mut [f64]) {
        let (n, b) = (self.n, self.b);
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                x.swap(j, p);
            }
            let last = (j + b).min(n - 1);
            for i in j + 1..=last {
                x[i] -= self.mult[j * b + (i - j - 1)] * x[j];
            }
        }
        for j in (0..n).rev() {
            let cmax = (j + 2 * b).min(n - 1);
            let mut s = x[j];
            for c in j + 1..=cmax {
                s -= self.rows[self.at(j, c)] * x[c];
            }
            x[j] = s / self.rows[self.at(j, j)];
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = sqrt(dot(v, v));
    if nrm > 0.0 {
        for x in v.iter_mut() {
            *x /= nrm;
        }
    }
    nrm
}

fn residual(op: &GridOperator, lambda: f64, v: &[f64], scratch: &mut [f64]) -> f64 {
    op.apply(v, scratch);
    let mut s = 0.0;
    for (hv, x) in scratch.iter().zip(v) {
        let r = hv - lambda * x;
        s += r * r;
    }
    sqrt(s)
}

/// Inverse iteration for each eigenvalue, orthogonalizing within clusters
/// of nearly equal eigenvalues.
fn inverse_iteration(op: &GridOperator, values: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let n = op.len();
    let norm = op.norm_bound().max(1.0);
    let cluster = 1e-7 * norm;
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    let mut residuals = Vec::with_capacity(values.len());
    let mut scratch = vec![0.0; n];
    let mut cluster_start = 0;
    for (k, &lambda) in values.iter().enumerate() {
        if k > 0 && lambda - values[k - 1] > cluster {
            cluster_start = k;
        }
        // Perturb the shift so that H - σ is numerically nonsingular.
        let sigma = lambda + 2.0 * EPS * norm;
        let lu = BandLu::factor(op, sigma);
        let mut rng = Stream::new(0x1b7e_u64, k as u64);
        let mut v: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
        let mut res = f64::INFINITY;
        for it in 0..12 {
            for u in &vecs[cluster_start..k] {
                let c = dot(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
            normalize(&mut v);
            lu.solve(&mut v);
            for u in &vecs[cluster_start..k] {
                let c = dot(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
            if normalize(&mut v) == 0.0 {
                return Err(Error::NoConvergence(format!(
                    "inverse iteration collapsed at eigenvalue {lambda}"
                )));
            }
            res = residual(op, lambda, &v, &mut scratch);
            if it >= 1 && res <= 0.01 * RESIDUAL_TOL * norm {
                break;
            }
        }
        // Fix the sign so the largest component is positive.
        let (imax, _) = v.iter().enumerate().fold((0, 0.0f64), |acc, (i, x)| {
            if x.abs() > acc.1 {
                (i, x.abs())
            } else {
                acc
            }
        });
        if v[imax] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        vecs.push(v);
        residuals.push(res);
    }
    Ok((vecs, residuals))
}

/// Eigenvalues only, for the requested window.
pub fn eigenvalues(op: &GridOperator, window: EnergyWindow) -> Result<Vec<f64>> {
    let n = op.len();
    if n <= DENSE_LIMIT {
        let (vals, _) = dense_all(op)?;
        return Ok(select(&vals, window).into_iter().map(|i| vals[i]).collect());
    }
    let tri = Tridiagonal::from_operator(op);
    Ok(match window {
        EnergyWindow::Interval { lo, hi } => tri.eigenvalues_in(lo, hi),
        EnergyWindow::Lowest { count } => {
            if count == 0 {
                Vec::new()
            } else {
                let top = tri.eigenvalue_by_index(count.min(n) - 1)?;
                let (glo, _) = tri.bounds();
                let mut v = tri.eigenvalues_in(glo - 1.0, top + 16.0 * tri.tol());
                v.truncate(count.min(n));
                v
            }
        }
        EnergyWindow::All => {
            let (glo, ghi) = tri.bounds();
            tri.eigenvalues_in(glo - 1.0, ghi + 1.0)
        }
    })
}

fn select(vals: &[f64], window: EnergyWindow) -> Vec<usize> {
    match window {
        EnergyWindow::Interval { lo, hi } => (0..vals.len())
            .filter(|&i| vals[i] >= lo && vals[i] <= hi)
            .collect(),
        EnergyWindow::Lowest { count } => (0..count.min(vals.len())).collect(),
        EnergyWindow::All => (0..vals.len()).collect(),
    }
}

/// Eigenpairs in `window`, each checked against
/// `‖Hv - λv‖ ≤ RESIDUAL_TOL · ‖H‖`.
pub fn eigenpairs(op: &GridOperator, window: EnergyWindow) -> Result<SpectralWindowResult> {
    if let EnergyWindow::Interval { lo, hi } = window {
        if !(lo <= hi) {
            return Err(invalid("energy window must satisfy lo <= hi"));
        }
    }
    let n = op.len();
    let norm = op.norm_bound().max(1.0);
    let (eigenvalues, eigenvectors, path) = if n <= DENSE_LIMIT {
        let (vals, vecs) = dense_all(op)?;
        let idx = select(&vals, window);
        (
            idx.iter().map(|&i| vals[i]).collect::<Vec<_>>(),
            idx.iter().map(|&i| vecs[i].clone()).collect::<Vec<_>>(),
            SolverPath::Dense,
        )
    } else {
        let vals = eigenvalues(op, window)?;
        let (vecs, _) = inverse_iteration(op, &vals)?;
        (vals, vecs, SolverPath::Banded)
    };
    let mut scratch = vec![0.0; n];
    let residuals: Vec<f64> = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&l, v)| residual(op, l, v, &mut scratch))
        .collect();
    if let Some((k, &r)) = residuals
        .iter()
        .enumerate()
        .find(|(_, &r)| r > RESIDUAL_TOL * norm)
    {
        return Err(Error::NoConvergence(format!(
            "eigenpair {k} (λ = {}) has residual {r:e}, above {:e}",
            eigenvalues[k],
            RESIDUAL_TOL * norm
        )));
    }
    Ok(SpectralWindowResult {
        eigenvalues,
        eigenvectors,
        residuals,
        window,
        path,
    })
}

/// Solves `(H - E) u = rhs` in place.
pub fn solve_shifted(op: &GridOperator, energy: f64, rhs: &mut [f64]) -> Result<()> {
    if rhs.len() != op.len() {
        return Err(Error::DimensionMismatch {
            expected: op.len(),
            got: rhs.len(),
        });
    }
    BandLu::factor(op, energy).solve(rhs);
    Ok(())
}
