use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::grid::{discretize_scaled, GridBox, GridOperator};
use super::solve::{eigenpairs, eigenvalues, solve_shifted, EnergyWindow, Tridiagonal};
use crate::error::{invalid, Error, Result};
use crate::math::{dist, dot, linear_fit, ln, median, sqrt};
use crate::models::{CouplingMap, RandomPotentialModel};

/// Amplitudes below this are left out of decay fits.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

/// `Σ_j v_j⁴` for a unit vector.
pub fn ipr(v: &[f64]) -> Result<f64> {
    let n2 = dot(v, v);
    if (sqrt(n2) - 1.0).abs() > 1e-10 {
        return Err(invalid("inverse participation ratio needs a unit vector"));
    }
    Ok(v.iter().map(|x| x * x * x * x).sum())
}

/// Exponential decay rate from a least-squares fit of `ln|v|` against
/// distance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayRate {
    /// Minus the fitted slope, in inverse length units.
    pub rate: f64,
    /// Coefficient of determination of the fit.
    pub quality: f64,
    pub points: usize,
}

/// Fits `ln|v_j| ≈ c - rate · distances_j` over entries with
/// `|v_j| > AMPLITUDE_FLOOR`.
pub fn decay_fit(v: &[f64], distances: &[f64]) -> Result<DecayRate> {
    if v.len() != distances.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: distances.len(),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = v
        .iter()
        .zip(distances)
        .filter(|(x, _)| x.abs() > AMPLITUDE_FLOOR)
        .map(|(x, d)| (*d, ln(x.abs())))
        .unzip();
    let (slope, _, r2) = linear_fit(&xs, &ys)
        .ok_or_else(|| invalid("too few entries above the amplitude floor for a decay fit"))?;
    Ok(DecayRate {
        rate: -slope,
        quality: r2,
        points: xs.len(),
    })
}

/// [`decay_fit`] with distance `|j - center|` in index units.
pub fn decay_rate_fit(v: &[f64], center: usize) -> Result<DecayRate> {
    let d: Vec<f64> = (0..v.len())
        .map(|j| (j as f64 - center as f64).abs())
        .collect();
    decay_fit(v, &d)
}

/// [`decay_fit`] with the Euclidean distance between grid nodes.
pub fn grid_decay_fit(op: &GridOperator, v: &[f64], center: usize) -> Result<DecayRate> {
    let c = op.grid.node(center);
    let d: Vec<f64> = (0..op.len()).map(|j| dist(&op.grid.node(j), &c)).collect();
    decay_fit(v, &d)
}

/// An open interval of energies free of spectrum; `lo = -∞` for the
/// principal gap.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
}

impl Gap {
    pub fn contains(&self, e: f64) -> bool {
        e > self.lo && e < self.hi
    }
}

/// `(-∞, λ_min)` plus every interval between consecutive eigenvalues wider
/// than `resolution`.
pub fn spectrum_gaps(op: &GridOperator, resolution: f64) -> Result<Vec<Gap>> {
    if !(resolution > 0.0) {
        return Err(invalid("gap resolution must be positive"));
    }
    let vals = eigenvalues(op, EnergyWindow::All)?;
    let mut gaps = vec![Gap {
        lo: f64::NEG_INFINITY,
        hi: vals[0],
    }];
    for w in vals.windows(2) {
        if w[1] - w[0] > resolution {
            gaps.push(Gap { lo: w[0], hi: w[1] });
        }
    }
    Ok(gaps)
}

/// Distance from `e` to the spectrum of `op`.
pub fn distance_to_spectrum(op: &GridOperator, e: f64) -> Result<f64> {
    let tri = Tridiagonal::from_operator(op);
    let below = tri.count_below(e);
    let n = op.len();
    let mut best = f64::INFINITY;
    if below > 0 {
        let v = tri.eigenvalue_by_index(below - 1)?;
        best = best.min((e - v).abs());
    }
    if below < n {
        let v = tri.eigenvalue_by_index(below)?;
        best = best.min((v - e).abs());
    }
    Ok(best)
}

/// Decay of `|(H - E)^{-1}(x, y)|` in `|x - y|`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResolventDecay {
    pub energy: f64,
    /// Distance from `E` to the spectrum.
    pub gap_distance: f64,
    /// Mean of the per-source rates.
    pub rate: f64,
    pub per_source: Vec<DecayRate>,
}

/// Solves `(H - E) u = δ_y` for every source `y` and fits the exponential
/// decay of `|u(x)|` in the distance from `y`. Refused when `E` lies within
/// `resolution` of the spectrum.
pub fn resolvent_decay(
    op: &GridOperator,
    energy: f64,
    sources: &[usize],
    resolution: f64,
) -> Result<ResolventDecay> {
    if sources.is_empty() || sources.iter().any(|&y| y >= op.len()) {
        return Err(invalid(
            "resolvent probes need at least one source node inside the box",
        ));
    }
    let gap_distance = distance_to_spectrum(op, energy)?;
    if gap_distance < resolution {
        return Err(Error::IllConditioned(alloc::format!(
            "E = {energy} lies within {gap_distance:e} of the spectrum (resolution {resolution})"
        )));
    }
    let mut per_source = Vec::with_capacity(sources.len());
    for &y in sources {
        let mut u = vec![0.0; op.len()];
        u[y] = 1.0;
        solve_shifted(op, energy, &mut u)?;
        let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        // Relative floor so the fit only sees resolved amplitudes.
        for x in u.iter_mut() {
            *x /= scale;
        }
        per_source.push(grid_decay_fit(op, &u, y)?);
    }
    let rate = per_source.iter().map(|d| d.rate).sum::<f64>() / per_source.len() as f64;
    Ok(ResolventDecay {
        energy,
        gap_distance,
        rate,
        per_source,
    })
}

/// Decay rates at several energies, with a flag telling whether the rate
/// strictly increases with the distance to the spectrum.
pub fn combes_thomas_table(
    op: &GridOperator,
    energies: &[f64],
    sources: &[usize],
    resolution: f64,
) -> Result<(Vec<ResolventDecay>, bool)> {
    let mut rows = energies
        .iter()
        .map(|&e| resolvent_decay(op, e, sources, resolution))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.gap_distance.total_cmp(&b.gap_distance));
    let monotone = rows.windows(2).all(|w| w[1].rate > w[0].rate);
    Ok((rows, monotone))
}

/// Per-eigenstate localization data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateRecord {
    pub energy: f64,
    pub ipr: f64,
    pub decay_rate: f64,
    pub fit_quality: f64,
    /// Node of largest amplitude.
    pub center: Vec<f64>,
    pub in_gap: bool,
    /// Largest amplitude on nodes next to the Dirichlet boundary.
    pub boundary_amplitude: f64,
    /// Decay rate of the unperturbed resolvent at this energy (gap states).
    pub resolvent_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LocalizationVerdict {
    GapStatesLocalized,
    NotLocalized,
    NoGapStates,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalizationOptions {
    /// Coupling strength `λ` in `H₀ + λ V_ω`.
    pub lambda: f64,
    /// Merge resolution for the gaps of the unperturbed operator; `None`
    /// uses ten times the median level spacing.
    pub gap_resolution: Option<f64>,
    /// Smallest distance to the unperturbed spectrum at which resolvent
    /// rates are measured.
    pub resolvent_margin: f64,
    /// Number of in-band states sampled for the bulk reference (all when
    /// the operator is small enough for the dense solver).
    pub bulk_sample: usize,
    /// Fit-quality threshold used by the verdict.
    pub min_quality: f64,
    /// Box doublings allowed while a gap state reaches the boundary.
    pub max_doublings: u32,
}

impl Default for LocalizationOptions {
    fn default() -> Self {
        LocalizationOptions {
            lambda: 1.0,
            gap_resolution: None,
            resolvent_margin: 1e-6,
            bulk_sample: 200,
            min_quality: 0.9,
            max_doublings: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalizationReport {
    pub grid: GridBox,
    pub gaps: Vec<Gap>,
    pub states: Vec<StateRecord>,
    pub gap_states: usize,
    pub median_gap_ipr: Option<f64>,
    pub median_bulk_ipr: Option<f64>,
    /// Fraction of gap states whose decay fit reaches `min_quality`.
    pub good_fit_fraction: Option<f64>,
    /// Some gap state still exceeds `1e-8` on the boundary.
    pub boundary_limited: bool,
    pub verdict: LocalizationVerdict,
    pub note: Option<String>,
}

fn state_record(
    op: &GridOperator,
    energy: f64,
    v: &[f64],
    in_gap: bool,
    h0: Option<&GridOperator>,
    resolution: f64,
) -> Result<StateRecord> {
    let (imax, _) = v.iter().enumerate().fold((0, 0.0f64), |acc, (i, x)| {
        if x.abs() > acc.1 {
            (i, x.abs())
        } else {
            acc
        }
    });
    let fit = grid_decay_fit(op, v, imax)?;
    let boundary_amplitude = (0..op.len())
        .filter(|&i| op.grid.touches_boundary(i))
        .map(|i| v[i].abs())
        .fold(0.0, f64::max);
    let resolvent_rate = match (in_gap, h0) {
        (true, Some(h0)) if h0.grid == op.grid => resolvent_decay(h0, energy, &[imax], resolution)
            .ok()
            .map(|r| r.rate),
        _ => None,
    };
    Ok(StateRecord {
        energy,
        ipr: ipr(v)?,
        decay_rate: fit.rate,
        fit_quality: fit.quality,
        center: op.grid.node(imax),
        in_gap,
        boundary_amplitude,
        resolvent_rate,
    })
}

/// Ten times the median spacing of consecutive eigenvalues.
pub fn auto_resolution(h0: &GridOperator) -> Result<f64> {
    let vals = eigenvalues(h0, EnergyWindow::All)?;
    let spacings: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(10.0 * median(&spacings).unwrap_or(1.0).max(f64::EPSILON))
}

fn grow(grid: &GridBox) -> GridBox {
    GridBox {
        lo: grid
            .lo
            .iter()
            .zip(&grid.n)
            .map(|(l, &k)| l - (k + 1) as f64 * grid.h / 2.0)
            .collect(),
        n: grid.n.iter().map(|&k| 2 * k + 1).collect(),
        h: grid.h,
    }
}

/// Eigenstates of `H₀ + λ V_ω` inside the gaps of `h0`, compared with
/// in-band states. Gap states are localized when their median IPR is at
/// least ten times the bulk median and at least 90% of their decay fits
/// reach `min_quality`.
///
/// When a gap state still has amplitude above `1e-8` on the boundary the
/// box is doubled about its centre (up to `max_doublings` times, and only
/// while the couplings cover it); `h0` is re-sampled on the larger box
/// from the model's background.
pub fn localization_report(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    grid: &GridBox,
    h0: &GridOperator,
    options: &LocalizationOptions,
) -> Result<LocalizationReport> {
    if h0.grid != *grid {
        return Err(invalid(
            "the unperturbed operator must live on the same grid",
        ));
    }
    // Growing the box re-samples `h0`, which is only possible when it is
    // the model's own background operator.
    let regrowable = *h0 == super::grid::discretize_background(model, grid)?;
    let mut grid = grid.clone();
    let mut h0 = h0.clone();
    let mut doublings = 0;
    loop {
        let report = localization_once(model, couplings, &grid, &h0, options)?;
        let bigger = grow(&grid);
        let can_grow = regrowable
            && doublings < options.max_doublings
            && bigger.max_norm() + model.potentials.max_reach() <= couplings.coverage;
        if !report.boundary_limited || !can_grow {
            return Ok(report);
        }
        h0 = super::grid::discretize_background(model, &bigger)?;
        grid = bigger;
        doublings += 1;
    }
}

fn localization_once(
    model: &RandomPotentialModel,
    couplings: &CouplingMap,
    grid: &GridBox,
    h0: &GridOperator,
    options: &LocalizationOptions,
) -> Result<LocalizationReport> {
    let op = discretize_scaled(model, couplings, grid, options.lambda)?;
    let resolution = match options.gap_resolution {
        Some(r) => r,
        None => auto_resolution(h0)?,
    };
    let gaps = spectrum_gaps(h0, resolution)?;
    let in_gap = |e: f64| gaps.iter().any(|g| g.contains(e));
    let mut states = Vec::new();
    if op.len() <= super::solve::DENSE_LIMIT {
        let all = eigenpairs(&op, EnergyWindow::All)?;
        for (e, v) in all.eigenvalues.iter().zip(&all.eigenvectors) {
            states.push(state_record(
                &op,
                *e,
                v,
                in_gap(*e),
                Some(h0),
                options.resolvent_margin,
            )?);
        }
    } else {
        let (glo, ghi) = op.spectral_bounds();
        for g in &gaps {
            let lo = g.lo.max(glo - 1.0);
            let hi = g.hi.min(ghi + 1.0);
            let w = eigenpairs(&op, EnergyWindow::Interval { lo, hi })?;
            for (e, v) in w.eigenvalues.iter().zip(&w.eigenvectors) {
                if in_gap(*e) {
                    states.push(state_record(
                        &op,
                        *e,
                        v,
                        true,
                        Some(h0),
                        options.resolvent_margin,
                    )?);
                }
            }
        }
        // Bulk reference: eigenvalues evenly spaced in index.
        let n = op.len();
        let tri = Tridiagonal::from_operator(&op);
        let k = options.bulk_sample.clamp(1, n);
        let mut taken = Vec::new();
        for s in 0..k {
            let idx = if k == 1 { n / 2 } else { s * (n - 1) / (k - 1) };
            if taken.contains(&idx) {
                continue;
            }
            taken.push(idx);
            let e = tri.eigenvalue_by_index(idx)?;
            if in_gap(e) {
                continue;
            }
            let tol = 1e-9 * op.norm_bound().max(1.0);
            let w = eigenpairs(
                &op,
                EnergyWindow::Interval {
                    lo: e - tol,
                    hi: e + tol,
                },
            )?;
            if let (Some(&e), Some(v)) = (w.eigenvalues.first(), w.eigenvectors.first()) {
                states.push(state_record(
                    &op,
                    e,
                    v,
                    false,
                    None,
                    options.resolvent_margin,
                )?);
            }
        }
        states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    }
    let gap_iprs: Vec<f64> = states.iter().filter(|s| s.in_gap).map(|s| s.ipr).collect();
    let bulk_iprs: Vec<f64> = states.iter().filter(|s| !s.in_gap).map(|s| s.ipr).collect();
    let median_gap_ipr = median(&gap_iprs);
    let median_bulk_ipr = median(&bulk_iprs);
    let gap_count = gap_iprs.len();
    let good_fit_fraction = (gap_count > 0).then(|| {
        states
            .iter()
            .filter(|s| s.in_gap && s.fit_quality >= options.min_quality)
            .count() as f64
            / gap_count as f64
    });
    let boundary_limited = states
        .iter()
        .any(|s| s.in_gap && s.boundary_amplitude > 1e-8);
    let (verdict, note) = match (median_gap_ipr, median_bulk_ipr, good_fit_fraction) {
        (None, _, _) => (
            LocalizationVerdict::NoGapStates,
            Some(String::from(
                "no eigenvalue of the perturbed operator lies in a gap",
            )),
        ),
        (Some(g), Some(b), Some(f)) if g >= 10.0 * b && f >= 0.9 => {
            (LocalizationVerdict::GapStatesLocalized, None)
        }
        (Some(_), None, _) => (
            LocalizationVerdict::NotLocalized,
            Some(String::from("no bulk states to compare with")),
        ),
        _ => (LocalizationVerdict::NotLocalized, None),
    };
    Ok(LocalizationReport {
        grid: grid.clone(),
        gaps,
        states,
        gap_states: gap_count,
        median_gap_ipr,
        median_bulk_ipr,
        good_fit_fraction,
        boundary_limited,
        verdict,
        note,
    })
}
