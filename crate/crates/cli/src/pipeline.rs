//! Pipeline stages. Each stage writes its data files into the output
//! directory and appends a record to the manifest.
//!
//! Work inside a stage is spread over `(seed, n, γ)` cells and Monte Carlo
//! trial chunks. Results are collected in cell order and trial counts are
//! integers, so the data files do not depend on the number of workers.

use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use sparseloc_core::certify::{
    build_decomposition_quasi1d, build_decomposition_sparse, certify_ac, difference_support,
    growth_ratio_ac, max_scale_within, required_coverage, DecompositionCertificate,
    FreeAnnulusRecord, Quasi1dConstruction, ScaleCounts, Verdict,
};
use sparseloc_core::geometry::TotalDecomposition;
use sparseloc_core::models::{
    quasi_dimension_bound, sample_couplings_in_ball, validate_assumptions, CouplingMap,
    QuasiDimensionReport,
};
use sparseloc_core::spectral::{
    combes_thomas_table, discretize_background, localization_report, GridBox, GridOperator,
    LocalizationOptions, LocalizationReport,
};
use sparseloc_core::stochastic::{
    an_series_row, empirical_shell_constant, quasi1d_threshold, ANSeriesReport, EstimateRecord,
    ScaleSampler,
};

use crate::config::{ExperimentConfig, Pipeline};
use crate::formats::{write_csv, write_json, write_jsonl};
use crate::manifest::{Manifest, RunHeader, StageRecord, StageStatus};
use crate::row;

/// Trials per parallel work item.
pub const TRIAL_CHUNK: u64 = 2048;
/// Largest scale tried when `n_max` is not given.
pub const SCALE_CAP: u32 = 200;

/// A stage that returned an error. The manifest is still written.
#[derive(Debug, thiserror::Error)]
#[error("stage {stage} failed: {message}")]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    manifest: Manifest,
}

impl Runner<'_> {
    fn stage<T>(
        &mut self,
        name: &str,
        body: impl FnOnce(&Path) -> Result<(T, Vec<String>)>,
    ) -> Result<T, StageError> {
        let start = Instant::now();
        let outcome = body(&self.cfg.output);
        let wall_clock_s = start.elapsed().as_secs_f64();
        let (value, files, error) = match outcome {
            Ok((v, files)) => (Some(v), files, None),
            Err(e) => (None, Vec::new(), Some(format!("{e:#}"))),
        };
        self.manifest.stages.push(StageRecord {
            name: name.to_string(),
            files,
            wall_clock_s,
            status: if error.is_none() {
                StageStatus::Ok
            } else {
                StageStatus::Failed
            },
            error: error.clone(),
        });
        let written = self.manifest.write();
        match (value, error) {
            (Some(v), None) => {
                written.map_err(|e| StageError {
                    stage: name.to_string(),
                    message: format!("writing manifest: {e:#}"),
                })?;
                Ok(v)
            }
            (_, message) => Err(StageError {
                stage: name.to_string(),
                message: message.unwrap_or_default(),
            }),
        }
    }
}

/// Runs the configured pipeline on the current rayon pool.
pub fn run(cfg: &ExperimentConfig, workers: usize) -> Result<Manifest, StageError> {
    std::fs::create_dir_all(&cfg.output).map_err(|e| StageError {
        stage: String::from("setup"),
        message: format!("creating {}: {e}", cfg.output.display()),
    })?;
    let header = RunHeader {
        tool: String::from("sparseloc"),
        version: env!("CARGO_PKG_VERSION").to_string(),
        pipeline: cfg.pipeline.name().to_string(),
        config_hash: cfg.hash.clone(),
        seeds: cfg.seeds.clone(),
        workers,
    };
    let mut r = Runner {
        cfg,
        manifest: Manifest::new(header, cfg.output.clone()),
    };
    match cfg.pipeline {
        Pipeline::CertifySparse => {
            let samples = r.stage("sample", |dir| sample_stage(cfg, dir))?;
            let built = r.stage("construct", |dir| {
                sparse_construct_stage(cfg, &samples, dir)
            })?;
            r.stage("certify", |dir| certify_stage(cfg, &samples, &built, dir))?;
        }
        Pipeline::CertifyQuasi1d => {
            let samples = r.stage("sample", |dir| sample_stage(cfg, dir))?;
            let built = r.stage("construct", |dir| {
                quasi1d_construct_stage(cfg, &samples, dir)
            })?;
            r.stage("certify", |dir| certify_stage(cfg, &samples, &built, dir))?;
        }
        Pipeline::LemmaMc => {
            r.stage("estimate", |dir| estimate_stage(cfg, dir))?;
        }
        Pipeline::SpectralProbe => {
            let samples = r.stage("sample", |dir| sample_stage(cfg, dir))?;
            r.stage("spectral", |dir| spectral_stage(cfg, &samples, dir))?;
        }
        Pipeline::FullReport => {
            r.stage("assumptions", |dir| {
                write_json(
                    &dir.join("assumptions.json"),
                    &validate_assumptions(&cfg.model),
                )?;
                Ok(((), vec![String::from("assumptions.json")]))
            })?;
            let samples = r.stage("sample", |dir| sample_stage(cfg, dir))?;
            let built = r.stage("construct", |dir| {
                sparse_construct_stage(cfg, &samples, dir)
            })?;
            r.stage("certify", |dir| certify_stage(cfg, &samples, &built, dir))?;
            r.stage("estimate", |dir| estimate_stage(cfg, dir))?;
            r.stage("spectral", |dir| spectral_stage(cfg, &samples, dir))?;
        }
    }
    Ok(r.manifest)
}

struct Sample {
    seed: u64,
    couplings: CouplingMap,
}

fn sample_stage(cfg: &ExperimentConfig, dir: &Path) -> Result<(Vec<Sample>, Vec<String>)> {
    let model = &cfg.model;
    let radius = model.sites.window_radius();
    let samples: Vec<Sample> = cfg
        .seeds
        .par_iter()
        .map(|&seed| Sample {
            seed,
            couplings: sample_couplings_in_ball(model, seed, radius),
        })
        .collect();
    let eps = cfg.params.eps;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| {
            let values: Vec<f64> = s.couplings.values.iter().flatten().copied().collect();
            let above = values.iter().filter(|&&w| w > eps).count();
            let max = values.iter().copied().fold(0.0, f64::max);
            row![
                s.seed,
                model.sites.len(),
                values.len(),
                s.couplings.coverage,
                above,
                max
            ]
        })
        .collect();
    write_csv(
        &dir.join("samples.csv"),
        &[
            "seed",
            "sites",
            "sampled",
            "coverage",
            "above_eps",
            "max_coupling",
        ],
        &rows,
    )?;
    Ok((samples, vec![String::from("samples.csv")]))
}

/// One `(seed, γ)` cell of a construction.
struct Built {
    seed_index: usize,
    gamma: f64,
    kind: &'static str,
    ell: Option<u64>,
    a: f64,
    n_min: u32,
    n_max: u32,
    decomposition: TotalDecomposition,
    records: Vec<FreeAnnulusRecord>,
    gaps: Vec<u32>,
    counts: Vec<ScaleCounts>,
}

fn grid_cells(seeds: usize, gammas: &[f64]) -> Vec<(usize, f64)> {
    (0..seeds)
        .flat_map(|s| gammas.iter().map(move |&g| (s, g)))
        .collect()
}

fn free_annulus_rows(built: &[Built], samples: &[Sample]) -> Vec<Vec<String>> {
    built
        .iter()
        .flat_map(|b| {
            b.records.iter().map(move |r| {
                row![
                    samples[b.seed_index].seed,
                    b.gamma,
                    r.n,
                    r.a,
                    r.host_inner,
                    r.host_outer,
                    r.r_n,
                    r.free(),
                    r.degenerate
                ]
            })
        })
        .collect()
}

const FREE_HEADER: [&str; 9] = [
    "seed",
    "gamma",
    "n",
    "a",
    "host_inner",
    "host_outer",
    "r_n",
    "free",
    "degenerate",
];

fn sparse_construct_stage(
    cfg: &ExperimentConfig,
    samples: &[Sample],
    dir: &Path,
) -> Result<(Vec<Built>, Vec<String>)> {
    let p = &cfg.params;
    let model = &cfg.model;
    let built = grid_cells(samples.len(), &p.gammas)
        .into_par_iter()
        .map(|(si, gamma)| -> Result<Built> {
            let c = &samples[si].couplings;
            let (ell, a) = growth_ratio_ac(gamma, model.dim())?;
            let top = p
                .n_max
                .unwrap_or_else(|| max_scale_within(a, c.coverage, SCALE_CAP));
            if top < p.n_min {
                bail!(
                    "window radius {} covers no scale n >= {} at a = {a}",
                    c.coverage,
                    p.n_min
                );
            }
            let s = build_decomposition_sparse(model, c, p.eps, gamma, p.n_min..=top)
                .with_context(|| format!("seed {}, γ = {gamma}", samples[si].seed))?;
            Ok(Built {
                seed_index: si,
                gamma,
                kind: "sparse",
                ell: Some(ell),
                a,
                n_min: p.n_min,
                n_max: top,
                decomposition: s.decomposition,
                records: s.records,
                gaps: s.gaps,
                counts: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(
        &dir.join("free_annuli.csv"),
        &FREE_HEADER,
        &free_annulus_rows(&built, samples),
    )?;
    Ok((built, vec![String::from("free_annuli.csv")]))
}

#[derive(Serialize)]
struct QuasiDimensionSummary {
    m: f64,
    c: f64,
    argmax_r: f64,
    pass: bool,
    slope: f64,
    cumulative_c: f64,
    cumulative_pass: bool,
}

impl From<&QuasiDimensionReport> for QuasiDimensionSummary {
    fn from(q: &QuasiDimensionReport) -> Self {
        QuasiDimensionSummary {
            m: q.m,
            c: q.c,
            argmax_r: q.argmax_r,
            pass: q.pass,
            slope: q.slope,
            cumulative_c: q.cumulative_c,
            cumulative_pass: q.cumulative_pass,
        }
    }
}

#[derive(Serialize)]
struct Quasi1dSummary {
    quasi_dimension: QuasiDimensionSummary,
    delta: f64,
    threshold: f64,
    a: f64,
    alpha: f64,
    n_min: u32,
    n_max: u32,
}

/// Largest `n` whose free annulus and cap neighbourhood stay inside the
/// window.
fn quasi1d_top(a: f64, alpha: f64, coverage: f64) -> u32 {
    let mut n = 0;
    while n < SCALE_CAP {
        let next = n + 1;
        let reach = required_coverage(a, next) + (next as f64).powf(alpha);
        if reach > coverage {
            break;
        }
        n = next;
    }
    n
}

fn quasi1d_construct_stage(
    cfg: &ExperimentConfig,
    samples: &[Sample],
    dir: &Path,
) -> Result<(Vec<Built>, Vec<String>)> {
    let p = &cfg.params;
    let model = &cfg.model;
    let sites = &model.sites;
    let quasi = quasi_dimension_bound(sites, 1.0, (sites.window_radius() - 1.0).floor())?;
    let mut delta = 0.0f64;
    for i in 0..sites.len() {
        delta = delta.max(model.p_epsilon(i, p.eps)?);
    }
    let threshold = if delta < 1.0 && quasi.c >= 1.0 {
        quasi1d_threshold(delta, quasi.c)?
    } else {
        f64::INFINITY
    };
    let a = match p.a {
        Some(a) => a,
        None if threshold.is_finite() => 1.05 * threshold,
        None => bail!(
            "no admissible growth ratio: sup p_i(ε) = {delta}, C = {}",
            quasi.c
        ),
    };
    let coverage = samples
        .iter()
        .map(|s| s.couplings.coverage)
        .fold(f64::INFINITY, f64::min);
    let top = p.n_max.unwrap_or_else(|| quasi1d_top(a, p.alpha, coverage));
    if top < p.n_min {
        bail!(
            "window radius {coverage} covers no scale n >= {} at a = {a}",
            p.n_min
        );
    }
    let built = grid_cells(samples.len(), &p.gammas)
        .into_par_iter()
        .map(|(si, gamma)| -> Result<Built> {
            let c = &samples[si].couplings;
            let q: Quasi1dConstruction =
                build_decomposition_quasi1d(model, c, p.eps, gamma, p.alpha, a, p.n_min..=top)
                    .with_context(|| format!("seed {}, γ = {gamma}", samples[si].seed))?;
            Ok(Built {
                seed_index: si,
                gamma,
                kind: "quasi1d",
                ell: None,
                a,
                n_min: p.n_min,
                n_max: top,
                decomposition: q.decomposition,
                records: q.records,
                gaps: q.gaps,
                counts: q.counts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(
        &dir.join("free_annuli.csv"),
        &FREE_HEADER,
        &free_annulus_rows(&built, samples),
    )?;
    let count_rows: Vec<Vec<String>> = built
        .iter()
        .flat_map(|b| {
            b.counts.iter().map(move |k| {
                row![
                    samples[b.seed_index].seed,
                    b.gamma,
                    k.n,
                    k.neighbourhood_sites,
                    k.neighbourhood_bound,
                    k.caps,
                    k.cap_bound,
                    k.cheese_bound_applies,
                    k.cheese_delta
                ]
            })
        })
        .collect();
    write_csv(
        &dir.join("cap_counts.csv"),
        &[
            "seed",
            "gamma",
            "n",
            "neighbourhood_sites",
            "neighbourhood_bound",
            "caps",
            "cap_bound",
            "cheese_bound_applies",
            "cheese_delta",
        ],
        &count_rows,
    )?;
    write_json(
        &dir.join("quasi1d.json"),
        &Quasi1dSummary {
            quasi_dimension: QuasiDimensionSummary::from(&quasi),
            delta,
            threshold,
            a,
            alpha: p.alpha,
            n_min: p.n_min,
            n_max: top,
        },
    )?;
    Ok((
        built,
        vec![
            String::from("free_annuli.csv"),
            String::from("cap_counts.csv"),
            String::from("quasi1d.json"),
        ],
    ))
}

#[derive(Serialize)]
struct CertificateLine {
    seed: u64,
    gamma: f64,
    construction: &'static str,
    ell: Option<u64>,
    a: f64,
    n_min: u32,
    n_max: u32,
    members: usize,
    gaps: Vec<u32>,
    verdict: Verdict,
    partial_sum: f64,
    observed_ratio: Option<f64>,
    tail_log_ratio: Option<f64>,
    tail_bound: Option<f64>,
    max_recompute_error: f64,
    reason: String,
}

fn role_name<T: Serialize>(role: &T) -> String {
    serde_json::to_value(role)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn certify_stage(
    cfg: &ExperimentConfig,
    samples: &[Sample],
    built: &[Built],
    dir: &Path,
) -> Result<((), Vec<String>)> {
    let model = &cfg.model;
    let eps = cfg.params.eps;
    let certs = built
        .par_iter()
        .map(|b| -> Result<DecompositionCertificate> {
            let diff = difference_support(model, &samples[b.seed_index].couplings, eps, None);
            Ok(certify_ac(&b.decomposition, &diff, b.gamma)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut terms = Vec::new();
    let mut lines = Vec::with_capacity(certs.len());
    for (b, cert) in built.iter().zip(&certs) {
        let seed = samples[b.seed_index].seed;
        for t in &cert.records {
            terms.push(row![
                seed,
                b.gamma,
                t.n,
                t.member,
                role_name(&t.role),
                t.delta,
                t.delta_lower,
                t.weight,
                t.term
            ]);
        }
        lines.push(CertificateLine {
            seed,
            gamma: b.gamma,
            construction: b.kind,
            ell: b.ell,
            a: b.a,
            n_min: b.n_min,
            n_max: b.n_max,
            members: b.decomposition.members.len(),
            gaps: b.gaps.clone(),
            verdict: cert.verdict,
            partial_sum: cert.partial_sum,
            observed_ratio: cert.observed_ratio,
            tail_log_ratio: cert.tail_log_ratio,
            tail_bound: cert.tail_bound,
            max_recompute_error: cert.max_recompute_error(),
            reason: cert.reason.clone(),
        });
    }
    write_csv(
        &dir.join("terms.csv"),
        &[
            "seed",
            "gamma",
            "n",
            "member",
            "role",
            "delta",
            "delta_lower",
            "weight",
            "term",
        ],
        &terms,
    )?;
    write_jsonl(&dir.join("certificates.jsonl"), &lines)?;
    Ok((
        (),
        vec![
            String::from("terms.csv"),
            String::from("certificates.jsonl"),
        ],
    ))
}

#[derive(Serialize)]
struct SeriesLine<'a> {
    seed: u64,
    trials: u64,
    #[serde(flatten)]
    report: &'a ANSeriesReport,
}

/// Growth ratio used by the lemma estimator.
pub fn lemma_growth_ratio(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.params.a {
        Some(a) => Ok(a),
        None => Ok(growth_ratio_ac(cfg.params.gammas[0], cfg.model.dim())?.1),
    }
}

fn estimate_stage(cfg: &ExperimentConfig, dir: &Path) -> Result<((), Vec<String>)> {
    let p = &cfg.params;
    let model = &cfg.model;
    let a = lemma_growth_ratio(cfg)?;
    let window = model.sites.window_radius();
    let top = p
        .n_max
        .unwrap_or_else(|| max_scale_within(a, window, SCALE_CAP));
    if top < p.n_min {
        bail!(
            "window radius {window} covers no scale n >= {} at a = {a}",
            p.n_min
        );
    }
    let ns: Vec<u32> = (p.n_min..=top).collect();

    let exact = ns
        .par_iter()
        .map(|&n| an_series_row(model, p.eps, a, n, 0, 0))
        .collect::<sparseloc_core::Result<Vec<_>>>()?;
    let samplers = ns
        .iter()
        .map(|&n| ScaleSampler::new(model, p.eps, a, n))
        .collect::<sparseloc_core::Result<Vec<_>>>()?;

    let chunks = p.trials.div_ceil(TRIAL_CHUNK);
    let items: Vec<(usize, usize, u64)> = (0..cfg.seeds.len())
        .flat_map(|s| (0..ns.len()).flat_map(move |k| (0..chunks).map(move |c| (s, k, c))))
        .collect();
    let counts: Vec<u64> = items
        .par_iter()
        .map(|&(s, k, c)| {
            let lo = c * TRIAL_CHUNK;
            let hi = (lo + TRIAL_CHUNK).min(p.trials);
            samplers[k].count(cfg.seeds[s], lo..hi)
        })
        .collect();

    let shell = empirical_shell_constant(&model.sites, &ns, window).ok();
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let mut reports = Vec::new();
    for (s, &seed) in cfg.seeds.iter().enumerate() {
        let mut series = exact.clone();
        for (k, row) in series.iter_mut().enumerate() {
            let base = (s * ns.len() + k) * chunks as usize;
            let hits: u64 = counts[base..base + chunks as usize].iter().sum();
            let mut est = EstimateRecord::from_counts(hits, p.trials, seed)?.with_exact(row.exact);
            est.degenerate = row.degenerate;
            row.estimate = Some(est);
        }
        let mut report = ANSeriesReport::from_rows(a, p.eps, series);
        report.shell_constant = shell;
        reports.push((seed, report));
    }
    for (seed, report) in &reports {
        for r in &report.rows {
            let est = r
                .estimate
                .as_ref()
                .ok_or_else(|| anyhow!("missing estimate"))?;
            rows.push(row![
                r.n,
                r.exact,
                est.value,
                est.std_error,
                r.bound(),
                r.partial_sum,
                *seed,
                role_name(&r.method),
                r.closed_form.map(|b| b.value),
                r.eta,
                r.product_bound,
                r.degenerate
            ]);
        }
        lines.push(SeriesLine {
            seed: *seed,
            trials: p.trials,
            report,
        });
    }
    write_csv(
        &dir.join("an_series.csv"),
        &[
            "n",
            "exact",
            "estimate",
            "stderr",
            "bound",
            "partial_sum",
            "seed",
            "method",
            "closed_form",
            "eta",
            "product_bound",
            "degenerate",
        ],
        &rows,
    )?;
    write_jsonl(&dir.join("borel_cantelli.jsonl"), &lines)?;
    Ok((
        (),
        vec![
            String::from("an_series.csv"),
            String::from("borel_cantelli.jsonl"),
        ],
    ))
}

/// Default grid spacing per dimension.
pub fn default_spacing(dim: usize) -> f64 {
    if dim == 1 {
        0.25
    } else {
        0.5
    }
}

/// Probe box of the spectral stage.
pub fn probe_grid(cfg: &ExperimentConfig) -> Result<GridBox> {
    let s = &cfg.params.spectral;
    let dim = cfg.model.dim();
    let center = s.center.clone().unwrap_or_else(|| vec![0.0; dim]);
    let h = s.h.unwrap_or_else(|| default_spacing(dim));
    Ok(GridBox::centered(&center, s.half_width, h)?)
}

fn nearest_node(op: &GridOperator, x: &[f64]) -> usize {
    (0..op.len())
        .map(|i| {
            let d: f64 = op
                .grid
                .node(i)
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (i, d)
        })
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        )
        .0
}

#[derive(Serialize)]
struct LocalizationLine<'a> {
    seed: u64,
    grid: &'a GridBox,
    gaps: Vec<(f64, f64)>,
    gap_states: usize,
    states: usize,
    median_gap_ipr: Option<f64>,
    median_bulk_ipr: Option<f64>,
    good_fit_fraction: Option<f64>,
    boundary_limited: bool,
    verdict: sparseloc_core::spectral::LocalizationVerdict,
    note: &'a Option<String>,
}

#[derive(Serialize)]
struct CombesThomasLine {
    energies: Vec<f64>,
    monotone: bool,
}

fn spectral_stage(
    cfg: &ExperimentConfig,
    samples: &[Sample],
    dir: &Path,
) -> Result<((), Vec<String>)> {
    let s = &cfg.params.spectral;
    let model = &cfg.model;
    let grid = probe_grid(cfg)?;
    let h0 = discretize_background(model, &grid)?;
    let options = LocalizationOptions {
        lambda: s.lambda,
        gap_resolution: s.gap_resolution,
        bulk_sample: s.bulk_sample,
        max_doublings: s.max_doublings,
        ..LocalizationOptions::default()
    };
    let reports = samples
        .par_iter()
        .map(|smp| -> Result<LocalizationReport> {
            localization_report(model, &smp.couplings, &grid, &h0, &options)
                .with_context(|| format!("seed {}", smp.seed))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (smp, rep) in samples.iter().zip(&reports) {
        for st in &rep.states {
            rows.push(row![
                smp.seed,
                st.energy,
                st.ipr,
                st.decay_rate,
                st.fit_quality,
                st.in_gap,
                st.boundary_amplitude,
                st.resolvent_rate
            ]);
        }
        lines.push(LocalizationLine {
            seed: smp.seed,
            grid: &rep.grid,
            gaps: rep.gaps.iter().map(|g| (g.lo, g.hi)).collect(),
            gap_states: rep.gap_states,
            states: rep.states.len(),
            median_gap_ipr: rep.median_gap_ipr,
            median_bulk_ipr: rep.median_bulk_ipr,
            good_fit_fraction: rep.good_fit_fraction,
            boundary_limited: rep.boundary_limited,
            verdict: rep.verdict,
            note: &rep.note,
        });
    }
    write_csv(
        &dir.join("ipr_vs_energy.csv"),
        &[
            "seed",
            "energy",
            "ipr",
            "decay_rate",
            "fit_quality",
            "in_gap",
            "boundary_amplitude",
            "resolvent_rate",
        ],
        &rows,
    )?;
    write_jsonl(&dir.join("localization.jsonl"), &lines)?;
    let mut files = vec![
        String::from("ipr_vs_energy.csv"),
        String::from("localization.jsonl"),
    ];

    if !s.probe_energies.is_empty() {
        let center = s.center.clone().unwrap_or_else(|| vec![0.0; model.dim()]);
        let source = nearest_node(&h0, &center);
        let (table, monotone) =
            combes_thomas_table(&h0, &s.probe_energies, &[source], options.resolvent_margin)?;
        let rows: Vec<Vec<String>> = table
            .iter()
            .map(|r| row![r.energy, r.gap_distance, r.rate])
            .collect();
        write_csv(
            &dir.join("combes_thomas.csv"),
            &["energy", "gap_distance", "rate"],
            &rows,
        )?;
        write_jsonl(
            &dir.join("combes_thomas.jsonl"),
            &[CombesThomasLine {
                energies: s.probe_energies.clone(),
                monotone,
            }],
        )?;
        files.push(String::from("combes_thomas.csv"));
        files.push(String::from("combes_thomas.jsonl"));
    }
    Ok(((), files))
}
