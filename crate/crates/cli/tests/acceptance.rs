//! Acceptance checks. Prints one `PASS`/`FAIL` line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use anyhow::{anyhow, ensure, Context, Result};
use serde_json::Value;
use sparseloc::formats::read_csv;
use sparseloc::manifest::Manifest;
use sparseloc_core::certify::{
    build_decomposition_sparse, certify_ac, difference_support, growth_ratio_ac, max_scale_within,
    Verdict,
};
use sparseloc_core::geometry::{
    generalized_surface_area, sphere_shell_decomposition, RegionSet, DEFAULT_RESOLUTION,
};
use sparseloc_core::models::{
    CouplingLaw, CouplingMap, LawRule, PotentialRule, Profile, RandomPotentialModel,
    SingleSitePotential, SiteSet,
};
use sparseloc_core::spectral::{
    combes_thomas_table, eigenpairs, resolvent_decay, EnergyWindow, GridBox, GridOperator,
};
use sparseloc_core::stochastic::{
    a_n_bound, an_series_row, brute_force_a_n, estimate_a_n, estimate_free_probability,
};

fn indicator(dim: usize, height: f64, radius: f64) -> PotentialRule {
    PotentialRule::Shared(
        SingleSitePotential::from_profile(Profile::Indicator { height, radius }, dim, 2.0)
            .expect("indicator profile"),
    )
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Copy of a shipped config with its output redirected into `dir`.
fn config_into(name: &str, dir: &Path) -> Result<PathBuf> {
    let text = std::fs::read_to_string(configs_dir().join(name))?;
    let out = dir.join("out");
    let text: String = text
        .lines()
        .map(|l| {
            if l.starts_with("output") {
                format!("output = {:?}", out.display().to_string())
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn run_binary(config: &Path, workers: Option<usize>) -> Result<Manifest> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sparseloc"));
    cmd.arg("run").arg(config);
    if let Some(w) = workers {
        cmd.env("SPARSELOC_WORKERS", w.to_string());
    }
    let out = cmd.output()?;
    ensure!(
        out.status.success(),
        "sparseloc run failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let path = String::from_utf8(out.stdout)?.trim().to_string();
    Manifest::read(Path::new(&path))
}

fn jsonl(path: &Path) -> Result<Vec<Value>> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Into::into))
        .collect()
}

fn relative(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Duration)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed()))
}

fn surface_areas() -> Result<String> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let cases = [
        ("sigma(point), d=1", RegionSet::point(vec![0.0])?, 2.0, 0.05),
        (
            "sigma(point), d=2",
            RegionSet::point(vec![0.0, 0.0])?,
            golden * std::f64::consts::PI,
            0.05,
        ),
        (
            "sigma(sphere r=5), d=2",
            RegionSet::sphere(vec![0.0, 0.0], 5.0)?,
            20.0 * std::f64::consts::PI,
            0.10,
        ),
    ];
    let mut notes = Vec::new();
    for (label, set, want, tol) in cases {
        let (s, t) = timed(|| Ok(generalized_surface_area(&set, DEFAULT_RESOLUTION, None)?))?;
        ensure!(
            relative(s.sigma, want) <= tol,
            "{label} = {} vs {want}",
            s.sigma
        );
        ensure!(t < Duration::from_secs(30), "{label} took {t:?}");
        notes.push(format!("{label} = {:.4}", s.sigma));
    }
    Ok(notes.join(", "))
}

fn ten_site_product() -> Result<String> {
    let sites = SiteSet::lattice(1, 10.0)?;
    let m = RandomPotentialModel::new(
        sites,
        indicator(1, 1.0, 0.25),
        LawRule::Shared {
            law: CouplingLaw::Bernoulli { p: 0.1 },
        },
    )?;
    // Sites -4..=5.
    let region = RegionSet::ball(vec![0.5], 4.6)?;
    let want = 0.9f64.powi(10);
    let mut inside = 0;
    for seed in 0..100 {
        let r = estimate_free_probability(&m, &region, 0.5, 10_000, seed)?;
        let exact = r.exact.ok_or_else(|| anyhow!("no exact value reported"))?;
        ensure!((exact - want).abs() < 1e-12, "exact {exact} vs {want}");
        if (r.value - want).abs() <= 3.0 * r.std_error {
            inside += 1;
        }
    }
    ensure!(inside >= 99, "{inside} of 100 seeds within 3 SE");
    Ok(format!(
        "exact 0.9^10 = {want:.6}, {inside}/100 seeds within 3 SE"
    ))
}

fn line_enumeration() -> Result<String> {
    let sites = SiteSet::lattice(1, 20.0)?;
    let laws = (0..sites.len())
        .map(|i| {
            let p = if (4.0..=8.0).contains(&sites.site_norm(i)) {
                0.5
            } else {
                0.0
            };
            CouplingLaw::Bernoulli { p }
        })
        .collect();
    let m = RandomPotentialModel::new(sites, indicator(1, 1.0, 0.25), LawRule::PerSite { laws })?;
    let (exact, t) = timed(|| Ok(brute_force_a_n(&m, 0.5, 2.0, 2)?))?;
    ensure!(t < Duration::from_secs(1), "enumeration took {t:?}");
    let est = estimate_a_n(&m, 0.5, 2.0, 2, 10_000, 1)?;
    ensure!(
        (est.value - exact).abs() <= 3.0 * est.std_error,
        "estimate {} ± {} vs exact {exact}",
        est.value,
        est.std_error
    );
    Ok(format!(
        "exact {exact:.6} in {:.3} s, estimate {:.6} ± {:.6}",
        t.as_secs_f64(),
        est.value,
        est.std_error
    ))
}

fn lemma_bound() -> Result<String> {
    let b = a_n_bound(2.0, 0.25, 10)?;
    ensure!(
        (b.value - 0.00332).abs() <= 1e-5,
        "a_n_bound(2, 0.25, 10) = {}",
        b.value
    );
    let m = RandomPotentialModel::new(
        SiteSet::lattice(2, 130.0)?,
        indicator(2, 1.0, 0.25),
        LawRule::BernoulliDecay {
            tau: 3.0,
            amplitude: 1.0,
        },
    )?;
    for n in 2..=6 {
        let row = an_series_row(&m, 0.5, 2.0, n, 20_000, 7)?;
        let est = row
            .estimate
            .ok_or_else(|| anyhow!("no estimate for n = {n}"))?;
        ensure!(
            est.value <= row.bound() + 3.0 * est.std_error,
            "n = {n}: estimate {} ± {} above bound {}",
            est.value,
            est.std_error,
            row.bound()
        );
    }
    Ok(format!(
        "a_n_bound(2, 0.25, 10) = {:.6}, estimates below bound for n = 2..6",
        b.value
    ))
}

fn sparse_certificates() -> Result<String> {
    let m = RandomPotentialModel::new(
        SiteSet::lattice(2, 140.0)?,
        indicator(2, -1.0, 0.4),
        LawRule::Shared {
            law: CouplingLaw::Bernoulli { p: 0.0 },
        },
    )?;
    let c = CouplingMap::constant(&m, 0.0, 140.0);
    for gamma in [0.1, 0.5, 1.0, 2.0] {
        let (_, a) = growth_ratio_ac(gamma, 2)?;
        let top = max_scale_within(a, 140.0, 60);
        let built = build_decomposition_sparse(&m, &c, 0.1, gamma, 1..=top)?;
        let diff = difference_support(&m, &c, 0.1, None);
        let cert = certify_ac(&built.decomposition, &diff, gamma)?;
        ensure!(
            cert.verdict == Verdict::Certified,
            "γ = {gamma}: {}",
            cert.reason
        );
    }
    // Spheres of radius 2^n in d = 3 with a defect n/2 outside each one:
    // σ grows like 4^n while e^{-0.1 δ} decays only like e^{-n/20}.
    let radii: Vec<f64> = (1..=16).map(|n| 2f64.powi(n)).collect();
    let decomposition = sphere_shell_decomposition(&radii, 3)?;
    let mut support = RegionSet::empty(3);
    for n in 1..=16 {
        let r = 2f64.powi(n) + n as f64 / 2.0;
        support = support.union(RegionSet::point(vec![r, 0.0, 0.0])?)?;
    }
    let cert = certify_ac(&decomposition, &support, 0.1)?;
    ensure!(
        cert.verdict == Verdict::NotCertified,
        "negative control came out {:?}: {}",
        cert.verdict,
        cert.reason
    );
    Ok(String::from(
        "all-zero certified for γ ∈ {0.1, 0.5, 1, 2}; growing control not certified",
    ))
}

fn quasi1d(dir: &Path) -> Result<String> {
    let manifest = run_binary(&config_into("certify_quasi1d.toml", dir)?, None)?;
    let certs = jsonl(&manifest.dir.join("certificates.jsonl"))?;
    let mut seen = BTreeMap::new();
    for c in &certs {
        let gamma = c["gamma"].as_f64().unwrap_or(f64::NAN);
        let verdict = c["verdict"].as_str().unwrap_or("");
        ensure!(
            verdict == "certified",
            "seed {} γ = {gamma}: {verdict}",
            c["seed"]
        );
        *seen.entry(gamma.to_string()).or_insert(0) += 1;
    }
    ensure!(
        seen.contains_key("0.5") && seen.contains_key("1"),
        "γ coverage {seen:?}"
    );
    let (header, rows) = read_csv(&manifest.dir.join("cap_counts.csv"))?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("cap_counts.csv has no {name} column"))
    };
    let (n_col, caps_col) = (col("n")?, col("caps")?);
    for r in &rows {
        let n: f64 = r[n_col].parse()?;
        let caps: f64 = r[caps_col].parse()?;
        ensure!(caps <= 2.0 * n * n + 2.0, "n = {n}: {caps} caps");
    }
    Ok(format!(
        "{} certificates, {} scale rows within 2n^2 + 2",
        certs.len(),
        rows.len()
    ))
}

fn free_chain() -> Result<String> {
    let n = 100;
    let op = GridOperator::free(GridBox::new(vec![0.0], vec![n], 1.0)?)?;
    let r = eigenpairs(&op, EnergyWindow::All)?;
    let err = r
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            (e - want).abs()
        })
        .fold(0.0, f64::max);
    ensure!(
        r.eigenvalues.len() == n && err <= 1e-10,
        "max eigenvalue error {err:e}"
    );
    let long = GridOperator::free(GridBox::new(vec![0.0], vec![201], 1.0)?)?;
    let d = resolvent_decay(&long, -2.0, &[100], 1e-3)?;
    let want = 2f64.acosh();
    ensure!(
        relative(d.rate, want) <= 0.10,
        "rate at E = -2: {} vs {want}",
        d.rate
    );
    let (rows, monotone) = combes_thomas_table(&long, &[-0.5, -1.0, -2.0], &[100], 1e-3)?;
    let rates: Vec<f64> = rows.iter().map(|r| r.rate).collect();
    ensure!(
        monotone && rates.windows(2).all(|w| w[0] < w[1]),
        "rates {rates:?}"
    );
    Ok(format!(
        "eigenvalue error {err:.1e}, rate(-2) = {:.4}, rates {rates:.3?}",
        d.rate
    ))
}

fn localization(dir: &Path) -> Result<String> {
    let (manifest, t) = timed(|| run_binary(&config_into("spectral_probe.toml", dir)?, None))?;
    ensure!(t < Duration::from_secs(120), "spectral probe took {t:?}");
    let reports = jsonl(&manifest.dir.join("localization.jsonl"))?;
    ensure!(!reports.is_empty(), "no localization report");
    for r in &reports {
        let verdict = r["verdict"].as_str().unwrap_or("");
        ensure!(
            verdict == "gap-states-localized",
            "seed {}: {verdict}",
            r["seed"]
        );
    }
    Ok(format!("gap states localized in {:.1} s", t.as_secs_f64()))
}

fn worker_invariance(dir: &Path) -> Result<String> {
    let mut runs = Vec::new();
    for w in [1, 4, 8] {
        let sub = dir.join(format!("w{w}"));
        std::fs::create_dir_all(&sub)?;
        let manifest = run_binary(&config_into("full_report.toml", &sub)?, Some(w))?;
        let mut files = BTreeMap::new();
        for f in manifest.files() {
            let bytes = std::fs::read(manifest.dir.join(f)).with_context(|| f.to_string())?;
            files.insert(f.to_string(), bytes);
        }
        runs.push(files);
    }
    ensure!(!runs[0].is_empty(), "no data files");
    for (k, other) in runs.iter().enumerate().skip(1) {
        ensure!(
            other.keys().eq(runs[0].keys()),
            "file lists differ between runs 0 and {k}"
        );
        for (name, bytes) in other {
            ensure!(
                runs[0][name] == *bytes,
                "{name} differs between 1 worker and run {k}"
            );
        }
    }
    Ok(format!(
        "{} data files identical for 1, 4 and 8 workers",
        runs[0].len()
    ))
}

type Check<'a> = Box<dyn FnOnce() -> Result<String> + 'a>;

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let subdir = |name: &str| {
        let p = dir.path().join(name);
        std::fs::create_dir_all(&p).expect("temporary subdirectory");
        p
    };
    let criteria: Vec<(&str, Check)> = vec![
        (
            "surface area of a point and a circle",
            Box::new(surface_areas),
        ),
        (
            "ten-site product and Monte Carlo calibration",
            Box::new(ten_site_product),
        ),
        (
            "line a_n by enumeration and Monte Carlo",
            Box::new(line_enumeration),
        ),
        (
            "closed-form bound and decaying-p estimates",
            Box::new(lemma_bound),
        ),
        (
            "sparse certificates and negative control",
            Box::new(sparse_certificates),
        ),
        (
            "quasi-1D certificates on Z x {0}",
            Box::new(|| quasi1d(&subdir("quasi1d"))),
        ),
        (
            "free chain spectrum and resolvent decay",
            Box::new(free_chain),
        ),
        (
            "localization proxy for sparse wells",
            Box::new(|| localization(&subdir("spectral"))),
        ),
        (
            "worker-count invariance of full-report",
            Box::new(|| worker_invariance(&subdir("workers"))),
        ),
    ];
    let mut failed = 0;
    for (k, (label, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!(
                "PASS {} {label}: {detail} ({:.2} s)",
                k + 1,
                start.elapsed().as_secs_f64()
            ),
            Err(e) => {
                failed += 1;
                println!("FAIL {} {label}: {e:#}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
