//! Per-figure CSV series extracted from a finished run.
//!
//! | file                      | columns                                   |
//! |---------------------------|-------------------------------------------|
//! | `an_vs_bound.csv`         | seed, n, exact, estimate, stderr, bound   |
//! | `delta_terms.csv`         | seed, gamma, n, delta_min, term_sum       |
//! | `ipr_vs_energy.csv`       | seed, energy, ipr, in_gap                 |
//! | `rate_vs_gap_distance.csv`| gap_distance, rate, energy                |

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::formats::{column, read_csv, write_csv};
use crate::manifest::Manifest;

pub const PLOT_DIR: &str = "plotdata";

const AN_COLUMNS: [&str; 6] = ["seed", "n", "exact", "estimate", "stderr", "bound"];
const IPR_COLUMNS: [&str; 4] = ["seed", "energy", "ipr", "in_gap"];
const RATE_COLUMNS: [&str; 3] = ["gap_distance", "rate", "energy"];

fn project(path: &Path, columns: &[&str]) -> Result<Vec<Vec<String>>> {
    let (header, rows) = read_csv(path)?;
    let idx = columns
        .iter()
        .map(|c| column(&header, c))
        .collect::<Result<Vec<_>>>()
        .with_context(|| path.display().to_string())?;
    Ok(rows
        .into_iter()
        .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
        .collect())
}

/// Smallest δ and summed term per `(seed, γ, n)`, in file order.
fn delta_terms(path: &Path) -> Result<Vec<Vec<String>>> {
    let rows = project(path, &["seed", "gamma", "n", "delta", "term"])?;
    let mut out: Vec<(Vec<String>, f64, f64)> = Vec::new();
    for r in rows {
        let key = r[..3].to_vec();
        let delta: f64 = r[3].parse().context("delta")?;
        let term: f64 = r[4].parse().context("term")?;
        match out.last_mut() {
            Some((k, d, t)) if *k == key => {
                *d = d.min(delta);
                *t += term;
            }
            _ => out.push((key, delta, term)),
        }
    }
    Ok(out
        .into_iter()
        .map(|(mut k, d, t)| {
            k.push(d.to_string());
            k.push(t.to_string());
            k
        })
        .collect())
}

/// Writes the per-figure series next to the manifest and returns their
/// paths.
pub fn emit_plotdata(manifest_path: &Path) -> Result<Vec<PathBuf>> {
    let manifest = Manifest::read(manifest_path)?;
    for f in manifest.files() {
        let p = manifest.dir.join(f);
        if !p.is_file() {
            bail!("missing stage output {}", p.display());
        }
    }
    let out_dir = manifest.dir.join(PLOT_DIR);
    std::fs::create_dir_all(&out_dir)?;
    let mut written = Vec::new();
    for f in manifest.files() {
        let src = manifest.dir.join(f);
        let (name, header, rows): (&str, &[&str], Vec<Vec<String>>) = match f {
            "an_series.csv" => ("an_vs_bound.csv", &AN_COLUMNS, project(&src, &AN_COLUMNS)?),
            "terms.csv" => (
                "delta_terms.csv",
                &["seed", "gamma", "n", "delta_min", "term_sum"],
                delta_terms(&src)?,
            ),
            "ipr_vs_energy.csv" => (
                "ipr_vs_energy.csv",
                &IPR_COLUMNS,
                project(&src, &IPR_COLUMNS)?,
            ),
            "combes_thomas.csv" => (
                "rate_vs_gap_distance.csv",
                &RATE_COLUMNS,
                project(&src, &RATE_COLUMNS)?,
            ),
            _ => continue,
        };
        let path = out_dir.join(name);
        write_csv(&path, header, &rows)?;
        written.push(path);
    }
    if written.is_empty() {
        bail!(
            "{} lists no plottable stage outputs",
            manifest_path.display()
        );
    }
    Ok(written)
}
