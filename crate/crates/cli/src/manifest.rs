//! Run manifests: one JSON line describing the run, then one per stage.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::formats::write_jsonl;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub tool: String,
    pub version: String,
    pub pipeline: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    /// Paths relative to the manifest's directory.
    pub files: Vec<String>,
    pub wall_clock_s: f64,
    pub status: StageStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Run(RunHeader),
    Stage(StageRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: RunHeader,
    pub stages: Vec<StageRecord>,
    /// Directory the stage files live in.
    pub dir: PathBuf,
}

impl Manifest {
    pub fn new(header: RunHeader, dir: PathBuf) -> Self {
        Manifest {
            header,
            stages: Vec::new(),
            dir,
        }
    }

    pub fn path(&self) -> PathBuf {
        self.dir.join(MANIFEST_FILE)
    }

    pub fn write(&self) -> Result<()> {
        let mut lines = vec![Line::Run(self.header.clone())];
        lines.extend(self.stages.iter().cloned().map(Line::Stage));
        write_jsonl(&self.path(), &lines)
    }

    /// Every data file written by a successful stage.
    pub fn files(&self) -> impl Iterator<Item = &str> {
        self.stages
            .iter()
            .filter(|s| s.status == StageStatus::Ok)
            .flat_map(|s| s.files.iter().map(String::as_str))
    }

    pub fn read(path: &Path) -> Result<Manifest> {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let mut header = None;
        let mut stages = Vec::new();
        for (k, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Line>(&line)
                .with_context(|| format!("{}:{}", path.display(), k + 1))?
            {
                Line::Run(h) => header = Some(h),
                Line::Stage(s) => stages.push(s),
            }
        }
        let Some(header) = header else {
            bail!("{} has no run header", path.display());
        };
        if stages.is_empty() {
            bail!("{} lists no stages", path.display());
        }
        Ok(Manifest {
            header,
            stages,
            dir: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        })
    }
}
