//! Experiment configuration: a TOML document with strict key checking.
//!
//! ```toml
//! pipeline = "certify-sparse"
//! output = "out/sparse"
//! seeds = [1, 2, 3]
//!
//! [model]
//! sites = { kind = "lattice", dim = 2, radius = 60.0 }
//! potential = { profile = { shape = "indicator", height = -1.0, radius = 0.4 } }
//! laws = { rule = "bernoulli_decay", tau = 1.5 }
//!
//! [params]
//! eps = 0.1
//! gammas = [0.5, 1.0]
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sparseloc_core::models::{
    Background, LawRule, PotentialRule, Profile, RandomPotentialModel, SingleSitePotential, SiteSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    CertifySparse,
    CertifyQuasi1d,
    LemmaMc,
    SpectralProbe,
    FullReport,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::CertifySparse => "certify-sparse",
            Pipeline::CertifyQuasi1d => "certify-quasi1d",
            Pipeline::LemmaMc => "lemma-mc",
            Pipeline::SpectralProbe => "spectral-probe",
            Pipeline::FullReport => "full-report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SitesSpec {
    Lattice {
        dim: usize,
        radius: f64,
    },
    /// `ℤ × S`.
    Tube {
        cross_section: Vec<Vec<f64>>,
        radius: f64,
    },
    Explicit {
        dim: usize,
        points: Vec<Vec<f64>>,
        #[serde(default)]
        window: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub profile: Profile,
    #[serde(default = "default_p_exponent")]
    pub p_exponent: f64,
    /// `(c, s)` with `|f| ≥ c` on `B(0, s)`.
    #[serde(default)]
    pub lower_bump: Option<(f64, f64)>,
}

fn default_p_exponent() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub sites: SitesSpec,
    pub potential: PotentialSpec,
    pub laws: LawRule,
    #[serde(default)]
    pub background: Background,
    /// Coordinates of the distinguished site.
    #[serde(default)]
    pub distinguished: Option<Vec<f64>>,
}

impl ModelSpec {
    pub fn build(&self) -> sparseloc_core::Result<RandomPotentialModel> {
        let sites = match &self.sites {
            SitesSpec::Lattice { dim, radius } => SiteSet::lattice(*dim, *radius)?,
            SitesSpec::Tube {
                cross_section,
                radius,
            } => SiteSet::tube(cross_section.clone(), *radius)?,
            SitesSpec::Explicit {
                dim,
                points,
                window,
            } => SiteSet::explicit(*dim, points.clone(), *window)?,
        };
        let mut f = SingleSitePotential::from_profile(
            self.potential.profile.clone(),
            sites.dim(),
            self.potential.p_exponent,
        )?;
        if let Some((c, s)) = self.potential.lower_bump {
            f = f.with_lower_bump(c, s);
        }
        self.background.validate()?;
        let mut model =
            RandomPotentialModel::new(sites, PotentialRule::Shared(f), self.laws.clone())?
                .with_background(self.background.clone());
        if let Some(x) = &self.distinguished {
            let Some(k) = model.sites.index_of(x) else {
                return Err(sparseloc_core::Error::InvalidArgument(String::from(
                    "distinguished site is not in the site set",
                )));
            };
            model = model.with_distinguished(k)?;
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralParams {
    /// Box half-width around `center`.
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    /// Grid spacing; 0.25 in d = 1 and 0.5 in d = 2 when absent.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub gap_resolution: Option<f64>,
    /// Energies for the resolvent-decay table.
    #[serde(default)]
    pub probe_energies: Vec<f64>,
    #[serde(default = "default_bulk_sample")]
    pub bulk_sample: usize,
    #[serde(default = "default_doublings")]
    pub max_doublings: u32,
}

fn default_half_width() -> f64 {
    20.0
}

fn one() -> f64 {
    1.0
}

fn default_bulk_sample() -> usize {
    200
}

fn default_doublings() -> u32 {
    2
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams {
            half_width: default_half_width(),
            h: None,
            center: None,
            lambda: 1.0,
            gap_resolution: None,
            probe_energies: Vec::new(),
            bulk_sample: default_bulk_sample(),
            max_doublings: default_doublings(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    /// Growth ratio. When absent the constructions use `a = 1 + 1/ℓ` from
    /// the first γ, and the quasi-1D pipeline uses 1.05 times its
    /// threshold.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "one_u32")]
    pub n_min: u32,
    /// Largest scale; the largest one the site window covers when absent.
    #[serde(default)]
    pub n_max: Option<u32>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub spectral: SpectralParams,
}

fn default_eps() -> f64 {
    0.1
}

fn default_gammas() -> Vec<f64> {
    vec![1.0]
}

fn default_alpha() -> f64 {
    2.0
}

fn one_u32() -> u32 {
    1
}

fn default_trials() -> u64 {
    10_000
}

impl Default for Params {
    fn default() -> Self {
        Params {
            eps: default_eps(),
            gammas: default_gammas(),
            a: None,
            alpha: default_alpha(),
            n_min: 1,
            n_max: None,
            trials: default_trials(),
            spectral: SpectralParams::default(),
        }
    }
}

/// The document as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub pipeline: Pipeline,
    pub output: PathBuf,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    /// TOML file holding a `ModelSpec`.
    #[serde(default)]
    pub model_file: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
}

/// A validated configuration with its model built and paths resolved.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub pipeline: Pipeline,
    pub output: PathBuf,
    pub seeds: Vec<u64>,
    pub model_spec: ModelSpec,
    pub model: RandomPotentialModel,
    pub params: Params,
    /// SHA-256 of the config text followed by the model file text, if any.
    pub hash: String,
}

/// One problem found while loading a config.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid config {}:", self.path.display())?;
        for d in &self.diagnostics {
            writeln!(f, "  {d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Line of `key = ...` inside `[table]` (or a dotted/inline form of it).
fn locate(text: &str, table: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut fallback = None;
    let want = if table.is_empty() {
        key.to_string()
    } else {
        format!("{table}.{key}")
    };
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line
                .trim_matches(|c| c == '[' || c == ']')
                .trim()
                .to_string();
            if current == want {
                return Some(k + 1);
            }
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else {
            continue;
        };
        let lhs = lhs.trim();
        let full = if current.is_empty() {
            lhs.to_string()
        } else {
            format!("{current}.{lhs}")
        };
        if full == want {
            return Some(k + 1);
        }
        if fallback.is_none() && lhs == key {
            fallback = Some(k + 1);
        }
    }
    fallback
}

struct Collector<'a> {
    text: &'a str,
    out: Vec<Diagnostic>,
}

impl Collector<'_> {
    fn push(&mut self, table: &str, key: &str, message: impl Into<String>) {
        let field = if table.is_empty() {
            key.to_string()
        } else {
            format!("{table}.{key}")
        };
        self.out.push(Diagnostic {
            field,
            line: locate(self.text, table, key),
            message: message.into(),
        });
    }
}

fn hash_text(parts: &[&str]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

fn parse_error(path: &Path, field: &str, text: &str, err: toml::de::Error) -> ConfigError {
    let line = err
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    ConfigError {
        path: path.to_path_buf(),
        diagnostics: vec![Diagnostic {
            field: field.to_string(),
            line,
            message: err.message().to_string(),
        }],
    }
}

/// Reads and validates a config file.
pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        diagnostics: vec![Diagnostic {
            field: String::from("<file>"),
            line: None,
            message: e.to_string(),
        }],
    })?;
    parse(&text, path)
}

/// Validates config text; `path` locates relative references.
pub fn parse(text: &str, path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| parse_error(path, "<document>", text, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut c = Collector {
        text,
        out: Vec::new(),
    };

    let mut model_text = String::new();
    let spec = match (&raw.model, &raw.model_file) {
        (Some(m), None) => Some(m.clone()),
        (None, Some(file)) => {
            let full = base.join(file);
            match std::fs::read_to_string(&full) {
                Ok(t) => match toml::from_str::<ModelSpec>(&t) {
                    Ok(m) => {
                        model_text = t;
                        Some(m)
                    }
                    Err(e) => {
                        let inner = parse_error(&full, "model_file", &t, e);
                        c.push(
                            "",
                            "model_file",
                            format!("{}: {}", full.display(), inner.diagnostics[0]),
                        );
                        None
                    }
                },
                Err(e) => {
                    c.push("", "model_file", format!("{}: {e}", full.display()));
                    None
                }
            }
        }
        (Some(_), Some(_)) => {
            c.push(
                "",
                "model_file",
                "give either [model] or model_file, not both",
            );
            None
        }
        (None, None) => {
            c.push("", "model", "a [model] table or model_file is required");
            None
        }
    };

    let p = &raw.params;
    if !(p.eps > 0.0 && p.eps <= 1.0) {
        c.push(
            "params",
            "eps",
            format!("ε must lie in (0, 1], got {}", p.eps),
        );
    }
    if p.gammas.is_empty() {
        c.push("params", "gammas", "at least one γ is required");
    }
    if let Some(g) = p.gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        c.push(
            "params",
            "gammas",
            format!("every γ must be positive, got {g}"),
        );
    }
    if let Some(a) = p.a {
        if !(a > 1.0 && a.is_finite()) {
            c.push(
                "params",
                "a",
                format!("growth ratio must exceed 1, got {a}"),
            );
        }
    }
    if !(p.alpha > 1.0) {
        c.push(
            "params",
            "alpha",
            format!("α must exceed 1, got {}", p.alpha),
        );
    }
    if p.n_min == 0 {
        c.push("params", "n_min", "scales start at n >= 1");
    }
    if let Some(top) = p.n_max {
        if top < p.n_min {
            c.push(
                "params",
                "n_max",
                format!("n_max = {top} is below n_min = {}", p.n_min),
            );
        }
    }
    if p.trials == 0 && matches!(raw.pipeline, Pipeline::LemmaMc | Pipeline::FullReport) {
        c.push("params", "trials", "Monte Carlo pipelines need trials >= 1");
    }
    let s = &p.spectral;
    if !(s.half_width > 0.0) {
        c.push(
            "params.spectral",
            "half_width",
            "box half-width must be positive",
        );
    }
    if let Some(h) = s.h {
        if !(h > 0.0 && h < s.half_width) {
            c.push(
                "params.spectral",
                "h",
                format!("spacing must lie in (0, half_width), got {h}"),
            );
        }
    }
    if !(s.lambda.is_finite()) {
        c.push(
            "params.spectral",
            "lambda",
            "coupling strength must be finite",
        );
    }
    if let Some(r) = s.gap_resolution {
        if !(r > 0.0) {
            c.push(
                "params.spectral",
                "gap_resolution",
                "resolution must be positive",
            );
        }
    }
    if raw.seeds.is_empty() {
        c.push("", "seeds", "at least one seed is required");
    }
    if raw.output.as_os_str().is_empty() {
        c.push("", "output", "output directory must be named");
    }

    let model = spec.as_ref().and_then(|m| match m.build() {
        Ok(model) => Some(model),
        Err(e) => {
            let key = if raw.model.is_some() {
                "model"
            } else {
                "model_file"
            };
            c.push("", key, e.to_string());
            None
        }
    });
    if let (Some(m), Some(center)) = (&model, &s.center) {
        if center.len() != m.dim() {
            c.push(
                "params.spectral",
                "center",
                "center dimension differs from the model",
            );
        }
    }
    if matches!(raw.pipeline, Pipeline::SpectralProbe | Pipeline::FullReport) {
        if let Some(m) = &model {
            if m.dim() > 2 {
                c.push(
                    "model",
                    "sites",
                    "spectral probes support d = 1 and d = 2 only",
                );
            }
        }
    }

    if !c.out.is_empty() {
        return Err(ConfigError {
            path: path.to_path_buf(),
            diagnostics: c.out,
        });
    }
    Ok(ExperimentConfig {
        pipeline: raw.pipeline,
        output: base.join(&raw.output),
        seeds: raw.seeds,
        model_spec: spec.expect("checked above"),
        model: model.expect("checked above"),
        params: raw.params,
        hash: hash_text(&[text, &model_text]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
pipeline = "certify-sparse"
output = "out"
seeds = [1]

[model]
sites = { kind = "lattice", dim = 1, radius = 30.0 }
potential = { profile = { shape = "indicator", height = -1.0, radius = 0.25 } }
laws = { rule = "shared", law = { kind = "bernoulli", p = 0.1 } }

[params]
eps = 0.5
"#;

    #[test]
    fn minimal_config_loads() {
        let cfg = parse(MINIMAL, Path::new("/tmp/x.toml")).unwrap();
        assert_eq!(cfg.pipeline, Pipeline::CertifySparse);
        assert_eq!(cfg.output, PathBuf::from("/tmp/out"));
        assert_eq!(cfg.model.sites.len(), 61);
        assert_eq!(cfg.hash.len(), 64);
    }

    #[test]
    fn bad_eps_is_reported_with_its_line() {
        let text = MINIMAL.replace("eps = 0.5", "eps = 0.0");
        let err = parse(&text, Path::new("x.toml")).unwrap_err();
        assert_eq!(err.diagnostics.len(), 1);
        assert_eq!(err.diagnostics[0].field, "params.eps");
        assert_eq!(err.diagnostics[0].line, Some(12));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("eps = 0.5", "epsilon = 0.5");
        let err = parse(&text, Path::new("x.toml")).unwrap_err();
        assert!(err.diagnostics[0].message.contains("epsilon"));
        assert_eq!(err.diagnostics[0].line, Some(12));
    }

    #[test]
    fn hash_follows_the_text() {
        let a = parse(MINIMAL, Path::new("x.toml")).unwrap();
        let b = parse(
            &MINIMAL.replace("seeds = [1]", "seeds = [2]"),
            Path::new("x.toml"),
        )
        .unwrap();
        assert_ne!(a.hash, b.hash);
    }
}
