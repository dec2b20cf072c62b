//! Config-driven experiment runner for `sparseloc-core`.
//!
//! A run reads a TOML config, executes the pipeline stages in order and
//! writes CSV and JSON-lines data files plus a `manifest.jsonl` into the
//! output directory. Data files depend only on the config and seeds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod formats;
pub mod manifest;
pub mod oracle;
pub mod pipeline;
pub mod plotdata;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "SPARSELOC_WORKERS";

/// Worker count from the environment; `None` when unset.
pub fn workers_from_env() -> Result<Option<usize>, String> {
    match std::env::var(WORKERS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("{WORKERS_ENV}: {e}")),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!(
                "{WORKERS_ENV} must be a positive integer, got {v:?}"
            )),
        },
    }
}
