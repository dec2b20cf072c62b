use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sparseloc::formats::read_csv;
use sparseloc::manifest::Manifest;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparseloc"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(config: &Path) -> Output {
    bin().arg("run").arg(config).output().unwrap()
}

fn manifest_of(out: &Output) -> Manifest {
    assert!(
        out.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let path = String::from_utf8(out.stdout.clone()).unwrap();
    Manifest::read(Path::new(path.trim())).unwrap()
}

const SPARSE: &str = r#"
pipeline = "certify-sparse"
output = "out"
seeds = [1, 2, 3, 4, 5]

[model]
sites = { kind = "lattice", dim = 2, radius = 30.0 }
potential = { profile = { shape = "indicator", height = -1.0, radius = 0.4 } }
laws = { rule = "bernoulli_decay", tau = 1.5 }

[params]
eps = 0.1
gammas = [0.5, 1.0]
"#;

#[test]
fn zero_eps_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        &SPARSE.replace("eps = 0.1", "eps = 0.0"),
    );
    let out = run(&cfg);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("params.eps"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        &SPARSE.replace("eps = 0.1", "epsilon = 0.1"),
    );
    let out = run(&cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certify_sparse_lists_a_certificate_per_seed_and_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest_of(&run(&write_config(dir.path(), "c.toml", SPARSE)));
    let names: Vec<&str> = m.stages.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["sample", "construct", "certify"]);
    assert_eq!(m.header.seeds, [1, 2, 3, 4, 5]);
    let text = std::fs::read_to_string(m.dir.join("certificates.jsonl")).unwrap();
    let mut cells: Vec<(u64, f64)> = text
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (v["seed"].as_u64().unwrap(), v["gamma"].as_f64().unwrap())
        })
        .collect();
    cells.dedup();
    assert_eq!(cells.len(), 10);
    for s in &m.stages {
        assert!(s.wall_clock_s >= 0.0);
        for f in &s.files {
            assert!(m.dir.join(f).exists(), "{f}");
        }
    }
}

#[test]
fn identical_configs_give_identical_data() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.toml", &SPARSE.replace("\"out\"", "\"a\""));
    let b = write_config(dir.path(), "b.toml", &SPARSE.replace("\"out\"", "\"b\""));
    let (ma, mb) = (manifest_of(&run(&a)), manifest_of(&run(&b)));
    let files: Vec<&str> = ma.files().collect();
    assert!(!files.is_empty());
    for f in files {
        let x = std::fs::read(ma.dir.join(f)).unwrap();
        let y = std::fs::read(mb.dir.join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn lemma_mc_writes_the_an_series() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
pipeline = "lemma-mc"
output = "out"
seeds = [7]

[model]
sites = { kind = "lattice", dim = 1, radius = 40.0 }
potential = { profile = { shape = "indicator", height = 1.0, radius = 0.25 } }
laws = { rule = "bernoulli_decay", tau = 1.0 }

[params]
eps = 0.5
a = 2.0
n_max = 3
trials = 2000
"#;
    let m = manifest_of(&run(&write_config(dir.path(), "l.toml", body)));
    let (header, rows) = read_csv(&m.dir.join("an_series.csv")).unwrap();
    assert_eq!(header[..5], ["n", "exact", "estimate", "stderr", "bound"]);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let exact: f64 = r[1].parse().unwrap();
        let bound: f64 = r[4].parse().unwrap();
        assert!(exact <= bound + 1e-12);
    }
    assert!(m.dir.join("borel_cantelli.jsonl").exists());
}

#[test]
fn spectral_probe_writes_ipr_table_and_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
pipeline = "spectral-probe"
output = "out"
seeds = [11]

[model]
sites = { kind = "lattice", dim = 1, radius = 60.0 }
potential = { profile = { shape = "indicator", height = -3.0, radius = 1.0 } }
laws = { rule = "shared", law = { kind = "bernoulli_uniform", p = 0.1, lo = 0.5, hi = 1.0 } }

[params.spectral]
half_width = 20.0
h = 0.5
probe_energies = [-0.5, -1.0]
"#;
    let m = manifest_of(&run(&write_config(dir.path(), "s.toml", body)));
    let (header, rows) = read_csv(&m.dir.join("ipr_vs_energy.csv")).unwrap();
    assert_eq!(header[..3], ["seed", "energy", "ipr"]);
    assert!(!rows.is_empty());
    let out = bin().arg("plotdata").arg(m.path()).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(m.dir.join("plotdata/ipr_vs_energy.csv").exists());
}

#[test]
fn plotdata_rejects_an_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.jsonl");
    std::fs::write(&path, "").unwrap();
    let out = bin().arg("plotdata").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn oracle_matches_the_hand_count() {
    // Radii 4..8 are each clean with probability 1/4; a width-2 annulus
    // with r in [4, 6] is free iff {5,6}, {6,7} or {7,8} is clean, which
    // happens with probability 10/64.
    let out = bin()
        .args([
            "oracle", "an", "--p", "0.5", "--shell", "4:8", "--a", "2", "--n", "2",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["exact"].as_f64().unwrap() - 54.0 / 64.0).abs() < 1e-12);
    assert_eq!(v["method"], "enumeration");
}
