use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparseloc::config;
use sparseloc::oracle::{line_model, line_radius, oracle_an};
use sparseloc::pipeline;
use sparseloc::plotdata::emit_plotdata;
use sparseloc::workers_from_env;

#[derive(Parser)]
#[command(
    name = "sparseloc",
    version,
    about = "Sparse random potential experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline a config describes.
    Run { config: PathBuf },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Write per-figure CSV series for a finished run.
    Plotdata { manifest: PathBuf },
    /// Exact reference values.
    #[command(subcommand)]
    Oracle(Oracle),
}

#[derive(Subcommand)]
enum Oracle {
    /// Exact probability that no ε-free annulus of width n lies in [a^n, a^(n+1)].
    An(AnArgs),
}

#[derive(Args)]
struct AnArgs {
    /// Model file (the `[model]` table of a config, at top level).
    #[arg(long, conflicts_with_all = ["p", "shell"])]
    model: Option<PathBuf>,
    /// Bernoulli parameter on the shell of a line model.
    #[arg(long, requires = "shell")]
    p: Option<f64>,
    /// `LO:HI`: sites of ℤ with LO ≤ |i| ≤ HI carry the random couplings.
    #[arg(long, value_parser = parse_shell, requires = "p")]
    shell: Option<(f64, f64)>,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
}

fn parse_shell(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn pool() -> Result<(rayon::ThreadPool, usize), String> {
    let n = workers_from_env()?.unwrap_or_else(rayon::current_num_threads);
    let p = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| e.to_string())?;
    Ok((p, n))
}

fn run(path: PathBuf) -> ExitCode {
    let cfg = match config::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    let (pool, workers) = match pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| pipeline::run(&cfg, workers)) {
        Ok(m) => {
            println!("{}", m.path().display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

fn oracle(args: AnArgs) -> ExitCode {
    let model = match (&args.model, args.p, args.shell) {
        (Some(path), _, _) => std::fs::read_to_string(path)
            .map_err(anyhow::Error::from)
            .and_then(|t| Ok(toml::from_str::<config::ModelSpec>(&t)?))
            .and_then(|spec| Ok(spec.build()?)),
        (None, Some(p), Some((lo, hi))) => {
            let radius = line_radius(args.a, args.n).max(hi + 1.0);
            line_model(p, lo, hi, radius)
        }
        _ => {
            eprintln!("give --model or both --p and --shell");
            return ExitCode::from(2);
        }
    };
    let result = model.and_then(|m| oracle_an(&m, args.eps, args.a, args.n));
    match result {
        Ok(r) => {
            println!("{}", serde_json::to_string(&r).expect("serializable"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e:#}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => run(config),
        Command::Validate { config } => match config::load(&config) {
            Ok(c) => {
                println!(
                    "ok: {} pipeline, {} sites, {} seeds, hash {}",
                    c.pipeline.name(),
                    c.model.sites.len(),
                    c.seeds.len(),
                    c.hash
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprint!("{e}");
                ExitCode::from(2)
            }
        },
        Command::Plotdata { manifest } => match emit_plotdata(&manifest) {
            Ok(files) => {
                for f in files {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e:#}");
                ExitCode::from(1)
            }
        },
        Command::Oracle(Oracle::An(args)) => oracle(args),
    }
}
