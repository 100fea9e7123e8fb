use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use scalefb::env::EnvironmentSpec;
use scalefb::experiment::{calibrate_sigma, default_sigma_grid, run_benchmark, ExperimentConfig};
use scalefb::sampler::SamplerConfig;
use scalefb::service::{ServiceConfig, SessionStore, SetRegistry};
use scalefb::TrajectorySet;

#[derive(Parser)]
#[command(name = "scalefb", version, about = "Reward learning from slider feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvKind {
    Synthetic,
    Fetch,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation campaign described by a TOML config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-search the noise level that best predicts held-out answers.
    Calibrate {
        /// Training records of one user; repeat once per user.
        #[arg(long, required = true)]
        train: Vec<PathBuf>,
        /// Validation records, paired with --train by position.
        #[arg(long, required = true)]
        val: Vec<PathBuf>,
        /// Trajectory set the records refer to.
        #[arg(long)]
        set: PathBuf,
        /// Comma-separated σ values; defaults to 0.05,0.10,…,1.00.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, env = "SCALEFB_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Write a trajectory set as JSON lines.
    GenEnv {
        #[arg(long, value_enum)]
        kind: EnvKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        dimension: usize,
        /// Defaults to 200 for synthetic sets and all 288 combinations for fetch.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, env = "SCALEFB_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Serve the HTTP session API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: std::net::SocketAddr,
        /// Directory for session logs; sessions are kept in memory without it.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Extra trajectory sets (`*.jsonl`) registered under their file stem.
        #[arg(long)]
        sets_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Bench { config, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if out.is_some() {
                cfg.output_dir = out;
            }
            let result = run_benchmark(&cfg)?;
            let k = cfg.k;
            for metric in &result.metrics {
                for arm in &result.arms {
                    let c = result.curve(arm, *metric).expect("curve per arm");
                    println!(
                        "{:<18} {:<24} k=0 {:>8.4}  k={k} {:>8.4} ± {:.4} (n={})",
                        metric.label(),
                        arm,
                        c.mean[0],
                        c.mean[k],
                        c.sd[k],
                        c.n
                    );
                }
            }
            if let Some(dir) = &cfg.output_dir {
                println!("wrote CSV files to {}", dir.display());
            }
        }
        Command::Calibrate {
            train,
            val,
            set,
            grid,
            samples,
            seed,
        } => {
            if train.len() != val.len() {
                bail!("--train and --val must be given the same number of times");
            }
            let set = Arc::new(TrajectorySet::load(&set)?);
            let read = |paths: &[PathBuf]| -> Result<Vec<_>> {
                paths
                    .iter()
                    .map(|p| scalefb::dataset::load_dataset(p).with_context(|| format!("reading {}", p.display())))
                    .collect()
            };
            let grid = if grid.is_empty() { default_sigma_grid() } else { grid };
            let sampler = SamplerConfig::default().with_samples(samples);
            let result = calibrate_sigma(&read(&train)?, &read(&val)?, &grid, set, &sampler, seed)?;
            for (s, ll) in &result.scores {
                println!("sigma {s:.2}  validation log-likelihood {ll:.4}");
            }
            println!("best sigma {}", result.sigma);
        }
        Command::GenEnv {
            kind,
            out,
            dimension,
            n,
            seed,
        } => {
            let spec = match kind {
                EnvKind::Synthetic => EnvironmentSpec::synthetic(dimension, n.unwrap_or(200), seed),
                EnvKind::Fetch => EnvironmentSpec::fetch(n.unwrap_or(288), seed),
            };
            let set = spec.build()?;
            set.save(&out)?;
            println!("wrote {} trajectories of dimension {} to {}", set.len(), set.dimension(), out.display());
        }
        Command::Serve {
            addr,
            data_dir,
            sets_dir,
            samples,
        } => {
            let mut registry = SetRegistry::with_builtin();
            if let Some(dir) = &sets_dir {
                registry.load_dir(dir)?;
            }
            let config = ServiceConfig {
                samples,
                ..ServiceConfig::default()
            };
            let store = match &data_dir {
                Some(dir) => SessionStore::open(dir, registry, config)?,
                None => SessionStore::in_memory(registry, config),
            };
            let runtime = tokio::runtime::Runtime::new()?;
            println!("listening on http://{addr}");
            runtime.block_on(scalefb::service::serve(Arc::new(store), addr))?;
        }
    }
    Ok(())
}
