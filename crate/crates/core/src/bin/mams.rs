use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mams::harness::{self, ExperimentConfig};
use mams::models::ModelSpec;
use mams::{Result, Sampler};

#[derive(Parser)]
#[command(name = "mams", version, about = "Metropolis-adjusted microcanonical sampler experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tune a sampler and write the frozen configuration.
    Tune(Common),
    /// Tune, then run chains and write trace, summary and manifest files.
    Sample(Common),
    /// Run every model and sampler of a sweep and write a summary table.
    Benchmark(Common),
    /// Grid search over trajectory length with the step size tuned at each point.
    GridL {
        #[command(flatten)]
        common: Common,
        /// Comma-separated trajectory lengths.
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(c) = self.chains {
            cfg.chains = c;
        }
        if let Some(b) = self.budget {
            cfg.budget = b;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Tune(c) => {
            let cfg = c.load()?;
            let tuned = harness::tune_to_file(&cfg)?;
            println!(
                "step_size = {:.6}, trajectory_length = {:.6}, tuning gradients = {}",
                tuned.kernel.step_size, tuned.kernel.trajectory_length, tuned.tuning_grad_calls
            );
        }
        Command::Sample(c) => {
            let cfg = c.load()?;
            let s = harness::run_experiment(&cfg)?;
            match s.gradients_to_threshold {
                Some(g) => println!("{}: {} gradients to b2 < {}", cfg.model.label(), g, cfg.threshold),
                None => println!("{}: threshold {} not reached", cfg.model.label(), cfg.threshold),
            }
        }
        Command::Benchmark(c) => {
            let cfg = c.load()?;
            let rows = harness::benchmark(&cfg, &ModelSpec::benchmark_suite(), &[Sampler::Mams, Sampler::MamsLangevin, Sampler::Hmc])?;
            std::fs::create_dir_all(&cfg.out)?;
            harness::write_csv(&cfg.out.join("benchmark.csv"), &rows)?;
            for r in &rows {
                let g = r.gradients_to_threshold.map_or("-".to_string(), |g| g.to_string());
                println!("{:<40} {:<14} {:>10}", r.model, r.sampler, g);
            }
        }
        Command::GridL { common, lengths } => {
            let cfg = common.load()?;
            let points = harness::grid_search_l(&cfg, &lengths)?;
            std::fs::create_dir_all(&cfg.out)?;
            harness::write_csv(&cfg.out.join("grid_l.csv"), &points)?;
            for p in &points {
                let g = p.gradients_to_threshold.map_or("-".to_string(), |g| g.to_string());
                println!("L = {:<10.4} eps = {:<10.4} {:>10}", p.trajectory_length, p.step_size, g);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
