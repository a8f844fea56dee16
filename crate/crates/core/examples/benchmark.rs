//! Table of gradient calls to reach a squared bias of 0.01 for every sampler
//! on the benchmark models, tuning excluded.
//!
//! cargo run --release --example benchmark -- [chains] [budget]

use mams::harness::{benchmark, ExperimentConfig};
use mams::{ModelSpec, Sampler};

fn main() -> mams::Result<()> {
    let mut args = std::env::args().skip(1);
    let chains: usize = args.next().map_or(32, |a| a.parse().expect("chains"));
    let budget: u64 = args.next().map_or(1_000_000, |a| a.parse().expect("budget"));
    let samplers = [Sampler::Mams, Sampler::MamsLangevin, Sampler::Hmc];
    let mut base = ExperimentConfig::new(ModelSpec::StandardGaussian { dim: 2 }, Sampler::Mams, budget);
    base.chains = chains;
    // The funnel needs a higher acceptance target than the rest, so it is left out here.
    let models: Vec<ModelSpec> = ModelSpec::benchmark_suite()
        .into_iter()
        .filter(|m| !matches!(m, ModelSpec::Funnel { .. }))
        .collect();
    let rows = benchmark(&base, &models, &samplers)?;
    print!("| {:<24} |", "model");
    for s in samplers {
        print!(" {:>14} |", s.name());
    }
    println!();
    for chunk in rows.chunks(samplers.len()) {
        print!("| {:<24} |", chunk[0].model);
        for r in chunk {
            print!(" {:>14} |", r.gradients_to_threshold.map_or("-".into(), |g| g.to_string()));
        }
        println!();
    }
    Ok(())
}
