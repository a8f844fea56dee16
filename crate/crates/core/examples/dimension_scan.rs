//! Gradient calls to reach a squared bias of 0.01 on standard Gaussians of
//! growing dimension, with the fitted power law.
//!
//! cargo run --release --example dimension_scan -- [chains] [out.csv]

use mams::diagnostics::log_log_slope;
use mams::harness::{run, write_csv, ExperimentConfig};
use mams::{ModelSpec, Sampler};
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    dim: usize,
    gradients_to_threshold: Option<u64>,
    step_size: f64,
    trajectory_length: f64,
}

fn main() -> mams::Result<()> {
    let mut args = std::env::args().skip(1);
    let chains: usize = args.next().map_or(128, |a| a.parse().expect("chains"));
    let out = args.next().unwrap_or_else(|| "dimension_scan.csv".into());
    let mut rows = Vec::new();
    for dim in [64, 128, 256, 512, 1024] {
        let mut cfg = ExperimentConfig::new(ModelSpec::StandardGaussian { dim }, Sampler::Mams, 40_000);
        cfg.chains = chains;
        let s = run(&cfg)?;
        println!(
            "d = {dim:>5}  gradients = {:>8}  eps = {:.3}  L = {:.2}",
            s.gradients_to_threshold.map_or("-".into(), |g| g.to_string()),
            s.summary.step_size,
            s.summary.trajectory_length
        );
        rows.push(Row {
            dim,
            gradients_to_threshold: s.gradients_to_threshold,
            step_size: s.summary.step_size,
            trajectory_length: s.summary.trajectory_length,
        });
    }
    let (d, g): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.gradients_to_threshold.map(|g| (r.dim as f64, g as f64)))
        .unzip();
    if d.len() >= 2 {
        println!("fitted exponent: {:.3}", log_log_slope(&d, &g));
    }
    write_csv(out.as_ref(), &rows)
}
