//! Cost against condition number on 100-dimensional Gaussians with
//! log-uniform eigenvalues, without preconditioning. For each κ the tuned
//! trajectory length is compared with a grid search.
//!
//! cargo run --release --example condition_scan -- [chains] [out.csv]

use mams::diagnostics::log_log_slope;
use mams::harness::{grid_search_l, run, write_csv, ExperimentConfig};
use mams::{ModelSpec, Sampler};
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    kappa: f64,
    tuned_length: f64,
    tuned_gradients: Option<u64>,
    grid_length: f64,
    grid_gradients: Option<u64>,
}

fn main() -> mams::Result<()> {
    let mut args = std::env::args().skip(1);
    let chains: usize = args.next().map_or(32, |a| a.parse().expect("chains"));
    let out = args.next().unwrap_or_else(|| "condition_scan.csv".into());
    let mut rows = Vec::new();
    for kappa in [1.0, 10.0, 100.0, 1000.0] {
        let mut cfg = ExperimentConfig::new(ModelSpec::IllConditionedGaussian { dim: 100, kappa }, Sampler::Mams, 1_000_000);
        cfg.chains = chains;
        cfg.precondition = false;
        let tuned = run(&cfg)?;
        let l = tuned.summary.trajectory_length;
        let lengths: Vec<f64> = [0.5, 0.7, 1.0, 1.4, 2.0].iter().map(|f| f * l).collect();
        let grid = grid_search_l(&cfg, &lengths)?;
        let best = grid
            .iter()
            .filter(|g| g.gradients_to_threshold.is_some())
            .min_by_key(|g| g.gradients_to_threshold)
            .cloned();
        let row = Row {
            kappa,
            tuned_length: l,
            tuned_gradients: tuned.gradients_to_threshold,
            grid_length: best.as_ref().map_or(f64::NAN, |g| g.trajectory_length),
            grid_gradients: best.and_then(|g| g.gradients_to_threshold),
        };
        println!(
            "κ = {kappa:>6}  tuned L = {:>7.2} ({:?} gradients)  grid L = {:>7.2} ({:?} gradients)",
            row.tuned_length, row.tuned_gradients, row.grid_length, row.grid_gradients
        );
        rows.push(row);
    }
    let (k, g): (Vec<f64>, Vec<f64>) =
        rows.iter().filter_map(|r| r.tuned_gradients.map(|g| (r.kappa, g as f64))).unzip();
    if k.len() >= 2 {
        println!("fitted exponent: {:.3}", log_log_slope(&k, &g));
    }
    write_csv(out.as_ref(), &rows)
}
