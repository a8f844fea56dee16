//! Samples a 100-dimensional standard Gaussian with a deliberately huge step
//! size, with and without the Metropolis adjustment, and writes histograms of
//! the first coordinate. The adjusted chain stays exact; the unadjusted one
//! is visibly biased.
//!
//! cargo run --release --example large_step -- [steps] [out_dir]

use std::fs;
use std::path::PathBuf;

use mams::diagnostics::{ks_pvalue, ks_standard_normal, tau_int};
use mams::models::Gaussian;
use mams::{Chain, ExactSampler, KernelConfig, Sampler, SequenceKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DIM: usize = 100;
const STEP_SIZE: f64 = 20.0;
const BINS: usize = 80;
const RANGE: f64 = 5.0;

fn run(steps: usize, metropolis: bool) -> mams::Result<(Vec<f64>, f64)> {
    let target = Gaussian::standard(DIM)?;
    let mut cfg = KernelConfig::new(STEP_SIZE, STEP_SIZE);
    cfg.sequence = SequenceKind::Fixed;
    cfg.metropolis = metropolis;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut x0 = vec![0.0; DIM];
    target.sample_exact(&mut rng, &mut x0);
    let mut chain = Chain::new(&target, Sampler::Mams, cfg, x0, rng)?;
    let x1 = (0..steps)
        .map(|_| {
            chain.step();
            chain.position()[0]
        })
        .collect();
    Ok((x1, chain.stats().accept_rate()))
}

fn histogram(samples: &[f64]) -> Vec<f64> {
    let width = 2.0 * RANGE / BINS as f64;
    let mut counts = vec![0.0; BINS];
    for &x in samples {
        let b = ((x + RANGE) / width).floor();
        if b >= 0.0 && (b as usize) < BINS {
            counts[b as usize] += 1.0;
        }
    }
    counts.iter().map(|c| c / (samples.len() as f64 * width)).collect()
}

fn main() -> mams::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().map_or(200_000, |a| a.parse().expect("steps"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/large_step".into()));
    fs::create_dir_all(&out)?;
    let width = 2.0 * RANGE / BINS as f64;
    for (name, metropolis) in [("adjusted", true), ("unadjusted", false)] {
        let (x1, accept) = run(steps, metropolis)?;
        let d = ks_standard_normal(&x1);
        let tau = tau_int(&x1)?;
        let n_eff = (x1.len() as f64 / tau).floor() as usize;
        println!(
            "{name:<10} accept = {accept:.3}  var(x1) = {:.3}  tau = {tau:.2}  KS D = {d:.4}  p = {:.3e}",
            x1.iter().map(|x| x * x).sum::<f64>() / x1.len() as f64,
            ks_pvalue(d, n_eff)
        );
        let mut w = csv::Writer::from_path(out.join(format!("histogram_{name}.csv")))?;
        w.write_record(["bin_center", "density"])?;
        for (i, p) in histogram(&x1).iter().enumerate() {
            let center = -RANGE + (i as f64 + 0.5) * width;
            w.write_record([center.to_string(), p.to_string()])?;
        }
        w.flush()?;
    }
    println!("histograms written to {}", out.display());
    Ok(())
}
