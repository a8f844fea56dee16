//! Measures the integrated autocorrelation time at a range of fixed
//! trajectory lengths and prints the length the tuning rule would propose
//! from each, `c · (time per sample) · τ̄`. Where proposal and input agree is
//! the rule's fixed point.
//!
//! cargo run --release --example autocorrelation -- [dim] [kappa] [L,L,...]

use mams::diagnostics::{harmonic_mean_tau, tau_int};
use mams::harness::{tune, ExperimentConfig};
use mams::models::ModelSpec;
use mams::{Chain, Preconditioned, Sampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 20_000;

fn main() -> mams::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim: usize = args.next().map_or(100, |a| a.parse().expect("dim"));
    let kappa: f64 = args.next().map_or(1.0, |a| a.parse().expect("kappa"));
    let lengths: Vec<f64> = args
        .next()
        .unwrap_or_else(|| "4,6,8,10,14,20".into())
        .split(',')
        .map(|v| v.parse().expect("length"))
        .collect();
    let model = ModelSpec::IllConditionedGaussian { dim, kappa };
    let target = model.build()?;
    let sampler = Sampler::Mams;
    println!("{:>8} {:>8} {:>10} {:>8} {:>10}", "L", "eps", "time", "tau", "proposed");
    for l in lengths {
        let mut cfg = ExperimentConfig::new(model.clone(), sampler, 200_000);
        cfg.trajectory_length = Some(l);
        let (tuned, start) = tune(&cfg, &target)?;
        let pre = Preconditioned::new(&target, tuned.scales.clone())?;
        let mut xt = vec![0.0; dim];
        pre.to_transformed(&start, &mut xt);
        let mut chain = Chain::new(pre, sampler, tuned.kernel.clone(), xt, ChaCha8Rng::seed_from_u64(9))?;
        let mut columns = vec![Vec::with_capacity(SAMPLES); dim];
        for _ in 0..SAMPLES {
            chain.step();
            for (c, x) in columns.iter_mut().zip(chain.position()) {
                c.push(*x);
            }
        }
        let taus = columns.iter().map(|c| tau_int(c)).collect::<mams::Result<Vec<_>>>()?;
        let tau = harmonic_mean_tau(&taus)?;
        let time = chain.time_per_sample();
        println!(
            "{l:>8.2} {:>8.3} {time:>10.3} {tau:>8.3} {:>10.3}",
            tuned.kernel.step_size,
            sampler.alba_constant() * time * tau
        );
    }
    Ok(())
}
