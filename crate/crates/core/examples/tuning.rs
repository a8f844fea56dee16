//! Tunes each sampler on a Gaussian and reports the frozen hyperparameters
//! and the acceptance rate realized afterwards.
//!
//! cargo run --release --example tuning -- [dim] [kappa]

use mams::adaptation::{run_tuning, TuningSchedule};
use mams::models::{build_gaussian, EigenLayout};
use mams::{Chain, Preconditioned, Sampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mams::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim: usize = args.next().map_or(100, |a| a.parse().expect("dim"));
    let kappa: f64 = args.next().map_or(1.0, |a| a.parse().expect("kappa"));
    let target = build_gaussian(dim, kappa, EigenLayout::LogUniform)?;
    for sampler in [Sampler::Mams, Sampler::MamsLangevin, Sampler::Hmc] {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let schedule = TuningSchedule::new(200_000);
        let r = run_tuning(&target, sampler, &schedule, vec![1.0; dim], &mut rng)?;
        let k = &r.config.kernel;
        let pre = Preconditioned::new(&target, r.config.scales.clone())?;
        let mut xt = vec![0.0; dim];
        pre.to_transformed(&r.position, &mut xt);
        let mut chain = Chain::new(pre, sampler, k.clone(), xt, ChaCha8Rng::seed_from_u64(1))?;
        for _ in 0..5000 {
            chain.step();
        }
        println!(
            "{:<14} eps = {:.4}  L = {:.4}  tuning grads = {}  accept = {:.3}",
            sampler.name(),
            k.step_size,
            k.trajectory_length,
            r.config.tuning_grad_calls,
            chain.stats().accept_rate()
        );
        for u in &r.config.alba_history {
            println!("    tau = {:.3}  L {:.4} -> {:.4}{}", u.tau, u.old_length, u.new_length, if u.held { " (held)" } else { "" });
        }
    }
    Ok(())
}
